//! Polynomial roots as eigenvalues of a balanced companion matrix, polished by Newton.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A root with its Newton status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyRoot {
    pub value: Complex64,
    pub converged: bool,
}

/// `p(z)` and `p'(z)` by Horner's rule, plus the running bound `Σ |cₙ| |z|ⁿ`.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    let mut mag = 0.0;
    let az = z.norm();
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        mag = mag * az + c.norm();
    }
    (p, dp, mag)
}

/// All roots of `Σ cₖ zᵏ` (ascending coefficients).
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<PolyRoot>> {
    if coeffs.iter().all(|c| !(c.norm() >= 1e-300)) {
        return Err(Error::DegeneratePolynomial);
    }
    let hi = coeffs.iter().rposition(|c| *c != ZERO).expect("nonzero coefficient");
    let lo = coeffs.iter().position(|c| *c != ZERO).expect("nonzero coefficient");
    let mut roots: Vec<PolyRoot> = (0..lo).map(|_| PolyRoot { value: ZERO, converged: true }).collect();
    let degree = hi - lo;
    if degree == 0 {
        return Ok(roots);
    }
    // z = s w balances the two extreme coefficients
    let s = (coeffs[lo].norm() / coeffs[hi].norm()).powf(1.0 / degree as f64);
    let top = coeffs[hi] * (coeffs[lo].norm() / coeffs[hi].norm());
    let mut monic = Vec::with_capacity(degree + 1);
    let mut sp = 1.0;
    for &c in &coeffs[lo..=hi] {
        monic.push(c * sp / top);
        sp *= s;
    }
    let estimates = companion_eigenvalues(&monic);
    let active = &coeffs[lo..=hi];
    let originals: Vec<Complex64> = estimates.iter().map(|&(w, _)| w * s).collect();
    for k in 0..originals.len() {
        let nearest = originals
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, o)| (o - originals[k]).norm())
            .fold(f64::INFINITY, f64::min);
        let (z, converged) = newton(active, originals[k], nearest);
        roots.push(PolyRoot { value: z, converged: converged && estimates[k].1 });
    }
    Ok(roots)
}

/// At most 20 Newton steps. Converged when the step is below
/// `1e-14 (1 + |z|)` or `|p|` reaches the rounding level of its evaluation.
fn newton(coeffs: &[Complex64], start: Complex64, separation: f64) -> (Complex64, bool) {
    let mut z = start;
    let mut best = (z, horner(coeffs, z).0.norm());
    let mut converged = false;
    for _ in 0..20 {
        let (p, dp, mag) = horner(coeffs, z);
        if p.norm() <= 4.0 * f64::EPSILON * mag {
            converged = true;
            break;
        }
        if dp == ZERO {
            break;
        }
        let step = p / dp;
        z -= step;
        let pn = horner(coeffs, z).0.norm();
        if pn < best.1 {
            best = (z, pn);
        }
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            converged = true;
            break;
        }
    }
    if !converged {
        z = best.0;
    }
    // a step across to a neighbouring root means the estimate was not in its basin
    if (z - start).norm() > 0.5 * separation {
        return (start, false);
    }
    (z, converged)
}

/// Eigenvalues of the companion matrix of the monic polynomial `monic`
/// (ascending, leading coefficient 1), each flagged with QR convergence.
fn companion_eigenvalues(monic: &[Complex64]) -> Vec<(Complex64, bool)> {
    let n = monic.len() - 1;
    let mut h = vec![vec![ZERO; n]; n];
    for j in 0..n {
        h[0][j] = -monic[n - 1 - j];
    }
    for i in 1..n {
        h[i][i - 1] = ONE;
    }
    balance(&mut h);
    hessenberg_qr(h)
}

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity scaling by powers of two (Parlett–Reinsch).
fn balance(a: &mut [Vec<Complex64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs1(a[j][i]);
                    r += abs1(a[i][j]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= inv;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

/// Shifted QR iteration with Givens rotations on an upper Hessenberg matrix.
fn hessenberg_qr(mut h: Vec<Vec<Complex64>>) -> Vec<(Complex64, bool)> {
    let n = h.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let norm = h.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    loop {
        if hi == 0 {
            out.push((h[0][0], true));
            break;
        }
        // find the start of the active unreduced block
        let mut l = hi;
        while l > 0 {
            let sub = h[l][l - 1].norm();
            let diag = h[l][l].norm() + h[l - 1][l - 1].norm();
            let scale = if diag == 0.0 { norm } else { diag };
            if sub <= f64::EPSILON * scale {
                h[l][l - 1] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            out.push((h[hi][hi], true));
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 100 {
            // give up on this block; report its diagonal unconverged
            for k in (l..=hi).rev() {
                out.push((h[k][k], false));
            }
            if l == 0 {
                break;
            }
            hi = l - 1;
            iter = 0;
            continue;
        }
        let shift = if iter % 11 == 10 {
            h[hi][hi] + Complex64::new(0.75, 0.43) * h[hi][hi - 1].norm()
        } else {
            wilkinson(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        for k in l..=hi {
            h[k][k] -= shift;
        }
        rot.clear();
        for k in l..hi {
            let (a, b) = (h[k][k], h[k + 1][k]);
            let r = a.norm().hypot(b.norm());
            let (c, s) = if r == 0.0 {
                (1.0, ZERO)
            } else if a == ZERO {
                (0.0, ONE)
            } else {
                let c = a.norm() / r;
                (c, b * c / a)
            };
            for j in k..=hi {
                let (x, y) = (h[k][j], h[k + 1][j]);
                h[k][j] = x * c + s.conj() * y;
                h[k + 1][j] = -s * x + y * c;
            }
            rot.push((c, s));
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = l + idx;
            for row in h.iter_mut().take((k + 1).min(hi) + 1).skip(l) {
                let (x, y) = (row[k], row[k + 1]);
                row[k] = x * c + y * s;
                row[k + 1] = -s.conj() * x + y * c;
            }
        }
        for k in l..=hi {
            h[k][k] += shift;
        }
    }
    out
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let (r1, r2) = (d + half - disc, d + half + disc);
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Coefficients of `Π (z − rₖ)` in ascending order.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![ONE];
    for &r in roots {
        let mut next = vec![ZERO; c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * r;
        }
        c = next;
    }
    c
}
