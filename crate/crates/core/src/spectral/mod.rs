//! Characteristic polynomials, root filtering and the spectral-shift sweep.

pub mod roots;

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homogeneous::{particular_solution, select_nonvanishing, select_nonvanishing_with, ParticularOptions, ParticularSolution};
use crate::spps::SppsSolutionPair;
use crate::system::{DiracSystem, VectorFn};

pub use roots::{polynomial_roots, PolyRoot};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `constant + slope · λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub constant: Complex64,
    pub slope: Complex64,
}

impl Affine {
    pub fn constant(c: Complex64) -> Self {
        Self { constant: c, slope: ZERO }
    }

    pub fn at(&self, lambda: Complex64) -> Complex64 {
        self.constant + self.slope * lambda
    }

    /// Coefficients in `Λ = λ − λ₀`.
    fn shifted(&self, lambda0: Complex64) -> Vec<Complex64> {
        if self.slope == ZERO {
            vec![self.constant]
        } else {
            vec![self.constant + self.slope * lambda0, self.slope]
        }
    }

    fn is_zero(&self) -> bool {
        self.constant == ZERO && self.slope == ZERO
    }

    fn is_real(&self) -> bool {
        self.constant.im == 0.0 && self.slope.im == 0.0
    }
}

/// `a₁ u(a) + a₂ v(a) = 0`, `b₁ u(b) + b₂ v(b) = 0` with coefficients affine in `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub left: [Affine; 2],
    pub right: [Affine; 2],
}

impl BoundaryConditions {
    pub fn new(left: [Complex64; 2], right: [Complex64; 2]) -> Result<Self> {
        Self::affine(left.map(Affine::constant), right.map(Affine::constant))
    }

    pub fn affine(left: [Affine; 2], right: [Affine; 2]) -> Result<Self> {
        if left.iter().all(Affine::is_zero) || right.iter().all(Affine::is_zero) {
            return Err(Error::InvalidSeed("boundary condition has all coefficients zero".into()));
        }
        Ok(Self { left, right })
    }

    /// `u(a) = u(b) = 0`.
    pub fn dirichlet() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::new([one, ZERO], [one, ZERO]).expect("nonzero")
    }

    pub fn is_real(&self) -> bool {
        self.left.iter().chain(&self.right).all(Affine::is_real)
    }

    /// `|b₁ u(b) + b₂ v(b)| / ((|b₁| + |b₂|) max(|u(b)|, |v(b)|))` for a solution
    /// satisfying the left condition.
    pub fn right_residual(&self, y: &VectorFn, lambda: Complex64) -> f64 {
        let n = y.mesh().len() - 1;
        let (u, v) = (y.u.at(n), y.v.at(n));
        let (b1, b2) = (self.right[0].at(lambda), self.right[1].at(lambda));
        let scale = (b1.norm() + b2.norm()) * u.norm().max(v.norm());
        (b1 * u + b2 * v).norm() / scale.max(f64::MIN_POSITIVE)
    }
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len().max(b.len())];
    for (k, o) in out.iter_mut().enumerate() {
        *o = a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO);
    }
    out
}

fn poly_scale(a: &[Complex64], c: Complex64) -> Vec<Complex64> {
    a.iter().map(|&x| x * c).collect()
}

/// Truncated characteristic function `Ξ(Λ) = Σ cₙ Λⁿ` around a center.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolynomial {
    pub coefficients: Vec<Complex64>,
    pub center: Complex64,
    pub trusted_radius: f64,
}

impl CharPolynomial {
    pub fn eval(&self, lambda: Complex64) -> Complex64 {
        roots::horner(&self.coefficients, lambda - self.center).0
    }
}

/// Builds `Ξ` from the boundary values of a solution pair, with the series
/// truncated at `order`.
pub fn characteristic_polynomial_truncated(pair: &SppsSolutionPair, bc: &BoundaryConditions, order: usize) -> CharPolynomial {
    let table = &pair.table;
    let order = order.min(table.order());
    let mesh = table.mesh();
    let last = mesh.len() - 1;
    let l0 = pair.lambda0;
    let series_at = |i: usize| {
        // (u1, v1, u2, v2) coefficient arrays at node i, gauge included
        let w = pair.gauge_at(i);
        let coeffs = table.node_coefficients(i);
        let mut s = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for c in coeffs.iter().take(order + 1) {
            s[0].push(w * c[2]);
            s[1].push(w * c[3]);
            s[2].push(w * c[0]);
            s[3].push(w * c[1]);
        }
        s
    };
    let [a1, a2] = bc.left.map(|a| a.shifted(l0));
    let [b1, b2] = bc.right.map(|b| b.shifted(l0));
    let right = series_at(last);
    let coefficients = if pair.seed().x0_index == 0 {
        let f_a = pair.gauge_at(0) * pair.seed().f.at(0);
        let g_a = pair.gauge_at(0) * pair.seed().g.at(0);
        let ca = poly_scale(&a2, f_a.inv());
        let cb = poly_scale(&a1, -g_a.inv());
        // Y = a2/f(a) Y1 − a1/g(a) Y2 satisfies the left condition
        let u = poly_add(&poly_mul(&ca, &right[0]), &poly_mul(&cb, &right[2]));
        let v = poly_add(&poly_mul(&ca, &right[1]), &poly_mul(&cb, &right[3]));
        poly_add(&poly_mul(&b1, &u), &poly_mul(&b2, &v))
    } else {
        let left = series_at(0);
        let m11 = poly_add(&poly_mul(&a1, &left[0]), &poly_mul(&a2, &left[1]));
        let m12 = poly_add(&poly_mul(&a1, &left[2]), &poly_mul(&a2, &left[3]));
        let m21 = poly_add(&poly_mul(&b1, &right[0]), &poly_mul(&b2, &right[1]));
        let m22 = poly_add(&poly_mul(&b1, &right[2]), &poly_mul(&b2, &right[3]));
        poly_add(&poly_mul(&m11, &m22), &poly_scale(&poly_mul(&m12, &m21), Complex64::new(-1.0, 0.0)))
    };
    CharPolynomial {
        coefficients,
        center: l0,
        trusted_radius: pair.trusted_radius(),
    }
}

pub fn characteristic_polynomial(pair: &SppsSolutionPair, bc: &BoundaryConditions) -> CharPolynomial {
    characteristic_polynomial_truncated(pair, bc, pair.order())
}

/// A root of a characteristic polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    /// `λ = λ₀ + Λ`.
    pub lambda: Complex64,
    /// `Λ`.
    pub offset: Complex64,
    pub converged: bool,
}

pub fn find_roots(p: &CharPolynomial) -> Result<Vec<Root>> {
    Ok(polynomial_roots(&p.coefficients)?
        .into_iter()
        .map(|r| Root { lambda: p.center + r.value, offset: r.value, converged: r.converged })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Discard {
    OutsideRadius,
    UnstableUnderTruncation,
    NotConverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    /// Kept roots with the distance to the nearest lower-order root.
    pub kept: Vec<(Root, f64)>,
    pub discarded: Vec<(Root, Discard)>,
}

/// Keeps a root iff it lies within the trusted radius, a root of the
/// lower-order polynomial lies within `max(1e-8, 1e-6 |Λ|)`, and Newton converged.
pub fn filter_spurious(roots: &[Root], p: &CharPolynomial, lower_roots: &[Root]) -> Filtered {
    let mut out = Filtered { kept: Vec::new(), discarded: Vec::new() };
    for &r in roots {
        let gap = lower_roots.iter().map(|l| (l.lambda - r.lambda).norm()).fold(f64::INFINITY, f64::min);
        let reason = if !(r.offset.norm() <= p.trusted_radius) {
            Some(Discard::OutsideRadius)
        } else if !(gap <= 1e-8f64.max(1e-6 * r.offset.norm())) {
            Some(Discard::UnstableUnderTruncation)
        } else if !r.converged {
            Some(Discard::NotConverged)
        } else {
            None
        };
        match reason {
            Some(d) => out.discarded.push((r, d)),
            None => out.kept.push((r, gap)),
        }
    }
    out
}

/// How eigenvalues are numbered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Indexing {
    /// `n = 0` is the root of smallest modulus; the others are numbered by
    /// increasing / decreasing real part.
    Symmetric,
    /// Only roots with real part above `threshold` count; `n = 0` is the smallest.
    PositiveHalf { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub order: usize,
    pub seed: u64,
    pub candidates: usize,
    pub indexing: Indexing,
    /// Use the shift chain; `false` reports only the center-0 roots.
    pub shift: bool,
    /// Non-vanishing solution at `λ = 0`; built automatically when absent.
    pub initial: Option<ParticularSolution>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            order: 100,
            seed: 0,
            candidates: 20,
            indexing: Indexing::Symmetric,
            shift: true,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub index: i64,
    #[serde(serialize_with = "ser_complex")]
    pub lambda: Complex64,
    /// Expansion center the value was obtained from.
    #[serde(serialize_with = "ser_complex")]
    pub center: Complex64,
    /// Relative right-boundary residual of the eigenfunction.
    pub residual: f64,
    /// Distance to the nearest root of the polynomial truncated five orders lower.
    pub stability_gap: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Eigenvalue>,
    pub warnings: Vec<String>,
}

impl SpectrumResult {
    pub fn get(&self, index: i64) -> Option<&Eigenvalue> {
        self.eigenvalues.iter().find(|e| e.index == index)
    }

    /// `n,re_lambda,im_lambda,center,residual`; complex centers are written as `re+imi`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,re_lambda,im_lambda,center,residual")?;
        for e in &self.eigenvalues {
            let center = if e.center.im == 0.0 {
                format!("{:.16e}", e.center.re)
            } else {
                format!("{:.16e}{:+.16e}i", e.center.re, e.center.im)
            };
            writeln!(w, "{},{:.16e},{:.16e},{},{:.3e}", e.index, e.lambda.re, e.lambda.im, center, e.residual)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Maps every eigenvalue through `f` (e.g. `ω ↦ ω²`).
    pub fn map_values(mut self, f: impl Fn(Complex64) -> Complex64) -> Self {
        for e in &mut self.eigenvalues {
            e.lambda = f(e.lambda);
            e.center = f(e.center);
        }
        self.eigenvalues.sort_by(|a, b| a.index.cmp(&b.index));
        self
    }
}

/// Everything derived from one expansion center.
struct Center {
    pair: SppsSolutionPair,
    kept: Vec<(Root, f64)>,
}

impl Center {
    fn build(pair: SppsSolutionPair, bc: &BoundaryConditions, project: bool) -> Result<Self> {
        let p = characteristic_polynomial(&pair, bc);
        let lower = characteristic_polynomial_truncated(&pair, bc, pair.order().saturating_sub(5).max(1));
        let project_root = |mut r: Root| {
            if project && r.lambda.im.abs() < 1e-9 * (1.0 + r.lambda.norm()) {
                r.lambda.im = 0.0;
                r.offset = r.lambda - pair.lambda0;
            }
            r
        };
        let roots: Vec<Root> = find_roots(&p)?.into_iter().map(project_root).collect();
        let lower_roots: Vec<Root> = find_roots(&lower)?.into_iter().map(project_root).collect();
        let mut kept = filter_spurious(&roots, &p, &lower_roots).kept;
        kept.sort_by(|a, b| a.0.lambda.re.total_cmp(&b.0.lambda.re));
        Ok(Self { pair, kept })
    }

    /// Kept root nearest to the center.
    fn nearest(&self) -> Option<(Root, f64)> {
        self.kept.iter().copied().min_by(|a, b| a.0.offset.norm().total_cmp(&b.0.offset.norm()))
    }

    fn residual(&self, bc: &BoundaryConditions, lambda: Complex64) -> Result<f64> {
        let (e1, e2) = self.pair.fundamental(lambda)?;
        let (a1, a2) = (bc.left[0].at(lambda), bc.left[1].at(lambda));
        // Y(a) = (a2, −a1)
        let y = e1.scale(a2).axpy(-a1, &e2);
        Ok(bc.right_residual(&y, lambda))
    }
}

/// Non-vanishing solution at a new center, built from the current pair.
///
/// Redrawing the combination at every center lets the small defects of the
/// previous seed grow from one center to the next. So the solution with the
/// previous seed's initial values is continued: for real data the normalized
/// solutions are real and `e₁ + i e₂` never vanishes; otherwise that
/// continuation competes with the random draws.
fn next_seed(pair: &SppsSolutionPair, lambda: Complex64, project: bool, opts: &SweepOptions, index: i64) -> Result<VectorFn> {
    let (e1, e2) = pair.fundamental(lambda)?;
    let mut rng = shift_rng(opts.seed, index);
    if project && lambda.im == 0.0 {
        let (y, _) = select_nonvanishing(&e1.real_part(), &e2.real_part(), true, &mut rng, opts.candidates)?;
        return Ok(y);
    }
    let seed = pair.seed();
    let w = pair.gauge_at(seed.x0_index);
    let (fa, ga) = (w * seed.f.at(0), w * seed.g.at(0));
    let (y, _) = if fa.norm() > 0.0 {
        select_nonvanishing_with(&e1, &e2, ga / fa, &mut rng, opts.candidates)?
    } else {
        select_nonvanishing(&e1, &e2, false, &mut rng, opts.candidates)?
    };
    Ok(y)
}

fn shift_rng(seed: u64, index: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Eigenvalues with indices in `[n_min, n_max]`.
pub fn sweep_spectrum(
    sys: &DiracSystem,
    bc: &BoundaryConditions,
    n_min: i64,
    n_max: i64,
    opts: &SweepOptions,
) -> Result<SpectrumResult> {
    let project = sys.is_real() && bc.is_real();
    let initial = match &opts.initial {
        Some(s) => s.clone(),
        None => particular_solution(
            &sys.p_matrix(),
            &ParticularOptions { seed: opts.seed, candidates: opts.candidates, max_order: opts.order, ..Default::default() },
        )?,
    };
    let pair0 = SppsSolutionPair::new(sys, &initial, opts.order)?;
    let center0 = Center::build(pair0, bc, project)?;
    let mut warnings = Vec::new();
    let admissible: Vec<(Root, f64)> = match opts.indexing {
        Indexing::Symmetric => center0.kept.clone(),
        Indexing::PositiveHalf { threshold } => {
            center0.kept.iter().copied().filter(|(r, _)| r.lambda.re > threshold).collect()
        }
    };
    let zero_pos = match opts.indexing {
        Indexing::Symmetric => admissible
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.lambda.norm().total_cmp(&b.1 .0.lambda.norm()))
            .map(|(i, _)| i),
        Indexing::PositiveHalf { .. } => (!admissible.is_empty()).then_some(0),
    }
    .ok_or(Error::SweepStalled { last_index: -1 })?;
    let n_min = match opts.indexing {
        Indexing::PositiveHalf { .. } => n_min.max(0),
        Indexing::Symmetric => n_min,
    };
    let record = |index: i64, center: &Center, root: Root, gap: f64| -> Result<Eigenvalue> {
        Ok(Eigenvalue {
            index,
            lambda: root.lambda,
            center: center.pair.lambda0,
            residual: center.residual(bc, root.lambda)?,
            stability_gap: gap,
        })
    };
    let mut eigenvalues = Vec::new();
    if !opts.shift {
        for (pos, &(root, gap)) in admissible.iter().enumerate() {
            let index = pos as i64 - zero_pos as i64;
            if (n_min..=n_max).contains(&index) {
                eigenvalues.push(record(index, &center0, root, gap)?);
            }
        }
        let found = eigenvalues.len() as i64;
        if found < n_max - n_min + 1 {
            warnings.push(format!(
                "only {found} of the requested indices {n_min}..={n_max} lie within the trusted radius {:.3e} without shifting",
                center0.pair.trusted_radius()
            ));
        }
        return Ok(SpectrumResult { eigenvalues, warnings });
    }
    let (root0, gap0) = admissible[zero_pos];
    if (n_min..=n_max).contains(&0) {
        eigenvalues.push(record(0, &center0, root0, gap0)?);
    }
    let directions: &[i64] = match opts.indexing {
        Indexing::Symmetric => &[1, -1],
        Indexing::PositiveHalf { .. } => &[1],
    };
    for &dir in directions {
        let target = if dir > 0 { n_max } else { n_min };
        if target * dir <= 0 {
            continue;
        }
        let mut center = Center { pair: center0.pair.clone(), kept: center0.kept.clone() };
        let mut prev = root0.lambda;
        let mut step: Option<f64> = None;
        let mut n = 0i64;
        while n != target {
            let window = match step {
                Some(s) => center.pair.trusted_radius().min(3.0 * s + 1.0),
                None => center.pair.trusted_radius(),
            };
            let beyond = |r: &Root| {
                let ahead = (r.lambda.re - prev.re) * dir as f64;
                ahead > 1e-9 * (1.0 + prev.norm()) && (r.lambda - center.pair.lambda0).norm() <= window
            };
            let next = center
                .kept
                .iter()
                .filter(|(r, _)| beyond(r))
                .min_by(|a, b| ((a.0.lambda.re - prev.re) * dir as f64).total_cmp(&((b.0.lambda.re - prev.re) * dir as f64)))
                .map(|&(r, _)| r);
            let Some(candidate) = next else {
                return Err(Error::SweepStalled { last_index: n });
            };
            n += dir;
            let seed_fn = next_seed(&center.pair, candidate.lambda, project, opts, n)?;
            let pair = SppsSolutionPair::shifted(sys, candidate.lambda, &seed_fn, opts.order, 0)?;
            let next_center = Center::build(pair, bc, project)?;
            let (refined, gap) = match next_center.nearest() {
                Some((r, g)) if r.offset.norm() < 0.5 * (candidate.lambda - prev).norm() => (r, g),
                _ => {
                    warnings.push(format!("eigenvalue {n} not confirmed at its own center; keeping the previous estimate"));
                    (Root { lambda: candidate.lambda, offset: ZERO, converged: candidate.converged }, f64::NAN)
                }
            };
            let this_step = (refined.lambda - prev).norm();
            if let Some(s) = step {
                if this_step > 1.8 * s || this_step < s / 1.8 {
                    warnings.push(format!("irregular eigenvalue spacing at index {n}: {this_step:.3e} after {s:.3e}"));
                }
            }
            if (n_min..=n_max).contains(&n) {
                eigenvalues.push(record(n, &next_center, refined, gap)?);
            }
            step = Some(this_step);
            prev = refined.lambda;
            center = next_center;
        }
    }
    eigenvalues.sort_by_key(|e| e.index);
    Ok(SpectrumResult { eigenvalues, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridFn, Mesh};
    use crate::system::Mat2Fn;
    use std::f64::consts::PI;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn free_pair(m: usize, order: usize) -> SppsSolutionPair {
        let mesh = Mesh::new(0.0, 1.0, m).unwrap();
        let sys = DiracSystem::free(mesh);
        let one = GridFn::constant(mesh, c(1.0));
        let sol = ParticularSolution::new(one.clone(), one, 0).unwrap();
        SppsSolutionPair::new(&sys, &sol, order).unwrap()
    }

    #[test]
    fn free_dirichlet_polynomial_is_minus_sine() {
        let pair = free_pair(201, 30);
        let p = characteristic_polynomial(&pair, &BoundaryConditions::dirichlet());
        // Ξ = −u2(1) / g(a) = sin λ
        let mut fact = 1.0;
        for (n, &cn) in p.coefficients.iter().enumerate().take(25) {
            if n > 0 {
                fact *= n as f64;
            }
            let want = match n % 4 {
                1 => 1.0 / fact,
                3 => -1.0 / fact,
                _ => 0.0,
            };
            assert!((cn - c(want)).norm() < 1e-14, "{n}: {cn}");
        }
    }

    #[test]
    fn left_neumann_type_uses_first_solution() {
        let pair = free_pair(51, 10);
        let one = c(1.0);
        let bc = BoundaryConditions::new([ZERO, one], [one, ZERO]).unwrap();
        let p = characteristic_polynomial(&pair, &bc);
        // Ξ = u1(1) = cos λ
        assert!((p.coefficients[0] - one).norm() < 1e-15);
        assert!((p.coefficients[2] + c(0.5)).norm() < 1e-14);
    }

    #[test]
    fn filter_keeps_sine_zeros() {
        let pair = free_pair(2001, 100);
        let bc = BoundaryConditions::dirichlet();
        let p = characteristic_polynomial(&pair, &bc);
        let lower = characteristic_polynomial_truncated(&pair, &bc, 95);
        let roots = find_roots(&p).unwrap();
        let lroots = find_roots(&lower).unwrap();
        let f = filter_spurious(&roots, &p, &lroots);
        // cancellation in the series limits direct accuracy away from the center
        for k in -8i32..=8 {
            let tol = if k.abs() <= 4 { 1e-10 } else { 1e-3 };
            let want = k as f64 * PI;
            assert!(f.kept.iter().any(|(r, _)| (r.lambda - c(want)).norm() < tol), "{k}");
        }
        let mut injected = roots.clone();
        injected.push(Root { lambda: c(1e3 * p.trusted_radius), offset: c(1e3 * p.trusted_radius), converged: true });
        let g = filter_spurious(&injected, &p, &lroots);
        assert!(g.discarded.iter().any(|(r, d)| r.lambda.re > 1e3 && *d == Discard::OutsideRadius));
    }

    #[test]
    fn filter_is_scale_invariant() {
        let pair = free_pair(501, 60);
        let bc = BoundaryConditions::dirichlet();
        let mut p = characteristic_polynomial(&pair, &bc);
        let lower = characteristic_polynomial_truncated(&pair, &bc, 55);
        let lroots = find_roots(&lower).unwrap();
        let kept = |p: &CharPolynomial| {
            let kept = filter_spurious(&find_roots(p).unwrap(), p, &lroots).kept;
            let mut v: Vec<f64> = kept.iter().map(|(r, _)| r.lambda.re).filter(|x| x.abs() < 15.0).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let a = kept(&p);
        p.coefficients = poly_scale(&p.coefficients, Complex64::new(-3.5, 2.0));
        let b = kept(&p);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9, "{x} {y}");
        }
    }

    #[test]
    fn free_system_sweep() {
        let mesh = Mesh::new(0.0, 1.0, 2001).unwrap();
        let sys = DiracSystem::free(mesh);
        let spec = sweep_spectrum(&sys, &BoundaryConditions::dirichlet(), -5, 5, &SweepOptions::default()).unwrap();
        assert_eq!(spec.eigenvalues.len(), 11);
        for e in &spec.eigenvalues {
            assert!((e.lambda - c(e.index as f64 * PI)).norm() < 1e-10, "{e:?}");
            assert!(e.residual < 1e-8);
        }
    }

    #[test]
    fn general_anchor_uses_determinant() {
        let mesh = Mesh::new(0.0, 1.0, 1001).unwrap();
        let sys = DiracSystem::free(mesh);
        let one = GridFn::constant(mesh, c(1.0));
        let sol = ParticularSolution::new(one.clone(), one, 500).unwrap();
        let pair = SppsSolutionPair::new(&sys, &sol, 60).unwrap();
        let p = characteristic_polynomial(&pair, &BoundaryConditions::dirichlet());
        assert!(p.coefficients.len() > 61);
        let roots = find_roots(&p).unwrap();
        for k in -3..=3 {
            assert!(roots.iter().any(|r| (r.lambda - c(k as f64 * PI)).norm() < 1e-9), "{k}");
        }
    }

    #[test]
    fn affine_condition_raises_degree() {
        let pair = free_pair(51, 10);
        let one = c(1.0);
        let bc = BoundaryConditions::affine(
            [Affine::constant(one), Affine { constant: ZERO, slope: one }],
            [Affine::constant(one), Affine::constant(ZERO)],
        )
        .unwrap();
        let p = characteristic_polynomial(&pair, &bc);
        assert_eq!(p.coefficients.len(), 12);
        let _ = Mat2Fn::identity(pair.table.mesh());
    }
}
