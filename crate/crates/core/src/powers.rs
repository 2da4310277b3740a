//! Formal powers of a Dirac system with respect to a particular solution.
//!
//! Powers are stored divided by `n!`: with `x̂ₙ = Xₙ/n!` (same for `Y`, `Z`
//! and the tilde family) the recursion reads
//!
//! ```text
//! ẑₙ   = ∫ (x̂ₙ (f² r11 + fg r21) + ŷₙ (fg r12 + g² r22))
//! x̂ₙ₊₁ = ∫ (−r21 x̂ₙ − r22 (g/f) ŷₙ + (p2/f²) ẑₙ)
//! ŷₙ₊₁ = ∫ (r11 (f/g) x̂ₙ + r12 ŷₙ + (p1/g²) ẑₙ)
//! ```
//!
//! with every integral taken from the anchor `x0`, and the series become
//! `Σ λⁿ (f x̂ₙ, g ŷₙ)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{cumulative_into, GridFn, Mesh};
use crate::homogeneous::ParticularSolution;
use crate::sum::CompensatedSum;
use crate::system::{DiracSystem, VectorFn};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// When the recursion stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Compute exactly up to the requested order.
    Order,
    /// Stop early once the scaled powers drop below `1e-16` of their maximum.
    Converged,
}

/// One order of one family: `x̂ₙ, ŷₙ, ẑₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub x: GridFn,
    pub y: GridFn,
    pub z: GridFn,
}

struct Weights {
    zx: Vec<Complex64>,
    zy: Vec<Complex64>,
    ax: Vec<Complex64>,
    ay: Vec<Complex64>,
    az: Vec<Complex64>,
    bx: Vec<Complex64>,
    by: Vec<Complex64>,
    bz: Vec<Complex64>,
}

impl Weights {
    fn new(sys: &DiracSystem, sol: &ParticularSolution) -> Self {
        let m = sys.mesh().len();
        let mut w = Weights {
            zx: Vec::with_capacity(m),
            zy: Vec::with_capacity(m),
            ax: Vec::with_capacity(m),
            ay: Vec::with_capacity(m),
            az: Vec::with_capacity(m),
            bx: Vec::with_capacity(m),
            by: Vec::with_capacity(m),
            bz: Vec::with_capacity(m),
        };
        for i in 0..m {
            let (f, g) = (sol.f.at(i), sol.g.at(i));
            let r = sys.r.at(i);
            let (f2, g2) = (f * f, g * g);
            let fg = f * g;
            w.zx.push(f2 * r[0][0] + fg * r[1][0]);
            w.zy.push(fg * r[0][1] + g2 * r[1][1]);
            w.ax.push(-r[1][0]);
            w.ay.push(-r[1][1] * g / f);
            w.az.push(sys.p2.at(i) / f2);
            w.bx.push(r[0][0] * f / g);
            w.by.push(r[0][1]);
            w.bz.push(sys.p1.at(i) / g2);
        }
        w
    }
}

/// Streaming form of the recursion: holds only the current order.
pub struct PowerRecursion {
    weights: Weights,
    mesh: Mesh,
    x0: usize,
    order: usize,
    plain: [Vec<Complex64>; 3],
    tilde: [Vec<Complex64>; 3],
    scratch: Vec<Complex64>,
}

impl PowerRecursion {
    pub fn new(sys: &DiracSystem, sol: &ParticularSolution) -> Result<Self> {
        let mesh = sys.mesh();
        if sol.f.mesh() != mesh {
            return Err(Error::MeshMismatch);
        }
        let x0 = sol.x0_index;
        let k = sol.kappa;
        let m = mesh.len();
        let h = mesh.step();
        let weights = Weights::new(sys, sol);
        let mut i2 = vec![ZERO; m];
        let mut i1 = vec![ZERO; m];
        cumulative_into(&weights.az, h, x0, &mut i2);
        cumulative_into(&weights.bz, h, x0, &mut i1);
        let one = Complex64::new(1.0, 0.0);
        let plain_x: Vec<_> = i2.iter().map(|&s| k * s).collect();
        let plain_y: Vec<_> = i1.iter().map(|&s| one + k * s).collect();
        let tilde_x: Vec<_> = i2.iter().map(|&s| one - k * s).collect();
        let tilde_y: Vec<_> = i1.iter().map(|&s| -k * s).collect();
        let mut rec = Self {
            weights,
            mesh,
            x0,
            order: 0,
            plain: [plain_x, plain_y, vec![ZERO; m]],
            tilde: [tilde_x, tilde_y, vec![ZERO; m]],
            scratch: vec![ZERO; m],
        };
        rec.fill_z();
        Ok(rec)
    }

    fn fill_z(&mut self) {
        let h = self.mesh.step();
        let w = &self.weights;
        for fam in [&mut self.plain, &mut self.tilde] {
            for i in 0..self.scratch.len() {
                self.scratch[i] = fam[0][i] * w.zx[i] + fam[1][i] * w.zy[i];
            }
            cumulative_into(&self.scratch, h, self.x0, &mut fam[2]);
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Current `(x̂, ŷ, ẑ)` of the plain and tilde families.
    pub fn current(&self) -> (&[Vec<Complex64>; 3], &[Vec<Complex64>; 3]) {
        (&self.plain, &self.tilde)
    }

    /// Advances to the next order.
    pub fn advance(&mut self) {
        let h = self.mesh.step();
        let m = self.mesh.len();
        let w = &self.weights;
        for fam in [&mut self.plain, &mut self.tilde] {
            let mut nx = vec![ZERO; m];
            let mut ny = vec![ZERO; m];
            for i in 0..m {
                self.scratch[i] = w.ax[i] * fam[0][i] + w.ay[i] * fam[1][i] + w.az[i] * fam[2][i];
            }
            cumulative_into(&self.scratch, h, self.x0, &mut nx);
            for i in 0..m {
                self.scratch[i] = w.bx[i] * fam[0][i] + w.by[i] * fam[1][i] + w.bz[i] * fam[2][i];
            }
            cumulative_into(&self.scratch, h, self.x0, &mut ny);
            fam[0] = nx;
            fam[1] = ny;
        }
        self.order += 1;
        self.fill_z();
    }

    fn current_norm(&self) -> f64 {
        let n = |v: &Vec<Complex64>| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        n(&self.plain[0]).max(n(&self.plain[1])).max(n(&self.tilde[0])).max(n(&self.tilde[1]))
    }
}

/// Scaled formal powers `x̂ₙ = Xₙ/n!` (and `ŷ, ẑ`, tilde family) for `n = 0..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalPowerTable {
    order: usize,
    seed: ParticularSolution,
    plain: Vec<PowerRow>,
    tilde: Vec<PowerRow>,
    power_norms: Vec<f64>,
    solution_norms: Vec<f64>,
    converged: bool,
}

fn row(mesh: Mesh, fam: &[Vec<Complex64>; 3]) -> PowerRow {
    PowerRow {
        x: GridFn::from_vec_unchecked(mesh, fam[0].clone()),
        y: GridFn::from_vec_unchecked(mesh, fam[1].clone()),
        z: GridFn::from_vec_unchecked(mesh, fam[2].clone()),
    }
}

/// Smallest order `N` at which `norms[N] < 1e-16 · (1 + max_{n ≤ N} norms[n])`.
fn converged_at(norms: &[f64]) -> Option<usize> {
    let mut peak: f64 = 0.0;
    for (n, &a) in norms.iter().enumerate() {
        peak = peak.max(a);
        if n > 0 && a < 1e-16 * (1.0 + peak) {
            return Some(n);
        }
    }
    None
}

impl FormalPowerTable {
    pub fn compute(sys: &DiracSystem, sol: &ParticularSolution, max_order: usize, stop: Stop) -> Result<Self> {
        let mesh = sys.mesh();
        let mut rec = PowerRecursion::new(sys, sol)?;
        let mut plain = Vec::with_capacity(max_order + 1);
        let mut tilde = Vec::with_capacity(max_order + 1);
        let mut power_norms = Vec::with_capacity(max_order + 1);
        let mut converged = false;
        loop {
            plain.push(row(mesh, &rec.plain));
            tilde.push(row(mesh, &rec.tilde));
            power_norms.push(rec.current_norm());
            if stop == Stop::Converged && converged_at(&power_norms) == Some(rec.order()) {
                converged = true;
                break;
            }
            if rec.order() == max_order {
                break;
            }
            rec.advance();
        }
        if stop == Stop::Order {
            converged = converged_at(&power_norms).is_some();
        }
        let (fmax, gmax) = (sol.f.abs_max(), sol.g.abs_max());
        let solution_norms = plain
            .iter()
            .zip(&tilde)
            .map(|(p, t)| {
                (fmax * p.x.abs_max().max(t.x.abs_max())).max(gmax * p.y.abs_max().max(t.y.abs_max()))
            })
            .collect();
        Ok(Self {
            order: plain.len() - 1,
            seed: sol.clone(),
            plain,
            tilde,
            power_norms,
            solution_norms,
            converged,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mesh(&self) -> Mesh {
        self.seed.f.mesh()
    }

    pub fn seed(&self) -> &ParticularSolution {
        &self.seed
    }

    pub fn plain(&self, n: usize) -> &PowerRow {
        &self.plain[n]
    }

    pub fn tilde(&self, n: usize) -> &PowerRow {
        &self.tilde[n]
    }

    /// `Xₙ = n! x̂ₙ`; entries overflow to infinity for large `n`.
    pub fn unscaled(&self, n: usize) -> (PowerRow, PowerRow) {
        let fact = Complex64::new(factorial(n), 0.0);
        let scale = |r: &PowerRow| PowerRow {
            x: r.x.scale(fact),
            y: r.y.scale(fact),
            z: r.z.scale(fact),
        };
        (scale(&self.plain[n]), scale(&self.tilde[n]))
    }

    /// `max(‖x̂ₙ‖, ‖ŷₙ‖, ‖x̃ₙ‖, ‖ỹₙ‖)` for every order.
    pub fn power_norms(&self) -> &[f64] {
        &self.power_norms
    }

    /// Same with `x` weighted by `‖f‖` and `y` by `‖g‖`.
    pub fn solution_norms(&self) -> &[f64] {
        &self.solution_norms
    }

    /// Whether the powers decayed below `1e-16` of their peak within the table.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// `Y1 = Σ λⁿ (f x̃ₙ, g ỹₙ)` and `Y2 = Σ λⁿ (f x̂ₙ, g ŷₙ)`, truncated at `order`.
    pub fn evaluate_truncated(&self, lambda: Complex64, order: usize) -> (VectorFn, VectorFn) {
        let order = order.min(self.order);
        let mesh = self.mesh();
        let m = mesh.len();
        let mut pw = Vec::with_capacity(order + 1);
        let mut t = Complex64::new(1.0, 0.0);
        for _ in 0..=order {
            pw.push(t);
            t *= lambda;
        }
        let mut out = [(); 4].map(|_| Vec::with_capacity(m));
        for i in 0..m {
            let mut acc = [CompensatedSum::new(); 4];
            for (n, &l) in pw.iter().enumerate() {
                acc[0].add(l * self.tilde[n].x.at(i));
                acc[1].add(l * self.tilde[n].y.at(i));
                acc[2].add(l * self.plain[n].x.at(i));
                acc[3].add(l * self.plain[n].y.at(i));
            }
            let (f, g) = (self.seed.f.at(i), self.seed.g.at(i));
            out[0].push(f * acc[0].value());
            out[1].push(g * acc[1].value());
            out[2].push(f * acc[2].value());
            out[3].push(g * acc[3].value());
        }
        let [a, b, c, d] = out.map(|v| GridFn::from_vec_unchecked(mesh, v));
        (VectorFn { u: a, v: b }, VectorFn { u: c, v: d })
    }

    pub fn evaluate(&self, lambda: Complex64) -> (VectorFn, VectorFn) {
        self.evaluate_truncated(lambda, self.order)
    }

    /// Value of `(f x̂ₙ, g ŷₙ, f x̃ₙ, g ỹₙ)` at node `i` for every order.
    pub fn node_coefficients(&self, i: usize) -> Vec<[Complex64; 4]> {
        let (f, g) = (self.seed.f.at(i), self.seed.g.at(i));
        (0..=self.order)
            .map(|n| {
                [
                    f * self.plain[n].x.at(i),
                    g * self.plain[n].y.at(i),
                    f * self.tilde[n].x.at(i),
                    g * self.tilde[n].y.at(i),
                ]
            })
            .collect()
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Constants of the a-priori bound `|Xₙ|, |Yₙ| ≤ c · n! · 2ⁿ rⁿ (c1 c2 r + c3)ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `max |x − x0|` over the mesh.
    pub radius: f64,
}

pub fn bound_constants(sys: &DiracSystem, sol: &ParticularSolution) -> Result<BoundConstants> {
    let rec = PowerRecursion::new(sys, sol)?;
    let w = &rec.weights;
    let n = |v: &[Complex64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mesh = sys.mesh();
    let x0 = mesh.node(sol.x0_index);
    Ok(BoundConstants {
        c: rec.current_norm(),
        c1: n(&w.zx).max(n(&w.zy)),
        c2: n(&w.bz).max(n(&w.az)),
        c3: n(&w.bx).max(n(&w.by)).max(n(&w.ax)).max(n(&w.ay)),
        radius: (x0 - mesh.a()).max(mesh.b() - x0),
    })
}

/// `Σ_{n>N} |λ|ⁿ/n! · c · 2ⁿ rⁿ (c1 c2 r + c3)ⁿ`, summed until terms fall below
/// `1e-20` of the partial sum.
pub fn truncation_bound(bc: &BoundConstants, order: usize, radius: f64, lambda_abs: f64) -> f64 {
    let t = 2.0 * radius * (bc.c1 * bc.c2 * radius + bc.c3) * lambda_abs;
    if bc.c == 0.0 || t == 0.0 {
        return 0.0;
    }
    let first = order + 1;
    // tᴺ⁺¹/(N+1)! in log space to avoid overflow
    let ln_first = first as f64 * t.ln() - ln_factorial(first);
    let mut term = ln_first.exp();
    if !term.is_finite() {
        return f64::INFINITY;
    }
    let mut sum = 0.0;
    let mut n = first;
    loop {
        sum += term;
        n += 1;
        term *= t / n as f64;
        if (n as f64 > t && term <= 1e-20 * sum) || term == 0.0 {
            break;
        }
        if !sum.is_finite() {
            return f64::INFINITY;
        }
    }
    bc.c * sum
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Recommended truncation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub order: usize,
    /// `false` when `max_order` was reached before the decay criterion held.
    pub converged: bool,
}

/// Smallest `N ≤ max_order` with `max(|x̂_N|, |ŷ_N|, |x̃_N|, |ỹ_N|) < 1e-16 (1 + max_{n≤N} …)`.
pub fn suggest_truncation(sys: &DiracSystem, sol: &ParticularSolution, max_order: usize) -> Result<Truncation> {
    let mut rec = PowerRecursion::new(sys, sol)?;
    let mut norms = vec![rec.current_norm()];
    while rec.order() < max_order {
        rec.advance();
        norms.push(rec.current_norm());
        if let Some(order) = converged_at(&norms) {
            return Ok(Truncation { order, converged: true });
        }
    }
    Ok(Truncation { order: max_order, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Mat2Fn;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn free(mesh: Mesh) -> (DiracSystem, ParticularSolution) {
        let sys = DiracSystem::free(mesh);
        let sol = ParticularSolution::new(GridFn::constant(mesh, c(1.0)), GridFn::constant(mesh, c(1.0)), 0).unwrap();
        (sys, sol)
    }

    #[test]
    fn free_system_powers_are_monomials() {
        let mesh = Mesh::new(0.0, 1.0, 201).unwrap();
        let (sys, sol) = free(mesh);
        let t = FormalPowerTable::compute(&sys, &sol, 12, Stop::Order).unwrap();
        for n in 0..=12 {
            for (i, x) in mesh.nodes().enumerate() {
                let mono = x.powi(n as i32) / factorial(n);
                // Y2 = (−sin λx, cos λx): x̂ₙ carries the odd terms, ŷₙ the even ones
                let (ex, ey) = match n % 4 {
                    0 => (0.0, mono),
                    1 => (-mono, 0.0),
                    2 => (0.0, -mono),
                    _ => (mono, 0.0),
                };
                assert!((t.plain(n).x.at(i) - c(ex)).norm() < 1e-14);
                assert!((t.plain(n).y.at(i) - c(ey)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_weight_stops_at_first_order() {
        let mesh = Mesh::new(0.0, 1.0, 51).unwrap();
        let sys = DiracSystem::new(GridFn::zeros(mesh), GridFn::zeros(mesh), GridFn::zeros(mesh), Mat2Fn::zeros(mesh)).unwrap();
        let sol = ParticularSolution::new(GridFn::constant(mesh, c(1.0)), GridFn::constant(mesh, c(1.0)), 0).unwrap();
        let tr = suggest_truncation(&sys, &sol, 100).unwrap();
        assert_eq!(tr, Truncation { order: 1, converged: true });
        let t = FormalPowerTable::compute(&sys, &sol, 10, Stop::Order).unwrap();
        for n in 1..=10 {
            assert_eq!(t.power_norms()[n], 0.0);
        }
    }

    #[test]
    fn free_system_truncation_is_moderate() {
        let mesh = Mesh::new(0.0, 1.0, 51).unwrap();
        let (sys, sol) = free(mesh);
        let tr = suggest_truncation(&sys, &sol, 100).unwrap();
        assert!(tr.converged && tr.order <= 20, "{tr:?}");
    }

    #[test]
    fn tail_of_exponential_series() {
        let bc = BoundConstants { c: 1.0, c1: 0.0, c2: 0.0, c3: 1.0, radius: 1.0 };
        // direct summation of Σ_{n>20} 2ⁿ/n!
        let mut term = 1.0;
        let mut tail = 0.0;
        for n in 1..80 {
            term *= 2.0 / n as f64;
            if n > 20 {
                tail += term;
            }
        }
        let got = truncation_bound(&bc, 20, 1.0, 1.0);
        assert!((got - tail).abs() < 1e-12 * tail, "{got} vs {tail}");
        assert!(truncation_bound(&bc, 20, 1.0, 0.0) == 0.0);
    }

    #[test]
    fn scaled_table_does_not_overflow() {
        let mesh = Mesh::new(0.0, 10.0, 2001).unwrap();
        let (sys, sol) = free(mesh);
        let t = FormalPowerTable::compute(&sys, &sol, 100, Stop::Order).unwrap();
        assert!(t.power_norms().iter().all(|v| v.is_finite()));
        // 10^100/100! ≈ 1.07e-58
        let expected = 10f64.powi(100) / factorial(100);
        assert!((t.power_norms()[100] - expected).abs() < 1e-7 * expected, "{}", t.power_norms()[100] / expected - 1.0);
    }

    #[test]
    fn evaluation_reproduces_trigonometric_solutions() {
        let mesh = Mesh::new(0.0, 1.0, 2001).unwrap();
        let (sys, sol) = free(mesh);
        let t = FormalPowerTable::compute(&sys, &sol, 60, Stop::Order).unwrap();
        let lambda = 3.7;
        let (y1, y2) = t.evaluate(c(lambda));
        for (i, x) in mesh.nodes().enumerate() {
            let (s, co) = ((lambda * x).sin(), (lambda * x).cos());
            assert!((y2.u.at(i) - c(-s)).norm() < 1e-13);
            assert!((y2.v.at(i) - c(co)).norm() < 1e-13);
            assert!((y1.u.at(i) - c(co)).norm() < 1e-13);
            assert!((y1.v.at(i) - c(s)).norm() < 1e-13);
        }
    }
}
