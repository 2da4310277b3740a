//! Sturm–Liouville problems `(p u')' + q u = ω² r u`.
//!
//! Two routes are provided. The Dirac route rewrites the equation as a Dirac
//! system in `ω` (with `q_D = u₀'/u₀`, `R = diag(r, −1/p)`), so the shift
//! sweep advances by bounded steps. The classical route is the power series
//! in `λ = ω²` built directly from `u₀`; it serves as a cross-check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridFn, Mesh};
use crate::homogeneous::{particular_solution, ParticularOptions, ParticularSolution};
use crate::powers::factorial;
use crate::spectral::{
    filter_spurious, find_roots, Affine, BoundaryConditions, CharPolynomial, Indexing, Root, SpectrumResult,
    SweepOptions,
};
use crate::spps::trusted_radius;
use crate::system::{DiracSystem, Mat2Fn};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `α u + β u' = 0` at one endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinBc {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl RobinBc {
    pub fn dirichlet() -> Self {
        Self { alpha: ONE, beta: ZERO }
    }

    pub fn neumann() -> Self {
        Self { alpha: ZERO, beta: ONE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SturmLiouvilleProblem {
    pub p: GridFn,
    pub q: GridFn,
    pub r: GridFn,
    pub left: RobinBc,
    pub right: RobinBc,
}

impl SturmLiouvilleProblem {
    pub fn new(p: GridFn, q: GridFn, r: GridFn, left: RobinBc, right: RobinBc) -> Result<Self> {
        if p.mesh() != q.mesh() || p.mesh() != r.mesh() {
            return Err(Error::MeshMismatch);
        }
        if let Some(&node) = p.zero_nodes().first() {
            return Err(Error::DivisionByZeroNode { node });
        }
        for bc in [left, right] {
            if bc.alpha == ZERO && bc.beta == ZERO {
                return Err(Error::InvalidSeed("boundary condition has all coefficients zero".into()));
            }
        }
        Ok(Self { p, q, r, left, right })
    }

    pub fn mesh(&self) -> Mesh {
        self.p.mesh()
    }

    /// The same equation with `q` replaced by `q − λ₀ r`.
    pub fn shifted(&self, lambda0: Complex64) -> Self {
        let q = self.q.zip_with(&self.r, |q, r| q - lambda0 * r).expect("shared mesh");
        Self { q, ..self.clone() }
    }
}

/// A non-vanishing solution of `(p u')' + q u = 0` with its flux `p u'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlSeed {
    pub u0: GridFn,
    pub flux: GridFn,
}

impl SlSeed {
    /// Builds the flux by differentiating `u0`; prefer [`sl_particular_solution`].
    pub fn from_u0(p: &GridFn, u0: GridFn) -> Result<Self> {
        let flux = &u0.derivative() * p;
        Ok(Self { u0, flux })
    }

    /// `u₀'/u₀`.
    pub fn log_derivative(&self, p: &GridFn) -> Result<GridFn> {
        self.flux.div(&(p * &self.u0))
    }

    /// Largest relative residual of `(p u₀')' + q u₀ = 0` and `u₀' = flux/p`.
    pub fn residual(&self, slp: &SturmLiouvilleProblem) -> f64 {
        let relative = |r: &GridFn, a: &GridFn, b: &GridFn| {
            let scale = a.abs_max().max(b.abs_max());
            if scale == 0.0 {
                r.abs_max()
            } else {
                r.abs_max() / scale
            }
        };
        let dflux = self.flux.derivative();
        let qu = &slp.q * &self.u0;
        let first = relative(&(&dflux + &qu), &dflux, &qu);
        let du = self.u0.derivative();
        let ratio = self.flux.div(&slp.p).expect("p is nonzero");
        let second = relative(&(&du - &ratio), &du, &ratio);
        first.max(second)
    }
}

/// Non-vanishing `u₀` from the first-order form `v' + q u = 0`, `−u' + v/p = 0`.
pub fn sl_particular_solution(p: &GridFn, q: &GridFn, opts: &ParticularOptions) -> Result<SlSeed> {
    if p.mesh() != q.mesh() {
        return Err(Error::MeshMismatch);
    }
    let matrix = Mat2Fn::diagonal(q.clone(), p.recip()?);
    let sol = particular_solution(&matrix, opts)?;
    Ok(SlSeed { u0: sol.f, flux: sol.g })
}

/// Dirac reformulation of a Sturm–Liouville problem, spectral parameter `ω`.
#[derive(Debug, Clone)]
pub struct DiracForm {
    pub system: DiracSystem,
    /// `(u₀, 1/u₀)`.
    pub seed: ParticularSolution,
    /// Boundary conditions affine in `ω`.
    pub bc: BoundaryConditions,
}

/// Seeds whose residual exceeds this are rejected by [`sl_to_dirac`].
pub const SEED_TOLERANCE: f64 = 1e-6;

pub fn sl_to_dirac(slp: &SturmLiouvilleProblem, seed: &SlSeed) -> Result<DiracForm> {
    if seed.u0.mesh() != slp.mesh() {
        return Err(Error::MeshMismatch);
    }
    if let Some(&node) = seed.u0.zero_nodes().first() {
        return Err(Error::InvalidSeed(format!("u0 vanishes at node {node}")));
    }
    let residual = seed.residual(slp);
    if !(residual <= SEED_TOLERANCE) {
        return Err(Error::InvalidSeed(format!("u0 residual {residual:e} exceeds {SEED_TOLERANCE:e}")));
    }
    let mesh = slp.mesh();
    let log_der = seed.log_derivative(&slp.p)?;
    let minus_inv_p = slp.p.recip()?.map(|v| -v);
    let system = DiracSystem::new(GridFn::zeros(mesh), log_der.clone(), GridFn::zeros(mesh), Mat2Fn::diagonal(slp.r.clone(), minus_inv_p))?;
    let particular = ParticularSolution::new(seed.u0.clone(), seed.u0.recip()?, 0)?;
    // α u + β u' = (α + β u₀'/u₀) u + (ω β/p) v
    let map = |bc: RobinBc, i: usize| {
        [
            Affine::constant(bc.alpha + bc.beta * log_der.at(i)),
            Affine { constant: ZERO, slope: bc.beta / slp.p.at(i) },
        ]
    };
    let bc = BoundaryConditions::affine(map(slp.left, 0), map(slp.right, mesh.len() - 1))?;
    Ok(DiracForm { system, seed: particular, bc })
}

/// Eigenvalues `λₙ = ωₙ²`, `n = 0..=n_max`, via the Dirac form swept in `ω > 0`.
pub fn sl_eigenvalues(slp: &SturmLiouvilleProblem, n_max: i64, opts: &SweepOptions) -> Result<SpectrumResult> {
    let seed = sl_particular_solution(
        &slp.p,
        &slp.q,
        &ParticularOptions { seed: opts.seed, candidates: opts.candidates, max_order: opts.order, ..Default::default() },
    )?;
    let form = sl_to_dirac(slp, &seed)?;
    let opts = SweepOptions {
        indexing: Indexing::PositiveHalf { threshold: 1e-6 },
        initial: Some(form.seed.clone()),
        ..opts.clone()
    };
    let spectrum = crate::spectral::sweep_spectrum(&form.system, &form.bc, 0, n_max, &opts)?;
    Ok(spectrum.map_values(|w| w * w))
}

/// Powers of the classical series; `plain[n]` is `𝒳⁽ⁿ⁾`, `tilde[n]` is `𝒳̃⁽ⁿ⁾`.
#[derive(Debug, Clone)]
pub struct SlFormalPowers {
    pub seed: SlSeed,
    pub plain: Vec<GridFn>,
    pub tilde: Vec<GridFn>,
    pub x0_index: usize,
}

/// Alternating recursion: even steps integrate against `u₀² r`, odd steps
/// against `1/(u₀² p)`; the tilde family swaps the parities.
pub fn sl_formal_powers(p: &GridFn, r: &GridFn, seed: &SlSeed, order: usize, x0_index: usize) -> Result<SlFormalPowers> {
    let mesh = p.mesh();
    let weight_r = seed.u0.zip_with(r, |u, r| u * u * r)?;
    let weight_p = seed.u0.zip_with(p, |u, p| (u * u * p).inv())?;
    let one = GridFn::constant(mesh, ONE);
    let mut plain = vec![one.clone()];
    let mut tilde = vec![one];
    for n in 1..=order {
        let scale = Complex64::new(n as f64, 0.0);
        let (wp, wt) = if n % 2 == 0 { (&weight_r, &weight_p) } else { (&weight_p, &weight_r) };
        plain.push((&plain[n - 1] * wp).integrate_cumulative(x0_index).scale(scale));
        tilde.push((&tilde[n - 1] * wt).integrate_cumulative(x0_index).scale(scale));
    }
    Ok(SlFormalPowers { seed: seed.clone(), plain, tilde, x0_index })
}

impl SlFormalPowers {
    /// Highest power of `Λ` available: largest `k` with `2k + 1 ≤ order`.
    pub fn terms(&self) -> usize {
        (self.plain.len() - 2) / 2
    }

    /// Series coefficients in `Λ` at node `i`: `[S₁, S₂, p S₁'·u₀², p S₂'·u₀²]`
    /// where `u = u₀(c₁S₁ + c₂S₂)`.
    fn node_terms(&self, i: usize) -> Vec<[Complex64; 4]> {
        (0..=self.terms())
            .map(|k| {
                let even = 2 * k;
                let s1 = self.tilde[even].at(i) / factorial(even);
                let s2 = self.plain[even + 1].at(i) / factorial(even + 1);
                let d1 = if k == 0 { ZERO } else { self.tilde[even - 1].at(i) / factorial(even - 1) };
                let d2 = self.plain[even].at(i) / factorial(even);
                [s1, s2, d1, d2]
            })
            .collect()
    }

    /// `u` and `p u'` of `u₀(c₁S₁ + c₂S₂)` at offset `Λ` from the seed's parameter.
    pub fn solution(&self, offset: Complex64, c1: Complex64, c2: Complex64) -> SlSeed {
        let mesh = self.seed.u0.mesh();
        let mut u = Vec::with_capacity(mesh.len());
        let mut flux = Vec::with_capacity(mesh.len());
        for i in 0..mesh.len() {
            let (mut s1, mut s2, mut d1, mut d2) = (ZERO, ZERO, ZERO, ZERO);
            let mut power = ONE;
            for t in self.node_terms(i) {
                s1 += power * t[0];
                s2 += power * t[1];
                d1 += power * t[2];
                d2 += power * t[3];
                power *= offset;
            }
            let (u0, f0) = (self.seed.u0.at(i), self.seed.flux.at(i));
            let s = c1 * s1 + c2 * s2;
            // p u' = p u₀' S + (1/u₀) Σ (p u₀² S')
            u.push(u0 * s);
            flux.push(f0 * s + (c1 * d1 + c2 * d2) / u0);
        }
        SlSeed {
            u0: GridFn::from_vec_unchecked(mesh, u),
            flux: GridFn::from_vec_unchecked(mesh, flux),
        }
    }

    /// Coefficients `(c₁, c₂)` giving `u(a) = value`, `p u'(a) = flux` (anchor at `a`).
    pub fn initial_coefficients(&self, value: Complex64, flux: Complex64) -> (Complex64, Complex64) {
        let (u0, f0) = (self.seed.u0.at(0), self.seed.flux.at(0));
        let c1 = value / u0;
        (c1, (flux - c1 * f0) * u0)
    }
}

/// Characteristic polynomial in `Λ = λ − λ₀` for `(p u')' + (q − λ₀ r) u = Λ r u`.
pub fn sl_characteristic_polynomial(slp: &SturmLiouvilleProblem, powers: &SlFormalPowers, lambda0: Complex64) -> CharPolynomial {
    let mesh = slp.mesh();
    let last = mesh.len() - 1;
    let (alpha, beta) = (slp.left.alpha, slp.left.beta);
    let (u0a, f0a) = (powers.seed.u0.at(0), powers.seed.flux.at(0));
    // u(a) = β, p u'(a) = −α p(a) satisfies the left condition
    let (c1, c2) = powers.initial_coefficients(beta, -alpha * slp.p.at(0));
    debug_assert!((alpha * c1 * u0a + beta * (c1 * f0a + c2 / u0a) / slp.p.at(0)).norm() < 1e-8 * (1.0 + c1.norm() + c2.norm()));
    let (u0b, f0b, pb) = (powers.seed.u0.at(last), powers.seed.flux.at(last), slp.p.at(last));
    let (ab, bb) = (slp.right.alpha, slp.right.beta);
    let terms = powers.node_terms(last);
    let coefficients: Vec<Complex64> = terms
        .iter()
        .map(|t| {
            let s = c1 * t[0] + c2 * t[1];
            let u = u0b * s;
            let du = (f0b * s + (c1 * t[2] + c2 * t[3]) / u0b) / pb;
            ab * u + bb * du
        })
        .collect();
    let norms: Vec<f64> = (0..terms.len())
        .map(|k| {
            let even = 2 * k;
            (powers.tilde[even].abs_max() / factorial(even) + powers.plain[even + 1].abs_max() / factorial(even + 1))
                * powers.seed.u0.abs_max()
        })
        .collect();
    CharPolynomial { coefficients, center: lambda0, trusted_radius: trusted_radius(&norms) }
}

/// Kept roots of the classical polynomial at `center`, sorted by real part.
fn classical_roots(slp: &SturmLiouvilleProblem, powers: &SlFormalPowers, center: Complex64) -> Result<Vec<Complex64>> {
    let order = powers.plain.len() - 1;
    let poly = sl_characteristic_polynomial(slp, powers, center);
    let lower_powers = SlFormalPowers {
        plain: powers.plain[..order - 4].to_vec(),
        tilde: powers.tilde[..order - 4].to_vec(),
        ..powers.clone()
    };
    let lower = sl_characteristic_polynomial(slp, &lower_powers, center);
    let roots: Vec<Root> = find_roots(&poly)?;
    let lower_roots = find_roots(&lower)?;
    let mut kept: Vec<Complex64> = filter_spurious(&roots, &poly, &lower_roots)
        .kept
        .into_iter()
        .map(|(r, _)| Complex64::new(r.lambda.re, 0.0))
        .collect();
    kept.sort_by(|a, b| a.re.total_cmp(&b.re));
    Ok(kept)
}

/// Seed `u₁ + i t u₂` at offset `Λ` from real solutions with `u(a) = 1, pu'(a) = 0`
/// and `u(a) = 0, pu'(a) = 1`. It never vanishes; `t > 0` is chosen on a log
/// grid to minimise `max|u₀| / min|u₀|`, which keeps the series well conditioned.
fn reseed(powers: &SlFormalPowers, offset: Complex64) -> Result<SlSeed> {
    let (a1, a2) = powers.initial_coefficients(ONE, ZERO);
    let (b1, b2) = powers.initial_coefficients(ZERO, ONE);
    let y1 = powers.solution(offset, a1, a2);
    let y2 = powers.solution(offset, b1, b2);
    let u1: Vec<f64> = y1.u0.values().iter().map(|z| z.re).collect();
    let u2: Vec<f64> = y2.u0.values().iter().map(|z| z.re).collect();
    let spread = |t: f64| {
        let (lo, hi) = u1.iter().zip(&u2).fold((f64::INFINITY, 0.0f64), |(lo, hi), (x, y)| {
            let m = x.hypot(t * y);
            (lo.min(m), hi.max(m))
        });
        hi / lo
    };
    let base = y1.u0.abs_max() / y2.u0.abs_max();
    let t = (-40..=40)
        .map(|k| base * 10f64.powf(k as f64 / 20.0))
        .min_by(|&s, &t| spread(s).total_cmp(&spread(t)))
        .expect("non-empty grid");
    let combine = |x: &GridFn, y: &GridFn| x.zip_with(y, |x, y| Complex64::new(x.re, t * y.re));
    Ok(SlSeed { u0: combine(&y1.u0, &y2.u0)?, flux: combine(&y1.flux, &y2.flux)? })
}

/// Eigenvalues `λ₀ … λ_{count−1}` by the classical series with a shift to the
/// nearest new eigenvalue. Real coefficients and conditions are assumed.
pub fn sl_classical_eigenvalues(slp: &SturmLiouvilleProblem, count: usize, order: usize) -> Result<Vec<Complex64>> {
    let seed = sl_particular_solution(&slp.p, &slp.q, &ParticularOptions { max_order: order, ..Default::default() })?;
    let mut powers = sl_formal_powers(&slp.p, &slp.r, &seed, order, 0)?;
    let mut center = ZERO;
    let mut roots = classical_roots(slp, &powers, center)?;
    let mut out: Vec<Complex64> = Vec::new();
    while out.len() < count {
        let stalled = || Error::SweepStalled { last_index: out.len() as i64 - 1 };
        // duplicates of the last eigenvalue sit well inside half a gap
        let floor = match out.as_slice() {
            [] => f64::NEG_INFINITY,
            [.., prev, last] => last.re + 0.5 * (last.re - prev.re),
            [last] => last.re + 1e-4 * (1.0 + last.re.abs()),
        };
        let candidate = *roots.iter().find(|r| r.re > floor).ok_or_else(stalled)?;
        let seed = reseed(&powers, candidate - center)?;
        powers = sl_formal_powers(&slp.p, &slp.r, &seed, order, 0)?;
        center = candidate;
        roots = classical_roots(slp, &powers, center)?;
        let refined = roots
            .iter()
            .copied()
            .min_by(|a, b| (a - center).norm().total_cmp(&(b - center).norm()))
            .ok_or_else(stalled)?;
        out.push(refined);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogeneous::ParticularOptions;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn exponential_potential(m: usize) -> SturmLiouvilleProblem {
        let mesh = Mesh::new(0.0, std::f64::consts::PI, m).unwrap();
        SturmLiouvilleProblem::new(
            GridFn::constant(mesh, c(1.0)),
            GridFn::sample(mesh, |x| c(-x.exp())).unwrap(),
            GridFn::constant(mesh, c(-1.0)),
            RobinBc::dirichlet(),
            RobinBc::dirichlet(),
        )
        .unwrap()
    }

    #[test]
    fn trivial_conversion() {
        let mesh = Mesh::new(0.0, 1.0, 101).unwrap();
        let one = GridFn::constant(mesh, c(1.0));
        let slp = SturmLiouvilleProblem::new(one.clone(), GridFn::zeros(mesh), one.clone(), RobinBc::dirichlet(), RobinBc::dirichlet()).unwrap();
        let seed = SlSeed { u0: one.clone(), flux: GridFn::zeros(mesh) };
        let form = sl_to_dirac(&slp, &seed).unwrap();
        assert_eq!(form.system.q.abs_max(), 0.0);
        assert_eq!(form.system.r.e22.at(3), c(-1.0));
        assert_eq!(form.bc.left, [Affine::constant(c(1.0)), Affine { constant: ZERO, slope: ZERO }]);
    }

    #[test]
    fn free_particular_solution_is_affine() {
        let mesh = Mesh::new(0.0, 1.0, 201).unwrap();
        let seed = sl_particular_solution(&GridFn::constant(mesh, c(1.0)), &GridFn::zeros(mesh), &ParticularOptions::default()).unwrap();
        // u₀ = A + B x with both u₀ and p u₀' = B never zero
        let (a, b) = (seed.u0.at(0), seed.flux.at(0));
        for (i, x) in mesh.nodes().enumerate() {
            assert!((seed.u0.at(i) - (a + b * x)).norm() < 1e-12);
            assert!((seed.flux.at(i) - b).norm() < 1e-12);
        }
        assert!(seed.u0.abs_min() > 0.0);
    }

    #[test]
    fn exponential_seed_and_dirac_identities() {
        let slp = exponential_potential(2001);
        let seed = sl_particular_solution(&slp.p, &slp.q, &ParticularOptions::default()).unwrap();
        assert!(seed.u0.abs_min() > 0.0);
        assert!(seed.residual(&slp) < 1e-6, "{}", seed.residual(&slp));
        let form = sl_to_dirac(&slp, &seed).unwrap();
        let table = crate::powers::FormalPowerTable::compute(&form.system, &form.seed, 12, crate::powers::Stop::Order).unwrap();
        let classical = sl_formal_powers(&slp.p, &slp.r, &seed, 12, 0).unwrap();
        for n in 0..=12 {
            let (plain, tilde) = table.unscaled(n);
            let scale = 1.0 + classical.plain[n].abs_max() + classical.tilde[n].abs_max();
            let tol = 1e-13 * scale;
            if n % 2 == 0 {
                assert!(plain.x.abs_max() <= tol, "X[{n}]");
                assert!(tilde.y.abs_max() <= tol, "Yt[{n}]");
                assert!((&plain.y - &classical.plain[n]).abs_max() <= 1e-10 * scale, "Y[{n}]");
                assert!((&tilde.x - &classical.tilde[n]).abs_max() <= 1e-10 * scale, "Xt[{n}]");
            } else {
                assert!(plain.y.abs_max() <= tol, "Y[{n}]");
                assert!(tilde.x.abs_max() <= tol, "Xt[{n}]");
                assert!((&plain.x - &classical.plain[n]).abs_max() <= 1e-10 * scale, "X[{n}]");
                assert!((&tilde.y - &classical.tilde[n]).abs_max() <= 1e-10 * scale, "Yt[{n}]");
            }
        }
    }

    #[test]
    fn classical_series_reproduces_trigonometric_solutions() {
        let mesh = Mesh::new(0.0, 1.0, 501).unwrap();
        let one = GridFn::constant(mesh, c(1.0));
        let seed = SlSeed { u0: one.clone(), flux: GridFn::zeros(mesh) };
        let powers = sl_formal_powers(&one, &one, &seed, 40, 0).unwrap();
        for (i, x) in mesh.nodes().enumerate() {
            assert!((powers.plain[5].at(i) - c(x.powi(5))).norm() < 1e-12);
        }
        // u'' = ω² u with ω² = −4: cos 2x and sin(2x)/2
        let y = powers.solution(c(-4.0), c(1.0), c(0.0));
        let z = powers.solution(c(-4.0), c(0.0), c(1.0));
        for (i, x) in mesh.nodes().enumerate() {
            assert!((y.u0.at(i) - c((2.0 * x).cos())).norm() < 1e-12);
            assert!((y.flux.at(i) + c(2.0 * (2.0 * x).sin())).norm() < 1e-12);
            assert!((z.u0.at(i) - c((2.0 * x).sin() / 2.0)).norm() < 1e-12);
        }
        // zero parameter: u₀ (c₁ + c₂ ∫ 1/(u₀² p))
        let w = powers.solution(ZERO, c(2.0), c(3.0));
        for (i, x) in mesh.nodes().enumerate() {
            assert!((w.u0.at(i) - c(2.0 + 3.0 * x)).norm() < 1e-13);
        }
    }

    #[test]
    fn bridge_matches_classical_chain() {
        let slp = exponential_potential(2001);
        let dirac = sl_eigenvalues(&slp, 9, &SweepOptions::default()).unwrap();
        let classical = sl_classical_eigenvalues(&slp, 10, 100).unwrap();
        for (n, lc) in classical.iter().enumerate() {
            let ld = dirac.get(n as i64).unwrap().lambda;
            assert!((ld - lc).norm() < 1e-8, "{n}: {ld} vs {lc}");
        }
        // independent shooting values (adaptive RK, tolerance 1e-14)
        for (n, reference) in [(0, 4.896669379967698), (5, 43.220019640534254), (9, 107.11667613826819)] {
            assert!((dirac.get(n).unwrap().lambda - c(reference)).norm() < 1e-9, "{n}");
            assert!((classical[n as usize] - c(reference)).norm() < 1e-9, "{n}");
        }
    }

    #[test]
    fn dirac_solution_satisfies_first_order_relation() {
        let slp = exponential_potential(4001);
        let seed = sl_particular_solution(&slp.p, &slp.q, &ParticularOptions::default()).unwrap();
        let form = sl_to_dirac(&slp, &seed).unwrap();
        let pair = crate::spps::SppsSolutionPair::new(&form.system, &form.seed, 100).unwrap();
        let omega = c(2.5);
        let y = pair.solve_ivp(omega, [c(0.0), c(1.0)]).unwrap().y;
        let q_d = seed.log_derivative(&slp.p).unwrap();
        let du = y.u.derivative();
        let rhs = &(&y.v * &slp.p.recip().unwrap()).scale(omega) + &(&q_d * &y.u);
        let scale = du.abs_max().max(rhs.abs_max());
        assert!((&du - &rhs).abs_max() <= 1e-5 * scale, "{}", (&du - &rhs).abs_max() / scale);
    }

    #[test]
    fn robin_conditions_map_affinely_in_omega() {
        let slp = exponential_potential(501);
        let slp = SturmLiouvilleProblem { left: RobinBc { alpha: c(2.0), beta: c(1.0) }, ..slp };
        let seed = sl_particular_solution(&slp.p, &slp.q, &ParticularOptions::default()).unwrap();
        let form = sl_to_dirac(&slp, &seed).unwrap();
        let ld = seed.flux.at(0) / seed.u0.at(0);
        assert!((form.bc.left[0].constant - (c(2.0) + ld)).norm() < 1e-14);
        assert_eq!(form.bc.left[1].slope, c(1.0));
    }

    #[test]
    fn vanishing_seed_rejected() {
        let slp = exponential_potential(101);
        let mesh = slp.mesh();
        let u0 = GridFn::sample(mesh, |x| c(x.sin())).unwrap();
        let seed = SlSeed::from_u0(&slp.p, u0).unwrap();
        assert!(matches!(sl_to_dirac(&slp, &seed), Err(Error::InvalidSeed(_))));
    }
}
