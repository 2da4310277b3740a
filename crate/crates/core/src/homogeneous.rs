//! Particular solutions, the non-homogeneous problem and the homogeneous basis
//! built from one non-vanishing solution.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::GridFn;
use crate::powers::{FormalPowerTable, Stop};
use crate::system::{DiracSystem, Mat2Fn, VectorFn};

/// A solution `(f, g)` of `B Y' + P Y = 0` with `f, g` non-vanishing on the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticularSolution {
    pub f: GridFn,
    pub g: GridFn,
    pub x0_index: usize,
    pub kappa: Complex64,
}

impl ParticularSolution {
    pub fn new(f: GridFn, g: GridFn, x0_index: usize) -> Result<Self> {
        if f.mesh() != g.mesh() {
            return Err(Error::MeshMismatch);
        }
        if x0_index >= f.mesh().len() {
            return Err(Error::InvalidSeed(format!("anchor index {x0_index} is outside the mesh")));
        }
        let mut zeros = f.zero_nodes();
        zeros.extend(g.zero_nodes());
        if !zeros.is_empty() {
            zeros.sort_unstable();
            zeros.dedup();
            return Err(Error::InvalidSeed(format!("solution vanishes at nodes {zeros:?}")));
        }
        let kappa = f.at(x0_index) * g.at(x0_index);
        Ok(Self { f, g, x0_index, kappa })
    }

    pub fn from_vector(y: &VectorFn, x0_index: usize) -> Result<Self> {
        Self::new(y.u.clone(), y.v.clone(), x0_index)
    }

    pub fn as_vector(&self) -> VectorFn {
        VectorFn { u: self.f.clone(), v: self.g.clone() }
    }

    /// Relative finite-difference residual of `B Y' + P Y = 0`.
    pub fn residual(&self, sys: &DiracSystem) -> f64 {
        sys.fd_residual(&self.as_vector(), Complex64::new(0.0, 0.0))
    }

    /// `p2/f² − p1/g² + (1/(fg))' ≡ 0` measured as
    /// `∫(p2/f² − p1/g²) + 1/(fg) − 1/κ`, relative to the size of its terms.
    pub fn identity_defect(&self, sys: &DiracSystem) -> f64 {
        let i2 = sys.p2.zip_with(&self.f, |p, f| p / (f * f)).expect("shared mesh");
        let i1 = sys.p1.zip_with(&self.g, |p, g| p / (g * g)).expect("shared mesh");
        let int = (&i2 - &i1).integrate_cumulative(self.x0_index);
        let inv = self.f.zip_with(&self.g, |f, g| (f * g).inv()).expect("shared mesh");
        let k = self.kappa.inv();
        let defect = int.zip_with(&inv, |s, w| s + w - k).expect("shared mesh");
        let scale = inv.abs_max().max(i2.integrate_cumulative(self.x0_index).abs_max())
            .max(i1.integrate_cumulative(self.x0_index).abs_max());
        defect.abs_max() / scale
    }
}

/// Solves `B Y' + P Y = H` with `Y(x0) = 0`.
pub fn solve_nonhomogeneous(sys: &DiracSystem, sol: &ParticularSolution, h: &VectorFn) -> Result<VectorFn> {
    let mesh = sys.mesh();
    if sol.f.mesh() != mesh || h.mesh() != mesh {
        return Err(Error::MeshMismatch);
    }
    let x0 = sol.x0_index;
    let (f, g) = (sol.f.values(), sol.g.values());
    let inner: Vec<Complex64> = (0..mesh.len()).map(|i| f[i] * h.u.at(i) + g[i] * h.v.at(i)).collect();
    let inner = GridFn::from_vec_unchecked(mesh, inner).integrate_cumulative(x0);
    let du: Vec<Complex64> = (0..mesh.len())
        .map(|i| -h.v.at(i) / f[i] + sys.p2.at(i) / (f[i] * f[i]) * inner.at(i))
        .collect();
    let dv: Vec<Complex64> = (0..mesh.len())
        .map(|i| h.u.at(i) / g[i] + sys.p1.at(i) / (g[i] * g[i]) * inner.at(i))
        .collect();
    let u = &GridFn::from_vec_unchecked(mesh, du).integrate_cumulative(x0) * &sol.f;
    let v = &GridFn::from_vec_unchecked(mesh, dv).integrate_cumulative(x0) * &sol.g;
    Ok(VectorFn { u, v })
}

/// Fundamental system of `B Y' + P Y = 0` with `Y1(x0) = (f(x0), 0)`, `Y2(x0) = (0, g(x0))`.
pub fn homogeneous_basis(sys: &DiracSystem, sol: &ParticularSolution) -> Result<(VectorFn, VectorFn)> {
    if sol.f.mesh() != sys.mesh() {
        return Err(Error::MeshMismatch);
    }
    let x0 = sol.x0_index;
    let k = sol.kappa;
    let i2 = sys.p2.zip_with(&sol.f, |p, f| p / (f * f))?.integrate_cumulative(x0);
    let i1 = sys.p1.zip_with(&sol.g, |p, g| p / (g * g))?.integrate_cumulative(x0);
    let one = Complex64::new(1.0, 0.0);
    let y1 = VectorFn {
        u: &sol.f * &i2.map(|s| one - k * s),
        v: &sol.g * &i1.map(|s| -k * s),
    };
    let y2 = VectorFn {
        u: &sol.f * &i2.map(|s| k * s),
        v: &sol.g * &i1.map(|s| one + k * s),
    };
    Ok((y1, y2))
}

/// How the auxiliary problem behind [`particular_solution`] is set up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Off-diagonal when `‖q‖ > 10 · max(‖p1‖, ‖p2‖)`, diagonal otherwise.
    Auto,
    /// Auxiliary system `P = 0`, weight `P`, seed `(1, 1)`.
    Diagonal,
    /// Auxiliary system `P = [[0, q], [q, 0]]`, weight `diag(p1, p2)`,
    /// seed `(exp ∫q, exp(−∫q))`.
    OffDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticularOptions {
    pub strategy: Strategy,
    pub max_order: usize,
    pub seed: u64,
    pub candidates: usize,
    pub x0_index: usize,
}

impl Default for ParticularOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::Auto,
            max_order: 100,
            seed: 0,
            candidates: 20,
            x0_index: 0,
        }
    }
}

/// Constructs a non-vanishing solution of `B Y' + P Y = 0` for symmetric `P`.
pub fn particular_solution(p: &Mat2Fn, opts: &ParticularOptions) -> Result<ParticularSolution> {
    let mesh = p.mesh();
    let (p1, q, p2) = (&p.e11, &p.e12, &p.e22);
    let strategy = match opts.strategy {
        Strategy::Auto if q.abs_max() > 10.0 * p1.abs_max().max(p2.abs_max()) => Strategy::OffDiagonal,
        Strategy::Auto => Strategy::Diagonal,
        s => s,
    };
    let zero = || GridFn::zeros(mesh);
    let (aux, f, g) = match strategy {
        Strategy::OffDiagonal => {
            let iq = q.integrate_cumulative(opts.x0_index);
            let sys = DiracSystem::new(zero(), q.clone(), zero(), Mat2Fn::diagonal(p1.clone(), p2.clone()))?;
            (sys, iq.map(|s| s.exp()), iq.map(|s| (-s).exp()))
        }
        _ => {
            let weight = Mat2Fn {
                e11: p1.clone(),
                e12: q.clone(),
                e21: q.clone(),
                e22: p2.clone(),
            };
            let one = GridFn::constant(mesh, Complex64::new(1.0, 0.0));
            (DiracSystem::new(zero(), zero(), zero(), weight)?, one.clone(), one)
        }
    };
    let seed = ParticularSolution::new(f, g, opts.x0_index)?;
    let table = FormalPowerTable::compute(&aux, &seed, opts.max_order, Stop::Converged)?;
    let (y1, y2) = table.evaluate(Complex64::new(-1.0, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (y, _) = select_nonvanishing(&y1, &y2, p.is_real(), &mut rng, opts.candidates)?;
    ParticularSolution::from_vector(&y, opts.x0_index)
}

/// `max(max|u|/min|u|, max|v|/min|v|)`; infinite when a component vanishes.
pub fn spread(y: &VectorFn) -> f64 {
    let ratio = |f: &GridFn| {
        let lo = f.abs_min();
        if lo > 0.0 {
            f.abs_max() / lo
        } else {
            f64::INFINITY
        }
    };
    ratio(&y.u).max(ratio(&y.v))
}

/// Picks a non-vanishing combination `Y1 + c Y2`.
///
/// For real solutions `c = i` works by linear independence. Otherwise `K`
/// random `c = ρ e^{iφ}`, `ρ ∈ [0.5, 2]`, are drawn and the one with the
/// smallest [`spread`] is kept (ties go to the earliest draw).
pub fn select_nonvanishing(
    y1: &VectorFn,
    y2: &VectorFn,
    real: bool,
    rng: &mut impl Rng,
    candidates: usize,
) -> Result<(VectorFn, Complex64)> {
    let is_real = |y: &VectorFn| y.u.is_real() && y.v.is_real();
    if real && is_real(y1) && is_real(y2) {
        let c = Complex64::new(0.0, 1.0);
        let y = y1.axpy(c, y2);
        if spread(&y).is_finite() {
            return Ok((y, c));
        }
    }
    select_among(y1, y2, None, rng, candidates)
}

/// Like [`select_nonvanishing`] for complex data, with `preferred` competing
/// as the first candidate.
pub fn select_nonvanishing_with(
    y1: &VectorFn,
    y2: &VectorFn,
    preferred: Complex64,
    rng: &mut impl Rng,
    candidates: usize,
) -> Result<(VectorFn, Complex64)> {
    select_among(y1, y2, Some(preferred), rng, candidates)
}

fn select_among(
    y1: &VectorFn,
    y2: &VectorFn,
    preferred: Option<Complex64>,
    rng: &mut impl Rng,
    candidates: usize,
) -> Result<(VectorFn, Complex64)> {
    let mut best: Option<(f64, VectorFn, Complex64)> = None;
    let mut consider = |c: Complex64| {
        let y = y1.axpy(c, y2);
        let s = spread(&y);
        if best.as_ref().map_or(true, |(b, _, _)| s < *b) {
            best = Some((s, y, c));
        }
    };
    if let Some(c) = preferred {
        consider(c);
    }
    for _ in 0..candidates.max(1) {
        let rho: f64 = rng.gen_range(0.5..=2.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        consider(Complex64::from_polar(rho, phi));
    }
    let (s, y, c) = best.expect("at least one candidate");
    if !s.is_finite() {
        let mut nodes = y.u.zero_nodes();
        nodes.extend(y.v.zero_nodes());
        nodes.sort_unstable();
        nodes.dedup();
        return Err(Error::NonVanishingNotFound { nodes });
    }
    Ok((y, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mesh;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn linear_potential(mesh: Mesh) -> DiracSystem {
        DiracSystem::new(
            GridFn::sample(mesh, |x| c(-x)).unwrap(),
            GridFn::zeros(mesh),
            GridFn::constant(mesh, c(1.0)),
            Mat2Fn::identity(mesh),
        )
        .unwrap()
    }

    #[test]
    fn trivial_system_gives_constants() {
        let mesh = Mesh::new(0.0, 1.0, 101).unwrap();
        let sys = DiracSystem::new(GridFn::zeros(mesh), GridFn::zeros(mesh), GridFn::zeros(mesh), Mat2Fn::identity(mesh)).unwrap();
        let sol = particular_solution(&sys.p_matrix(), &ParticularOptions::default()).unwrap();
        for i in 0..mesh.len() {
            assert_eq!(sol.f.at(i), c(1.0));
            assert_eq!(sol.g.at(i), Complex64::new(0.0, 1.0));
        }
    }

    #[test]
    fn particular_solution_solves_linear_potential_system() {
        let mesh = Mesh::new(0.0, 1.0, 2001).unwrap();
        let sys = linear_potential(mesh);
        let sol = particular_solution(&sys.p_matrix(), &ParticularOptions::default()).unwrap();
        assert!(sol.f.abs_min() > 0.0 && sol.g.abs_min() > 0.0);
        assert!(sol.residual(&sys) < 1e-9, "{}", sol.residual(&sys));
        assert!(sol.identity_defect(&sys) < 1e-12);
    }

    #[test]
    fn off_diagonal_strategy_for_dominant_q() {
        let mesh = Mesh::new(0.0, 1.0, 1001).unwrap();
        let sys = DiracSystem::new(
            GridFn::constant(mesh, c(0.1)),
            GridFn::sample(mesh, |x| c(5.0 + x)).unwrap(),
            GridFn::constant(mesh, c(0.2)),
            Mat2Fn::identity(mesh),
        )
        .unwrap();
        let opts = ParticularOptions { strategy: Strategy::OffDiagonal, ..Default::default() };
        let sol = particular_solution(&sys.p_matrix(), &opts).unwrap();
        assert!(sol.residual(&sys) < 1e-9);
        let auto = particular_solution(&sys.p_matrix(), &ParticularOptions::default()).unwrap();
        assert!(auto.residual(&sys) < 1e-9);
    }

    #[test]
    fn complex_coefficients_use_random_combination() {
        let mesh = Mesh::new(0.0, 1.0, 501).unwrap();
        let p1 = GridFn::sample(mesh, |x| Complex64::new(x, 1.0)).unwrap();
        let sys = DiracSystem::new(p1, GridFn::constant(mesh, c(0.5)), GridFn::constant(mesh, Complex64::new(0.0, -1.0)), Mat2Fn::identity(mesh)).unwrap();
        let opts = ParticularOptions { seed: 7, ..Default::default() };
        let a = particular_solution(&sys.p_matrix(), &opts).unwrap();
        let b = particular_solution(&sys.p_matrix(), &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.residual(&sys) < 1e-9);
    }

    #[test]
    fn basis_has_unit_initial_data() {
        let mesh = Mesh::new(0.0, 1.0, 501).unwrap();
        let sys = linear_potential(mesh);
        let sol = particular_solution(&sys.p_matrix(), &ParticularOptions::default()).unwrap();
        let (y1, y2) = homogeneous_basis(&sys, &sol).unwrap();
        assert_eq!(y1.at(0), [sol.f.at(0), c(0.0)]);
        assert_eq!(y2.at(0), [c(0.0), sol.g.at(0)]);
        assert!(sys.fd_residual(&y1, c(0.0)) < 1e-9);
        assert!(sys.fd_residual(&y2, c(0.0)) < 1e-9);
    }

    #[test]
    fn nonhomogeneous_solution_vanishes_at_anchor() {
        let mesh = Mesh::new(0.0, 1.0, 1001).unwrap();
        let sys = linear_potential(mesh);
        let sol = particular_solution(&sys.p_matrix(), &ParticularOptions { x0_index: 500, ..Default::default() }).unwrap();
        let h = VectorFn {
            u: GridFn::sample(mesh, |x| c(x.cos())).unwrap(),
            v: GridFn::sample(mesh, |x| c(1.0 + x * x)).unwrap(),
        };
        let y = solve_nonhomogeneous(&sys, &sol, &h).unwrap();
        assert_eq!(y.at(500), [c(0.0), c(0.0)]);
        let du = y.u.derivative();
        let dv = y.v.derivative();
        for i in 2..mesh.len() - 2 {
            let r = sys.residual_at(i, y.at(i), [du.at(i), dv.at(i)], c(0.0));
            assert!((r[0] - h.u.at(i)).norm() < 1e-9);
            assert!((r[1] - h.v.at(i)).norm() < 1e-9);
        }
    }

    #[test]
    fn vanishing_seed_is_rejected() {
        let mesh = Mesh::new(0.0, 1.0, 11).unwrap();
        let f = GridFn::sample(mesh, |x| c(x - 0.5)).unwrap();
        let g = GridFn::constant(mesh, c(1.0));
        assert!(matches!(ParticularSolution::new(f, g, 0), Err(Error::InvalidSeed(_))));
    }
}
