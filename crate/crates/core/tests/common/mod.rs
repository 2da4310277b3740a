//! Random smooth problems and the measurements shared by the property
//! suites and the acceptance run. Each check returns a ratio that must stay
//! at or below 1.

#![allow(dead_code)]

use dirac_spps::grid::{GridFn, Mesh};
use dirac_spps::homogeneous::{
    homogeneous_basis, particular_solution, solve_nonhomogeneous, ParticularOptions, ParticularSolution, Strategy as SeedStrategy,
};
use dirac_spps::oracle::{integrate, DiracOde, ForcedDiracOde, OracleOptions};
use dirac_spps::powers::{bound_constants, FormalPowerTable, Stop};
use dirac_spps::spps::SppsSolutionPair;
use dirac_spps::sturm::{sl_formal_powers, sl_particular_solution, sl_to_dirac, RobinBc, SturmLiouvilleProblem};
use dirac_spps::system::{DiracSystem, Mat2Fn, VectorFn};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `a + b sin(k x + φ)`.
#[derive(Debug, Clone, Copy)]
pub struct Wave {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub phase: f64,
}

impl Wave {
    pub fn eval(&self, x: f64) -> f64 {
        self.a + self.b * (self.k * x + self.phase).sin()
    }

    pub fn sample(&self, mesh: Mesh) -> GridFn {
        GridFn::sample(mesh, |x| c(self.eval(x))).unwrap()
    }

    fn draw(rng: &mut impl Rng, amplitude: f64) -> Self {
        Self {
            a: rng.gen_range(-amplitude..amplitude),
            b: rng.gen_range(-amplitude..amplitude),
            k: rng.gen_range(0.5..3.0),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        }
    }
}

pub fn wave(amplitude: f64) -> impl Strategy<Value = Wave> {
    (-amplitude..amplitude, -amplitude..amplitude, 0.5..3.0f64, 0.0..std::f64::consts::TAU)
        .prop_map(|(a, b, k, phase)| Wave { a, b, k, phase })
}

/// Coefficients of `B Y' + P Y = λ R Y` on `[0, 1]` with symmetric `R`.
#[derive(Debug, Clone, Copy)]
pub struct SystemSpec {
    pub p1: Wave,
    pub q: Wave,
    pub p2: Wave,
    pub r11: Wave,
    pub r12: Wave,
    pub r22: Wave,
}

impl SystemSpec {
    pub fn system(&self, m: usize) -> DiracSystem {
        let mesh = Mesh::new(0.0, 1.0, m).unwrap();
        let r = Mat2Fn::new(self.r11.sample(mesh), self.r12.sample(mesh), self.r12.sample(mesh), self.r22.sample(mesh)).unwrap();
        DiracSystem::new(self.p1.sample(mesh), self.q.sample(mesh), self.p2.sample(mesh), r).unwrap()
    }

    pub fn draw(rng: &mut impl Rng) -> Self {
        Self {
            p1: Wave::draw(rng, 2.0),
            q: Wave::draw(rng, 2.0),
            p2: Wave::draw(rng, 2.0),
            r11: Wave::draw(rng, 1.0),
            r12: Wave::draw(rng, 0.5),
            r22: Wave::draw(rng, 1.0),
        }
    }
}

pub fn system_spec() -> impl Strategy<Value = SystemSpec> {
    (wave(2.0), wave(2.0), wave(2.0), wave(1.0), wave(0.5), wave(1.0))
        .prop_map(|(p1, q, p2, r11, r12, r22)| SystemSpec { p1, q, p2, r11, r12, r22 })
}

/// `(p u')' + q u = ω² r u` with `p, r ≥ 0.5`.
#[derive(Debug, Clone, Copy)]
pub struct SlSpec {
    pub p: Wave,
    pub q: Wave,
    pub r: Wave,
}

impl SlSpec {
    pub fn problem(&self, m: usize) -> SturmLiouvilleProblem {
        let mesh = Mesh::new(0.0, 1.0, m).unwrap();
        let positive = |w: Wave| GridFn::sample(mesh, |x| c(1.5 + 0.5 * w.b.tanh() * (w.k * x + w.phase).sin())).unwrap();
        SturmLiouvilleProblem::new(positive(self.p), self.q.sample(mesh), positive(self.r), RobinBc::dirichlet(), RobinBc::dirichlet())
            .unwrap()
    }

    pub fn draw(rng: &mut impl Rng) -> Self {
        Self { p: Wave::draw(rng, 1.0), q: Wave::draw(rng, 3.0), r: Wave::draw(rng, 1.0) }
    }
}

pub fn sl_spec() -> impl Strategy<Value = SlSpec> {
    (wave(1.0), wave(3.0), wave(1.0)).prop_map(|(p, q, r)| SlSpec { p, q, r })
}

pub fn seed_for(sys: &DiracSystem) -> ParticularSolution {
    particular_solution(&sys.p_matrix(), &ParticularOptions::default()).unwrap()
}

/// Largest `‖X̂ₙ‖ / (c tⁿ)` over all four families and `n ≤ order`, where
/// `c tⁿ` is the a-priori bound on the scaled powers.
pub fn bound_ratio(sys: &DiracSystem, order: usize) -> f64 {
    let sol = seed_for(sys);
    let table = FormalPowerTable::compute(sys, &sol, order, Stop::Order).unwrap();
    let b = bound_constants(sys, &sol).unwrap();
    let t = 2.0 * b.radius * (b.c1 * b.c2 * b.radius + b.c3);
    let mut worst: f64 = 0.0;
    for n in 0..=order {
        let bound = b.c * t.powi(n as i32);
        let (plain, tilde) = (table.plain(n), table.tilde(n));
        let size = [&plain.x, &plain.y, &tilde.x, &tilde.y].iter().map(|g| g.abs_max()).fold(0.0, f64::max);
        // quadrature error on the near-zero high orders
        worst = worst.max(size / (bound * (1.0 + 1e-9) + 1e-13 * b.c));
    }
    worst
}

/// Finite-difference residual and integral identity defect of seeds built
/// with both strategies, relative to `1e-6`.
pub fn particular_ratio(sys: &DiracSystem) -> f64 {
    [SeedStrategy::Diagonal, SeedStrategy::OffDiagonal]
        .iter()
        .map(|&strategy| {
            let sol = particular_solution(&sys.p_matrix(), &ParticularOptions { strategy, ..Default::default() }).unwrap();
            sol.residual(sys).max(sol.identity_defect(sys)) / 1e-6
        })
        .fold(0.0, f64::max)
}

fn oracle(sys: &DiracSystem, x0: usize, y0: [Complex64; 2]) -> VectorFn {
    let opts = OracleOptions { refinement: 20, tolerance: 1e-10 };
    integrate(&DiracOde { sys, lambda: c(0.0) }, sys.mesh(), x0, y0, &opts).unwrap().y
}

/// Homogeneous basis and particular solution of the forced problem against RK4,
/// relative to `1e-8` in the max norm.
pub fn lemma_ratio(sys: &DiracSystem, forcing: (Wave, Wave)) -> f64 {
    let mesh = sys.mesh();
    let mut sol = seed_for(sys);
    let x0 = mesh.len() / 3;
    sol = ParticularSolution::new(sol.f, sol.g, x0).unwrap();
    let (y1, y2) = homogeneous_basis(sys, &sol).unwrap();
    let zero = c(0.0);
    let e1 = y1.distance(&oracle(sys, x0, [sol.f.at(x0), zero]));
    let e2 = y2.distance(&oracle(sys, x0, [zero, sol.g.at(x0)]));
    let h = VectorFn::new(forcing.0.sample(mesh), forcing.1.sample(mesh)).unwrap();
    let forced = solve_nonhomogeneous(sys, &sol, &h).unwrap();
    let opts = OracleOptions { refinement: 20, tolerance: 1e-10 };
    let reference = integrate(&ForcedDiracOde { sys, rhs: &h }, mesh, x0, [zero, zero], &opts).unwrap().y;
    e1.max(e2).max(forced.distance(&reference)) / 1e-8
}

/// SPPS residual at each `λ` relative to `max(1e-6, 10 · truncation bound)`.
pub fn spps_residual_ratio(sys: &DiracSystem, lambdas: &[Complex64]) -> f64 {
    let pair = SppsSolutionPair::new(sys, &seed_for(sys), 100).unwrap();
    lambdas
        .iter()
        .map(|&l| {
            let basis = pair.evaluate(l);
            let allowed = 1e-6f64.max(10.0 * basis.truncation_bound);
            sys.fd_residual(&basis.y1, l).max(sys.fd_residual(&basis.y2, l)) / allowed
        })
        .fold(0.0, f64::max)
}

/// Parity identities of the Dirac form of an SL problem, relative to `1e-13 · scale`.
pub fn sl_identity_ratio(slp: &SturmLiouvilleProblem, order: usize) -> f64 {
    let seed = sl_particular_solution(&slp.p, &slp.q, &ParticularOptions::default()).unwrap();
    let form = sl_to_dirac(slp, &seed).unwrap();
    let table = FormalPowerTable::compute(&form.system, &form.seed, order, Stop::Order).unwrap();
    let classical = sl_formal_powers(&slp.p, &slp.r, &seed, order, 0).unwrap();
    let mut worst: f64 = 0.0;
    for n in 0..=order {
        let (plain, tilde) = table.unscaled(n);
        let scale = 1.0 + classical.plain[n].abs_max() + classical.tilde[n].abs_max();
        let vanishing = if n % 2 == 0 { [&plain.x, &tilde.y] } else { [&plain.y, &tilde.x] };
        for g in vanishing {
            worst = worst.max(g.abs_max() / (1e-13 * scale));
        }
    }
    worst
}

/// Fundamental solutions built from seeds anchored at `a` and mid-interval,
/// relative to `1e-9`.
pub fn center_independence_ratio(sys: &DiracSystem, lambda: Complex64) -> f64 {
    let sol = seed_for(sys);
    let mid = ParticularSolution::new(sol.f.clone(), sol.g.clone(), sys.mesh().len() / 2).unwrap();
    let at_a = SppsSolutionPair::new(sys, &sol, 100).unwrap().fundamental(lambda).unwrap();
    let at_mid = SppsSolutionPair::new(sys, &mid, 100).unwrap().fundamental(lambda).unwrap();
    at_a.0.distance(&at_mid.0).max(at_a.1.distance(&at_mid.1)) / 1e-9
}

/// Error of the cumulative integral of a quintic, relative to `1e-12 · scale`.
pub fn quintic_ratio(coefficients: [f64; 6], x0_index: usize) -> f64 {
    let mesh = Mesh::new(-1.0, 2.0, 301).unwrap();
    let poly = |x: f64| coefficients.iter().rev().fold(0.0, |acc, &k| acc * x + k);
    let antider = |x: f64| coefficients.iter().enumerate().map(|(j, &k)| k * x.powi(j as i32 + 1) / (j as f64 + 1.0)).sum::<f64>();
    let f = GridFn::sample(mesh, |x| c(poly(x))).unwrap();
    let integral = f.integrate_cumulative(x0_index);
    let x0 = mesh.node(x0_index);
    let scale = 1.0 + coefficients.iter().map(|k| k.abs()).sum::<f64>() * 2f64.powi(6);
    mesh.nodes()
        .enumerate()
        .map(|(i, x)| (integral.at(i) - c(antider(x) - antider(x0))).norm())
        .fold(0.0, f64::max)
        / (1e-12 * scale)
}

/// Observed order of the cumulative integral of `cos(kx)` from meshes with
/// `h`, `h/2` and `h/4`.
pub fn observed_order(k: f64) -> f64 {
    let errors: Vec<f64> = [101usize, 201, 401]
        .iter()
        .map(|&m| {
            let mesh = Mesh::new(0.0, 1.0, m).unwrap();
            let f = GridFn::sample(mesh, |x| c((k * x).cos())).unwrap();
            let integral = f.integrate_cumulative(0);
            mesh.nodes().enumerate().map(|(i, x)| (integral.at(i) - c((k * x).sin() / k)).norm()).fold(0.0, f64::max)
        })
        .collect();
    (errors[1] / errors[2]).log2().min((errors[0] / errors[1]).log2())
}
