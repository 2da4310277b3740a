//! Classical fourth-order Runge–Kutta reference integrator.
//!
//! Used to cross-check series solutions. Each mesh interval is split into
//! `refinement` sub-steps and the run is repeated with twice as many; the
//! difference gives a Richardson estimate of the error.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridFn, Mesh};
use crate::system::{DiracSystem, GeneralLinearSystem, VectorFn, M2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Y' = A(x) Y + s(x)`.
pub trait LinearOde {
    fn matrix(&self, x: f64) -> M2;

    fn forcing(&self, _x: f64) -> [Complex64; 2] {
        [ZERO, ZERO]
    }
}

/// An ODE given by a closure returning `A(x)`.
pub struct FnOde<F>(pub F);

impl<F: Fn(f64) -> M2> LinearOde for FnOde<F> {
    fn matrix(&self, x: f64) -> M2 {
        (self.0)(x)
    }
}

/// `B Y' + P Y = λ R Y`, i.e. `Y' = −B(λR − P) Y`, with coefficients
/// interpolated from the mesh.
pub struct DiracOde<'a> {
    pub sys: &'a DiracSystem,
    pub lambda: Complex64,
}

fn minus_b_times(m: M2) -> M2 {
    [[-m[1][0], -m[1][1]], [m[0][0], m[0][1]]]
}

impl LinearOde for DiracOde<'_> {
    fn matrix(&self, x: f64) -> M2 {
        let r = self.sys.r.interpolate(x);
        let (p1, q, p2) = (self.sys.p1.interpolate(x), self.sys.q.interpolate(x), self.sys.p2.interpolate(x));
        let l = self.lambda;
        minus_b_times([[l * r[0][0] - p1, l * r[0][1] - q], [l * r[1][0] - q, l * r[1][1] - p2]])
    }
}

/// `B Y' + P Y = H`.
pub struct ForcedDiracOde<'a> {
    pub sys: &'a DiracSystem,
    pub rhs: &'a VectorFn,
}

impl LinearOde for ForcedDiracOde<'_> {
    fn matrix(&self, x: f64) -> M2 {
        DiracOde { sys: self.sys, lambda: ZERO }.matrix(x)
    }

    fn forcing(&self, x: f64) -> [Complex64; 2] {
        let (hu, hv) = (self.rhs.u.interpolate(x), self.rhs.v.interpolate(x));
        [-hv, hu]
    }
}

/// `𝒫 Y' + 𝒬 Y = λ ℛ Y`, i.e. `Y' = 𝒫⁻¹(λℛ − 𝒬) Y`.
pub struct GeneralOde<'a> {
    pub sys: &'a GeneralLinearSystem,
    pub lambda: Complex64,
}

impl LinearOde for GeneralOde<'_> {
    fn matrix(&self, x: f64) -> M2 {
        let (inv, _) = crate::system::mat_inverse(self.sys.p.interpolate(x));
        let (q, r) = (self.sys.q.interpolate(x), self.sys.r.interpolate(x));
        let mut m = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.lambda * r[i][j] - q[i][j];
            }
        }
        crate::system::mat_product(inv, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Sub-steps per mesh interval.
    pub refinement: usize,
    /// Largest acceptable error estimate relative to `max(1, ‖Y‖)`.
    pub tolerance: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { refinement: 10, tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub y: VectorFn,
    pub error_estimate: f64,
}

fn apply(a: &M2, y: [Complex64; 2], s: [Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * y[0] + a[0][1] * y[1] + s[0], a[1][0] * y[0] + a[1][1] * y[1] + s[1]]
}

fn rk4_step(ode: &impl LinearOde, x: f64, y: [Complex64; 2], h: f64) -> [Complex64; 2] {
    let rhs = |x: f64, y: [Complex64; 2]| apply(&ode.matrix(x), y, ode.forcing(x));
    let add = |y: [Complex64; 2], k: [Complex64; 2], c: f64| [y[0] + k[0] * c, y[1] + k[1] * c];
    let k1 = rhs(x, y);
    let k2 = rhs(x + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = rhs(x + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = rhs(x + h, add(y, k3, h));
    [
        y[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
        y[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
    ]
}

fn run(ode: &impl LinearOde, mesh: Mesh, start: usize, y0: [Complex64; 2], sub: usize) -> Vec<[Complex64; 2]> {
    let m = mesh.len();
    let mut out = vec![[ZERO, ZERO]; m];
    out[start] = y0;
    for dir in [1isize, -1] {
        let mut y = y0;
        let mut i = start as isize;
        loop {
            let j = i + dir;
            if j < 0 || j >= m as isize {
                break;
            }
            let (xa, xb) = (mesh.node(i as usize), mesh.node(j as usize));
            let h = (xb - xa) / sub as f64;
            for k in 0..sub {
                y = rk4_step(ode, xa + k as f64 * h, y, h);
            }
            out[j as usize] = y;
            i = j;
        }
    }
    out
}

/// Integrates from node `start` with `Y(x_start) = y0` in both directions.
pub fn integrate(
    ode: &impl LinearOde,
    mesh: Mesh,
    start: usize,
    y0: [Complex64; 2],
    opts: &OracleOptions,
) -> Result<OracleSolution> {
    let sub = opts.refinement.max(1);
    let coarse = run(ode, mesh, start, y0, sub);
    let fine = run(ode, mesh, start, y0, 2 * sub);
    let mut diff: f64 = 0.0;
    let mut size: f64 = 1.0;
    for (c, f) in coarse.iter().zip(&fine) {
        diff = diff.max((c[0] - f[0]).norm()).max((c[1] - f[1]).norm());
        size = size.max(f[0].norm()).max(f[1].norm());
    }
    // fourth order: the finer run's error is about |Δ| / 15
    let estimate = diff / 15.0;
    let tolerance = opts.tolerance * size;
    if !(estimate <= tolerance) {
        return Err(Error::StepSizeTooCoarse { estimate, tolerance });
    }
    let u = GridFn::from_values(mesh, fine.iter().map(|y| y[0]).collect())?;
    let v = GridFn::from_values(mesh, fine.iter().map(|y| y[1]).collect())?;
    Ok(OracleSolution { y: VectorFn { u, v }, error_estimate: estimate })
}
