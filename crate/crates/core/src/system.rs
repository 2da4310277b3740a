//! Dirac systems `B Y' + P Y = λ R Y` and reduction of general first-order
//! 2×2 systems `𝒫 Y' + 𝒬 Y = λ ℛ Y` to that form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridFn, Mesh};

pub type M2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A vector function `(u, v)` on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFn {
    pub u: GridFn,
    pub v: GridFn,
}

impl VectorFn {
    pub fn new(u: GridFn, v: GridFn) -> Result<Self> {
        if u.mesh() != v.mesh() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { u, v })
    }

    pub fn mesh(&self) -> Mesh {
        self.u.mesh()
    }

    pub fn at(&self, i: usize) -> [Complex64; 2] {
        [self.u.at(i), self.v.at(i)]
    }

    pub fn scale(&self, c: Complex64) -> VectorFn {
        VectorFn {
            u: self.u.scale(c),
            v: self.v.scale(c),
        }
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: Complex64, other: &VectorFn) -> VectorFn {
        VectorFn {
            u: self.u.zip_with(&other.u, |a, b| a + c * b).expect("shared mesh"),
            v: self.v.zip_with(&other.v, |a, b| a + c * b).expect("shared mesh"),
        }
    }

    pub fn scale_by(&self, w: &GridFn) -> VectorFn {
        VectorFn {
            u: &self.u * w,
            v: &self.v * w,
        }
    }

    /// Componentwise real part.
    pub fn real_part(&self) -> VectorFn {
        let re = |z: Complex64| Complex64::new(z.re, 0.0);
        VectorFn { u: self.u.map(re), v: self.v.map(re) }
    }

    pub fn abs_max(&self) -> f64 {
        self.u.abs_max().max(self.v.abs_max())
    }

    /// Max-norm distance between two vector functions.
    pub fn distance(&self, other: &VectorFn) -> f64 {
        (&self.u - &other.u).abs_max().max((&self.v - &other.v).abs_max())
    }

    /// `x,re_u,im_u,re_v,im_v` CSV.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,re_u,im_u,re_v,im_v")?;
        for (i, x) in self.mesh().nodes().enumerate() {
            let (u, v) = (self.u.at(i), self.v.at(i));
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", x, u.re, u.im, v.re, v.im)?;
        }
        Ok(())
    }
}

/// A 2×2 matrix of grid functions on a shared mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat2Fn {
    pub e11: GridFn,
    pub e12: GridFn,
    pub e21: GridFn,
    pub e22: GridFn,
}

impl Mat2Fn {
    pub fn new(e11: GridFn, e12: GridFn, e21: GridFn, e22: GridFn) -> Result<Self> {
        let mesh = e11.mesh();
        if [&e12, &e21, &e22].iter().any(|e| e.mesh() != mesh) {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { e11, e12, e21, e22 })
    }

    pub fn identity(mesh: Mesh) -> Self {
        Self::diagonal(GridFn::constant(mesh, ONE), GridFn::constant(mesh, ONE))
    }

    pub fn zeros(mesh: Mesh) -> Self {
        Self::diagonal(GridFn::zeros(mesh), GridFn::zeros(mesh))
    }

    pub fn diagonal(d1: GridFn, d2: GridFn) -> Self {
        let mesh = d1.mesh();
        Self {
            e11: d1,
            e12: GridFn::zeros(mesh),
            e21: GridFn::zeros(mesh),
            e22: d2,
        }
    }

    /// Builds the matrix nodewise from a closure returning entries.
    pub fn from_nodes(mesh: Mesh, f: impl Fn(usize) -> M2) -> Self {
        let mut e = [[Vec::with_capacity(mesh.len()), Vec::with_capacity(mesh.len())], [
            Vec::with_capacity(mesh.len()),
            Vec::with_capacity(mesh.len()),
        ]];
        for i in 0..mesh.len() {
            let m = f(i);
            for (r, row) in m.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    e[r][c].push(v);
                }
            }
        }
        let [[e11, e12], [e21, e22]] = e;
        Self {
            e11: GridFn::from_vec_unchecked(mesh, e11),
            e12: GridFn::from_vec_unchecked(mesh, e12),
            e21: GridFn::from_vec_unchecked(mesh, e21),
            e22: GridFn::from_vec_unchecked(mesh, e22),
        }
    }

    pub fn mesh(&self) -> Mesh {
        self.e11.mesh()
    }

    #[inline]
    pub fn at(&self, i: usize) -> M2 {
        [[self.e11.at(i), self.e12.at(i)], [self.e21.at(i), self.e22.at(i)]]
    }

    pub fn entries(&self) -> [&GridFn; 4] {
        [&self.e11, &self.e12, &self.e21, &self.e22]
    }

    pub fn abs_max(&self) -> f64 {
        self.entries().iter().map(|e| e.abs_max()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.entries().iter().all(|e| e.is_real())
    }

    /// `tr(B M) = m21 − m12`.
    pub fn b_trace(&self) -> GridFn {
        &self.e21 - &self.e12
    }

    pub fn interpolate(&self, x: f64) -> M2 {
        [
            [self.e11.interpolate(x), self.e12.interpolate(x)],
            [self.e21.interpolate(x), self.e22.interpolate(x)],
        ]
    }
}

/// `B Y' + P Y = λ R Y` with `P = [[p1, q], [q, p2]]` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracSystem {
    pub p1: GridFn,
    pub q: GridFn,
    pub p2: GridFn,
    pub r: Mat2Fn,
}

impl DiracSystem {
    pub fn new(p1: GridFn, q: GridFn, p2: GridFn, r: Mat2Fn) -> Result<Self> {
        let mesh = p1.mesh();
        if q.mesh() != mesh || p2.mesh() != mesh || r.mesh() != mesh {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { p1, q, p2, r })
    }

    /// Free Dirac system: `P = 0`, `R = I`.
    pub fn free(mesh: Mesh) -> Self {
        Self {
            p1: GridFn::zeros(mesh),
            q: GridFn::zeros(mesh),
            p2: GridFn::zeros(mesh),
            r: Mat2Fn::identity(mesh),
        }
    }

    pub fn mesh(&self) -> Mesh {
        self.p1.mesh()
    }

    pub fn p_matrix(&self) -> Mat2Fn {
        Mat2Fn {
            e11: self.p1.clone(),
            e12: self.q.clone(),
            e21: self.q.clone(),
            e22: self.p2.clone(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.p1.is_real() && self.q.is_real() && self.p2.is_real() && self.r.is_real()
    }

    /// Nodewise residual `B Y' + P Y − λ R Y` given a derivative estimate of `Y`.
    pub fn residual_at(&self, i: usize, y: [Complex64; 2], dy: [Complex64; 2], lambda: Complex64) -> [Complex64; 2] {
        let r = self.r.at(i);
        let (p1, q, p2) = (self.p1.at(i), self.q.at(i), self.p2.at(i));
        [
            dy[1] + p1 * y[0] + q * y[1] - lambda * (r[0][0] * y[0] + r[0][1] * y[1]),
            -dy[0] + q * y[0] + p2 * y[1] - lambda * (r[1][0] * y[0] + r[1][1] * y[1]),
        ]
    }

    /// Max-norm of the finite-difference residual of `y` at interior nodes,
    /// relative to the size of the individual terms.
    pub fn fd_residual(&self, y: &VectorFn, lambda: Complex64) -> f64 {
        let du = y.u.derivative();
        let dv = y.v.derivative();
        let m = self.mesh().len();
        let scale = y.abs_max()
            * (1.0 + self.p1.abs_max().max(self.q.abs_max()).max(self.p2.abs_max()) + lambda.norm() * self.r.abs_max())
            + du.abs_max().max(dv.abs_max());
        let mut worst: f64 = 0.0;
        for i in 2..m - 2 {
            let res = self.residual_at(i, y.at(i), [du.at(i), dv.at(i)], lambda);
            worst = worst.max(res[0].norm()).max(res[1].norm());
        }
        worst / scale.max(f64::MIN_POSITIVE)
    }
}

/// Result of [`check_trace_condition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceCheck {
    pub holds: bool,
    pub deviation: f64,
}

/// `tr(B R) = r21 − r12 ≡ 0`, up to `1e-14 · max(1, ‖R‖)`.
pub fn check_trace_condition(r: &Mat2Fn) -> TraceCheck {
    let deviation = r.b_trace().abs_max();
    let scale = r.abs_max().max(1.0);
    TraceCheck {
        holds: deviation <= 1e-14 * scale,
        deviation,
    }
}

/// `𝒫 Y' + 𝒬 Y = λ ℛ Y` with `det 𝒫 ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralLinearSystem {
    pub p: Mat2Fn,
    pub q: Mat2Fn,
    pub r: Mat2Fn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeKind {
    /// Removes `tr(B Q)` of a reduced general system.
    GeneralReduction,
    /// Removes `−λ₀ tr(B R)` introduced by a spectral shift.
    SpectralShift { lambda0: Complex64 },
}

/// `Y = w · U`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeWeight {
    pub w: GridFn,
    pub kind: GaugeKind,
}

impl GaugeWeight {
    /// `w = exp(scale · ∫_a^x t)`.
    pub(crate) fn exp_integral(t: &GridFn, scale: Complex64, kind: GaugeKind) -> Self {
        let w = t.integrate_cumulative(0).map(|s| (scale * s).exp());
        Self { w, kind }
    }
}

fn inverse(m: M2) -> (M2, Complex64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    (inv, det)
}

fn mat_mul(a: M2, b: M2) -> M2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `B M` for `B = [[0, 1], [−1, 0]]`.
fn b_mul(m: M2) -> M2 {
    [[m[1][0], m[1][1]], [-m[0][0], -m[0][1]]]
}

impl GeneralLinearSystem {
    /// Reduces to Dirac form: `Q = B𝒫⁻¹𝒬`, `R = B𝒫⁻¹ℛ`, then `U = Y / w` with
    /// `w = exp(½ ∫_a tr(BQ))` removes the B-trace of `Q`.
    pub fn reduce(&self) -> Result<(DiracSystem, GaugeWeight)> {
        let mesh = self.p.mesh();
        if self.q.mesh() != mesh || self.r.mesh() != mesh {
            return Err(Error::MeshMismatch);
        }
        let scale = self.p.abs_max();
        let threshold = 1e-12 * scale * scale;
        let mut qs = Vec::with_capacity(mesh.len());
        let mut rs = Vec::with_capacity(mesh.len());
        for i in 0..mesh.len() {
            let (inv, det) = inverse(self.p.at(i));
            if !(det.norm() >= threshold) || det.norm() == 0.0 {
                return Err(Error::SingularCoefficient { node: i });
            }
            let bp = b_mul(inv);
            qs.push(mat_mul(bp, self.q.at(i)));
            rs.push(mat_mul(bp, self.r.at(i)));
        }
        let qm = Mat2Fn::from_nodes(mesh, |i| qs[i]);
        let r = Mat2Fn::from_nodes(mesh, |i| rs[i]);
        let trace = qm.b_trace();
        let half = Complex64::new(0.5, 0.0);
        let gauge = GaugeWeight::exp_integral(&trace, half, GaugeKind::GeneralReduction);
        // Q + ½ tr(BQ) B has equal off-diagonal entries (q12 + q21) / 2
        let off = qm.e12.zip_with(&qm.e21, |a, b| (a + b) * half)?;
        let sys = DiracSystem::new(qm.e11, off, qm.e22, r)?;
        Ok((sys, gauge))
    }

    /// `Y' = 𝒫⁻¹(λℛ − 𝒬) Y` at node `i`.
    pub fn rhs_matrix_at(&self, i: usize, lambda: Complex64) -> M2 {
        let (inv, _) = inverse(self.p.at(i));
        let q = self.q.at(i);
        let r = self.r.at(i);
        let mut rhs = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                rhs[a][b] = lambda * r[a][b] - q[a][b];
            }
        }
        mat_mul(inv, rhs)
    }
}

pub(crate) fn mat_inverse(m: M2) -> (M2, Complex64) {
    inverse(m)
}

pub(crate) fn mat_product(a: M2, b: M2) -> M2 {
    mat_mul(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh() -> Mesh {
        Mesh::new(0.0, 1.0, 51).unwrap()
    }

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn trace_condition_examples() {
        let m = mesh();
        let id = Mat2Fn::identity(m);
        assert_eq!(check_trace_condition(&id), TraceCheck { holds: true, deviation: 0.0 });
        let mut skew = Mat2Fn::identity(m);
        skew.e12 = GridFn::constant(m, c(1.0));
        let t = check_trace_condition(&skew);
        assert!(!t.holds);
        assert_eq!(t.deviation, 1.0);
    }

    #[test]
    fn off_diagonal_weight_is_symmetric() {
        // v' - x u = λ u, -u' + v = λ v
        let m = mesh();
        let r = Mat2Fn::identity(m);
        assert!(check_trace_condition(&r).holds);
    }

    #[test]
    fn dirac_form_reduces_to_itself() {
        let m = mesh();
        let b = Mat2Fn {
            e11: GridFn::zeros(m),
            e12: GridFn::constant(m, c(1.0)),
            e21: GridFn::constant(m, c(-1.0)),
            e22: GridFn::zeros(m),
        };
        let q = GridFn::sample(m, |x| Complex64::new(x.sin(), 0.3)).unwrap();
        let p = Mat2Fn {
            e11: GridFn::sample(m, |x| c(-x)).unwrap(),
            e12: q.clone(),
            e21: q.clone(),
            e22: GridFn::constant(m, c(1.0)),
        };
        let r = Mat2Fn::from_nodes(m, |i| {
            let x = m.node(i);
            [[c(1.0 + x), c(0.5)], [c(0.2), c(2.0)]]
        });
        let general = GeneralLinearSystem { p: b, q: p.clone(), r: r.clone() };
        let (sys, gauge) = general.reduce().unwrap();
        for i in 0..m.len() {
            assert!((sys.p1.at(i) - p.e11.at(i)).norm() < 1e-15);
            assert!((sys.q.at(i) - q.at(i)).norm() < 1e-15);
            assert!((sys.p2.at(i) - p.e22.at(i)).norm() < 1e-15);
            let (got, want) = (sys.r.at(i), r.at(i));
            for a in 0..2 {
                for b in 0..2 {
                    assert!((got[a][b] - want[a][b]).norm() < 1e-15);
                }
            }
            assert!((gauge.w.at(i) - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn singular_leading_matrix_is_rejected() {
        let m = mesh();
        let p = Mat2Fn::from_nodes(m, |i| {
            let x = m.node(i);
            [[c(x - 0.5), c(0.0)], [c(0.0), c(1.0)]]
        });
        let general = GeneralLinearSystem { p, q: Mat2Fn::zeros(m), r: Mat2Fn::identity(m) };
        assert_eq!(general.reduce().unwrap_err(), Error::SingularCoefficient { node: 25 });
    }

    #[test]
    fn reduced_coefficient_is_symmetric() {
        let m = mesh();
        let p = Mat2Fn::from_nodes(m, |i| {
            let x = m.node(i);
            [[c(2.0 + x), c(0.3)], [Complex64::new(0.1, x), c(1.5)]]
        });
        let q = Mat2Fn::from_nodes(m, |i| {
            let x = m.node(i);
            [[c(x), c(1.0 - x)], [c(x * x), Complex64::new(0.0, 1.0)]]
        });
        let general = GeneralLinearSystem { p, q, r: Mat2Fn::identity(m) };
        let (sys, gauge) = general.reduce().unwrap();
        assert!(sys.p_matrix().b_trace().abs_max() == 0.0);
        assert_eq!(gauge.w.at(0), c(1.0));
        assert!(gauge.w.abs_min() > 0.0);
    }
}
