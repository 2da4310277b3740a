//! Uniform meshes, complex grid functions and cumulative Newton–Cotes quadrature.
//!
//! Every function in the crate is represented by its values on a uniform mesh
//! with `m ≡ 1 (mod 5)` nodes so that six-point (degree five) Newton–Cotes
//! panels tile the interval exactly. Cumulative integrals are defined at every
//! node: inside a panel the antiderivative of the panel's quintic interpolant
//! is used.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Nodes per Newton–Cotes panel minus one.
pub const PANEL: usize = 5;

/// Uniform mesh on `[a, b]` with `m` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    a: f64,
    b: f64,
    m: usize,
}

impl Mesh {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMesh(format!("need finite a < b, got [{a}, {b}]")));
        }
        if m < PANEL + 1 || (m - 1) % PANEL != 0 {
            return Err(Error::InvalidMesh(format!(
                "node count {m} must be at least 6 and satisfy m ≡ 1 (mod 5)"
            )));
        }
        Ok(Self { a, b, m })
    }

    /// Smallest valid node count not below `requested`.
    pub fn round_up_count(requested: usize) -> usize {
        let m = requested.max(PANEL + 1);
        let rem = (m - 1) % PANEL;
        if rem == 0 {
            m
        } else {
            m + PANEL - rem
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.m - 1) as f64
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.m {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |i| self.node(i))
    }

    /// Index of the node nearest to `x`, clamped to the mesh.
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = ((x - self.a) / self.step()).round();
        t.clamp(0.0, (self.m - 1) as f64) as usize
    }

    /// Same mesh with every panel split into `factor` finer panels.
    pub fn refined(&self, factor: usize) -> Mesh {
        Mesh {
            a: self.a,
            b: self.b,
            m: (self.m - 1) * factor + 1,
        }
    }
}

/// Complex-valued function sampled on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    mesh: Mesh,
    values: Vec<Complex64>,
}

impl GridFn {
    pub fn from_values(mesh: Mesh, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::InvalidMesh(format!(
                "expected {} samples, got {}",
                mesh.len(),
                values.len()
            )));
        }
        if let Some((node, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Sampling {
                node,
                x: mesh.node(node),
                value: v.to_string(),
            });
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Mesh, value: Complex64) -> Self {
        Self {
            mesh,
            values: vec![value; mesh.len()],
        }
    }

    pub fn zeros(mesh: Mesh) -> Self {
        Self::constant(mesh, Complex64::new(0.0, 0.0))
    }

    /// Samples `f` at every node.
    pub fn sample(mesh: Mesh, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::try_sample(mesh, |x| Ok(f(x)))
    }

    /// Samples a fallible map; evaluation errors and non-finite values fail with the node.
    pub fn try_sample(mesh: Mesh, f: impl Fn(f64) -> Result<Complex64>) -> Result<Self> {
        let mut values = Vec::with_capacity(mesh.len());
        for (node, x) in mesh.nodes().enumerate() {
            let v = f(x)?;
            if !v.is_finite() {
                return Err(Error::Sampling {
                    node,
                    x,
                    value: v.to_string(),
                });
            }
            values.push(v);
        }
        Ok(Self { mesh, values })
    }

    pub(crate) fn from_vec_unchecked(mesh: Mesh, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), mesh.len());
        Self { mesh, values }
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn first(&self) -> Complex64 {
        self.values[0]
    }

    pub fn last(&self) -> Complex64 {
        self.values[self.values.len() - 1]
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFn {
        GridFn {
            mesh: self.mesh,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFn,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<GridFn> {
        if self.mesh != other.mesh {
            return Err(Error::MeshMismatch);
        }
        Ok(self.zip_unchecked(other, f))
    }

    fn zip_unchecked(&self, other: &GridFn, f: impl Fn(Complex64, Complex64) -> Complex64) -> GridFn {
        assert_eq!(self.mesh, other.mesh, "grid functions live on different meshes");
        GridFn {
            mesh: self.mesh,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFn) -> Result<GridFn> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn div(&self, other: &GridFn) -> Result<GridFn> {
        if self.mesh != other.mesh {
            return Err(Error::MeshMismatch);
        }
        if let Some(node) = other.values.iter().position(|v| v.norm_sqr() == 0.0) {
            return Err(Error::DivisionByZeroNode { node });
        }
        Ok(self.zip_unchecked(other, |a, b| a / b))
    }

    /// Nodewise reciprocal.
    pub fn recip(&self) -> Result<GridFn> {
        if let Some(node) = self.values.iter().position(|v| v.norm_sqr() == 0.0) {
            return Err(Error::DivisionByZeroNode { node });
        }
        Ok(self.map(|v| v.inv()))
    }

    pub fn scale(&self, c: Complex64) -> GridFn {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> GridFn {
        self.map(|v| v.conj())
    }

    pub fn abs_max(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn abs_min(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Nodes where the function is exactly zero.
    pub fn zero_nodes(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.norm_sqr() == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Cumulative integral `∫_{x_{x0}}^{x_i} f` at every node.
    pub fn integrate_cumulative(&self, x0_index: usize) -> GridFn {
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        cumulative_into(&self.values, self.mesh.step(), x0_index, &mut out);
        GridFn {
            mesh: self.mesh,
            values: out,
        }
    }

    /// Definite integral over the whole mesh.
    pub fn integral(&self) -> Complex64 {
        let w = weights();
        let h = self.mesh.step();
        let mut acc = CompensatedSum::new();
        for start in (0..self.values.len() - 1).step_by(PANEL) {
            let seg = &self.values[start..=start + PANEL];
            let mut s = Complex64::new(0.0, 0.0);
            for (k, &v) in seg.iter().enumerate() {
                s += v * w[PANEL - 1][k];
            }
            acc.add(s * h);
        }
        acc.value()
    }

    /// Fourth-order finite-difference derivative (one-sided five-point stencils at the ends).
    pub fn derivative(&self) -> GridFn {
        let f = &self.values;
        let m = f.len();
        let h = self.mesh.step();
        let mut d = vec![Complex64::new(0.0, 0.0); m];
        for i in 2..m - 2 {
            d[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) / (12.0 * h);
        }
        let fwd = |i: usize, s: f64| {
            let g = |k: usize| if s > 0.0 { f[i + k] } else { f[i - k] };
            (g(0) * -25.0 + g(1) * 48.0 - g(2) * 36.0 + g(3) * 16.0 - g(4) * 3.0) / (12.0 * h * s)
        };
        let bias = |i: usize, s: f64| {
            // stencil i-1..i+3 (or mirrored)
            let g = |k: isize| {
                let j = i as isize + if s > 0.0 { k } else { -k };
                f[j as usize]
            };
            (g(-1) * -3.0 - g(0) * 10.0 + g(1) * 18.0 - g(2) * 6.0 + g(3)) / (12.0 * h * s)
        };
        d[0] = fwd(0, 1.0);
        d[1] = bias(1, 1.0);
        d[m - 1] = fwd(m - 1, -1.0);
        d[m - 2] = bias(m - 2, -1.0);
        GridFn { mesh: self.mesh, values: d }
    }

    /// Value at an arbitrary point by quintic interpolation on the enclosing panel.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let h = self.mesh.step();
        let t = ((x - self.mesh.a) / h).clamp(0.0, (self.mesh.m - 1) as f64);
        let panels = (self.mesh.m - 1) / PANEL;
        let p = ((t / PANEL as f64).floor() as usize).min(panels - 1);
        let start = p * PANEL;
        let s = t - start as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=PANEL {
            let mut lk = 1.0;
            for j in 0..=PANEL {
                if j != k {
                    lk *= (s - j as f64) / (k as f64 - j as f64);
                }
            }
            acc += self.values[start + k] * lk;
        }
        acc
    }

    /// Writes the `x,re,im` CSV representation.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,re,im")?;
        let mut line = String::new();
        for (x, v) in self.mesh.nodes().zip(&self.values) {
            line.clear();
            let _ = writeln!(line, "{:.16e},{:.16e},{:.16e}", x, v.re, v.im);
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Parses the `x,re,im` CSV representation written by [`GridFn::write_csv`].
    pub fn read_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "x,re,im" => {}
            _ => return Err(Error::InvalidMesh("missing `x,re,im` header".into())),
        }
        let mut xs = Vec::new();
        let mut vals = Vec::new();
        for (row, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidMesh(format!("row {row}: {e}")))?;
            if cols.len() != 3 {
                return Err(Error::InvalidMesh(format!("row {row}: expected 3 columns")));
            }
            xs.push(cols[0]);
            vals.push(Complex64::new(cols[1], cols[2]));
        }
        if xs.is_empty() {
            return Err(Error::InvalidMesh("no rows".into()));
        }
        let mesh = Mesh::new(xs[0], xs[xs.len() - 1], xs.len())?;
        GridFn::from_values(mesh, vals)
    }
}

impl Add for &GridFn {
    type Output = GridFn;
    fn add(self, rhs: &GridFn) -> GridFn {
        self.zip_unchecked(rhs, |a, b| a + b)
    }
}

impl Sub for &GridFn {
    type Output = GridFn;
    fn sub(self, rhs: &GridFn) -> GridFn {
        self.zip_unchecked(rhs, |a, b| a - b)
    }
}

impl Mul for &GridFn {
    type Output = GridFn;
    fn mul(self, rhs: &GridFn) -> GridFn {
        self.zip_unchecked(rhs, |a, b| a * b)
    }
}

impl Mul<Complex64> for &GridFn {
    type Output = GridFn;
    fn mul(self, rhs: Complex64) -> GridFn {
        self.scale(rhs)
    }
}

impl Neg for &GridFn {
    type Output = GridFn;
    fn neg(self) -> GridFn {
        self.map(|v| -v)
    }
}

/// `W[j-1][k] = ∫_0^j L_k(t) dt` for the Lagrange basis on nodes `0..=5`.
/// Row `PANEL - 1` holds the closed six-point Newton–Cotes weights.
pub(crate) fn weights() -> &'static [[f64; PANEL + 1]; PANEL] {
    const NUM: [[i32; PANEL + 1]; PANEL] = [
        [475, 1427, -798, 482, -173, 27],
        [448, 2064, 224, 224, -96, 16],
        [459, 1971, 1026, 1026, -189, 27],
        [448, 2048, 768, 2048, 448, 0],
        [475, 1875, 1250, 1250, 1875, 475],
    ];
    static W: OnceLock<[[f64; PANEL + 1]; PANEL]> = OnceLock::new();
    W.get_or_init(|| NUM.map(|row| row.map(|n| n as f64 / 1440.0)))
}

/// Cumulative integration of raw samples; `out[x0] == 0` exactly.
pub(crate) fn cumulative_into(f: &[Complex64], h: f64, x0: usize, out: &mut [Complex64]) {
    let w = weights();
    let m = f.len();
    debug_assert_eq!(out.len(), m);
    debug_assert!((m - 1) % PANEL == 0);
    let mut boundary = CompensatedSum::new();
    out[0] = Complex64::new(0.0, 0.0);
    for start in (0..m - 1).step_by(PANEL) {
        let seg = &f[start..=start + PANEL];
        let base = boundary.value();
        for (j, wj) in w.iter().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..=PANEL {
                s += seg[k] * wj[k];
            }
            if j + 1 == PANEL {
                boundary.add(s * h);
                out[start + PANEL] = boundary.value();
            } else {
                out[start + j + 1] = base + s * h;
            }
        }
    }
    if x0 != 0 {
        let anchor = out[x0];
        for v in out.iter_mut() {
            *v -= anchor;
        }
        out[x0] = Complex64::new(0.0, 0.0);
    }
}
