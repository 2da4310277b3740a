//! Solutions of `B Y' + P Y = λ R Y` as power series in `Λ = λ − λ₀`.

use num_complex::Complex64;

use crate::error::{Error, Result};
#[cfg(test)]
use crate::grid::GridFn;
use crate::homogeneous::ParticularSolution;
use crate::powers::{bound_constants, truncation_bound, BoundConstants, FormalPowerTable, Stop};
use crate::system::{check_trace_condition, DiracSystem, GaugeKind, GaugeWeight, VectorFn};

/// Two independent solutions expanded around `λ₀`.
#[derive(Debug, Clone)]
pub struct SppsSolutionPair {
    pub table: FormalPowerTable,
    pub lambda0: Complex64,
    pub gauge: Option<GaugeWeight>,
    /// System the table was built for, i.e. `P − λ₀R` in gauge variables.
    pub shifted: DiracSystem,
    pub bounds: BoundConstants,
}

/// Fundamental system at one `λ`.
#[derive(Debug, Clone)]
pub struct SolutionBasis {
    pub y1: VectorFn,
    pub y2: VectorFn,
    pub truncation_bound: f64,
    /// Set when the a-priori bound exceeds `1e-10 · max(1, ‖Y‖)`.
    pub truncation_warning: bool,
}

#[derive(Debug, Clone)]
pub struct IvpSolution {
    pub y: VectorFn,
    pub truncation_bound: f64,
    pub truncation_warning: bool,
}

impl SppsSolutionPair {
    /// Expansion around `λ₀ = 0` from a known particular solution.
    pub fn new(sys: &DiracSystem, sol: &ParticularSolution, order: usize) -> Result<Self> {
        let table = FormalPowerTable::compute(sys, sol, order, Stop::Order)?;
        let bounds = bound_constants(sys, sol)?;
        Ok(Self {
            table,
            lambda0: Complex64::new(0.0, 0.0),
            gauge: None,
            shifted: sys.clone(),
            bounds,
        })
    }

    /// Expansion around `λ₀` given a non-vanishing solution `seed` of the
    /// system at `λ = λ₀`.
    pub fn shifted(
        sys: &DiracSystem,
        lambda0: Complex64,
        seed: &VectorFn,
        order: usize,
        x0_index: usize,
    ) -> Result<Self> {
        let (shifted, gauge) = shifted_system(sys, lambda0)?;
        let sol = match &gauge {
            None => ParticularSolution::from_vector(seed, x0_index)?,
            Some(w) => ParticularSolution::new(seed.u.div(&w.w)?, seed.v.div(&w.w)?, x0_index)?,
        };
        let table = FormalPowerTable::compute(&shifted, &sol, order, Stop::Order)?;
        let bounds = bound_constants(&shifted, &sol)?;
        Ok(Self { table, lambda0, gauge, shifted, bounds })
    }

    pub fn order(&self) -> usize {
        self.table.order()
    }

    pub fn seed(&self) -> &ParticularSolution {
        self.table.seed()
    }

    /// Gauge factor at node `i` (1 without gauge).
    pub fn gauge_at(&self, i: usize) -> Complex64 {
        self.gauge.as_ref().map_or(Complex64::new(1.0, 0.0), |g| g.w.at(i))
    }

    /// A-priori bound on the truncation error at `λ`.
    pub fn truncation_bound(&self, lambda: Complex64) -> f64 {
        truncation_bound(&self.bounds, self.order(), self.bounds.radius, (lambda - self.lambda0).norm())
    }

    /// Largest `|Λ|` for which the last computed terms stay below `1e-10` of
    /// the series they belong to, `max_{n ≥ N−2} aₙ Rⁿ ≤ 1e-10 Σ aₙ Rⁿ`, where
    /// `aₙ` are the solution-weighted power norms.
    pub fn trusted_radius(&self) -> f64 {
        trusted_radius(self.table.solution_norms())
    }

    pub fn evaluate(&self, lambda: Complex64) -> SolutionBasis {
        self.evaluate_truncated(lambda, self.order())
    }

    pub fn evaluate_truncated(&self, lambda: Complex64, order: usize) -> SolutionBasis {
        let (mut y1, mut y2) = self.table.evaluate_truncated(lambda - self.lambda0, order);
        if let Some(g) = &self.gauge {
            y1 = y1.scale_by(&g.w);
            y2 = y2.scale_by(&g.w);
        }
        let bound = self.truncation_bound(lambda);
        let scale = y1.abs_max().max(y2.abs_max()).max(1.0);
        SolutionBasis {
            y1,
            y2,
            truncation_bound: bound,
            truncation_warning: !(bound <= 1e-10 * scale),
        }
    }

    /// Solution with `Y(a) = y_a`.
    pub fn solve_ivp(&self, lambda: Complex64, y_a: [Complex64; 2]) -> Result<IvpSolution> {
        let basis = self.evaluate(lambda);
        let y = self.combine(&basis, y_a)?;
        Ok(IvpSolution {
            y,
            truncation_bound: basis.truncation_bound,
            truncation_warning: basis.truncation_warning,
        })
    }

    /// Solutions with `Y(a) = (1, 0)` and `Y(a) = (0, 1)`.
    pub fn fundamental(&self, lambda: Complex64) -> Result<(VectorFn, VectorFn)> {
        let basis = self.evaluate(lambda);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Ok((self.combine(&basis, [one, zero])?, self.combine(&basis, [zero, one])?))
    }

    fn combine(&self, basis: &SolutionBasis, y_a: [Complex64; 2]) -> Result<VectorFn> {
        let (c1, c2) = if self.seed().x0_index == 0 {
            let w = self.gauge_at(0);
            (y_a[0] / (w * self.seed().f.at(0)), y_a[1] / (w * self.seed().g.at(0)))
        } else {
            let m = [basis.y1.at(0), basis.y2.at(0)];
            // columns: Y1(a), Y2(a)
            let (a, b, c, d) = (m[0][0], m[1][0], m[0][1], m[1][1]);
            let det = a * d - b * c;
            let norm1 = (a.norm() + c.norm()).max(b.norm() + d.norm());
            let condition = if det.norm() == 0.0 { f64::INFINITY } else { norm1 * norm1 / det.norm() };
            if !(condition <= 1e12) {
                return Err(Error::SingularInitialMatrix { condition });
            }
            ((d * y_a[0] - b * y_a[1]) / det, (a * y_a[1] - c * y_a[0]) / det)
        };
        Ok(basis.y1.scale(c1).axpy(c2, &basis.y2))
    }
}

/// `P − λ₀R`, made symmetric by a gauge when `tr(BR) ≢ 0`.
pub fn shifted_system(sys: &DiracSystem, lambda0: Complex64) -> Result<(DiracSystem, Option<GaugeWeight>)> {
    let r = &sys.r;
    let half = lambda0 * 0.5;
    let p1 = sys.p1.zip_with(&r.e11, |p, w| p - lambda0 * w)?;
    let p2 = sys.p2.zip_with(&r.e22, |p, w| p - lambda0 * w)?;
    let r_off = r.e12.zip_with(&r.e21, |a, b| a + b)?;
    let q = sys.q.zip_with(&r_off, |q, s| q - half * s)?;
    let gauge = if lambda0.norm() == 0.0 || check_trace_condition(r).holds {
        None
    } else {
        Some(GaugeWeight::exp_integral(&r.b_trace(), -half, GaugeKind::SpectralShift { lambda0 }))
    };
    Ok((DiracSystem::new(p1, q, p2, r.clone())?, gauge))
}

pub(crate) fn trusted_radius(norms: &[f64]) -> f64 {
    let n = norms.len() - 1;
    let lo = n.saturating_sub(2);
    if norms[lo..].iter().all(|&a| a == 0.0) {
        return f64::INFINITY;
    }
    let logs: Vec<Option<f64>> = norms.iter().map(|&a| (a > 0.0).then(|| a.ln())).collect();
    let excess = |ln_r: f64| {
        let terms: Vec<f64> = logs.iter().enumerate().filter_map(|(k, l)| l.map(|l| l + k as f64 * ln_r)).collect();
        let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ln_sum = peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln();
        let tail = (lo..=n)
            .filter_map(|k| logs[k].map(|l| l + k as f64 * ln_r))
            .fold(f64::NEG_INFINITY, f64::max);
        tail - ln_sum - (1e-10f64).ln()
    };
    let (mut a, mut b) = ((1e-6f64).ln(), (1e6f64).ln());
    if excess(a) > 0.0 {
        return 0.0;
    }
    if excess(b) <= 0.0 {
        return f64::INFINITY;
    }
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if excess(mid) <= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    a.exp()
}

/// Writes `Y` as `x,re_u,im_u,re_v,im_v` CSV.
pub fn write_solution_csv<W: std::io::Write>(y: &VectorFn, w: W) -> std::io::Result<()> {
    y.write_csv(w)
}

/// Applies the gauge of a reduced general system to a Dirac-variable solution.
pub fn apply_gauge(u: &VectorFn, gauge: &GaugeWeight) -> VectorFn {
    u.scale_by(&gauge.w)
}

#[cfg(test)]
fn unit(mesh: crate::grid::Mesh) -> GridFn {
    GridFn::constant(mesh, Complex64::new(1.0, 0.0))
}
