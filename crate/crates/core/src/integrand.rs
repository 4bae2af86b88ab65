//! Extended-real periodic integrands `W(x, xi) = A(x) f(xi)`, certification of
//! the standing hypotheses on samples, and the finite truncation sequence
//! `W_n`.
//!
//! `+inf` is a first-class evaluation result: there is no big-M surrogate
//! anywhere, and solvers are expected to keep their iterates feasible instead
//! of relying on penalty overflow.

use crate::convex::ConstraintSet;
use crate::error::{HomError, Result};
use crate::math::{self, Rng};
use crate::matrix::Matrix;
use alloc::boxed::Box;
use alloc::vec::Vec;

/// Piecewise-constant positive coefficient on a regular grid over the unit
/// cell, extended periodically.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicCoefficient {
    d: usize,
    resolution: usize,
    samples: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl PeriodicCoefficient {
    pub fn constant(d: usize, value: f64) -> Result<Self> {
        Self::from_samples(d, 1, alloc::vec![value])
    }

    /// `d`-dimensional grid with `resolution` cells per axis, row-major with
    /// the first axis fastest.
    pub fn from_samples(d: usize, resolution: usize, samples: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&d) {
            return Err(HomError::InvalidParameter("coefficient dimension must be 1 or 2"));
        }
        if resolution == 0 || samples.len() != resolution.pow(d as u32) {
            return Err(HomError::InvalidParameter(
                "coefficient sample count must equal resolution^d",
            ));
        }
        let mut lower = f64::INFINITY;
        let mut upper = 0.0f64;
        for &v in &samples {
            if !(v > 0.0) || !v.is_finite() {
                return Err(HomError::InvalidParameter(
                    "coefficient samples must be finite and positive",
                ));
            }
            lower = lower.min(v);
            upper = upper.max(v);
        }
        Ok(PeriodicCoefficient {
            d,
            resolution,
            samples,
            lower,
            upper,
        })
    }

    /// 1-d piecewise-constant profile, one cell per value.
    pub fn laminate(values: &[f64]) -> Result<Self> {
        Self::from_samples(1, values.len(), values.to_vec())
    }

    /// 2x2 checkerboard alternating between `a` and `b`.
    pub fn checkerboard(a: f64, b: f64) -> Result<Self> {
        Self::from_samples(2, 2, alloc::vec![a, b, b, a])
    }

    #[inline]
    pub fn dimension(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    #[inline]
    pub fn min(&self) -> f64 {
        self.lower
    }

    #[inline]
    pub fn max(&self) -> f64 {
        self.upper
    }

    /// Arithmetic cell average over the unit cell.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Periodic piecewise-constant evaluation.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        let r = self.resolution;
        let cell = |xi: f64| -> usize {
            let f = math::fract_unit(xi) * r as f64;
            (f as usize).min(r - 1)
        };
        match self.d {
            1 => self.samples[cell(x[0])],
            _ => self.samples[cell(x[1]) * r + cell(x[0])],
        }
    }

    /// Cell centers of the coefficient grid, used to sample `x` exactly.
    pub fn cell_centers(&self) -> Vec<Vec<f64>> {
        let r = self.resolution;
        let h = 1.0 / r as f64;
        let mut out = Vec::new();
        match self.d {
            1 => {
                for i in 0..r {
                    out.push(alloc::vec![(i as f64 + 0.5) * h]);
                }
            }
            _ => {
                for j in 0..r {
                    for i in 0..r {
                        out.push(alloc::vec![(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                    }
                }
            }
        }
        out
    }
}

/// Matrix kernel `f` of the density; the effective domain is dictated by the
/// constraint set passed at evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityKernel {
    /// `weight * |xi|^2` on `closure(C)`.
    Quadratic { weight: f64 },
    /// Scalar double well `(v^2 - 1)^2` (1x1 gradients only).
    DoubleWell,
    /// `coeff * gauge(xi)^exponent`; `exponent = 0` degenerates to a constant.
    PowerGauge { coeff: f64, exponent: f64 },
    /// `g(xi) + cbar * (1/(1 - gauge^alpha) - 1)`, infinite at the boundary.
    Barrier {
        g: Box<DensityKernel>,
        cbar: f64,
        alpha: f64,
    },
    /// Nearest-cell table over the bounding box `[-R, R]^(m*d)` of `C`.
    Tabulated { per_axis: usize, values: Vec<f64> },
}

impl DensityKernel {
    pub fn barrier(g: DensityKernel, cbar: f64, alpha: f64) -> Result<Self> {
        if !(cbar > 0.0) || !(alpha > 0.0) {
            return Err(HomError::InvalidParameter(
                "barrier parameters cbar and alpha must be positive",
            ));
        }
        Ok(DensityKernel::Barrier {
            g: Box::new(g),
            cbar,
            alpha,
        })
    }

    /// Extended-real evaluation. `+inf` exactly outside `closure(C)`, and on
    /// the boundary as well for the barrier variant.
    pub fn eval(&self, c: &ConstraintSet, xi: &Matrix) -> f64 {
        let t = c.gauge_unchecked(xi);
        match self {
            DensityKernel::Quadratic { weight } => {
                if t > 1.0 {
                    f64::INFINITY
                } else {
                    weight * xi.dot(xi)
                }
            }
            DensityKernel::DoubleWell => {
                if t > 1.0 {
                    f64::INFINITY
                } else {
                    let v = xi.get(0, 0);
                    let w = v * v - 1.0;
                    w * w
                }
            }
            DensityKernel::PowerGauge { coeff, exponent } => {
                if t > 1.0 {
                    f64::INFINITY
                } else if *exponent == 0.0 {
                    *coeff
                } else {
                    coeff * math::pow(t, *exponent)
                }
            }
            DensityKernel::Barrier { g, cbar, alpha } => {
                if t >= 1.0 {
                    f64::INFINITY
                } else {
                    let ta = math::pow(t, *alpha);
                    g.eval(c, xi) + cbar * (1.0 / (1.0 - ta) - 1.0)
                }
            }
            DensityKernel::Tabulated { per_axis, values } => {
                if t > 1.0 {
                    f64::INFINITY
                } else {
                    let radius = c.circumradius();
                    let (m, d) = xi.shape();
                    let mut idx = 0usize;
                    let mut stride = 1usize;
                    for i in 0..m {
                        for j in 0..d {
                            let u = (xi.get(i, j) + radius) / (2.0 * radius);
                            let k = ((u * *per_axis as f64) as usize).min(per_axis - 1);
                            idx += k * stride;
                            stride *= per_axis;
                        }
                    }
                    values[idx]
                }
            }
        }
    }

    /// Gradient (a subgradient at kinks) where the evaluation is finite.
    pub fn grad(&self, c: &ConstraintSet, xi: &Matrix) -> Matrix {
        match self {
            DensityKernel::Quadratic { weight } => xi.scale(2.0 * weight),
            DensityKernel::DoubleWell => {
                let v = xi.get(0, 0);
                Matrix::scalar(4.0 * v * (v * v - 1.0))
            }
            DensityKernel::PowerGauge { coeff, exponent } => {
                let t = c.gauge_unchecked(xi);
                if *exponent == 0.0 || t == 0.0 {
                    Matrix::zeros(xi.rows(), xi.cols())
                } else {
                    c.gauge_subgradient_unchecked(xi)
                        .scale(coeff * exponent * math::pow(t, exponent - 1.0))
                }
            }
            DensityKernel::Barrier { g, cbar, alpha } => {
                let t = c.gauge_unchecked(xi);
                let mut out = g.grad(c, xi);
                if t > 0.0 && t < 1.0 {
                    let ta = math::pow(t, *alpha);
                    let dh = cbar * alpha * math::pow(t, alpha - 1.0) / ((1.0 - ta) * (1.0 - ta));
                    out.add_assign_scaled(&c.gauge_subgradient_unchecked(xi), dh);
                }
                out
            }
            DensityKernel::Tabulated { .. } => {
                // Central differences at the table scale.
                let radius = c.circumradius();
                let (m, d) = xi.shape();
                let step = radius * 1e-3;
                let mut out = Matrix::zeros(m, d);
                for i in 0..m {
                    for j in 0..d {
                        let mut hi = *xi;
                        hi.set(i, j, xi.get(i, j) + step);
                        let mut lo = *xi;
                        lo.set(i, j, xi.get(i, j) - step);
                        let (fh, fl) = (self.eval(c, &hi), self.eval(c, &lo));
                        if fh.is_finite() && fl.is_finite() {
                            out.set(i, j, (fh - fl) / (2.0 * step));
                        }
                    }
                }
                out
            }
        }
    }

    /// Exact supremum over the scaled copy `t * closure(C)` (a finite upper
    /// bound for the tabulated variant).
    pub fn sup_on_scaled(&self, c: &ConstraintSet, t: f64) -> f64 {
        match self {
            DensityKernel::Quadratic { weight } => {
                let r = t * c.circumradius();
                weight * r * r
            }
            DensityKernel::DoubleWell => {
                let a = t * c.circumradius();
                let edge = a * a - 1.0;
                (edge * edge).max(1.0)
            }
            DensityKernel::PowerGauge { coeff, exponent } => {
                if *exponent == 0.0 {
                    *coeff
                } else {
                    coeff * math::pow(t, *exponent)
                }
            }
            DensityKernel::Barrier { g, cbar, alpha } => {
                if t >= 1.0 {
                    f64::INFINITY
                } else {
                    let ta = math::pow(t, *alpha);
                    g.sup_on_scaled(c, t) + cbar * (1.0 / (1.0 - ta) - 1.0)
                }
            }
            DensityKernel::Tabulated { values, .. } => values
                .iter()
                .copied()
                .filter(|v| v.is_finite())
                .fold(0.0f64, f64::max),
        }
    }

    /// Certified lower bound on the shell `closure(C) \ t closure(C)`; `0`
    /// when no analytic bound is available.
    pub fn shell_lower_bound(&self, c: &ConstraintSet, t: f64) -> f64 {
        match self {
            DensityKernel::Quadratic { weight } => {
                let r = t * c.inradius();
                weight * r * r
            }
            DensityKernel::DoubleWell => 0.0,
            DensityKernel::PowerGauge { coeff, exponent } => {
                if *exponent == 0.0 {
                    *coeff
                } else {
                    coeff * math::pow(t, *exponent)
                }
            }
            DensityKernel::Barrier { g, cbar, alpha } => {
                let ta = math::pow(t, *alpha);
                g.shell_lower_bound(c, t) + cbar * (1.0 / (1.0 - ta) - 1.0)
            }
            DensityKernel::Tabulated { .. } => 0.0,
        }
    }

    /// Convexity on the domain, decided analytically where possible and by
    /// second differences on a grid for tabulated kernels (1x1 only).
    pub fn convex_on_domain_1d(&self, c: &ConstraintSet) -> bool {
        match self {
            DensityKernel::Quadratic { weight } => *weight >= 0.0,
            DensityKernel::DoubleWell => false,
            DensityKernel::PowerGauge { coeff, exponent } => {
                *coeff >= 0.0 && (*exponent >= 1.0 || *exponent == 0.0)
            }
            DensityKernel::Barrier { g, .. } => g.convex_on_domain_1d(c),
            DensityKernel::Tabulated { .. } => {
                let r = c.circumradius();
                let n = 257;
                let h = 2.0 * r / (n - 1) as f64;
                let mut prev = [f64::NAN; 2];
                for k in 0..n {
                    let v = self.eval(c, &Matrix::scalar(-r + k as f64 * h));
                    if !v.is_finite() {
                        prev = [f64::NAN; 2];
                        continue;
                    }
                    if prev[0].is_finite() && prev[1].is_finite() {
                        let second = prev[0] - 2.0 * prev[1] + v;
                        if second < -1e-9 * (1.0 + math::abs(v)) {
                            return false;
                        }
                    }
                    prev = [prev[1], v];
                }
                true
            }
        }
    }
}

/// Periodic product integrand `W(x, xi) = A(x) f(xi)` with
/// `dom W(x, .) inside closure(C)` for every `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrand {
    coefficient: PeriodicCoefficient,
    kernel: DensityKernel,
    constraint: ConstraintSet,
}

impl Integrand {
    pub fn new(
        coefficient: PeriodicCoefficient,
        kernel: DensityKernel,
        constraint: ConstraintSet,
    ) -> Result<Self> {
        let (m, d) = constraint.shape();
        if d != coefficient.dimension() {
            return Err(HomError::DimensionMismatch {
                expected: (m, coefficient.dimension()),
                got: (m, d),
            });
        }
        if matches!(kernel, DensityKernel::DoubleWell) && (m, d) != (1, 1) {
            return Err(HomError::InvalidParameter(
                "the double-well kernel is scalar only",
            ));
        }
        if let DensityKernel::Tabulated { per_axis, values } = &kernel {
            if *per_axis == 0 || values.len() != per_axis.pow((m * d) as u32) {
                return Err(HomError::InvalidParameter(
                    "tabulated kernel size must equal per_axis^(m*d)",
                ));
            }
        }
        Ok(Integrand {
            coefficient,
            kernel,
            constraint,
        })
    }

    #[inline]
    pub fn coefficient(&self) -> &PeriodicCoefficient {
        &self.coefficient
    }

    #[inline]
    pub fn kernel(&self) -> &DensityKernel {
        &self.kernel
    }

    #[inline]
    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    /// Gradient shape `(m, d)`.
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.constraint.shape()
    }

    /// Total extended-real evaluation `A(x) f(xi)`.
    #[inline]
    pub fn eval(&self, x: &[f64], xi: &Matrix) -> f64 {
        debug_assert_eq!(xi.shape(), self.shape());
        self.coefficient.eval(x) * self.kernel.eval(&self.constraint, xi)
    }

    /// Gradient in the matrix variable where finite.
    #[inline]
    pub fn grad_xi(&self, x: &[f64], xi: &Matrix) -> Matrix {
        self.kernel
            .grad(&self.constraint, xi)
            .scale(self.coefficient.eval(x))
    }
}

/// Increasing truncation ladder `t_n -> 1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum TruncationSchedule {
    /// `t_n = 1 - 2^{-n}`.
    #[default]
    Dyadic,
    /// Explicit strictly increasing prefix; continued dyadically past the end
    /// so the supremum stays 1.
    Explicit(Vec<f64>),
}

impl TruncationSchedule {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(HomError::InvalidParameter("empty truncation schedule"));
        }
        let mut prev = -1.0;
        for &t in &values {
            if !(t > prev) || !(0.0..1.0).contains(&t) {
                return Err(HomError::InvalidParameter(
                    "truncation schedule must be strictly increasing in [0, 1)",
                ));
            }
            prev = t;
        }
        Ok(TruncationSchedule::Explicit(values))
    }

    /// `t_n` for `n >= 1`.
    pub fn t(&self, n: u32) -> f64 {
        assert!(n >= 1, "truncation indices start at 1");
        match self {
            TruncationSchedule::Dyadic => math::one_minus_pow2_neg(n),
            TruncationSchedule::Explicit(v) => {
                let len = v.len() as u32;
                if n <= len {
                    v[(n - 1) as usize]
                } else {
                    1.0 - (1.0 - v[v.len() - 1]) * math::powi(0.5, n - len)
                }
            }
        }
    }
}

/// Finite truncation `W_n`: equal to `W` on `t_n closure(C)` and to
/// `n (1 + dist(xi, closure(C)))` outside, with the cached linear-growth
/// constant `alpha_n`.
#[derive(Clone, Debug)]
pub struct TruncatedIntegrand<'a> {
    base: &'a Integrand,
    n: u32,
    t_n: f64,
    alpha_n: f64,
}

impl<'a> TruncatedIntegrand<'a> {
    pub fn new(base: &'a Integrand, schedule: &TruncationSchedule, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(HomError::InvalidParameter("truncation index must be >= 1"));
        }
        let t_n = schedule.t(n);
        let sup = base.coefficient.max() * base.kernel.sup_on_scaled(&base.constraint, t_n);
        let alpha_n = sup.max(n as f64 * (1.0 + base.constraint.diameter()));
        Ok(TruncatedIntegrand {
            base,
            n,
            t_n,
            alpha_n,
        })
    }

    #[inline]
    pub fn index(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn threshold(&self) -> f64 {
        self.t_n
    }

    /// Linear-growth constant with `W_n(x, xi) <= alpha_n (1 + |xi|)`.
    #[inline]
    pub fn growth_constant(&self) -> f64 {
        self.alpha_n
    }

    #[inline]
    pub fn base(&self) -> &Integrand {
        self.base
    }

    /// Finite everywhere.
    #[inline]
    pub fn eval(&self, x: &[f64], xi: &Matrix) -> f64 {
        let c = &self.base.constraint;
        if c.gauge_unchecked(xi) <= self.t_n {
            self.base.eval(x, xi)
        } else {
            self.n as f64 * (1.0 + c.dist_estimate_unchecked(xi))
        }
    }

    pub fn grad_xi(&self, x: &[f64], xi: &Matrix) -> Matrix {
        let c = &self.base.constraint;
        if c.gauge_unchecked(xi) <= self.t_n {
            self.base.grad_xi(x, xi)
        } else {
            match c.project_to_closure(xi) {
                Ok((p, dist)) if dist > 0.0 => (*xi - p).scale(self.n as f64 / dist),
                _ => Matrix::zeros(xi.rows(), xi.cols()),
            }
        }
    }
}

/// Sampling plan for the hypothesis report.
#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub directions: usize,
    pub radial_levels: usize,
    pub eta_ladder: Vec<f64>,
    pub t_ladder: Vec<f64>,
    pub shell_count: u32,
    pub shell_samples: usize,
    pub h1_tolerance: f64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            directions: 48,
            radial_levels: 12,
            eta_ladder: (1..=10).map(|k| math::powi(0.5, k)).collect(),
            t_ladder: alloc::vec![0.1, 0.25, 0.5, 0.75, 0.9, 0.99],
            shell_count: 8,
            shell_samples: 24,
            h1_tolerance: 1e-2,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModulusRow {
    /// Radial shrink budget `1 - t <= eta`.
    pub eta: f64,
    /// Sampled `sup W(x, t xi) - W(x, xi)`.
    pub sup_increase: f64,
}

#[derive(Clone, Debug)]
pub struct LocalBoundRow {
    pub t: f64,
    pub sampled_sup: f64,
    /// Analytic upper bound from the kernel structure.
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct ShellRow {
    pub n: u32,
    pub t_n: f64,
    /// Sampled infimum over the shell (an upper estimate of the true inf).
    pub inf_sampled: f64,
    /// Certified analytic lower bound (0 when unavailable).
    pub lower_bound: f64,
    /// `inf_sampled >= n`.
    pub pass: bool,
}

/// Sample-based certification of the radial upper-semicontinuity, local
/// boundedness and boundary-singularity hypotheses.
#[derive(Clone, Debug)]
pub struct HypothesisReport {
    pub modulus: Vec<ModulusRow>,
    pub local_bounds: Vec<LocalBoundRow>,
    pub shells: Vec<ShellRow>,
    pub h1_pass: bool,
    pub h2_pass: bool,
    pub h3_pass: bool,
    /// Number of (x, xi) samples behind each table row.
    pub samples_per_row: usize,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1_pass && self.h2_pass && self.h3_pass
    }
}

/// Builds the hypothesis report for `W` against the given truncation
/// schedule. Sample resolutions are recorded so failures stay interpretable.
pub fn assumption_report(
    w: &Integrand,
    schedule: &TruncationSchedule,
    cfg: &SampleConfig,
) -> Result<HypothesisReport> {
    if cfg.directions == 0 || cfg.radial_levels == 0 || cfg.eta_ladder.is_empty() {
        return Err(HomError::EmptySamples);
    }
    let c = w.constraint();
    let xs = w.coefficient().cell_centers();
    let dirs = boundary_directions(c, cfg.directions, cfg.seed);

    // H1: sampled modulus along radial shrinks.
    let mut modulus = Vec::new();
    for &eta in &cfg.eta_ladder {
        let mut sup = 0.0f64;
        for u in &dirs {
            for lv in 1..=cfg.radial_levels {
                // Interior points at gauge up to 1 - 2^-radial_levels.
                let g = 1.0 - math::powi(0.5, lv as u32);
                let xi = u.scale(g);
                for frac in [1.0, 0.5, 0.25] {
                    let t = 1.0 - eta * frac;
                    if t < 0.0 {
                        continue;
                    }
                    let txi = xi.scale(t);
                    for x in &xs {
                        let base = w.eval(x, &xi);
                        if !base.is_finite() {
                            continue;
                        }
                        let shrunk = w.eval(x, &txi);
                        sup = sup.max(shrunk - base);
                    }
                }
            }
        }
        modulus.push(ModulusRow {
            eta,
            sup_increase: sup,
        });
    }
    let h1_pass = modulus
        .last()
        .map(|row| row.sup_increase <= cfg.h1_tolerance)
        .unwrap_or(false);

    // H2: sampled sup over t closure(C) for a t-ladder.
    let mut local_bounds = Vec::new();
    let mut h2_pass = true;
    for &t in &cfg.t_ladder {
        let mut sup = 0.0f64;
        for u in &dirs {
            for lv in 0..=cfg.radial_levels {
                let g = t * lv as f64 / cfg.radial_levels as f64;
                let xi = u.scale(g);
                for x in &xs {
                    sup = sup.max(w.eval(x, &xi));
                }
            }
        }
        let bound = w.coefficient().max() * w.kernel().sup_on_scaled(c, t);
        h2_pass &= sup.is_finite() && bound.is_finite();
        local_bounds.push(LocalBoundRow {
            t,
            sampled_sup: sup,
            bound,
        });
    }

    // H3: shell infima against the schedule.
    let mut shells = Vec::new();
    let mut h3_pass = true;
    for n in 1..=cfg.shell_count {
        let t_n = schedule.t(n);
        let mut inf = f64::INFINITY;
        for u in &dirs {
            for k in 0..cfg.shell_samples {
                // Gauges in (t_n, 1], biased toward the inner edge where the
                // shell infimum of a singular density sits.
                let frac = math::powi(0.5, k as u32 + 1);
                let g = 1.0 - (1.0 - t_n) * (1.0 - frac);
                let xi = u.scale(g);
                for x in &xs {
                    inf = inf.min(w.eval(x, &xi));
                }
            }
        }
        let lower = w.coefficient().min() * w.kernel().shell_lower_bound(c, t_n);
        let pass = inf >= n as f64;
        h3_pass &= pass;
        shells.push(ShellRow {
            n,
            t_n,
            inf_sampled: inf,
            lower_bound: lower,
            pass,
        });
    }

    Ok(HypothesisReport {
        modulus,
        local_bounds,
        shells,
        h1_pass,
        h2_pass,
        h3_pass,
        samples_per_row: dirs.len() * cfg.radial_levels * xs.len(),
    })
}

/// Re-indexes a schedule by thinning: the `n`-th kept rung is the first rung
/// of the base schedule whose sampled shell infimum reaches `n`. Returns an
/// explicit schedule of length `count`, or the rows that prevented it.
pub fn thin_schedule(
    w: &Integrand,
    base: &TruncationSchedule,
    count: u32,
    cfg: &SampleConfig,
) -> Result<TruncationSchedule> {
    let c = w.constraint();
    let dirs = boundary_directions(c, cfg.directions, cfg.seed);
    let xs = w.coefficient().cell_centers();
    let mut kept = Vec::new();
    let mut n = 1u32;
    for k in 1..=64u32 {
        if n > count {
            break;
        }
        let t_k = base.t(k);
        let mut inf = f64::INFINITY;
        for u in &dirs {
            for s in 0..cfg.shell_samples {
                let frac = math::powi(0.5, s as u32 + 1);
                let g = 1.0 - (1.0 - t_k) * (1.0 - frac);
                let xi = u.scale(g);
                for x in &xs {
                    inf = inf.min(w.eval(x, &xi));
                }
            }
        }
        if inf >= n as f64 {
            kept.push(t_k);
            n += 1;
        }
    }
    if kept.len() < count as usize {
        return Err(HomError::InvalidParameter(
            "density is not singular enough to certify the requested schedule length",
        ));
    }
    TruncationSchedule::explicit(kept)
}

/// Boundary directions (gauge exactly 1): seeded pseudo-random plus signed
/// axes for coverage of the box/polytope faces.
pub fn boundary_directions(c: &ConstraintSet, count: usize, seed: u64) -> Vec<Matrix> {
    let (m, d) = c.shape();
    let mut out = Vec::new();
    for k in 0..m * d {
        for sgn in [1.0, -1.0] {
            let mut u = Matrix::zeros(m, d);
            u.set(k / d, k % d, sgn);
            if let Ok(b) = c.to_boundary(&u) {
                out.push(b);
            }
        }
    }
    let mut rng = Rng::seed_from(seed ^ 0x6469_7273);
    while out.len() < count {
        let mut u = Matrix::zeros(m, d);
        for k in 0..m * d {
            u.set(k / d, k % d, rng.symmetric());
        }
        if u.norm() < 1e-9 {
            continue;
        }
        if let Ok(b) = c.to_boundary(&u) {
            out.push(b);
        }
    }
    out.truncate(count.max(2 * m * d));
    out
}
