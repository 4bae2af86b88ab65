//! Envelopes and radial boundary behavior of matrix densities.
//!
//! The piecewise-affine envelope is approached from above only: discrete
//! zero-boundary fields on the unit cell and iterated rank-one laminates are
//! both admissible competitors, so every reported value is a certified upper
//! bound. Radial ladders classify boundary directions into finite limits,
//! blow-ups past a threshold, or an explicit `Undecided` outcome that is
//! never coerced to a number.

use crate::convex::ConstraintSet;
use crate::error::{HomError, Result};
use crate::math;
use crate::matrix::Matrix;
use crate::mesh::{Mesh, TestField};
use crate::solver::{self, ElementObjective, FieldProblem, SolverConfig};
use alloc::vec;
use alloc::vec::Vec;

/// Black-box density of a matrix argument; the gradient is optional and is
/// replaced by central differences when absent.
pub trait PointDensity {
    fn eval(&self, xi: &Matrix) -> f64;
    fn grad(&self, xi: &Matrix) -> Option<Matrix> {
        let _ = xi;
        None
    }
}

/// Kernel-backed density with its analytic gradient.
pub struct KernelDensity<'a> {
    pub kernel: &'a crate::integrand::DensityKernel,
    pub constraint: &'a ConstraintSet,
}

impl PointDensity for KernelDensity<'_> {
    fn eval(&self, xi: &Matrix) -> f64 {
        self.kernel.eval(self.constraint, xi)
    }
    fn grad(&self, xi: &Matrix) -> Option<Matrix> {
        Some(self.kernel.grad(self.constraint, xi))
    }
}

/// Closure-backed density (always numeric gradients).
pub struct FnDensity<F: Fn(&Matrix) -> f64>(pub F);

impl<F: Fn(&Matrix) -> f64> PointDensity for FnDensity<F> {
    fn eval(&self, xi: &Matrix) -> f64 {
        (self.0)(xi)
    }
}

fn numeric_grad(f: &dyn PointDensity, g: &Matrix) -> Matrix {
    let step = 1e-6 * (1.0 + g.norm());
    let mut out = Matrix::zeros(g.rows(), g.cols());
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            let mut hi = *g;
            hi.set(i, j, g.get(i, j) + step);
            let mut lo = *g;
            lo.set(i, j, g.get(i, j) - step);
            let (fh, fl) = (f.eval(&hi), f.eval(&lo));
            if fh.is_finite() && fl.is_finite() {
                out.set(i, j, (fh - fl) / (2.0 * step));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnvelopeMethod {
    DiscreteCell { resolution: usize },
    Lamination { depth: usize },
}

/// Optimal top-level rank-one split found by `laminate_bound`.
#[derive(Clone, Debug)]
pub struct LaminateSplit {
    pub lambda: f64,
    pub magnitude: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EnvelopeResult {
    pub value: f64,
    pub method: EnvelopeMethod,
    /// `f(xi) - value`: how much the competitors improved on the direct
    /// evaluation (nonnegative up to solver slack when `f(xi)` is finite).
    pub gap_to_direct: f64,
    pub witness_field: Option<TestField>,
    pub witness_split: Option<LaminateSplit>,
}

struct EnvelopeObjective<'a> {
    f: &'a dyn PointDensity,
}

impl ElementObjective for EnvelopeObjective<'_> {
    fn eval(&self, _e: usize, g: &Matrix) -> f64 {
        self.f.eval(g)
    }
    fn grad(&self, _e: usize, g: &Matrix) -> Matrix {
        match self.f.grad(g) {
            Some(m) => m,
            None => numeric_grad(self.f, g),
        }
    }
}

/// One-periodic sawtooth with zero endpoints realizing the two-slope profile
/// of a rank-one split.
fn sawtooth(s: f64, lambda: f64, magnitude: f64) -> f64 {
    let s = math::fract_unit(s);
    if s <= lambda {
        (1.0 - lambda) * magnitude * s
    } else {
        lambda * magnitude * (1.0 - s)
    }
}

/// Nodal seed field oscillating along `b` with profile amplitude from the
/// split; boundary nodes are zeroed and the solver's projection restores
/// feasibility.
fn sawtooth_seed(mesh: &Mesh, m: usize, split: &LaminateSplit) -> TestField {
    let mut field = TestField::zeros(mesh, m);
    for node in 0..mesh.node_count() {
        if mesh.is_boundary(node) {
            continue;
        }
        let xy = mesh.node_coord(node);
        let mut s = 0.0;
        for (k, bk) in split.b.iter().enumerate() {
            s += bk * xy[k];
        }
        let chi = sawtooth(s, split.lambda, split.magnitude);
        for comp in 0..m {
            field.set(node, comp, split.a[comp] * chi);
        }
    }
    field
}

/// Discrete piecewise-affine envelope value at `xi`: minimization over
/// zero-boundary fields on the unit cell at the given resolution. Upper bound
/// for the true envelope, nonincreasing under refinement (nested spaces).
pub fn zf_discrete(
    f: &dyn PointDensity,
    constraint: &ConstraintSet,
    xi: &Matrix,
    resolution: usize,
    cfg: &SolverConfig,
    seeds: &[LaminateSplit],
    warm_fields: &[TestField],
) -> Result<EnvelopeResult> {
    let (m, d) = constraint.shape();
    constraint.gauge(xi).and_then(|g| {
        if g >= 1.0 {
            Err(HomError::InfeasibleMacroGradient { gauge: g })
        } else {
            Ok(())
        }
    })?;
    let mesh = Mesh::cell(d, 1, resolution)?;
    let objective = EnvelopeObjective { f };
    let problem = FieldProblem {
        mesh: &mesh,
        m,
        objective: &objective,
        offset: Some(*xi),
        constraint: Some(constraint),
        lip_cap: f64::INFINITY,
        free_nodes: solver::zero_boundary_mask(&mesh),
        scale: 1.0,
    };
    let mut warm: Vec<TestField> = warm_fields.to_vec();
    for split in seeds {
        warm.push(sawtooth_seed(&mesh, m, split));
    }
    let out = solver::minimize(&problem, cfg, &warm)?;
    let direct = f.eval(xi);
    Ok(EnvelopeResult {
        value: out.value,
        method: EnvelopeMethod::DiscreteCell { resolution },
        gap_to_direct: direct - out.value,
        witness_field: Some(out.field),
        witness_split: None,
    })
}

/// Energy of an explicit zero-boundary competitor field for `f` at `xi`.
pub fn zf_energy(
    f: &dyn PointDensity,
    constraint: &ConstraintSet,
    xi: &Matrix,
    mesh: &Mesh,
    field: &TestField,
) -> f64 {
    let (m, _) = constraint.shape();
    let objective = EnvelopeObjective { f };
    let problem = FieldProblem {
        mesh,
        m,
        objective: &objective,
        offset: Some(*xi),
        constraint: Some(constraint),
        lip_cap: f64::INFINITY,
        free_nodes: solver::zero_boundary_mask(mesh),
        scale: 1.0,
    };
    problem.energy(field)
}

/// Grid of rank-one splits tried by `laminate_bound`.
#[derive(Clone, Debug)]
pub struct LaminateGrid {
    pub lambdas: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// Unit vector pairs `(a, b)` spanning the rank-one directions.
    pub directions: Vec<(Vec<f64>, Vec<f64>)>,
}

impl LaminateGrid {
    /// Signed axes plus two-axis diagonals, lambda steps of `1/lambda_steps`,
    /// magnitudes up to `rho_max`.
    pub fn default_for(m: usize, d: usize, rho_max: f64, lambda_steps: usize, rho_steps: usize) -> Self {
        let mut dirs = Vec::new();
        let mut left = Vec::new();
        for i in 0..m {
            let mut a = vec![0.0; m];
            a[i] = 1.0;
            left.push(a);
        }
        if m == 2 {
            let s = 1.0 / math::sqrt(2.0);
            left.push(vec![s, s]);
            left.push(vec![s, -s]);
        }
        let mut right = Vec::new();
        for j in 0..d {
            let mut b = vec![0.0; d];
            b[j] = 1.0;
            right.push(b);
        }
        if d == 2 {
            let s = 1.0 / math::sqrt(2.0);
            right.push(vec![s, s]);
            right.push(vec![s, -s]);
        }
        for a in &left {
            for b in &right {
                dirs.push((a.clone(), b.clone()));
            }
        }
        let lambdas = (1..lambda_steps)
            .map(|k| k as f64 / lambda_steps as f64)
            .collect();
        let magnitudes = (1..=rho_steps)
            .map(|k| rho_max * k as f64 / rho_steps as f64)
            .collect();
        LaminateGrid {
            lambdas,
            magnitudes,
            directions: dirs,
        }
    }
}

/// Iterated rank-one lamination upper bound; depth 0 is the direct value and
/// the bound is nonincreasing in depth.
pub fn laminate_bound(
    f: &dyn PointDensity,
    xi: &Matrix,
    depth: usize,
    grid: &LaminateGrid,
) -> Result<EnvelopeResult> {
    if depth > 3 {
        return Err(HomError::InvalidParameter("lamination depth is capped at 3"));
    }
    let direct = f.eval(xi);
    let (value, split) = laminate_rec(f, xi, depth, grid);
    Ok(EnvelopeResult {
        value,
        method: EnvelopeMethod::Lamination { depth },
        gap_to_direct: direct - value,
        witness_field: None,
        witness_split: split,
    })
}

fn laminate_rec(
    f: &dyn PointDensity,
    xi: &Matrix,
    depth: usize,
    grid: &LaminateGrid,
) -> (f64, Option<LaminateSplit>) {
    if depth == 0 {
        return (f.eval(xi), None);
    }
    let mut best = laminate_rec(f, xi, depth - 1, grid).0;
    let mut best_split = None;
    for (a, b) in &grid.directions {
        let dir = Matrix::rank_one(a, b);
        for &rho in &grid.magnitudes {
            for &lambda in &grid.lambdas {
                let plus = *xi + dir.scale((1.0 - lambda) * rho);
                let minus = *xi - dir.scale(lambda * rho);
                let vp = laminate_rec(f, &plus, depth - 1, grid).0;
                if !vp.is_finite() {
                    continue;
                }
                let vm = laminate_rec(f, &minus, depth - 1, grid).0;
                if !vm.is_finite() {
                    continue;
                }
                let v = lambda * vp + (1.0 - lambda) * vm;
                if v < best {
                    best = v;
                    best_split = Some(LaminateSplit {
                        lambda,
                        magnitude: rho,
                        a: a.clone(),
                        b: b.clone(),
                    });
                }
            }
        }
    }
    (best, best_split)
}

/// Ladder configuration for radial probes.
#[derive(Clone, Debug)]
pub struct RadialLadderCfg {
    /// Rungs `t_k = 1 - 2^{-k}`, `k = 1..=depth`.
    pub depth: u32,
    pub blowup_threshold: f64,
    pub oscillation_tol: f64,
    pub tail: usize,
}

impl Default for RadialLadderCfg {
    fn default() -> Self {
        RadialLadderCfg {
            depth: 20,
            blowup_threshold: 1e6,
            oscillation_tol: 1e-4,
            tail: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RadialVerdict {
    Finite(f64),
    Infinite,
    Undecided { oscillation: f64 },
}

#[derive(Clone, Debug)]
pub struct RadialProbe {
    pub direction: Matrix,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub verdict: RadialVerdict,
    /// Cauchy certificate: max successive oscillation over the ladder tail.
    pub tail_oscillation: f64,
}

/// Classifies ladder values: monotone excess of the threshold is a blow-up, a
/// Cauchy tail is a finite limit, anything else stays undecided.
pub fn classify_ladder(values: &[f64], cfg: &RadialLadderCfg) -> (RadialVerdict, f64) {
    if values.len() < 2 {
        return (
            RadialVerdict::Undecided {
                oscillation: f64::INFINITY,
            },
            f64::INFINITY,
        );
    }
    let tail_len = cfg.tail.max(2).min(values.len());
    let tail = &values[values.len() - tail_len..];
    if tail.iter().any(|v| !v.is_finite()) {
        return (RadialVerdict::Infinite, f64::INFINITY);
    }
    let mut osc: f64 = 0.0;
    let mut increasing = true;
    for k in 1..tail.len() {
        osc = osc.max(math::abs(tail[k] - tail[k - 1]));
        increasing &= tail[k] >= tail[k - 1];
    }
    let last = *tail.last().unwrap();
    if last >= cfg.blowup_threshold && increasing {
        (RadialVerdict::Infinite, osc)
    } else if osc <= cfg.oscillation_tol {
        (RadialVerdict::Finite(last), osc)
    } else {
        (RadialVerdict::Undecided { oscillation: osc }, osc)
    }
}

/// Radial limit of `f` along a boundary direction (gauge `1 +- 1e-9`).
pub fn radial_limit(
    f: &dyn PointDensity,
    constraint: &ConstraintSet,
    direction: &Matrix,
    cfg: &RadialLadderCfg,
) -> Result<RadialProbe> {
    let g = constraint.gauge(direction)?;
    if math::abs(g - 1.0) > 1e-9 {
        return Err(HomError::InvalidParameter(
            "radial probes need a boundary direction with gauge 1",
        ));
    }
    let mut ts = Vec::with_capacity(cfg.depth as usize);
    let mut values = Vec::with_capacity(cfg.depth as usize);
    for k in 1..=cfg.depth {
        let t = math::one_minus_pow2_neg(k);
        ts.push(t);
        values.push(f.eval(&direction.scale(t)));
    }
    let (verdict, osc) = classify_ladder(&values, cfg);
    Ok(RadialProbe {
        direction: *direction,
        ts,
        values,
        verdict,
        tail_oscillation: osc,
    })
}

/// Three-branch extension of an interior evaluator to all of matrix space:
/// interior values, radial limits on the boundary, `+inf` outside. An
/// undecided radial probe propagates as an error.
pub fn extend_hat(
    f: &dyn PointDensity,
    constraint: &ConstraintSet,
    xi: &Matrix,
    cfg: &RadialLadderCfg,
) -> Result<f64> {
    let g = constraint.gauge(xi)?;
    if g < 1.0 - 1e-9 {
        Ok(f.eval(xi))
    } else if g <= 1.0 + 1e-9 {
        let dir = xi.scale(1.0 / g);
        let probe = radial_limit(f, constraint, &dir, cfg)?;
        match probe.verdict {
            RadialVerdict::Finite(v) => Ok(v),
            RadialVerdict::Infinite => Ok(f64::INFINITY),
            RadialVerdict::Undecided { oscillation } => {
                Err(HomError::UndecidedRadialLimit { oscillation })
            }
        }
    } else {
        Ok(f64::INFINITY)
    }
}

/// Report of the monotone-supremum consistency checks between a truncated
/// cell-value ladder, the untruncated value, and (optionally) an envelope
/// evaluation at the plateau.
#[derive(Clone, Debug)]
pub struct MonotoneSupReport {
    pub nondecreasing: bool,
    pub max_decrease: f64,
    pub bounded_by_hw: bool,
    pub max_excess: f64,
    pub plateau: f64,
    pub plateau_gap: Option<f64>,
    pub plateau_ok: Option<bool>,
    pub pass: bool,
}

pub fn monotone_sup_check(
    sequence: &[f64],
    hw_value: f64,
    monotone_tol: f64,
    hw_tol: f64,
    plateau_reference: Option<(f64, f64)>,
) -> MonotoneSupReport {
    let mut max_decrease = 0.0f64;
    for k in 1..sequence.len() {
        max_decrease = max_decrease.max(sequence[k - 1] - sequence[k]);
    }
    let nondecreasing = max_decrease <= monotone_tol;
    let mut max_excess = 0.0f64;
    for v in sequence {
        max_excess = max_excess.max(v - hw_value);
    }
    let bounded_by_hw = max_excess <= hw_tol;
    let plateau = sequence.last().copied().unwrap_or(f64::NAN);
    let (plateau_gap, plateau_ok) = match plateau_reference {
        Some((reference, tol)) => {
            let gap = math::abs(plateau - reference);
            (Some(gap), Some(gap <= tol))
        }
        None => (None, None),
    };
    MonotoneSupReport {
        nondecreasing,
        max_decrease,
        bounded_by_hw,
        max_excess,
        plateau,
        plateau_gap,
        plateau_ok,
        pass: nondecreasing && bounded_by_hw && plateau_ok.unwrap_or(true),
    }
}
