//! Discrete multi-cell minimization.
//!
//! `cell_value` minimizes the mean of `W(x, xi + grad(phi))` over
//! zero-boundary piecewise-affine fields on the `n`-fold cell; the reported
//! value is an upper bound for the continuum infimum (the zero field is
//! always a candidate). `hw` takes the minimum over cell multiplicities with
//! tiling-injected warm starts, which also makes the subadditivity law
//! `value(2n) <= value(n)` hold by construction. A discrete conjugate-duality
//! oracle for convex scalar densities validates the whole pipeline
//! independently.

use crate::convex::ConstraintSet;
use crate::error::{HomError, Result};
use crate::integrand::{DensityKernel, Integrand, TruncatedIntegrand, TruncationSchedule};
use crate::matrix::Matrix;
use crate::mesh::{tile_field, Mesh, TestField};
use crate::solver::{self, ElementObjective, FieldProblem, SolverConfig};
use alloc::vec;
use alloc::vec::Vec;

/// Result of one discrete cell solve.
#[derive(Clone, Debug)]
pub struct CellSolveResult {
    /// Objective per unit volume of the `n`-fold cell.
    pub value: f64,
    pub field: TestField,
    pub mesh: Mesh,
    pub n: usize,
    pub r: f64,
    pub iterations: usize,
    pub restarts_run: usize,
    pub best_restart: usize,
    pub feasible: bool,
    pub fallback_zero: bool,
    /// Margin left below `tau_max` at the reported field.
    pub feasibility_slack: f64,
}

/// Per-element density `A_e * f(g)` with the coefficient frozen at element
/// barycenters (exact for grid-aligned piecewise-constant coefficients).
pub(crate) struct ProductObjective<'a> {
    pub kernel: &'a DensityKernel,
    pub constraint: &'a ConstraintSet,
    pub coeff: Vec<f64>,
}

impl ElementObjective for ProductObjective<'_> {
    #[inline]
    fn eval(&self, e: usize, g: &Matrix) -> f64 {
        self.coeff[e] * self.kernel.eval(self.constraint, g)
    }
    #[inline]
    fn grad(&self, e: usize, g: &Matrix) -> Matrix {
        self.kernel.grad(self.constraint, g).scale(self.coeff[e])
    }
}

/// Per-element density of a truncated integrand; the outer branch
/// `n (1 + dist)` does not carry the coefficient.
pub(crate) struct TruncatedObjective<'a, 'b> {
    pub wn: &'a TruncatedIntegrand<'b>,
    pub coeff: Vec<f64>,
}

impl ElementObjective for TruncatedObjective<'_, '_> {
    fn eval(&self, e: usize, g: &Matrix) -> f64 {
        let c = self.wn.base().constraint();
        if c.gauge_unchecked(g) <= self.wn.threshold() {
            self.coeff[e] * self.wn.base().kernel().eval(c, g)
        } else {
            self.wn.index() as f64 * (1.0 + c.dist_estimate_unchecked(g))
        }
    }
    fn grad(&self, e: usize, g: &Matrix) -> Matrix {
        let c = self.wn.base().constraint();
        if c.gauge_unchecked(g) <= self.wn.threshold() {
            self.wn.base().kernel().grad(c, g).scale(self.coeff[e])
        } else {
            match c.project_to_closure(g) {
                Ok((p, dist)) if dist > 0.0 => (*g - p).scale(self.wn.index() as f64 / dist),
                _ => Matrix::zeros(g.rows(), g.cols()),
            }
        }
    }
}

pub(crate) fn coefficient_at_barycenters(w: &Integrand, mesh: &Mesh) -> Vec<f64> {
    let d = w.coefficient().dimension();
    mesh.elements()
        .iter()
        .map(|e| w.coefficient().eval(&e.barycenter[..d]))
        .collect()
}

fn check_macro_gradient(w: &Integrand, xi: &Matrix) -> Result<()> {
    let g = w.constraint().gauge(xi)?;
    if g >= 1.0 {
        return Err(HomError::InfeasibleMacroGradient { gauge: g });
    }
    Ok(())
}

/// Discrete approximation of the `n`-cell value with gradient cap `r`
/// (`INFINITY` for the uncapped problem); `resolution` subdivisions per unit
/// cell; minimum over multistart plus the given warm-start fields.
pub fn cell_value(
    w: &Integrand,
    xi: &Matrix,
    n: usize,
    r: f64,
    resolution: usize,
    cfg: &SolverConfig,
    warm_starts: &[TestField],
) -> Result<CellSolveResult> {
    check_macro_gradient(w, xi)?;
    if n == 0 {
        return Err(HomError::InvalidParameter("cell multiplicity must be >= 1"));
    }
    if !(r > 0.0) {
        return Err(HomError::InvalidParameter("gradient cap must be positive"));
    }
    let (m, d) = w.shape();
    let mesh = Mesh::cell(d, n, resolution)?;
    let objective = ProductObjective {
        kernel: w.kernel(),
        constraint: w.constraint(),
        coeff: coefficient_at_barycenters(w, &mesh),
    };
    let problem = FieldProblem {
        mesh: &mesh,
        m,
        objective: &objective,
        offset: Some(*xi),
        constraint: Some(w.constraint()),
        lip_cap: r,
        free_nodes: solver::zero_boundary_mask(&mesh),
        scale: 1.0 / crate::math::powi(n as f64, d as u32),
    };
    let out = solver::minimize(&problem, cfg, warm_starts)?;
    Ok(CellSolveResult {
        value: out.value,
        field: out.field,
        mesh,
        n,
        r,
        iterations: out.iterations,
        restarts_run: out.restarts_run,
        best_restart: out.best_restart,
        feasible: out.feasible,
        fallback_zero: out.fallback_zero,
        feasibility_slack: cfg.tau_max - out.max_gauge,
    })
}

/// Objective of an explicit field under the cell problem for `w` at `xi`.
pub fn cell_energy(w: &Integrand, xi: &Matrix, mesh: &Mesh, field: &TestField) -> f64 {
    let (m, d) = w.shape();
    let objective = ProductObjective {
        kernel: w.kernel(),
        constraint: w.constraint(),
        coeff: coefficient_at_barycenters(w, mesh),
    };
    let n = mesh.side();
    let problem = FieldProblem {
        mesh,
        m,
        objective: &objective,
        offset: Some(*xi),
        constraint: Some(w.constraint()),
        lip_cap: f64::INFINITY,
        free_nodes: solver::zero_boundary_mask(mesh),
        scale: 1.0 / crate::math::pow(n, d as f64),
    };
    problem.energy(field)
}

/// Same for a truncated integrand.
pub fn cell_energy_truncated(
    wn: &TruncatedIntegrand<'_>,
    xi: &Matrix,
    mesh: &Mesh,
    field: &TestField,
) -> f64 {
    let (m, d) = wn.base().shape();
    let objective = TruncatedObjective {
        wn,
        coeff: coefficient_at_barycenters(wn.base(), mesh),
    };
    let n = mesh.side();
    let problem = FieldProblem {
        mesh,
        m,
        objective: &objective,
        offset: Some(*xi),
        constraint: Some(wn.base().constraint()),
        lip_cap: f64::INFINITY,
        free_nodes: solver::zero_boundary_mask(mesh),
        scale: 1.0 / crate::math::pow(n, d as f64),
    };
    problem.energy(field)
}

/// Multi-cell homogenized value: minimum of `cell_value` over multiplicities
/// `1..=n_max`, each warm-started by periodically tiling the argmins of its
/// proper divisors.
#[derive(Clone, Debug)]
pub struct HwResult {
    pub value: f64,
    pub best_n: usize,
    pub per_n: Vec<CellSolveResult>,
}

pub fn hw(
    w: &Integrand,
    xi: &Matrix,
    n_max: usize,
    resolution: usize,
    cfg: &SolverConfig,
) -> Result<HwResult> {
    if n_max == 0 {
        return Err(HomError::InvalidParameter("n_max must be >= 1"));
    }
    let (_, d) = w.shape();
    let mut per_n: Vec<CellSolveResult> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mesh = Mesh::cell(d, n, resolution)?;
        let mut warm = Vec::new();
        for dv in 1..n {
            if n % dv == 0 {
                let prev = &per_n[dv - 1];
                if let Ok(t) = tile_field(&prev.mesh, &prev.field, &mesh) {
                    warm.push(t);
                }
            }
        }
        // The full multistart runs at the base multiplicity; larger cells
        // descend from the tiled divisor argmins (whose energies already
        // dominate the zero field) plus one fresh perturbation.
        let mut run_cfg = cfg.with_seed(cfg.seed ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        if n > 1 && !warm.is_empty() {
            run_cfg.zero_start = false;
            run_cfg.restarts = run_cfg.restarts.min(2);
        }
        per_n.push(cell_value(w, xi, n, f64::INFINITY, resolution, &run_cfg, &warm)?);
    }
    let mut best_n = 1;
    let mut value = per_n[0].value;
    for r in &per_n {
        if r.value < value {
            value = r.value;
            best_n = r.n;
        }
    }
    Ok(HwResult {
        value,
        best_n,
        per_n,
    })
}

/// Truncated-density cell values along a ladder of truncation indices, with
/// a shared candidate pool so the reported list is exactly nondecreasing and
/// never exceeds the untruncated value on the same candidates.
pub fn hwn_sequence(
    w: &Integrand,
    xi: &Matrix,
    schedule: &TruncationSchedule,
    trunc_indices: &[u32],
    n_max: usize,
    resolution: usize,
    cfg: &SolverConfig,
    hw_result: Option<&HwResult>,
) -> Result<Vec<f64>> {
    check_macro_gradient(w, xi)?;
    if trunc_indices.is_empty() {
        return Err(HomError::EmptySamples);
    }
    let (m, d) = w.shape();
    let mut meshes = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        meshes.push(Mesh::cell(d, n, resolution)?);
    }
    // Candidate fields per multiplicity, seeded with the untruncated argmins.
    let mut pools: Vec<Vec<TestField>> = vec![Vec::new(); n_max];
    if let Some(h) = hw_result {
        for r in &h.per_n {
            if r.n <= n_max {
                pools[r.n - 1].push(r.field.clone());
            }
        }
    }

    for (ki, &k) in trunc_indices.iter().enumerate() {
        let wn = TruncatedIntegrand::new(w, schedule, k)?;
        for n in 1..=n_max {
            let mesh = &meshes[n - 1];
            let objective = TruncatedObjective {
                wn: &wn,
                coeff: coefficient_at_barycenters(w, mesh),
            };
            let problem = FieldProblem {
                mesh,
                m,
                objective: &objective,
                offset: Some(*xi),
                constraint: Some(w.constraint()),
                lip_cap: f64::INFINITY,
                free_nodes: solver::zero_boundary_mask(mesh),
                scale: 1.0 / crate::math::powi(n as f64, d as u32),
            };
            let warm: Vec<TestField> = pools[n - 1].iter().rev().take(3).cloned().collect();
            let run_cfg = cfg.with_seed(
                cfg.seed ^ ((ki as u64) << 32 | n as u64).wrapping_mul(0x2545_f491_4f6c_dd1d),
            );
            let out = solver::minimize(&problem, &run_cfg, &warm)?;
            pools[n - 1].push(out.field);
        }
    }

    // Repair pass: evaluate the common candidate pool under every truncation
    // index; the minimum over a fixed pool is monotone in the index because
    // the truncated densities are pointwise monotone.
    let mut values = Vec::with_capacity(trunc_indices.len());
    for &k in trunc_indices {
        let wn = TruncatedIntegrand::new(w, schedule, k)?;
        let mut best = f64::INFINITY;
        for n in 1..=n_max {
            for field in &pools[n - 1] {
                let v = cell_energy_truncated(&wn, xi, &meshes[n - 1], field);
                best = best.min(v);
            }
        }
        values.push(best);
    }
    Ok(values)
}

/// Discrete conjugate-duality value for convex scalar (`d = m = 1`)
/// densities: an oracle for `hw`, independent of the field solver.
#[derive(Clone, Debug)]
pub struct OracleResult {
    pub value: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub s_points: usize,
    pub xi_points: usize,
}

#[derive(Clone, Debug)]
pub struct OracleGrids {
    pub xi_points: usize,
    pub s_points: usize,
}

impl Default for OracleGrids {
    fn default() -> Self {
        OracleGrids {
            xi_points: 2001,
            s_points: 4001,
        }
    }
}

pub fn duality_1d_oracle(w: &Integrand, xi: &Matrix, grids: &OracleGrids) -> Result<OracleResult> {
    if w.shape() != (1, 1) {
        return Err(HomError::DimensionMismatch {
            expected: (1, 1),
            got: w.shape(),
        });
    }
    if !w.kernel().convex_on_domain_1d(w.constraint()) {
        return Err(HomError::NonConvexKernel);
    }
    check_macro_gradient(w, xi)?;
    let target = xi.get(0, 0);
    let radius = w.constraint().circumradius();
    let nv = grids.xi_points.max(3);
    let hv = 2.0 * radius / (nv - 1) as f64;

    // Kernel values on the gradient grid (+inf entries are skipped in the
    // conjugate suprema).
    let mut f_vals = Vec::with_capacity(nv);
    let mut max_slope: f64 = 1.0;
    let mut prev: Option<f64> = None;
    for j in 0..nv {
        let v = -radius + j as f64 * hv;
        let f = w.kernel().eval(w.constraint(), &Matrix::scalar(v));
        if let (Some(p), true) = (prev, f.is_finite()) {
            max_slope = max_slope.max(crate::math::abs(f - p) / hv);
        }
        prev = f.is_finite().then_some(f);
        f_vals.push(f);
    }
    // Dual grid covering the coefficient-scaled slope range of the density.
    let s_max = 2.0 * w.coefficient().max() * max_slope;
    let ns = grids.s_points.max(3);

    // The coefficient is piecewise constant on equal-measure cells, so the
    // cell average of the conjugate is an arithmetic mean over cell values.
    // Identical cell values share one conjugate evaluation.
    let mut cells: Vec<(f64, usize)> = Vec::new();
    'outer: for x in w.coefficient().cell_centers() {
        let a = w.coefficient().eval(&x);
        for c in cells.iter_mut() {
            if c.0 == a {
                c.1 += 1;
                continue 'outer;
            }
        }
        cells.push((a, 1));
    }
    let total_cells: usize = cells.iter().map(|c| c.1).sum();

    let dual = |s: f64| -> f64 {
        let mut avg_conj = 0.0;
        for (a, count) in &cells {
            let mut conj = f64::NEG_INFINITY;
            for (j, f) in f_vals.iter().enumerate() {
                if f.is_finite() {
                    let v = -radius + j as f64 * hv;
                    conj = conj.max(s * v - a * f);
                }
            }
            avg_conj += conj * *count as f64;
        }
        s * target - avg_conj / total_cells as f64
    };

    // The dual objective is concave in s, so the maximum lies within one
    // grid step of the grid argmax; refine the window around it. Barrier
    // kernels make the initial slope range huge, which the refinement
    // absorbs.
    let mut lo = -s_max;
    let mut hi = s_max;
    let mut value = f64::NEG_INFINITY;
    for _ in 0..3 {
        let hs = (hi - lo) / (ns - 1) as f64;
        let mut best_i = 0usize;
        for i in 0..ns {
            let v = dual(lo + i as f64 * hs);
            if v > value {
                value = v;
                best_i = i;
            }
        }
        let center = lo + best_i as f64 * hs;
        lo = center - 2.0 * hs;
        hi = center + 2.0 * hs;
    }
    Ok(OracleResult {
        value,
        s_min: -s_max,
        s_max,
        s_points: ns,
        xi_points: nv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::PeriodicCoefficient;

    fn laminate_integrand() -> Integrand {
        Integrand::new(
            PeriodicCoefficient::laminate(&[1.0, 2.0]).unwrap(),
            DensityKernel::Quadratic { weight: 1.0 },
            ConstraintSet::ball(1, 1, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn homogeneous_2d() -> Integrand {
        Integrand::new(
            PeriodicCoefficient::constant(2, 1.0).unwrap(),
            DensityKernel::Quadratic { weight: 1.0 },
            ConstraintSet::ball(2, 2, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn oracle_homogeneous_is_quadratic() {
        let w = Integrand::new(
            PeriodicCoefficient::constant(1, 1.0).unwrap(),
            DensityKernel::Quadratic { weight: 1.0 },
            ConstraintSet::ball(1, 1, 1.0).unwrap(),
        )
        .unwrap();
        let r = duality_1d_oracle(&w, &Matrix::scalar(0.5), &OracleGrids::default()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-4, "{}", r.value);
        let z = duality_1d_oracle(&w, &Matrix::scalar(0.0), &OracleGrids::default()).unwrap();
        assert!(z.value.abs() < 1e-6);
    }

    #[test]
    fn oracle_laminate_is_harmonic_mean() {
        let w = laminate_integrand();
        let r = duality_1d_oracle(&w, &Matrix::scalar(0.5), &OracleGrids::default()).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-4, "{}", r.value);
    }

    #[test]
    fn oracle_handles_barrier_kernels() {
        // The barrier slope blows up near the boundary; the dual refinement
        // must still resolve the maximizer for interior gradients.
        let w = Integrand::new(
            PeriodicCoefficient::laminate(&[1.0, 2.0]).unwrap(),
            DensityKernel::barrier(DensityKernel::Quadratic { weight: 1.0 }, 1.0, 1.0).unwrap(),
            ConstraintSet::ball(1, 1, 1.0).unwrap(),
        )
        .unwrap();
        let xi = Matrix::scalar(0.3);
        let oracle = duality_1d_oracle(&w, &xi, &OracleGrids::default()).unwrap();
        let cfg = SolverConfig {
            restarts: 2,
            ..SolverConfig::default()
        };
        let h = hw(&w, &xi, 2, 64, &cfg).unwrap();
        let gap = (h.value - oracle.value).abs() / oracle.value;
        assert!(gap < 0.02, "hw {} vs oracle {}", h.value, oracle.value);
    }

    #[test]
    fn oracle_refuses_double_well() {
        let w = Integrand::new(
            PeriodicCoefficient::constant(1, 1.0).unwrap(),
            DensityKernel::DoubleWell,
            ConstraintSet::ball(1, 1, 2.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            duality_1d_oracle(&w, &Matrix::scalar(0.0), &OracleGrids::default()),
            Err(HomError::NonConvexKernel)
        ));
    }

    #[test]
    fn cell_value_infeasible_gradient() {
        let w = laminate_integrand();
        let bad = Matrix::scalar(1.1);
        assert!(matches!(
            cell_value(&w, &bad, 1, f64::INFINITY, 16, &SolverConfig::default(), &[]),
            Err(HomError::InfeasibleMacroGradient { .. })
        ));
    }

    #[test]
    fn jensen_identity_2d() {
        let w = homogeneous_2d();
        let xi = Matrix::from_rows(&[&[0.2, 0.1], &[-0.1, 0.3]]);
        let cfg = SolverConfig {
            restarts: 3,
            ..SolverConfig::default()
        };
        for n in 1..=2 {
            let r = cell_value(&w, &xi, n, f64::INFINITY, 6, &cfg, &[]).unwrap();
            assert!(
                (r.value - xi.dot(&xi)).abs() < 1e-6,
                "n={n}: {} vs {}",
                r.value,
                xi.dot(&xi)
            );
        }
    }

    #[test]
    fn laminate_matches_oracle_and_tiling_subadditivity() {
        let w = laminate_integrand();
        let xi = Matrix::scalar(0.5);
        let cfg = SolverConfig {
            restarts: 3,
            ..SolverConfig::default()
        };
        let h = hw(&w, &xi, 2, 64, &cfg).unwrap();
        let oracle = duality_1d_oracle(&w, &xi, &OracleGrids::default()).unwrap();
        assert!(
            (h.value - oracle.value).abs() / oracle.value < 0.02,
            "hw {} oracle {}",
            h.value,
            oracle.value
        );
        // Tiling injection makes the n = 2 value no worse than n = 1.
        assert!(h.per_n[1].value <= h.per_n[0].value + 1e-9);
    }

    #[test]
    fn zero_field_upper_bound() {
        let w = laminate_integrand();
        let xi = Matrix::scalar(0.4);
        let r = cell_value(&w, &xi, 1, f64::INFINITY, 32, &SolverConfig::default(), &[]).unwrap();
        // Zero field value: mean of A times f(xi).
        let mean = w.coefficient().mean() * 0.16;
        assert!(r.value <= mean + 1e-12);
    }

    #[test]
    fn hwn_sequence_inactive_truncation_equals_hw() {
        // Regime where even the first truncation rung is inactive: the shell
        // floor n(1+dist) >= 1 exceeds every density value the argmin can
        // reach, so all terms coincide with the untruncated value.
        let w = Integrand::new(
            PeriodicCoefficient::laminate(&[1.0, 2.0]).unwrap(),
            DensityKernel::barrier(DensityKernel::Quadratic { weight: 1.0 }, 1.0, 1.0).unwrap(),
            ConstraintSet::ball(1, 1, 1.0).unwrap(),
        )
        .unwrap();
        let xi = Matrix::scalar(0.1);
        let cfg = SolverConfig {
            restarts: 2,
            ..SolverConfig::default()
        };
        let h = hw(&w, &xi, 2, 32, &cfg).unwrap();
        // The untruncated argmin stays inside t_1 closure(C).
        for r in &h.per_n {
            assert!(cfg.tau_max - r.feasibility_slack <= 0.5 + 1e-9);
        }
        let seq = hwn_sequence(
            &w,
            &xi,
            &TruncationSchedule::Dyadic,
            &[1, 2, 4],
            2,
            32,
            &cfg,
            Some(&h),
        )
        .unwrap();
        for v in &seq {
            assert!((v - h.value).abs() <= 1e-9, "{v} vs {}", h.value);
        }
    }

    #[test]
    fn hwn_sequence_increases_to_plateau_near_boundary() {
        // Closer to the boundary the early rungs are active (the cheap shell
        // undercuts the barrier), so the sequence strictly increases before
        // flattening at the untruncated value.
        let w = Integrand::new(
            PeriodicCoefficient::laminate(&[1.0, 2.0]).unwrap(),
            DensityKernel::barrier(DensityKernel::Quadratic { weight: 1.0 }, 1.0, 1.0).unwrap(),
            ConstraintSet::ball(1, 1, 1.0).unwrap(),
        )
        .unwrap();
        let xi = Matrix::scalar(0.3);
        let cfg = SolverConfig {
            restarts: 2,
            ..SolverConfig::default()
        };
        let h = hw(&w, &xi, 2, 32, &cfg).unwrap();
        let seq = hwn_sequence(
            &w,
            &xi,
            &TruncationSchedule::Dyadic,
            &[1, 2, 4, 8],
            2,
            32,
            &cfg,
            Some(&h),
        )
        .unwrap();
        assert!(seq[0] < seq[1], "first rung should be active: {seq:?}");
        let plateau = seq.last().unwrap();
        assert!(
            (plateau - h.value).abs() <= 1e-6,
            "plateau {plateau} vs hw {}",
            h.value
        );
    }

    #[test]
    fn hwn_sequence_monotone_for_barrier() {
        let w = Integrand::new(
            PeriodicCoefficient::laminate(&[1.0, 2.0]).unwrap(),
            DensityKernel::barrier(DensityKernel::Quadratic { weight: 1.0 }, 1.0, 1.0).unwrap(),
            ConstraintSet::ball(1, 1, 1.0).unwrap(),
        )
        .unwrap();
        let xi = Matrix::scalar(0.6);
        let cfg = SolverConfig {
            restarts: 2,
            ..SolverConfig::default()
        };
        let h = hw(&w, &xi, 2, 32, &cfg).unwrap();
        let seq = hwn_sequence(
            &w,
            &xi,
            &TruncationSchedule::Dyadic,
            &[1, 2, 3, 5, 8],
            2,
            32,
            &cfg,
            Some(&h),
        )
        .unwrap();
        for k in 1..seq.len() {
            assert!(
                seq[k] + 1e-6 >= seq[k - 1],
                "sequence not monotone: {seq:?}"
            );
        }
        for v in &seq {
            assert!(*v <= h.value + 1e-6, "{v} above hw {}", h.value);
        }
    }
}
