//! Barrier stored-energy densities on the unit ball of deformations around
//! the identity, their shift reduction to a zero-centered constraint set, and
//! the homogenized density obtained by composing the cell solver with the
//! discrete envelope.
//!
//! The bounded part of the density is the squared-distance family
//! `g(xi) = g_weight |xi - I|^2`, which shifts exactly onto the quadratic
//! kernel; richer continuous parts can be tabulated. The convex barrier is
//! `h(t) = cbar (1/(1 - t^alpha) - 1)`, realizing the singular growth with
//! equality.

use crate::cell::{self, CellSolveResult};
use crate::convex::ConstraintSet;
use crate::envelope::{self, PointDensity, RadialLadderCfg, RadialVerdict};
use crate::error::{HomError, Result};
use crate::integrand::{DensityKernel, Integrand, PeriodicCoefficient};
use crate::math;
use crate::matrix::Matrix;
use crate::mesh::Mesh;
use crate::solver::{self, ElementObjective, FieldProblem, SolverConfig};
use alloc::vec::Vec;
use core::cell::RefCell;

#[derive(Clone, Debug, PartialEq)]
pub struct HyperelasticDensity {
    dim: usize,
    g_weight: f64,
    cbar: f64,
    alpha: f64,
}

impl HyperelasticDensity {
    pub fn new(dim: usize, g_weight: f64, cbar: f64, alpha: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(HomError::InvalidParameter("dimension must be 1, 2 or 3"));
        }
        if !(g_weight >= 0.0) {
            return Err(HomError::InvalidParameter("g weight must be nonnegative"));
        }
        if !(cbar > 0.0) || !(alpha > 0.0) {
            return Err(HomError::InvalidParameter("cbar and alpha must be positive"));
        }
        Ok(HyperelasticDensity {
            dim,
            g_weight,
            cbar,
            alpha,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn g_weight(&self) -> f64 {
        self.g_weight
    }

    #[inline]
    pub fn cbar(&self) -> f64 {
        self.cbar
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Convex barrier profile on `[0, 1)`.
    #[inline]
    pub fn h(&self, t: f64) -> f64 {
        if t >= 1.0 {
            f64::INFINITY
        } else {
            self.cbar * (1.0 / (1.0 - math::pow(t, self.alpha)) - 1.0)
        }
    }

    /// `g(xi) + h(|xi - I|)`, finite exactly on the open unit ball around I.
    pub fn eval(&self, xi: &Matrix) -> f64 {
        debug_assert_eq!(xi.shape(), (self.dim, self.dim));
        let shift = *xi - Matrix::identity(self.dim);
        let t = shift.norm();
        if t >= 1.0 {
            return f64::INFINITY;
        }
        self.g_weight * t * t + self.h(t)
    }

    pub fn grad(&self, xi: &Matrix) -> Matrix {
        let shift = *xi - Matrix::identity(self.dim);
        let t = shift.norm();
        let mut out = shift.scale(2.0 * self.g_weight);
        if t > 0.0 && t < 1.0 {
            let ta = math::pow(t, self.alpha);
            let dh = self.cbar * self.alpha * math::pow(t, self.alpha - 1.0)
                / ((1.0 - ta) * (1.0 - ta));
            out.add_assign_scaled(&shift, dh / t);
        }
        out
    }
}

/// Determinant and the positivity flag; inside the unit ball around the
/// identity the determinant is strictly positive.
pub fn det_positivity_check(xi: &Matrix) -> Result<(f64, bool)> {
    let det = xi.det()?;
    Ok((det, det > 0.0))
}

/// Radial blow-up probe along `I + t u`: density values scaled by the
/// coefficient's essential infimum (the conservative side) and determinants
/// along the ladder.
#[derive(Clone, Debug)]
pub struct HyperProbe {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub dets: Vec<f64>,
    pub verdict: RadialVerdict,
    pub tail_oscillation: f64,
}

pub fn blowup_probe(
    coeff: &PeriodicCoefficient,
    density: &HyperelasticDensity,
    direction: &Matrix,
    cfg: &RadialLadderCfg,
) -> Result<HyperProbe> {
    if direction.shape() != (density.dim, density.dim) {
        return Err(HomError::DimensionMismatch {
            expected: (density.dim, density.dim),
            got: direction.shape(),
        });
    }
    if math::abs(direction.norm() - 1.0) > 1e-9 {
        return Err(HomError::InvalidParameter(
            "blow-up probes need a unit direction",
        ));
    }
    let identity = Matrix::identity(density.dim);
    let mut ts = Vec::with_capacity(cfg.depth as usize);
    let mut values = Vec::with_capacity(cfg.depth as usize);
    let mut dets = Vec::with_capacity(cfg.depth as usize);
    for k in 1..=cfg.depth {
        let t = math::one_minus_pow2_neg(k);
        let xi = identity + direction.scale(t);
        ts.push(t);
        values.push(coeff.min() * density.eval(&xi));
        dets.push(xi.det()?);
    }
    let (verdict, osc) = envelope::classify_ladder(&values, cfg);
    Ok(HyperProbe {
        ts,
        values,
        dets,
        verdict,
        tail_oscillation: osc,
    })
}

/// Shift reduction: the density around `I` becomes a barrier kernel over the
/// zero-centered unit ball, with `g` shifting exactly onto the quadratic
/// kernel.
pub fn shifted_integrand(
    coeff: PeriodicCoefficient,
    density: &HyperelasticDensity,
) -> Result<Integrand> {
    if coeff.dimension() != density.dim {
        return Err(HomError::DimensionMismatch {
            expected: (density.dim, density.dim),
            got: (density.dim, coeff.dimension()),
        });
    }
    let constraint = ConstraintSet::ball(density.dim, density.dim, 1.0)?;
    let kernel = DensityKernel::barrier(
        DensityKernel::Quadratic {
            weight: density.g_weight,
        },
        density.cbar,
        density.alpha,
    )?;
    Integrand::new(coeff, kernel, constraint)
}

/// Cell-value evaluator behind the envelope stage, memoized on exact bit
/// patterns so the discrete envelope's line searches reuse solves.
pub struct HwPointDensity<'a> {
    w: &'a Integrand,
    n_max: usize,
    resolution: usize,
    cfg: SolverConfig,
    cache: RefCell<alloc::collections::BTreeMap<Vec<u64>, f64>>,
}

impl<'a> HwPointDensity<'a> {
    pub fn new(w: &'a Integrand, n_max: usize, resolution: usize, cfg: SolverConfig) -> Self {
        HwPointDensity {
            w,
            n_max,
            resolution,
            cfg,
            cache: RefCell::new(alloc::collections::BTreeMap::new()),
        }
    }
}

impl PointDensity for HwPointDensity<'_> {
    fn eval(&self, xi: &Matrix) -> f64 {
        if self.w.constraint().gauge_unchecked(xi) >= 1.0 {
            return f64::INFINITY;
        }
        let key: Vec<u64> = xi.flatten().iter().map(|v| v.to_bits()).collect();
        if let Some(v) = self.cache.borrow().get(&key) {
            return *v;
        }
        let v = match cell::hw(self.w, xi, self.n_max, self.resolution, &self.cfg) {
            Ok(r) => r.value,
            Err(_) => f64::INFINITY,
        };
        self.cache.borrow_mut().insert(key, v);
        v
    }
}

/// Configuration of the homogenized-density evaluation: the inner cell solves
/// and the outer discrete-envelope pass.
#[derive(Clone, Debug)]
pub struct WhomCfg {
    pub cell_n_max: usize,
    pub cell_resolution: usize,
    pub envelope_resolution: usize,
    pub cell_solver: SolverConfig,
    pub envelope_solver: SolverConfig,
}

impl Default for WhomCfg {
    fn default() -> Self {
        let cell_solver = SolverConfig {
            restarts: 2,
            max_iterations: 800,
            ..SolverConfig::default()
        };
        let envelope_solver = SolverConfig {
            restarts: 1,
            max_iterations: 30,
            grad_tolerance: 1e-6,
            ..SolverConfig::default()
        };
        WhomCfg {
            cell_n_max: 2,
            cell_resolution: 8,
            envelope_resolution: 2,
            cell_solver,
            envelope_solver,
        }
    }
}

/// Homogenized hyperelastic density: `+inf` outside the open unit ball
/// around the identity, otherwise the discrete envelope of the multi-cell
/// value of the shifted integrand, evaluated at `xi - I`.
pub fn whom_hyper(
    coeff: &PeriodicCoefficient,
    density: &HyperelasticDensity,
    xi: &Matrix,
    cfg: &WhomCfg,
) -> Result<f64> {
    if xi.shape() != (density.dim, density.dim) {
        return Err(HomError::DimensionMismatch {
            expected: (density.dim, density.dim),
            got: xi.shape(),
        });
    }
    let shift = *xi - Matrix::identity(density.dim);
    if shift.norm() >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let w0 = shifted_integrand(coeff.clone(), density)?;
    let hw_density = HwPointDensity::new(&w0, cfg.cell_n_max, cfg.cell_resolution, cfg.cell_solver.clone());
    let result = envelope::zf_discrete(
        &hw_density,
        w0.constraint(),
        &shift,
        cfg.envelope_resolution,
        &cfg.envelope_solver,
        &[],
        &[],
    )?;
    Ok(result.value)
}

struct DirectObjective<'a> {
    density: &'a HyperelasticDensity,
    coeff: Vec<f64>,
}

impl ElementObjective for DirectObjective<'_> {
    fn eval(&self, e: usize, g: &Matrix) -> f64 {
        self.coeff[e] * self.density.eval(g)
    }
    fn grad(&self, e: usize, g: &Matrix) -> Matrix {
        self.density.grad(g).scale(self.coeff[e])
    }
}

/// Cell value computed directly on the ball around the identity (no shift):
/// the second route of the translation-consistency check. Feasibility is kept
/// by the barrier itself (infinite trial energies are rejected by the line
/// search).
pub fn hyper_cell_direct(
    coeff: &PeriodicCoefficient,
    density: &HyperelasticDensity,
    xi: &Matrix,
    n: usize,
    resolution: usize,
    cfg: &SolverConfig,
) -> Result<CellSolveResult> {
    let shift = *xi - Matrix::identity(density.dim);
    if shift.norm() >= 1.0 {
        return Err(HomError::InfeasibleMacroGradient {
            gauge: shift.norm(),
        });
    }
    let d = density.dim;
    let mesh = Mesh::cell(d, n, resolution)?;
    let coeff_vals: Vec<f64> = mesh
        .elements()
        .iter()
        .map(|e| coeff.eval(&e.barycenter[..d]))
        .collect();
    let objective = DirectObjective {
        density,
        coeff: coeff_vals,
    };
    let problem = FieldProblem {
        mesh: &mesh,
        m: d,
        objective: &objective,
        offset: Some(*xi),
        constraint: None,
        lip_cap: f64::INFINITY,
        free_nodes: solver::zero_boundary_mask(&mesh),
        scale: 1.0 / crate::math::powi(n as f64, d as u32),
    };
    let out = solver::minimize(&problem, cfg, &[])?;
    Ok(CellSolveResult {
        value: out.value,
        field: out.field,
        mesh,
        n,
        r: f64::INFINITY,
        iterations: out.iterations,
        restarts_run: out.restarts_run,
        best_restart: out.best_restart,
        feasible: out.feasible,
        fallback_zero: out.fallback_zero,
        feasibility_slack: cfg.tau_max - out.max_gauge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::{assumption_report, SampleConfig, TruncationSchedule};
    use crate::math::Rng;

    fn density_2d() -> HyperelasticDensity {
        HyperelasticDensity::new(2, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn identity_has_unit_det() {
        let (det, pos) = det_positivity_check(&Matrix::identity(2)).unwrap();
        assert_eq!(det, 1.0);
        assert!(pos);
    }

    #[test]
    fn shear_inside_ball_has_positive_det() {
        let mut xi = Matrix::identity(2);
        xi.set(0, 1, 0.9);
        assert!(((xi - Matrix::identity(2)).norm() - 0.9).abs() < 1e-12);
        let (det, pos) = det_positivity_check(&xi).unwrap();
        assert_eq!(det, 1.0);
        assert!(pos);
    }

    #[test]
    fn random_ball_samples_have_positive_det() {
        let mut rng = Rng::seed_from(21);
        let identity = Matrix::identity(2);
        for _ in 0..200 {
            let mut shift = Matrix::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    shift.set(i, j, rng.symmetric());
                }
            }
            let norm = shift.norm();
            if norm >= 1.0 {
                shift = shift.scale(0.999 / norm);
            }
            let xi = identity + shift;
            let (_, pos) = det_positivity_check(&xi).unwrap();
            assert!(pos, "det became nonpositive at {xi:?}");
        }
    }

    #[test]
    fn blowup_probe_along_axis() {
        let coeff = PeriodicCoefficient::constant(2, 1.0).unwrap();
        let density = density_2d();
        let dir = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let probe = blowup_probe(&coeff, &density, &dir, &RadialLadderCfg::default()).unwrap();
        assert_eq!(probe.verdict, RadialVerdict::Infinite);
        // Value at the deepest rung dominates 2^20 - 1.
        assert!(*probe.values.last().unwrap() >= (1u64 << 20) as f64 - 1.0);
        for det in &probe.dets {
            assert!(*det > 0.0);
        }
        // Finite at the first rung.
        assert!(probe.values[0].is_finite());
    }

    #[test]
    fn shifted_density_matches_direct_evaluation() {
        let coeff = PeriodicCoefficient::constant(2, 1.0).unwrap();
        let density = density_2d();
        let w0 = shifted_integrand(coeff, &density).unwrap();
        let mut rng = Rng::seed_from(5);
        for _ in 0..50 {
            let mut zeta = Matrix::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    zeta.set(i, j, 0.7 * rng.symmetric());
                }
            }
            if zeta.norm() >= 1.0 {
                continue;
            }
            let xi = zeta + Matrix::identity(2);
            let direct = density.eval(&xi);
            let shifted = w0.eval(&[0.3, 0.4], &zeta);
            assert!((direct - shifted).abs() <= 1e-12 * (1.0 + direct.abs()));
        }
        // W_0(x, 0) = W(x, I).
        let w0b = shifted_integrand(PeriodicCoefficient::constant(2, 2.0).unwrap(), &density)
            .unwrap();
        assert_eq!(
            w0b.eval(&[0.1, 0.9], &Matrix::zeros(2, 2)),
            2.0 * density.eval(&Matrix::identity(2))
        );
    }

    #[test]
    fn shifted_integrand_passes_hypotheses() {
        let coeff = PeriodicCoefficient::checkerboard(1.0, 2.0).unwrap();
        let density = density_2d();
        let w0 = shifted_integrand(coeff, &density).unwrap();
        let report = assumption_report(
            &w0,
            &TruncationSchedule::Dyadic,
            &SampleConfig::default(),
        )
        .unwrap();
        assert!(report.all_pass(), "shifted density must satisfy all hypotheses");
    }

    #[test]
    fn whom_at_identity_is_zero_for_pure_barrier() {
        let coeff = PeriodicCoefficient::constant(2, 1.0).unwrap();
        let density = density_2d();
        let v = whom_hyper(&coeff, &density, &Matrix::identity(2), &WhomCfg::default()).unwrap();
        assert!(v.abs() < 1e-8, "{v}");
    }

    #[test]
    fn whom_outside_ball_is_infinite() {
        let coeff = PeriodicCoefficient::constant(2, 1.0).unwrap();
        let density = density_2d();
        let mut xi = Matrix::identity(2);
        xi.set(0, 1, 1.3);
        let v = whom_hyper(&coeff, &density, &xi, &WhomCfg::default()).unwrap();
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn shift_consistency_between_routes() {
        let coeff = PeriodicCoefficient::checkerboard(1.0, 2.0).unwrap();
        let density = density_2d();
        let w0 = shifted_integrand(coeff.clone(), &density).unwrap();
        let cfg = SolverConfig {
            restarts: 2,
            ..SolverConfig::default()
        };
        let mut rng = Rng::seed_from(8);
        for _ in 0..4 {
            let mut zeta = Matrix::zeros(2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    zeta.set(i, j, 0.4 * rng.symmetric());
                }
            }
            let xi = zeta + Matrix::identity(2);
            let shifted = cell::cell_value(&w0, &zeta, 1, f64::INFINITY, 4, &cfg, &[]).unwrap();
            let direct = hyper_cell_direct(&coeff, &density, &xi, 1, 4, &cfg).unwrap();
            assert!(
                (shifted.value - direct.value).abs() <= 1e-6 * (1.0 + shifted.value.abs()),
                "shifted {} vs direct {}",
                shifted.value,
                direct.value
            );
        }
    }
}
