//! Desk-scale convergence experiments: minimize the oscillating-coefficient
//! energy on a fixed domain mesh for a ladder of cell sizes, compare against
//! the homogenized prediction, and construct explicit recovery fields by
//! periodically tiling cell correctors.
//!
//! Cell sizes are reciprocals of integers (powers of two in the shipped
//! ladders) and mesh resolutions are forced to align with both the cell size
//! and the coefficient grid, so no commensurability error enters the
//! comparison.

use crate::cell::{self, CellSolveResult};
use crate::error::{HomError, Result};
use crate::integrand::Integrand;
use crate::math;
use crate::matrix::Matrix;
use crate::mesh::{Mesh, TestField};
use crate::solver::{self, FieldProblem, SolverConfig};
use alloc::vec::Vec;

/// Boundary handling of the domain minimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryMode {
    /// No boundary condition (one anchor node pins translations).
    Free,
    /// Zero trace on the whole boundary.
    Zero,
    /// Affine data: the field is `F x` plus a zero-trace perturbation.
    Affine,
}

#[derive(Clone, Debug)]
pub struct EpsSolve {
    pub eps: f64,
    pub value: f64,
    pub field: TestField,
    pub iterations: usize,
    pub feasible: bool,
    pub fallback_zero: bool,
}

fn integer_reciprocal(eps: f64) -> Result<usize> {
    if !(eps > 0.0) || eps > 1.0 {
        return Err(HomError::InvalidParameter("eps must lie in (0, 1]"));
    }
    let inv = 1.0 / eps;
    let k = libm::round(inv);
    if math::abs(inv - k) > 1e-9 * inv {
        return Err(HomError::IncompatibleMesh("eps must be a reciprocal integer"));
    }
    Ok(k as usize)
}

fn check_alignment(w: &Integrand, resolution: usize, k: usize) -> Result<()> {
    if resolution % k != 0 {
        return Err(HomError::IncompatibleMesh(
            "mesh resolution must be a multiple of 1/eps",
        ));
    }
    let per_cell = resolution / k;
    if per_cell % w.coefficient().resolution() != 0 {
        return Err(HomError::IncompatibleMesh(
            "elements per cell must be a multiple of the coefficient grid",
        ));
    }
    Ok(())
}

/// Minimizes the domain energy with the oscillating coefficient at cell size
/// `eps` under the selected boundary mode.
pub fn minimize_i_eps(
    w: &Integrand,
    mode: BoundaryMode,
    affine_data: Option<&Matrix>,
    eps: f64,
    resolution: usize,
    cfg: &SolverConfig,
    warm_starts: &[TestField],
) -> Result<EpsSolve> {
    let k = integer_reciprocal(eps)?;
    check_alignment(w, resolution, k)?;
    let (m, d) = w.shape();
    let offset = match (mode, affine_data) {
        (BoundaryMode::Affine, Some(f)) => {
            let g = w.constraint().gauge(f)?;
            if g >= 1.0 {
                return Err(HomError::InfeasibleMacroGradient { gauge: g });
            }
            Some(*f)
        }
        (BoundaryMode::Affine, None) => {
            return Err(HomError::InvalidParameter(
                "affine mode needs the boundary gradient",
            ))
        }
        _ => None,
    };
    let mesh = Mesh::unit(d, resolution)?;
    let coeff: Vec<f64> = mesh
        .elements()
        .iter()
        .map(|e| {
            let mut y = [0.0; 2];
            for i in 0..d {
                y[i] = e.barycenter[i] / eps;
            }
            w.coefficient().eval(&y[..d])
        })
        .collect();
    let objective = cell::ProductObjective {
        kernel: w.kernel(),
        constraint: w.constraint(),
        coeff,
    };
    let free_nodes = match mode {
        BoundaryMode::Free => solver::anchored_mask(&mesh),
        _ => solver::zero_boundary_mask(&mesh),
    };
    let problem = FieldProblem {
        mesh: &mesh,
        m,
        objective: &objective,
        offset,
        constraint: Some(w.constraint()),
        lip_cap: f64::INFINITY,
        free_nodes,
        scale: 1.0,
    };
    let out = solver::minimize(&problem, cfg, warm_starts)?;
    Ok(EpsSolve {
        eps,
        value: out.value,
        field: out.field,
        iterations: out.iterations,
        feasible: out.feasible,
        fallback_zero: out.fallback_zero,
    })
}

/// Builds the tiled recovery perturbation `eps * corrector(x / eps)` on the
/// domain mesh (nodes sample the periodic extension exactly when the grids
/// nest) and returns it with its energy under affine data `F`.
pub fn recovery_construct(
    w: &Integrand,
    eps: f64,
    affine_data: &Matrix,
    corrector: &CellSolveResult,
    resolution: usize,
) -> Result<EpsSolve> {
    let k = integer_reciprocal(eps)?;
    check_alignment(w, resolution, k)?;
    let g = w.constraint().gauge(affine_data)?;
    if g >= 1.0 {
        return Err(HomError::InfeasibleMacroGradient { gauge: g });
    }
    let n = corrector.n;
    if k % n != 0 {
        return Err(HomError::IncompatibleMesh(
            "eps cells of the corrector multiplicity must tile the domain",
        ));
    }
    let rho = corrector.mesh.divisions() / n;
    let per_cell = resolution / k;
    if per_cell % rho != 0 {
        return Err(HomError::IncompatibleMesh(
            "corrector kinks must land on domain mesh nodes",
        ));
    }
    let (m, d) = w.shape();
    let mesh = Mesh::unit(d, resolution)?;
    let mut field = TestField::zeros(&mesh, m);
    let period = n as f64;
    let mut buf = [0.0; crate::matrix::MAX_DIM];
    for a in 0..mesh.node_count() {
        if mesh.is_boundary(a) {
            continue;
        }
        let xy = mesh.node_coord(a);
        let mut y = [0.0; 2];
        for i in 0..d {
            let mut v = (xy[i] / eps) % period;
            if v < 0.0 {
                v += period;
            }
            y[i] = v;
        }
        corrector.field.eval_at(&corrector.mesh, &y[..d], &mut buf);
        for c in 0..m {
            field.set(a, c, eps * buf[c]);
        }
    }
    let value = domain_energy(w, eps, affine_data, &mesh, &field)?;
    Ok(EpsSolve {
        eps,
        value,
        field,
        iterations: 0,
        feasible: true,
        fallback_zero: false,
    })
}

/// Energy of an explicit perturbation field under affine data.
pub fn domain_energy(
    w: &Integrand,
    eps: f64,
    affine_data: &Matrix,
    mesh: &Mesh,
    field: &TestField,
) -> Result<f64> {
    let (m, d) = w.shape();
    let coeff: Vec<f64> = mesh
        .elements()
        .iter()
        .map(|e| {
            let mut y = [0.0; 2];
            for i in 0..d {
                y[i] = e.barycenter[i] / eps;
            }
            w.coefficient().eval(&y[..d])
        })
        .collect();
    let objective = cell::ProductObjective {
        kernel: w.kernel(),
        constraint: w.constraint(),
        coeff,
    };
    let problem = FieldProblem {
        mesh,
        m,
        objective: &objective,
        offset: Some(*affine_data),
        constraint: Some(w.constraint()),
        lip_cap: f64::INFINITY,
        free_nodes: solver::zero_boundary_mask(mesh),
        scale: 1.0,
    };
    Ok(problem.energy(field))
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub eps: f64,
    pub energy: f64,
    pub recovery: f64,
    /// `|energy - prediction| / |prediction|` (absolute when the prediction
    /// vanishes).
    pub gap: f64,
    pub lower_bound_ok: bool,
    pub sandwich_ok: bool,
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    /// Homogenized prediction `|domain| * W_hom(F)` from the cell solver.
    pub prediction: f64,
    pub corrector_n: usize,
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Debug)]
pub struct SweepCfg {
    pub domain_resolution: usize,
    pub hw_n_max: usize,
    pub corrector_resolution: usize,
    pub solver: SolverConfig,
    /// Slack allowed in the lower-bound flag `energy >= prediction - tol`.
    pub lower_tolerance: f64,
}

impl Default for SweepCfg {
    fn default() -> Self {
        SweepCfg {
            domain_resolution: 128,
            hw_n_max: 2,
            corrector_resolution: 8,
            solver: SolverConfig::default(),
            lower_tolerance: 1e-6,
        }
    }
}

/// Full sweep under affine boundary data: per-rung minimized energies,
/// tiled-corrector recovery energies (also injected as warm starts, so the
/// sandwich inequality holds by construction), and gaps to the homogenized
/// prediction.
pub fn sweep(w: &Integrand, affine_data: &Matrix, ladder: &[u32], cfg: &SweepCfg) -> Result<SweepReport> {
    if ladder.is_empty() {
        return Err(HomError::EmptySamples);
    }
    let hw = cell::hw(
        w,
        affine_data,
        cfg.hw_n_max,
        cfg.corrector_resolution,
        &cfg.solver,
    )?;
    let corrector = &hw.per_n[0];
    let prediction = hw.value;
    let mut rows = Vec::with_capacity(ladder.len());
    for &kexp in ladder {
        let eps = math::powi(0.5, kexp);
        let recovery = recovery_construct(w, eps, affine_data, corrector, cfg.domain_resolution)?;
        let run_cfg = cfg
            .solver
            .with_seed(cfg.solver.seed ^ (kexp as u64).wrapping_mul(0xd1b5_4a32_d192_ed03));
        let solve = minimize_i_eps(
            w,
            BoundaryMode::Affine,
            Some(affine_data),
            eps,
            cfg.domain_resolution,
            &run_cfg,
            core::slice::from_ref(&recovery.field),
        )?;
        let gap = if prediction != 0.0 {
            math::abs(solve.value - prediction) / math::abs(prediction)
        } else {
            math::abs(solve.value)
        };
        rows.push(SweepRow {
            eps,
            energy: solve.value,
            recovery: recovery.value,
            gap,
            lower_bound_ok: solve.value >= prediction - cfg.lower_tolerance,
            sandwich_ok: recovery.value >= solve.value - 1e-9,
        });
    }
    Ok(SweepReport {
        prediction,
        corrector_n: corrector.n,
        rows,
    })
}
