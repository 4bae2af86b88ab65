//! Run-config schema and conversion into core types.
//!
//! One structured JSON file drives every command. Unknown keys are rejected
//! everywhere, so typos fail before any compute starts. Matrices are nested
//! row arrays; extended-real values never appear in configs (only in
//! outputs, as the literal `+inf`).

use crate::errors::AppError;
use homcell_core::cell::OracleGrids;
use homcell_core::convex::Halfspace;
use homcell_core::envelope::{LaminateGrid, RadialLadderCfg};
use homcell_core::hyper::{HyperelasticDensity, WhomCfg};
use homcell_core::solver::SolverConfig;
use homcell_core::sweep::SweepCfg;
use homcell_core::{ConstraintSet, DensityKernel, Integrand, Matrix, PeriodicCoefficient};
use serde::Deserialize;
use std::path::Path;

pub type MatrixSpec = Vec<Vec<f64>>;

pub fn matrix_from_spec(spec: &MatrixSpec) -> Result<Matrix, AppError> {
    if spec.is_empty() || spec[0].is_empty() {
        return Err(AppError::config("empty matrix in config"));
    }
    let rows = spec.len();
    let cols = spec[0].len();
    if rows > 3 || cols > 3 {
        return Err(AppError::config("matrices are limited to 3x3"));
    }
    let mut flat = Vec::with_capacity(rows * cols);
    for row in spec {
        if row.len() != cols {
            return Err(AppError::config("ragged matrix rows in config"));
        }
        flat.extend_from_slice(row);
    }
    Matrix::from_flat(rows, cols, &flat).map_err(AppError::from)
}

#[derive(Debug, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSpec {
    Ball {
        rows: usize,
        cols: usize,
        radius: f64,
    },
    Box {
        half_widths: MatrixSpec,
    },
    Polytope {
        rows: usize,
        cols: usize,
        halfspaces: Vec<HalfspaceSpec>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub normal: MatrixSpec,
    pub offset: f64,
}

impl ConstraintSpec {
    pub fn build(&self) -> Result<ConstraintSet, AppError> {
        match self {
            ConstraintSpec::Ball { rows, cols, radius } => {
                ConstraintSet::ball(*rows, *cols, *radius).map_err(AppError::from)
            }
            ConstraintSpec::Box { half_widths } => {
                ConstraintSet::boxed(matrix_from_spec(half_widths)?).map_err(AppError::from)
            }
            ConstraintSpec::Polytope {
                rows,
                cols,
                halfspaces,
            } => {
                let mut hs = Vec::with_capacity(halfspaces.len());
                for spec in halfspaces {
                    hs.push(Halfspace {
                        normal: matrix_from_spec(&spec.normal)?,
                        offset: spec.offset,
                    });
                }
                ConstraintSet::polytope(*rows, *cols, hs).map_err(AppError::from)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub dimension: usize,
    pub resolution: usize,
    /// Inline grid values (row-major, first axis fastest) ...
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    /// ... or a CSV file with one value per line/field.
    #[serde(default)]
    pub csv: Option<String>,
}

impl CoefficientSpec {
    pub fn build(&self, config_dir: &Path) -> Result<PeriodicCoefficient, AppError> {
        let values = match (&self.values, &self.csv) {
            (Some(v), None) => v.clone(),
            (None, Some(rel)) => {
                let path = config_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    AppError::config(format!("cannot read coefficient csv {}: {e}", path.display()))
                })?;
                let mut vals = Vec::new();
                for token in text.split(|c: char| c == ',' || c.is_whitespace()) {
                    if token.is_empty() {
                        continue;
                    }
                    vals.push(token.parse::<f64>().map_err(|e| {
                        AppError::config(format!("bad coefficient entry {token:?}: {e}"))
                    })?);
                }
                vals
            }
            _ => {
                return Err(AppError::config(
                    "coefficient needs exactly one of `values` or `csv`",
                ))
            }
        };
        PeriodicCoefficient::from_samples(self.dimension, self.resolution, values)
            .map_err(AppError::from)
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Quadratic {
        weight: f64,
    },
    DoubleWell,
    PowerGauge {
        coeff: f64,
        exponent: f64,
    },
    Barrier {
        g: Box<KernelSpec>,
        cbar: f64,
        alpha: f64,
    },
    Tabulated {
        per_axis: usize,
        values: Vec<f64>,
    },
}

impl KernelSpec {
    pub fn build(&self) -> Result<DensityKernel, AppError> {
        Ok(match self {
            KernelSpec::Quadratic { weight } => DensityKernel::Quadratic { weight: *weight },
            KernelSpec::DoubleWell => DensityKernel::DoubleWell,
            KernelSpec::PowerGauge { coeff, exponent } => DensityKernel::PowerGauge {
                coeff: *coeff,
                exponent: *exponent,
            },
            KernelSpec::Barrier { g, cbar, alpha } => {
                DensityKernel::barrier(g.build()?, *cbar, *alpha).map_err(AppError::from)?
            }
            KernelSpec::Tabulated { per_axis, values } => DensityKernel::Tabulated {
                per_axis: *per_axis,
                values: values.clone(),
            },
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandSpec {
    pub coefficient: CoefficientSpec,
    pub kernel: KernelSpec,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub restarts: Option<usize>,
    pub max_iterations: Option<usize>,
    pub grad_tolerance: Option<f64>,
    pub armijo: Option<f64>,
    pub backtrack: Option<f64>,
    pub max_backtracks: Option<usize>,
    pub tau_max: Option<f64>,
    pub perturbation: Option<f64>,
}

impl SolverSpec {
    pub fn build(&self, seed: u64) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(v) = self.restarts {
            cfg.restarts = v;
        }
        if let Some(v) = self.max_iterations {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.grad_tolerance {
            cfg.grad_tolerance = v;
        }
        if let Some(v) = self.armijo {
            cfg.armijo = v;
        }
        if let Some(v) = self.backtrack {
            cfg.backtrack = v;
        }
        if let Some(v) = self.max_backtracks {
            cfg.max_backtracks = v;
        }
        if let Some(v) = self.tau_max {
            cfg.tau_max = v;
        }
        if let Some(v) = self.perturbation {
            cfg.perturbation = v;
        }
        cfg.seed = seed;
        cfg
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityCmdSpec {
    pub xi_list: Vec<MatrixSpec>,
    #[serde(default)]
    pub truncation_indices: Vec<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellCmdSpec {
    pub xi_list: Vec<MatrixSpec>,
    pub n_max: usize,
    pub resolution: usize,
    /// Gradient cap; omitted means uncapped.
    #[serde(default)]
    pub r: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminateGridSpec {
    pub lambda_steps: usize,
    pub rho_max: f64,
    pub rho_steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSpec {
    pub depth: Option<u32>,
    pub blowup_threshold: Option<f64>,
    pub oscillation_tol: Option<f64>,
    pub tail: Option<usize>,
}

impl RadialSpec {
    pub fn build(&self) -> RadialLadderCfg {
        let mut cfg = RadialLadderCfg::default();
        if let Some(v) = self.depth {
            cfg.depth = v;
        }
        if let Some(v) = self.blowup_threshold {
            cfg.blowup_threshold = v;
        }
        if let Some(v) = self.oscillation_tol {
            cfg.oscillation_tol = v;
        }
        if let Some(v) = self.tail {
            cfg.tail = v;
        }
        cfg
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeCmdSpec {
    pub xi_list: Vec<MatrixSpec>,
    pub resolution: usize,
    pub laminate_depth: usize,
    pub laminate: LaminateGridSpec,
    #[serde(default)]
    pub radial_directions: usize,
    #[serde(default)]
    pub radial: Option<RadialSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCmdSpec {
    pub affine_data: MatrixSpec,
    /// Exponents k of the rungs eps = 2^-k.
    pub ladder: Vec<u32>,
    pub domain_resolution: usize,
    pub hw_n_max: usize,
    pub corrector_resolution: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhomSpec {
    pub cell_n_max: Option<usize>,
    pub cell_resolution: Option<usize>,
    pub envelope_resolution: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperCmdSpec {
    pub dim: usize,
    pub g_weight: f64,
    pub cbar: f64,
    pub alpha: f64,
    pub polar_directions: usize,
    pub polar_radii: Vec<f64>,
    #[serde(default)]
    pub radial: Option<RadialSpec>,
    #[serde(default)]
    pub whom: Option<WhomSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub constraint: ConstraintSpec,
    pub integrand: IntegrandSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub oracle: Option<OracleSpec>,
    #[serde(default)]
    pub density: Option<DensityCmdSpec>,
    #[serde(default)]
    pub cell: Option<CellCmdSpec>,
    #[serde(default)]
    pub envelope: Option<EnvelopeCmdSpec>,
    #[serde(default)]
    pub sweep: Option<SweepCmdSpec>,
    #[serde(default)]
    pub hyper: Option<HyperCmdSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub xi_points: usize,
    pub s_points: usize,
}

impl OracleSpec {
    pub fn build(&self) -> OracleGrids {
        OracleGrids {
            xi_points: self.xi_points,
            s_points: self.s_points,
        }
    }
}

/// Parsed config together with its raw-byte hash and built core objects.
pub struct LoadedConfig {
    pub run: RunConfig,
    pub hash: String,
    pub integrand: Integrand,
    pub seed: u64,
}

pub fn load(path: &Path, seed_override: Option<u64>) -> Result<LoadedConfig, AppError> {
    let bytes = std::fs::read(path)
        .map_err(|e| AppError::config(format!("cannot read config {}: {e}", path.display())))?;
    let hash = {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let out = hasher.finalize();
        let mut s = String::with_capacity(64);
        for b in out {
            s.push_str(&format!("{b:02x}"));
        }
        s
    };
    let run: RunConfig = serde_json::from_slice(&bytes)
        .map_err(|e| AppError::config(format!("config schema violation: {e}")))?;
    let config_dir = path.parent().unwrap_or(Path::new("."));
    let constraint = run.constraint.build()?;
    let coefficient = run.integrand.coefficient.build(config_dir)?;
    let kernel = run.integrand.kernel.build()?;
    let integrand =
        Integrand::new(coefficient, kernel, constraint).map_err(AppError::from)?;
    let seed = seed_override.unwrap_or(run.seed);
    Ok(LoadedConfig {
        run,
        hash,
        integrand,
        seed,
    })
}

impl LaminateGridSpec {
    pub fn build(&self, m: usize, d: usize) -> LaminateGrid {
        LaminateGrid::default_for(m, d, self.rho_max, self.lambda_steps, self.rho_steps)
    }
}

impl HyperCmdSpec {
    pub fn density(&self) -> Result<HyperelasticDensity, AppError> {
        HyperelasticDensity::new(self.dim, self.g_weight, self.cbar, self.alpha)
            .map_err(AppError::from)
    }

    pub fn whom_cfg(&self, solver: &SolverSpec, seed: u64) -> WhomCfg {
        let mut cfg = WhomCfg::default();
        if let Some(spec) = &self.whom {
            if let Some(v) = spec.cell_n_max {
                cfg.cell_n_max = v;
            }
            if let Some(v) = spec.cell_resolution {
                cfg.cell_resolution = v;
            }
            if let Some(v) = spec.envelope_resolution {
                cfg.envelope_resolution = v;
            }
        }
        let base = solver.build(seed);
        cfg.cell_solver.seed = base.seed;
        cfg.cell_solver.tau_max = base.tau_max;
        cfg.envelope_solver.seed = base.seed ^ 0x656e76;
        cfg.envelope_solver.tau_max = base.tau_max;
        cfg
    }
}

impl SweepCmdSpec {
    pub fn build(&self, solver: SolverConfig) -> SweepCfg {
        SweepCfg {
            domain_resolution: self.domain_resolution,
            hw_n_max: self.hw_n_max,
            corrector_resolution: self.corrector_resolution,
            solver,
            lower_tolerance: 1e-6,
        }
    }
}
