//! `cell`: discrete cell solves over the configured gradients and
//! multiplicities; when the density is scalar and convex, the run log also
//! carries the conjugate-duality oracle value and the relative gap.

use super::Ctx;
use crate::config::matrix_from_spec;
use crate::errors::AppError;
use crate::output::{json_f64, Cell, RunLog, Table};
use homcell_core::cell::{self, CellSolveResult};
use homcell_core::Matrix;
use rayon::prelude::*;

struct PointRun {
    xi: Matrix,
    results: Vec<CellSolveResult>,
    best: f64,
    best_n: usize,
    oracle: Option<f64>,
}

pub fn run(ctx: &Ctx) -> Result<(), AppError> {
    let spec = ctx
        .cfg
        .run
        .cell
        .as_ref()
        .ok_or_else(|| AppError::config("config is missing the `cell` section"))?;
    let w = &ctx.cfg.integrand;
    let solver = ctx.cfg.run.solver.build(ctx.cfg.seed);
    let oracle_grids = ctx
        .cfg
        .run
        .oracle
        .as_ref()
        .map(|o| o.build())
        .unwrap_or_default();

    let mut xis = Vec::with_capacity(spec.xi_list.len());
    for s in &spec.xi_list {
        xis.push(matrix_from_spec(s)?);
    }
    let scalar_convex =
        w.shape() == (1, 1) && w.kernel().convex_on_domain_1d(w.constraint());

    let runs: Vec<Result<PointRun, AppError>> = xis
        .par_iter()
        .enumerate()
        .map(|(idx, xi)| {
            let cfg = solver.with_seed(solver.seed ^ (idx as u64).wrapping_mul(0x100_0000_01b3));
            let results = match spec.r {
                None => {
                    let h = cell::hw(w, xi, spec.n_max, spec.resolution, &cfg)?;
                    h.per_n
                }
                Some(r) => {
                    let mut per_n = Vec::with_capacity(spec.n_max);
                    for n in 1..=spec.n_max {
                        per_n.push(cell::cell_value(
                            w,
                            xi,
                            n,
                            r,
                            spec.resolution,
                            &cfg.with_seed(cfg.seed ^ n as u64),
                            &[],
                        )?);
                    }
                    per_n
                }
            };
            let (mut best, mut best_n) = (f64::INFINITY, 1);
            for r in &results {
                if r.value < best {
                    best = r.value;
                    best_n = r.n;
                }
            }
            let oracle = if scalar_convex {
                Some(cell::duality_1d_oracle(w, xi, &oracle_grids)?.value)
            } else {
                None
            };
            Ok(PointRun {
                xi: *xi,
                results,
                best,
                best_n,
                oracle,
            })
        })
        .collect();

    let (m, d) = w.shape();
    let mut names: Vec<String> = Vec::new();
    for i in 0..m {
        for j in 0..d {
            names.push(format!("xi_{i}{j}"));
        }
    }
    for extra in ["n", "r", "value", "iterations", "feasible"] {
        names.push(extra.to_string());
    }
    let mut table = Table::new(names);
    let mut summaries = Vec::new();
    for run in runs {
        let run = run?;
        for res in &run.results {
            let mut row: Vec<Cell> = run.xi.flatten().into_iter().map(Cell::Float).collect();
            row.push(Cell::Int(res.n as i64));
            row.push(Cell::Float(res.r));
            row.push(Cell::Float(res.value));
            row.push(Cell::Int(res.iterations as i64));
            row.push(Cell::Bool(res.feasible));
            table.push(row);
        }
        let mut entry = serde_json::json!({
            "xi": run.xi.flatten(),
            "hw_value": json_f64(run.best),
            "best_n": run.best_n,
        });
        if let Some(oracle) = run.oracle {
            let gap = if oracle != 0.0 {
                (run.best - oracle).abs() / oracle.abs()
            } else {
                (run.best - oracle).abs()
            };
            entry["oracle_value"] = json_f64(oracle);
            entry["oracle_relative_gap"] = json_f64(gap);
        }
        summaries.push(entry);
    }

    let artifact = format!("cell.{}", ctx.format.extension());
    crate::output::write_atomic(
        &ctx.out_dir.join(&artifact),
        &table.render(ctx.format, &ctx.cfg.hash),
    )?;

    RunLog {
        command: "cell",
        config_hash: ctx.cfg.hash.clone(),
        seed: ctx.cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        format: ctx.format,
        outputs: vec![artifact],
        summary: serde_json::json!({
            "n_max": spec.n_max,
            "resolution": spec.resolution,
            "points": summaries,
        }),
    }
    .write(ctx.out_dir)?;
    Ok(())
}
