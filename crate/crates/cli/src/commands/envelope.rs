//! `envelope`: lamination and discrete-cell envelope values per gradient,
//! plus radial probes along boundary directions in long format for plotting.

use super::Ctx;
use crate::config::matrix_from_spec;
use crate::errors::AppError;
use crate::output::{columns, json_f64, Cell, RunLog, Table};
use homcell_core::envelope::{
    self, KernelDensity, LaminateSplit, RadialLadderCfg, RadialVerdict,
};
use homcell_core::integrand::boundary_directions;
use rayon::prelude::*;

struct PointRun {
    xi: homcell_core::Matrix,
    laminate: f64,
    split: Option<LaminateSplit>,
    discrete: f64,
}

pub fn run(ctx: &Ctx) -> Result<(), AppError> {
    let spec = ctx
        .cfg
        .run
        .envelope
        .as_ref()
        .ok_or_else(|| AppError::config("config is missing the `envelope` section"))?;
    let w = &ctx.cfg.integrand;
    let (m, d) = w.shape();
    let solver = ctx.cfg.run.solver.build(ctx.cfg.seed);
    let grid = spec.laminate.build(m, d);
    let radial_cfg = spec
        .radial
        .as_ref()
        .map(|r| r.build())
        .unwrap_or_else(RadialLadderCfg::default);

    let mut xis = Vec::with_capacity(spec.xi_list.len());
    for s in &spec.xi_list {
        xis.push(matrix_from_spec(s)?);
    }

    let runs: Vec<Result<PointRun, AppError>> = xis
        .par_iter()
        .enumerate()
        .map(|(idx, xi)| {
            let density = KernelDensity {
                kernel: w.kernel(),
                constraint: w.constraint(),
            };
            let lam = envelope::laminate_bound(&density, xi, spec.laminate_depth, &grid)?;
            let seeds: Vec<LaminateSplit> = lam.witness_split.clone().into_iter().collect();
            let cfg = solver.with_seed(solver.seed ^ (idx as u64).wrapping_mul(0x9e37_79b9));
            let zf = envelope::zf_discrete(
                &density,
                w.constraint(),
                xi,
                spec.resolution,
                &cfg,
                &seeds,
                &[],
            )?;
            Ok(PointRun {
                xi: *xi,
                laminate: lam.value,
                split: lam.witness_split,
                discrete: zf.value,
            })
        })
        .collect();

    let mut names: Vec<String> = Vec::new();
    for i in 0..m {
        for j in 0..d {
            names.push(format!("xi_{i}{j}"));
        }
    }
    for extra in ["method", "value", "level"] {
        names.push(extra.to_string());
    }
    let mut table = Table::new(names);
    let mut summaries = Vec::new();
    for run in runs {
        let run = run?;
        let flat = run.xi.flatten();
        let mut lam_row: Vec<Cell> = flat.iter().copied().map(Cell::Float).collect();
        lam_row.push(Cell::Text(format!("lamination({})", spec.laminate_depth)));
        lam_row.push(Cell::Float(run.laminate));
        lam_row.push(Cell::Int(spec.laminate_depth as i64));
        table.push(lam_row);
        let mut zf_row: Vec<Cell> = flat.iter().copied().map(Cell::Float).collect();
        zf_row.push(Cell::Text("discrete-cell".to_string()));
        zf_row.push(Cell::Float(run.discrete));
        zf_row.push(Cell::Int(spec.resolution as i64));
        table.push(zf_row);
        summaries.push(serde_json::json!({
            "xi": flat,
            "laminate": json_f64(run.laminate),
            "discrete": json_f64(run.discrete),
            "split": run.split.map(|s| serde_json::json!({
                "lambda": s.lambda,
                "magnitude": s.magnitude,
                "a": s.a,
                "b": s.b,
            })),
        }));
    }

    let env_artifact = format!("envelope.{}", ctx.format.extension());
    crate::output::write_atomic(
        &ctx.out_dir.join(&env_artifact),
        &table.render(ctx.format, &ctx.cfg.hash),
    )?;
    let mut outputs = vec![env_artifact];

    // Radial probes along boundary directions.
    let mut verdicts = Vec::new();
    if spec.radial_directions > 0 {
        let dirs = boundary_directions(w.constraint(), spec.radial_directions, ctx.cfg.seed);
        let mut radial_table = Table::new(columns(&["direction", "t", "value"]));
        for (di, dir) in dirs.iter().take(spec.radial_directions).enumerate() {
            let density = KernelDensity {
                kernel: w.kernel(),
                constraint: w.constraint(),
            };
            let probe = envelope::radial_limit(&density, w.constraint(), dir, &radial_cfg)?;
            for (t, v) in probe.ts.iter().zip(&probe.values) {
                radial_table.push(vec![
                    Cell::Int(di as i64),
                    Cell::Float(*t),
                    Cell::Float(*v),
                ]);
            }
            verdicts.push(serde_json::json!({
                "direction": dir.flatten(),
                "verdict": match probe.verdict {
                    RadialVerdict::Finite(v) => serde_json::json!({"finite": json_f64(v)}),
                    RadialVerdict::Infinite => serde_json::json!("+inf"),
                    RadialVerdict::Undecided { oscillation } =>
                        serde_json::json!({"undecided_oscillation": oscillation}),
                },
                "tail_oscillation": json_f64(probe.tail_oscillation),
            }));
        }
        let radial_artifact = format!("radial.{}", ctx.format.extension());
        crate::output::write_atomic(
            &ctx.out_dir.join(&radial_artifact),
            &radial_table.render(ctx.format, &ctx.cfg.hash),
        )?;
        outputs.push(radial_artifact);
    }

    RunLog {
        command: "envelope",
        config_hash: ctx.cfg.hash.clone(),
        seed: ctx.cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        format: ctx.format,
        outputs,
        summary: serde_json::json!({
            "resolution": spec.resolution,
            "laminate_depth": spec.laminate_depth,
            "points": summaries,
            "radial": verdicts,
        }),
    }
    .write(ctx.out_dir)?;
    Ok(())
}
