//! `sweep`: per-rung minimized energies against the homogenized prediction,
//! with tiled recovery energies, in long format.

use super::Ctx;
use crate::config::matrix_from_spec;
use crate::errors::AppError;
use crate::output::{columns, json_f64, Cell, RunLog, Table};
use homcell_core::sweep;

pub fn run(ctx: &Ctx) -> Result<(), AppError> {
    let spec = ctx
        .cfg
        .run
        .sweep
        .as_ref()
        .ok_or_else(|| AppError::config("config is missing the `sweep` section"))?;
    let w = &ctx.cfg.integrand;
    let affine = matrix_from_spec(&spec.affine_data)?;
    let cfg = spec.build(ctx.cfg.run.solver.build(ctx.cfg.seed));
    let report = sweep::sweep(w, &affine, &spec.ladder, &cfg)?;

    let mut table = Table::new(columns(&["eps", "energy", "recovery", "prediction", "gap"]));
    for row in &report.rows {
        table.push(vec![
            Cell::Float(row.eps),
            Cell::Float(row.energy),
            Cell::Float(row.recovery),
            Cell::Float(report.prediction),
            Cell::Float(row.gap),
        ]);
    }
    let artifact = format!("sweep.{}", ctx.format.extension());
    crate::output::write_atomic(
        &ctx.out_dir.join(&artifact),
        &table.render(ctx.format, &ctx.cfg.hash),
    )?;

    RunLog {
        command: "sweep",
        config_hash: ctx.cfg.hash.clone(),
        seed: ctx.cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        format: ctx.format,
        outputs: vec![artifact],
        summary: serde_json::json!({
            "prediction": json_f64(report.prediction),
            "corrector_n": report.corrector_n,
            "rows": report.rows.iter().map(|r| serde_json::json!({
                "eps": r.eps,
                "energy": json_f64(r.energy),
                "recovery": json_f64(r.recovery),
                "gap": json_f64(r.gap),
                "lower_bound_ok": r.lower_bound_ok,
                "sandwich_ok": r.sandwich_ok,
            })).collect::<Vec<_>>(),
        }),
    }
    .write(ctx.out_dir)?;
    Ok(())
}
