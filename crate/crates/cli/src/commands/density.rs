//! `density`: tabulates the extended-real density (and its truncations) over
//! the configured gradient list, one row per coefficient cell and gradient.

use super::Ctx;
use crate::config::matrix_from_spec;
use crate::errors::AppError;
use crate::output::{json_f64, Cell, RunLog, Table};
use homcell_core::integrand::{TruncatedIntegrand, TruncationSchedule};

pub fn run(ctx: &Ctx) -> Result<(), AppError> {
    let spec = ctx
        .cfg
        .run
        .density
        .as_ref()
        .ok_or_else(|| AppError::config("config is missing the `density` section"))?;
    let w = &ctx.cfg.integrand;
    let (m, d) = w.shape();

    let mut xis = Vec::with_capacity(spec.xi_list.len());
    for spec_xi in &spec.xi_list {
        let xi = matrix_from_spec(spec_xi)?;
        if xi.shape() != (m, d) {
            return Err(AppError::config(format!(
                "gradient shape {:?} does not match the integrand shape {:?}",
                xi.shape(),
                (m, d)
            )));
        }
        xis.push(xi);
    }

    let schedule = TruncationSchedule::Dyadic;
    let truncations: Vec<TruncatedIntegrand> = spec
        .truncation_indices
        .iter()
        .map(|&n| TruncatedIntegrand::new(w, &schedule, n).map_err(AppError::from))
        .collect::<Result<_, _>>()?;

    let mut names: Vec<String> = (0..d).map(|k| format!("x_{k}")).collect();
    for i in 0..m {
        for j in 0..d {
            names.push(format!("xi_{i}{j}"));
        }
    }
    names.push("W".to_string());
    for wn in &truncations {
        names.push(format!("W_{}", wn.index()));
    }

    let mut table = Table::new(names);
    let mut monotone_violations = 0usize;
    for x in w.coefficient().cell_centers() {
        for xi in &xis {
            let mut row = Vec::new();
            for v in &x {
                row.push(Cell::Float(*v));
            }
            for v in xi.flatten() {
                row.push(Cell::Float(v));
            }
            let full = w.eval(&x, xi);
            row.push(Cell::Float(full));
            for wn in &truncations {
                let v = wn.eval(&x, xi);
                if v > full + 1e-12 {
                    monotone_violations += 1;
                }
                row.push(Cell::Float(v));
            }
            table.push(row);
        }
    }

    let artifact = format!("density.{}", ctx.format.extension());
    crate::output::write_atomic(
        &ctx.out_dir.join(&artifact),
        &table.render(ctx.format, &ctx.cfg.hash),
    )?;

    RunLog {
        command: "density",
        config_hash: ctx.cfg.hash.clone(),
        seed: ctx.cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        format: ctx.format,
        outputs: vec![artifact],
        summary: serde_json::json!({
            "rows": table.rows.len(),
            "gradients": xis.len(),
            "truncation_indices": spec.truncation_indices,
            "truncation_above_full_violations": monotone_violations,
            "growth_constants": truncations
                .iter()
                .map(|t| json_f64(t.growth_constant()))
                .collect::<Vec<_>>(),
        }),
    }
    .write(ctx.out_dir)?;
    Ok(())
}
