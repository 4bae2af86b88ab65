//! `hyper`: the barrier hyperelastic demo. Emits the homogenized density
//! over a polar grid around the identity, blow-up ladders with determinants,
//! and the hypothesis certification report of the shifted integrand.

use super::Ctx;
use crate::errors::AppError;
use crate::output::{columns, json_f64, Cell, RunLog, Table};
use homcell_core::envelope::RadialLadderCfg;
use homcell_core::hyper;
use homcell_core::integrand::{assumption_report, boundary_directions, SampleConfig, TruncationSchedule};
use homcell_core::Matrix;
use rayon::prelude::*;

pub fn run(ctx: &Ctx) -> Result<(), AppError> {
    let spec = ctx
        .cfg
        .run
        .hyper
        .as_ref()
        .ok_or_else(|| AppError::config("config is missing the `hyper` section"))?;
    let density = spec.density()?;
    let coeff = ctx.cfg.integrand.coefficient().clone();
    if coeff.dimension() != spec.dim {
        return Err(AppError::config(
            "hyper.dim must match the coefficient dimension",
        ));
    }
    let radial_cfg = spec
        .radial
        .as_ref()
        .map(|r| r.build())
        .unwrap_or_else(RadialLadderCfg::default);
    let whom_cfg = spec.whom_cfg(&ctx.cfg.run.solver, ctx.cfg.seed);

    // Unit directions in matrix space around the identity.
    let unit_ball = homcell_core::ConstraintSet::ball(spec.dim, spec.dim, 1.0)?;
    let dirs: Vec<Matrix> = boundary_directions(&unit_ball, spec.polar_directions, ctx.cfg.seed)
        .into_iter()
        .take(spec.polar_directions)
        .collect();
    let identity = Matrix::identity(spec.dim);

    // Homogenized density over the polar grid.
    let tasks: Vec<(usize, usize)> = (0..dirs.len())
        .flat_map(|di| (0..spec.polar_radii.len()).map(move |ri| (di, ri)))
        .collect();
    let values: Vec<Result<f64, AppError>> = tasks
        .par_iter()
        .map(|(di, ri)| {
            let xi = identity + dirs[*di].scale(spec.polar_radii[*ri]);
            hyper::whom_hyper(&coeff, &density, &xi, &whom_cfg).map_err(AppError::from)
        })
        .collect();
    let mut whom_table = Table::new(columns(&["direction", "radius", "value"]));
    let mut finite_inside = true;
    for ((di, ri), value) in tasks.iter().zip(values) {
        let value = value?;
        if spec.polar_radii[*ri] < 1.0 && !value.is_finite() {
            finite_inside = false;
        }
        whom_table.push(vec![
            Cell::Int(*di as i64),
            Cell::Float(spec.polar_radii[*ri]),
            Cell::Float(value),
        ]);
    }
    let whom_artifact = format!("whom_polar.{}", ctx.format.extension());
    crate::output::write_atomic(
        &ctx.out_dir.join(&whom_artifact),
        &whom_table.render(ctx.format, &ctx.cfg.hash),
    )?;

    // Blow-up ladders with determinants.
    let mut blowup_table = Table::new(columns(&["direction", "t", "value", "det"]));
    let mut verdicts = Vec::new();
    for (di, dir) in dirs.iter().enumerate() {
        let probe = hyper::blowup_probe(&coeff, &density, dir, &radial_cfg)?;
        for k in 0..probe.ts.len() {
            blowup_table.push(vec![
                Cell::Int(di as i64),
                Cell::Float(probe.ts[k]),
                Cell::Float(probe.values[k]),
                Cell::Float(probe.dets[k]),
            ]);
        }
        verdicts.push(serde_json::json!({
            "direction": dir.flatten(),
            "verdict": format!("{:?}", probe.verdict),
            "min_det": probe.dets.iter().copied().fold(f64::INFINITY, f64::min),
        }));
    }
    let blowup_artifact = format!("blowup.{}", ctx.format.extension());
    crate::output::write_atomic(
        &ctx.out_dir.join(&blowup_artifact),
        &blowup_table.render(ctx.format, &ctx.cfg.hash),
    )?;

    // Hypothesis certification of the shifted integrand.
    let w0 = hyper::shifted_integrand(coeff, &density)?;
    let report = assumption_report(&w0, &TruncationSchedule::Dyadic, &SampleConfig::default())?;
    let hypotheses = serde_json::json!({
        "config_hash": ctx.cfg.hash,
        "h1_pass": report.h1_pass,
        "h2_pass": report.h2_pass,
        "h3_pass": report.h3_pass,
        "samples_per_row": report.samples_per_row,
        "modulus": report.modulus.iter().map(|r| serde_json::json!({
            "eta": r.eta,
            "sup_increase": json_f64(r.sup_increase),
        })).collect::<Vec<_>>(),
        "local_bounds": report.local_bounds.iter().map(|r| serde_json::json!({
            "t": r.t,
            "sampled_sup": json_f64(r.sampled_sup),
            "bound": json_f64(r.bound),
        })).collect::<Vec<_>>(),
        "shells": report.shells.iter().map(|r| serde_json::json!({
            "n": r.n,
            "t_n": r.t_n,
            "inf_sampled": json_f64(r.inf_sampled),
            "lower_bound": json_f64(r.lower_bound),
            "pass": r.pass,
        })).collect::<Vec<_>>(),
    });
    let mut hyp_text = serde_json::to_string_pretty(&hypotheses).expect("serializable report");
    hyp_text.push('\n');
    crate::output::write_atomic(&ctx.out_dir.join("hypotheses.json"), &hyp_text)?;

    RunLog {
        command: "hyper",
        config_hash: ctx.cfg.hash.clone(),
        seed: ctx.cfg.seed,
        version: env!("CARGO_PKG_VERSION"),
        format: ctx.format,
        outputs: vec![
            whom_artifact,
            blowup_artifact,
            "hypotheses.json".to_string(),
        ],
        summary: serde_json::json!({
            "dim": spec.dim,
            "alpha": spec.alpha,
            "cbar": spec.cbar,
            "finite_inside_ball": finite_inside,
            "hypotheses_pass": report.all_pass(),
            "blowup": verdicts,
        }),
    }
    .write(ctx.out_dir)?;
    Ok(())
}
