use super::write_artifact;
use crate::config::ExperimentConfig;
use anyhow::{anyhow, Result};
use qp_core::green::{check_zero_good, fit_decay, invert, neumann_certificate};
use qp_core::lattice::{HalfLatticePoint, Region};
use qp_core::msa::theta0_of_energy;
use qp_core::operator::OperatorInstance;
use qp_core::report::{fmt_f64, to_json_17, ExperimentReport};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Serialize)]
struct GreenSummary {
    window: u64,
    zero_good: bool,
    resonant_sites: usize,
    delta0: f64,
    inverse_norm: f64,
    sigma_min: f64,
    residual: f64,
    fitted_rate: Option<f64>,
    decay_threshold: f64,
    certificate_norm_bound: f64,
    certificate_rate: f64,
    certificate_status: String,
}

pub fn run(out: &Path, cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<bool> {
    let section = cfg
        .green
        .as_ref()
        .ok_or_else(|| anyhow!("green section missing"))?;
    let params = cfg.model.params();
    let d = params.d;
    let region = Region::integer_cube(section.window as f64, &HalfLatticePoint::zero(d));
    let op = OperatorInstance::assemble(&region, &params)?;
    let theta0 = theta0_of_energy(params.energy)?;
    let delta0 = section.delta0.unwrap_or_else(|| params.eps.powf(0.1));

    let zg = check_zero_good(&region, &params, theta0, delta0);
    let g = invert(&op, None)?;
    let fit = fit_decay(&g, section.threshold_radius, params.eps).ok();

    // entrywise CSV: |G(x,y)| against the zero-scale decay bound
    let gamma0 = 0.5 * params.eps.ln().abs();
    let mut csv = String::from("x,y,abs_g,bound\n");
    for (i, x) in g.points.iter().enumerate() {
        for (j, y) in g.points.iter().enumerate() {
            if j <= i {
                continue;
            }
            let bound = (-gamma0 * x.dist_l1(y)).exp();
            writeln!(
                csv,
                "{},{},{},{}",
                x,
                y,
                fmt_f64(g.entries[(i, j)].abs()),
                fmt_f64(bound)
            )?;
        }
    }
    write_artifact(out, "green.csv", &csv)?;

    let certificate_status = if !zg.is_good {
        "not-zero-good".to_string()
    } else if section.verify {
        match neumann_certificate(&op, theta0, delta0, true) {
            Ok(_) => "verified".to_string(),
            Err(e) => format!("violated: {e}"),
        }
    } else {
        "a-priori".to_string()
    };
    let all_pass = certificate_status == "verified" || certificate_status == "a-priori";
    let summary = GreenSummary {
        window: section.window,
        zero_good: zg.is_good,
        resonant_sites: zg.witnesses.len(),
        delta0,
        inverse_norm: g.op_norm,
        sigma_min: g.sigma_min,
        residual: g.residual,
        fitted_rate: fit.as_ref().map(|f| f.rate),
        decay_threshold: section.threshold_radius,
        certificate_norm_bound: delta0.powi(-2),
        certificate_rate: gamma0,
        certificate_status,
    };
    let report = ExperimentReport::new("green", seed_override.unwrap_or(cfg.seed), cfg.echo(), summary);
    write_artifact(out, "green.json", &to_json_17(&report)?)?;
    Ok(all_pass)
}
