use super::write_artifact;
use crate::config::ExperimentConfig;
use anyhow::{anyhow, Result};
use qp_core::ids::{holder_scan, IdsScan};
use qp_core::report::{fmt_f64, to_json_17, ExperimentReport};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Serialize)]
struct IdsSummary {
    cells: usize,
    all_pass: bool,
    min_fitted_exponent: f64,
    worst_cell: Option<(f64, f64)>,
}

pub fn run(out: &Path, cfg: &ExperimentConfig, seed_override: Option<u64>) -> Result<bool> {
    let section = cfg.ids.as_ref().ok_or_else(|| anyhow!("ids section missing"))?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let scan = IdsScan {
        n: section.n,
        eps: cfg.model.eps,
        omega: cfg.model.omega.clone(),
        theta_samples: section.theta_samples,
        energy_grid: section.energy_grid.values(),
        etas: cfg.normalized_etas(),
        mu: section.mu,
        seed,
    };
    let report = holder_scan(&scan)?;
    let mut csv = String::from("theta,E,eta,count,density,bound,pass\n");
    for c in &report.cells {
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            fmt_f64(c.theta),
            fmt_f64(c.energy),
            fmt_f64(c.eta),
            c.count,
            fmt_f64(c.density),
            fmt_f64(c.bound),
            c.pass
        )?;
    }
    write_artifact(out, "ids.csv", &csv)?;
    let summary = IdsSummary {
        cells: report.cells.len(),
        all_pass: report.all_pass,
        min_fitted_exponent: report.min_exponent,
        worst_cell: report.worst_cell,
    };
    let wrapped = ExperimentReport::new("ids", seed, cfg.echo(), summary);
    write_artifact(out, "ids.json", &to_json_17(&wrapped)?)?;
    println!(
        "ids: {} cells, min fitted exponent {:.4}, {}",
        report.cells.len(),
        report.min_exponent,
        if report.all_pass { "all pass" } else { "FAILURES" }
    );
    Ok(report.all_pass)
}
