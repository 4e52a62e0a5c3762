use super::write_artifact;
use crate::config::ExperimentConfig;
use anyhow::{anyhow, Result};
use qp_core::diophantine::verify_phase_condition;
use qp_core::lattice::{HalfLatticePoint, Region};
use qp_core::localization::{default_threshold, eigensolve, localization_report};
use qp_core::operator::OperatorInstance;
use qp_core::report::{fmt_f64, to_json_17, ExperimentReport};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Serialize)]
struct LocalizeSummary {
    n: u64,
    eigenpairs: usize,
    threshold: f64,
    pass_fraction: f64,
    boundary_excluded: usize,
    low_rate_interior: usize,
    low_rate_boundary: usize,
    phase_condition_pass: Option<bool>,
    phase_violations: usize,
    rate_quantiles: Vec<(f64, f64)>,
    all_pass: bool,
}

pub fn run(out: &Path, cfg: &ExperimentConfig) -> Result<bool> {
    let section = cfg
        .localize
        .as_ref()
        .ok_or_else(|| anyhow!("localize section missing"))?;
    let params = cfg.model.params();
    let (r_lo, r_hi) = section.phase_range;
    let phase = verify_phase_condition(params.theta, &params.omega, section.tau1, r_lo, r_hi);
    if !phase.pass {
        log::warn!(
            "phase-condition: fail ({} violations in [{r_lo}, {r_hi}])",
            phase.violations.len()
        );
    }
    let region = Region::integer_cube(section.n as f64, &HalfLatticePoint::zero(params.d));
    let op = OperatorInstance::assemble(&region, &params)?;
    let threshold = section
        .threshold
        .unwrap_or_else(|| default_threshold(params.eps));
    let report = localization_report(
        &op,
        section.n as f64,
        threshold,
        section.r_min,
        Some(phase.pass),
    )?;

    let mut csv = String::from("index,eigenvalue,center,rate,boundary,pass\n");
    for row in &report.rows {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.index,
            fmt_f64(row.eigenvalue),
            row.center,
            fmt_f64(row.rate),
            row.boundary,
            row.pass
        )?;
    }
    write_artifact(out, "localize.csv", &csv)?;

    if section.profile_dump {
        // per-vector profiles (‖n - center‖, log|v(n)|) for plotting
        let pairs = eigensolve(&op)?;
        let mut profile = String::from("index,dist,log_abs_v\n");
        for row in &report.rows {
            let col = pairs.vectors.column(row.index);
            for (i, p) in pairs.points.iter().enumerate() {
                let a = col[i].abs();
                if a > 0.0 {
                    writeln!(
                        profile,
                        "{},{},{}",
                        row.index,
                        fmt_f64(p.dist(&row.center)),
                        fmt_f64(a.ln())
                    )?;
                }
            }
        }
        write_artifact(out, "localize_profiles.csv", &profile)?;
    }

    let all_pass = report.pass_fraction >= 0.9 && phase.pass;
    let summary = LocalizeSummary {
        n: section.n,
        eigenpairs: report.rows.len(),
        threshold,
        pass_fraction: report.pass_fraction,
        boundary_excluded: report.boundary_excluded,
        low_rate_interior: report.low_rate_interior,
        low_rate_boundary: report.low_rate_boundary,
        phase_condition_pass: report.phase_condition_pass,
        phase_violations: phase.violations.len(),
        rate_quantiles: report.rate_quantiles.clone(),
        all_pass,
    };
    let wrapped = ExperimentReport::new("localize", cfg.seed, cfg.echo(), summary);
    write_artifact(out, "localize.json", &to_json_17(&wrapped)?)?;
    println!(
        "localize: {} pairs, pass fraction {:.3} at threshold {:.4}, phase condition {}",
        report.rows.len(),
        report.pass_fraction,
        threshold,
        if phase.pass { "pass" } else { "fail" }
    );
    Ok(all_pass)
}
