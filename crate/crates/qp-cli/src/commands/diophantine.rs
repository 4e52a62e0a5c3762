use super::write_artifact;
use anyhow::Result;
use qp_core::diophantine::{verify_frequency, FrequencyClass};
use qp_core::report::to_json_17;
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct Report {
    pass: bool,
    worst_n: Vec<i64>,
    margin: f64,
    max_admissible_gamma: f64,
    omega: Vec<f64>,
    tau: f64,
    gamma: f64,
    radius: u64,
    /// The verified membership record, present on pass.
    class: Option<FrequencyClass>,
}

pub fn run(out: &Path, omega: &[f64], tau: f64, gamma: f64, radius: u64) -> Result<bool> {
    let scan = verify_frequency(omega, gamma, tau, radius);
    let class = scan.pass.then(|| FrequencyClass {
        omega: omega.to_vec(),
        tau,
        gamma,
        verified_radius: radius as f64,
    });
    let report = Report {
        pass: scan.pass,
        worst_n: scan.worst_n.clone(),
        margin: scan.margin,
        max_admissible_gamma: scan.max_admissible_gamma,
        omega: omega.to_vec(),
        tau,
        gamma,
        radius,
        class,
    };
    write_artifact(out, "diophantine.json", &to_json_17(&report)?)?;
    println!(
        "diophantine: {} (worst n = {:?}, max admissible gamma = {:.6e})",
        if scan.pass { "pass" } else { "fail" },
        scan.worst_n,
        scan.max_admissible_gamma
    );
    Ok(scan.pass)
}
