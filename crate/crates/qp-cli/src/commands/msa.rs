use super::write_artifact;
use crate::config::ExperimentConfig;
use anyhow::{anyhow, Context, Result};
use qp_core::msa::{invariants, state_io, MsaError, MsaRun};
use qp_core::report::{fmt_f64, to_json_17};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(
    out: &Path,
    cfg: &ExperimentConfig,
    stages_override: Option<u32>,
    window_override: Option<f64>,
) -> Result<bool> {
    let section = cfg.msa.as_ref().ok_or_else(|| anyhow!("msa section missing"))?;
    let schedule = cfg
        .schedule
        .as_ref()
        .ok_or_else(|| anyhow!("schedule section missing"))?;
    let stages = stages_override.unwrap_or(section.stages);
    let window = window_override.unwrap_or(section.window);
    let model = cfg.model.params();
    let scale = schedule.scale_params(model.eps)?;
    let mut run = MsaRun::init(model, scale, window, stages)?;
    let mut halted: Option<String> = None;
    let mut transitions = Vec::new();
    for _ in 0..stages {
        match run.advance() {
            Ok(t) => {
                println!(
                    "stage {} -> {}: case {:?}, theta = {:.12} + {:.3e} i",
                    t.from_stage,
                    t.from_stage + 1,
                    t.case,
                    t.theta_next.re,
                    t.theta_next.im
                );
                transitions.push(t);
            }
            Err(MsaError::NoSites(s)) => {
                // an empty singular set ends the induction: diagnostic, not
                // an error (the window sees no further resonances)
                println!("stage {s}: empty singular set, induction stops");
                halted = Some(format!("no-sites at stage {s}"));
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let checks = invariants::verify_run(&run);
    let mut csv = String::from("stage,check,pass,detail\n");
    let mut all_pass = true;
    for c in &checks {
        all_pass &= c.pass;
        writeln!(csv, "{},{},{},\"{}\"", c.stage, c.name, c.pass, c.detail)?;
    }
    // per-stage margins
    let mut margins = String::from("stage,delta,size,gamma_rate,theta_re,theta_im,symmetry_defect,schur_row_sum\n");
    for st in &run.states {
        let (defect, row_sum) = st
            .root_track
            .as_ref()
            .map(|t| (t.symmetry_defect, t.schur_row_sum))
            .unwrap_or((0.0, 0.0));
        writeln!(
            margins,
            "{},{},{},{},{},{},{},{}",
            st.stage,
            fmt_f64(st.delta),
            st.size,
            fmt_f64(st.gamma_rate),
            fmt_f64(st.theta.re),
            fmt_f64(st.theta.im),
            fmt_f64(defect),
            fmt_f64(row_sum)
        )?;
    }
    if let Some(h) = &halted {
        writeln!(margins, "# halted: {h}")?;
    }
    // the two signed-set distances of each case decision; the mirrored
    // equality only holds on the infinite lattice, so both are reported and
    // nothing is asserted
    let mut cases = String::from("from_stage,case,shift,dist_minus_plus,dist_plus_minus\n");
    for t in &transitions {
        writeln!(
            cases,
            "{},{:?},{},{},{}",
            t.from_stage,
            t.case,
            t.shift,
            fmt_f64(t.case_distances.0),
            fmt_f64(t.case_distances.1)
        )?;
    }
    write_artifact(out, "msa_cases.csv", &cases)?;
    write_artifact(out, "msa_invariants.csv", &csv)?;
    write_artifact(out, "msa_margins.csv", &margins)?;
    let dump = state_io::dump_run(&run);
    write_artifact(out, "msa_states.json", &to_json_17(&dump)?)?;
    println!(
        "msa: {} stages, {} invariant checks, {}",
        run.top_stage(),
        checks.len(),
        if all_pass { "all pass" } else { "FAILURES" }
    );
    Ok(all_pass)
}

pub fn verify(out: &Path, dump_path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(dump_path)
        .with_context(|| format!("reading dump {}", dump_path.display()))?;
    let dump: state_io::RunDump = serde_json::from_str(&text).context("parsing state dump")?;
    let checks = state_io::verify_dump(&dump)?;
    let mut csv = String::from("stage,check,pass,detail\n");
    let mut all_pass = true;
    for c in &checks {
        all_pass &= c.pass;
        writeln!(csv, "{},{},{},\"{}\"", c.stage, c.name, c.pass, c.detail)?;
    }
    write_artifact(out, "msa_verify.csv", &csv)?;
    println!(
        "msa verify: {} checks, {}",
        checks.len(),
        if all_pass { "all pass" } else { "FAILURES" }
    );
    Ok(all_pass)
}
