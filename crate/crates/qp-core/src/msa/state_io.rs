//! Versioned JSON dump of a run, and its verifier.
//!
//! The dump is the wire format between `msa run` and `msa verify`: the
//! verifier reconstructs the states and re-runs the geometric invariant
//! battery, plus a root-consistency probe of each stored θ_s against the
//! block determinant.

use super::invariants::{verify_run, InvariantCheck};
use super::{MsaError, MsaRun, RootTrack, ScaleState, SignedSites, StageBlocks};
use crate::lattice::{HalfLatticePoint, Region};
use crate::linalg::log_det;
use crate::msa::schedule::ScaleParams;
use crate::operator::{complexified, OperatorParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const DUMP_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunDump {
    pub schema_version: u32,
    pub model: OperatorParams,
    pub scale: ScaleParams,
    pub window_radius: f64,
    pub theta0: (f64, f64),
    pub states: Vec<StateDump>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDump {
    pub stage: u32,
    pub delta: f64,
    pub log_delta: f64,
    pub size: u64,
    pub gamma_rate: f64,
    pub theta: (f64, f64),
    pub shifts: Vec<Vec<i64>>,
    pub parity: Vec<u8>,
    /// Doubled coordinates of P_s.
    pub sites: Vec<Vec<i64>>,
    pub singular_plus: Vec<(Vec<i64>, f64)>,
    pub singular_minus: Vec<(Vec<i64>, f64)>,
    pub widened_plus: Vec<(Vec<i64>, f64)>,
    pub widened_minus: Vec<(Vec<i64>, f64)>,
    pub widened_threshold: f64,
    pub inner_translate: Option<Vec<Vec<i64>>>,
    pub outer_translate: Option<Vec<Vec<i64>>>,
    pub core_translate: Option<Vec<Vec<i64>>>,
    pub case_history: Vec<String>,
    pub root_track: Option<RootTrack>,
}

fn dump_points(points: impl IntoIterator<Item = HalfLatticePoint>) -> Vec<Vec<i64>> {
    points.into_iter().map(|p| p.doubled().to_vec()).collect()
}

type TaggedSites = Vec<(Vec<i64>, f64)>;

fn dump_signed(s: &SignedSites) -> (TaggedSites, TaggedSites) {
    (
        s.plus
            .iter()
            .map(|(p, m)| (p.doubled().to_vec(), *m))
            .collect(),
        s.minus
            .iter()
            .map(|(p, m)| (p.doubled().to_vec(), *m))
            .collect(),
    )
}

fn load_points(raw: &[Vec<i64>]) -> Vec<HalfLatticePoint> {
    raw.iter().map(|v| HalfLatticePoint::new(v.clone())).collect()
}

fn load_signed(plus: &[(Vec<i64>, f64)], minus: &[(Vec<i64>, f64)]) -> SignedSites {
    SignedSites {
        plus: plus
            .iter()
            .map(|(v, m)| (HalfLatticePoint::new(v.clone()), *m))
            .collect(),
        minus: minus
            .iter()
            .map(|(v, m)| (HalfLatticePoint::new(v.clone()), *m))
            .collect(),
    }
}

pub fn dump_run(run: &MsaRun) -> RunDump {
    let states = run
        .states
        .iter()
        .map(|st| {
            let (singular_plus, singular_minus) = dump_signed(&st.singular);
            let (widened_plus, widened_minus) = dump_signed(&st.widened);
            StateDump {
                stage: st.stage,
                delta: st.delta,
                log_delta: st.log_delta,
                size: st.size,
                gamma_rate: st.gamma_rate,
                theta: (st.theta.re, st.theta.im),
                shifts: dump_points(st.shifts.iter().cloned()),
                parity: st.parity.clone(),
                sites: dump_points(st.sites.iter().cloned()),
                singular_plus,
                singular_minus,
                widened_plus,
                widened_minus,
                widened_threshold: st.widened_threshold,
                inner_translate: st.blocks.as_ref().map(|b| dump_points(b.inner.iter().cloned())),
                outer_translate: st.blocks.as_ref().map(|b| dump_points(b.outer.iter().cloned())),
                core_translate: st.blocks.as_ref().map(|b| dump_points(b.core.iter().cloned())),
                case_history: st
                    .case_history
                    .iter()
                    .map(|c| format!("{c:?}"))
                    .collect(),
                root_track: st.root_track.clone(),
            }
        })
        .collect();
    RunDump {
        schema_version: DUMP_SCHEMA_VERSION,
        model: run.model.clone(),
        scale: run.scale.clone(),
        window_radius: run.window_radius,
        theta0: (run.theta0.re, run.theta0.im),
        states,
    }
}

/// Rebuild an `MsaRun` from a dump (schedule recomputed from the scale
/// parameters).
pub fn load_run(dump: &RunDump) -> Result<MsaRun, MsaError> {
    let schedule = super::compute_schedule(&dump.scale, (dump.states.len() - 1) as u32)?;
    let states = dump
        .states
        .iter()
        .map(|sd| {
            let blocks = match (&sd.inner_translate, &sd.outer_translate, &sd.core_translate) {
                (Some(i), Some(o), Some(a)) => Some(StageBlocks {
                    inner: Region::from_points(load_points(i)).expect("dump block parity"),
                    outer: Region::from_points(load_points(o)).expect("dump block parity"),
                    core: Region::from_points(load_points(a)).expect("dump block parity"),
                }),
                _ => None,
            };
            ScaleState {
                stage: sd.stage,
                delta: sd.delta,
                log_delta: sd.log_delta,
                size: sd.size,
                gamma_rate: sd.gamma_rate,
                theta: Complex64::new(sd.theta.0, sd.theta.1),
                shifts: load_points(&sd.shifts),
                parity: sd.parity.clone(),
                sites: load_points(&sd.sites),
                singular: load_signed(&sd.singular_plus, &sd.singular_minus),
                widened: load_signed(&sd.widened_plus, &sd.widened_minus),
                widened_threshold: sd.widened_threshold,
                blocks,
                case_history: sd
                    .case_history
                    .iter()
                    .map(|c| match c.as_str() {
                        "C2" => super::CaseTag::C2,
                        _ => super::CaseTag::C1,
                    })
                    .collect(),
                root_track: sd.root_track.clone(),
            }
        })
        .collect();
    Ok(MsaRun {
        model: dump.model.clone(),
        scale: dump.scale.clone(),
        schedule,
        window_radius: dump.window_radius,
        theta0: Complex64::new(dump.theta0.0, dump.theta0.1),
        states,
    })
}

/// Verify a dump: the geometric battery plus a determinant probe of each
/// stored θ_s (`|det M_s(θ_s)|` must be far below the off-resonance value).
pub fn verify_dump(dump: &RunDump) -> Result<Vec<InvariantCheck>, MsaError> {
    let run = load_run(dump)?;
    let mut checks = verify_run(&run);
    for state in run.states.iter().skip(1) {
        let blocks = state.blocks.as_ref().expect("stage ≥ 1 has blocks");
        let at_root = log_det(&complexified(&blocks.outer, &run.model, state.theta));
        let probe_offset = Complex64::new(state.delta.max(1e-8), 0.0);
        let off = log_det(&complexified(&blocks.outer, &run.model, state.theta + probe_offset));
        let pass = at_root.ln_abs < off.ln_abs - 2.0 || at_root.ln_abs == f64::NEG_INFINITY;
        checks.push(InvariantCheck {
            stage: state.stage,
            name: "theta-is-determinant-zero".to_string(),
            pass,
            detail: format!(
                "log|det| at θ: {:.2}, at θ+δ: {:.2}",
                at_root.ln_abs, off.ln_abs
            ),
        });
    }
    Ok(checks)
}
