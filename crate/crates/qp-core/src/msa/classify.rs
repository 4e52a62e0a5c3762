//! Site classification and case selection.

use super::{CaseTag, MsaError, MsaRun, SignedSites};
use crate::lattice::HalfLatticePoint;
use crate::msa::schedule::{StageScale, ThresholdExponents};
use crate::operator::OperatorParams;
use crate::torus::torus_norm_c;
use num_complex::Complex64;

/// `Q_s^± = {k ∈ P_s : ‖θ + k·ω ± θ_s‖ < δ_s}` and the widened variant at
/// threshold `δ_s^{q̃}`. Margins are reported for every member.
pub fn classify_sites(
    sites: &[HalfLatticePoint],
    model: &OperatorParams,
    theta_s: Complex64,
    scale: &StageScale,
    exps: &ThresholdExponents,
) -> (SignedSites, SignedSites, f64) {
    let delta = scale.delta;
    let widened_threshold = scale.widened_threshold(exps);
    let mut singular = SignedSites::default();
    let mut widened = SignedSites::default();
    for k in sites {
        let phase = Complex64::new(model.phase(k), 0.0);
        let plus = torus_norm_c(phase + theta_s);
        let minus = torus_norm_c(phase - theta_s);
        if plus < delta {
            singular.plus.push((k.clone(), plus));
        }
        if minus < delta {
            singular.minus.push((k.clone(), minus));
        }
        if plus < widened_threshold {
            widened.plus.push((k.clone(), plus));
        }
        if minus < widened_threshold {
            widened.minus.push((k.clone(), minus));
        }
    }
    (singular, widened, widened_threshold)
}

/// Outcome of case selection for a stage transition.
#[derive(Debug, Clone)]
pub struct CaseSelection {
    pub case: CaseTag,
    /// l_s (zero in the separated case).
    pub shift: HalfLatticePoint,
    /// The paired sites (i_s, j_s) in the paired case.
    pub pair: Option<(HalfLatticePoint, HalfLatticePoint)>,
    /// `(dist(Q̃^-, Q^+), dist(Q̃^+, Q^-))`.
    pub distances: (f64, f64),
}

/// Separated vs paired: `dist(Q̃_s^-, Q_s^+) > 100 N_{s+1}^c` selects C1.
/// Empty sets give distance `+∞` and hence C1. In the paired case the
/// minimal-distance pair is chosen, ties broken lexicographically.
pub fn select_case(run: &MsaRun, next_scale: &StageScale) -> Result<CaseSelection, MsaError> {
    let state = run.states.last().expect("stage 0 present");
    let d = run.model.d;
    let q_plus = state.singular.plus_region(d, &state.parity);
    let q_minus = state.singular.minus_region(d, &state.parity);
    let wq_plus = state.widened.plus_region(d, &state.parity);
    let wq_minus = state.widened.minus_region(d, &state.parity);
    let dist_mp = wq_minus.dist(&q_plus);
    let dist_pm = wq_plus.dist(&q_minus);
    let threshold = run.scale.exponents.pair_factor * next_scale.size.powf(run.scale.c);
    if dist_mp > threshold {
        return Ok(CaseSelection {
            case: CaseTag::C1,
            shift: HalfLatticePoint::zero(d),
            pair: None,
            distances: (dist_mp, dist_pm),
        });
    }
    // paired: lexicographically smallest (i, j) among minimal-distance pairs
    let mut best: Option<(f64, HalfLatticePoint, HalfLatticePoint)> = None;
    for (i, _) in &state.singular.plus {
        for (j, _) in &state.widened.minus {
            let dist = i.dist(j);
            let better = match &best {
                None => true,
                Some((bd, bi, bj)) => {
                    dist < *bd || (dist == *bd && (i, j) < (&bi.clone(), &bj.clone()))
                }
            };
            if better {
                best = Some((dist, i.clone(), j.clone()));
            }
        }
    }
    let (_, i_s, j_s) = best.expect("paired case implies nonempty sets");
    let shift = i_s.sub(&j_s);
    if !shift.is_integer() {
        return Err(MsaError::NonIntegerShift);
    }
    Ok(CaseSelection {
        case: CaseTag::C2,
        shift,
        pair: Some((i_s, j_s)),
        distances: (dist_mp, dist_pm),
    })
}

/// `P_{s+1}`: the singular set itself in the separated case; the mirror
/// midpoints `{o + l_s/2 : o ∈ Q_s^- ∪ (Q_s^+ - l_s)}` in the paired case.
pub fn build_next_sites(
    run: &MsaRun,
    selection: &CaseSelection,
) -> Result<Vec<HalfLatticePoint>, MsaError> {
    let state = run.states.last().expect("stage 0 present");
    let mut sites: Vec<HalfLatticePoint> = match selection.case {
        CaseTag::C1 => state.singular.all_points(),
        CaseTag::C2 => {
            let shift = &selection.shift;
            let mut mirrors: Vec<HalfLatticePoint> = Vec::new();
            for (o, _) in &state.singular.minus {
                mirrors.push(o.clone());
            }
            for (q, _) in &state.singular.plus {
                mirrors.push(q.sub(shift));
            }
            mirrors.sort();
            mirrors.dedup();
            let mut midpoints = Vec::with_capacity(mirrors.len());
            for o in mirrors {
                let o_star = o.add(shift);
                midpoints.push(o.midpoint(&o_star)?);
            }
            midpoints.sort();
            midpoints.dedup();
            midpoints
        }
    };
    sites.sort();
    Ok(sites)
}
