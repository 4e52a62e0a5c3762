//! Good-set verification and region enlargement.

use super::{MsaError, MsaRun};
use crate::lattice::Region;

#[derive(Debug, Clone)]
pub struct GoodVerdict {
    pub is_good: bool,
    /// Human-readable description of the violated clause.
    pub witness: Option<String>,
}

/// Check the two clauses of s-goodness against the full state history:
///
/// 1. for `s' < s`: `k' ∈ Q_{s'}, Ω̃_{k'}^{s'} ⊂ Λ, Ω̃_{k'}^{s'} ⊂ Ω_k^{s'+1}
///    ⇒ Ω̃_k^{s'+1} ⊂ Λ`;
/// 2. `{k ∈ P_s : Ω̃_k^s ⊂ Λ} ∩ Q_s = ∅`.
///
/// Stage-0 blocks are the singletons `{k}`. Errors when the window cannot
/// decide (Λ's collar must stay inside the window).
pub fn verify_good_set(region: &Region, run: &MsaRun) -> Result<GoodVerdict, MsaError> {
    verify_good_set_at_stage(region, run, run.top_stage())
}

/// Same check against a prefix of the history: s-goodness for `s = stage`.
pub fn verify_good_set_at_stage(
    region: &Region,
    run: &MsaRun,
    stage: u32,
) -> Result<GoodVerdict, MsaError> {
    let s = stage as usize;
    // Decidability: sites outside the window are unknown, so every site
    // whose block could interact with Λ must lie inside it. The reach of
    // that interaction is the largest block extent over the history.
    let collar = decidability_collar(run);
    for p in region.iter() {
        if p.norm() + collar > run.window_radius {
            return Err(MsaError::WindowInsufficient(format!(
                "point {p} is within the {collar:.1}-collar of the window edge"
            )));
        }
    }

    // clause 1
    for sp in 0..s {
        let q_prev = run.states[sp].singular.all_points();
        let next_state = &run.states[sp + 1];
        let next_blocks = next_state.blocks.as_ref().expect("stage ≥ 1 has blocks");
        for k_prime in &q_prev {
            let outer_prev = if sp == 0 {
                Region::from_points([k_prime.clone()]).map_err(MsaError::Lattice)?
            } else {
                run.states[sp]
                    .blocks
                    .as_ref()
                    .expect("stage ≥ 1 has blocks")
                    .outer_at(k_prime)
            };
            if !region.contains_region(&outer_prev) {
                continue;
            }
            for k in &next_state.sites {
                if next_blocks.inner_at(k).contains_region(&outer_prev)
                    && !region.contains_region(&next_blocks.outer_at(k))
                {
                    return Ok(GoodVerdict {
                        is_good: false,
                        witness: Some(format!(
                            "clause 1 at stage {sp}: block of {k_prime} forces the stage-{} block at {k}",
                            sp + 1
                        )),
                    });
                }
            }
        }
    }

    // clause 2
    let top = &run.states[s];
    let q_top = top.singular.all_points();
    for k in &top.sites {
        let outer = if s == 0 {
            Region::from_points([k.clone()]).map_err(MsaError::Lattice)?
        } else {
            top.blocks
                .as_ref()
                .expect("stage ≥ 1 has blocks")
                .outer_at(k)
        };
        if region.contains_region(&outer) && q_top.contains(k) {
            return Ok(GoodVerdict {
                is_good: false,
                witness: Some(format!(
                    "clause 2: singular site {k} has its stage-{s} block inside the region"
                )),
            });
        }
    }
    Ok(GoodVerdict {
        is_good: true,
        witness: None,
    })
}

/// Max sup-norm extent of any stored outer-block translate; the reach at
/// which an unknown outside site could still affect a goodness decision.
pub fn decidability_collar(run: &MsaRun) -> f64 {
    let mut collar = 0.0f64;
    for state in run.states.iter().skip(1) {
        if let Some(blocks) = &state.blocks {
            for p in blocks.outer.iter() {
                collar = collar.max(p.norm());
            }
        }
    }
    collar
}

/// Close a seed region under "touching `Ω̃_k^{s'}` absorbs it", for all
/// stages `1 ≤ s' ≤ s`. The result stays within the `50 N_s^{c²}` collar of
/// the seed or the call fails with collar-overflow.
pub fn enlarge_region(seed: &Region, run: &MsaRun) -> Result<Region, MsaError> {
    let s = run.top_stage() as usize;
    let c = run.scale.c;
    let n_s = run.schedule.stages[s].size;
    let collar = 50.0 * n_s.powf(c * c);
    let mut result = seed.clone();
    loop {
        let mut grew = false;
        for sp in 1..=s {
            let state = &run.states[sp];
            let blocks = state.blocks.as_ref().expect("stage ≥ 1 has blocks");
            for k in &state.sites {
                let outer = blocks.outer_at(k);
                if outer.intersects(&result) && !result.contains_region(&outer) {
                    result = result.union(&outer)?;
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
        // collar check inside the loop so runaway growth stops early
        for p in result.iter() {
            if seed.dist_point(p) > collar {
                return Err(MsaError::CollarOverflow);
            }
        }
    }
    for p in result.iter() {
        if seed.dist_point(p) > collar {
            return Err(MsaError::CollarOverflow);
        }
    }
    Ok(result)
}
