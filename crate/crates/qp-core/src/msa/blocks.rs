//! Resonant-block construction: the enlargement closure.
//!
//! A block of stage s+1 starts from a cube seed at a reference site and
//! absorbs, level by level `r = 0..s-1`, every cube `Λ_{2N_{s-r}^{c²}}(h)`
//! (`h ∈ H_r = (k₀ - P_{s+1} + P_{s-r}) ∪ (k₀ + P_{s+1} - P_{s-r})`) that
//! touches it, until a fixpoint. The separation of resonant sites keeps the
//! closure inside a `50 N_s^{c²}` collar; leaving the collar is a parameter
//! misconfiguration and reported as closure-overflow. The finished block is
//! symmetric about the reference site and translate-independent, so only the
//! origin-centred translate is stored.

use super::classify::CaseSelection;
use super::schedule::StageScale;
use super::{CaseTag, MsaError, MsaRun, StageBlocks};
use crate::lattice::{HalfLatticePoint, Region};

/// Build the stage-(s+1) blocks from the new site set.
pub fn build_blocks(
    run: &MsaRun,
    new_sites: &[HalfLatticePoint],
    selection: &CaseSelection,
    next_scale: &StageScale,
) -> Result<StageBlocks, MsaError> {
    let s = run.top_stage();
    let next = s + 1;
    let c = run.scale.c;
    let n_next = next_scale.size;
    let (inner_seed, outer_seed) = case_seeds(c, &run.scale.exponents, n_next, selection.case);
    // collar = 50 N_s^{c²}, the sandwich slack of the closure
    let n_s = run.schedule.stages[s as usize].size;
    let collar = 50.0 * n_s.powf(c * c);

    let k0 = new_sites[0].clone();
    let inner = closure(run, &k0, new_sites, inner_seed, collar, next)?;
    let outer = closure(run, &k0, new_sites, outer_seed, collar, next)?;
    let core = core_translate(run, selection)?;

    // window sufficiency: every realized outer block must fit
    let window = run.window(&vec![0u8; run.model.d]);
    for k in new_sites {
        if !window.contains_region(&outer.translate(k)) {
            return Err(MsaError::WindowInsufficient(format!(
                "outer block at {k} leaves the window"
            )));
        }
    }
    Ok(StageBlocks {
        inner,
        outer,
        core,
    })
}

/// The enlargement closure seeded at `Λ_seed(k₀)`, returned as the
/// origin-centred translate `J - k₀`.
fn closure(
    run: &MsaRun,
    k0: &HalfLatticePoint,
    new_sites: &[HalfLatticePoint],
    seed_radius: f64,
    collar: f64,
    next_stage: u32,
) -> Result<Region, MsaError> {
    let d = run.model.d;
    let parity = vec![0u8; d]; // blocks live in Z^d
    let mut j = Region::cube(seed_radius, k0, &parity);
    let bound = Region::cube(seed_radius + collar, k0, &parity);
    let s = next_stage - 1;
    // levels r = 0..s-1 use P_{s-r} (stage ≥ 1 history); stage-0 singleton
    // blocks never enlarge anything
    for r in 0..s {
        let hist_stage = (s - r) as usize;
        let hist_sites = &run.states[hist_stage].sites;
        let cube_radius = 2.0 * run.schedule.stages[hist_stage].size.powf(run.scale.c * run.scale.c);
        // H_r = (k₀ - P_{s+1} + P_{s-r}) ∪ (k₀ + P_{s+1} - P_{s-r})
        let mut centers: Vec<HalfLatticePoint> = Vec::new();
        for p in new_sites {
            for q in hist_sites {
                centers.push(k0.sub(p).add(q));
                centers.push(k0.add(p).sub(q));
            }
        }
        centers.sort();
        centers.dedup();
        let mut rounds = 0usize;
        loop {
            let mut grew = false;
            for h in &centers {
                // quick reject: cube too far from the current set
                if j.dist_point(h) > cube_radius + 1.0 {
                    continue;
                }
                let cube = Region::cube(cube_radius, h, &parity);
                if cube.intersects(&j) && !j.contains_region(&cube) {
                    j = j.union(&cube)?;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
            rounds += 1;
            if !bound.contains_region(&j) || rounds > 64 {
                return Err(MsaError::ClosureOverflow(next_stage));
            }
        }
    }
    if !bound.contains_region(&j) {
        return Err(MsaError::ClosureOverflow(next_stage));
    }
    Ok(j.translate(&k0.neg()))
}

/// Core translate `A_k^{s+1} - k`: the inherited core in the separated case,
/// the union of the two mirrored cores in the paired case; `{0}` /
/// `{±l_s/2}` at stage 1.
fn core_translate(run: &MsaRun, selection: &CaseSelection) -> Result<Region, MsaError> {
    let s = run.top_stage();
    let d = run.model.d;
    if s == 0 {
        let zero = HalfLatticePoint::zero(d);
        return match selection.case {
            CaseTag::C1 => Ok(Region::from_points([zero]).map_err(MsaError::Lattice)?),
            CaseTag::C2 => {
                // doubled(l_s/2) = doubled(l_s)/2
                let plus = half_shift(&selection.shift);
                let minus = plus.neg();
                if plus == minus {
                    Ok(Region::from_points([plus]).map_err(MsaError::Lattice)?)
                } else {
                    Ok(Region::from_points([minus, plus]).map_err(MsaError::Lattice)?)
                }
            }
        };
    }
    let prev_core = &run.states[s as usize]
        .blocks
        .as_ref()
        .expect("stage ≥ 1 has blocks")
        .core;
    match selection.case {
        CaseTag::C1 => Ok(prev_core.clone()),
        CaseTag::C2 => {
            let half = half_shift(&selection.shift);
            let shifted_down = prev_core.translate(&half.neg());
            let shifted_up = prev_core.translate(&half);
            shifted_down.union(&shifted_up).map_err(MsaError::Lattice)
        }
    }
}

/// `l_s/2` as an exact half-lattice point.
pub fn half_shift(shift: &HalfLatticePoint) -> HalfLatticePoint {
    HalfLatticePoint::new(shift.doubled().iter().map(|&x| x / 2).collect())
}

/// Cube seeds of the stage blocks per case. The paired-case inner seed must
/// cover the pair span `pair_factor·N^c`; the outer seed takes the
/// asymptotic `N^{c²}` when it dominates and `2.5×` the inner seed
/// otherwise.
pub fn case_seeds(
    c: f64,
    exps: &crate::msa::schedule::ThresholdExponents,
    n_next: f64,
    case: CaseTag,
) -> (f64, f64) {
    match case {
        CaseTag::C1 => (n_next, n_next.powf(c)),
        CaseTag::C2 => {
            let inner = exps.pair_factor * n_next.powf(c);
            let outer = n_next.powf(c * c).max(2.5 * inner);
            (inner, outer)
        }
    }
}
