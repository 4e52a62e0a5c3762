//! The stage-state invariant battery.
//!
//! Every sealed stage must satisfy the structural properties the induction
//! promises: parity of the site coset, block separation and nesting across
//! stages, translate symmetry, covering of the previous singular set, size
//! sandwiches, the resonance-containment property of the site set, and the
//! symmetry of the tracked zero pair.

use super::{CaseTag, MsaRun};
use crate::lattice::Region;
use crate::torus::torus_norm_c;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub stage: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(stage: u32, name: &str, pass: bool, detail: String) -> InvariantCheck {
    InvariantCheck {
        stage,
        name: name.to_string(),
        pass,
        detail,
    }
}

/// Run the battery for one sealed stage (s ≥ 1).
pub fn verify_stage(run: &MsaRun, stage: u32) -> Vec<InvariantCheck> {
    let mut out = Vec::new();
    let s = stage as usize;
    let state = &run.states[s];
    let prev = &run.states[s - 1];
    let d = run.model.d;
    let blocks = state.blocks.as_ref().expect("stage ≥ 1 has blocks");
    let case = *state.case_history.last().expect("transition recorded");

    // parity: P_s ⊂ Z^d + ½ Σ l_i
    {
        let mut expect = vec![0i64; d];
        for l in &state.shifts {
            for (i, &x) in l.doubled().iter().enumerate() {
                expect[i] += x / 2; // doubled(½ Σ l_i) = Σ doubled(l_i)/2
            }
        }
        let expect_parity: Vec<u8> = expect.iter().map(|x| x.rem_euclid(2) as u8).collect();
        let ok = state.parity == expect_parity
            && state.sites.iter().all(|p| p.parity() == expect_parity);
        out.push(check(
            stage,
            "parity-coset",
            ok,
            format!("parity {:?}", state.parity),
        ));
    }

    // (a2)/(c): translates symmetric about the origin, on the site coset
    for (name, region) in [("a2-outer-symmetric", &blocks.outer), ("c-core-symmetric", &blocks.core)]
    {
        let origin = crate::lattice::HalfLatticePoint::zero(d);
        out.push(check(
            stage,
            name,
            region.symmetric_about(&origin),
            format!("{} points", region.len()),
        ));
    }
    out.push(check(
        stage,
        "a2-outer-on-coset",
        blocks.outer.parity() == state.parity.as_slice(),
        format!("block parity {:?}", blocks.outer.parity()),
    ));

    // (c): A ⊂ Ω, #A ≤ 2^s
    out.push(check(
        stage,
        "c-core-in-inner",
        blocks.inner.contains_region(&blocks.core),
        format!("core {} ⊂ inner {}", blocks.core.len(), blocks.inner.len()),
    ));
    out.push(check(
        stage,
        "c-core-cardinality",
        blocks.core.len() as u64 <= 1u64 << stage.min(62),
        format!("{} ≤ 2^{stage}", blocks.core.len()),
    ));
    out.push(check(
        stage,
        "inner-in-outer",
        blocks.outer.contains_region(&blocks.inner),
        String::new(),
    ));

    // size sandwiches per the case taken
    {
        let c = run.scale.c;
        let n = state.size as f64;
        let n_prev = prev.size as f64;
        let collar = 50.0 * n_prev.powf(c * c);
        let (inner_lo, outer_lo) = super::blocks::case_seeds(c, &run.scale.exponents, n, case);
        let origin = crate::lattice::HalfLatticePoint::zero(d);
        let sandwich = |lo: f64, region: &Region| -> bool {
            let lo_cube = Region::cube(lo, &origin, &state.parity);
            let hi_cube = Region::cube(lo + collar, &origin, &state.parity);
            region.contains_region(&lo_cube) && hi_cube.contains_region(region)
        };
        // blocks live in Z^d: translate back to origin lives on the coset;
        // compare against coset cubes
        out.push(check(
            stage,
            "a-sandwich-inner",
            sandwich(inner_lo, &blocks.inner),
            format!("lo {inner_lo:.1}, collar {collar:.1}"),
        ));
        out.push(check(
            stage,
            "a-sandwich-outer",
            sandwich(outer_lo, &blocks.outer),
            format!("lo {outer_lo:.1}, collar {collar:.1}"),
        ));
    }

    // (a1): pairwise separation of outer blocks
    {
        let diam = blocks.outer.diam();
        let mut ok = true;
        let mut worst = f64::INFINITY;
        for (i, k) in state.sites.iter().enumerate() {
            for k2 in state.sites.iter().skip(i + 1) {
                let dist = blocks.outer_at(k).dist(&blocks.outer_at(k2));
                worst = worst.min(dist);
                if dist <= 10.0 * diam {
                    ok = false;
                }
            }
        }
        out.push(check(
            stage,
            "a1-separation",
            ok,
            format!("min dist {worst:.1} vs 10·diam = {:.1}", 10.0 * diam),
        ));
    }

    // (a1): nesting against every earlier stage (≥ 1; stage-0 blocks are
    // single sites and nest trivially)
    {
        let mut ok = true;
        let mut detail = String::new();
        for sp in 1..s {
            let hist = &run.states[sp];
            let hist_blocks = hist.blocks.as_ref().unwrap();
            for k in &state.sites {
                let inner_k = blocks.inner_at(k);
                let outer_k = blocks.outer_at(k);
                for k2 in &hist.sites {
                    let outer_old = hist_blocks.outer_at(k2);
                    if inner_k.intersects(&outer_old) && !inner_k.contains_region(&outer_old) {
                        ok = false;
                        detail = format!("inner at {k} clips stage-{sp} block at {k2}");
                    }
                    if outer_k.intersects(&outer_old) && !outer_k.contains_region(&outer_old) {
                        ok = false;
                        detail = format!("outer at {k} clips stage-{sp} block at {k2}");
                    }
                }
            }
        }
        out.push(check(stage, "a1-nesting", ok, detail));
    }

    // (b): covering of Q_{s-1}
    {
        let q_prev = prev.singular.all_points();
        let mut ok = true;
        let mut detail = String::new();
        for k2 in &q_prev {
            let outer_prev = if s - 1 == 0 {
                Region::from_points([k2.clone()]).unwrap()
            } else {
                run.states[s - 1].blocks.as_ref().unwrap().outer_at(k2)
            };
            if !state
                .sites
                .iter()
                .any(|k| blocks.inner_at(k).contains_region(&outer_prev))
            {
                ok = false;
                detail = format!("previous singular site {k2} is uncovered");
            }
        }
        out.push(check(stage, "b-covering", ok, detail));
    }

    // (P>): resonance containment at threshold 10·δ_s^{q̃}
    {
        let threshold = 10.0 * state.widened_threshold;
        let window = run.window(&state.parity);
        let mut ok = true;
        let mut detail = String::new();
        let site_set: std::collections::BTreeSet<_> = state.sites.iter().cloned().collect();
        for k in window.iter() {
            let phase = Complex64::new(run.model.phase(k), 0.0);
            let margin = torus_norm_c(phase + state.theta).min(torus_norm_c(phase - state.theta));
            if margin < threshold && !site_set.contains(k) {
                ok = false;
                detail = format!("near-resonant site {k} (margin {margin:.3e}) outside P_s");
                break;
            }
        }
        out.push(check(stage, "p-containment", ok, detail));
    }

    // membership of the site set per the case taken (the coset bounds)
    {
        let delta_prev_w = (run.scale.exponents.widened * prev.log_delta).exp();
        let mut ok = true;
        let mut detail = String::new();
        match case {
            CaseTag::C1 => {
                for k in &state.sites {
                    let phase = Complex64::new(run.model.phase(k), 0.0);
                    let m = torus_norm_c(phase + prev.theta).min(torus_norm_c(phase - prev.theta));
                    if m >= prev.delta {
                        ok = false;
                        detail = format!("site {k} margin {m:.3e} ≥ δ_prev {:.3e}", prev.delta);
                    }
                }
            }
            CaseTag::C2 => {
                // all sites satisfy ‖θ+k·ω‖ < 3δ^{q̃} or all the ½-shifted variant
                let mut at_zero = 0usize;
                let mut at_half = 0usize;
                for k in &state.sites {
                    let phase = run.model.phase(k);
                    let m0 = crate::torus::torus_norm(phase);
                    let mh = crate::torus::torus_norm(phase - 0.5);
                    if m0 < 3.0 * delta_prev_w {
                        at_zero += 1;
                    }
                    if mh < 3.0 * delta_prev_w {
                        at_half += 1;
                    }
                }
                ok = at_zero == state.sites.len() || at_half == state.sites.len();
                detail = format!("{at_zero} near 0, {at_half} near ½ of {}", state.sites.len());
            }
        }
        out.push(check(stage, "site-membership", ok, detail));
    }

    // root symmetry and the Schur row bound from the tracker
    if let Some(track) = &state.root_track {
        out.push(check(
            stage,
            "root-symmetry",
            track.symmetry_defect <= 1e-10,
            format!("defect {:.3e}", track.symmetry_defect),
        ));
        out.push(check(
            stage,
            "schur-row-sum",
            track.schur_row_sum < 10.0,
            format!("max row sum {:.3}", track.schur_row_sum),
        ));
        out.push(check(
            stage,
            "root-count",
            track.zeros_found == match case {
                CaseTag::C1 => 1,
                CaseTag::C2 => 2,
            },
            format!("{} zeros in disc", track.zeros_found),
        ));
    }

    out
}

/// Battery over all sealed stages ≥ 1.
pub fn verify_run(run: &MsaRun) -> Vec<InvariantCheck> {
    (1..=run.top_stage())
        .flat_map(|s| verify_stage(run, s))
        .collect()
}
