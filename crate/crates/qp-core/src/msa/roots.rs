//! Zero-pair tracking for block determinants.
//!
//! `det M_{s+1}(z)` has, in the case-appropriate disc, exactly one zero
//! (separated case) or a symmetric pair (paired case). Zeros are counted by
//! the argument principle on the disc boundary (64 samples, doubled until
//! the winding is unambiguous) and refined by Newton iteration on the
//! log-determinant, whose derivative is `tr(M⁻¹ M')` with diagonal `M'`.
//!
//! The disc radius from the schedule is capped by a third of the distance
//! to the nearest competing determinant zero (the proxies `σθ_s - n·ω`):
//! the asymptotic exponent ladder guarantees this separation in its own
//! regime, while at representable scales it must be measured.

use super::classify::CaseSelection;
use super::{blocks::half_shift, CaseTag, MsaError, MsaRun, RootTrack, StageBlocks};
use crate::green::schur_complement;
use crate::lattice::Region;
use crate::linalg::{invert_dense_c, log_det, row_sum_norm_c};
use crate::operator::{complexified, complexified_diag_derivative, OperatorParams};
use crate::torus::{torus_norm_c, torus_rep_c};
use num_complex::Complex64;

pub struct TrackOutcome {
    pub theta: Complex64,
    pub report: RootTrack,
}

/// Track θ_{s+1} on the outer-block translate.
pub fn track_theta(
    run: &MsaRun,
    blocks: &StageBlocks,
    selection: &CaseSelection,
) -> Result<TrackOutcome, MsaError> {
    let state = run.states.last().expect("stage 0 present");
    let cur_scale = &run.schedule.stages[state.stage as usize];
    let model = &run.model;
    let translate = &blocks.outer;
    let theta_s = state.theta;

    // disc center, scheduled radius exponent and the intended zero proxies
    let exps = &run.scale.exponents;
    let (center, z_proxy, radius_exp) = match selection.case {
        CaseTag::C1 => (theta_s, None, exps.disc_c1),
        CaseTag::C2 => {
            let half = half_shift(&selection.shift);
            let w = theta_s + Complex64::new(half.dot(&model.omega), 0.0);
            // one of ‖w‖, ‖w - ½‖ is small; center on the winner
            let at_zero = torus_norm_c(w);
            let at_half = torus_norm_c(w - 0.5);
            let mu = if at_zero <= at_half { 0.0 } else { 0.5 };
            let z1 = Complex64::new(mu, 0.0) + torus_rep_c(w - mu);
            (Complex64::new(mu, 0.0), Some(z1), exps.disc_c2)
        }
    };

    // competing zero proxies σθ_s - n·ω, excluding the tracked ones
    let half = half_shift(&selection.shift);
    let mut separation = f64::INFINITY;
    for n in translate.iter() {
        for sigma in [1.0f64, -1.0] {
            let excluded = match selection.case {
                CaseTag::C1 => sigma > 0.0 && n.norm() == 0.0,
                CaseTag::C2 => {
                    (sigma > 0.0 && *n == half.neg()) || (sigma < 0.0 && *n == half)
                }
            };
            if excluded {
                continue;
            }
            let proxy = theta_s * sigma - Complex64::new(n.dot(&model.omega), 0.0);
            separation = separation.min(torus_norm_c(proxy - center));
        }
    }
    let scheduled_radius = (radius_exp * cur_scale.log_delta).exp();
    let mut radius = scheduled_radius.min(separation / 3.0);
    if let Some(z1) = z_proxy {
        // the disc must contain the ±z₁ pair
        let need = 2.5 * (z1 - center).norm();
        if need > radius {
            radius = need.min(separation / 3.0);
        }
    }
    if radius <= 0.0 || radius.is_nan() {
        return Err(MsaError::RootRefinement(
            "degenerate search disc: competing zero at the disc center".into(),
        ));
    }

    let expected = match selection.case {
        CaseTag::C1 => 1,
        CaseTag::C2 => 2,
    };
    let found = count_zeros(translate, model, center, radius)?;
    if found != expected {
        return Err(MsaError::RootCount { expected, found });
    }

    // refine
    let theta_next = match selection.case {
        CaseTag::C1 => newton(translate, model, center, center, radius)?,
        CaseTag::C2 => {
            let z1 = z_proxy.unwrap();
            let r1 = newton(translate, model, z1, center, radius)?;
            let start2 = center + (center - z1); // mirror of z₁ through μ ≡ -z₁ (mod 1)
            let r2 = newton(translate, model, start2, center, radius)?;
            // the two refinements must form the symmetric pair
            let pair_defect = torus_norm_c(r1 + r2);
            if pair_defect > 1e-8 * radius.max(1e-8) + 1e-12 {
                return Err(MsaError::RootRefinement(format!(
                    "paired roots do not mirror: defect {pair_defect:.3e}"
                )));
            }
            r1
        }
    };

    // independent mirror refinement for the symmetry certificate
    let mirror_start = -theta_next;
    let mirror = newton_unconstrained(translate, model, mirror_start)?;
    let symmetry_defect = torus_norm_c(mirror + theta_next);

    // absolute row-sum bound on the Schur complement
    let core_idx: Vec<usize> = {
        let pts: Vec<_> = translate.iter().collect();
        pts.iter()
            .enumerate()
            .filter(|(_, p)| blocks.core.contains(p))
            .map(|(i, _)| i)
            .collect()
    };
    let mut schur_row_sum = 0.0f64;
    for probe in [
        center,
        center + Complex64::new(radius * 0.7, 0.0),
        center + Complex64::new(0.0, radius * 0.7),
    ] {
        let m = complexified(translate, model, probe);
        if let Ok(s) = schur_complement(&m, &core_idx) {
            schur_row_sum = schur_row_sum.max(row_sum_norm_c(&s.s));
        }
    }

    Ok(TrackOutcome {
        theta: theta_next,
        report: RootTrack {
            disc_center: (center.re, center.im),
            disc_radius: radius,
            zeros_found: found,
            symmetry_defect,
            schur_row_sum,
            z_proxy: z_proxy.map(|z| (z.re, z.im)),
        },
    })
}

/// Zeros of `det M(z)` inside the disc, by winding of the boundary phase.
/// Sample count starts at 64 and doubles on any ambiguous step.
pub fn count_zeros(
    translate: &Region,
    model: &OperatorParams,
    center: Complex64,
    radius: f64,
) -> Result<usize, MsaError> {
    let mut samples = 64usize;
    loop {
        let mut phases = Vec::with_capacity(samples + 1);
        let mut ok = true;
        for j in 0..=samples {
            let angle = std::f64::consts::TAU * j as f64 / samples as f64;
            let z = center + Complex64::new(radius * angle.cos(), radius * angle.sin());
            let ld = log_det(&complexified(translate, model, z));
            if ld.ln_abs == f64::NEG_INFINITY {
                ok = false;
                break;
            }
            phases.push(ld.phase.arg());
        }
        let mut winding = 0.0f64;
        let mut max_step = 0.0f64;
        if ok {
            for w in phases.windows(2) {
                let mut step = w[1] - w[0];
                while step > std::f64::consts::PI {
                    step -= std::f64::consts::TAU;
                }
                while step < -std::f64::consts::PI {
                    step += std::f64::consts::TAU;
                }
                max_step = max_step.max(step.abs());
                winding += step;
            }
            let turns = winding / std::f64::consts::TAU;
            let rounded = turns.round();
            if max_step < std::f64::consts::FRAC_PI_2 && (turns - rounded).abs() < 0.1 {
                if rounded < -0.5 {
                    return Err(MsaError::RootRefinement(
                        "negative winding: determinant data inconsistent".into(),
                    ));
                }
                return Ok(rounded as usize);
            }
        }
        samples *= 2;
        if samples > 4096 {
            return Err(MsaError::RootRefinement(
                "winding did not stabilize at 4096 boundary samples".into(),
            ));
        }
    }
}

/// Newton on the log-determinant: `z ← z - 1/tr(M(z)⁻¹ M'(z))`, requiring
/// the iterate to stay within `1.5 radius` of the disc center.
fn newton(
    translate: &Region,
    model: &OperatorParams,
    start: Complex64,
    center: Complex64,
    radius: f64,
) -> Result<Complex64, MsaError> {
    let root = newton_unconstrained(translate, model, start)?;
    if (root - center).norm() > 1.5 * radius + 1e-12 {
        return Err(MsaError::RootRefinement(format!(
            "Newton left the search disc: |z - center| = {:.3e} vs radius {:.3e}",
            (root - center).norm(),
            radius
        )));
    }
    Ok(root)
}

fn newton_unconstrained(
    translate: &Region,
    model: &OperatorParams,
    start: Complex64,
) -> Result<Complex64, MsaError> {
    let mut z = start;
    let mut last_step = f64::INFINITY;
    for iter in 0..80 {
        let m = complexified(translate, model, z);
        let inv = match invert_dense_c(&m) {
            Ok(inv) => inv,
            Err(_) => {
                // exactly singular: z is a root to machine precision
                return Ok(z);
            }
        };
        let deriv = complexified_diag_derivative(translate, model, z);
        let mut tr = Complex64::new(0.0, 0.0);
        for (i, d) in deriv.iter().enumerate() {
            tr += inv[(i, i)] * d;
        }
        if !tr.is_finite() || tr.norm() < 1e-300 {
            // derivative unstable: secant-style nudge
            z += Complex64::new(1e-9, 1e-9) * (1.0 + z.norm());
            continue;
        }
        let step = 1.0 / tr;
        z -= step;
        let sn = step.norm();
        if sn < 1e-14 * (1.0 + z.norm()) {
            return Ok(z);
        }
        // diverging Newton: growing steps twice in a row after warmup
        if iter > 40 && sn > last_step * 4.0 && sn > 1e-3 {
            break;
        }
        last_step = sn;
    }
    Err(MsaError::RootRefinement(
        "Newton did not converge in 80 iterations".into(),
    ))
}

/// `|det S(z)| / (‖z-θ‖·‖z+θ‖)` for the stage Schur complement; the
/// multiplicative band of this ratio over the search disc is the numerical
/// form of the comparability claim `det S ∼ ‖z-θ‖·‖z+θ‖`.
pub fn schur_det_ratio(
    translate: &Region,
    core: &Region,
    model: &OperatorParams,
    theta: Complex64,
    z: Complex64,
) -> Result<f64, MsaError> {
    let pts: Vec<_> = translate.iter().collect();
    let core_idx: Vec<usize> = pts
        .iter()
        .enumerate()
        .filter(|(_, p)| core.contains(p))
        .map(|(i, _)| i)
        .collect();
    let m = complexified(translate, model, z);
    let s = schur_complement(&m, &core_idx)?;
    let denom = torus_norm_c(z - theta).ln() + torus_norm_c(z + theta).ln();
    Ok((s.det_s.ln_abs - denom).exp())
}
