//! Constructors for desk-scale instances with prescribed resonance
//! structure.
//!
//! The induction only does something interesting when the window actually
//! contains resonant sites, and which case fires is a delicate function of
//! (θ, E, ω). These constructors search a seeded θ-sequence and place the
//! energy on (or at a prescribed margin off) the orbit, then verify that the
//! realized stage-0 classification has exactly the requested shape. They
//! return ready-to-advance runs; failure to find a conforming instance
//! within the attempt budget is an error, never a silently different
//! configuration.

use super::schedule::ScaleParams;
use super::{MsaError, MsaRun};
use crate::lattice::HalfLatticePoint;
use crate::operator::OperatorParams;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

const ATTEMPTS: usize = 400;

/// A stage-0 run whose singular set is exactly the prescribed sites, all on
/// one sign, with the opposite sign empty — so the next transition takes
/// the separated case (C1).
///
/// `sites[0]` is placed at resonance margin `off_resonance · δ₀`; the other
/// sites must land inside Q₀ through their own arithmetic (the caller
/// chooses them at near-resonant separations, e.g. Fibonacci multiples for
/// the golden mean).
pub fn separated_stage0(
    omega: &[f64],
    scale: &ScaleParams,
    window_radius: f64,
    s_max: u32,
    sites: &[Vec<i64>],
    off_resonance: f64,
    seed: u64,
) -> Result<MsaRun, MsaError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta0 = scale.log_delta0().exp();
    let eps = scale.eps();
    let anchor = HalfLatticePoint::integer(&sites[0]);
    for _ in 0..ATTEMPTS {
        let theta: f64 = rng.gen_range(0.0..1.0);
        let probe = OperatorParams::new(eps, omega.to_vec(), theta, 0.0);
        let phase = probe.phase(&anchor);
        let shifted = (phase + off_resonance * delta0).rem_euclid(1.0);
        let energy = (TAU * shifted).cos();
        let model = OperatorParams::new(eps, omega.to_vec(), theta, energy);
        let run = MsaRun::init(model, scale.clone(), window_radius, s_max)?;
        let q = &run.states[0].singular;
        let expected: Vec<HalfLatticePoint> = {
            let mut v: Vec<HalfLatticePoint> = sites
                .iter()
                .map(|s| HalfLatticePoint::integer(s))
                .collect();
            v.sort();
            v
        };
        // Q₀⁺ must be empty: a plus-side singular site pairs with widened
        // minus-side sites and would drive the paired case
        if q.plus.is_empty() && q.all_points() == expected {
            return Ok(run);
        }
    }
    Err(MsaError::RootRefinement(format!(
        "no separated stage-0 instance found in {ATTEMPTS} attempts"
    )))
}

/// A stage-0 run with a constructed resonant pair `i ∈ Q₀^+`, `j ∈ Q̃₀^-`
/// at shift `l₀ = i - j`, driving the paired case (C2).
///
/// `pair_detune` (mod-1 units) controls `‖l₀·ω + 2θ₀‖ ≈ pair_detune`, the
/// distance of the unperturbed zero proxy from the disc center.
#[allow(clippy::too_many_arguments)]
pub fn paired_stage0(
    omega: &[f64],
    scale: &ScaleParams,
    window_radius: f64,
    s_max: u32,
    i_site: &[i64],
    j_site: &[i64],
    pair_detune: f64,
    seed: u64,
) -> Result<MsaRun, MsaError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = scale.eps();
    let i_pt = HalfLatticePoint::integer(i_site);
    let j_pt = HalfLatticePoint::integer(j_site);
    let i_dot: f64 = i_pt.dot(omega);
    let j_dot: f64 = j_pt.dot(omega);
    for _ in 0..ATTEMPTS {
        // solve 2θ + (i+j)·ω = pair_detune + jitter (mod 1), then put E on
        // the j-orbit so that ‖θ + j·ω - θ₀‖ = 0
        let jitter = rng.gen_range(-0.3..0.3) * pair_detune.max(1e-9);
        let target = (pair_detune + jitter).rem_euclid(1.0);
        let theta = ((target - i_dot - j_dot) / 2.0 + rng.gen_range(0..2) as f64 * 0.5)
            .rem_euclid(1.0);
        let probe = OperatorParams::new(eps, omega.to_vec(), theta, 0.0);
        let phase_j = probe.phase(&j_pt);
        let energy = (TAU * phase_j).cos();
        let model = OperatorParams::new(eps, omega.to_vec(), theta, energy);
        let run = MsaRun::init(model, scale.clone(), window_radius, s_max)?;
        let q = &run.states[0].singular;
        let wq = &run.states[0].widened;
        let i_plus = q.plus.iter().any(|(p, _)| p == &i_pt);
        let j_minus = wq.minus.iter().any(|(p, _)| p == &j_pt);
        // clean pair: no other singular sites
        let clean = q.all_points().len() == q.plus.len() + q.minus.len()
            && q.plus.len() <= 1
            && q.minus.len() <= 1;
        if i_plus && j_minus && clean {
            return Ok(run);
        }
    }
    Err(MsaError::RootRefinement(format!(
        "no paired stage-0 instance found in {ATTEMPTS} attempts"
    )))
}

/// Advance a separated run to stage 1 and then retune the energy so that
/// the tracked site stays resonant at stage 1 (`‖θ + k·ω - θ₁(E)‖ < δ₁`),
/// enabling a nontrivial stage-2 transition. The retuning solves for E with
/// the stage-1 tracker in the loop (secant iteration on the real part of
/// θ₁(E) - θ - k·ω).
pub fn retune_for_stage2(
    omega: &[f64],
    scale: &ScaleParams,
    window_radius: f64,
    sites: &[Vec<i64>],
    seed: u64,
) -> Result<MsaRun, MsaError> {
    let anchor = HalfLatticePoint::integer(&sites[0]);
    // start from a margin well inside δ₀ but nonzero
    let base = separated_stage0(omega, scale, window_radius, 3, sites, 0.3, seed)?;
    let theta = base.model.theta;
    let target = base.model.phase(&anchor);
    let delta1 = base.schedule.stages[1].delta;

    // residual(E) = signed offset of θ₁(E) from the anchor phase
    let eval = |energy: f64| -> Result<(f64, MsaRun), MsaError> {
        let model = OperatorParams::new(base.model.eps, omega.to_vec(), theta, energy);
        let mut run = MsaRun::init(model, scale.clone(), window_radius, 3)?;
        run.advance()?;
        let theta1 = run.states[1].theta;
        let offset = crate::torus::torus_rep(theta1.re - target);
        Ok((offset, run))
    };

    let mut e0 = base.model.energy;
    let (mut r0, run0) = eval(e0)?;
    if r0.abs() < 0.3 * delta1 {
        return Ok(run0);
    }
    // derivative dθ₀/dE = -1/(2π sin 2πθ₀) seeds the secant
    let theta0 = base.theta0;
    let slope = -1.0 / (TAU * (TAU * theta0.re).sin());
    let mut e1 = e0 - r0 / slope;
    for _ in 0..60 {
        let (r1, run1) = eval(e1)?;
        if r1.abs() < 0.3 * delta1 {
            return Ok(run1);
        }
        let denom = r1 - r0;
        if denom == 0.0 {
            break;
        }
        let e2 = e1 - r1 * (e1 - e0) / denom;
        e0 = e1;
        r0 = r1;
        e1 = e2;
    }
    Err(MsaError::RootRefinement(
        "energy retuning for a stage-2 resonance did not converge".into(),
    ))
}
