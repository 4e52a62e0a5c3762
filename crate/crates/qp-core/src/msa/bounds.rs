//! A-priori bound checks on good regions.

use super::{MsaError, MsaRun};
use crate::green::{fit_decay, invert};
use crate::lattice::Region;
use crate::operator::OperatorInstance;
use crate::torus::torus_norm_c;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Margins of the norm and decay bounds on one region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub stage: u32,
    pub region_size: usize,
    pub inverse_norm: f64,
    /// `δ_{s-1}^{-3} · sup_k Π_σ ‖θ + k·ω + σθ_s‖^{-1}` over sites whose
    /// outer block sits inside the region; `δ_{s-1}^{-3} δ_s^{-2}` when no
    /// block does.
    pub norm_bound: f64,
    /// The weaker second-display bound `δ_s^{-3}`.
    pub norm_bound_weak: f64,
    pub norm_margin: f64,
    /// Entrywise decay check beyond `N_s^{c³}`: worst
    /// `e^{-γ_s ‖x-y‖₁} - |G(x,y)|`, `None` when the region has no pair
    /// beyond the threshold.
    pub decay_margin: Option<f64>,
    pub decay_rate_fit: Option<f64>,
    pub gamma_rate: f64,
    pub decay_threshold: f64,
    pub pass: bool,
}

/// Invert the region densely and compare against the top-stage bounds.
pub fn check_bounds(region: &Region, run: &MsaRun) -> Result<BoundReport, MsaError> {
    check_bounds_at_stage(region, run, run.top_stage())
}

/// Invert the region densely and compare against the stage-s bounds.
pub fn check_bounds_at_stage(
    region: &Region,
    run: &MsaRun,
    stage: u32,
) -> Result<BoundReport, MsaError> {
    let s = stage;
    let state = &run.states[s as usize];
    let op = OperatorInstance::assemble(region, &run.model)?;
    let g = invert(&op, None)?;

    // stage 0 reduces to the Neumann certificate bound δ₀^{-2}
    let log_delta_prev = if s == 0 {
        state.log_delta
    } else {
        run.states[(s - 1) as usize].log_delta
    };
    // sup over covered resonant sites of the inverse pair product
    let mut sup_log: Option<f64> = None;
    if s >= 1 {
        let blocks = state.blocks.as_ref().expect("stage ≥ 1 has blocks");
        for k in &state.sites {
            if region.contains_region(&blocks.outer_at(k)) {
                let phase = Complex64::new(run.model.phase(k), 0.0);
                let log_prod = torus_norm_c(phase - state.theta).ln()
                    + torus_norm_c(phase + state.theta).ln();
                sup_log = Some(sup_log.map_or(-log_prod, |v: f64| v.max(-log_prod)));
            }
        }
    }
    let norm_bound = if s == 0 {
        (-2.0 * state.log_delta).exp()
    } else {
        match sup_log {
            Some(lp) => (-3.0 * log_delta_prev + lp).exp(),
            None => (-3.0 * log_delta_prev - 2.0 * state.log_delta).exp(),
        }
    };
    let norm_bound_weak = (-3.0 * state.log_delta).exp();
    let norm_margin = norm_bound - g.op_norm;

    let c = run.scale.c;
    let decay_threshold = (state.size as f64).powf(c.powi(3));
    let gamma_rate = state.gamma_rate;
    let (decay_margin, decay_rate_fit) = match fit_decay(&g, decay_threshold, run.model.eps) {
        Ok(fit) => {
            // certified-minimum fit: margin in rate space
            (Some(fit.rate - gamma_rate), Some(fit.rate))
        }
        Err(crate::green::GreenError::RegionTooSmall) => (None, None),
        Err(e) => return Err(MsaError::Green(e)),
    };
    let pass = norm_margin >= 0.0 && decay_margin.is_none_or(|m| m >= 0.0);
    Ok(BoundReport {
        stage: s,
        region_size: op.len(),
        inverse_norm: g.op_norm,
        norm_bound,
        norm_bound_weak,
        norm_margin,
        decay_margin,
        decay_rate_fit,
        gamma_rate,
        decay_threshold,
        pass,
    })
}
