//! The inductive multi-scale engine.
//!
//! Each stage `s` carries a resonance threshold δ_s, a block size N_s, a
//! tracked zero pair ±θ_s of the block determinant, singular-site sets and
//! resonant blocks. A stage transition classifies sites against ±θ_s,
//! selects the separated/paired case, builds the next generation of blocks
//! by the enlargement closure, and tracks the zero pair of the new block
//! determinant.
//!
//! Everything operates on a finite window: any decision that would need
//! data outside it is an error, never a silent truncation.

pub mod blocks;
pub mod bounds;
pub mod classify;
pub mod good;
pub mod instances;
pub mod invariants;
pub mod roots;
pub mod schedule;
pub mod state_io;

pub use schedule::{
    schedule as compute_schedule, ScaleParams, Schedule, ScheduleError, ScheduleMode, StageScale,
    ThresholdExponents,
};

use crate::lattice::{HalfLatticePoint, LatticeError, Region};
use crate::operator::{OperatorError, OperatorParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MsaError {
    #[error("energy-out-of-range: |E| = {0} exceeds 2")]
    EnergyOutOfRange(f64),
    #[error("schedule error: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("stage {0} is symbolic: schedule values left the representable range")]
    SymbolicStage(u32),
    #[error("window-insufficient: {0}")]
    WindowInsufficient(String),
    #[error("no further sites: P_{0} is empty in the window")]
    NoSites(u32),
    #[error("closure-overflow: block closure left the collar at stage {0}")]
    ClosureOverflow(u32),
    #[error("collar-overflow: region enlargement left the 50 N_s^c2 collar")]
    CollarOverflow,
    #[error("root-count: expected {expected} zeros in the search disc, found {found}")]
    RootCount { expected: usize, found: usize },
    #[error("root refinement failed to converge: {0}")]
    RootRefinement(String),
    #[error("shift vector is not an integer point")]
    NonIntegerShift,
    #[error("good-set precondition failed at stage {stage}: {witness}")]
    NotGood { stage: u32, witness: String },
    #[error("lattice error: {0}")]
    Lattice(#[from] LatticeError),
    #[error("operator error: {0}")]
    Operator(#[from] OperatorError),
    #[error("green error: {0}")]
    Green(#[from] crate::green::GreenError),
}

/// The case selector of a stage transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// Separated case: `dist(Q̃_s^-, Q_s^+) > 100 N_{s+1}^c`; no shift.
    C1,
    /// Paired case: a close (i, j) pair exists; sites mirror through the
    /// midpoint and the lattice shifts by l_s/2.
    C2,
}

/// Signed singular sites with their resonance margins
/// `‖θ + k·ω ± θ_s‖`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SignedSites {
    pub plus: Vec<(HalfLatticePoint, f64)>,
    pub minus: Vec<(HalfLatticePoint, f64)>,
}

impl SignedSites {
    pub fn plus_region(&self, d: usize, parity: &[u8]) -> Region {
        region_of(self.plus.iter().map(|(p, _)| p.clone()), d, parity)
    }

    pub fn minus_region(&self, d: usize, parity: &[u8]) -> Region {
        region_of(self.minus.iter().map(|(p, _)| p.clone()), d, parity)
    }

    pub fn all_points(&self) -> Vec<HalfLatticePoint> {
        let mut v: Vec<HalfLatticePoint> = self
            .plus
            .iter()
            .chain(self.minus.iter())
            .map(|(p, _)| p.clone())
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty() && self.minus.is_empty()
    }
}

fn region_of(
    points: impl IntoIterator<Item = HalfLatticePoint>,
    d: usize,
    parity: &[u8],
) -> Region {
    let pts: Vec<HalfLatticePoint> = points.into_iter().collect();
    if pts.is_empty() {
        Region::empty(d, parity.to_vec())
    } else {
        Region::from_points(pts).expect("sites share the stage parity class")
    }
}

/// Resonant blocks of one stage, stored as origin-centred translates
/// (the construction builds one block at a reference site and translates
/// it, so site-independence holds by construction).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageBlocks {
    /// Ω_k^s − k.
    pub inner: Region,
    /// Ω̃_k^s − k.
    pub outer: Region,
    /// A_k^s − k.
    pub core: Region,
}

impl StageBlocks {
    pub fn inner_at(&self, k: &HalfLatticePoint) -> Region {
        self.inner.translate(k)
    }

    pub fn outer_at(&self, k: &HalfLatticePoint) -> Region {
        self.outer.translate(k)
    }

    pub fn core_at(&self, k: &HalfLatticePoint) -> Region {
        self.core.translate(k)
    }
}

/// Diagnostics of one zero-pair tracking run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootTrack {
    pub disc_center: (f64, f64),
    pub disc_radius: f64,
    pub zeros_found: usize,
    /// `‖θ_{s} + mirror‖` for the independently refined mirror root.
    pub symmetry_defect: f64,
    /// Max row sum of the Schur complement over sampled disc points.
    pub schur_row_sum: f64,
    /// C2 only: the unperturbed zero proxy z_{s+1}.
    pub z_proxy: Option<(f64, f64)>,
}

/// Sealed record of one stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleState {
    pub stage: u32,
    pub delta: f64,
    pub log_delta: f64,
    /// N_s (1 at stage 0 where blocks are single sites).
    pub size: u64,
    pub gamma_rate: f64,
    /// The tracked zero; the pair is (θ_s, -θ_s).
    pub theta: Complex64,
    /// Shift history l_0 .. l_{s-1} (integer points).
    pub shifts: Vec<HalfLatticePoint>,
    /// Parity class of P_s (doubled-coordinate parities of ½ Σ l_i).
    pub parity: Vec<u8>,
    /// P_s restricted to the window.
    pub sites: Vec<HalfLatticePoint>,
    /// Q_s^± with margins.
    pub singular: SignedSites,
    /// Q̃_s^± with margins (threshold δ_s^{q̃}).
    pub widened: SignedSites,
    pub widened_threshold: f64,
    pub blocks: Option<StageBlocks>,
    /// Case tags of the transitions taken so far (first entry is stage 0 → 1).
    pub case_history: Vec<CaseTag>,
    pub root_track: Option<RootTrack>,
}

impl ScaleState {
    pub fn sites_region(&self, d: usize) -> Region {
        region_of(self.sites.iter().cloned(), d, &self.parity)
    }
}

/// A full multi-scale run over a fixed window.
#[derive(Debug, Clone)]
pub struct MsaRun {
    pub model: OperatorParams,
    pub scale: ScaleParams,
    pub schedule: Schedule,
    /// Window radius W: all site sets live in `Λ_W(0)` of their parity class.
    pub window_radius: f64,
    pub theta0: Complex64,
    pub states: Vec<ScaleState>,
}

/// `θ₀ = arccos(E)/2π`, principal branch: real in `[0, ½]` for `|E| ≤ 1`,
/// `i·arccosh(E)/2π` for `E > 1`, `½ + i·arccosh(-E)/2π` for `E < -1`.
pub fn theta0_of_energy(energy: f64) -> Result<Complex64, MsaError> {
    if energy.abs() > 2.0 {
        return Err(MsaError::EnergyOutOfRange(energy.abs()));
    }
    let tau = std::f64::consts::TAU;
    if energy.abs() <= 1.0 {
        Ok(Complex64::new(energy.acos() / tau, 0.0))
    } else if energy > 1.0 {
        Ok(Complex64::new(0.0, energy.acosh() / tau))
    } else {
        Ok(Complex64::new(0.5, (-energy).acosh() / tau))
    }
}

/// Report of one stage transition, for experiment emission.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTransition {
    pub from_stage: u32,
    pub case: CaseTag,
    pub shift: HalfLatticePoint,
    /// `dist(Q̃_s^-, Q_s^+)` and `dist(Q̃_s^+, Q_s^-)` (the two distances the
    /// infinite-lattice symmetry claim compares; only approximate agreement
    /// is expected on a window).
    pub case_distances: (f64, f64),
    pub theta_next: Complex64,
}

impl MsaRun {
    /// Initialize stage 0: `P₀ = Z^d ∩ Λ_W`, `Q₀` classified against ±θ₀.
    pub fn init(
        model: OperatorParams,
        scale: ScaleParams,
        window_radius: f64,
        s_max: u32,
    ) -> Result<Self, MsaError> {
        let schedule = compute_schedule(&scale, s_max)?;
        let theta0 = theta0_of_energy(model.energy)?;
        let d = model.d;
        let parity = vec![0u8; d];
        let window = Region::cube(window_radius, &HalfLatticePoint::zero(d), &parity);
        let stage0 = &schedule.stages[0];
        let sites: Vec<HalfLatticePoint> = window.iter().cloned().collect();
        let (singular, widened, widened_threshold) = classify::classify_sites(
            &sites,
            &model,
            theta0,
            stage0,
            &scale.exponents,
        );
        let state = ScaleState {
            stage: 0,
            delta: stage0.delta,
            log_delta: stage0.log_delta,
            size: 1,
            gamma_rate: stage0.gamma_rate,
            theta: theta0,
            shifts: Vec::new(),
            parity,
            sites,
            singular,
            widened,
            widened_threshold,
            blocks: None,
            case_history: Vec::new(),
            root_track: None,
        };
        Ok(Self {
            model,
            scale,
            schedule,
            window_radius,
            theta0,
            states: vec![state],
        })
    }

    pub fn top_stage(&self) -> u32 {
        self.states.last().expect("stage 0 always present").stage
    }

    pub fn state(&self, stage: u32) -> &ScaleState {
        &self.states[stage as usize]
    }

    /// Advance one stage: classify → select case → sites → blocks → roots.
    pub fn advance(&mut self) -> Result<StageTransition, MsaError> {
        let s = self.top_stage();
        let next = s + 1;
        let next_scale = self
            .schedule
            .stages
            .get(next as usize)
            .ok_or(MsaError::SymbolicStage(next))?
            .clone();
        if next_scale.symbolic {
            return Err(MsaError::SymbolicStage(next));
        }

        let selection = classify::select_case(self, &next_scale)?;
        let new_sites = classify::build_next_sites(self, &selection)?;
        if new_sites.is_empty() {
            return Err(MsaError::NoSites(next));
        }
        let blocks = blocks::build_blocks(self, &new_sites, &selection, &next_scale)?;

        // the Schur complement of the core requires the punctured block to
        // be s-good
        let sample = &new_sites[0];
        let punctured = blocks.outer_at(sample).difference(&blocks.core_at(sample));
        let verdict = good::verify_good_set(&punctured, self)?;
        if !verdict.is_good {
            return Err(MsaError::NotGood {
                stage: s,
                witness: verdict.witness.unwrap_or_default(),
            });
        }

        let track = roots::track_theta(self, &blocks, &selection)?;
        let theta_next = Complex64::new(track.theta.re, track.theta.im);

        let mut shifts = self.states[s as usize].shifts.clone();
        shifts.push(selection.shift.clone());
        let parity = new_sites[0].parity();
        let (singular, widened, widened_threshold) = classify::classify_sites(
            &new_sites,
            &self.model,
            theta_next,
            &next_scale,
            &self.scale.exponents,
        );
        let mut case_history = self.states[s as usize].case_history.clone();
        case_history.push(selection.case);
        let state = ScaleState {
            stage: next,
            delta: next_scale.delta,
            log_delta: next_scale.log_delta,
            size: next_scale.size_int.expect("non-symbolic stage"),
            gamma_rate: next_scale.gamma_rate,
            theta: theta_next,
            shifts,
            parity,
            sites: new_sites,
            singular,
            widened,
            widened_threshold,
            blocks: Some(blocks),
            case_history,
            root_track: Some(track.report.clone()),
        };
        self.states.push(state);
        Ok(StageTransition {
            from_stage: s,
            case: selection.case,
            shift: selection.shift,
            case_distances: selection.distances,
            theta_next,
        })
    }

    /// The window as a region of one parity class.
    pub fn window(&self, parity: &[u8]) -> Region {
        Region::cube(
            self.window_radius,
            &HalfLatticePoint::zero(self.model.d),
            parity,
        )
    }
}
