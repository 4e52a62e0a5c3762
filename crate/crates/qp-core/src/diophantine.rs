//! Brute-force verification of frequency and phase arithmetic conditions.
//!
//! Membership in the class `R_{τ,γ}` means `‖n·ω‖ ≥ γ e^{-‖n‖^τ}` for all
//! `0 < ‖n‖ ≤ R`. The exhaustive scan is definitional; continued fractions
//! would only be an accelerator and are deliberately not used here.

use crate::torus::torus_norm;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A frequency vector with its verified non-resonance constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyClass {
    pub omega: Vec<f64>,
    pub tau: f64,
    pub gamma: f64,
    /// Largest radius for which membership was checked exhaustively.
    pub verified_radius: f64,
}

/// Result of an exhaustive frequency scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub pass: bool,
    /// Minimizer of `‖n·ω‖ · e^{‖n‖^τ}` over `0 < ‖n‖ ≤ R`.
    pub worst_n: Vec<i64>,
    /// The minimum itself: the largest γ that would still pass at this radius.
    pub max_admissible_gamma: f64,
    /// `max_admissible_gamma - gamma`.
    pub margin: f64,
}

/// Exhaustively check `‖n·ω‖ ≥ γ e^{-‖n‖^τ}` over the sup-norm ball of
/// radius `R` (minus the origin). By evenness only half the ball is scanned.
pub fn verify_frequency(omega: &[f64], gamma: f64, tau: f64, radius: u64) -> FrequencyReport {
    assert!(radius >= 1, "radius must be at least 1");
    let d = omega.len();
    let candidates: Vec<Vec<i64>> = ball_representatives(d, radius as i64).collect();
    let worst = candidates
        .into_par_iter()
        .map(|n| {
            let dot: f64 = n.iter().zip(omega).map(|(&ni, &w)| ni as f64 * w).sum();
            let norm_inf = n.iter().map(|x| x.abs()).max().unwrap() as f64;
            let value = torus_norm(dot) * norm_inf.powf(tau).exp();
            (value, n)
        })
        .reduce_with(min_by_value)
        .expect("ball is nonempty");
    let (max_admissible_gamma, worst_n) = worst;
    FrequencyReport {
        pass: max_admissible_gamma >= gamma,
        worst_n,
        max_admissible_gamma,
        margin: max_admissible_gamma - gamma,
    }
}

fn min_by_value(a: (f64, Vec<i64>), b: (f64, Vec<i64>)) -> (f64, Vec<i64>) {
    // deterministic under parallel reduction: tie-break lexicographically
    if a.0 < b.0 || (a.0 == b.0 && a.1 <= b.1) {
        a
    } else {
        b
    }
}

/// One representative of each `±n` pair with `0 < ‖n‖ ≤ R`.
fn ball_representatives(d: usize, r: i64) -> impl Iterator<Item = Vec<i64>> {
    odometer(d, r).filter(|n| match n.iter().rev().find(|&&x| x != 0) {
        None => false,
        Some(&lead) => lead > 0,
    })
}

fn odometer(d: usize, r: i64) -> impl Iterator<Item = Vec<i64>> {
    let mut current = vec![-r; d];
    let mut done = d == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let n = current.clone();
        let mut i = 0;
        loop {
            if i == d {
                done = true;
                break;
            }
            current[i] += 1;
            if current[i] <= r {
                break;
            }
            current[i] = -r;
            i += 1;
        }
        Some(n)
    })
}

/// Result of the phase-condition scan over `R_min ≤ ‖n‖ ≤ R_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseReport {
    pub pass: bool,
    /// All `n` violating `‖2θ + n·ω‖ > e^{-‖n‖^{τ₁}}` in the annulus.
    pub violations: Vec<Vec<i64>>,
}

/// Scan for violations of the phase condition `‖2θ + n·ω‖ > e^{-‖n‖^{τ₁}}`.
/// An empty range passes vacuously.
pub fn verify_phase_condition(
    theta: f64,
    omega: &[f64],
    tau1: f64,
    r_min: u64,
    r_max: u64,
) -> PhaseReport {
    if r_min > r_max {
        return PhaseReport {
            pass: true,
            violations: Vec::new(),
        };
    }
    let d = omega.len();
    let two_theta = 2.0 * theta;
    let candidates: Vec<Vec<i64>> = odometer(d, r_max as i64)
        .filter(|n| {
            let a = n.iter().map(|x| x.abs()).max().unwrap();
            (a as u64) >= r_min && n.iter().any(|&x| x != 0)
        })
        .collect();
    let mut violations: Vec<Vec<i64>> = candidates
        .into_par_iter()
        .filter_map(|n| {
            let norm_inf = n.iter().map(|x| x.abs()).max().unwrap();
            let dot: f64 = n.iter().zip(omega).map(|(&ni, &w)| ni as f64 * w).sum();
            let threshold = (-(norm_inf as f64).powf(tau1)).exp();
            if torus_norm(two_theta + dot) <= threshold {
                Some(n)
            } else {
                None
            }
        })
        .collect();
    violations.sort();
    PhaseReport {
        pass: violations.is_empty(),
        violations,
    }
}

pub fn golden_mean() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

pub fn sqrt2_minus_1() -> f64 {
    2.0f64.sqrt() - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_frequency_fails() {
        // ω = 1/2: ‖2·ω‖ = 0, so any γ > 0 fails by radius 2
        let r = verify_frequency(&[0.5], 1e-6, 0.5, 2);
        assert!(!r.pass);
        assert_eq!(r.worst_n, vec![2]);
        assert_eq!(r.max_admissible_gamma, 0.0);
    }

    #[test]
    fn zero_coordinate_fails_in_d2() {
        let r = verify_frequency(&[golden_mean(), 0.0], 1e-6, 0.5, 3);
        assert!(!r.pass);
        assert_eq!(r.max_admissible_gamma, 0.0);
        // the minimizing vector must have zero projection on ω
        let dot: f64 = r.worst_n[0] as f64 * golden_mean();
        assert!(torus_norm(dot) == 0.0 || r.worst_n[0] == 0);
        assert!(r.worst_n.iter().any(|&x| x != 0));
    }

    #[test]
    fn golden_mean_margin_at_radius_100() {
        // brute force over |n| ≤ 100; worst case sits at n = 3
        let r = verify_frequency(&[golden_mean()], 0.5, 0.5, 100);
        assert!(r.pass);
        assert!(
            r.max_admissible_gamma > 0.8 && r.max_admissible_gamma < 0.9,
            "admissible gamma {}",
            r.max_admissible_gamma
        );
        assert_eq!(r.worst_n, vec![3]);
    }

    #[test]
    fn monotone_in_radius() {
        let big = verify_frequency(&[golden_mean()], 0.5, 0.5, 200);
        let small = verify_frequency(&[golden_mean()], 0.5, 0.5, 50);
        assert!(big.max_admissible_gamma <= small.max_admissible_gamma);
        if big.pass {
            assert!(small.pass);
        }
    }

    #[test]
    fn verified_class_gives_separation_bound() {
        // membership at radius R makes the singular-site separation bound
        // mechanical: ‖m·ω‖ < 2δ forces ‖m‖ ≥ |log(γ/2δ)|^{1/τ}
        let (gamma, tau, radius) = (0.5f64, 0.5f64, 300u64);
        let scan = verify_frequency(&[golden_mean()], gamma, tau, radius);
        assert!(scan.pass);
        for delta in [1e-3f64, 1e-5, 1e-8] {
            let bound = (gamma / (2.0 * delta)).ln().powf(1.0 / tau);
            for m in 1..=radius as i64 {
                if torus_norm(m as f64 * golden_mean()) < 2.0 * delta {
                    assert!(
                        (m as f64) >= bound.min(radius as f64),
                        "m = {m} below separation bound {bound}"
                    );
                }
            }
        }
    }

    #[test]
    fn phase_exact_resonance_detected() {
        // θ with 2θ = -n₀·ω (mod 1) for n₀ = 7
        let omega = [golden_mean()];
        let theta = (-(7.0 * omega[0])).rem_euclid(1.0) / 2.0;
        let r = verify_phase_condition(theta, &omega, 0.3, 5, 20);
        assert!(!r.pass);
        assert!(r.violations.contains(&vec![7]));
    }

    #[test]
    fn phase_empty_range_passes() {
        let r = verify_phase_condition(0.31, &[golden_mean()], 0.3, 10, 5);
        assert!(r.pass);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn phase_scan_brute_force_cross_check() {
        // independent re-implementation of the threshold test
        let omega = [golden_mean()];
        let theta = 0.31;
        let (tau1, lo, hi) = (0.3, 5u64, 200u64);
        let r = verify_phase_condition(theta, &omega, tau1, lo, hi);
        let mut expect = Vec::new();
        for n in -(hi as i64)..=(hi as i64) {
            let a = n.unsigned_abs();
            if a < lo || a > hi {
                continue;
            }
            let v = 2.0 * theta + n as f64 * omega[0];
            let dist = {
                let f = v.rem_euclid(1.0);
                f.min(1.0 - f)
            };
            if dist <= (-(a as f64).powf(tau1)).exp() {
                expect.push(vec![n]);
            }
        }
        expect.sort();
        assert_eq!(r.violations, expect);
    }
}
