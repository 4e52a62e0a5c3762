//! Acceptance suite.
//!
//! Exact-identity checks, oracle equivalences and scaled-down quantitative
//! bound checks, one criterion per test. Every test prints a single
//! `A# PASS` line with its runtime; tolerances and thresholds are pinned in
//! the assertions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use qp_core::diophantine::{golden_mean, verify_frequency, verify_phase_condition};
use qp_core::green::{
    fit_decay, invert, neumann_certificate, resolvent_residual, schur_complement,
    schur_norm_bound,
};
use qp_core::ids::{count_leq, holder_scan, IdsScan};
use qp_core::lattice::{HalfLatticePoint, Region};
use qp_core::linalg::{log_det, sym_eigenvalues};
use qp_core::localization::{default_threshold, localization_report};
use qp_core::msa::{
    bounds, good, instances, invariants, roots, CaseTag, ScaleParams, ScheduleMode,
};
use qp_core::operator::{complexified, OperatorInstance, OperatorParams};
use qp_core::torus::torus_norm_c;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn pt(coords: &[i64]) -> HalfLatticePoint {
    HalfLatticePoint::integer(coords)
}

fn finish(name: &str, start: Instant, budget_s: f64, detail: String) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("{name} PASS ({elapsed:.2}s): {detail}");
    assert!(
        elapsed < budget_s,
        "{name} exceeded its runtime budget: {elapsed:.1}s >= {budget_s}s"
    );
}

/// Random symmetric matrix with bounded off-diagonal blocks against the
/// index subset, as the Schur lemma requires.
fn random_sym_bounded_blocks(
    n: usize,
    subset: &[usize],
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.gen_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m[(i, i)] += rng.gen_range(2.0..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    // scale the coupling blocks to norm ≤ 0.9
    let in_subset: Vec<bool> = {
        let mut v = vec![false; n];
        for &i in subset {
            v[i] = true;
        }
        v
    };
    let a_idx: Vec<usize> = (0..n).filter(|&i| in_subset[i]).collect();
    let c_idx: Vec<usize> = (0..n).filter(|&i| !in_subset[i]).collect();
    let b = DMatrix::from_fn(a_idx.len(), c_idx.len(), |i, j| m[(a_idx[i], c_idx[j])]);
    let b_norm = b.norm(); // Frobenius dominates the operator norm
    if b_norm > 0.9 {
        let scale = 0.9 / b_norm;
        for &i in &a_idx {
            for &j in &c_idx {
                m[(i, j)] *= scale;
                m[(j, i)] *= scale;
            }
        }
    }
    m
}

#[test]
fn a1_schur_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1);
    let mut worst_det = 0.0f64;
    let mut done = 0usize;
    while done < 200 {
        let n = rng.gen_range(10..=40);
        let a_len = rng.gen_range(1..=(n / 2));
        let mut subset: Vec<usize> = (0..n).collect();
        subset.shuffle(&mut rng);
        subset.truncate(a_len);
        subset.sort();
        let m = random_sym_bounded_blocks(n, &subset, &mut rng);
        // precondition: complement block condition number ≤ 1e6
        let c_idx: Vec<usize> = (0..n).filter(|i| !subset.contains(i)).collect();
        let m_cc = DMatrix::from_fn(c_idx.len(), c_idx.len(), |i, j| m[(c_idx[i], c_idx[j])]);
        let ev = sym_eigenvalues(&m_cc);
        let cond = ev.last().unwrap().abs().max(ev[0].abs())
            / ev.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
        if !cond.is_finite() || cond > 1e6 {
            continue;
        }
        let schur = schur_complement(&m, &subset).expect("complement invertible");
        assert!(
            schur.det_check <= 1e-10,
            "det identity defect {} at size {n}",
            schur.det_check
        );
        worst_det = worst_det.max(schur.det_check);
        let sandwich = schur_norm_bound(&m, &subset).expect("norms computable");
        assert!(
            sandwich.sandwich_holds,
            "norm sandwich failed: S^-1 {} M^-1 {} bound {}",
            sandwich.s_inv_norm, sandwich.m_inv_norm, sandwich.bound
        );
        done += 1;
    }
    finish(
        "A1",
        start,
        10.0,
        format!("200 matrices, worst det defect {worst_det:.2e}"),
    );
}

#[test]
fn a2_evenness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let d = if case % 2 == 0 { 1 } else { 2 };
        let half_class = case % 4 >= 2;
        // random origin-symmetric region, ≤ 100 points
        let mut doubled: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
        let reach: i64 = if d == 1 { 40 } else { 6 };
        while doubled.len() < 96 {
            let p: Vec<i64> = (0..d)
                .map(|_| {
                    let base = rng.gen_range(-reach..=reach);
                    2 * base + if half_class { 1 } else { 0 }
                })
                .collect();
            let neg: Vec<i64> = p.iter().map(|x| -x).collect();
            doubled.insert(p);
            doubled.insert(neg);
            if rng.gen_bool(0.07) {
                break;
            }
        }
        let region =
            Region::from_points(doubled.into_iter().map(HalfLatticePoint::new)).unwrap();
        assert!(region.symmetric_about(&HalfLatticePoint::zero(d)));
        assert!(region.len() <= 100);
        let omega: Vec<f64> = if d == 1 {
            vec![golden_mean()]
        } else {
            vec![golden_mean(), 2f64.sqrt() - 1.0]
        };
        let params = OperatorParams::new(
            rng.gen_range(0.01..0.4),
            omega,
            rng.gen_range(0.0..1.0),
            rng.gen_range(-1.5..1.5),
        );
        for _ in 0..100 {
            let z = Complex64::new(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(0.05..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
            );
            let plus = log_det(&complexified(&region, &params, z));
            let minus = log_det(&complexified(&region, &params, -z));
            let defect = plus.rel_diff(minus);
            worst = worst.max(defect);
            assert!(
                defect <= 1e-10,
                "evenness defect {defect:.3e} on {} points (d={d})",
                region.len()
            );
        }
    }
    finish(
        "A2",
        start,
        30.0,
        format!("50 regions x 100 z, worst defect {worst:.2e}"),
    );
}

/// Slow-frequency instance with a 0-good interval: the phases are confined
/// to the arc where `min_σ ‖x ± θ₀‖ ≥ δ₀` is satisfiable (no generic
/// frequency admits a 0-good interval of this length at δ₀ = ε^{1/10}).
fn zero_good_instance(
    eps: f64,
    len: i64,
    rng: &mut ChaCha8Rng,
) -> (Region, OperatorParams, Complex64, f64) {
    let delta0 = eps.powf(0.1);
    let energy: f64 = rng.gen_range(1.95..2.0);
    let y = energy.acosh() / std::f64::consts::TAU;
    let theta0 = Complex64::new(0.0, y);
    let need = (delta0 * delta0 - y * y).sqrt();
    let slack = 0.5 - need;
    assert!(slack > 0.005, "family infeasible at eps = {eps}");
    let span = 0.5 * slack;
    let omega = span / (len as f64) * golden_mean();
    let theta = 0.5 - 0.3 * slack + rng.gen_range(0.0..0.1 * slack);
    let params = OperatorParams::new(eps, vec![omega], theta, energy);
    let start = rng.gen_range(-8..8);
    let region = Region::from_points((start..start + len).map(|k| pt(&[k]))).unwrap();
    (region, params, theta0, delta0)
}

#[test]
fn a3_zero_scale_bounds() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let mut worst_norm_ratio = 0.0f64;
    for &eps in &[1e-3, 1e-4] {
        for _ in 0..50 {
            let (region, params, theta0, delta0) = zero_good_instance(eps, 50, &mut rng);
            let op = OperatorInstance::assemble(&region, &params).unwrap();
            // verify mode asserts ‖T^-1‖ < δ₀^-2 and the entrywise decay
            // e^{-γ₀‖x-y‖₁}; any violation is an error
            let cert = neumann_certificate(&op, theta0, delta0, true)
                .expect("certificate must verify with zero violations");
            let measured = cert.measured_norm.unwrap();
            worst_norm_ratio = worst_norm_ratio.max(measured / cert.norm_bound);
            // the certified-minimum decay fit confirms rate ≥ γ₀
            let g = invert(&op, None).unwrap();
            let fit = fit_decay(&g, 0.0, eps).unwrap();
            assert!(fit.rate >= cert.decay_rate);
        }
    }
    finish(
        "A3",
        start,
        60.0,
        format!("100 instances, worst ‖G‖/bound = {worst_norm_ratio:.3}"),
    );
}

/// Independent dense-determinant oracle: naive Gaussian elimination on the
/// real block matrix, bisected on the determinant sign.
fn oracle_bisect_root(
    translate: &Region,
    params: &OperatorParams,
    lo0: f64,
    hi0: f64,
) -> Option<f64> {
    let naive_det_sign = |z: f64| -> f64 {
        let points: Vec<&HalfLatticePoint> = translate.iter().collect();
        let n = points.len();
        let mut m = vec![vec![0.0f64; n]; n];
        for (i, p) in points.iter().enumerate() {
            let arg = (z + p.dot(&params.omega)).rem_euclid(1.0);
            m[i][i] = (std::f64::consts::TAU * arg).cos() - params.energy;
            for (j, q) in points.iter().enumerate().skip(i + 1) {
                if p.dist_l1(q) == 1.0 {
                    m[i][j] = params.eps;
                    m[j][i] = params.eps;
                }
            }
        }
        // partial-pivot elimination tracking only the sign
        let mut sign = 1.0f64;
        for col in 0..n {
            let (pivot_row, pivot) = (col..n)
                .map(|r| (r, m[r][col]))
                .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                .unwrap();
            if pivot == 0.0 {
                return 0.0;
            }
            if pivot_row != col {
                m.swap(pivot_row, col);
                sign = -sign;
            }
            if m[col][col] < 0.0 {
                sign = -sign;
            }
            for r in col + 1..n {
                let f = m[r][col] / m[col][col];
                #[allow(clippy::needless_range_loop)]
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
        sign
    };
    let (mut lo, mut hi) = (lo0, hi0);
    let s_lo = naive_det_sign(lo);
    if s_lo == naive_det_sign(hi) {
        return None;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if naive_det_sign(mid) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[test]
fn a4_stage1_root_tracking() {
    let start = Instant::now();
    let eps = 1e-4;
    let mut scale = ScaleParams::new(1.25, 0.5, 0.5, eps, ScheduleMode::practical_default());
    // δ₀ = ε^{1/10} ≈ 0.4 swallows the whole torus; and any override above
    // the orbit's three-distance gap (~2e-3 on this window) leaves the
    // opposite-sign ball permanently occupied
    scale.delta0_override = Some(1e-3);

    let mut worst_drift = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut worst_symmetry = 0.0f64;
    for i in 0..20 {
        let k_star = (i as i64 % 9) - 4;
        let mut run = instances::separated_stage0(
            &[golden_mean()],
            &scale,
            80.0,
            1,
            &[vec![k_star]],
            0.0,
            1000 + i,
        )
        .expect("separated instance");
        let t = run.advance().expect("stage-1 transition");
        assert_eq!(t.case, CaseTag::C1);
        let state = &run.states[1];
        let track = state.root_track.as_ref().unwrap();
        // |θ₁ - θ₀| < ε
        let drift = torus_norm_c(state.theta - run.theta0);
        assert!(drift < eps, "drift {drift:.3e} >= eps");
        worst_drift = worst_drift.max(drift);
        // symmetric pair to 1e-10
        assert!(track.symmetry_defect <= 1e-10);
        worst_symmetry = worst_symmetry.max(track.symmetry_defect);
        // independent bisection oracle to 1e-10
        let blocks = state.blocks.as_ref().unwrap();
        let center = run.theta0.re;
        let radius = track.disc_radius;
        let oracle = oracle_bisect_root(&blocks.outer, &run.model, center - radius, center + radius)
            .expect("oracle sign change");
        let diff = (state.theta.re - oracle).abs();
        assert!(state.theta.im.abs() < 1e-12);
        assert!(diff <= 1e-10, "oracle mismatch {diff:.3e}");
        worst_oracle = worst_oracle.max(diff);
    }

    // paired instances: exactly two zeros, |θ₁ - z₁| < ε^{1/2}
    let mut paired_scale = scale.clone();
    paired_scale.delta0_override = Some(3e-4);
    paired_scale.exponents.pair_factor = 2.5;
    paired_scale.mode = ScheduleMode::Practical {
        kappa: 3.0,
        rho: 2.0,
        n1: 3,
    };
    for i in 0..5 {
        let l0 = 2 + (i as i64 % 3); // shifts 2, 3, 4
        let mut run = instances::paired_stage0(
            &[golden_mean()],
            &paired_scale,
            120.0,
            1,
            &[l0 - 1],
            &[-1],
            5e-5,
            2000 + i,
        )
        .expect("paired instance");
        let t = run.advance().expect("paired stage-1 transition");
        assert_eq!(t.case, CaseTag::C2);
        let state = &run.states[1];
        let track = state.root_track.as_ref().unwrap();
        assert_eq!(track.zeros_found, 2, "paired case must find two zeros");
        let z1 = track.z_proxy.unwrap();
        let defect = torus_norm_c(state.theta - Complex64::new(z1.0, z1.1));
        assert!(
            defect < eps.sqrt(),
            "paired-root drift {defect:.3e} >= sqrt(eps)"
        );
    }
    finish(
        "A4",
        start,
        120.0,
        format!(
            "20 separated + 5 paired; worst drift {worst_drift:.2e}, oracle {worst_oracle:.2e}, symmetry {worst_symmetry:.2e}"
        ),
    );
}

#[test]
fn a5_ids_holder() {
    let start = Instant::now();
    // the frequency class membership is verified, not assumed
    let dio = verify_frequency(&[golden_mean()], 0.5, 0.5, 10_000);
    assert!(dio.pass, "golden mean failed at radius 1e4");

    let scan = IdsScan {
        n: 2000,
        eps: 1e-3,
        omega: vec![golden_mean()],
        theta_samples: 32,
        energy_grid: (0..200).map(|i| -2.0 + 4.0 * i as f64 / 199.0).collect(),
        etas: vec![1e-2, 1e-3, 1e-4],
        mu: 0.1,
        seed: 0xA5,
    };
    let report = holder_scan(&scan).unwrap();
    assert_eq!(report.cells.len(), 32 * 200 * 3);
    let mut worst_ratio = 0.0f64;
    for cell in &report.cells {
        assert!(
            cell.density <= cell.bound,
            "cell (theta {}, E {}, eta {}): density {} > bound {}",
            cell.theta,
            cell.energy,
            cell.eta,
            cell.density,
            cell.bound
        );
        worst_ratio = worst_ratio.max(cell.density / cell.bound);
    }

    // inertia counts cross-checked against a full eigensolve at N = 200
    let region = Region::integer_cube(200.0, &pt(&[0]));
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5A5);
    for _ in 0..6 {
        let theta = rng.gen_range(0.0..1.0);
        let params = OperatorParams::new(1e-3, vec![golden_mean()], theta, 0.0);
        let op = OperatorInstance::assemble(&region, &params).unwrap();
        let ev = sym_eigenvalues(&op.dense());
        for _ in 0..8 {
            let e = rng.gen_range(-2.0..2.0);
            let expect = ev.iter().filter(|&&l| l <= e).count();
            let (got, _) = count_leq(&op, e);
            assert_eq!(got, expect, "inertia vs eigensolve at E = {e}");
        }
    }
    finish(
        "A5",
        start,
        600.0,
        format!(
            "19200 cells all pass, worst density/bound = {worst_ratio:.3}; N=200 counts match eigensolve"
        ),
    );
}

#[test]
fn a6_localization() {
    let start = Instant::now();
    let eps = 1e-3;
    let n = 500u64;
    // Near-half-integer frequency: for golden-type frequencies the phase
    // condition on [5, 1000] at τ₁ = 0.3 has an empty solution set (the
    // violation arcs cover the circle), so the instance places ω near 1/2
    // where the arcs leave a gap at 2θ = 1/4.
    let omega = 0.5 + 2e-5 * golden_mean();
    let theta = 0.125;
    let phase = verify_phase_condition(theta, &[omega], 0.3, 5, 1000);
    assert!(phase.pass, "phase condition must pass on [5, 1000]");

    let params = OperatorParams::new(eps, vec![omega], theta, 0.0);
    let region = Region::integer_cube(n as f64, &pt(&[0]));
    let op = OperatorInstance::assemble(&region, &params).unwrap();
    let threshold = default_threshold(eps);
    assert!((threshold - 0.2878).abs() < 1e-3);
    let report = localization_report(&op, n as f64, threshold, 5.0, Some(true)).unwrap();
    assert!(
        report.pass_fraction >= 0.9,
        "pass fraction {:.3} below 0.9",
        report.pass_fraction
    );
    finish(
        "A6",
        start,
        300.0,
        format!(
            "{} pairs, pass fraction {:.3}, median rate {:.2}",
            report.rows.len(),
            report.pass_fraction,
            report.rate_quantiles[3].1
        ),
    );
}

#[test]
fn a7_msa_invariant_suite() {
    let start = Instant::now();
    let mut failures: Vec<String> = Vec::new();

    // --- d = 1: stage 0 → 1 → 2 (practical), three resonant sites so the
    // pairwise separation and covering invariants are exercised for real.
    // A same-sign site pair needs ‖m·ω‖ < δ₀ with everything else clear of
    // the resonance balls; for golden-type frequencies the three-distance
    // structure makes that impossible on any window (best approximants sit
    // exactly at the density where extra sites always intrude), so the run
    // plants a near-rational frequency whose q-periodic orbit leaves gaps.
    let omega_planted = 47.0 / 127.0 + 1e-9 * golden_mean();
    let scale = ScaleParams::new(
        1.25,
        0.5,
        0.5,
        1e-40,
        ScheduleMode::Practical {
            kappa: 3.0,
            rho: 2.0,
            n1: 4,
        },
    );
    let run1 = instances::retune_for_stage2(
        &[omega_planted],
        &scale,
        180.0,
        &[vec![-127], vec![0], vec![127]],
        0xA7,
    )
    .expect("retuned three-site instance");
    let stage1_snapshot = run1.clone();
    let mut run1 = run1;
    run1.advance().expect("stage-2 transition");
    assert_eq!(run1.top_stage(), 2);
    for check in invariants::verify_run(&run1) {
        if !check.pass {
            failures.push(format!("d=1 stage {}: {} ({})", check.stage, check.name, check.detail));
        }
    }

    // stage-1 determinant comparability band over 50 disc samples
    {
        let state = &stage1_snapshot.states[1];
        let blocks = state.blocks.as_ref().unwrap();
        let track = state.root_track.as_ref().unwrap();
        let center = Complex64::new(track.disc_center.0, track.disc_center.1);
        let radius = track.disc_radius;
        let delta0 = stage1_snapshot.states[0].delta;
        let mut rng = ChaCha8Rng::seed_from_u64(0xA77);
        let mut band_c: f64 = 0.0;
        for _ in 0..50 {
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(0.05..0.95) * radius;
            let z = center + Complex64::new(r * angle.cos(), r * angle.sin());
            let ratio = roots::schur_det_ratio(
                &blocks.outer,
                &blocks.core,
                &stage1_snapshot.model,
                state.theta,
                z,
            )
            .expect("ratio computable");
            band_c = band_c.max(ratio * delta0).max(delta0 / ratio);
        }
        if band_c > 100.0 {
            failures.push(format!("stage-1 determinant band C = {band_c:.2} > 100"));
        }
    }

    // 10 sampled 1-good regions: enlarged seeds away from the singular
    // anchor; bound margins must be nonnegative
    {
        let run = &stage1_snapshot;
        let mut sampled = 0;
        let mut offset = -30i64;
        while sampled < 10 {
            let seed_region =
                Region::integer_cube(8.0 + 2.0 * (sampled as f64), &pt(&[offset]));
            offset += 18;
            let enlarged = match good::enlarge_region(&seed_region, run) {
                Ok(r) => r,
                Err(_) => continue,
            };
            match good::verify_good_set_at_stage(&enlarged, run, 1) {
                Ok(v) if v.is_good => {}
                _ => continue,
            }
            let report = bounds::check_bounds_at_stage(&enlarged, run, 1)
                .expect("bounds computable on a 1-good region");
            if report.norm_margin < 0.0 {
                failures.push(format!(
                    "1-good region #{sampled}: norm margin {:.3e}",
                    report.norm_margin
                ));
            }
            if let Some(m) = report.decay_margin {
                if m < 0.0 {
                    failures.push(format!("1-good region #{sampled}: decay margin {m:.3e}"));
                }
            }
            sampled += 1;
        }
    }

    // --- d = 1 paired transition (C2) battery
    {
        let mut paired_scale =
            ScaleParams::new(1.25, 0.5, 0.5, 1e-40, ScheduleMode::practical_default());
        paired_scale.exponents.pair_factor = 3.0;
        paired_scale.mode = ScheduleMode::Practical {
            kappa: 3.0,
            rho: 2.0,
            n1: 4,
        };
        let mut run = instances::paired_stage0(
            &[golden_mean()],
            &paired_scale,
            120.0,
            1,
            &[2],
            &[-1],
            1e-6,
            0xA72,
        )
        .expect("paired instance");
        run.advance().expect("paired stage-1 transition");
        for check in invariants::verify_run(&run) {
            if !check.pass {
                failures.push(format!(
                    "d=1 C2 stage {}: {} ({})",
                    check.stage, check.name, check.detail
                ));
            }
        }
    }

    // --- d = 2: stage 0 → 1
    {
        let mut scale2 = ScaleParams::new(1.25, 0.5, 0.5, 1e-60, ScheduleMode::practical_default());
        scale2.mode = ScheduleMode::Practical {
            kappa: 3.0,
            rho: 2.0,
            n1: 4,
        };
        let mut run = instances::separated_stage0(
            &[golden_mean(), 2f64.sqrt() - 1.0],
            &scale2,
            60.0,
            1,
            &[vec![3, -2]],
            0.0,
            0xA73,
        )
        .expect("d=2 instance");
        run.advance().expect("d=2 stage-1 transition");
        for check in invariants::verify_run(&run) {
            if !check.pass {
                failures.push(format!(
                    "d=2 stage {}: {} ({})",
                    check.stage, check.name, check.detail
                ));
            }
        }
    }

    assert!(failures.is_empty(), "invariant failures:\n{}", failures.join("\n"));
    finish("A7", start, 300.0, "d=1 stages 0-2 + C2, d=2 stage 1, zero assertion failures".into());
}

#[test]
fn a8_resolvent_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA8);
    let mut worst = 0.0f64;
    let mut done = 0usize;
    while done < 100 {
        let d = if done.is_multiple_of(2) { 1 } else { 2 };
        let (outer, inner) = if d == 1 {
            let outer_r = rng.gen_range(30..=200) as f64;
            let inner_r = rng.gen_range(3..=(outer_r as i64 / 2)) as f64;
            let shift = rng.gen_range(-(outer_r as i64 - inner_r as i64)..=(outer_r as i64 - inner_r as i64));
            (
                Region::integer_cube(outer_r, &pt(&[0])),
                Region::integer_cube(inner_r, &pt(&[shift])),
            )
        } else {
            let outer_r = rng.gen_range(3..=9) as f64; // ≤ 19² = 361 sites
            let inner_r = rng.gen_range(1..=(outer_r as i64 - 1)) as f64;
            let sx = rng.gen_range(-(outer_r as i64 - inner_r as i64)..=(outer_r as i64 - inner_r as i64));
            let sy = rng.gen_range(-(outer_r as i64 - inner_r as i64)..=(outer_r as i64 - inner_r as i64));
            (
                Region::integer_cube(outer_r, &pt(&[0, 0])),
                Region::integer_cube(inner_r, &pt(&[sx, sy])),
            )
        };
        let omega: Vec<f64> = if d == 1 {
            vec![golden_mean()]
        } else {
            vec![golden_mean(), 2f64.sqrt() - 1.0]
        };
        let params = OperatorParams::new(
            rng.gen_range(0.01..0.3),
            omega,
            rng.gen_range(0.0..1.0),
            rng.gen_range(-2.0..2.0),
        );
        // both restrictions must be invertible; near-singular draws come
        // back as errors and are resampled
        let x: HalfLatticePoint = {
            let pts: Vec<_> = inner.iter().cloned().collect();
            pts[rng.gen_range(0..pts.len())].clone()
        };
        let y: HalfLatticePoint = {
            let pts: Vec<_> = outer.iter().cloned().collect();
            pts[rng.gen_range(0..pts.len())].clone()
        };
        let sigma_ok = {
            let op_o = OperatorInstance::assemble(&outer, &params).unwrap();
            let op_i = OperatorInstance::assemble(&inner, &params).unwrap();
            matches!(
                (invert(&op_o, Some(1e-2)), invert(&op_i, Some(1e-2))),
                (Ok(_), Ok(_))
            )
        };
        if !sigma_ok {
            continue;
        }
        let residual = resolvent_residual(&inner, &outer, &params, &x, &y).unwrap();
        assert!(
            residual <= 1e-9,
            "residual {residual:.3e} on pair #{done} (d={d})"
        );
        worst = worst.max(residual);
        done += 1;
    }
    finish(
        "A8",
        start,
        30.0,
        format!("100 nested pairs, worst residual {worst:.2e}"),
    );
}
