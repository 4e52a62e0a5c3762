//! Green's functions and certified bounds.
//!
//! `G = T_Λ^{-1}` with a residual certificate, the zero-scale Neumann bounds,
//! Schur complements with determinant cross-checks, the resolvent identity,
//! and certified-minimum decay fitting.

use crate::lattice::{HalfLatticePoint, Region};
use crate::linalg::{
    self, invert_dense, log_det, sym_op_norm, LinalgError, LogDet,
};
use crate::operator::{OperatorError, OperatorInstance, OperatorParams};
use crate::torus::torus_norm_c;
use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GreenError {
    #[error("near-singular: smallest singular value {sigma:.3e} < tolerance {tol:.3e}")]
    NearSingular { sigma: f64, tol: f64 },
    #[error("complement block near-singular")]
    ComplementSingular,
    #[error("certificate-violated at pair ({x}, {y}): |G| = {value:.3e}, bound {bound:.3e}")]
    CertificateViolated {
        x: HalfLatticePoint,
        y: HalfLatticePoint,
        value: f64,
        bound: f64,
    },
    #[error("region is not 0-good: {witnesses} resonant sites")]
    NotZeroGood { witnesses: usize },
    #[error("region-too-small")]
    RegionTooSmall,
    #[error("operator error: {0}")]
    Operator(#[from] OperatorError),
    #[error("linalg error: {0}")]
    Linalg(#[from] LinalgError),
}

/// Default singularity tolerance relative to ‖T‖.
pub const SINGULARITY_TOL_REL: f64 = 1e-12;

/// A computed Green's function with its certificates.
#[derive(Debug, Clone)]
pub struct GreensFunction {
    pub points: Vec<HalfLatticePoint>,
    pub entries: DMatrix<f64>,
    /// Operator norm of `G` (reciprocal of the smallest singular value of T).
    pub op_norm: f64,
    pub sigma_min: f64,
    /// Condition estimate `‖T‖·‖T^{-1}‖`.
    pub condition_estimate: f64,
    /// Max-norm residual of `T·G - I`.
    pub residual: f64,
}

impl GreensFunction {
    pub fn entry(&self, x: &HalfLatticePoint, y: &HalfLatticePoint) -> Option<f64> {
        let i = self.points.binary_search(x).ok()?;
        let j = self.points.binary_search(y).ok()?;
        Some(self.entries[(i, j)])
    }
}

/// Invert `T_Λ`, certifying the residual and the distance to singularity.
///
/// `singularity_tol` defaults to `1e-12 · ‖T‖` when `None`; a smallest
/// singular value below it is the signal that Λ is not good at the working
/// scale and comes back as [`GreenError::NearSingular`].
pub fn invert(op: &OperatorInstance, singularity_tol: Option<f64>) -> Result<GreensFunction, GreenError> {
    let t = op.dense();
    let n = t.nrows();
    let sigma_min = if n <= 1024 {
        linalg::sym_sigma_min(&t)
    } else {
        let band = op.banded();
        band.sigma_min_at(0.0, band.row_sum_norm() + 1.0)
    };
    let t_norm = if n <= 1024 {
        sym_op_norm(&t)
    } else {
        op.row_sum_norm()
    };
    let tol = singularity_tol.unwrap_or(SINGULARITY_TOL_REL * t_norm.max(1.0));
    if sigma_min < tol {
        return Err(GreenError::NearSingular {
            sigma: sigma_min,
            tol,
        });
    }
    let entries = invert_dense(&t)?;
    let residual = (&t * &entries - DMatrix::<f64>::identity(n, n)).abs().max();
    Ok(GreensFunction {
        points: op.points.clone(),
        entries,
        op_norm: 1.0 / sigma_min,
        sigma_min,
        condition_estimate: t_norm / sigma_min,
        residual,
    })
}

/// Outcome of the stage-0 resonance scan.
#[derive(Debug, Clone)]
pub struct ZeroGoodReport {
    pub is_good: bool,
    /// Offending sites with their resonance margin `min_σ ‖θ + k·ω + σθ₀‖`.
    pub witnesses: Vec<(HalfLatticePoint, f64)>,
}

/// `Λ` is 0-good iff no site satisfies `min(‖θ+k·ω+θ₀‖, ‖θ+k·ω-θ₀‖) < δ₀`.
pub fn check_zero_good(
    region: &Region,
    params: &OperatorParams,
    theta0: Complex64,
    delta0: f64,
) -> ZeroGoodReport {
    let mut witnesses = Vec::new();
    for k in region.iter() {
        let x = Complex64::new(params.phase(k), 0.0);
        let margin = torus_norm_c(x + theta0).min(torus_norm_c(x - theta0));
        if margin < delta0 {
            witnesses.push((k.clone(), margin));
        }
    }
    ZeroGoodReport {
        is_good: witnesses.is_empty(),
        witnesses,
    }
}

/// A-priori bounds on a 0-good region: `‖T^{-1}‖ < δ₀^{-2}` and
/// `|G(x,y)| < e^{-γ₀‖x-y‖₁}` with `γ₀ = ½|log ε|`.
#[derive(Debug, Clone)]
pub struct NeumannCertificate {
    pub norm_bound: f64,
    pub decay_rate: f64,
    /// Measured norm and worst decay margin when verification ran.
    pub measured_norm: Option<f64>,
    pub worst_margin: Option<f64>,
}

/// Certificate for a 0-good region; with `verify` the region is inverted and
/// both bounds are asserted entrywise.
pub fn neumann_certificate(
    op: &OperatorInstance,
    theta0: Complex64,
    delta0: f64,
    verify: bool,
) -> Result<NeumannCertificate, GreenError> {
    let report = check_zero_good(&op.region, &op.params, theta0, delta0);
    if !report.is_good {
        return Err(GreenError::NotZeroGood {
            witnesses: report.witnesses.len(),
        });
    }
    let norm_bound = delta0.powi(-2);
    let decay_rate = 0.5 * op.params.eps.ln().abs();
    if !verify {
        return Ok(NeumannCertificate {
            norm_bound,
            decay_rate,
            measured_norm: None,
            worst_margin: None,
        });
    }
    let g = invert(op, None)?;
    if g.op_norm >= norm_bound {
        return Err(GreenError::CertificateViolated {
            x: op.points[0].clone(),
            y: op.points[0].clone(),
            value: g.op_norm,
            bound: norm_bound,
        });
    }
    let mut worst = f64::INFINITY;
    for (i, x) in op.points.iter().enumerate() {
        for (j, y) in op.points.iter().enumerate() {
            if i == j {
                continue;
            }
            let bound = (-decay_rate * x.dist_l1(y)).exp();
            let v = g.entries[(i, j)].abs();
            if v >= bound {
                return Err(GreenError::CertificateViolated {
                    x: x.clone(),
                    y: y.clone(),
                    value: v,
                    bound,
                });
            }
            worst = worst.min(bound - v);
        }
    }
    Ok(NeumannCertificate {
        norm_bound,
        decay_rate,
        measured_norm: Some(g.op_norm),
        worst_margin: if worst.is_finite() { Some(worst) } else { None },
    })
}

/// Schur complement of the complement of `subset` in `m`:
/// `S = M_A - M_{A,A^c} (M_{A^c})^{-1} M_{A^c,A}`, together with the
/// determinant identity check `det M = det M_{A^c} · det S`.
#[derive(Debug, Clone)]
pub struct SchurResult<T: ComplexField> {
    pub s: DMatrix<T>,
    pub det_m: LogDet,
    pub det_complement: LogDet,
    pub det_s: LogDet,
    /// `|det M - det M_{A^c}·det S|` relative to `max(1, |det M|)`.
    pub det_check: f64,
}

pub fn schur_complement<T>(m: &DMatrix<T>, subset: &[usize]) -> Result<SchurResult<T>, GreenError>
where
    T: ComplexField<RealField = f64>,
{
    let n = m.nrows();
    if n != m.ncols() {
        return Err(GreenError::Linalg(LinalgError::NotSquare));
    }
    let in_subset: Vec<bool> = {
        let mut v = vec![false; n];
        for &i in subset {
            v[i] = true;
        }
        v
    };
    let a_idx: Vec<usize> = (0..n).filter(|&i| in_subset[i]).collect();
    let c_idx: Vec<usize> = (0..n).filter(|&i| !in_subset[i]).collect();
    let select = |rows: &[usize], cols: &[usize]| -> DMatrix<T> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])].clone())
    };
    let m_cc = select(&c_idx, &c_idx);
    let m_ac = select(&a_idx, &c_idx);
    let m_ca = select(&c_idx, &a_idx);
    let m_aa = select(&a_idx, &a_idx);
    let s = if c_idx.is_empty() {
        m_aa
    } else {
        let lu = m_cc.clone().lu();
        let solved = lu.solve(&m_ca).ok_or(GreenError::ComplementSingular)?;
        &m_aa - &m_ac * solved
    };
    let det_m = log_det(m);
    let det_complement = log_det(&m_cc);
    let det_s = log_det(&s);
    let det_check = det_m.rel_diff(det_complement.product(det_s));
    Ok(SchurResult {
        s,
        det_m,
        det_complement,
        det_s,
        det_check,
    })
}

/// The norm sandwich `‖S^{-1}‖ ≤ ‖M^{-1}‖ < 4(1+‖A^{-1}‖)²(1+‖S^{-1}‖)`,
/// where `A` is the complement block. The upper bound requires the
/// off-diagonal blocks to have norm ≤ 1.
#[derive(Debug, Clone)]
pub struct SchurNormBound {
    pub s_inv_norm: f64,
    pub m_inv_norm: f64,
    pub bound: f64,
    pub sandwich_holds: bool,
}

pub fn schur_norm_bound(m: &DMatrix<f64>, subset: &[usize]) -> Result<SchurNormBound, GreenError> {
    let n = m.nrows();
    let in_subset: Vec<bool> = {
        let mut v = vec![false; n];
        for &i in subset {
            v[i] = true;
        }
        v
    };
    let c_idx: Vec<usize> = (0..n).filter(|&i| !in_subset[i]).collect();
    let result = schur_complement(m, subset)?;
    let inv_norm_sym = |x: &DMatrix<f64>| -> Result<f64, GreenError> {
        if x.is_empty() {
            return Ok(0.0);
        }
        let sigma = linalg::sym_sigma_min(x);
        if sigma == 0.0 {
            return Err(GreenError::ComplementSingular);
        }
        Ok(1.0 / sigma)
    };
    let m_cc = DMatrix::from_fn(c_idx.len(), c_idx.len(), |i, j| m[(c_idx[i], c_idx[j])]);
    let a_inv_norm = inv_norm_sym(&m_cc)?;
    let s_inv_norm = inv_norm_sym(&result.s)?;
    let m_inv_norm = inv_norm_sym(m)?;
    let bound = 4.0 * (1.0 + a_inv_norm).powi(2) * (1.0 + s_inv_norm);
    // tolerate roundoff at the lower edge of the sandwich
    let sandwich_holds = s_inv_norm <= m_inv_norm * (1.0 + 1e-10) && m_inv_norm < bound;
    Ok(SchurNormBound {
        s_inv_norm,
        m_inv_norm,
        bound,
        sandwich_holds,
    })
}

/// Evaluate the resolvent identity defect
/// `T_Λ^{-1}(x,y) - [T_{Λ'}^{-1}(x,y)χ_{Λ'}(y) - Σ_{(w,w')∈∂_Λ Λ'} T_{Λ'}^{-1}(x,w) Γ(w,w') T_Λ^{-1}(w',y)]`
/// with `Γ = ε` on ℓ¹-distance-1 bonds.
pub fn resolvent_residual(
    inner: &Region,
    outer: &Region,
    params: &OperatorParams,
    x: &HalfLatticePoint,
    y: &HalfLatticePoint,
) -> Result<f64, GreenError> {
    let op_outer = OperatorInstance::assemble(outer, params)?;
    let op_inner = OperatorInstance::assemble(inner, params)?;
    let g_outer = invert(&op_outer, None)?;
    let g_inner = invert(&op_inner, None)?;
    let boundary = Region::boundary(inner, outer).map_err(OperatorError::from)?;

    let lhs = g_outer.entry(x, y).expect("x, y must lie in the outer region");
    let mut rhs = if inner.contains(y) {
        g_inner.entry(x, y).expect("x must lie in the inner region")
    } else {
        0.0
    };
    for (w, w2) in &boundary {
        if w.dist_l1(w2) == 1.0 {
            let a = g_inner.entry(x, w).unwrap();
            let b = g_outer.entry(w2, y).unwrap();
            rhs -= a * params.eps * b;
        }
    }
    Ok((lhs - rhs).abs())
}

/// Certified uniform decay fit: the largest rate γ with
/// `|G(x,y)| ≤ e^{-γ‖x-y‖₁}` over all pairs with `‖x-y‖ > threshold`.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub rate: f64,
    pub threshold_radius: f64,
    /// Gap between the binding pair and the second-worst pair.
    pub residual: f64,
    pub worst_pair: Option<(HalfLatticePoint, HalfLatticePoint)>,
}

/// Sentinel cap for rates produced by exact zeros.
pub fn max_rate(eps: f64) -> f64 {
    if eps <= 0.0 {
        1e3
    } else {
        10.0 * eps.ln().abs()
    }
}

pub fn fit_decay(
    g: &GreensFunction,
    threshold_radius: f64,
    eps: f64,
) -> Result<DecayFit, GreenError> {
    let cap = max_rate(eps);
    let mut rates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in g.points.iter().enumerate() {
        for (j, y) in g.points.iter().enumerate() {
            if j <= i {
                continue;
            }
            if x.dist(y) <= threshold_radius {
                continue;
            }
            let v = g.entries[(i, j)].abs().max(g.entries[(j, i)].abs());
            let rate = if v == 0.0 {
                cap
            } else {
                (-v.ln() / x.dist_l1(y)).min(cap)
            };
            rates.push((rate, i, j));
        }
    }
    if rates.is_empty() {
        return Err(GreenError::RegionTooSmall);
    }
    rates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (rate, i, j) = rates[0];
    let residual = if rates.len() > 1 { rates[1].0 - rate } else { 0.0 };
    Ok(DecayFit {
        rate,
        threshold_radius,
        residual,
        worst_pair: Some((g.points[i].clone(), g.points[j].clone())),
    })
}
