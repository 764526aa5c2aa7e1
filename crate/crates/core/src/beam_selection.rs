//! Interference-aware beam selection, dimension-reduced zero-forcing and
//! downlink sum-rate.
//!
//! Users whose strongest beam is not shared with any other user are
//! non-interference users (NIU) and keep that beam. The remaining
//! interference users (IU) are served incrementally: at each step the
//! (user, beam) pair that maximizes the zero-forcing sum-rate of the users
//! served so far is added.

use std::collections::BTreeSet;

use nalgebra::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::linalg::{argmax_abs, SINGULAR_RATIO};
use crate::{CMatrix, CVector, Error, Result};

/// Classification produced by the NIU/IU rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UserClass {
    NonInterference,
    Interference,
}

/// Selected beams and how each user was treated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeamSelection {
    /// Selected beams, ascending, 1-based.
    pub beams: Vec<usize>,
    pub per_user_flag: Vec<UserClass>,
    /// Beam assigned to each user, 1-based.
    pub assignment: Vec<usize>,
}

impl BeamSelection {
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }
}

/// Tuning of the IU greedy search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IaOptions {
    /// Downlink transmit power `ρ` used in the sum-rate metric.
    pub rho: f64,
    /// Downlink noise power used in the sum-rate metric.
    pub sigma2_dl: f64,
    /// Number of strongest free beams of an IU considered per step.
    pub max_candidates: usize,
}

impl Default for IaOptions {
    fn default() -> Self {
        Self {
            rho: 1.0,
            sigma2_dl: 0.01,
            max_candidates: 16,
        }
    }
}

/// Precoder for the reduced channel together with its power budget.
#[derive(Debug, Clone)]
pub struct PrecodingResult {
    pub precoder: CMatrix,
    pub power_budget: f64,
}

impl PrecodingResult {
    /// Wraps an explicit precoder, checking `tr(P Pᴴ) ≤ ρ`.
    pub fn new(precoder: CMatrix, power_budget: f64) -> Result<Self> {
        let power = frobenius_sqr(&precoder);
        if power > power_budget * (1.0 + 1e-9) {
            return Err(invalid(format!(
                "precoder power {power} exceeds the budget {power_budget}"
            )));
        }
        Ok(Self {
            precoder,
            power_budget,
        })
    }

    /// `tr(P Pᴴ)`.
    pub fn transmit_power(&self) -> f64 {
        frobenius_sqr(&self.precoder)
    }
}

fn frobenius_sqr(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum()
}

/// Zero-forcing precoder `H (Hᴴ H)⁻¹` scaled to `tr(P Pᴴ) = ρ`.
///
/// `h_r` is `|B|×K` (beams by users) and must have full column rank.
pub fn zf_precoder(h_r: &CMatrix, rho: f64) -> Result<PrecodingResult> {
    let (rows, cols) = h_r.shape();
    if !(rho > 0.0) {
        return Err(invalid("transmit power must be positive"));
    }
    if cols == 0 || rows < cols {
        return Err(Error::SingularSystem {
            rows,
            cols,
            ratio: 0.0,
        });
    }
    let svd = SVD::new(h_r.clone(), true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio >= SINGULAR_RATIO) {
        return Err(Error::SingularSystem { rows, cols, ratio });
    }
    // H (Hᴴ H)⁻¹ = U Σ⁻¹ Vᴴ.
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᴴ");
    let mut scaled_u = u.clone();
    for (j, mut col) in scaled_u.column_iter_mut().enumerate() {
        col /= Complex64::new(svd.singular_values[j], 0.0);
    }
    let mut p = scaled_u * v_t;
    let power = frobenius_sqr(&p);
    p *= Complex64::new((rho / power).sqrt(), 0.0);
    Ok(PrecodingResult {
        precoder: p,
        power_budget: rho,
    })
}

/// `Σ_k log₂(1 + |h_kᴴ p_k|² / (Σ_{j≠k} |h_kᴴ p_j|² + σ²))`.
pub fn sum_rate(h_true_reduced: &CMatrix, p: &PrecodingResult, sigma2_dl: f64) -> Result<f64> {
    let (rows, users) = h_true_reduced.shape();
    if p.precoder.nrows() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            actual: p.precoder.nrows(),
        });
    }
    if p.precoder.ncols() != users {
        return Err(Error::DimensionMismatch {
            expected: users,
            actual: p.precoder.ncols(),
        });
    }
    if !(sigma2_dl > 0.0) {
        return Err(invalid("downlink noise power must be positive"));
    }
    let g = h_true_reduced.adjoint() * &p.precoder;
    let mut total = 0.0;
    for k in 0..users {
        let signal = g[(k, k)].norm_sqr();
        let interference: f64 = (0..users)
            .filter(|&j| j != k)
            .map(|j| g[(k, j)].norm_sqr())
            .sum();
        total += (signal / (interference + sigma2_dl)).ln_1p() / std::f64::consts::LN_2;
    }
    Ok(total)
}

/// Rows `beams` (1-based) of the beamspace channels, as a `|B|×K` matrix.
pub fn reduced_channel(channels: &[CVector], beams: &[usize]) -> Result<CMatrix> {
    let n = channels.first().map(|c| c.len()).unwrap_or(0);
    if let Some(c) = channels.iter().find(|c| c.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: c.len(),
        });
    }
    if let Some(&b) = beams.iter().find(|&&b| b == 0 || b > n) {
        return Err(invalid(format!("beam index {b} outside 1..={n}")));
    }
    Ok(CMatrix::from_fn(beams.len(), channels.len(), |r, c| {
        channels[c][beams[r] - 1]
    }))
}

fn zf_metric(channels: &[CVector], users: &[usize], beams: &[usize], opts: &IaOptions) -> Option<f64> {
    let h = CMatrix::from_fn(beams.len(), users.len(), |r, c| channels[users[c]][beams[r]]);
    let p = zf_precoder(&h, opts.rho).ok()?;
    sum_rate(&h, &p, opts.sigma2_dl).ok()
}

/// Interference-aware beam selection on estimated beamspace channels.
pub fn ia_beam_select(estimates: &[CVector], n_rf: usize, opts: &IaOptions) -> Result<BeamSelection> {
    let k = estimates.len();
    if k == 0 {
        return Err(invalid("no users to select beams for"));
    }
    if n_rf != k {
        return Err(invalid(format!(
            "beam selection serves one beam per user: N_RF = {n_rf} but K = {k}"
        )));
    }
    let n = estimates[0].len();
    if let Some(e) = estimates.iter().find(|e| e.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: e.len(),
        });
    }
    if opts.max_candidates == 0 {
        return Err(invalid("max_candidates must be positive"));
    }
    let mut top = Vec::with_capacity(k);
    for (u, e) in estimates.iter().enumerate() {
        if e.iter().all(|x| x.norm_sqr() == 0.0) {
            return Err(invalid(format!("estimate of user {} is identically zero", u + 1)));
        }
        top.push(argmax_abs(e.iter()).expect("non-empty"));
    }
    let flags: Vec<UserClass> = (0..k)
        .map(|u| {
            if (0..k).any(|j| j != u && top[j] == top[u]) {
                UserClass::Interference
            } else {
                UserClass::NonInterference
            }
        })
        .collect();

    let mut assignment: Vec<Option<usize>> = vec![None; k];
    let mut taken = BTreeSet::new();
    for u in 0..k {
        if flags[u] == UserClass::NonInterference {
            assignment[u] = Some(top[u]);
            taken.insert(top[u]);
        }
    }

    let free_beams_of = |u: usize, taken: &BTreeSet<usize>| -> Vec<usize> {
        let mut beams: Vec<usize> = (0..n)
            .filter(|b| !taken.contains(b) && estimates[u][*b].norm_sqr() > 0.0)
            .collect();
        beams.sort_by(|&a, &b| {
            estimates[u][b]
                .norm_sqr()
                .partial_cmp(&estimates[u][a].norm_sqr())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        beams.truncate(opts.max_candidates);
        beams
    };

    loop {
        let pending: Vec<usize> = (0..k).filter(|&u| assignment[u].is_none()).collect();
        if pending.is_empty() {
            break;
        }
        let served: Vec<usize> = (0..k).filter(|&u| assignment[u].is_some()).collect();
        let served_beams: Vec<usize> = served.iter().map(|&u| assignment[u].unwrap()).collect();

        let mut best: Option<(f64, usize, usize)> = None;
        let mut fallback: Option<(f64, usize, usize)> = None;
        for &u in &pending {
            for b in free_beams_of(u, &taken) {
                let power = estimates[u][b].norm_sqr();
                if fallback.is_none_or(|(p, _, _)| power > p) {
                    fallback = Some((power, u, b));
                }
                let mut users = served.clone();
                users.push(u);
                let mut beams = served_beams.clone();
                beams.push(b);
                if let Some(rate) = zf_metric(estimates, &users, &beams, opts) {
                    if best.is_none_or(|(r, _, _)| rate > r) {
                        best = Some((rate, u, b));
                    }
                }
            }
        }
        let (u, b) = match best.or(fallback) {
            Some((_, u, b)) => (u, b),
            None => {
                // The pending users have no free beam with energy; borrow the
                // strongest free beam across all users.
                let u = pending[0];
                let b = (0..n)
                    .filter(|b| !taken.contains(b))
                    .map(|b| (b, estimates.iter().map(|e| e[b].norm_sqr()).sum::<f64>()))
                    .filter(|&(_, p)| p > 0.0)
                    .fold(None, |acc: Option<(usize, f64)>, (b, p)| match acc {
                        Some((_, bp)) if bp >= p => acc,
                        _ => Some((b, p)),
                    })
                    .map(|(b, _)| b)
                    .ok_or_else(|| {
                        invalid(format!(
                            "fewer than N_RF = {n_rf} distinct beams carry estimated energy"
                        ))
                    })?;
                (u, b)
            }
        };
        assignment[u] = Some(b);
        taken.insert(b);
    }

    let assignment: Vec<usize> = assignment.into_iter().map(|b| b.unwrap() + 1).collect();
    let mut beams = assignment.clone();
    beams.sort_unstable();
    Ok(BeamSelection {
        beams,
        per_user_flag: flags,
        assignment,
    })
}
