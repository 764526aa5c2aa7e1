//! Beamspace channel estimators.
//!
//! * [`sd_estimate`]: support detection. For each of the `L+1` path
//!   components the strongest beam is located from the residual, a contiguous
//!   window of `V` beams around it is taken as that component's support, the
//!   component is least-squares fitted and subtracted. A final least-squares
//!   fit on the union of all windows gives the estimate.
//! * [`omp_estimate`]: orthogonal matching pursuit on the same measurements.
//! * [`smd_estimate`]: beam scanning with `Q = N` instants and top-`keep`
//!   masking.

use std::collections::BTreeSet;

use nalgebra::DVector;
use rand::Rng;

use crate::channel::BeamspaceChannel;
use crate::error::invalid;
use crate::linalg::{self, argmax_abs, correlate, least_squares, select_columns};
use crate::measurement::Combiner;
use crate::rng::complex_normal;
use crate::{CVector, Complex64, Error, Result};

/// Beam indices in `1..=N`, without duplicates, in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    /// Builds a support set, rejecting out-of-range or repeated indices.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &i in &indices {
            if i == 0 || i > n {
                return Err(invalid(format!("beam index {i} outside 1..={n}")));
            }
            if !seen.insert(i) {
                return Err(invalid(format!("duplicate beam index {i}")));
            }
        }
        Ok(Self { indices })
    }

    /// 1-based indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, beam: usize) -> bool {
        self.indices.contains(&beam)
    }

    fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i - 1).collect()
    }
}

/// Output of an estimator.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    /// Estimated beamspace vector, zero outside `support`.
    pub vector: CVector,
    pub support: SupportSet,
    /// Strongest-beam position found for each component (1-based). Empty for
    /// estimators that do not work per component.
    pub per_component_peaks: Vec<usize>,
}

/// Support window of `v` beams around `n_star`, wrapped modulo `n`.
///
/// Even `v` covers `n* − v/2 ..= n* + (v−2)/2`; odd `v` covers
/// `n* − (v−1)/2 ..= n* + (v−1)/2`.
pub fn detect_support(n_star: usize, v: usize, n: usize) -> Result<SupportSet> {
    if n == 0 || n_star == 0 || n_star > n {
        return Err(invalid(format!("peak index {n_star} outside 1..={n}")));
    }
    if v == 0 {
        return Err(invalid("window length V must be positive"));
    }
    if v > n {
        return Err(invalid(format!("window length V = {v} exceeds N = {n}")));
    }
    let below = if v.is_multiple_of(2) { v / 2 } else { (v - 1) / 2 };
    let start = n_star as i64 - below as i64;
    let indices = (0..v as i64)
        .map(|o| ((start + o - 1).rem_euclid(n as i64) + 1) as usize)
        .collect();
    Ok(SupportSet { indices })
}

/// Support-detection estimate of one user's beamspace channel.
///
/// `num_nlos` is `L`, so `L+1` components are extracted.
pub fn sd_estimate(z: &CVector, w: &Combiner, num_nlos: usize, v: usize) -> Result<ChannelEstimate> {
    let q = w.num_measurements();
    let n = w.num_beams();
    if z.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            actual: z.len(),
        });
    }
    if v == 0 || v * (num_nlos + 1) > n {
        return Err(invalid(format!(
            "V(L+1) = {} must lie in 1..={n}",
            v * (num_nlos + 1)
        )));
    }
    let wm = w.matrix();
    let mut residual = z.clone();
    let mut union = BTreeSet::new();
    let mut peaks = Vec::with_capacity(num_nlos + 1);

    for _ in 0..=num_nlos {
        let corr = correlate(wm, &residual);
        let n_star = argmax_abs(&corr).expect("N >= 1") + 1;
        peaks.push(n_star);
        let window = detect_support(n_star, v, n)?.zero_based();
        let f = least_squares(&select_columns(wm, &window), &residual)?;
        residual -= linalg::apply_columns(wm, &window, &f);
        union.extend(window);
    }

    let total: Vec<usize> = union.into_iter().collect();
    if total.len() > q {
        return Err(Error::SupportTooLarge {
            support: total.len(),
            measurements: q,
        });
    }
    let f_total = least_squares(&select_columns(wm, &total), z)?;
    let mut vector = CVector::zeros(n);
    for (&i, &x) in total.iter().zip(f_total.iter()) {
        vector[i] = x;
    }
    Ok(ChannelEstimate {
        vector,
        support: SupportSet {
            indices: total.iter().map(|i| i + 1).collect(),
        },
        per_component_peaks: peaks,
    })
}

/// Orthogonal matching pursuit with a fixed number of iterations.
pub fn omp_estimate(z: &CVector, w: &Combiner, sparsity: usize) -> Result<ChannelEstimate> {
    let q = w.num_measurements();
    let n = w.num_beams();
    if z.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            actual: z.len(),
        });
    }
    if sparsity > q || sparsity > n {
        return Err(Error::SupportTooLarge {
            support: sparsity,
            measurements: q.min(n),
        });
    }
    let wm = w.matrix();
    let mut selected: Vec<usize> = Vec::with_capacity(sparsity);
    let mut residual = z.clone();
    // Orthonormal basis of the selected columns; the residual is kept as the
    // projection of z onto its complement, equal to z minus the LS fit.
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(sparsity);
    for _ in 0..sparsity {
        let corr = correlate(wm, &residual);
        let mut pick = None;
        let mut best = f64::NEG_INFINITY;
        for (i, c) in corr.iter().enumerate() {
            if c.norm_sqr() > best && !selected.contains(&i) {
                best = c.norm_sqr();
                pick = Some(i);
            }
        }
        let pick = pick.expect("sparsity <= N leaves a free column");
        selected.push(pick);
        let col = wm.column(pick).into_owned();
        let mut u = col.clone();
        for _ in 0..2 {
            for b in &basis {
                let d = b.dot(&u);
                u.axpy(-d, b, 1.0);
            }
        }
        let norm = u.norm();
        if norm > linalg::SINGULAR_RATIO * col.norm() {
            u /= norm;
            let proj = u
                .iter()
                .zip(residual.iter())
                .fold(Complex64::new(0.0, 0.0), |acc, (a, r)| acc + r * *a);
            for (r, a) in residual.iter_mut().zip(u.iter()) {
                *r -= proj * *a;
            }
            basis.push(u);
        }
    }
    let coef = least_squares(&select_columns(wm, &selected), z)?;
    let mut vector = CVector::zeros(n);
    for (&i, &x) in selected.iter().zip(coef.iter()) {
        vector[i] = x;
    }
    Ok(ChannelEstimate {
        vector,
        support: SupportSet {
            indices: selected.iter().map(|i| i + 1).collect(),
        },
        per_component_peaks: Vec::new(),
    })
}

/// Sparsity-mask-detection baseline.
///
/// Every beam is observed once (`y_n = h̃_n + CN(0, σ²)`), the `keep`
/// strongest observations form the mask and are returned as-is.
pub fn smd_estimate<R: Rng + ?Sized>(
    hb: &BeamspaceChannel,
    sigma2_ul: f64,
    keep: usize,
    rng: &mut R,
) -> Result<ChannelEstimate> {
    let n = hb.num_antennas();
    if keep > n {
        return Err(invalid(format!("keep = {keep} exceeds N = {n}")));
    }
    if !(sigma2_ul >= 0.0) || !sigma2_ul.is_finite() {
        return Err(invalid("uplink noise variance must be finite and non-negative"));
    }
    let observed: CVector = hb.vector().map(|h| h + complex_normal(rng, sigma2_ul));
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps the lowest index first among equal magnitudes.
    order.sort_by(|&a, &b| {
        observed[b]
            .norm_sqr()
            .partial_cmp(&observed[a].norm_sqr())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order.truncate(keep);
    let mut vector = CVector::zeros(n);
    for &i in &order {
        vector[i] = observed[i];
    }
    Ok(ChannelEstimate {
        vector,
        support: SupportSet {
            indices: order.iter().map(|i| i + 1).collect(),
        },
        per_component_peaks: Vec::new(),
    })
}

/// `‖estimate − truth‖² / ‖truth‖²`.
pub fn nmse(estimate: &CVector, truth: &CVector) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: estimate.len(),
        });
    }
    let denom = linalg::norm_sqr(truth);
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(linalg::norm_sqr(&(estimate - truth)) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::generate_combiner;
    use crate::rng::from_seed;
    use num_complex::Complex64;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn support_windows() {
        assert_eq!(
            detect_support(128, 8, 256).unwrap().indices(),
            &[124, 125, 126, 127, 128, 129, 130, 131]
        );
        assert_eq!(
            detect_support(2, 8, 256).unwrap().indices(),
            &[254, 255, 256, 1, 2, 3, 4, 5]
        );
        assert_eq!(detect_support(1, 3, 8).unwrap().indices(), &[8, 1, 2]);
        assert_eq!(detect_support(256, 2, 256).unwrap().indices(), &[255, 256]);
        assert_eq!(detect_support(3, 4, 4).unwrap().len(), 4);
        assert!(detect_support(1, 9, 8).is_err());
        assert!(detect_support(0, 2, 8).is_err());
        assert!(detect_support(9, 2, 8).is_err());
    }

    #[test]
    fn support_set_validation() {
        assert!(SupportSet::new(vec![1, 2, 3], 3).is_ok());
        assert!(SupportSet::new(vec![0], 3).is_err());
        assert!(SupportSet::new(vec![4], 3).is_err());
        assert!(SupportSet::new(vec![2, 2], 3).is_err());
    }

    fn one_hot(n: usize, beam: usize, gain: Complex64) -> CVector {
        let mut h = CVector::zeros(n);
        h[beam - 1] = gain;
        h
    }

    #[test]
    fn sd_recovers_single_on_grid_path() {
        let n = 64;
        let w = generate_combiner(32, n, &mut from_seed(1)).unwrap();
        let h = one_hot(n, 40, Complex64::new(2.0, -1.0));
        let z = w.measure(&h).unwrap();
        for v in [1, 2, 5, 8] {
            let est = sd_estimate(&z, &w, 0, v).unwrap();
            assert!((&est.vector - &h).norm() < 1e-8 * h.norm(), "V={v}");
            assert_eq!(est.per_component_peaks, vec![40]);
            assert_eq!(est.support.len(), v);
        }
    }

    #[test]
    fn sd_handles_coincident_components() {
        let n = 64;
        let w = generate_combiner(32, n, &mut from_seed(2)).unwrap();
        let h = one_hot(n, 10, Complex64::new(1.0, 0.0));
        let z = w.measure(&h).unwrap();
        let est = sd_estimate(&z, &w, 1, 4).unwrap();
        assert!(est.support.len() < 8);
        assert!(est.vector.iter().enumerate().all(|(i, x)| est.support.contains(i + 1)
            || *x == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn sd_support_is_union_of_windows() {
        let n = 128;
        let w = generate_combiner(48, n, &mut from_seed(3)).unwrap();
        let mut rng = from_seed(4);
        let h = CVector::from_fn(n, |_, _| complex_normal(&mut rng, 1.0));
        let z = w.measure(&h).unwrap();
        let est = sd_estimate(&z, &w, 2, 4).unwrap();
        let mut union = BTreeSet::new();
        for &p in &est.per_component_peaks {
            union.extend(detect_support(p, 4, n).unwrap().indices().iter().copied());
        }
        assert_eq!(set(est.support.indices()), union);
    }

    #[test]
    fn sd_rejects_bad_inputs() {
        let w = generate_combiner(8, 16, &mut from_seed(5)).unwrap();
        let z = CVector::zeros(8);
        assert!(matches!(
            sd_estimate(&CVector::zeros(7), &w, 0, 2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(sd_estimate(&z, &w, 3, 5).is_err());
        // Window of 12 columns does not fit into 8 measurements.
        assert!(matches!(
            sd_estimate(&z, &w, 0, 12),
            Err(Error::SupportTooLarge { .. })
        ));
    }

    #[test]
    fn omp_basic_cases() {
        let n = 64;
        let w = generate_combiner(24, n, &mut from_seed(6)).unwrap();
        let h = one_hot(n, 7, Complex64::new(0.0, 3.0));
        let z = w.measure(&h).unwrap();
        let est = omp_estimate(&z, &w, 1).unwrap();
        assert!((&est.vector - &h).norm() < 1e-10);
        assert_eq!(est.support.indices(), &[7]);

        let zero = omp_estimate(&z, &w, 0).unwrap();
        assert_eq!(zero.vector, CVector::zeros(n));
        assert!(zero.support.is_empty());

        assert!(omp_estimate(&z, &w, 25).is_err());
    }

    #[test]
    fn smd_cases() {
        let mut rng = from_seed(7);
        let h = BeamspaceChannel::from_vector(CVector::from_fn(32, |_, _| complex_normal(&mut rng, 1.0)));
        let full = smd_estimate(&h, 0.0, 32, &mut from_seed(1)).unwrap();
        assert_eq!(&full.vector, h.vector());

        // Noiseless masking discards exactly the weakest entries.
        let keep = 10;
        let est = smd_estimate(&h, 0.0, keep, &mut from_seed(1)).unwrap();
        let mut powers: Vec<f64> = h.vector().iter().map(|x| x.norm_sqr()).collect();
        powers.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let tail: f64 = powers[keep..].iter().sum();
        let err = linalg::norm_sqr(&(&est.vector - h.vector()));
        assert!((err - tail).abs() < 1e-12);

        let a = smd_estimate(&h, 0.3, keep, &mut from_seed(9)).unwrap();
        let b = smd_estimate(&h, 0.3, keep, &mut from_seed(9)).unwrap();
        assert_eq!(a.vector, b.vector);
        assert!(smd_estimate(&h, 0.3, 33, &mut from_seed(9)).is_err());
    }

    #[test]
    fn nmse_values() {
        let h = CVector::from_vec(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0)]);
        assert_eq!(nmse(&CVector::zeros(2), &h).unwrap(), 1.0);
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert!((nmse(&(&h * Complex64::new(2.0, 0.0)), &h).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(nmse(&h, &CVector::zeros(2)), Err(Error::ZeroNorm)));
    }
}
