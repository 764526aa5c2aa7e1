//! Closed-form bounds on beamspace power concentration and on the probability
//! of locating the strongest beam.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{CVector, Error, Result};

/// Lower bound on the fraction of a path component's power held by its `v`
/// strongest beams: `(2/N²) Σ_{i=1}^{V/2} 1/sin²((2i−1)π/2N)`.
///
/// The bound is attained when the path sits half a grid step between two
/// beams.
pub fn power_ratio_lower_bound(n: usize, v: usize) -> Result<f64> {
    if v == 0 || !v.is_multiple_of(2) {
        return Err(invalid(format!("V = {v} must be a positive even integer")));
    }
    if v > n {
        return Err(invalid(format!("V = {v} exceeds N = {n}")));
    }
    let nn = n as f64;
    let sum: f64 = (1..=v / 2)
        .map(|i| {
            let s = ((2 * i - 1) as f64 * PI / (2.0 * nn)).sin();
            1.0 / (s * s)
        })
        .sum();
    Ok(2.0 / (nn * nn) * sum)
}

/// Fraction of `‖c‖²` carried by the `v` largest-magnitude entries.
pub fn empirical_power_ratio(c: &CVector, v: usize) -> Result<f64> {
    let mut powers: Vec<f64> = c.iter().map(|x| x.norm_sqr()).collect();
    let total: f64 = powers.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroNorm);
    }
    powers.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let kept: f64 = powers.iter().take(v).sum();
    Ok(kept / total)
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("N = {n} must be at least 2")));
    }
    Ok(())
}

/// Sidelobe-mass factor
/// `η = (Σ_{n=1}^{N} |1/sin((2n−1)π/2N)| − |1/sin(π/2N)|) / |1/sin(π/2N)|`.
pub fn eta(n: usize) -> Result<f64> {
    check_n(n)?;
    let nn = n as f64;
    let main = 1.0 / (PI / (2.0 * nn)).sin().abs();
    let sum: f64 = (1..=n)
        .map(|i| 1.0 / ((2 * i - 1) as f64 * PI / (2.0 * nn)).sin().abs())
        .sum();
    Ok((sum - main) / main)
}

/// Second-peak factor `κ = |sin(π/2N) / sin(3π/2N)|`.
pub fn kappa(n: usize) -> Result<f64> {
    check_n(n)?;
    let nn = n as f64;
    Ok(((PI / (2.0 * nn)).sin() / (3.0 * PI / (2.0 * nn)).sin()).abs())
}

/// Noise level `δ = √(2σ²(1+α) ln N)` that bounds every combiner output with
/// high probability.
pub fn noise_threshold(sigma2_ul: f64, alpha: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_alpha(alpha)?;
    if !(sigma2_ul >= 0.0) {
        return Err(invalid("uplink noise variance must be non-negative"));
    }
    Ok((2.0 * sigma2_ul * (1.0 + alpha) * (n as f64).ln()).sqrt())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha = {alpha} must be positive")));
    }
    Ok(())
}

/// Minimum strongest-beam amplitude for the detection guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AmplitudeThreshold {
    Finite { value: f64 },
    /// `(1−μ)(1−κ) − 2μη ≤ 0`: the guarantee says nothing for this combiner.
    Vacuous { denominator: f64 },
}

impl AmplitudeThreshold {
    pub fn value(&self) -> Option<f64> {
        match *self {
            AmplitudeThreshold::Finite { value } => Some(value),
            AmplitudeThreshold::Vacuous { .. } => None,
        }
    }

    /// Whether an amplitude satisfies a finite threshold.
    pub fn is_met_by(&self, amplitude: f64) -> bool {
        self.value().is_some_and(|t| amplitude >= t)
    }
}

/// `√(8σ²(1+α) ln N) / ((1−μ)(1−κ) − 2μη)`.
pub fn amplitude_threshold(sigma2_ul: f64, alpha: f64, mu: f64, n: usize) -> Result<AmplitudeThreshold> {
    check_n(n)?;
    check_alpha(alpha)?;
    if !(sigma2_ul >= 0.0) {
        return Err(invalid("uplink noise variance must be non-negative"));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(invalid(format!("mutual coherence {mu} outside [0, 1]")));
    }
    let denominator = (1.0 - mu) * (1.0 - kappa(n)?) - 2.0 * mu * eta(n)?;
    if denominator <= 0.0 {
        return Ok(AmplitudeThreshold::Vacuous { denominator });
    }
    let numerator = (8.0 * sigma2_ul * (1.0 + alpha) * (n as f64).ln()).sqrt();
    Ok(AmplitudeThreshold::Finite {
        value: numerator / denominator,
    })
}

/// `(1 − 1/(N^{α+1} √(π(1+α) ln N)))^N`.
pub fn detection_probability_lower_bound(n: usize, alpha: f64) -> Result<f64> {
    check_n(n)?;
    check_alpha(alpha)?;
    let nn = n as f64;
    let deficit = 1.0 / (nn.powf(alpha + 1.0) * (PI * (1.0 + alpha) * nn.ln()).sqrt());
    Ok((nn * (-deficit).ln_1p()).exp())
}

/// `|c_iᴴ c_j| / (‖c_i‖ ‖c_j‖)`.
pub fn orthogonality_defect(c_i: &CVector, c_j: &CVector) -> Result<f64> {
    if c_i.len() != c_j.len() {
        return Err(Error::DimensionMismatch {
            expected: c_i.len(),
            actual: c_j.len(),
        });
    }
    let (a, b) = (c_i.norm(), c_j.norm());
    if a == 0.0 || b == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(c_i.dotc(c_j).norm() / (a * b))
}

/// All bounds for one `(N, V, α, μ, σ²)` operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub v: usize,
    pub alpha: f64,
    pub mu: f64,
    pub sigma2_ul: f64,
    pub power_ratio_lb: f64,
    pub eta: f64,
    pub kappa: f64,
    pub delta: f64,
    pub amplitude_threshold: AmplitudeThreshold,
    pub prob_lb: f64,
}

impl BoundReport {
    pub fn evaluate(n: usize, v: usize, alpha: f64, mu: f64, sigma2_ul: f64) -> Result<Self> {
        Ok(Self {
            n,
            v,
            alpha,
            mu,
            sigma2_ul,
            power_ratio_lb: power_ratio_lower_bound(n, v)?,
            eta: eta(n)?,
            kappa: kappa(n)?,
            delta: noise_threshold(sigma2_ul, alpha, n)?,
            amplitude_threshold: amplitude_threshold(sigma2_ul, alpha, mu, n)?,
            prob_lb: detection_probability_lower_bound(n, alpha)?,
        })
    }
}
