//! Uplink pilot transmission through the adaptive selecting network.
//!
//! `Q = M·K` pilot instants are split into `M` blocks of `K` instants. In block
//! `m` the users send the rows of an orthonormal pilot matrix `Ψ_m`, the base
//! station combines the `N` lens outputs with the `K×N` slab `W_m` of the
//! Bernoulli combiner `W̄`, and de-spreading with `Ψ_mᴴ` leaves
//! `Z_m = W_m H̃ + W_m N_m Ψ_mᴴ`. Stacking column `k` over blocks gives
//! `z̄_k = W̄ h̃_k + n̄_k`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::BeamspaceChannel;
use crate::error::invalid;
use crate::linalg;
use crate::rng::complex_normal;
use crate::{CMatrix, CVector, Error, Result};

/// `K×K` orthonormal pilot matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    matrix: CMatrix,
}

impl PilotMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_users(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Orthonormal pilots for `k` users.
///
/// Powers of two get the ±1/√K Walsh-Hadamard matrix in dyadic (bit-reversed)
/// row order, which reproduces the familiar four-user example; other sizes
/// fall back to the unitary DFT.
pub fn generate_pilot_matrix(k: usize) -> Result<PilotMatrix> {
    if k == 0 {
        return Err(invalid("pilot matrix needs K >= 1"));
    }
    let scale = 1.0 / (k as f64).sqrt();
    let matrix = if k.is_power_of_two() {
        let bits = k.trailing_zeros();
        let rev = |r: usize| if bits == 0 { 0 } else { r.reverse_bits() >> (usize::BITS - bits) };
        DMatrix::from_fn(k, k, |r, c| {
            let sign = if (rev(r) & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::new(sign * scale, 0.0)
        })
    } else {
        DMatrix::from_fn(k, k, |r, c| {
            let phase = -2.0 * PI * ((r * c) % k) as f64 / k as f64;
            Complex64::from_polar(scale, phase)
        })
    };
    Ok(PilotMatrix { matrix })
}

/// `Q×N` analog combiner with entries `±1/√Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    matrix: DMatrix<f64>,
}

impl Combiner {
    /// Wraps an arbitrary real matrix with unit-norm columns.
    ///
    /// Used for fixtures; the generators below are the normal way in.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(invalid("combiner must be non-empty"));
        }
        for (j, col) in matrix.column_iter().enumerate() {
            if (col.norm() - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("combiner column {j} is not unit norm")));
            }
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Number of measurements `Q`.
    pub fn num_measurements(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of beams `N`.
    pub fn num_beams(&self) -> usize {
        self.matrix.ncols()
    }

    /// Noiseless measurement `W̄ h̃`.
    pub fn measure(&self, h: &CVector) -> Result<CVector> {
        if h.len() != self.num_beams() {
            return Err(Error::DimensionMismatch {
                expected: self.num_beams(),
                actual: h.len(),
            });
        }
        Ok(linalg::apply(&self.matrix, h))
    }
}

/// Bernoulli combiner: i.i.d. equiprobable `±1/√Q` entries.
pub fn generate_combiner<R: Rng + ?Sized>(q: usize, n: usize, rng: &mut R) -> Result<Combiner> {
    if q == 0 || n == 0 {
        return Err(invalid("combiner needs Q >= 1 and N >= 1"));
    }
    let a = 1.0 / (q as f64).sqrt();
    let matrix = DMatrix::from_fn(q, n, |_, _| if rng.random::<bool>() { a } else { -a });
    Ok(Combiner { matrix })
}

/// Square `N×N` combiner with `±1/√N` entries and orthogonal columns.
///
/// A Sylvester-Hadamard matrix with random column signs; its mutual coherence
/// is zero. Needs `n` to be a power of two.
pub fn generate_orthogonal_combiner<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Combiner> {
    if n == 0 || !n.is_power_of_two() {
        return Err(invalid("orthogonal combiner needs N a power of two"));
    }
    let a = 1.0 / (n as f64).sqrt();
    let signs: Vec<f64> = (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let matrix = DMatrix::from_fn(n, n, |r, c| {
        let s = if (r & c).count_ones() % 2 == 0 { a } else { -a };
        s * signs[c]
    });
    Ok(Combiner { matrix })
}

/// `μ = max_{i≠j} |w̄_iᴴ w̄_j|`.
pub fn mutual_coherence(w: &Combiner) -> Result<f64> {
    let m = w.matrix();
    if m.ncols() < 2 {
        return Err(invalid("mutual coherence needs at least two columns"));
    }
    let gram = m.transpose() * m;
    let mut mu: f64 = 0.0;
    for j in 0..gram.ncols() {
        for i in 0..j {
            mu = mu.max(gram[(i, j)].abs());
        }
    }
    Ok(mu)
}

/// Noise model applied to the stacked measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Block pilot pipeline: `N_m` is white at the lens output and reaches
    /// the measurements through `W_m` and `Ψ_mᴴ`.
    #[default]
    Faithful,
    /// `n̄_k ~ CN(0, σ² I)` added directly to `W̄ h̃_k`.
    WhiteNoise,
}

/// Per-user measurement vectors `z̄_k`.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub per_user: Vec<CVector>,
    pub noise_variance: f64,
    pub mode: NoiseMode,
}

impl MeasurementSet {
    pub fn num_users(&self) -> usize {
        self.per_user.len()
    }
}

/// Runs the uplink pilot phase for all users in `hb`.
///
/// In `Faithful` mode `W̄.Q` must be a multiple of the user count.
pub fn simulate_uplink<R: Rng + ?Sized>(
    hb: &[BeamspaceChannel],
    w: &Combiner,
    sigma2_ul: f64,
    mode: NoiseMode,
    rng: &mut R,
) -> Result<MeasurementSet> {
    let k = hb.len();
    let q = w.num_measurements();
    let n = w.num_beams();
    if k == 0 {
        return Err(invalid("no users to measure"));
    }
    if !(sigma2_ul >= 0.0) || !sigma2_ul.is_finite() {
        return Err(invalid("uplink noise variance must be finite and non-negative"));
    }
    if let Some(h) = hb.iter().find(|h| h.num_antennas() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: h.num_antennas(),
        });
    }
    let mut per_user = hb
        .iter()
        .map(|h| w.measure(h.vector()))
        .collect::<Result<Vec<_>>>()?;

    match mode {
        NoiseMode::WhiteNoise => {
            for z in per_user.iter_mut() {
                for v in z.iter_mut() {
                    *v += complex_normal(rng, sigma2_ul);
                }
            }
        }
        NoiseMode::Faithful => {
            if !q.is_multiple_of(k) {
                return Err(invalid(format!(
                    "Q = {q} is not a multiple of the user count K = {k}"
                )));
            }
            let pilots = generate_pilot_matrix(k)?;
            let despread = pilots.matrix().adjoint();
            let blocks = q / k;
            let wm_all = w.matrix();
            for m in 0..blocks {
                let noise = CMatrix::from_fn(n, k, |_, _| complex_normal(rng, sigma2_ul));
                // W_m N_m with W_m the m-th K-row slab of W̄.
                let slab = wm_all.rows(m * k, k);
                let mut combined = CMatrix::zeros(k, k);
                for c in 0..k {
                    for (j, wcol) in slab.column_iter().enumerate() {
                        let x = noise[(j, c)];
                        for r in 0..k {
                            combined[(r, c)] += x * wcol[r];
                        }
                    }
                }
                let effective = combined * &despread;
                for (user, z) in per_user.iter_mut().enumerate() {
                    for r in 0..k {
                        z[m * k + r] += effective[(r, user)];
                    }
                }
            }
        }
    }
    Ok(MeasurementSet {
        per_user,
        noise_variance: sigma2_ul,
        mode,
    })
}
