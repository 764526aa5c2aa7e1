//! Seeded random streams.
//!
//! Every Monte Carlo quantity is drawn from a ChaCha stream whose seed is a
//! hash of the experiment seed and a small tuple of stream coordinates (trial
//! index, sweep index, purpose tag). Results are therefore independent of the
//! order in which trials are executed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for the stream identified by `seed` and `coords`.
pub fn substream(seed: u64, coords: &[u64]) -> SimRng {
    let mut h = splitmix64(seed);
    for &c in coords {
        h = splitmix64(h ^ splitmix64(c.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Generator seeded directly from a 64-bit value.
pub fn from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One draw of CN(0, variance): independent real and imaginary parts with
/// variance `variance / 2` each.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}
