//! Random number generation.
//!
//! Every simulator draws from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)` and switched to a process-specific stream, so a run
//! is reproducible from its 64-bit seed on any platform.

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

/// Stream used by the zero-range simulator.
pub const STREAM_X: u64 = 0;
/// Stream used by the exclusion simulator.
pub const STREAM_Z: u64 = 1;
/// Stream used by initial-condition sampling.
pub const STREAM_INIT: u64 = 2;

pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `Exp(rate)` waiting time by inversion.
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Seed of replica `i` in an ensemble rooted at `base` (SplitMix64 finalizer).
pub fn replica_seed(base: u64, i: u64) -> u64 {
    let mut z = base.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
