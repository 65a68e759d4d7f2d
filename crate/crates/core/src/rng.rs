//! Reproducible random streams.
//!
//! Every replicate gets its own ChaCha8 stream keyed by `(seed, index)`, so
//! results do not depend on how replicates are scheduled across threads.
//! Shuffling and bounded integers are implemented here rather than taken from
//! `rand`'s convenience methods, whose algorithms may change between releases.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer, used to derive child seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent child seed for a `(seed, label)` pair.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    mix(mix(seed) ^ label.wrapping_mul(0xd605_bbb5_8c8a_bbb5))
}

/// Uniform integer in `0..n` (Lemire's multiply-and-reject).
pub fn below(rng: &mut impl RngCore, n: u64) -> u64 {
    assert!(n > 0, "empty range");
    let mut m = (rng.next_u64() as u128) * (n as u128);
    if (m as u64) < n {
        let threshold = n.wrapping_neg() % n;
        while (m as u64) < threshold {
            m = (rng.next_u64() as u128) * (n as u128);
        }
    }
    (m >> 64) as u64
}

/// Uniform in [0, 1) with 53 random bits.
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in (0, 1].
pub fn unit_open0(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exponential with the given rate (infinite for rate 0).
pub fn exponential(rng: &mut impl RngCore, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    -unit_open0(rng).ln() / rate
}

/// Fisher–Yates shuffle.
pub fn shuffle<T>(rng: &mut impl RngCore, xs: &mut [T]) {
    for i in (1..xs.len()).rev() {
        let j = below(rng, i as u64 + 1) as usize;
        xs.swap(i, j);
    }
}
