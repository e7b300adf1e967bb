//! Reproducible inputs for batch experiments.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

use crate::analysis::{default_horizon, detect_weak_key};
use crate::chaos::SecretKey;
use crate::randomness::BitSequence;

/// Key components are drawn on the grid of 14 fractional digits.
const KEY_GRID: i64 = 100_000_000_000_000;

/// A uniformly random key in `[-1, 1]^2` with 14 fractional digits.
pub fn random_key<R: Rng + ?Sized>(rng: &mut R) -> SecretKey {
    let x = rng.gen_range(-KEY_GRID..=KEY_GRID) as f64 / KEY_GRID as f64;
    let y = rng.gen_range(-KEY_GRID..=KEY_GRID) as f64 / KEY_GRID as f64;
    SecretKey::new(x, y).expect("grid values lie in [-1, 1]")
}

/// `count` random keys that are not weak for a `width x height`
/// derivation, drawn from a ChaCha8 stream seeded with `seed`.
pub fn sample_keys(seed: u64, count: usize, width: usize, height: usize) -> Vec<SecretKey> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = default_horizon(width, height);
    let mut keys = Vec::with_capacity(count);
    while keys.len() < count {
        let key = random_key(&mut rng);
        let weak = detect_weak_key(&key, width, height, horizon)
            .map(|r| r.is_weak())
            .unwrap_or(true);
        if !weak {
            keys.push(key);
        }
    }
    keys
}

/// `count` sequences of `bits` bits from ChaCha20, a cryptographic
/// generator used to calibrate the test batteries.
pub fn reference_sequences(seed: u64, count: usize, bits: usize) -> Vec<BitSequence> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut bytes = vec![0u8; bits.div_ceil(8)];
            rng.fill_bytes(&mut bytes);
            BitSequence::from_bytes_msb_first(&bytes).prefix(bits)
        })
        .collect()
}
