//! Seeded high-precision uniform sampling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer};

/// Deterministic generator used for every sampled check.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform `x ∈ [0, 1)` with `prec` random bits.
pub fn uniform(rng: &mut impl RngCore, prec: u32) -> Float {
    let words = prec.div_ceil(64) as usize;
    let mut bits = Integer::new();
    for _ in 0..words {
        bits <<= 64;
        bits += rng.next_u64();
    }
    let total = words as u32 * 64;
    let mut x = Float::with_val(prec, bits);
    x >>= total;
    x
}

/// Uniform `x ∈ [lo, hi)`.
pub fn uniform_in(rng: &mut impl RngCore, lo: &Float, hi: &Float, prec: u32) -> Float {
    let t = uniform(rng, prec);
    let width = Float::with_val(prec, hi - lo);
    Float::with_val(prec, lo + Float::with_val(prec, &width * &t))
}
