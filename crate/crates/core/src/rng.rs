//! Seeded randomness. Every random draw in the crate flows from a single
//! 64-bit seed; subcomponents derive independent streams by fixed string
//! labels so adding a consumer never perturbs the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Deterministic substream for (seed, label, index).
pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ fnv1a(label));
    rng.set_stream(index);
    rng
}

// FNV-1a over the label bytes; stable across builds.
fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Standard normal via the polar (Marsaglia) transform. Deterministic given
/// the generator state; documented here as the crate's normal sampler.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u = rng.gen_range(-1.0f64..1.0);
        let v = rng.gen_range(-1.0f64..1.0);
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}
