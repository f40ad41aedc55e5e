//! Seed derivation. Every random draw in the crate comes from a [`ChaCha8Rng`]
//! built here, so results depend only on explicit seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// One component of a derived seed.
#[derive(Debug, Clone, Copy)]
pub enum Part<'a> {
    Int(u64),
    Str(&'a str),
    Real(f64),
    None,
}

/// Hash an ordered tuple of parts into a 64-bit seed.
pub fn derive(parts: &[Part<'_>]) -> u64 {
    let mut h = Sha256::new();
    for p in parts {
        match p {
            Part::Int(v) => {
                h.update([0u8]);
                h.update(v.to_le_bytes());
            }
            Part::Str(s) => {
                h.update([1u8]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
            Part::Real(v) => {
                h.update([2u8]);
                h.update(v.to_bits().to_le_bytes());
            }
            Part::None => h.update([3u8]),
        }
    }
    let digest = h.finalize();
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(buf)
}
