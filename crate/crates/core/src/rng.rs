//! Counter-style stream derivation.
//!
//! Every drop gets its own ChaCha stream keyed by `(seed, point, drop)`, so
//! results do not depend on how drops are split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DropRng = ChaCha8Rng;

/// Independent stream for drop `drop` of sweep point `point`.
pub fn stream(seed: u64, point: u64, drop: u64) -> DropRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    key[16..24].copy_from_slice(&drop.to_le_bytes());
    key[24..].copy_from_slice(b"beamasoc");
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, 0, 3).random();
        let b: u64 = stream(7, 0, 3).random();
        let c: u64 = stream(7, 0, 4).random();
        let d: u64 = stream(7, 1, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
