//! Counter-based seed derivation.
//!
//! Each stochastic sub-task gets its own ChaCha stream, keyed by a mix of the
//! master seed and the task's coordinates, so results do not depend on the
//! order in which tasks are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default master seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 20_190_601;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a sequence of counters into a stream key.
pub fn derive_seed(master: u64, counters: &[u64]) -> u64 {
    counters.iter().fold(splitmix64(master), |acc, &c| {
        splitmix64(acc ^ splitmix64(c.wrapping_add(0xA24B_AED4_963E_E407)))
    })
}

pub fn stream(master: u64, counters: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, counters))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_coordinates_give_distinct_keys() {
        let mut seen = std::collections::HashSet::new();
        for a in 0..20u64 {
            for b in 0..20u64 {
                assert!(seen.insert(derive_seed(7, &[a, b])));
            }
        }
        assert_ne!(derive_seed(1, &[0, 0]), derive_seed(2, &[0, 0]));
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
    }

    #[test]
    fn derivation_is_pure() {
        assert_eq!(derive_seed(42, &[3, 9]), derive_seed(42, &[3, 9]));
    }
}
