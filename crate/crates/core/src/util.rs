use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Block size below which [`pairwise_sum`] adds sequentially.
const PAIRWISE_BLOCK: usize = 32;

/// Tree summation: error grows as O(log n) instead of O(n).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

pub fn norm_sqr(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

/// Inserts bit `value` at position `pos` of `index`, shifting higher bits up.
#[inline]
pub fn insert_bit(index: usize, pos: usize, value: usize) -> usize {
    let low = index & ((1 << pos) - 1);
    let high = index >> pos;
    (high << (pos + 1)) | (value << pos) | low
}

/// Bit position of qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn bit_of(num_qubits: usize, qubit: usize) -> usize {
    num_qubits - 1 - qubit
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed for stream `index` of a parent seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_bit_places_value() {
        assert_eq!(insert_bit(0b11, 1, 0), 0b101);
        assert_eq!(insert_bit(0b11, 0, 0), 0b110);
        assert_eq!(insert_bit(0b00, 2, 1), 0b100);
    }

    #[test]
    fn pairwise_matches_naive_on_exact_values() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
