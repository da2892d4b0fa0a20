//! Deterministic low-discrepancy sample points over a coordinate box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u32) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % b as u64) as f64;
        i /= b as u64;
        f *= inv;
    }
    out
}

/// `count` Halton points in `domain`, randomized by a seeded
/// Cranley–Patterson shift.
pub fn halton_points(domain: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(domain.len() <= PRIMES.len(), "too many dimensions for the Halton table");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = domain.iter().map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            domain
                .iter()
                .zip(&PRIMES)
                .zip(&shift)
                .map(|(((lo, hi), &p), s)| {
                    let v = (radical_inverse(i, p) + s).fract();
                    lo + (hi - lo) * v
                })
                .collect()
        })
        .collect()
}
