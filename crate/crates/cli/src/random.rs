//! Seeded random base cones.

use conetri_core::{LatticeVector, SimplicialCone};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for run `index` of a campaign. Each run gets its own stream, so
/// results do not depend on how runs are scheduled.
pub fn campaign_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Cone whose generators have entries drawn uniformly from `[-bound, bound]`,
/// each divided by its content, redrawn until the generators are independent.
///
/// # Panics
///
/// If `d < 2` or `bound < 1`.
pub fn random_cone<R: Rng + ?Sized>(d: usize, bound: i64, rng: &mut R) -> SimplicialCone {
    assert!(d >= 2, "dimension must be at least 2");
    assert!(bound >= 1, "entry bound must be positive");
    loop {
        let generators: Vec<LatticeVector> = (0..d)
            .map(|_| {
                let row: Vec<i64> = (0..d).map(|_| rng.gen_range(-bound..=bound)).collect();
                LatticeVector::from(row.as_slice()).primitive_part()
            })
            .collect();
        if generators.iter().any(LatticeVector::is_zero) {
            continue;
        }
        if let Ok(cone) = SimplicialCone::new(generators) {
            return cone;
        }
    }
}
