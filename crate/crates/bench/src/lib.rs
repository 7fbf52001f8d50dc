//! Fixed inputs shared by the benchmarks.

use mapprox::sample::random_mapping;
use mapprox::FiniteMapping;

/// Seeded unmarked random mapping.
pub fn random(n: usize, seed: u64) -> FiniteMapping {
    random_mapping(n, seed, &[]).expect("n > 0")
}

/// Star with `leaves` leaves glued to a `cycle`-cycle at element 0.
pub fn star_on_cycle(leaves: usize, cycle: usize) -> FiniteMapping {
    let mut image: Vec<usize> = (0..cycle).map(|i| (i + 1) % cycle).collect();
    image.extend(std::iter::repeat(0).take(leaves));
    FiniteMapping::unmarked(image).expect("non-empty")
}
