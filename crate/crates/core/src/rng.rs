//! Seeded sampling helpers shared by the suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Point;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point with every coordinate uniform in `[-bound, bound]`.
pub fn point<R: Rng>(rng: &mut R, n: usize, bound: f64) -> Point {
    let mut c = || rng.gen_range(-bound..=bound);
    let a = c();
    let v = (0..2 * n).map(|_| c()).collect();
    let l = c();
    Point::new(a, v, l)
}
