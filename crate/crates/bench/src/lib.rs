//! Seeded instances shared by the benchmarks.

use sqvar_core::matcore::random;
use sqvar_core::problems::{make_quadratic_square, QuadraticSquare};
use sqvar_core::{Factor, Mat};

/// Convex quadratic problem of size `d` with a full-width random factor.
pub fn quadratic_instance(d: usize, seed: u64) -> (QuadraticSquare, Factor) {
    let mut rng = random::rng(seed);
    let p = make_quadratic_square(
        random::psd_of_rank(d, d, &mut rng),
        random::symmetric(d, &mut rng),
    )
    .expect("matching dimensions");
    let f = Factor::new(random::gaussian(d, d, &mut rng)).expect("nonempty factor");
    (p, f)
}

pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Mat {
    random::gaussian(rows, cols, &mut random::rng(seed))
}
