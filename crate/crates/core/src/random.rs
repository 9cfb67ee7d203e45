//! Seeded generators of random instances for tests and the CLI.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convex::VertexSystem;
use crate::linalg::{neg, Matrix};
use crate::rational::{rat, Rational};
use crate::spaces::PolyhedralSpace;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small rational `p/q` with `|p| <= 4`, `1 <= q <= 3`.
pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    (0..n).map(|_| small_rational(rng)).collect()
}

/// A random symmetric ball `conv{±p_1, …, ±p_k}` with `dim <= k <= max_pairs`.
pub fn random_space<R: Rng>(rng: &mut R, dim: usize, max_pairs: usize) -> PolyhedralSpace {
    if dim == 0 {
        return PolyhedralSpace::zero();
    }
    let max_pairs = max_pairs.max(dim);
    loop {
        let k = rng.gen_range(dim..=max_pairs);
        let half: Vec<Vec<Rational>> = (0..k).map(|_| random_vector(rng, dim)).collect();
        if Matrix::from_rows(half.clone(), dim).rank() < dim {
            continue;
        }
        let mut points = half.clone();
        points.extend(half.iter().map(|p| neg(p)));
        if let Ok(space) = PolyhedralSpace::from_vertices(&VertexSystem::new(dim, points)) {
            return space;
        }
    }
}

/// Random `rows x cols` matrix of full column rank.
pub fn random_injective<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    assert!(rows >= cols);
    loop {
        let m = Matrix::from_rows((0..rows).map(|_| random_vector(rng, cols)).collect(), cols);
        if m.rank() == cols {
            return m;
        }
    }
}

/// Random positive slack in `(0, 1/2]`.
pub fn random_slack<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.gen_range(1..=8), 16)
}
