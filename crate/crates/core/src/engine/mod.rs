//! Chains standing in for separable spaces, the approximate inverse, the
//! back-and-forth construction and the universal embedding.

mod back_and_forth;
mod chain;
mod inverse;
mod schedule;
mod universal;

pub use back_and_forth::{back_and_forth, BackAndForthStep, BackAndForthTrace, Level};
pub use chain::{constant_chain, ChainSpace, Extension, OracleEntry};
pub use inverse::{approximate_inverse, inverse_parameters, ApproximateInverse};
pub use schedule::{
    budget_lhs, default_eps0, schedule_make, tail_from, EpsilonSchedule, DEFAULT_DEPTH, DEFAULT_RATIO,
};
pub use universal::{embed_universal, power_of_half, EmbedStep, EmbedTrace};

use crate::error::Result;
use crate::linalg::{extend_basis, Matrix};
use crate::operators::LinearMap;
use crate::rational::Rational;
use crate::spaces::SpaceRef;

/// Span of the columns of `seed` (kept first, assumed independent) and of
/// `extra`, as a subspace of `ambient` with its inclusion.
fn seeded_span(ambient: &SpaceRef, seed: &Matrix, extra: &[Vec<Rational>]) -> Result<(SpaceRef, LinearMap)> {
    let n = ambient.dimension();
    let mut basis = seed.columns();
    let picked = extend_basis(&basis, extra, n);
    basis.extend(picked.into_iter().map(|i| extra[i].clone()));
    ambient.subspace(&basis)
}

/// Expresses a map into the ambient space as a map into the subspace
/// embedded by `embed`, whose image must contain the map's image.
fn corestrict(map: &LinearMap, embed: &LinearMap) -> Result<LinearMap> {
    let coords = embed
        .matrix()
        .solve_in_span(map.matrix())
        .ok_or(crate::error::Error::SpaceMismatch)?;
    LinearMap::new(map.domain().clone(), embed.domain().clone(), coords)
}

/// The inclusion `[I; 0]` of a seeded span's leading coordinates.
fn leading_inclusion(small: &SpaceRef, big: &SpaceRef) -> Result<LinearMap> {
    let k = small.dimension();
    let m = Matrix::identity(k).vstack(&Matrix::zeros(big.dimension() - k, k));
    LinearMap::new(small.clone(), big.clone(), m)
}
