use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("polytope is unbounded")]
    UnboundedPolytope,
    #[error("polytope is lower-dimensional")]
    Degenerate,
    #[error("origin is not an interior point")]
    OriginNotInterior,
    #[error("ball not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("map is not injective")]
    NotInjective,
    #[error("map is not bijective")]
    NotBijective,
    #[error("matrix is singular")]
    Singular,
    #[error("maps do not share domain and codomain")]
    SpaceMismatch,
    #[error("map is not an exact isometry (defect {})", format_rational(.0))]
    NotIsometric(Rational),
    #[error("epsilon {} does not exceed the isometry defect threshold {}", format_rational(.eps), format_rational(.defect))]
    EpsilonTooSmall { eps: Box<Rational>, defect: Box<Rational> },
    #[error("schedule violates the summability budget; deficit {}", format_rational(.deficit))]
    ScheduleDeficit { deficit: Rational },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("chain {chain} exhausted: stage {stage} requested but only {available} given")]
    ChainExhausted {
        chain: String,
        stage: usize,
        available: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("certificate check failed: {0}")]
    Certificate(String),
}

impl Error {
    pub fn epsilon_too_small(eps: Rational, defect: Rational) -> Self {
        Error::EpsilonTooSmall {
            eps: Box::new(eps),
            defect: Box::new(defect),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
