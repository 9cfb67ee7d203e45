//! Exact computations with finite-dimensional polyhedral Banach spaces.

pub mod amalgam;
pub mod convex;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod random;
pub mod rational;
pub mod spaces;
pub mod trace;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use rational::Rational;
