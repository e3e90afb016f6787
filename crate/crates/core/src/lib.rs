//! Sampling from G-Wishart distributions and checking samplers with an
//! exchangeability permutation test.
//!
//! * [`graph`]: undirected graphs, maximal cliques, perfect orderings.
//! * [`matrix`]: symmetric and pattern-constrained matrices.
//! * [`rng`]: reproducible, splittable random streams.
//! * [`gwishart`]: exact, fixed-point and Gibbs G-Wishart samplers.
//! * [`mcmc`]: Markov kernels and their random-update and random-permutation mixtures.
//! * [`ptest`]: summary tables, resampling and p-values.
//! * [`experiment`]: the end-to-end runs behind the `gwtest` binary.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod gwishart;
pub mod matrix;
pub mod mcmc;
pub mod ptest;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Graph, NodeOrdering};
pub use matrix::{ConstrainedMatrix, SymMatrix};
pub use rng::RngStream;
