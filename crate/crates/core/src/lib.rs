//! Ising similarity regression.
//!
//! Pairwise interaction coefficients of a multivariate binary Ising model are
//! regressed on a set of response-similarity matrices,
//! `θ_jj' = Σ_k α_k w_jj'^(k)`, and estimated by adaptive-lasso penalized
//! pseudo-likelihood. The crate provides exact and Gibbs simulation, the
//! estimators and their regularization paths, tuning by grouped
//! cross-validation or information criteria, sandwich inference, a Monte
//! Carlo benchmark harness and graph export.

pub mod baseline;
pub mod bench;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod model;
pub mod numeric;
pub mod sampler;
pub mod selection;
pub mod similarity;

pub use error::{Error, Result};
pub use model::{
    assemble_theta, conditional_prob, exact_log_pmf, log_pseudo_likelihood, BinaryDataset, InteractionMatrix, ParameterSet, SimilarityKind,
    SimilarityMatrix,
};
