//! Seeded randomness and the small dense kernels the rest of the crate
//! builds on.

pub mod matrix;
pub mod rng;
pub mod stats;

pub use matrix::{axpy, dot, gemm, MatRef, relu, sigmoid, DenseMatrix};
pub use rng::{streams, RngStream};
pub use stats::{bernoulli_sample, dirichlet_sample, standardize_fit, Standardizer};
