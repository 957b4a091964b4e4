//! Horizontal federated learning simulator with a reinforcement-learned
//! evaluator that values each client's uploaded gradient, plus a
//! leave-one-out baseline and the experiment harness that compares them.

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod federation;
pub mod harness;
pub mod models;
pub mod numkit;
pub mod rcce;

pub use error::{Error, Result};
