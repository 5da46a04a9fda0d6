//! Dynamic information design for receivers with gain-loss utility over news.
//!
//! A Bayesian receiver consumes at a terminal date and feels gain-loss
//! utility each period over the change in expected consumption utility
//! implied by his belief updates ("news utility"). This crate computes,
//! for such receivers:
//!
//! - the commitment-optimal dynamic information structure, by backwards
//!   induction with concave envelopes over belief space ([`commitment`]);
//! - cheap-talk equilibrium objects without commitment: indifference sets,
//!   gradual-good-news ladders, babbling-uniqueness conditions and
//!   loss-aversion thresholds ([`cheaptalk`]);
//! - random-horizon value functions via contraction fixed-point iteration
//!   ([`horizon`]);
//! - percentile-by-percentile news utility over consumption distributions
//!   and its commitment solver ([`percentile`]);
//! - posterior-tree representations of dynamic information structures with
//!   Bayes-plausibility validation ([`infostruct`]).
//!
//! The gain-loss families themselves (quadratic, power, lambda-scaled,
//! two-part linear) live in [`gainloss`]; the concave-envelope machinery
//! in [`concavify`].

pub mod cheaptalk;
pub mod commitment;
pub mod concavify;
pub mod gainloss;
pub mod horizon;
pub mod infostruct;
pub mod percentile;

use thiserror::Error;

/// Errors shared across the solver modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid posterior tree: {0}")]
    InvalidTree(String),

    #[error("grid too coarse: {0} points (need at least {1})")]
    GridTooCoarse(usize, usize),

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("failed to converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use concavify::{concave_envelope, Envelope, GridCfg, SampledFunction, Support};
pub use gainloss::{GainLossSpec, MuPosSpec, ShapeReport, Side};
pub use infostruct::PosteriorTree;
