//! Exact many-server queue evaluators, the asymptotic cost expansions used to
//! derive square-root style staffing rules, and the machinery that measures how
//! far those prescriptions sit from the true optimum.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: normal-distribution special functions, semi-infinite
//!   quadrature, root finding and scalar minimization.
//! - [`exact`]: Erlang-C (real and integer servers) and Erlang-A evaluators,
//!   costs and exact optimizers.
//! - [`expansions`]: the Halfin-Whitt, fluid and Erlang-A diffusion expansions,
//!   each packaged as an [`ExpansionSpec`].
//! - [`prescription`]: tie-broken prescription selection, optimality gaps,
//!   residual probes, log-log rate fits and condition probes.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod expansions;
pub mod numerics;
pub mod prescription;

pub use error::{Error, Result};
pub use exact::{CostParams, ExactOptimum, QueueParams};
pub use expansions::{ExpansionSpec, ModelTag};
pub use numerics::{Bracket, Domain, Tolerance};
pub use prescription::{GapRecord, Prescription, RateFit};
