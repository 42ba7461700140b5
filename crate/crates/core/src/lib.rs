//! Dynamic programming for multi-stage optimization problems whose cost is a
//! backward composition of monotone representation maps.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: problems, trajectories, state spaces and value tables
//! - [`costs`]: representation-map families and validity checks
//! - [`solver`]: the backward recursion, policy extraction, classical
//!   additive recursion, forward-map augmentation and rollout
//! - [`oracle`]: brute-force enumeration and principle-of-optimality checks
//! - [`problems`]: ready-made problems (nested radical, set entry for a
//!   Dubins car and a 3D point, invariant sets of a switching system)
//! - [`cli`]: JSON-configured runs behind the `gbe` binary

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod costs;
pub mod error;
pub mod model;
pub mod oracle;
pub mod problems;
pub mod solver;

pub use error::{Error, Result};
pub use model::{point, Dynamics, Input, Msop, Objective, Policy, RepMaps, StageSet, State, Trajectory};
