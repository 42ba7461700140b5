//! Backward recursion over a state space, policy extraction, the classical
//! additive recursion, forward-map state augmentation and rollout.
//!
//! Exact spaces must be closed under the dynamics: every successor that
//! lands in `X_{t+1}` has to be one of the listed states. Grid spaces look
//! successor values up by the space's [`LookupPolicy`](crate::model::LookupPolicy);
//! the feasibility test `f(x, u, t) ∈ X_{t+1}` is always made on the
//! continuous successor.

mod augment;
mod gbe;
mod rollout;

pub use augment::{augment_forward_separable, Augmented, ForwardMaps, DEFAULT_AUGMENT_BUDGET};
pub use gbe::{
    extract_policy, fixed_point_residual, lookahead, solve_bellman_additive, solve_gbe, solve_gbe_with,
    state_value, SolveOptions,
};
pub use rollout::{rollout_policy, rollout_value, BasePolicy};
