use std::fmt;
use std::sync::Arc;

use rustc_hash::FxHashSet as HashSet;

use crate::costs::{additive_maps, StageCostSet};
use crate::error::{Error, Result};
use crate::model::{Dynamics, ExactStates, Msop, Objective, StageSet, State, StateSpace, Trajectory};

/// Default cap on augmented value-table cells (`states * (T + 1)`).
pub const DEFAULT_AUGMENT_BUDGET: u128 = 100_000_000;

type FirstFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;
type StepFn = dyn Fn(&[f64], &[f64], &[f64], usize) -> Vec<f64> + Send + Sync;
type LastFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// Forward composition `J = psi_T(x(T), psi_{T-1}(x(T-1), u(T-1), ... psi_0(x(0), u(0))))`.
///
/// The carried vector may change length from stage to stage but must have
/// a fixed length at each stage.
#[derive(Clone)]
pub struct ForwardMaps {
    horizon: usize,
    first: Arc<FirstFn>,
    step: Arc<StepFn>,
    last: Arc<LastFn>,
}

impl ForwardMaps {
    /// `first(x, u)` is `psi_0`, `step(x, u, z, t)` is `psi_t` for
    /// `1 <= t < T`, `last(x, z)` is `psi_T`.
    pub fn new(
        horizon: usize,
        first: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
        step: impl Fn(&[f64], &[f64], &[f64], usize) -> Vec<f64> + Send + Sync + 'static,
        last: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(horizon >= 1, "forward maps need at least one stage");
        ForwardMaps { horizon, first: Arc::new(first), step: Arc::new(step), last: Arc::new(last) }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn carry(&self, x: &[f64], u: &[f64], z: &[f64], t: usize) -> Vec<f64> {
        if t == 0 {
            (self.first)(x, u)
        } else {
            (self.step)(x, u, z, t)
        }
    }

    /// Forward composition along a full trajectory starting at stage 0.
    pub fn evaluate(&self, traj: &Trajectory) -> Result<f64> {
        crate::model::check_shape(self.horizon, traj)?;
        if traj.start_stage != 0 {
            return Err(Error::HorizonMismatch { expected: 0, actual: traj.start_stage });
        }
        let mut z = Vec::new();
        for (t, (x, u)) in traj.states.iter().zip(&traj.inputs).enumerate() {
            z = self.carry(x, u, &z, t);
        }
        Ok((self.last)(traj.states.last().expect("non-empty"), &z))
    }
}

impl fmt::Debug for ForwardMaps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ForwardMaps").field("horizon", &self.horizon).finish()
    }
}

/// An additively separable problem on states `[x, z]`, where `z` is the
/// carried forward-map vector, together with its reachable state space.
#[derive(Clone, Debug)]
pub struct Augmented {
    pub problem: Msop,
    pub space: StateSpace,
    pub initial_state: State,
    /// Dimension of the original state.
    pub state_dim: usize,
    /// Reachable augmented states per stage.
    pub stage_counts: Vec<usize>,
}

impl Augmented {
    /// Drops the carried vectors from an augmented trajectory.
    pub fn project(&self, traj: &Trajectory) -> Trajectory {
        Trajectory {
            start_stage: traj.start_stage,
            inputs: traj.inputs.clone(),
            states: traj.states.iter().map(|s| State::from_slice(&s[..self.state_dim])).collect(),
            feasible: traj.feasible,
            cost: traj.cost,
        }
    }
}

/// Builds the equivalent additively separable problem
/// `f~([x, z], u, t) = [f(x,u,t), psi_t(x,u,z)]` with zero stage costs and
/// terminal cost `psi_T`, and enumerates the augmented states reachable
/// from `x0`.
///
/// Fails with [`Error::BudgetExceeded`] as soon as the value table over the
/// reachable states would need more than `budget` cells; the reported count
/// is the size reached at that point, a lower bound on the full size.
pub fn augment_forward_separable(problem: &Msop, fwd: &ForwardMaps, x0: &[f64], budget: u128) -> Result<Augmented> {
    let horizon = problem.horizon();
    if fwd.horizon != horizon {
        return Err(Error::HorizonMismatch { expected: horizon, actual: fwd.horizon });
    }
    if problem.start_stage() != 0 {
        return Err(Error::HorizonMismatch { expected: 0, actual: problem.start_stage() });
    }
    if !problem.in_stage_set(x0, 0) {
        return Err(Error::NoFeasibleTrajectory);
    }
    let n = x0.len();
    let fwd_step = fwd.clone();
    let dynamics = problem.dynamics().clone();
    let aug_step = move |s: &[f64], u: &[f64], t: usize| -> State {
        let (x, z) = s.split_at(n);
        let mut out = dynamics.step(x, u, t);
        out.extend(fwd_step.carry(x, u, z, t));
        out
    };

    let cells_per_state = horizon as u128 + 1;
    let mut stages = vec![ExactStates::new(vec![State::from_slice(x0)])?];
    // Sum of stage sizes, an upper bound on the distinct states; the exact
    // count is only tracked once the bound crosses the budget.
    let mut listed = 1u128;
    let mut distinct: Option<ExactStates> = None;
    for t in 0..horizon {
        let mut next = ExactStates::with_capacity(stages[t].len() * problem.inputs().len());
        for s in stages[t].states() {
            for u in problem.inputs() {
                if problem.in_stage_set(&problem.step(&s[..n], u, t), t + 1) {
                    let _ = next.insert(aug_step(s, u, t));
                }
            }
        }
        listed += next.len() as u128;
        if listed * cells_per_state > budget {
            let all = distinct.get_or_insert_with(|| {
                let mut all = ExactStates::with_capacity(listed as usize);
                for stage in &stages {
                    for s in stage.states() {
                        let _ = all.insert(s.clone());
                    }
                }
                all
            });
            for s in next.states() {
                let _ = all.insert(s.clone());
            }
            let cells = all.len() as u128 * cells_per_state;
            if cells > budget {
                return Err(Error::BudgetExceeded { what: "augmented value-table cells", count: cells, budget });
            }
        }
        stages.push(next);
    }

    // Augmented stage sets are the reachable sets. When each stage carries a
    // vector of its own fixed length, membership reduces to a length check.
    let dims: Vec<Option<usize>> = stages
        .iter()
        .map(|stage| {
            let dim = stage.states().first().map_or(n, |s| s.len());
            stage.states().iter().all(|s| s.len() == dim).then_some(dim)
        })
        .collect();
    let by_length = dims.iter().all(Option::is_some) && dims.iter().collect::<HashSet<_>>().len() == dims.len();
    let stage_counts = stages.iter().map(ExactStates::len).collect();
    let mut all = ExactStates::with_capacity(listed as usize);
    let mut stage_sets = Vec::with_capacity(horizon + 1);
    for (t, stage) in stages.into_iter().enumerate() {
        let original = problem.stage_set(t).clone();
        if by_length {
            let dim = dims[t].expect("checked");
            for s in stage.into_states() {
                let _ = all.insert(s);
            }
            stage_sets.push(StageSet::new(move |s| s.len() == dim && original.contains(&s[..n])));
        } else {
            for s in stage.states() {
                let _ = all.insert(s.clone());
            }
            stage_sets.push(StageSet::new(move |s| stage.index_of(s).is_some() && original.contains(&s[..n])));
        }
    }
    let last = Arc::clone(&fwd.last);
    let costs = StageCostSet::new(horizon, |_, _, _| 0.0, move |s| {
        let (x, z) = s.split_at(n);
        last(x, z)
    });
    let augmented = Msop::new(
        horizon,
        Dynamics::new(aug_step),
        stage_sets,
        problem.inputs().to_vec(),
        Objective::Separable(additive_maps(costs)),
    )?
    .with_initial_state(State::from_slice(x0));
    Ok(Augmented {
        problem: augmented,
        space: StateSpace::from_exact(all),
        initial_state: State::from_slice(x0),
        state_dim: n,
        stage_counts,
    })
}
