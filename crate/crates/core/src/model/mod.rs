//! Problem model: multi-stage optimization problems, trajectories, state
//! discretizations and value tables.
//!
//! An [`Msop`] bundles a horizon `T`, deterministic dynamics
//! `x(t+1) = f(x(t), u(t), t)`, one membership predicate per stage
//! `X_0..X_T`, a finite input list `U`, and an [`Objective`]. Objectives are
//! either a backward composition of representation maps ([`RepMaps`]) or an
//! arbitrary trajectory cost evaluated directly (used for costs that admit no
//! such composition).

mod repmaps;
mod space;
mod table;

use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

pub use repmaps::{CostFamily, RepMaps, StageCostSet};
pub use space::{Axis, ExactStates, GridSpace, LookupPolicy, StateKey, StateSpace, StateView};
pub(crate) use space::folded;
pub use table::ValueTable;

use crate::error::{Error, Result};

/// A point in state space. Inline for up to four dimensions.
pub type State = SmallVec<[f64; 4]>;
/// A point in input space.
pub type Input = SmallVec<[f64; 4]>;

type StepFn = dyn Fn(&[f64], &[f64], usize) -> State + Send + Sync;
type MemberFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// Deterministic stage dynamics `f(x, u, t)`.
#[derive(Clone)]
pub struct Dynamics(Arc<StepFn>);

impl Dynamics {
    pub fn new(f: impl Fn(&[f64], &[f64], usize) -> State + Send + Sync + 'static) -> Self {
        Dynamics(Arc::new(f))
    }

    #[inline]
    pub fn step(&self, x: &[f64], u: &[f64], t: usize) -> State {
        (self.0)(x, u, t)
    }
}

impl fmt::Debug for Dynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Dynamics(..)")
    }
}

/// Membership predicate for one stage constraint set `X_t`.
#[derive(Clone)]
pub struct StageSet(Arc<MemberFn>);

impl StageSet {
    pub fn new(p: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        StageSet(Arc::new(p))
    }

    /// The unconstrained set.
    pub fn everything() -> Self {
        StageSet::new(|_| true)
    }

    /// Closed box `lo <= x <= hi`, componentwise.
    pub fn closed_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        StageSet::new(move |x| {
            x.iter()
                .zip(lo.iter().zip(&hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
        })
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        (self.0)(x)
    }
}

impl fmt::Debug for StageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("StageSet(..)")
    }
}

/// Trajectory cost evaluated directly from `(start_stage, states, inputs)`.
pub type DirectCostFn = dyn Fn(usize, &[State], &[Input]) -> f64 + Send + Sync;

/// How the cost of a trajectory is computed.
#[derive(Clone)]
pub enum Objective {
    /// Backward composition `phi_0(x0, u0, phi_1(..., phi_T(x_T)))`.
    Separable(RepMaps),
    /// Any other cost; only the enumeration oracle can optimize it.
    Direct(Arc<DirectCostFn>),
}

impl Objective {
    pub fn direct(f: impl Fn(usize, &[State], &[Input]) -> f64 + Send + Sync + 'static) -> Self {
        Objective::Direct(Arc::new(f))
    }

    pub fn rep_maps(&self) -> Option<&RepMaps> {
        match self {
            Objective::Separable(maps) => Some(maps),
            Objective::Direct(_) => None,
        }
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Separable(maps) => f.debug_tuple("Separable").field(maps).finish(),
            Objective::Direct(_) => f.write_str("Direct(..)"),
        }
    }
}

/// A stage policy `(state, stage) -> input`.
pub trait Policy: Send + Sync {
    fn input(&self, x: &[f64], t: usize) -> Input;
}

impl<F> Policy for F
where
    F: Fn(&[f64], usize) -> Input + Send + Sync,
{
    fn input(&self, x: &[f64], t: usize) -> Input {
        self(x, t)
    }
}

/// Multi-stage optimization problem.
#[derive(Clone, Debug)]
pub struct Msop {
    horizon: usize,
    start_stage: usize,
    dynamics: Dynamics,
    stage_sets: Vec<StageSet>,
    inputs: Vec<Input>,
    input_bounds: Option<(Vec<f64>, Vec<f64>)>,
    objective: Objective,
    initial_state: Option<State>,
}

impl Msop {
    /// Builds a problem. `stage_sets` must hold exactly `horizon + 1` sets.
    pub fn new(
        horizon: usize,
        dynamics: Dynamics,
        stage_sets: Vec<StageSet>,
        inputs: Vec<Input>,
        objective: Objective,
    ) -> Result<Self> {
        if stage_sets.len() != horizon + 1 {
            return Err(Error::StageSetCount { expected: horizon + 1, actual: stage_sets.len() });
        }
        if inputs.is_empty() {
            return Err(Error::EmptyInputSet);
        }
        if let Objective::Separable(maps) = &objective {
            if maps.horizon() != horizon {
                return Err(Error::HorizonMismatch { expected: horizon, actual: maps.horizon() });
            }
        }
        Ok(Msop {
            horizon,
            start_stage: 0,
            dynamics,
            stage_sets,
            inputs,
            input_bounds: None,
            objective,
            initial_state: None,
        })
    }

    /// Declares a bounding box for `U` and checks every listed input against it.
    pub fn with_input_bounds(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        for (index, u) in self.inputs.iter().enumerate() {
            if u.len() != lo.len() || u.len() != hi.len() {
                return Err(Error::Dimension { expected: lo.len(), actual: u.len() });
            }
            let inside = u.iter().zip(lo.iter().zip(&hi)).all(|(v, (l, h))| *l <= *v && *v <= *h);
            if !inside {
                return Err(Error::InputOutOfBounds { index });
            }
        }
        self.input_bounds = Some((lo, hi));
        Ok(self)
    }

    pub fn with_initial_state(mut self, x0: impl Into<State>) -> Self {
        self.initial_state = Some(x0.into());
        self
    }

    /// The same problem re-initialized at `(x, t)`; the objective is
    /// truncated to stages `t..=T`.
    pub fn reinitialized(&self, x: &[f64], t: usize) -> Self {
        assert!(t <= self.horizon, "start stage beyond horizon");
        let mut out = self.clone();
        out.start_stage = t;
        out.initial_state = Some(State::from_slice(x));
        out
    }

    pub fn with_objective(mut self, objective: Objective) -> Result<Self> {
        if let Objective::Separable(maps) = &objective {
            if maps.horizon() != self.horizon {
                return Err(Error::HorizonMismatch { expected: self.horizon, actual: maps.horizon() });
            }
        }
        self.objective = objective;
        Ok(self)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn start_stage(&self) -> usize {
        self.start_stage
    }

    pub fn dynamics(&self) -> &Dynamics {
        &self.dynamics
    }

    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn input_bounds(&self) -> Option<&(Vec<f64>, Vec<f64>)> {
        self.input_bounds.as_ref()
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn rep_maps(&self) -> Result<&RepMaps> {
        self.objective.rep_maps().ok_or(Error::NotSeparable)
    }

    pub fn initial_state(&self) -> Option<&State> {
        self.initial_state.as_ref()
    }

    pub fn stage_set(&self, t: usize) -> &StageSet {
        &self.stage_sets[t]
    }

    #[inline]
    pub fn in_stage_set(&self, x: &[f64], t: usize) -> bool {
        self.stage_sets[t].contains(x)
    }

    #[inline]
    pub fn step(&self, x: &[f64], u: &[f64], t: usize) -> State {
        self.dynamics.step(x, u, t)
    }

    /// Index of `u` in the input list, compared exactly.
    pub fn input_index(&self, u: &[f64]) -> Option<usize> {
        self.inputs.iter().position(|v| v.as_slice() == u)
    }

    /// Indices of `Gamma_{x,t}`: inputs whose continuous successor lies in
    /// `X_{t+1}`.
    pub fn feasible_control_indices(&self, x: &[f64], t: usize) -> Vec<usize> {
        debug_assert!(t < self.horizon);
        self.inputs
            .iter()
            .enumerate()
            .filter(|(_, u)| self.in_stage_set(&self.step(x, u, t), t + 1))
            .map(|(i, _)| i)
            .collect()
    }

    /// The feasible control set `Gamma_{x,t}`. Empty marks a dead end.
    pub fn feasible_controls(&self, x: &[f64], t: usize) -> Vec<Input> {
        self.feasible_control_indices(x, t)
            .into_iter()
            .map(|i| self.inputs[i].clone())
            .collect()
    }

    /// Simulates an input sequence from `(x0, start_stage)` and evaluates its
    /// cost. Infeasible sequences get `cost = +inf`.
    pub fn simulate(&self, x0: &[f64], inputs: &[Input]) -> Result<Trajectory> {
        let expected = self.horizon - self.start_stage;
        if inputs.len() != expected {
            return Err(Error::HorizonMismatch { expected, actual: inputs.len() });
        }
        let mut states = Vec::with_capacity(inputs.len() + 1);
        states.push(State::from_slice(x0));
        let mut feasible = self.in_stage_set(x0, self.start_stage);
        for (k, u) in inputs.iter().enumerate() {
            let t = self.start_stage + k;
            if self.input_index(u).is_none() {
                feasible = false;
            }
            let next = self.step(&states[k], u, t);
            feasible &= self.in_stage_set(&next, t + 1);
            states.push(next);
        }
        let mut traj = Trajectory {
            start_stage: self.start_stage,
            inputs: inputs.to_vec(),
            states,
            feasible,
            cost: f64::INFINITY,
        };
        if feasible {
            traj.cost = self.evaluate_cost(&traj)?;
        }
        Ok(traj)
    }

    /// Forward simulation under a stage policy. The trajectory is marked
    /// infeasible (cost `+inf`) as soon as a constraint is violated.
    pub fn rollout_trajectory(&self, x0: &[f64], policy: &dyn Policy) -> Result<Trajectory> {
        let mut inputs = Vec::with_capacity(self.horizon - self.start_stage);
        let mut states = Vec::with_capacity(self.horizon - self.start_stage + 1);
        states.push(State::from_slice(x0));
        let mut feasible = self.in_stage_set(x0, self.start_stage);
        for t in self.start_stage..self.horizon {
            let x = states.last().expect("non-empty");
            let u = policy.input(x, t);
            if self.input_index(&u).is_none() {
                return Err(Error::PolicyInputOutsideU { stage: t });
            }
            let next = self.step(x, &u, t);
            feasible &= self.in_stage_set(&next, t + 1);
            inputs.push(u);
            states.push(next);
        }
        let mut traj = Trajectory { start_stage: self.start_stage, inputs, states, feasible, cost: f64::INFINITY };
        if feasible {
            traj.cost = self.evaluate_cost(&traj)?;
        }
        Ok(traj)
    }

    /// Cost of a trajectory under this problem's objective.
    pub fn evaluate_cost(&self, traj: &Trajectory) -> Result<f64> {
        match &self.objective {
            Objective::Separable(maps) => maps.evaluate(traj),
            Objective::Direct(cost) => {
                check_shape(self.horizon, traj)?;
                Ok(cost(traj.start_stage, &traj.states, &traj.inputs))
            }
        }
    }
}

pub(crate) fn check_shape(horizon: usize, traj: &Trajectory) -> Result<()> {
    let len = horizon.checked_sub(traj.start_stage).ok_or(Error::HorizonMismatch {
        expected: horizon,
        actual: traj.start_stage,
    })?;
    if traj.inputs.len() != len {
        return Err(Error::HorizonMismatch { expected: len, actual: traj.inputs.len() });
    }
    if traj.states.len() != len + 1 {
        return Err(Error::HorizonMismatch { expected: len + 1, actual: traj.states.len() });
    }
    Ok(())
}

/// Paired input and state sequences starting at `start_stage`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub start_stage: usize,
    pub inputs: Vec<Input>,
    pub states: Vec<State>,
    pub feasible: bool,
    pub cost: f64,
}

impl Trajectory {
    /// An unchecked trajectory with `feasible = true` and `cost = NaN`, for
    /// feeding to cost evaluation directly.
    pub fn from_parts(start_stage: usize, states: Vec<State>, inputs: Vec<Input>) -> Self {
        Trajectory { start_stage, inputs, states, feasible: true, cost: f64::NAN }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Absolute stage of `states[k]`.
    pub fn stage_of(&self, k: usize) -> usize {
        self.start_stage + k
    }
}

/// Shorthand for building a [`State`] or [`Input`] from a slice.
pub fn point(v: &[f64]) -> State {
    State::from_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counter_problem() -> Msop {
        // x+ = x + u on {0, 1, 2, 3}, three stages.
        let maps = crate::costs::additive_maps(StageCostSet::new(3, |_, u, _| u[0], |_| 0.0));
        Msop::new(
            3,
            Dynamics::new(|x, u, _| point(&[x[0] + u[0]])),
            vec![StageSet::closed_box(vec![0.0], vec![3.0]); 4],
            vec![point(&[0.0]), point(&[1.0])],
            Objective::Separable(maps),
        )
        .unwrap()
    }

    #[test]
    fn stage_set_count_is_checked() {
        let maps = crate::costs::additive_maps(StageCostSet::new(2, |_, _, _| 0.0, |_| 0.0));
        let err = Msop::new(
            2,
            Dynamics::new(|x, _, _| point(x)),
            vec![StageSet::everything(); 2],
            vec![point(&[0.0])],
            Objective::Separable(maps),
        )
        .unwrap_err();
        assert!(matches!(err, Error::StageSetCount { expected: 3, actual: 2 }));
    }

    #[test]
    fn input_bounds_are_enforced() {
        let err = counter_problem().with_input_bounds(vec![0.0], vec![0.5]).unwrap_err();
        assert!(matches!(err, Error::InputOutOfBounds { index: 1 }));
        assert!(counter_problem().with_input_bounds(vec![0.0], vec![1.0]).is_ok());
    }

    #[test]
    fn unconstrained_gamma_is_full_input_set() {
        let maps = crate::costs::additive_maps(StageCostSet::new(1, |_, _, _| 0.0, |_| 0.0));
        let p = Msop::new(
            1,
            Dynamics::new(|x, u, _| point(&[x[0] * u[0]])),
            vec![StageSet::everything(); 2],
            vec![point(&[-1.0]), point(&[2.0]), point(&[5.0])],
            Objective::Separable(maps),
        )
        .unwrap();
        assert_eq!(p.feasible_controls(&[3.0], 0), p.inputs().to_vec());
    }

    #[test]
    fn gamma_uses_the_continuous_successor() {
        let p = counter_problem();
        assert_eq!(p.feasible_control_indices(&[3.0], 0), vec![0]);
        assert_eq!(p.feasible_control_indices(&[2.5], 1), vec![0]);
        assert_eq!(p.feasible_control_indices(&[2.0], 2), vec![0, 1]);
    }

    #[test]
    fn rollout_marks_violations() {
        let p = counter_problem();
        let always_one = |_: &[f64], _: usize| point(&[1.0]);
        let ok = p.rollout_trajectory(&[0.0], &always_one).unwrap();
        assert!(ok.feasible);
        assert_eq!(ok.cost, 3.0);
        let bad = p.rollout_trajectory(&[1.0], &always_one).unwrap();
        assert!(!bad.feasible);
        assert!(bad.cost.is_infinite());
        assert_eq!(bad.states.last().unwrap()[0], 4.0);
    }

    #[test]
    fn rollout_rejects_inputs_outside_u() {
        let p = counter_problem();
        let rogue = |_: &[f64], _: usize| point(&[0.5]);
        assert!(matches!(
            p.rollout_trajectory(&[0.0], &rogue),
            Err(Error::PolicyInputOutsideU { stage: 0 })
        ));
    }

    #[test]
    fn reinitialized_problem_starts_late() {
        let p = counter_problem().reinitialized(&[2.0], 2);
        let traj = p.simulate(&[2.0], &[point(&[1.0])]).unwrap();
        assert_eq!(traj.start_stage, 2);
        assert_eq!(traj.states.len(), 2);
        assert_eq!(traj.cost, 1.0);
        assert!(p.simulate(&[2.0], &[point(&[1.0]), point(&[1.0])]).is_err());
    }
}
