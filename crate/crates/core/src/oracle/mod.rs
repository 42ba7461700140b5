//! Brute-force ground truth: exhaustive enumeration of input sequences, the
//! principle-of-optimality check on re-initialized tail problems, and
//! entrywise verification of a value table.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Input, Msop, State, StateSpace, Trajectory, ValueTable};

/// Default cap on the number of enumerated input sequences.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1_000_000;
/// Costs closer than this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;
const VALUE_TOLERANCE: f64 = 1e-9;

/// Outcome of [`enumerate_solve`].
#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    /// First minimizer in lexicographic input-index order; `None` when no
    /// sequence is feasible.
    pub best: Option<Trajectory>,
    /// Minimum cost, `+inf` when infeasible.
    pub value: f64,
    /// No other feasible sequence is within [`TIE_TOLERANCE`] of the minimum.
    pub unique: bool,
    pub candidates: u128,
    pub feasible: u128,
}

struct Partial {
    best: Option<Trajectory>,
    value: f64,
    ties: usize,
    feasible: u128,
}

impl Partial {
    fn empty() -> Self {
        Partial { best: None, value: f64::INFINITY, ties: 0, feasible: 0 }
    }

    fn offer(&mut self, cost: f64, traj: impl FnOnce() -> Trajectory) {
        if cost < self.value - TIE_TOLERANCE {
            self.value = cost;
            self.best = Some(traj());
            self.ties = 1;
        } else if (cost - self.value).abs() <= TIE_TOLERANCE {
            self.ties += 1;
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.feasible += other.feasible;
        if let Some(traj) = other.best {
            if other.value < self.value - TIE_TOLERANCE {
                self.value = other.value;
                self.best = Some(traj);
                self.ties = other.ties;
            } else if (other.value - self.value).abs() <= TIE_TOLERANCE {
                self.ties += other.ties;
            }
        }
        self
    }
}

/// Evaluates every input sequence of length `T - start_stage` from `x0`
/// and returns the cheapest feasible one.
pub fn enumerate_solve(problem: &Msop, x0: &[f64], budget: u128) -> Result<Enumeration> {
    let len = problem.horizon() - problem.start_stage();
    let m = problem.inputs().len() as u128;
    let candidates = (0..len).try_fold(1u128, |acc, _| acc.checked_mul(m)).unwrap_or(u128::MAX);
    if candidates > budget {
        return Err(Error::BudgetExceeded { what: "enumerated input sequences", count: candidates, budget });
    }
    let mut result = if !problem.in_stage_set(x0, problem.start_stage()) {
        Partial::empty()
    } else if len == 0 {
        let mut part = Partial::empty();
        search(problem, &mut Trajectory::from_parts(problem.start_stage(), vec![State::from_slice(x0)], vec![]), &mut part)?;
        part
    } else {
        // Subtrees under each leading input are independent.
        let parts: Vec<Partial> = problem
            .inputs()
            .par_iter()
            .map(|u| -> Result<Partial> {
                let mut part = Partial::empty();
                let t = problem.start_stage();
                let next = problem.step(x0, u, t);
                if problem.in_stage_set(&next, t + 1) {
                    let mut traj = Trajectory::from_parts(t, vec![State::from_slice(x0), next], vec![u.clone()]);
                    search(problem, &mut traj, &mut part)?;
                }
                Ok(part)
            })
            .collect::<Result<_>>()?;
        parts.into_iter().fold(Partial::empty(), Partial::merge)
    };
    if let Some(best) = result.best.as_mut() {
        best.cost = result.value;
    }
    Ok(Enumeration {
        unique: result.best.is_some() && result.ties == 1,
        best: result.best,
        value: result.value,
        candidates,
        feasible: result.feasible,
    })
}

/// Depth-first extension of a feasible prefix.
fn search(problem: &Msop, traj: &mut Trajectory, part: &mut Partial) -> Result<()> {
    let t = traj.start_stage + traj.inputs.len();
    if t == problem.horizon() {
        let cost = problem.evaluate_cost(traj)?;
        part.feasible += 1;
        part.offer(cost, || {
            let mut best = traj.clone();
            best.feasible = true;
            best
        });
        return Ok(());
    }
    let x = traj.states.last().expect("non-empty").clone();
    for u in problem.inputs() {
        let next = problem.step(&x, u, t);
        if !problem.in_stage_set(&next, t + 1) {
            continue;
        }
        traj.inputs.push(Input::clone(u));
        traj.states.push(next);
        search(problem, traj, part)?;
        traj.inputs.pop();
        traj.states.pop();
    }
    Ok(())
}

/// Outcome of [`check_principle_of_optimality`].
#[derive(Clone, Debug, PartialEq)]
pub struct PoReport {
    pub holds: bool,
    /// First stage whose tail is beaten by another tail sequence.
    pub witness_stage: Option<usize>,
    /// `(claimed tail cost, best tail cost)` at the witness stage.
    pub witness_tail_cost: Option<(f64, f64)>,
    pub stages_checked: usize,
}

/// Checks that every tail of `solution` (stages `t = start..T-1`) is optimal
/// for the problem re-initialized at `(x(t), t)`.
pub fn check_principle_of_optimality(problem: &Msop, solution: &Trajectory, budget: u128) -> Result<PoReport> {
    crate::model::check_shape(problem.horizon(), solution)?;
    let mut report = PoReport { holds: true, witness_stage: None, witness_tail_cost: None, stages_checked: 0 };
    for k in 0..solution.inputs.len() {
        let t = solution.start_stage + k;
        let x = &solution.states[k];
        let tail_problem = problem.reinitialized(x, t);
        let tail = Trajectory::from_parts(t, solution.states[k..].to_vec(), solution.inputs[k..].to_vec());
        let claimed = tail_problem.evaluate_cost(&tail)?;
        let best = enumerate_solve(&tail_problem, x, budget)?.value;
        report.stages_checked += 1;
        if claimed > best + TIE_TOLERANCE {
            report.holds = false;
            report.witness_stage = Some(t);
            report.witness_tail_cost = Some((claimed, best));
            break;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueViolation {
    pub state_index: usize,
    pub stage: usize,
    pub table: f64,
    pub enumerated: f64,
}

/// Outcome of [`verify_value_function`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValueReport {
    pub checked: usize,
    pub violations: Vec<ValueViolation>,
    /// Cells skipped because their tail enumeration exceeded the budget.
    pub skipped: usize,
}

impl ValueReport {
    pub fn partial(&self) -> bool {
        self.skipped > 0
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty() && !self.partial()
    }
}

/// Compares every cell of `table` with the enumerated tail infimum from
/// `(x, t)`, to `1e-9`.
pub fn verify_value_function(
    problem: &Msop,
    space: &StateSpace,
    table: &ValueTable,
    budget: u128,
) -> Result<ValueReport> {
    if !space.is_exact() {
        return Err(Error::Validation("value verification needs an exact state space".into()));
    }
    let mut report = ValueReport::default();
    for t in problem.start_stage()..=problem.horizon() {
        for i in 0..space.len() {
            let x = space.view(i);
            let enumerated = match enumerate_solve(&problem.reinitialized(&x, t), &x, budget) {
                Ok(e) => e.value,
                Err(Error::BudgetExceeded { .. }) => {
                    report.skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            report.checked += 1;
            let got = table.value(i, t);
            let ok = if got.is_finite() && enumerated.is_finite() {
                (got - enumerated).abs() <= VALUE_TOLERANCE
            } else {
                got == enumerated
            };
            if !ok {
                report.violations.push(ValueViolation { state_index: i, stage: t, table: got, enumerated });
            }
        }
    }
    Ok(report)
}
