use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Msop, RepMaps, State, StateSpace, Trajectory, ValueTable};

/// Stages with fewer states than this are swept on the calling thread.
const PARALLEL_MIN_STATES: usize = 1024;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    /// Worker threads for the per-stage sweep; `None` uses the global pool.
    pub threads: Option<usize>,
}

/// Solves the backward recursion
/// `V(x,T) = phi_T(x)`, `V(x,t) = min_{u ∈ Gamma_{x,t}} phi_t(x, u, V(f(x,u,t), t+1))`
/// on every state of `space`, for stages `start_stage..=T`.
pub fn solve_gbe(problem: &Msop, space: &StateSpace) -> Result<ValueTable> {
    solve_gbe_with(problem, space, &SolveOptions::default())
}

pub fn solve_gbe_with(problem: &Msop, space: &StateSpace, options: &SolveOptions) -> Result<ValueTable> {
    let maps = problem.rep_maps()?;
    in_pool(options.threads, || {
        sweep(problem, space, &|x| maps.terminal(x), &|t, x, u, z| maps.stage(t, x, u, z))
    })
}

/// The classical recursion `V(x,t) = min_u c_t(x,u) + V(f(x,u,t), t+1)` for
/// problems built from [`additive_maps`](crate::costs::additive_maps).
pub fn solve_bellman_additive(problem: &Msop, space: &StateSpace) -> Result<ValueTable> {
    let costs = problem.rep_maps()?.additive_costs().ok_or(Error::NotAdditive)?;
    sweep(problem, space, &|x| costs.terminal(x), &|t, x, u, z| {
        if z == f64::INFINITY {
            f64::INFINITY
        } else {
            costs.stage(t, x, u) + z
        }
    })
}

fn in_pool<R: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?
            .install(f),
    }
}

type Score<'a> = dyn Fn(usize, &[f64], &[f64], f64) -> f64 + Sync + 'a;

fn sweep(
    problem: &Msop,
    space: &StateSpace,
    terminal: &(dyn Fn(&[f64]) -> f64 + Sync),
    score: &Score<'_>,
) -> Result<ValueTable> {
    let horizon = problem.horizon();
    let n = space.len();
    let mut table = ValueTable::new(n, horizon);
    {
        let last = table.stage_mut(horizon);
        for (i, v) in last.iter_mut().enumerate() {
            let x = space.view(i);
            if problem.in_stage_set(&x, horizon) {
                *v = terminal(&x);
            }
        }
        if last.iter().all(|v| *v == f64::INFINITY) {
            return Err(Error::EmptyProblem { stage: horizon });
        }
    }
    for t in (problem.start_stage()..horizon).rev() {
        let (values, argmin, next) = table.split_stage(t);
        let cell = |i: usize, v: &mut f64, a: &mut u32| -> Result<()> {
            let x = space.view(i);
            if !problem.in_stage_set(&x, t) {
                return Ok(());
            }
            let (best, arg) = minimize(problem, space, next, &x, t, score)?;
            *v = best;
            *a = ValueTable::encode_argmin(arg);
            Ok(())
        };
        if n < PARALLEL_MIN_STATES {
            for (i, (v, a)) in values.iter_mut().zip(argmin.iter_mut()).enumerate() {
                cell(i, v, a)?;
            }
        } else {
            values
                .par_iter_mut()
                .zip(argmin.par_iter_mut())
                .enumerate()
                .with_min_len(256)
                .try_for_each(|(i, (v, a))| cell(i, v, a))?;
        }
        if values.iter().all(|v| *v == f64::INFINITY) {
            return Err(Error::EmptyProblem { stage: t });
        }
    }
    Ok(table)
}

/// First minimizer over `Gamma_{x,t}` given the stage `t + 1` slice.
#[inline]
fn minimize(
    problem: &Msop,
    space: &StateSpace,
    next: &[f64],
    x: &[f64],
    t: usize,
    score: &Score<'_>,
) -> Result<(f64, Option<usize>)> {
    let mut best = f64::INFINITY;
    let mut arg = None;
    for (k, u) in problem.inputs().iter().enumerate() {
        let y = problem.step(x, u, t);
        if !problem.in_stage_set(&y, t + 1) {
            continue;
        }
        let z = successor_value(space, next, &y, t + 1)?;
        let s = score(t, x, u, z);
        if s < best {
            best = s;
            arg = Some(k);
        }
    }
    Ok((best, arg))
}

#[inline]
fn successor_value(space: &StateSpace, next: &[f64], y: &State, stage: usize) -> Result<f64> {
    space.value_at(next, y).ok_or_else(|| Error::NotClosed { state: y.to_vec(), stage })
}

/// `min_{u ∈ Gamma_{x,t}} phi_t(x, u, V(f(x,u,t), t+1))` and its first
/// minimizing input index, for any `x` (on or off the state space).
pub fn lookahead(
    problem: &Msop,
    space: &StateSpace,
    table: &ValueTable,
    x: &[f64],
    t: usize,
) -> Result<(f64, Option<usize>)> {
    let maps = problem.rep_maps()?;
    if !problem.in_stage_set(x, t) {
        return Ok((f64::INFINITY, None));
    }
    if t == problem.horizon() {
        return Ok((maps.terminal(x), None));
    }
    minimize(problem, space, table.stage(t + 1), x, t, &|t, x, u, z| maps.stage(t, x, u, z))
}

/// `V(x, t)`: the table entry when `x` is a listed state of an exact space,
/// otherwise the one-step [`lookahead`] value.
pub fn state_value(problem: &Msop, space: &StateSpace, table: &ValueTable, x: &[f64], t: usize) -> Result<f64> {
    if let StateSpace::Exact(states) = space {
        if let Some(i) = states.index_of(x) {
            return Ok(table.value(i, t));
        }
    }
    Ok(lookahead(problem, space, table, x, t)?.0)
}

/// Optimal trajectory from `x0` by greedy minimization against the table.
///
/// Exact spaces reproduce the table's argmins and the cost equals
/// `V(x0, start_stage)`. On grids the trajectory is simulated in continuous
/// state; if it hits a dead end the remaining inputs are padded with the
/// first listed input and the trajectory is returned flagged infeasible.
pub fn extract_policy(problem: &Msop, space: &StateSpace, table: &ValueTable, x0: &[f64]) -> Result<Trajectory> {
    let maps = problem.rep_maps()?;
    warn_if_not_strict(maps);
    let start = problem.start_stage();
    if lookahead(problem, space, table, x0, start)?.0 == f64::INFINITY {
        return Err(Error::NoFeasibleTrajectory);
    }
    let mut x = State::from_slice(x0);
    let mut inputs = Vec::with_capacity(problem.horizon() - start);
    for t in start..problem.horizon() {
        let Some(k) = lookahead(problem, space, table, &x, t)?.1 else {
            inputs.resize(problem.horizon() - start, problem.inputs()[0].clone());
            break;
        };
        let u = problem.inputs()[k].clone();
        x = problem.step(&x, &u, t);
        inputs.push(u);
    }
    problem.simulate(x0, &inputs)
}

/// Warns once per process.
fn warn_if_not_strict(maps: &RepMaps) {
    static WARNED: std::sync::Once = std::sync::Once::new();
    if !maps.all_strict() {
        WARNED.call_once(|| warn!(
            "{} maps are not strictly monotone: the returned trajectory is optimal, but other optima need not be recovered",
            maps.family().name()
        ));
    }
}

/// Largest `|V(x,t) - min_u phi_t(x, u, V(f(x,u,t), t+1))|` over feasible
/// cells, recomputed from the table; `+inf` if a cell's feasibility differs
/// from its recomputation.
pub fn fixed_point_residual(problem: &Msop, space: &StateSpace, table: &ValueTable) -> Result<f64> {
    let maps = problem.rep_maps()?;
    let mut worst = 0.0f64;
    for t in problem.start_stage()..=problem.horizon() {
        for i in 0..space.len() {
            let x = space.view(i);
            let expected = if !problem.in_stage_set(&x, t) {
                f64::INFINITY
            } else if t == problem.horizon() {
                maps.terminal(&x)
            } else {
                minimize(problem, space, table.stage(t + 1), &x, t, &|t, x, u, z| maps.stage(t, x, u, z))?.0
            };
            let got = table.value(i, t);
            match (got.is_finite(), expected.is_finite()) {
                (true, true) => worst = worst.max((got - expected).abs()),
                (false, false) => {}
                _ => return Ok(f64::INFINITY),
            }
        }
    }
    Ok(worst)
}
