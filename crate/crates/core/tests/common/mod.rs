//! Random problems on small finite state spaces, with a brute-force cost
//! written directly from each family's closed form.
#![allow(dead_code)]

use std::sync::Arc;

use gbe::costs::{
    additive_maps, max_maps, min_time_maps, point_mass_maps, stopped_additive_maps, StageCostSet, StoppingProbSet,
    TargetSet,
};
use gbe::model::StateSpace;
use gbe::{point, Dynamics, Msop, Objective, RepMaps, StageSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Additive,
    Max,
    Multiplicative,
    StoppedAdditive,
    MinTime,
}

pub const FAMILIES: [Family; 5] =
    [Family::Additive, Family::Max, Family::Multiplicative, Family::StoppedAdditive, Family::MinTime];

/// Raw tables of a random problem; states are `0..n` and inputs `0..m`.
#[derive(Clone, Debug)]
pub struct Tables {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub horizon: usize,
    /// `next[t][x][u]`
    pub next: Vec<Vec<Vec<usize>>>,
    /// `allowed[t][x]`
    pub allowed: Vec<Vec<bool>>,
    /// `cost[t][x][u]`
    pub cost: Vec<Vec<Vec<f64>>>,
    pub terminal: Vec<f64>,
    /// `stop[t][x][u]`, stopped additive only.
    pub stop: Vec<Vec<Vec<f64>>>,
    /// Min time only.
    pub target: Vec<bool>,
}

pub struct RandomMsop {
    pub tables: Arc<Tables>,
    pub problem: Msop,
    pub space: StateSpace,
}

/// Largest state count, input count and horizon of a random problem.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub states: usize,
    pub inputs: usize,
    pub horizon: usize,
}

pub const SMALL: Limits = Limits { states: 3, inputs: 4, horizon: 8 };
pub const WIDE: Limits = Limits { states: 6, inputs: 3, horizon: 5 };

impl Tables {
    pub fn random(family: Family, seed: u64, limits: Limits) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=limits.states);
        let m = rng.gen_range(1..=limits.inputs);
        let horizon = rng.gen_range(1..=limits.horizon);
        let cost_range = match family {
            Family::Additive | Family::Max => -1.0..1.0,
            Family::Multiplicative => 0.5..1.5,
            Family::StoppedAdditive | Family::MinTime => 0.0..2.0,
        };
        let mut next = vec![vec![vec![0; m]; n]; horizon];
        let mut cost = vec![vec![vec![0.0; m]; n]; horizon];
        let mut stop = vec![vec![vec![0.0; m]; n]; horizon];
        for t in 0..horizon {
            for x in 0..n {
                for u in 0..m {
                    // State 0 with input 0 stays put, so no stage is empty.
                    next[t][x][u] = if x == 0 && u == 0 { 0 } else { rng.gen_range(0..n) };
                    cost[t][x][u] = rng.gen_range(cost_range.clone());
                    stop[t][x][u] = rng.gen_range(0.0..0.9);
                }
            }
        }
        let allowed = (0..=horizon).map(|_| (0..n).map(|x| x == 0 || rng.gen_bool(0.8)).collect()).collect();
        let terminal = (0..n).map(|_| rng.gen_range(cost_range.clone())).collect();
        let target = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        Tables { family, n, m, horizon, next, allowed, cost, terminal, stop, target }
    }

    /// Cost of the input sequence `us` from `x0`, or `None` if it leaves the
    /// stage sets.
    pub fn sequence_cost(&self, x0: usize, us: &[usize]) -> Option<f64> {
        let mut xs = vec![x0];
        if !self.allowed[0][x0] {
            return None;
        }
        for (t, &u) in us.iter().enumerate() {
            let y = self.next[t][*xs.last().unwrap()][u];
            if !self.allowed[t + 1][y] {
                return None;
            }
            xs.push(y);
        }
        let stage = |t: usize| self.cost[t][xs[t]][us[t]];
        let big_t = self.horizon;
        Some(match self.family {
            Family::Additive => (0..big_t).map(stage).sum::<f64>() + self.terminal[xs[big_t]],
            Family::Max => (0..big_t).map(stage).fold(self.terminal[xs[big_t]], f64::max),
            Family::Multiplicative => (0..big_t).map(stage).product::<f64>() * self.terminal[xs[big_t]],
            Family::StoppedAdditive => {
                let mut survive = 1.0;
                let mut total = 0.0;
                for t in 0..big_t {
                    total += survive * stage(t);
                    survive *= 1.0 - self.stop[t][xs[t]][us[t]];
                }
                total + survive * self.terminal[xs[big_t]]
            }
            Family::MinTime => (0..big_t).find(|&t| self.target[xs[t]]).unwrap_or(big_t) as f64,
        })
    }

    /// Cheapest cost over every input sequence from `x0`; `+inf` if none is
    /// feasible.
    pub fn brute_force(&self, x0: usize) -> f64 {
        let total = self.m.pow(self.horizon as u32);
        (0..total)
            .filter_map(|mut code| {
                let us: Vec<usize> = (0..self.horizon)
                    .map(|_| {
                        let u = code % self.m;
                        code /= self.m;
                        u
                    })
                    .collect();
                self.sequence_cost(x0, &us)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn index(x: &[f64]) -> usize {
    x[0] as usize
}

pub fn build(tables: Tables) -> RandomMsop {
    let tables = Arc::new(tables);
    let horizon = tables.horizon;
    let costs = {
        let (a, b) = (Arc::clone(&tables), Arc::clone(&tables));
        StageCostSet::new(horizon, move |x, u, t| a.cost[t][index(x)][index(u)], move |x| b.terminal[index(x)])
            .bounded(true)
    };
    let maps: RepMaps = match tables.family {
        Family::Additive => additive_maps(costs),
        Family::Max => max_maps(costs),
        Family::Multiplicative => point_mass_maps(costs, &[]).expect("positive costs"),
        Family::StoppedAdditive => {
            let s = Arc::clone(&tables);
            let probs = StoppingProbSet::new(move |x, u, t| s.stop[t][index(x)][index(u)]);
            stopped_additive_maps(costs, probs, &[]).expect("certain terminal stop")
        }
        Family::MinTime => {
            let s = Arc::clone(&tables);
            min_time_maps(TargetSet::new(move |x| if s.target[index(x)] { -1.0 } else { 1.0 }), horizon)
        }
    };
    let next = Arc::clone(&tables);
    let sets = (0..=horizon)
        .map(|t| {
            let s = Arc::clone(&tables);
            StageSet::new(move |x| s.allowed[t][index(x)])
        })
        .collect();
    let problem = Msop::new(
        horizon,
        Dynamics::new(move |x, u, t| point(&[next.next[t][index(x)][index(u)] as f64])),
        sets,
        (0..tables.m).map(|u| point(&[u as f64])).collect(),
        Objective::Separable(maps),
    )
    .expect("well-formed");
    let space = StateSpace::exact((0..tables.n).map(|x| point(&[x as f64])).collect()).expect("distinct");
    RandomMsop { tables, problem, space }
}

pub fn random_msop(family: Family, seed: u64, limits: Limits) -> RandomMsop {
    build(Tables::random(family, seed, limits))
}

/// Equal within `tol`, or both `+inf`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_infinite() && b.is_infinite() && a.signum() == b.signum()) || (a - b).abs() <= tol
}
