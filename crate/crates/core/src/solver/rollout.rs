use rustc_hash::FxHashMap as HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{folded, Input, Msop, Policy, RepMaps, State, StateKey, Trajectory};

/// A fixed heuristic policy whose tail costs score states during rollout.
#[derive(Clone)]
pub struct BasePolicy(Arc<dyn Policy>);

impl BasePolicy {
    pub fn new(policy: impl Policy + 'static) -> Self {
        BasePolicy(Arc::new(policy))
    }
}

impl Policy for BasePolicy {
    fn input(&self, x: &[f64], t: usize) -> Input {
        self.0.input(x, t)
    }
}

impl fmt::Debug for BasePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BasePolicy(..)")
    }
}

/// Cost of following `base` from `(x, t)` to the horizon; `+inf` if the base
/// trajectory leaves the constraint sets.
pub fn rollout_value(problem: &Msop, base: &dyn Policy, x: &[f64], t: usize) -> Result<f64> {
    Ok(problem.reinitialized(x, t).rollout_trajectory(x, base)?.cost)
}

/// Tail values keyed by `(stage, state)`. Rollout visits few states per
/// stage, so each stage chains its entries through shared arenas, with the
/// state bits stored contiguously; a stage that collects more than
/// `FEW_STATES` entries moves to a hash map.
struct TailMemo {
    heads: Vec<u32>,
    lens: Vec<u8>,
    entries: Vec<MemoEntry>,
    bits: Vec<u64>,
    overflow: HashMap<usize, HashMap<StateKey, f64>>,
}

struct MemoEntry {
    bits: u32,
    len: u32,
    next: u32,
    value: f64,
}

const NO_ENTRY: u32 = u32::MAX;
const OVERFLOWED: u32 = u32::MAX - 1;
const FEW_STATES: usize = 16;

impl TailMemo {
    fn new(stages: usize) -> Self {
        TailMemo {
            heads: vec![NO_ENTRY; stages],
            lens: vec![0; stages],
            entries: Vec::with_capacity(stages),
            bits: Vec::with_capacity(stages),
            overflow: HashMap::default(),
        }
    }

    fn key_bits(&self, e: &MemoEntry) -> &[u64] {
        &self.bits[e.bits as usize..(e.bits + e.len) as usize]
    }

    fn chain(&self, t: usize) -> impl Iterator<Item = &MemoEntry> {
        let mut next = self.heads[t];
        std::iter::from_fn(move || {
            (next != NO_ENTRY && next != OVERFLOWED).then(|| {
                let e = &self.entries[next as usize];
                next = e.next;
                e
            })
        })
    }

    fn get(&self, t: usize, x: &[f64]) -> Option<f64> {
        if self.heads[t] == OVERFLOWED {
            return self.overflow[&t].get(&StateKey::of(x)).copied();
        }
        self.chain(t)
            .find(|e| {
                let key = self.key_bits(e);
                key.len() == x.len() && key.iter().zip(x).all(|(b, v)| *b == folded(*v))
            })
            .map(|e| e.value)
    }

    fn insert(&mut self, t: usize, x: &[f64], value: f64) {
        if self.heads[t] == OVERFLOWED {
            self.overflow.get_mut(&t).expect("overflowed stage").insert(StateKey::of(x), value);
            return;
        }
        if usize::from(self.lens[t]) >= FEW_STATES {
            let mut map: HashMap<StateKey, f64> =
                self.chain(t).map(|e| (StateKey::from_bits(self.key_bits(e)), e.value)).collect();
            map.insert(StateKey::of(x), value);
            self.overflow.insert(t, map);
            self.heads[t] = OVERFLOWED;
            return;
        }
        let entry = MemoEntry { bits: self.bits.len() as u32, len: x.len() as u32, next: self.heads[t], value };
        self.bits.extend(x.iter().map(|v| folded(*v)));
        self.heads[t] = self.entries.len() as u32;
        self.lens[t] += 1;
        self.entries.push(entry);
    }
}

/// Base-policy tail values, memoized per `(stage, state)`.
struct TailValues<'a> {
    problem: &'a Msop,
    maps: &'a RepMaps,
    base: &'a dyn Policy,
    memo: TailMemo,
    path: Vec<(Option<State>, Input)>,
}

impl<'a> TailValues<'a> {
    fn new(problem: &'a Msop, maps: &'a RepMaps, base: &'a dyn Policy) -> Self {
        TailValues { problem, maps, base, memo: TailMemo::new(problem.horizon() + 1), path: Vec::new() }
    }

    /// `V~(x, t)` for `x ∈ X_t`.
    fn value(&mut self, x: &[f64], t: usize) -> Result<f64> {
        let horizon = self.problem.horizon();
        // Walk forward until a memoized cell, the horizon or a violation.
        // Path entries hold the state left at each step; `None` is `x`.
        self.path.clear();
        let mut current: Option<State> = None;
        let mut s = t;
        let mut z = loop {
            let y = current.as_deref().unwrap_or(x);
            if let Some(v) = self.memo.get(s, y) {
                break v;
            }
            if s == horizon {
                let v = self.maps.terminal(y);
                self.memo.insert(s, y, v);
                break v;
            }
            let u = self.base.input(y, s);
            if self.problem.input_index(&u).is_none() {
                return Err(Error::PolicyInputOutsideU { stage: s });
            }
            let next = self.problem.step(y, &u, s);
            let violated = !self.problem.in_stage_set(&next, s + 1);
            self.path.push((current.replace(next), u));
            s += 1;
            if violated {
                break f64::INFINITY;
            }
        };
        while let Some((state, u)) = self.path.pop() {
            s -= 1;
            let y = state.as_deref().unwrap_or(x);
            z = self.maps.stage(s, y, &u, z);
            self.memo.insert(s, y, z);
        }
        Ok(z)
    }
}

/// Rollout: at each stage pick the first input minimizing
/// `phi_t(x, u, V~(f(x,u,t), t+1))`, where `V~` is the base policy's tail
/// cost. A dead end (empty `Gamma`) ends the search; the remaining inputs
/// are padded with the first listed input and the trajectory is returned
/// flagged infeasible.
pub fn rollout_policy(problem: &Msop, base: &dyn Policy, x0: &[f64]) -> Result<Trajectory> {
    let maps = problem.rep_maps()?;
    let mut tails = TailValues::new(problem, maps, base);
    let start = problem.start_stage();
    let horizon = problem.horizon();
    let mut states = Vec::with_capacity(horizon - start + 1);
    states.push(State::from_slice(x0));
    let mut inputs = Vec::with_capacity(horizon - start);
    for t in start..horizon {
        let x = states.last().expect("states non-empty");
        let mut best = (f64::INFINITY, None);
        for (k, u) in problem.inputs().iter().enumerate() {
            let y = problem.step(x, u, t);
            if !problem.in_stage_set(&y, t + 1) {
                continue;
            }
            let score = maps.stage(t, x, u, tails.value(&y, t + 1)?);
            if score < best.0 || best.1.is_none() {
                best = (score, Some((k, y)));
            }
        }
        let Some((k, y)) = best.1 else {
            inputs.resize(horizon - start, problem.inputs()[0].clone());
            return problem.simulate(x0, &inputs);
        };
        inputs.push(problem.inputs()[k].clone());
        states.push(y);
    }
    // Every successor was checked against its stage set on the way.
    let mut traj = Trajectory::from_parts(start, states, inputs);
    traj.feasible = problem.in_stage_set(x0, start);
    traj.cost = if traj.feasible { maps.evaluate(&traj)? } else { f64::INFINITY };
    Ok(traj)
}
