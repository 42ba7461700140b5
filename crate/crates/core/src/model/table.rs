const NO_INPUT: u32 = u32::MAX;

/// `V(x, t)` over every state of a space and every stage `0..=T`, plus the
/// first minimizing input index. `+inf` marks states with no feasible
/// continuation (or outside `X_t`).
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    states: usize,
    horizon: usize,
    values: Vec<f64>,
    argmin: Vec<u32>,
}

impl ValueTable {
    pub fn new(states: usize, horizon: usize) -> Self {
        let cells = states * (horizon + 1);
        ValueTable { states, horizon, values: vec![f64::INFINITY; cells], argmin: vec![NO_INPUT; cells] }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    pub fn value(&self, state: usize, t: usize) -> f64 {
        self.values[t * self.states + state]
    }

    pub fn set_value(&mut self, state: usize, t: usize, v: f64) {
        self.values[t * self.states + state] = v;
    }

    pub fn argmin(&self, state: usize, t: usize) -> Option<usize> {
        match self.argmin[t * self.states + state] {
            NO_INPUT => None,
            i => Some(i as usize),
        }
    }

    pub fn is_feasible(&self, state: usize, t: usize) -> bool {
        self.value(state, t) < f64::INFINITY
    }

    /// All values at stage `t`.
    pub fn stage(&self, t: usize) -> &[f64] {
        &self.values[t * self.states..(t + 1) * self.states]
    }

    /// Mutable stage `t` values and argmins together with the read-only
    /// stage `t + 1` values.
    pub(crate) fn split_stage(&mut self, t: usize) -> (&mut [f64], &mut [u32], &[f64]) {
        let n = self.states;
        let (head, tail) = self.values.split_at_mut((t + 1) * n);
        (&mut head[t * n..], &mut self.argmin[t * n..(t + 1) * n], &tail[..n])
    }

    pub(crate) fn stage_mut(&mut self, t: usize) -> &mut [f64] {
        let n = self.states;
        &mut self.values[t * n..(t + 1) * n]
    }

    pub(crate) fn encode_argmin(index: Option<usize>) -> u32 {
        index.map_or(NO_INPUT, |i| i as u32)
    }

    /// Largest absolute entrywise difference over cells finite in both;
    /// `+inf` if the feasibility patterns differ.
    pub fn max_abs_diff(&self, other: &ValueTable) -> f64 {
        if self.states != other.states || self.horizon != other.horizon {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for (a, b) in self.values.iter().zip(&other.values) {
            match (a.is_finite(), b.is_finite()) {
                (true, true) => worst = worst.max((a - b).abs()),
                (false, false) if a == b => {}
                _ => return f64::INFINITY,
            }
        }
        worst
    }
}
