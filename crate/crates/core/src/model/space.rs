use std::hash::Hasher;

use rustc_hash::{FxHashMap as HashMap, FxHasher};
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::State;
use crate::error::{Error, Result};

/// Exact bit pattern of a state, with `-0.0` folded into `0.0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateKey(SmallVec<[u64; 4]>);

impl StateKey {
    pub fn of(x: &[f64]) -> Self {
        StateKey(x.iter().map(|v| folded(*v)).collect())
    }

    pub(crate) fn from_bits(bits: &[u64]) -> Self {
        StateKey(SmallVec::from_slice(bits))
    }
}

/// How values are read at off-grid successor states.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookupPolicy {
    #[default]
    Interpolate,
    Nearest,
    /// Nearest node, but `+inf` if any node of the enclosing cell is `+inf`.
    NearestSafe,
}

/// An explicit finite list of states.
#[derive(Clone, Debug)]
pub struct ExactStates {
    states: Vec<State>,
    /// Fingerprint to the first state with that fingerprint.
    index: HashMap<u64, usize>,
    /// Further states sharing a fingerprint.
    collisions: HashMap<u64, Vec<usize>>,
}

/// Bit pattern of `v` with `-0.0` folded into `0.0`.
pub(crate) fn folded(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

fn fingerprint(x: &[f64]) -> u64 {
    let mut h = FxHasher::default();
    h.write_usize(x.len());
    // Byte writes go through the hasher's full mixing step; `write_u64`
    // alone loses the high bits that distinguish small floats.
    for v in x {
        h.write(&folded(*v).to_le_bytes());
    }
    h.finish()
}

fn same_state(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| folded(*p) == folded(*q))
}

impl ExactStates {
    pub fn new(states: Vec<State>) -> Result<Self> {
        let mut out = ExactStates::with_capacity(states.len());
        for s in states {
            if let Err(s) = out.insert(s) {
                return Err(Error::Validation(format!("duplicate state {:?}", s.as_slice())));
            }
        }
        Ok(out)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        ExactStates {
            states: Vec::with_capacity(capacity),
            index: HashMap::with_capacity_and_hasher(capacity, Default::default()),
            collisions: HashMap::default(),
        }
    }

    /// Appends `s`, or hands it back if it is already listed.
    pub fn insert(&mut self, s: State) -> std::result::Result<usize, State> {
        let i = self.states.len();
        let h = fingerprint(&s);
        let first = *self.index.entry(h).or_insert(i);
        if first != i {
            let others = self.collisions.entry(h).or_default();
            if std::iter::once(&first).chain(others.iter()).any(|&j| same_state(&self.states[j], &s)) {
                return Err(s);
            }
            others.push(i);
        }
        self.states.push(s);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn into_states(self) -> Vec<State> {
        self.states
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        let h = fingerprint(x);
        let first = *self.index.get(&h)?;
        if same_state(&self.states[first], x) {
            return Some(first);
        }
        self.collisions.get(&h)?.iter().copied().find(|&j| same_state(&self.states[j], x))
    }
}

/// One grid dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    breakpoints: Vec<f64>,
    /// Wrapped modulo `2*pi`; breakpoints are `k * 2*pi / n`, `k < n`.
    periodic: bool,
    #[serde(skip)]
    step: Option<f64>,
}

impl Axis {
    /// `n >= 2` evenly spaced breakpoints including both ends.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::Grid(format!("uniform axis needs n >= 2 and lo < hi, got n={n} [{lo}, {hi}]")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut breakpoints: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        breakpoints[n - 1] = hi;
        Ok(Axis { breakpoints, periodic: false, step: Some(step) })
    }

    /// Angular axis with `n` points on `[0, 2*pi)`.
    pub fn angular(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Grid("angular axis needs at least 2 points".into()));
        }
        let step = TAU / n as f64;
        Ok(Axis { breakpoints: (0..n).map(|i| step * i as f64).collect(), periodic: true, step: Some(step) })
    }

    pub fn from_breakpoints(breakpoints: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Grid("axis needs at least 2 breakpoints".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("breakpoints must be strictly increasing".into()));
        }
        Ok(Axis { breakpoints, periodic: false, step: None })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn lo(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn hi(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty axis")
    }

    /// Bracketing breakpoints `(lower, upper, weight of upper)` for `v`.
    /// Non-periodic axes clamp `v` to their extent.
    #[inline]
    fn bracket(&self, v: f64) -> (usize, usize, f64) {
        let n = self.breakpoints.len();
        if self.periodic {
            let step = self.step.expect("periodic axes are uniform");
            let w = v.rem_euclid(TAU);
            let s = w / step;
            let i = (s.floor() as usize).min(n - 1);
            let frac = (s - i as f64).clamp(0.0, 1.0);
            return (i, (i + 1) % n, frac);
        }
        let lo = self.breakpoints[0];
        let hi = self.breakpoints[n - 1];
        let v = v.clamp(lo, hi);
        let i = match self.step {
            Some(step) => (((v - lo) / step).floor() as usize).min(n - 2),
            None => self.breakpoints.partition_point(|b| *b <= v).saturating_sub(1).min(n - 2),
        };
        let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
        let frac = ((v - a) / (b - a)).clamp(0.0, 1.0);
        (i, i + 1, frac)
    }
}

/// Rectangular grid of sampled states, row-major (last axis fastest).
#[derive(Clone, Debug)]
pub struct GridSpace {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
    lookup: LookupPolicy,
}

impl GridSpace {
    pub fn new(axes: Vec<Axis>, lookup: LookupPolicy) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::Grid("grid needs at least one axis".into()));
        }
        let mut strides = vec![1usize; axes.len()];
        for d in (0..axes.len() - 1).rev() {
            strides[d] = strides[d + 1] * axes[d + 1].len();
        }
        let len = strides[0] * axes[0].len();
        Ok(GridSpace { axes, strides, len, lookup })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn lookup_policy(&self) -> LookupPolicy {
        self.lookup
    }

    pub fn with_lookup(mut self, lookup: LookupPolicy) -> Self {
        self.lookup = lookup;
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn state(&self, mut index: usize) -> State {
        let mut out = State::with_capacity(self.axes.len());
        for (axis, stride) in self.axes.iter().zip(&self.strides) {
            out.push(axis.breakpoints[index / stride]);
            index %= stride;
        }
        out
    }

    /// Grid index of a point lying exactly on a grid node.
    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.axes.len() {
            return None;
        }
        let mut index = 0;
        for ((axis, stride), v) in self.axes.iter().zip(&self.strides).zip(x) {
            let i = axis.breakpoints.iter().position(|b| b == v)?;
            index += i * stride;
        }
        Some(index)
    }

    fn cell_touches_infinity(&self, values: &[f64], brackets: &[(usize, usize, f64)]) -> bool {
        (0..(1usize << brackets.len())).any(|corner| {
            let mut index = 0;
            for (d, ((i, j, w), s)) in brackets.iter().zip(&self.strides).enumerate() {
                if corner & (1 << d) != 0 {
                    if *w == 0.0 {
                        return false;
                    }
                    index += j * s;
                } else {
                    if *w == 1.0 {
                        return false;
                    }
                    index += i * s;
                }
            }
            values[index] == f64::INFINITY
        })
    }

    /// Value of the stage slice `values` at `x` under the lookup policy.
    /// Any interpolation corner holding `+inf` with positive weight makes
    /// the result `+inf`.
    #[inline]
    pub fn value_at(&self, values: &[f64], x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.axes.len());
        let brackets: SmallVec<[(usize, usize, f64); 4]> =
            self.axes.iter().zip(x).map(|(axis, v)| axis.bracket(*v)).collect();
        match self.lookup {
            LookupPolicy::Nearest | LookupPolicy::NearestSafe => {
                if self.lookup == LookupPolicy::NearestSafe && self.cell_touches_infinity(values, &brackets) {
                    return f64::INFINITY;
                }
                let index: usize = brackets
                    .iter()
                    .zip(&self.strides)
                    .map(|((i, j, w), s)| if *w > 0.5 { j * s } else { i * s })
                    .sum();
                values[index]
            }
            LookupPolicy::Interpolate => {
                let dims = brackets.len();
                let mut acc = 0.0;
                for corner in 0..(1usize << dims) {
                    let mut weight = 1.0;
                    let mut index = 0;
                    for (d, ((i, j, w), s)) in brackets.iter().zip(&self.strides).enumerate() {
                        if corner & (1 << d) != 0 {
                            weight *= w;
                            index += j * s;
                        } else {
                            weight *= 1.0 - w;
                            index += i * s;
                        }
                    }
                    if weight == 0.0 {
                        continue;
                    }
                    let v = values[index];
                    if v == f64::INFINITY {
                        return f64::INFINITY;
                    }
                    acc += weight * v;
                }
                acc
            }
        }
    }
}

/// A state of a [`StateSpace`], borrowed or computed.
#[derive(Clone, Debug)]
pub enum StateView<'a> {
    Listed(&'a [f64]),
    Node(State),
}

impl std::ops::Deref for StateView<'_> {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        match self {
            StateView::Listed(x) => x,
            StateView::Node(x) => x,
        }
    }
}

/// Discretization of the state space a value table is defined on.
#[derive(Clone, Debug)]
pub enum StateSpace {
    Exact(ExactStates),
    Grid(GridSpace),
}

impl StateSpace {
    pub fn exact(states: Vec<State>) -> Result<Self> {
        Ok(StateSpace::Exact(ExactStates::new(states)?))
    }

    pub fn from_exact(states: ExactStates) -> Self {
        StateSpace::Exact(states)
    }

    pub fn grid(axes: Vec<Axis>, lookup: LookupPolicy) -> Result<Self> {
        Ok(StateSpace::Grid(GridSpace::new(axes, lookup)?))
    }

    pub fn len(&self) -> usize {
        match self {
            StateSpace::Exact(e) => e.states.len(),
            StateSpace::Grid(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, StateSpace::Exact(_))
    }

    pub fn state(&self, index: usize) -> State {
        match self {
            StateSpace::Exact(e) => e.states[index].clone(),
            StateSpace::Grid(g) => g.state(index),
        }
    }

    /// Like [`state`](Self::state), but borrows listed states instead of
    /// cloning them.
    pub fn view(&self, index: usize) -> StateView<'_> {
        match self {
            StateSpace::Exact(e) => StateView::Listed(&e.states[index]),
            StateSpace::Grid(g) => StateView::Node(g.state(index)),
        }
    }

    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        match self {
            StateSpace::Exact(e) => e.index_of(x),
            StateSpace::Grid(g) => g.index_of(x),
        }
    }

    /// Value at `x` read from one stage slice. `None` when `x` is not a
    /// listed state of an exact space.
    #[inline]
    pub fn value_at(&self, values: &[f64], x: &[f64]) -> Option<f64> {
        match self {
            StateSpace::Exact(e) => e.index_of(x).map(|i| values[i]),
            StateSpace::Grid(g) => Some(g.value_at(values, x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::point;

    #[test]
    fn uniform_axis_rejects_degenerate() {
        assert!(Axis::uniform(0.0, 1.0, 1).is_err());
        assert!(Axis::uniform(1.0, 1.0, 3).is_err());
        assert!(Axis::from_breakpoints(vec![0.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn grid_index_round_trip() {
        let g = GridSpace::new(
            vec![Axis::uniform(-1.0, 1.0, 3).unwrap(), Axis::uniform(0.0, 1.0, 4).unwrap()],
            LookupPolicy::Interpolate,
        )
        .unwrap();
        assert_eq!(g.len(), 12);
        for i in 0..g.len() {
            assert_eq!(g.index_of(&g.state(i)), Some(i));
        }
        assert_eq!(g.state(7).as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn bilinear_is_exact_on_affine_data() {
        let g = GridSpace::new(
            vec![Axis::uniform(0.0, 1.0, 5).unwrap(), Axis::uniform(0.0, 2.0, 3).unwrap()],
            LookupPolicy::Interpolate,
        )
        .unwrap();
        let values: Vec<f64> = (0..g.len()).map(|i| {
            let s = g.state(i);
            3.0 * s[0] - s[1] + 0.5
        }).collect();
        for x in [[0.1, 0.3], [0.99, 1.7], [0.5, 1.0]] {
            let v = g.value_at(&values, &x);
            assert!((v - (3.0 * x[0] - x[1] + 0.5)).abs() < 1e-12);
        }
        // Outside the box the point is clamped.
        assert!((g.value_at(&values, &[2.0, 1.0]) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn infinite_corner_poisons_only_with_weight() {
        let g = GridSpace::new(vec![Axis::uniform(0.0, 1.0, 2).unwrap()], LookupPolicy::Interpolate).unwrap();
        let values = [1.0, f64::INFINITY];
        assert_eq!(g.value_at(&values, &[0.0]), 1.0);
        assert!(g.value_at(&values, &[0.01]).is_infinite());
        let nearest = g.clone().with_lookup(LookupPolicy::Nearest);
        assert_eq!(nearest.value_at(&values, &[0.4]), 1.0);
        assert!(nearest.value_at(&values, &[0.6]).is_infinite());
        let safe = g.clone().with_lookup(LookupPolicy::NearestSafe);
        assert!(safe.value_at(&values, &[0.4]).is_infinite());
        assert_eq!(safe.value_at(&values, &[0.0]), 1.0);
        assert_eq!(safe.value_at(&[1.0, 2.0], &[0.4]), 1.0);
    }

    #[test]
    fn angular_axis_wraps() {
        let g = GridSpace::new(vec![Axis::angular(4).unwrap()], LookupPolicy::Interpolate).unwrap();
        let values = [0.0, 1.0, 2.0, 3.0];
        let a = g.value_at(&values, &[TAU - 0.25 * std::f64::consts::FRAC_PI_2]);
        // Between node 3 (value 3) and node 0 (value 0), three quarters of the way.
        assert!((a - 0.75).abs() < 1e-12);
        let b = g.value_at(&values, &[-std::f64::consts::FRAC_PI_2]);
        assert!((b - 3.0).abs() < 1e-12);
        assert!((g.value_at(&values, &[TAU + 1e-12]) - 0.0).abs() < 1e-9);
    }

    #[test]
    fn exact_space_lookup() {
        let s = StateSpace::exact(vec![point(&[1.0]), point(&[2.0])]).unwrap();
        assert_eq!(s.value_at(&[10.0, 20.0], &[2.0]), Some(20.0));
        assert_eq!(s.value_at(&[10.0, 20.0], &[3.0]), None);
        assert_eq!(s.index_of(&[-0.0]), None);
        assert!(StateSpace::exact(vec![point(&[1.0]), point(&[1.0])]).is_err());
    }
}
