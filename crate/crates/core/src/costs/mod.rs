//! Representation-map families and their validity checks.
//!
//! | family            | `phi_t(x, u, z)`                 | `phi_T(x)`           |
//! |-------------------|----------------------------------|----------------------|
//! | additive          | `c_t(x,u) + z`                   | `c_T(x)`             |
//! | pointwise max     | `max(c_t(x,u), z)`               | `c_T(x)`             |
//! | multiplicative    | `z * E_w[c_t(x,u,w)]`            | `E_w[c_T(x,w)]`      |
//! | stopped additive  | `c_t(x,u) + z (1 - p_t(x,u))`    | `c_T(x) p_T(x)`      |
//! | minimum time      | `t 1_S(x) + z (1 - 1_S(x))`      | `T`                  |

mod quadrature;

use std::fmt;
use std::sync::Arc;

pub use quadrature::{gauss_legendre, GaussLegendre, NoiseBox, PointMass, Quadrature};

use crate::error::{Error, Result};
use crate::model::{CostFamily, RepMaps, Trajectory};

type StageCostFn = dyn Fn(&[f64], &[f64], usize) -> f64 + Send + Sync;
type TerminalCostFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type NoisyStageFn = dyn Fn(&[f64], &[f64], &[f64], usize) -> f64 + Send + Sync;
type NoisyTerminalFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// Stage costs `c_t(x, u)` for `t < T` and terminal cost `c_T(x)`.
#[derive(Clone)]
pub struct StageCostSet {
    horizon: usize,
    stage: Arc<StageCostFn>,
    terminal: Arc<TerminalCostFn>,
    bounded: bool,
}

impl StageCostSet {
    /// `stage(x, u, t)` is `c_t(x, u)`.
    pub fn new(
        horizon: usize,
        stage: impl Fn(&[f64], &[f64], usize) -> f64 + Send + Sync + 'static,
        terminal: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        StageCostSet { horizon, stage: Arc::new(stage), terminal: Arc::new(terminal), bounded: false }
    }

    /// Declares the costs bounded on the problem box.
    pub fn bounded(mut self, bounded: bool) -> Self {
        self.bounded = bounded;
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    #[inline]
    pub fn stage(&self, t: usize, x: &[f64], u: &[f64]) -> f64 {
        (self.stage)(x, u, t)
    }

    #[inline]
    pub fn terminal(&self, x: &[f64]) -> f64 {
        (self.terminal)(x)
    }
}

impl fmt::Debug for StageCostSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StageCostSet").field("horizon", &self.horizon).field("bounded", &self.bounded).finish()
    }
}

/// Stopping probabilities of the stochastically stopped additive cost.
#[derive(Clone)]
pub struct StoppingProbSet {
    stage: Arc<StageCostFn>,
    terminal: Option<Arc<TerminalCostFn>>,
}

impl StoppingProbSet {
    /// `stage(x, u, t)` is `p_t(x, u)`; stopping at `T` is certain.
    pub fn new(stage: impl Fn(&[f64], &[f64], usize) -> f64 + Send + Sync + 'static) -> Self {
        StoppingProbSet { stage: Arc::new(stage), terminal: None }
    }

    /// Replaces `p_T ≡ 1` by an arbitrary terminal probability.
    pub fn with_terminal(mut self, terminal: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.terminal = Some(Arc::new(terminal));
        self
    }

    pub fn terminal_is_certain(&self) -> bool {
        self.terminal.is_none()
    }

    #[inline]
    pub fn stage(&self, t: usize, x: &[f64], u: &[f64]) -> f64 {
        (self.stage)(x, u, t)
    }

    #[inline]
    pub fn terminal(&self, x: &[f64]) -> f64 {
        self.terminal.as_ref().map_or(1.0, |p| p(x))
    }
}

impl fmt::Debug for StoppingProbSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StoppingProbSet").field("terminal_is_certain", &self.terminal_is_certain()).finish()
    }
}

/// Target `S = {x : g(x) < 0}`.
#[derive(Clone)]
pub struct TargetSet {
    g: Arc<TerminalCostFn>,
}

impl TargetSet {
    pub fn new(g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        TargetSet { g: Arc::new(g) }
    }

    /// Open box of half-width `half_width` around `center`, in the leading
    /// `center.len()` coordinates.
    pub fn open_box(center: Vec<f64>, half_width: f64) -> Self {
        TargetSet::new(move |x| {
            center.iter().zip(x).map(|(c, v)| (v - c).abs()).fold(f64::NEG_INFINITY, f64::max) - half_width
        })
    }

    #[inline]
    pub fn level(&self, x: &[f64]) -> f64 {
        (self.g)(x)
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.level(x) < 0.0
    }
}

impl fmt::Debug for TargetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TargetSet(..)")
    }
}

/// `phi_t = c_t + z`, strictly monotone.
pub fn additive_maps(costs: StageCostSet) -> RepMaps {
    let stage_costs = costs.clone();
    let terminal_costs = costs.clone();
    RepMaps::with_family(
        costs.horizon,
        Arc::new(move |x| terminal_costs.terminal(x)),
        Arc::new(move |x, u, z, t| stage_costs.stage(t, x, u) + z),
        vec![true; costs.horizon],
        costs.bounded,
        CostFamily::Additive(costs),
    )
}

/// `phi_t = max(c_t, z)`, monotone but not strictly.
pub fn max_maps(costs: StageCostSet) -> RepMaps {
    let horizon = costs.horizon;
    let bounded = costs.bounded;
    let terminal_costs = costs.clone();
    RepMaps::with_family(
        horizon,
        Arc::new(move |x| terminal_costs.terminal(x)),
        Arc::new(move |x, u, z, t| costs.stage(t, x, u).max(z)),
        vec![false; horizon],
        bounded,
        CostFamily::Max,
    )
}

/// Nonnegative noise-dependent costs `c_t(x, u, w)` and `c_T(x, w)`.
#[derive(Clone)]
pub struct NoisyCostSet {
    horizon: usize,
    stage: Arc<NoisyStageFn>,
    terminal: Arc<NoisyTerminalFn>,
    bounded: bool,
}

impl NoisyCostSet {
    /// `stage(x, u, w, t)` is `c_t(x, u, w)`.
    pub fn new(
        horizon: usize,
        stage: impl Fn(&[f64], &[f64], &[f64], usize) -> f64 + Send + Sync + 'static,
        terminal: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        NoisyCostSet { horizon, stage: Arc::new(stage), terminal: Arc::new(terminal), bounded: false }
    }

    /// Noise-free costs lifted to ignore `w`.
    pub fn deterministic(costs: StageCostSet) -> Self {
        let c = costs.clone();
        let d = costs.clone();
        NoisyCostSet {
            horizon: costs.horizon,
            stage: Arc::new(move |x, u, _, t| c.stage(t, x, u)),
            terminal: Arc::new(move |x, _| d.terminal(x)),
            bounded: costs.bounded,
        }
    }

    pub fn bounded(mut self, bounded: bool) -> Self {
        self.bounded = bounded;
        self
    }
}

/// Densities `p_t(x, u, w)` and `p_T(x, w)` of the noise at each stage.
#[derive(Clone)]
pub struct DensitySet {
    stage: Arc<NoisyStageFn>,
    terminal: Arc<NoisyTerminalFn>,
}

impl DensitySet {
    pub fn new(
        stage: impl Fn(&[f64], &[f64], &[f64], usize) -> f64 + Send + Sync + 'static,
        terminal: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DensitySet { stage: Arc::new(stage), terminal: Arc::new(terminal) }
    }
}

const NORMALIZATION_TOL: f64 = 1e-6;

/// Multiplicative maps `phi_t(x,u,z) = ∫ z p_t c_t dw`, `phi_T(x) = ∫ c_T p_T dw`.
///
/// Integrals use `quadrature` over `domains` (one box, or one per stage
/// `0..=T`). With `probs = None` the quadrature rule is itself the noise
/// distribution, e.g. [`PointMass`]. Nonnegativity, normalization and strict
/// monotonicity are checked at the `(x(t), u(t))` pairs of `probes`.
pub fn multiplicative_maps(
    costs: NoisyCostSet,
    probs: Option<DensitySet>,
    domains: Vec<NoiseBox>,
    quadrature: &dyn Quadrature,
    probes: &[Trajectory],
) -> Result<RepMaps> {
    let horizon = costs.horizon;
    if domains.len() != 1 && domains.len() != horizon + 1 {
        return Err(Error::Validation(format!(
            "expected 1 or {} noise domains, got {}",
            horizon + 1,
            domains.len()
        )));
    }
    let rules: Vec<Vec<(Vec<f64>, f64)>> = domains.iter().map(|d| quadrature.rule(d)).collect();
    let rules = Arc::new(rules);

    let stage_factor = {
        let rules = Arc::clone(&rules);
        let costs = costs.clone();
        let probs = probs.clone();
        move |x: &[f64], u: &[f64], t: usize| -> f64 {
            let rule = &rules[if rules.len() == 1 { 0 } else { t }];
            rule.iter()
                .map(|(w, weight)| {
                    let p = probs.as_ref().map_or(1.0, |d| (d.stage)(x, u, w, t));
                    weight * p * (costs.stage)(x, u, w, t)
                })
                .sum()
        }
    };
    let stage_mass = {
        let rules = Arc::clone(&rules);
        let probs = probs.clone();
        move |x: &[f64], u: &[f64], t: usize| -> f64 {
            let rule = &rules[if rules.len() == 1 { 0 } else { t }];
            rule.iter().map(|(w, weight)| weight * probs.as_ref().map_or(1.0, |d| (d.stage)(x, u, w, t))).sum()
        }
    };
    let terminal = {
        let rules = Arc::clone(&rules);
        let costs = costs.clone();
        let probs = probs.clone();
        move |x: &[f64]| -> f64 {
            let rule = rules.last().expect("at least one rule");
            rule.iter()
                .map(|(w, weight)| {
                    let p = probs.as_ref().map_or(1.0, |d| (d.terminal)(x, w));
                    weight * p * (costs.terminal)(x, w)
                })
                .sum()
        }
    };
    let terminal_mass = {
        let rules = Arc::clone(&rules);
        let probs = probs.clone();
        move |x: &[f64]| -> f64 {
            let rule = rules.last().expect("at least one rule");
            rule.iter().map(|(w, weight)| weight * probs.as_ref().map_or(1.0, |d| (d.terminal)(x, w))).sum()
        }
    };

    let mut strict = vec![!probes.is_empty(); horizon];
    for traj in probes {
        for (k, (x, u)) in traj.states.iter().zip(&traj.inputs).enumerate() {
            let t = traj.start_stage + k;
            let mass = stage_mass(x, u, t);
            if (mass - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Validation(format!("stage {t} density integrates to {mass}, not 1")));
            }
            let rule = &rules[if rules.len() == 1 { 0 } else { t }];
            if rule.iter().any(|(w, _)| (costs.stage)(x, u, w, t) < 0.0) {
                return Err(Error::Validation(format!("stage {t} cost is negative")));
            }
            if stage_factor(x, u, t) == 0.0 {
                strict[t] = false;
            }
        }
        let xt = traj.states.last().expect("non-empty");
        let mass = terminal_mass(xt);
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Validation(format!("terminal density integrates to {mass}, not 1")));
        }
    }

    Ok(RepMaps::with_family(
        horizon,
        Arc::new(terminal),
        Arc::new(move |x, u, z, t| z * stage_factor(x, u, t)),
        strict,
        costs.bounded,
        CostFamily::Multiplicative,
    ))
}

/// Multiplicative maps with deterministic noise: `phi_t = c_t z`, `phi_T = c_T`.
pub fn point_mass_maps(costs: StageCostSet, probes: &[Trajectory]) -> Result<RepMaps> {
    multiplicative_maps(
        NoisyCostSet::deterministic(costs),
        None,
        vec![NoiseBox::new(vec![0.0], vec![0.0])],
        &PointMass { at: vec![0.0] },
        probes,
    )
}

/// Stochastically stopped additive maps `phi_t = c_t + z (1 - p_t)`,
/// `phi_T = c_T p_T`.
///
/// Probabilities must lie in `[0, 1]` at every probe. If `p_T` is not
/// certain the total-probability identity is checked on `probes` and an
/// unverifiable (empty) probe set is rejected.
pub fn stopped_additive_maps(costs: StageCostSet, probs: StoppingProbSet, probes: &[Trajectory]) -> Result<RepMaps> {
    let horizon = costs.horizon;
    let mut strict = vec![!probes.is_empty(); horizon];
    for traj in probes {
        for (k, (x, u)) in traj.states.iter().zip(&traj.inputs).enumerate() {
            let t = traj.start_stage + k;
            let p = probs.stage(t, x, u);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!("stage {t} stopping probability {p} outside [0, 1]")));
            }
            if p == 1.0 {
                strict[t] = false;
            }
        }
        let p = probs.terminal(traj.states.last().expect("non-empty"));
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!("terminal stopping probability {p} outside [0, 1]")));
        }
    }
    if !probs.terminal_is_certain() {
        if probes.is_empty() {
            return Err(Error::Validation("total probability cannot be checked without probes".into()));
        }
        let report = check_total_probability(&probs, horizon, probes);
        if let Some(bad) = report.counterexample {
            return Err(Error::Validation(format!(
                "total probability of probe {} sums to {}, not 1",
                bad.probe, bad.total
            )));
        }
    }
    Ok(build_stopped(costs, probs, strict, CostFamily::StoppedAdditive))
}

fn build_stopped(costs: StageCostSet, probs: StoppingProbSet, strict: Vec<bool>, family: CostFamily) -> RepMaps {
    let horizon = costs.horizon;
    let bounded = costs.bounded;
    let (c, p) = (costs.clone(), probs.clone());
    RepMaps::with_family(
        horizon,
        Arc::new(move |x| costs.terminal(x) * probs.terminal(x)),
        Arc::new(move |x, u, z, t| c.stage(t, x, u) + z * (1.0 - p.stage(t, x, u))),
        strict,
        bounded,
        family,
    )
}

/// Minimum-time set entry: `J = min{first t with x(t) ∈ S, T}`.
///
/// Built as stopped additive maps with `c_t = t·1_S(x)`, `p_t = 1_S(x)`,
/// `c_T ≡ T`, `p_T ≡ 1`. Not strictly monotone.
pub fn min_time_maps(target: TargetSet, horizon: usize) -> RepMaps {
    let in_target = target.clone();
    let costs = StageCostSet::new(
        horizon,
        move |x, _, t| if in_target.contains(x) { t as f64 } else { 0.0 },
        move |_| horizon as f64,
    )
    .bounded(true);
    build_stopped(costs, min_time_stopping(target), vec![false; horizon], CostFamily::MinTime)
}

/// Stopping probabilities of [`min_time_maps`]: `p_t = 1_S(x)`, `p_T ≡ 1`.
pub fn min_time_stopping(target: TargetSet) -> StoppingProbSet {
    StoppingProbSet::new(move |x, _, _| if target.contains(x) { 1.0 } else { 0.0 })
}

/// A probe trajectory whose stopping probabilities do not sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityDeficit {
    pub probe: usize,
    pub total: f64,
}

/// Result of [`check_total_probability`].
#[derive(Clone, Debug, PartialEq)]
pub struct TotalProbabilityReport {
    pub checked: usize,
    pub max_deviation: f64,
    pub counterexample: Option<ProbabilityDeficit>,
}

impl TotalProbabilityReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

const TOTAL_PROBABILITY_TOL: f64 = 1e-9;

/// Checks `Σ_t p_t Π_{i<t}(1-p_i) + p_T Π_{i<T}(1-p_i) = 1` on every
/// trajectory; the first one off by more than `1e-9` is reported.
pub fn check_total_probability(
    probs: &StoppingProbSet,
    horizon: usize,
    trajectories: &[Trajectory],
) -> TotalProbabilityReport {
    let mut report = TotalProbabilityReport { checked: 0, max_deviation: 0.0, counterexample: None };
    for (probe, traj) in trajectories.iter().enumerate() {
        debug_assert_eq!(traj.start_stage + traj.inputs.len(), horizon);
        let mut survive = 1.0;
        let mut total = 0.0;
        for (k, (x, u)) in traj.states.iter().zip(&traj.inputs).enumerate() {
            let p = probs.stage(traj.start_stage + k, x, u);
            total += p * survive;
            survive *= 1.0 - p;
        }
        total += probs.terminal(traj.states.last().expect("non-empty")) * survive;
        let dev = (total - 1.0).abs();
        report.checked += 1;
        report.max_deviation = report.max_deviation.max(dev);
        if dev > TOTAL_PROBABILITY_TOL && report.counterexample.is_none() {
            report.counterexample = Some(ProbabilityDeficit { probe, total });
        }
    }
    report
}

/// One monotonicity probe: `z >= w` at stage `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneSample {
    pub t: usize,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub z: f64,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneViolation {
    pub sample: MonotoneSample,
    pub at_z: f64,
    pub at_w: f64,
    pub strict: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MonotoneReport {
    pub samples: usize,
    pub strict_checks: usize,
    pub violations: Vec<MonotoneViolation>,
    /// Samples with a non-finite map value although the maps are flagged bounded.
    pub unbounded: usize,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.unbounded == 0
    }
}

/// Samples `phi_t(x,u,z) >= phi_t(x,u,w)` for `z >= w`, and the strict
/// inequality for `z > w` at stages flagged strict.
pub fn check_monotone(maps: &RepMaps, mut sampler: impl FnMut() -> MonotoneSample, n_samples: usize) -> MonotoneReport {
    let mut report = MonotoneReport::default();
    for _ in 0..n_samples {
        let s = sampler();
        debug_assert!(s.z >= s.w, "sampler must order z >= w");
        let at_z = maps.stage(s.t, &s.x, &s.u, s.z);
        let at_w = maps.stage(s.t, &s.x, &s.u, s.w);
        report.samples += 1;
        if maps.is_bounded() && (!at_z.is_finite() || !at_w.is_finite()) {
            report.unbounded += 1;
        }
        let strict = maps.is_strict(s.t) && s.z > s.w;
        if strict {
            report.strict_checks += 1;
        }
        let ok = if strict { at_z > at_w } else { at_z >= at_w };
        if !ok {
            report.violations.push(MonotoneViolation { sample: s, at_z, at_w, strict });
        }
    }
    report
}
