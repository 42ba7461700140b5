use std::path::PathBuf;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::costs::{
    additive_maps, max_maps, min_time_maps, point_mass_maps, stopped_additive_maps, StageCostSet, StoppingProbSet,
    TargetSet,
};
use crate::error::{Error, Result};
use crate::model::{point, Axis, Dynamics, LookupPolicy, Msop, Objective, StageSet, State, StateSpace, Trajectory};
use crate::oracle::DEFAULT_ENUMERATION_BUDGET;
use crate::problems::{
    dubins_problem, fthmis_problem, lemma3_problem, lemma3_space, path3d_problem, sqrt_base_policy, sqrt_msop,
    DubinsConfig, FthmisConfig, Path3dConfig, PlanningInstance, DEFAULT_DUBINS_SEED, DEFAULT_PATH3D_SEED,
};
use crate::solver::{BasePolicy, ForwardMaps, DEFAULT_AUGMENT_BUDGET};

/// Environment variable overriding the enumeration and augmentation budgets.
pub const BUDGET_ENV: &str = "GBE_BUDGET";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gbe,
    Bellman,
    Augment,
    Rollout,
    Enumerate,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Gbe => "gbe",
            Method::Bellman => "bellman",
            Method::Augment => "augment",
            Method::Rollout => "rollout",
            Method::Enumerate => "enumerate",
        }
    }

    pub fn parse(name: &str) -> Result<Method> {
        serde_json::from_value(serde_json::Value::String(name.to_string())).map_err(|_| Error::Config {
            key: "method".into(),
            expected: "one of gbe, bellman, augment, rollout, enumerate".into(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Agreement required between methods and against the oracle.
    #[serde(default = "default_value_tolerance")]
    pub value: f64,
}

fn default_value_tolerance() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { value: default_value_tolerance() }
    }
}

/// A validated run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    /// Defaults to `enumerate` for `lemma3` and `gbe` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Obstacle seed for the planning problems and sampler seed for `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Enumeration and augmentation budget; `GBE_BUDGET` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Degree of the level-set polynomial for `fthmis`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

/// Either `{"builtin": name, ...parameters}` or `{"inline": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProblemConfig {
    Builtin(Builtin),
    Inline { inline: InlineProblem },
}

impl<'de> Deserialize<'de> for ProblemConfig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        let shape = "`problem`: expected an object with either a `builtin` name or a single `inline` object";
        let object = value.as_object().ok_or_else(|| D::Error::custom(shape))?;
        match (object.contains_key("builtin"), object.get("inline")) {
            (true, None) => Builtin::deserialize(value).map(ProblemConfig::Builtin).map_err(D::Error::custom),
            (false, Some(inline)) if object.len() == 1 => InlineProblem::deserialize(inline.clone())
                .map(|inline| ProblemConfig::Inline { inline })
                .map_err(|e| D::Error::custom(format!("in `problem.inline`: {e}"))),
            _ => Err(D::Error::custom(shape)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin {
    Sqrt {
        horizon: usize,
    },
    Lemma3 {
        #[serde(default = "one")]
        h: f64,
    },
    Dubins {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inputs: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        box_margin: Option<f64>,
        #[serde(default)]
        lookup: LookupPolicy,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        starts: Option<Vec<Vec<f64>>>,
    },
    Path3d {
        #[serde(default)]
        moving: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        horizon: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_drift: Option<f64>,
        #[serde(default)]
        lookup: LookupPolicy,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        starts: Option<Vec<Vec<f64>>>,
    },
    Fthmis {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_points: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inputs: Option<usize>,
        #[serde(default)]
        lookup: LookupPolicy,
        /// Starts to extract trajectories from; the mask is always written.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        starts: Vec<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

/// A problem on a box `[lo, hi]` sampled by a uniform grid, with optional
/// spherical keep-out regions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    pub horizon: usize,
    pub dynamics: DynamicsSpec,
    pub bounds: BoxSpec,
    /// Grid points per axis.
    pub grid: Vec<usize>,
    #[serde(default)]
    pub lookup: LookupPolicy,
    pub inputs: Vec<Vec<f64>>,
    pub cost: CostSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub obstacles: Vec<BallSpec>,
    pub initial_states: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// Open ball removed from every stage's constraint set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DynamicsSpec {
    /// `x + u`.
    Integrator,
    /// `A x + B u`, row-major.
    Linear { a: Vec<Vec<f64>>, b: Vec<Vec<f64>> },
}

/// `c_t = w_x |x - r|^2 + w_u |u|^2`, `c_T = w_T |x - r|^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticCost {
    pub reference: Vec<f64>,
    #[serde(default = "one")]
    pub state_weight: f64,
    #[serde(default)]
    pub input_weight: f64,
    #[serde(default = "one")]
    pub terminal_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppedCost {
    pub reference: Vec<f64>,
    #[serde(default = "one")]
    pub state_weight: f64,
    #[serde(default)]
    pub input_weight: f64,
    #[serde(default = "one")]
    pub terminal_weight: f64,
    /// Constant per-stage stopping probability; stopping at `T` is certain.
    pub stop_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    Additive(QuadraticCost),
    Max(QuadraticCost),
    /// Product of `exp(c_t)` factors with deterministic noise.
    Multiplicative(QuadraticCost),
    StoppedAdditive(StoppedCost),
    MinTime { target_center: Vec<f64>, half_width: f64 },
}

impl CostSpec {
    pub fn family(&self) -> &'static str {
        match self {
            CostSpec::Additive(_) => "additive",
            CostSpec::Max(_) => "max",
            CostSpec::Multiplicative(_) => "multiplicative",
            CostSpec::StoppedAdditive(_) => "stopped_additive",
            CostSpec::MinTime { .. } => "min_time",
        }
    }
}

/// Parses and validates a JSON config document.
pub fn parse_config(document: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(document)?;
    config.validate()?;
    Ok(config)
}

/// `GBE_BUDGET` if set, else `configured`, else `default`.
pub fn resolve_budget(configured: Option<u64>, default: u128) -> Result<u128> {
    if let Ok(text) = std::env::var(BUDGET_ENV) {
        return text
            .trim()
            .parse()
            .map_err(|_| config_error(BUDGET_ENV, format!("a non-negative integer, got {text:?}")));
    }
    Ok(configured.map_or(default, u128::from))
}

fn config_error(key: &str, expected: impl Into<String>) -> Error {
    Error::Config { key: key.into(), expected: expected.into() }
}

impl RunConfig {
    pub fn for_problem(problem: ProblemConfig) -> Self {
        RunConfig {
            problem,
            method: None,
            threads: None,
            seed: None,
            out: None,
            tolerances: Tolerances::default(),
            budget: None,
            degree: None,
        }
    }

    pub fn problem_name(&self) -> &'static str {
        match &self.problem {
            ProblemConfig::Builtin(Builtin::Sqrt { .. }) => "sqrt",
            ProblemConfig::Builtin(Builtin::Lemma3 { .. }) => "lemma3",
            ProblemConfig::Builtin(Builtin::Dubins { .. }) => "dubins",
            ProblemConfig::Builtin(Builtin::Path3d { .. }) => "path3d",
            ProblemConfig::Builtin(Builtin::Fthmis { .. }) => "fthmis",
            ProblemConfig::Inline { .. } => "inline",
        }
    }

    pub fn method(&self) -> Method {
        self.method.unwrap_or(match self.problem {
            ProblemConfig::Builtin(Builtin::Lemma3 { .. }) => Method::Enumerate,
            _ => Method::Gbe,
        })
    }

    /// Sets the grid scale of a planning builtin.
    pub fn set_grid_scale(&mut self, scale: f64) -> Result<()> {
        match &mut self.problem {
            ProblemConfig::Builtin(Builtin::Dubins { grid_scale, .. } | Builtin::Path3d { grid_scale, .. }) => {
                *grid_scale = Some(scale);
                Ok(())
            }
            _ => Err(config_error("grid_scale", "a `dubins` or `path3d` builtin")),
        }
    }

    pub fn enumeration_budget(&self) -> Result<u128> {
        resolve_budget(self.budget, DEFAULT_ENUMERATION_BUDGET)
    }

    pub fn augment_budget(&self) -> Result<u128> {
        resolve_budget(self.budget, DEFAULT_AUGMENT_BUDGET)
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(config_error("threads", "a positive integer"));
        }
        if !(self.tolerances.value >= 0.0) {
            return Err(config_error("tolerances.value", "a non-negative number"));
        }
        match &self.problem {
            ProblemConfig::Builtin(builtin) => validate_builtin(builtin)?,
            ProblemConfig::Inline { inline } => inline.validate()?,
        }
        let method = self.method();
        let name = self.problem_name();
        let family = match &self.problem {
            ProblemConfig::Inline { inline } => inline.cost.family(),
            ProblemConfig::Builtin(Builtin::Dubins { .. } | Builtin::Path3d { .. }) => "min_time",
            ProblemConfig::Builtin(Builtin::Fthmis { .. }) => "max",
            ProblemConfig::Builtin(Builtin::Sqrt { .. }) => "nested_radical",
            ProblemConfig::Builtin(Builtin::Lemma3 { .. }) => "direct",
        };
        let compatible = match method {
            Method::Gbe => name != "lemma3",
            Method::Bellman => family == "additive",
            Method::Augment | Method::Rollout => name == "sqrt",
            Method::Enumerate => true,
        };
        if !compatible {
            let expected = match method {
                Method::Gbe => "a method other than gbe: lemma3 has no representation maps (use enumerate)".to_string(),
                Method::Bellman => format!("a method other than bellman: it needs additive costs, got `{family}`"),
                Method::Augment => "a problem with forward maps (sqrt) for augment".to_string(),
                Method::Rollout => "a problem with a base policy (sqrt) for rollout".to_string(),
                Method::Enumerate => unreachable!("enumeration applies to every problem"),
            };
            return Err(config_error("method", expected));
        }
        Ok(())
    }
}

fn check_scale(scale: Option<f64>) -> Result<()> {
    match scale {
        Some(s) if !(s > 0.0 && s <= 1.0) => Err(config_error("problem.grid_scale", "a number in (0, 1]")),
        _ => Ok(()),
    }
}

fn check_starts(starts: &[Vec<f64>], dim: usize) -> Result<()> {
    if starts.iter().any(|s| s.len() != dim) {
        return Err(config_error("problem.starts", format!("points of dimension {dim}")));
    }
    Ok(())
}

fn validate_builtin(builtin: &Builtin) -> Result<()> {
    match builtin {
        Builtin::Sqrt { horizon } if *horizon == 0 => Err(config_error("problem.horizon", "a positive integer")),
        Builtin::Lemma3 { h } if !(*h > 0.0) => Err(config_error("problem.h", "a positive number")),
        Builtin::Dubins { grid_scale, horizon, inputs, box_margin, starts, .. } => {
            check_scale(*grid_scale)?;
            if *horizon == Some(0) {
                return Err(config_error("problem.horizon", "a positive integer"));
            }
            if *inputs == Some(0) {
                return Err(config_error("problem.inputs", "a positive integer"));
            }
            if box_margin.is_some_and(|m| !(m >= 0.0)) {
                return Err(config_error("problem.box_margin", "a non-negative number"));
            }
            check_starts(starts.as_deref().unwrap_or_default(), 3)
        }
        Builtin::Path3d { grid_scale, horizon, max_drift, starts, .. } => {
            check_scale(*grid_scale)?;
            if *horizon == Some(0) {
                return Err(config_error("problem.horizon", "a positive integer"));
            }
            if max_drift.is_some_and(|d| !(d >= 0.0)) {
                return Err(config_error("problem.max_drift", "a non-negative number"));
            }
            check_starts(starts.as_deref().unwrap_or_default(), 3)
        }
        Builtin::Fthmis { grid_points, inputs, starts, .. } => {
            if grid_points.is_some_and(|n| n < 2) {
                return Err(config_error("problem.grid_points", "at least 2"));
            }
            if *inputs == Some(0) {
                return Err(config_error("problem.inputs", "a positive integer"));
            }
            check_starts(starts, 2)
        }
        _ => Ok(()),
    }
}

impl InlineProblem {
    fn dim(&self) -> usize {
        self.bounds.lo.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.horizon == 0 {
            return Err(config_error("problem.inline.horizon", "a positive integer"));
        }
        if n == 0 || self.bounds.hi.len() != n {
            return Err(config_error("problem.inline.bounds", "`lo` and `hi` of equal, positive length"));
        }
        if self.bounds.lo.iter().zip(&self.bounds.hi).any(|(l, h)| !(l < h)) {
            return Err(config_error("problem.inline.bounds", "lo < hi on every axis"));
        }
        if self.grid.len() != n || self.grid.iter().any(|p| *p < 2) {
            return Err(config_error("problem.inline.grid", format!("{n} axis sizes, each at least 2")));
        }
        let m = self.inputs.first().map_or(0, Vec::len);
        if m == 0 || self.inputs.iter().any(|u| u.len() != m) {
            return Err(config_error("problem.inline.inputs", "a non-empty list of equal-length points"));
        }
        match &self.dynamics {
            DynamicsSpec::Integrator if m != n => {
                return Err(config_error("problem.inline.dynamics", format!("inputs of dimension {n} for an integrator")));
            }
            DynamicsSpec::Linear { a, b }
                if a.len() != n || a.iter().any(|r| r.len() != n) || b.len() != n || b.iter().any(|r| r.len() != m) =>
            {
                return Err(config_error("problem.inline.dynamics", format!("`a` of shape {n}x{n} and `b` of shape {n}x{m}")));
            }
            _ => {}
        }
        let reference = match &self.cost {
            CostSpec::Additive(q) | CostSpec::Max(q) | CostSpec::Multiplicative(q) => &q.reference,
            CostSpec::StoppedAdditive(s) => {
                if !(0.0..=1.0).contains(&s.stop_probability) {
                    return Err(config_error("problem.inline.cost.stop_probability", "a probability in [0, 1]"));
                }
                &s.reference
            }
            CostSpec::MinTime { target_center, half_width } => {
                if !(*half_width > 0.0) {
                    return Err(config_error("problem.inline.cost.half_width", "a positive number"));
                }
                target_center
            }
        };
        if reference.len() != n {
            return Err(config_error("problem.inline.cost", format!("a reference point of dimension {n}")));
        }
        if self.obstacles.iter().any(|o| o.center.len() != n || !(o.radius > 0.0)) {
            return Err(config_error("problem.inline.obstacles", format!("balls with {n}-dimensional centers and positive radii")));
        }
        if self.initial_states.is_empty() || self.initial_states.iter().any(|x| x.len() != n) {
            return Err(config_error("problem.inline.initial_states", format!("a non-empty list of {n}-dimensional points")));
        }
        Ok(())
    }

    fn build(&self) -> Result<(Msop, StateSpace)> {
        let n = self.dim();
        let horizon = self.horizon;
        let dynamics = match self.dynamics.clone() {
            DynamicsSpec::Integrator => Dynamics::new(|x, u, _| x.iter().zip(u).map(|(a, b)| a + b).collect()),
            DynamicsSpec::Linear { a, b } => Dynamics::new(move |x, u, _| {
                (0..a.len())
                    .map(|i| {
                        let ax: f64 = a[i].iter().zip(x).map(|(p, q)| p * q).sum();
                        let bu: f64 = b[i].iter().zip(u).map(|(p, q)| p * q).sum();
                        ax + bu
                    })
                    .collect()
            }),
        };
        let (lo, hi) = (self.bounds.lo.clone(), self.bounds.hi.clone());
        let obstacles = self.obstacles.clone();
        let stage_set = StageSet::new(move |x| {
            x.iter().zip(lo.iter().zip(&hi)).all(|(v, (l, h))| *l <= *v && *v <= *h)
                && !obstacles.iter().any(|o| dist2(x, &o.center) < o.radius * o.radius)
        });
        let inputs: Vec<State> = self.inputs.iter().map(|u| point(u)).collect();
        let quadratic = |reference: &[f64], wx: f64, wu: f64, wt: f64| {
            let (r, rt) = (reference.to_vec(), reference.to_vec());
            StageCostSet::new(
                horizon,
                move |x, u, _| wx * dist2(x, &r) + wu * u.iter().map(|v| v * v).sum::<f64>(),
                move |x| wt * dist2(x, &rt),
            )
        };
        let mut problem = Msop::new(
            horizon,
            dynamics,
            vec![stage_set; horizon + 1],
            inputs.clone(),
            Objective::direct(|_, _, _| 0.0),
        )?;
        // Probes for the strictness flags: the first input held constant.
        let probes: Vec<Trajectory> = self
            .initial_states
            .iter()
            .map(|x0| problem.simulate(x0, &vec![inputs[0].clone(); horizon]))
            .collect::<Result<_>>()?;
        let maps = match &self.cost {
            CostSpec::Additive(q) => additive_maps(quadratic(&q.reference, q.state_weight, q.input_weight, q.terminal_weight)),
            CostSpec::Max(q) => max_maps(quadratic(&q.reference, q.state_weight, q.input_weight, q.terminal_weight)),
            CostSpec::Multiplicative(q) => {
                let base = quadratic(&q.reference, q.state_weight, q.input_weight, q.terminal_weight);
                let stage = base.clone();
                let costs = StageCostSet::new(
                    horizon,
                    move |x, u, t| stage.stage(t, x, u).exp(),
                    move |x| base.terminal(x).exp(),
                );
                point_mass_maps(costs, &probes)?
            }
            CostSpec::StoppedAdditive(s) => {
                let p = s.stop_probability;
                let costs = quadratic(&s.reference, s.state_weight, s.input_weight, s.terminal_weight);
                stopped_additive_maps(costs, StoppingProbSet::new(move |_, _, _| p), &probes)?
            }
            CostSpec::MinTime { target_center, half_width } => {
                min_time_maps(TargetSet::open_box(target_center.clone(), *half_width), horizon)
            }
        };
        problem = problem.with_objective(Objective::Separable(maps))?;
        let axes = (0..n)
            .map(|i| Axis::uniform(self.bounds.lo[i], self.bounds.hi[i], self.grid[i]))
            .collect::<Result<Vec<_>>>()?;
        Ok((problem, StateSpace::grid(axes, self.lookup)?))
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// A problem instance ready to solve, with whatever extras its methods need.
#[derive(Clone, Debug)]
pub struct BuiltProblem {
    pub name: &'static str,
    pub problem: Msop,
    pub space: StateSpace,
    pub starts: Vec<State>,
    pub forward: Option<ForwardMaps>,
    pub base: Option<BasePolicy>,
    pub planning: Option<PlanningInstance>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Instantiates the configured problem.
    pub fn build(&self) -> Result<BuiltProblem> {
        let name = self.problem_name();
        let mut built = match &self.problem {
            ProblemConfig::Builtin(Builtin::Sqrt { horizon }) => {
                let nr = sqrt_msop(*horizon);
                BuiltProblem {
                    name,
                    problem: nr.problem,
                    space: nr.space,
                    starts: vec![point(&nr.initial_state)],
                    forward: Some(nr.forward),
                    base: Some(sqrt_base_policy()),
                    planning: None,
                    seed: None,
                }
            }
            ProblemConfig::Builtin(Builtin::Lemma3 { h }) => BuiltProblem {
                name,
                problem: lemma3_problem(*h),
                space: lemma3_space(*h),
                starts: vec![point(&[0.0])],
                forward: None,
                base: None,
                planning: None,
                seed: None,
            },
            ProblemConfig::Builtin(Builtin::Dubins { grid_scale, horizon, inputs, box_margin, lookup, starts }) => {
                let defaults = DubinsConfig::default();
                let seed = self.seed.unwrap_or(DEFAULT_DUBINS_SEED);
                let instance = dubins_problem(&DubinsConfig {
                    seed,
                    grid_scale: grid_scale.unwrap_or(defaults.grid_scale),
                    horizon: horizon.unwrap_or(defaults.horizon),
                    inputs: inputs.unwrap_or(defaults.inputs),
                    box_margin: box_margin.unwrap_or(defaults.box_margin),
                    lookup: *lookup,
                })?;
                planning(name, instance, starts.as_deref(), seed)
            }
            ProblemConfig::Builtin(Builtin::Path3d { moving, grid_scale, horizon, max_drift, lookup, starts }) => {
                let defaults = Path3dConfig::default();
                let seed = self.seed.unwrap_or(DEFAULT_PATH3D_SEED);
                let instance = path3d_problem(&Path3dConfig {
                    seed,
                    moving: *moving,
                    grid_scale: grid_scale.unwrap_or(defaults.grid_scale),
                    horizon: horizon.unwrap_or(defaults.horizon),
                    max_drift: max_drift.unwrap_or(defaults.max_drift),
                    lookup: *lookup,
                })?;
                planning(name, instance, starts.as_deref(), seed)
            }
            ProblemConfig::Builtin(Builtin::Fthmis { grid_points, inputs, lookup, starts }) => {
                let defaults = FthmisConfig::default();
                let (problem, space) = fthmis_problem(&FthmisConfig {
                    grid_points: grid_points.unwrap_or(defaults.grid_points),
                    inputs: inputs.unwrap_or(defaults.inputs),
                    lookup: *lookup,
                })?;
                BuiltProblem {
                    name,
                    problem,
                    space,
                    starts: starts.iter().map(|s| point(s)).collect(),
                    forward: None,
                    base: None,
                    planning: None,
                    seed: None,
                }
            }
            ProblemConfig::Inline { inline } => {
                let (problem, space) = inline.build()?;
                BuiltProblem {
                    name,
                    problem,
                    space,
                    starts: inline.initial_states.iter().map(|s| point(s)).collect(),
                    forward: None,
                    base: None,
                    planning: None,
                    seed: None,
                }
            }
        };
        if built.seed.is_none() {
            built.seed = self.seed;
        }
        Ok(built)
    }
}

fn planning(name: &'static str, instance: PlanningInstance, starts: Option<&[Vec<f64>]>, seed: u64) -> BuiltProblem {
    let starts = match starts {
        Some(list) => list.iter().map(|s| point(s)).collect(),
        None => instance.starts.clone(),
    };
    BuiltProblem {
        name,
        problem: instance.problem.clone(),
        space: instance.space.clone(),
        starts,
        forward: None,
        base: None,
        planning: Some(instance),
        seed: Some(seed),
    }
}
