use std::fmt;
use std::sync::Arc;

use super::{check_shape, Trajectory};
use crate::error::Result;

pub use crate::costs::StageCostSet;

type TerminalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type StageFn = dyn Fn(&[f64], &[f64], f64, usize) -> f64 + Send + Sync;

/// Which constructor produced a [`RepMaps`].
#[derive(Clone, Debug)]
pub enum CostFamily {
    /// `phi_t = c_t + z`; keeps the stage costs for the classical recursion.
    Additive(StageCostSet),
    Max,
    Multiplicative,
    StoppedAdditive,
    MinTime,
    Custom,
}

impl CostFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CostFamily::Additive(_) => "additive",
            CostFamily::Max => "max",
            CostFamily::Multiplicative => "multiplicative",
            CostFamily::StoppedAdditive => "stopped_additive",
            CostFamily::MinTime => "min_time",
            CostFamily::Custom => "custom",
        }
    }
}

/// Representation maps `{phi_t}` of a monotonically backward separable cost:
/// `J = phi_0(x0, u0, phi_1(x1, u1, ... phi_T(xT)))`.
///
/// Every stage map is extended by `phi_t(x, u, +inf) = +inf`, so an
/// infeasible continuation stays infeasible.
#[derive(Clone)]
pub struct RepMaps {
    horizon: usize,
    terminal: Arc<TerminalFn>,
    stage: Arc<StageFn>,
    strict: Vec<bool>,
    bounded: bool,
    family: CostFamily,
}

impl RepMaps {
    /// Maps from raw closures. `stage(x, u, z, t)` is `phi_t(x, u, z)`;
    /// `strict[t]` declares strict monotonicity of stage `t` in `z`.
    pub fn custom(
        horizon: usize,
        terminal: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        stage: impl Fn(&[f64], &[f64], f64, usize) -> f64 + Send + Sync + 'static,
        strict: Vec<bool>,
        bounded: bool,
    ) -> Self {
        Self::with_family(horizon, Arc::new(terminal), Arc::new(stage), strict, bounded, CostFamily::Custom)
    }

    pub(crate) fn with_family(
        horizon: usize,
        terminal: Arc<TerminalFn>,
        stage: Arc<StageFn>,
        strict: Vec<bool>,
        bounded: bool,
        family: CostFamily,
    ) -> Self {
        assert_eq!(strict.len(), horizon, "one strictness flag per stage");
        RepMaps { horizon, terminal, stage, strict, bounded, family }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn family(&self) -> &CostFamily {
        &self.family
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn is_strict(&self, t: usize) -> bool {
        self.strict[t]
    }

    pub fn all_strict(&self) -> bool {
        self.strict.iter().all(|s| *s)
    }

    /// Stage costs when the maps are additive.
    pub fn additive_costs(&self) -> Option<&StageCostSet> {
        match &self.family {
            CostFamily::Additive(c) => Some(c),
            _ => None,
        }
    }

    /// `phi_T(x)`.
    #[inline]
    pub fn terminal(&self, x: &[f64]) -> f64 {
        (self.terminal)(x)
    }

    /// `phi_t(x, u, z)`.
    #[inline]
    pub fn stage(&self, t: usize, x: &[f64], u: &[f64], z: f64) -> f64 {
        if z == f64::INFINITY {
            return f64::INFINITY;
        }
        (self.stage)(x, u, z, t)
    }

    /// Backward composition along `traj`, starting from its `start_stage`.
    pub fn evaluate(&self, traj: &Trajectory) -> Result<f64> {
        check_shape(self.horizon, traj)?;
        let mut z = self.terminal(traj.states.last().expect("states non-empty"));
        for k in (0..traj.inputs.len()).rev() {
            z = self.stage(traj.start_stage + k, &traj.states[k], &traj.inputs[k], z);
        }
        Ok(z)
    }
}

impl fmt::Debug for RepMaps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RepMaps")
            .field("horizon", &self.horizon)
            .field("family", &self.family.name())
            .field("all_strict", &self.all_strict())
            .field("bounded", &self.bounded)
            .finish()
    }
}
