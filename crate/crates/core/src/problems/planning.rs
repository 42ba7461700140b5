use std::f64::consts::PI;

use crate::costs::{min_time_maps, TargetSet};
use crate::error::{Error, Result};
use crate::model::{point, Axis, Dynamics, Input, LookupPolicy, Msop, Objective, StageSet, State, StateSpace};
use crate::problems::obstacles::{ObstacleSet, ObstacleSpec};

pub const DUBINS_SPEED: f64 = 0.1;
pub const DUBINS_LENGTH: f64 = 1.0 / 6.0;
pub const DUBINS_TARGET: [f64; 2] = [0.75, -0.75];
pub const PATH3D_TARGET: [f64; 3] = [0.75, -0.75, -0.75];
pub const TARGET_HALF_WIDTH: f64 = 0.25;

/// Start states `[x1, x2, heading]` of the car.
pub const DUBINS_STARTS: [[f64; 3]; 3] = [[-0.8, 1.0, -0.55 * PI], [0.275, 0.25, 0.75 * PI], [-0.2, 0.95, 0.5 * PI]];
/// Start points of the 3D planner.
pub const PATH3D_STARTS: [[f64; 3]; 4] =
    [[-0.75, 0.75, 0.75], [-0.75, -0.75, 0.75], [0.75, 0.75, 0.75], [-0.75, 0.75, -0.75]];

pub const DEFAULT_DUBINS_SEED: u64 = 7;
pub const DEFAULT_PATH3D_SEED: u64 = 7;

/// A set-entry problem on a grid with its obstacles and start states.
#[derive(Clone, Debug)]
pub struct PlanningInstance {
    pub problem: Msop,
    pub space: StateSpace,
    pub obstacles: ObstacleSet,
    pub target: TargetSet,
    pub starts: Vec<State>,
    pub seed: u64,
}

impl PlanningInstance {
    /// Whether any position of `states` lies inside an obstacle at its stage.
    pub fn collides(&self, start_stage: usize, states: &[State]) -> bool {
        states.iter().enumerate().any(|(k, x)| self.obstacles.blocks(x, start_stage + k))
    }

    /// First index of `states` inside the target.
    pub fn entry_index(&self, states: &[State]) -> Option<usize> {
        states.iter().position(|x| self.target.contains(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DubinsConfig {
    pub seed: u64,
    /// Scales the 60-point axes.
    pub grid_scale: f64,
    pub horizon: usize,
    pub inputs: usize,
    /// The position box `[-1, 1]^2` is widened by this much for the
    /// constraint test; the grid stays on `[-1, 1]^2`.
    pub box_margin: f64,
    pub lookup: LookupPolicy,
}

impl Default for DubinsConfig {
    fn default() -> Self {
        DubinsConfig {
            seed: DEFAULT_DUBINS_SEED,
            grid_scale: 1.0,
            horizon: 40,
            inputs: 100,
            box_margin: 0.3,
            lookup: LookupPolicy::Interpolate,
        }
    }
}

/// Points per axis for a base resolution scaled by `grid_scale`.
pub fn scaled_points(base: usize, grid_scale: f64) -> Result<usize> {
    if !(grid_scale > 0.0 && grid_scale <= 1.0) {
        return Err(Error::Grid(format!("grid scale must lie in (0, 1], got {grid_scale}")));
    }
    Ok(((base as f64 * grid_scale).round() as usize).max(2))
}

fn uniform_inputs(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Whether the ball keeps `gap` away from the target box around `target`.
fn clear_of_target(center: &[f64], radius: f64, target: &[f64], gap: f64) -> bool {
    let dist2: f64 = center
        .iter()
        .zip(target)
        .map(|(c, t)| ((c - t).abs() - TARGET_HALF_WIDTH).max(0.0).powi(2))
        .sum();
    dist2.sqrt() >= radius + gap
}

/// Car `[x1 + v cos x3, x2 + v sin x3, x3 + (v/L) tan u]` steering into the
/// square around `(0.75, -0.75)` past 15 seeded circles, on a grid over
/// `[-1, 1]^2 x [0, 2 pi)` with periodic heading.
pub fn dubins_problem(config: &DubinsConfig) -> Result<PlanningInstance> {
    let inputs = uniform_inputs(config.inputs, -1.0, 1.0);
    assert!(inputs.iter().all(|u| u.abs() < PI / 2.0), "steering must stay clear of the tan singularity");
    let horizon = config.horizon;
    let obstacles = ObstacleSet::generate(
        &ObstacleSpec {
            count: 15,
            center_lo: vec![-1.0, -1.0],
            center_hi: vec![1.0, 1.0],
            radius: (0.08, 0.2),
            max_drift: 0.0,
            horizon,
            keep_clear: DUBINS_STARTS.iter().map(|s| s.to_vec()).collect(),
            clearance: 0.05,
            reject: |c, r| !clear_of_target(c, r, &DUBINS_TARGET, 0.05),
        },
        config.seed,
    );
    let target = TargetSet::open_box(DUBINS_TARGET.to_vec(), TARGET_HALF_WIDTH);
    let bound = 1.0 + config.box_margin;
    let stage_sets = (0..=horizon)
        .map(|t| {
            let obstacles = obstacles.clone();
            StageSet::new(move |x| x[0].abs() <= bound && x[1].abs() <= bound && !obstacles.blocks(x, t))
        })
        .collect();
    let turn = DUBINS_SPEED / DUBINS_LENGTH;
    let problem = Msop::new(
        horizon,
        Dynamics::new(move |x, u, _| {
            point(&[x[0] + DUBINS_SPEED * x[2].cos(), x[1] + DUBINS_SPEED * x[2].sin(), x[2] + turn * u[0].tan()])
        }),
        stage_sets,
        inputs.iter().map(|u| point(&[*u])).collect(),
        Objective::Separable(min_time_maps(target.clone(), horizon)),
    )?
    .with_input_bounds(vec![-1.0], vec![1.0])?;
    let n = scaled_points(60, config.grid_scale)?;
    let space = StateSpace::grid(
        vec![Axis::uniform(-1.0, 1.0, n)?, Axis::uniform(-1.0, 1.0, n)?, Axis::angular(n)?],
        config.lookup,
    )?;
    Ok(PlanningInstance {
        problem,
        space,
        obstacles,
        target,
        starts: DUBINS_STARTS.iter().map(|s| point(s)).collect(),
        seed: config.seed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path3dConfig {
    pub seed: u64,
    pub moving: bool,
    /// Scales the 40-point axes.
    pub grid_scale: f64,
    pub horizon: usize,
    /// Largest per-stage drift of a moving obstacle along each axis.
    pub max_drift: f64,
    pub lookup: LookupPolicy,
}

impl Default for Path3dConfig {
    fn default() -> Self {
        Path3dConfig {
            seed: DEFAULT_PATH3D_SEED,
            moving: false,
            grid_scale: 1.0,
            horizon: 50,
            max_drift: 0.004,
            lookup: LookupPolicy::Interpolate,
        }
    }
}

/// Point `x + u` with `u` on a 5x5x5 grid over `[-0.05, 0.05]^3`, entering
/// the cube around `(0.75, -0.75, -0.75)` past 35 seeded spheres inside
/// `[-1, 1]^3`. Spheres drift linearly when `moving`.
pub fn path3d_problem(config: &Path3dConfig) -> Result<PlanningInstance> {
    let horizon = config.horizon;
    let obstacles = ObstacleSet::generate(
        &ObstacleSpec {
            count: 35,
            center_lo: vec![-1.0; 3],
            center_hi: vec![1.0; 3],
            radius: (0.08, 0.2),
            max_drift: config.max_drift,
            horizon,
            keep_clear: PATH3D_STARTS.iter().map(|s| s.to_vec()).collect(),
            clearance: 0.1,
            reject: |c, r| !clear_of_target(c, r, &PATH3D_TARGET, 0.05),
        },
        config.seed,
    );
    let obstacles = if config.moving {
        obstacles
    } else {
        let mut fixed = obstacles;
        for o in &mut fixed.obstacles {
            o.drift.iter_mut().for_each(|d| *d = 0.0);
        }
        fixed
    };
    let target = TargetSet::open_box(PATH3D_TARGET.to_vec(), TARGET_HALF_WIDTH);
    let stage_sets = (0..=horizon)
        .map(|t| {
            let obstacles = obstacles.clone();
            StageSet::new(move |x| x.iter().all(|v| v.abs() <= 1.0) && !obstacles.blocks(x, t))
        })
        .collect();
    let steps = uniform_inputs(5, -0.05, 0.05);
    let mut inputs: Vec<Input> = Vec::with_capacity(125);
    for a in &steps {
        for b in &steps {
            for c in &steps {
                inputs.push(point(&[*a, *b, *c]));
            }
        }
    }
    let problem = Msop::new(
        horizon,
        Dynamics::new(|x, u, _| point(&[x[0] + u[0], x[1] + u[1], x[2] + u[2]])),
        stage_sets,
        inputs,
        Objective::Separable(min_time_maps(target.clone(), horizon)),
    )?
    .with_input_bounds(vec![-0.05; 3], vec![0.05; 3])?;
    let n = scaled_points(40, config.grid_scale)?;
    let axis = Axis::uniform(-1.0, 1.0, n)?;
    let space = StateSpace::grid(vec![axis.clone(), axis.clone(), axis], config.lookup)?;
    Ok(PlanningInstance {
        problem,
        space,
        obstacles,
        target,
        starts: PATH3D_STARTS.iter().map(|s| point(s)).collect(),
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_ahead_translates_x1() {
        let inst = dubins_problem(&DubinsConfig { grid_scale: 0.1, ..Default::default() }).unwrap();
        let next = inst.problem.step(&[0.2, -0.3, 0.0], &[0.0], 0);
        assert!((next[0] - 0.3).abs() < 1e-15);
        assert_eq!(next[1], -0.3);
        assert_eq!(next[2], 0.0);
    }

    #[test]
    fn grid_scale_sets_resolution() {
        let inst = dubins_problem(&DubinsConfig { grid_scale: 0.5, ..Default::default() }).unwrap();
        assert_eq!(inst.space.len(), 30 * 30 * 30);
        assert!(dubins_problem(&DubinsConfig { grid_scale: 0.0, ..Default::default() }).is_err());
        assert_eq!(inst.obstacles.len(), 15);
        for s in &inst.starts {
            assert!(inst.problem.in_stage_set(s, 0));
        }
    }

    #[test]
    fn zero_input_holds_the_point() {
        let inst = path3d_problem(&Path3dConfig { grid_scale: 0.25, ..Default::default() }).unwrap();
        assert_eq!(inst.problem.step(&[0.1, 0.2, 0.3], &[0.0, 0.0, 0.0], 4).as_slice(), &[0.1, 0.2, 0.3]);
        let longest = inst
            .problem
            .inputs()
            .iter()
            .map(|u| u.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        assert!((longest - 0.05 * 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(inst.problem.inputs().len(), 125);
        assert_eq!(inst.obstacles.len(), 35);
    }

    #[test]
    fn static_and_moving_share_spheres() {
        let fixed = path3d_problem(&Path3dConfig { grid_scale: 0.25, ..Default::default() }).unwrap();
        let moving = path3d_problem(&Path3dConfig { grid_scale: 0.25, moving: true, ..Default::default() }).unwrap();
        for (a, b) in fixed.obstacles.obstacles.iter().zip(&moving.obstacles.obstacles) {
            assert_eq!((&a.center, a.radius), (&b.center, b.radius));
            assert!(a.drift.iter().all(|d| *d == 0.0));
        }
        assert!(moving.obstacles.obstacles.iter().any(|o| o.drift.iter().any(|d| *d != 0.0)));
    }
}
