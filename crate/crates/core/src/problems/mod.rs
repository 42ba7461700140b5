//! Ready-made problem instances.

mod fthmis;
mod lemma3;
mod obstacles;
mod planning;
mod sqrt;

pub use fthmis::{
    compute_fthmis, fit_levelset, fthmis_constraint, fthmis_problem, fthmis_step, monomial_exponents,
    FthmisConfig, LevelSetFit, FTHMIS_HORIZON,
};
pub use lemma3::{lemma3_additive_part, lemma3_problem, lemma3_space};
pub use obstacles::{Obstacle, ObstacleSet, ObstacleSpec};
pub use planning::{
    dubins_problem, path3d_problem, scaled_points, DubinsConfig, Path3dConfig, PlanningInstance,
    DEFAULT_DUBINS_SEED, DEFAULT_PATH3D_SEED, DUBINS_LENGTH, DUBINS_SPEED, DUBINS_STARTS, DUBINS_TARGET,
    PATH3D_STARTS, PATH3D_TARGET, TARGET_HALF_WIDTH,
};
pub use sqrt::{sqrt_base_policy, sqrt_msop, NestedRadical};
