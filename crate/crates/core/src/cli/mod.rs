//! JSON-configured runs: problem configs, artifact writers and the
//! subcommands behind the `gbe` binary.

mod bench;
mod config;
mod output;
mod run;
mod verify;

pub use bench::{bench, bench_to_dir, BenchConfig, BenchReport};
pub use config::{
    parse_config, resolve_budget, BoxSpec, BallSpec, Builtin, BuiltProblem, CostSpec, DynamicsSpec, InlineProblem,
    Method, ProblemConfig, QuadraticCost, RunConfig, StoppedCost, Tolerances, BUDGET_ENV,
};
pub use output::{
    version, write_bench, write_mask, write_trajectory, write_value_table, BenchRow, FileEntry, Manifest, StartResult,
};
pub use run::{out_dir, run, tail_costs, Command, DEFAULT_LEVELSET_DEGREE, DEFAULT_OUT_DIR};
pub use verify::{verify, verify_to_dir, verify_with, Check, VerifyReport, MONOTONE_SAMPLES};
