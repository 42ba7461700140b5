use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::{Msop, Trajectory, ValueTable};
use crate::oracle::enumerate_solve;
use crate::problems::{compute_fthmis, fit_levelset, fthmis_constraint, FTHMIS_HORIZON};
use crate::solver::{
    augment_forward_separable, extract_policy, rollout_policy, solve_bellman_additive, solve_gbe_with, state_value,
    SolveOptions,
};

use super::config::{BuiltProblem, Method, RunConfig};
use super::output::{
    finite, write_mask, write_trajectory, write_value_table, Manifest, StartResult, FULL_TABLE_CELLS, LEVELSET_SCHEMA,
    MASK_SCHEMA, OBSTACLES_SCHEMA, TRAJECTORY_SCHEMA, VALUE_TABLE_SCHEMA,
};

pub const DEFAULT_OUT_DIR: &str = "gbe-out";
pub const DEFAULT_LEVELSET_DEGREE: usize = 4;

/// What a run subcommand accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Any problem.
    Solve,
    /// `dubins` or `path3d`.
    Plan,
    /// `fthmis` with a value table.
    Invariant,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Plan => "plan",
            Command::Invariant => "invariant",
        }
    }

    fn check(self, config: &RunConfig) -> Result<()> {
        let name = config.problem_name();
        let ok = match self {
            Command::Solve => true,
            Command::Plan => matches!(name, "dubins" | "path3d"),
            Command::Invariant => name == "fthmis" && config.method() == Method::Gbe,
        };
        if ok {
            return Ok(());
        }
        let expected = match self {
            Command::Plan => "a `dubins` or `path3d` builtin for `plan`",
            _ => "the `fthmis` builtin solved with gbe for `invariant`",
        };
        Err(Error::Config { key: "problem".into(), expected: expected.into() })
    }
}

pub fn out_dir(config: &RunConfig) -> PathBuf {
    config.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Tail costs `J_t` of `traj` from each of its states.
pub fn tail_costs(problem: &Msop, traj: &Trajectory) -> Result<Vec<f64>> {
    if let Ok(maps) = problem.rep_maps() {
        let mut z = maps.terminal(traj.states.last().expect("non-empty"));
        let mut out = vec![z; traj.states.len()];
        for k in (0..traj.inputs.len()).rev() {
            let t = traj.start_stage + k;
            if !problem.in_stage_set(&traj.states[k + 1], t + 1) {
                z = f64::INFINITY;
            }
            z = maps.stage(t, &traj.states[k], &traj.inputs[k], z);
            out[k] = z;
        }
        return Ok(out);
    }
    (0..traj.states.len())
        .map(|k| {
            let t = traj.start_stage + k;
            let tail = Trajectory::from_parts(t, traj.states[k..].to_vec(), traj.inputs[k..].to_vec());
            problem.reinitialized(&traj.states[k], t).evaluate_cost(&tail)
        })
        .collect()
}

struct Solved {
    value: Option<f64>,
    traj: Trajectory,
    values: Vec<f64>,
}

/// Solves the configured problem, writes its artifacts under the output
/// directory and returns the manifest that was written.
pub fn run(command: Command, config: &RunConfig) -> Result<Manifest> {
    command.check(config)?;
    let method = config.method();
    let built = config.build()?;
    let dir = out_dir(config);
    fs::create_dir_all(&dir)?;
    let mut manifest = Manifest::new(command.name(), built.name);
    manifest.method = Some(method);
    manifest.seed = built.seed;
    manifest.threads = config.threads;
    manifest.config = Some(config.clone());

    if let Some(instance) = &built.planning {
        fs::write(dir.join("obstacles.json"), instance.obstacles.to_json()?)?;
        manifest.add_file("obstacles.json", OBSTACLES_SCHEMA);
    }

    let table = match method {
        Method::Gbe | Method::Bellman => {
            let clock = Instant::now();
            let table = if method == Method::Gbe {
                solve_gbe_with(&built.problem, &built.space, &SolveOptions { threads: config.threads })?
            } else {
                solve_bellman_additive(&built.problem, &built.space)?
            };
            manifest.timings.insert("solve".into(), clock.elapsed().as_secs_f64());
            write_table(&mut manifest, &dir, &built, &table)?;
            Some(table)
        }
        _ => None,
    };

    let clock = Instant::now();
    for (k, x0) in built.starts.iter().enumerate() {
        let solved = solve_start(config, method, &built, table.as_ref(), x0)?;
        let file = format!("trajectory_{k}.csv");
        write_trajectory(&dir.join(&file), &solved.traj, &solved.values)?;
        manifest.add_file(file.clone(), TRAJECTORY_SCHEMA);
        let (entry_stage, collision) = match &built.planning {
            Some(instance) => (
                instance.entry_index(&solved.traj.states).map(|i| solved.traj.start_stage + i),
                Some(instance.collides(solved.traj.start_stage, &solved.traj.states)),
            ),
            None => (None, None),
        };
        manifest.results.push(StartResult {
            start: x0.to_vec(),
            value: solved.value.and_then(finite),
            cost: finite(solved.traj.cost),
            feasible: solved.traj.feasible,
            entry_stage,
            collision,
            file,
        });
    }
    manifest.timings.insert("trajectories".into(), clock.elapsed().as_secs_f64());

    if built.name == "fthmis" {
        if let Some(table) = &table {
            invariant_artifacts(&mut manifest, &dir, config, &built, table)?;
        }
    }
    manifest.write(&dir)?;
    Ok(manifest)
}

fn write_table(manifest: &mut Manifest, dir: &std::path::Path, built: &BuiltProblem, table: &ValueTable) -> Result<()> {
    let start = built.problem.start_stage();
    let horizon = built.problem.horizon();
    let cells = built.space.len() * (horizon - start + 1);
    let stages = if cells <= FULL_TABLE_CELLS {
        start..=horizon
    } else {
        manifest.notes.push(format!("value table has {cells} cells; only stage {start} is written"));
        start..=start
    };
    write_value_table(&dir.join("value_table.csv"), &built.space, table, stages)?;
    manifest.add_file("value_table.csv", VALUE_TABLE_SCHEMA);
    Ok(())
}

fn solve_start(
    config: &RunConfig,
    method: Method,
    built: &BuiltProblem,
    table: Option<&ValueTable>,
    x0: &[f64],
) -> Result<Solved> {
    let problem = &built.problem;
    let start = problem.start_stage();
    match method {
        Method::Gbe | Method::Bellman => {
            let table = table.expect("solved above");
            let value = state_value(problem, &built.space, table, x0, start)?;
            let traj = extract_policy(problem, &built.space, table, x0)?;
            let values = traj
                .states
                .iter()
                .enumerate()
                .map(|(k, x)| state_value(problem, &built.space, table, x, start + k))
                .collect::<Result<_>>()?;
            Ok(Solved { value: Some(value), traj, values })
        }
        Method::Augment => {
            let forward = built.forward.as_ref().expect("validated");
            let aug = augment_forward_separable(problem, forward, x0, config.augment_budget()?)?;
            let table = solve_bellman_additive(&aug.problem, &aug.space)?;
            let i0 = aug.space.index_of(&aug.initial_state).expect("initial state is listed");
            let traj = aug.project(&extract_policy(&aug.problem, &aug.space, &table, &aug.initial_state)?);
            let traj = problem.simulate(x0, &traj.inputs)?;
            let values = tail_costs(problem, &traj)?;
            Ok(Solved { value: Some(table.value(i0, start)), traj, values })
        }
        Method::Rollout => {
            let base = built.base.as_ref().expect("validated");
            let traj = rollout_policy(problem, base, x0)?;
            let values = tail_costs(problem, &traj)?;
            Ok(Solved { value: None, traj, values })
        }
        Method::Enumerate => {
            let found = enumerate_solve(problem, x0, config.enumeration_budget()?)?;
            let traj = found.best.ok_or(Error::NoFeasibleTrajectory)?;
            let values = tail_costs(problem, &traj)?;
            Ok(Solved { value: Some(found.value), traj, values })
        }
    }
}

fn invariant_artifacts(
    manifest: &mut Manifest,
    dir: &std::path::Path,
    config: &RunConfig,
    built: &BuiltProblem,
    table: &ValueTable,
) -> Result<()> {
    let mask = compute_fthmis(table);
    write_mask(&dir.join("mask.csv"), &built.space, &mask)?;
    manifest.add_file("mask.csv", MASK_SCHEMA);

    let points: Vec<_> = (0..built.space.len()).map(|i| built.space.state(i)).collect();
    let mut sound = 0;
    let inside = mask.iter().filter(|m| **m).count();
    for (x, _) in points.iter().zip(&mask).filter(|(_, m)| **m) {
        let traj = extract_policy(&built.problem, &built.space, table, x)?;
        let kept = traj.feasible
            && traj.states.iter().enumerate().all(|(t, y)| fthmis_constraint(y, t) < 0.0)
            && traj.states.len() == FTHMIS_HORIZON + 1;
        sound += usize::from(kept);
    }
    manifest.notes.push(format!("{inside} of {} grid states in the mask; {sound} keep every g_t < 0", mask.len()));

    let degree = config.degree.unwrap_or(DEFAULT_LEVELSET_DEGREE);
    match fit_levelset(&points, table.stage(0), &mask, degree) {
        Ok(fit) => {
            fs::write(dir.join("levelset.json"), serde_json::to_string_pretty(&fit)?)?;
            manifest.add_file("levelset.json", LEVELSET_SCHEMA);
            manifest.notes.push(format!(
                "degree {degree} level-set fit: residual {}, sign agreement {}",
                fit.residual, fit.sign_agreement
            ));
        }
        Err(e) => manifest.notes.push(format!("no level-set fit: {e}")),
    }
    Ok(())
}
