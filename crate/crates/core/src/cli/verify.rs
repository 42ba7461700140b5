use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costs::{check_monotone, MonotoneSample};
use crate::error::{Error, Result};
use crate::model::{StateSpace, ValueTable};
use crate::oracle::{check_principle_of_optimality, enumerate_solve, verify_value_function, TIE_TOLERANCE};
use crate::solver::{extract_policy, fixed_point_residual, solve_gbe_with, state_value, SolveOptions};

use super::config::{BuiltProblem, RunConfig};
use super::output::Manifest;

/// Monotonicity samples drawn per verification.
pub const MONOTONE_SAMPLES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub problem: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

/// Runs every applicable oracle check on the configured problem.
pub fn verify(config: &RunConfig) -> Result<VerifyReport> {
    verify_with(config, |_| {})
}

/// [`verify`] with `tamper` applied to the solved value table before it is
/// checked.
pub fn verify_with(config: &RunConfig, tamper: impl FnOnce(&mut ValueTable)) -> Result<VerifyReport> {
    let built = config.build()?;
    let mut report = VerifyReport { problem: built.name.to_string(), ..Default::default() };
    if built.problem.rep_maps().is_err() {
        expected_po_failure(config, &built, &mut report)?;
        return Ok(report);
    }
    let tol = config.tolerances.value;
    let budget = config.enumeration_budget()?;
    let mut table = solve_gbe_with(&built.problem, &built.space, &SolveOptions { threads: config.threads })?;
    tamper(&mut table);

    let residual = fixed_point_residual(&built.problem, &built.space, &table)?;
    report.push("fixed point", residual <= tol, format!("largest residual {residual}"));

    if built.space.is_exact() {
        let values = verify_value_function(&built.problem, &built.space, &table, budget)?;
        let detail = format!(
            "{} cells checked, {} violations, {} skipped over budget",
            values.checked,
            values.violations.len(),
            values.skipped
        );
        report.push("value table against enumeration", values.passed(), detail);
        for x0 in &built.starts {
            start_checks(&built, &table, x0, budget, tol, &mut report)?;
        }
    }

    let maps = built.problem.rep_maps()?;
    let sampler = monotone_sampler(&built, &table, config.seed.unwrap_or(0));
    let monotone = check_monotone(maps, sampler, MONOTONE_SAMPLES);
    report.push(
        "monotone maps",
        monotone.passed(),
        format!(
            "{} samples, {} strict, {} violations, {} non-finite",
            monotone.samples,
            monotone.strict_checks,
            monotone.violations.len(),
            monotone.unbounded
        ),
    );
    Ok(report)
}

fn start_checks(
    built: &BuiltProblem,
    table: &ValueTable,
    x0: &[f64],
    budget: u128,
    tol: f64,
    report: &mut VerifyReport,
) -> Result<()> {
    let problem = &built.problem;
    let value = state_value(problem, &built.space, table, x0, problem.start_stage())?;
    let traj = extract_policy(problem, &built.space, table, x0)?;
    report.push(
        format!("extracted cost from {:?}", x0),
        (traj.cost - value).abs() <= tol || (traj.cost.is_infinite() && value.is_infinite()),
        format!("cost {} against V {}", traj.cost, value),
    );
    match enumerate_solve(problem, x0, budget) {
        Ok(found) => {
            let agree = (found.value - value).abs() <= tol || (found.value.is_infinite() && value.is_infinite());
            report.push(
                format!("enumeration from {:?}", x0),
                agree,
                format!("{} candidates, {} feasible, optimum {} against V {}", found.candidates, found.feasible, found.value, value),
            );
            if let (Some(best), true) = (found.best, problem.rep_maps()?.all_strict()) {
                let po = check_principle_of_optimality(problem, &best, budget)?;
                report.push(
                    format!("principle of optimality from {:?}", x0),
                    po.holds,
                    format!("{} stages checked, witness {:?}", po.stages_checked, po.witness_stage),
                );
            }
        }
        Err(Error::BudgetExceeded { count, .. }) => {
            report.push(format!("enumeration from {:?}", x0), true, format!("skipped: {count} sequences exceed the budget"));
        }
        Err(e) => return Err(e),
    }
    Ok(())
}

/// Problems without representation maps: the optimum must be unique and
/// its tails must fail the principle of optimality at stage 2, with a gap of
/// half the step.
fn expected_po_failure(config: &RunConfig, built: &BuiltProblem, report: &mut VerifyReport) -> Result<()> {
    let budget = config.enumeration_budget()?;
    let h = match &config.problem {
        super::config::ProblemConfig::Builtin(super::config::Builtin::Lemma3 { h }) => *h,
        _ => return Err(Error::NotSeparable),
    };
    for x0 in &built.starts {
        let found = enumerate_solve(&built.problem, x0, budget)?;
        report.push(
            format!("unique optimum from {:?}", x0),
            found.unique && found.best.is_some(),
            format!("{} candidates, {} feasible, optimum {}", found.candidates, found.feasible, found.value),
        );
        let Some(best) = found.best else { continue };
        let po = check_principle_of_optimality(&built.problem, &best, budget)?;
        let gap = po.witness_tail_cost.map(|(claimed, best)| claimed - best);
        let reproduced = !po.holds
            && po.witness_stage == Some(2)
            && gap.is_some_and(|g| (g - h / 2.0).abs() <= TIE_TOLERANCE);
        report.push(
            format!("expected principle-of-optimality failure from {:?}", x0),
            reproduced,
            format!("fails: {}, witness stage {:?}, tail gap {:?}", !po.holds, po.witness_stage, gap),
        );
    }
    Ok(())
}

/// Samples stages, listed states and inputs at random, with `z >= w` drawn
/// from the range of finite values of the next stage.
fn monotone_sampler<'a>(built: &'a BuiltProblem, table: &'a ValueTable, seed: u64) -> impl FnMut() -> MonotoneSample + 'a {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let problem = &built.problem;
    let space: &StateSpace = &built.space;
    let start = problem.start_stage();
    let horizon = problem.horizon();
    let ranges: Vec<(f64, f64)> = (start..horizon)
        .map(|t| {
            let finite = table.stage(t + 1).iter().copied().filter(|v| v.is_finite());
            finite.fold(None, |acc: Option<(f64, f64)>, v| Some(acc.map_or((v, v), |(a, b)| (a.min(v), b.max(v)))))
                .unwrap_or((0.0, 1.0))
        })
        .collect();
    move || {
        let t = rng.gen_range(start..horizon);
        let x = space.state(rng.gen_range(0..space.len())).to_vec();
        let u = problem.inputs()[rng.gen_range(0..problem.inputs().len())].to_vec();
        let (lo, hi) = ranges[t - start];
        let a = lo + (hi - lo) * rng.gen::<f64>();
        let b = lo + (hi - lo) * rng.gen::<f64>();
        MonotoneSample { t, x, u, z: a.max(b), w: a.min(b) }
    }
}

/// Runs [`verify`] and writes `verify.json` and `manifest.json` under `dir`.
pub fn verify_to_dir(config: &RunConfig, dir: &Path) -> Result<VerifyReport> {
    fs::create_dir_all(dir)?;
    let report = verify(config)?;
    fs::write(dir.join("verify.json"), serde_json::to_string_pretty(&report)?)?;
    let mut manifest = Manifest::new("verify", &report.problem);
    manifest.method = Some(config.method());
    manifest.seed = config.seed;
    manifest.threads = config.threads;
    manifest.config = Some(config.clone());
    manifest.add_file("verify.json", "json: verification report");
    manifest.notes.extend(report.checks.iter().filter(|c| !c.passed).map(|c| format!("failed: {}", c.name)));
    manifest.write(dir)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_config;

    #[test]
    fn nested_radical_passes_every_check() {
        let config = parse_config(r#"{"problem": {"builtin": "sqrt", "horizon": 5}, "seed": 3}"#).unwrap();
        let report = verify(&config).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.checks.iter().any(|c| c.name.starts_with("enumeration")));
    }

    #[test]
    fn tampered_table_is_caught() {
        let config = parse_config(r#"{"problem": {"builtin": "sqrt", "horizon": 5}}"#).unwrap();
        let report = verify_with(&config, |table| {
            let v = table.value(0, 2);
            table.set_value(0, 2, v + 1e-3);
        })
        .unwrap();
        assert!(!report.passed());
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"fixed point"), "{failed:?}");
    }

    #[test]
    fn step_problem_reproduces_the_tail_failure() {
        for h in [0.25, 2.0] {
            let doc = format!(r#"{{"problem": {{"builtin": "lemma3", "h": {h}}}}}"#);
            let report = verify(&parse_config(&doc).unwrap()).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }
}
