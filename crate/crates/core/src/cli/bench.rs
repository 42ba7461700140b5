use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{sqrt_base_policy, sqrt_msop};
use crate::solver::{
    augment_forward_separable, extract_policy, rollout_policy, solve_bellman_additive, solve_gbe_with, SolveOptions,
    DEFAULT_AUGMENT_BUDGET,
};

use super::config::{resolve_budget, Method};
use super::output::{write_bench, BenchRow, Manifest, BENCH_SCHEMA};

/// Horizons per method for the nested-radical timing sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub gbe: Vec<usize>,
    pub augment: Vec<usize>,
    pub rollout: Vec<usize>,
    /// Each timing is the median of this many runs.
    pub repeats: usize,
    /// Augmentation budget in value-table cells; `GBE_BUDGET` takes precedence.
    pub budget: Option<u64>,
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            gbe: vec![100, 1_000, 10_000, 100_000],
            augment: (10..=16).collect(),
            rollout: vec![100, 1_000, 10_000, 100_000],
            repeats: 3,
            budget: None,
            threads: None,
        }
    }
}

impl BenchConfig {
    pub fn parse(document: &str) -> Result<Self> {
        let config: BenchConfig = serde_json::from_str(document)?;
        if config.repeats == 0 {
            return Err(Error::Config { key: "repeats".into(), expected: "a positive integer".into() });
        }
        let horizons = config.gbe.iter().chain(&config.augment).chain(&config.rollout);
        if horizons.into_iter().any(|t| *t == 0) {
            return Err(Error::Config { key: "gbe/augment/rollout".into(), expected: "positive horizons".into() });
        }
        Ok(config)
    }

    /// Keeps only the horizons of `method`.
    pub fn only(mut self, method: Method) -> Result<Self> {
        match method {
            Method::Gbe => {
                self.augment.clear();
                self.rollout.clear();
            }
            Method::Augment => {
                self.gbe.clear();
                self.rollout.clear();
            }
            Method::Rollout => {
                self.gbe.clear();
                self.augment.clear();
            }
            _ => {
                return Err(Error::Config { key: "method".into(), expected: "one of gbe, augment, rollout for bench".into() })
            }
        }
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `log(seconds)` against `log(T)` for gbe.
    pub gbe_slope: Option<f64>,
    /// `exp` of the least-squares slope of `ln(seconds)` against `T` for augment.
    pub augment_ratio: Option<f64>,
    /// Largest value gap between methods at a shared horizon.
    pub max_disagreement: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Median wall time and last value of `repeats` runs of `f`.
fn timed(repeats: usize, mut f: impl FnMut() -> Result<f64>) -> Result<(f64, f64)> {
    let mut times = Vec::with_capacity(repeats);
    let mut value = f64::NAN;
    for _ in 0..repeats {
        let clock = Instant::now();
        value = f()?;
        times.push(clock.elapsed().as_secs_f64());
    }
    Ok((median(times), value))
}

/// Times gbe (solve and extract), augmentation (build, solve and extract)
/// and rollout on the nested-radical problem.
pub fn bench(config: &BenchConfig) -> Result<BenchReport> {
    let options = SolveOptions { threads: config.threads };
    let budget = resolve_budget(config.budget, DEFAULT_AUGMENT_BUDGET)?;
    let mut rows = Vec::new();
    for &t in &config.gbe {
        let nr = sqrt_msop(t);
        let (seconds, value) = timed(config.repeats, || {
            let table = solve_gbe_with(&nr.problem, &nr.space, &options)?;
            Ok(extract_policy(&nr.problem, &nr.space, &table, &nr.initial_state)?.cost)
        })?;
        rows.push(BenchRow { method: Method::Gbe, horizon: t, seconds: Some(seconds), value: Some(value) });
    }
    for &t in &config.augment {
        let nr = sqrt_msop(t);
        let outcome = timed(config.repeats, || {
            let aug = augment_forward_separable(&nr.problem, &nr.forward, &nr.initial_state, budget)?;
            let table = solve_bellman_additive(&aug.problem, &aug.space)?;
            Ok(extract_policy(&aug.problem, &aug.space, &table, &aug.initial_state)?.cost)
        });
        let row = match outcome {
            Ok((seconds, value)) => BenchRow { method: Method::Augment, horizon: t, seconds: Some(seconds), value: Some(value) },
            Err(Error::BudgetExceeded { .. }) => BenchRow { method: Method::Augment, horizon: t, seconds: None, value: None },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    for &t in &config.rollout {
        let nr = sqrt_msop(t);
        let base = sqrt_base_policy();
        let (seconds, value) = timed(config.repeats, || Ok(rollout_policy(&nr.problem, &base, &nr.initial_state)?.cost))?;
        rows.push(BenchRow { method: Method::Rollout, horizon: t, seconds: Some(seconds), value: Some(value) });
    }

    let series = |method: Method| -> Vec<(usize, f64)> {
        rows.iter()
            .filter(|r| r.method == method)
            .filter_map(|r| r.seconds.map(|s| (r.horizon, s)))
            .collect()
    };
    let gbe_slope = least_squares_slope(
        &series(Method::Gbe).iter().map(|(t, s)| ((*t as f64).ln(), s.ln())).collect::<Vec<_>>(),
    );
    let augment_ratio =
        least_squares_slope(&series(Method::Augment).iter().map(|(t, s)| (*t as f64, s.ln())).collect::<Vec<_>>())
            .map(f64::exp);
    let mut max_disagreement: f64 = 0.0;
    for a in &rows {
        for b in &rows {
            if let (Some(va), Some(vb)) = (a.value, b.value) {
                if a.horizon == b.horizon {
                    max_disagreement = max_disagreement.max((va - vb).abs());
                }
            }
        }
    }
    Ok(BenchReport { rows, gbe_slope, augment_ratio, max_disagreement })
}

/// Runs [`bench`] and writes `bench.csv` and `manifest.json` under `dir`.
pub fn bench_to_dir(config: &BenchConfig, dir: &Path) -> Result<BenchReport> {
    fs::create_dir_all(dir)?;
    let clock = Instant::now();
    let report = bench(config)?;
    write_bench(&dir.join("bench.csv"), &report.rows)?;
    let mut manifest = Manifest::new("bench", "sqrt");
    manifest.threads = config.threads;
    manifest.timings.insert("bench".into(), clock.elapsed().as_secs_f64());
    manifest.add_file("bench.csv", BENCH_SCHEMA);
    if let Some(slope) = report.gbe_slope {
        manifest.notes.push(format!("gbe log-log slope {slope}"));
    }
    if let Some(ratio) = report.augment_ratio {
        manifest.notes.push(format!("augment time ratio per unit T {ratio}"));
    }
    manifest.notes.push(format!("largest value gap between methods {}", report.max_disagreement));
    manifest.write(dir)?;
    Ok(report)
}
