use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{StateSpace, Trajectory, ValueTable};

use super::config::{Method, RunConfig};

/// Tables above this many cells are written for stage 0 only.
pub const FULL_TABLE_CELLS: usize = 2_000_000;

pub const TRAJECTORY_SCHEMA: &str = "csv: t,x1..xn,u1..um,value";
pub const VALUE_TABLE_SCHEMA: &str = "csv: state_index,x1..xn,t,value,argmin_input";
pub const MASK_SCHEMA: &str = "csv: x1..xn,in_set";
pub const BENCH_SCHEMA: &str = "csv: method,T,seconds,value";
pub const OBSTACLES_SCHEMA: &str = "json: obstacle list";
pub const LEVELSET_SCHEMA: &str = "json: level-set fit";

/// Version of this build, with the git description when one was available.
pub fn version() -> String {
    match option_env!("GBE_GIT_DESCRIBE") {
        Some(describe) if !describe.is_empty() => format!("{}+{}", env!("CARGO_PKG_VERSION"), describe),
        _ => env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub schema: String,
}

/// Outcome for one start state. Non-finite numbers are written as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartResult {
    pub start: Vec<f64>,
    /// `V(x0, start_stage)` where the method computes one.
    pub value: Option<f64>,
    pub cost: Option<f64>,
    pub feasible: bool,
    /// First stage inside the target (planning problems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_stage: Option<usize>,
    /// Whether any state hits an obstacle (planning problems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collision: Option<bool>,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub problem: String,
    pub method: Option<Method>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub config: Option<RunConfig>,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub results: Vec<StartResult>,
    pub files: Vec<FileEntry>,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, problem: &str) -> Self {
        Manifest {
            version: version(),
            command: command.into(),
            problem: problem.into(),
            method: None,
            seed: None,
            threads: None,
            config: None,
            timings: BTreeMap::new(),
            results: Vec::new(),
            files: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn add_file(&mut self, path: impl Into<String>, schema: &str) {
        self.files.push(FileEntry { path: path.into(), schema: schema.into() });
    }

    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.add_file("manifest.json", "json: run manifest");
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?)
    }
}

pub fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Validation(format!("csv: {other:?}")),
    }
}

fn number(v: f64) -> String {
    format!("{v}")
}

fn coord_headers(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

/// Trajectory rows `t, x(t), u(t), value(t)`; the last row has empty inputs.
pub fn write_trajectory(path: &Path, traj: &Trajectory, values: &[f64]) -> Result<()> {
    let n = traj.states.first().map_or(0, |s| s.len());
    let m = traj.inputs.first().map_or(0, |u| u.len());
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(coord_headers("x", n))
        .chain(coord_headers("u", m))
        .chain(std::iter::once("value".to_string()))
        .collect();
    w.write_record(&header).map_err(csv_error)?;
    for (k, x) in traj.states.iter().enumerate() {
        let mut row = vec![(traj.start_stage + k).to_string()];
        row.extend(x.iter().map(|v| number(*v)));
        match traj.inputs.get(k) {
            Some(u) => row.extend(u.iter().map(|v| number(*v))),
            None => row.extend(std::iter::repeat_n(String::new(), m)),
        }
        row.push(values.get(k).map_or(String::new(), |v| number(*v)));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Value table rows for the listed stages.
pub fn write_value_table(
    path: &Path,
    space: &StateSpace,
    table: &ValueTable,
    stages: std::ops::RangeInclusive<usize>,
) -> Result<()> {
    let n = if space.is_empty() { 0 } else { space.state(0).len() };
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = std::iter::once("state_index".to_string())
        .chain(coord_headers("x", n))
        .chain(["t".to_string(), "value".to_string(), "argmin_input".to_string()])
        .collect();
    w.write_record(&header).map_err(csv_error)?;
    let states: Vec<Vec<String>> = (0..space.len()).map(|i| space.state(i).iter().map(|v| number(*v)).collect()).collect();
    for t in stages {
        for (i, coords) in states.iter().enumerate() {
            let mut row = Vec::with_capacity(n + 4);
            row.push(i.to_string());
            row.extend(coords.iter().cloned());
            row.push(t.to_string());
            row.push(number(table.value(i, t)));
            row.push(table.argmin(i, t).map_or(String::new(), |a| a.to_string()));
            w.write_record(&row).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Mask rows `x, in_set` over the listed states.
pub fn write_mask(path: &Path, space: &StateSpace, mask: &[bool]) -> Result<()> {
    let n = if space.is_empty() { 0 } else { space.state(0).len() };
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = coord_headers("x", n).chain(std::iter::once("in_set".to_string())).collect();
    w.write_record(&header).map_err(csv_error)?;
    for (i, inside) in mask.iter().enumerate() {
        let mut row: Vec<String> = space.state(i).iter().map(|v| number(*v)).collect();
        row.push(u8::from(*inside).to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// One benchmark measurement; `seconds` is `None` for skipped runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub horizon: usize,
    pub seconds: Option<f64>,
    pub value: Option<f64>,
}

pub fn write_bench(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["method", "T", "seconds", "value"]).map_err(csv_error)?;
    for row in rows {
        let (seconds, value) = match row.seconds {
            Some(s) => (number(s), row.value.map_or(String::new(), number)),
            None => ("skipped".to_string(), String::new()),
        };
        w.write_record([row.method.name().to_string(), row.horizon.to_string(), seconds, value]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
