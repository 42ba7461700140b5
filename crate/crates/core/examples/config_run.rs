//! Drives the same pipeline as the `gbe` binary from a JSON document: an
//! inline problem is parsed, solved, checked against the oracles and
//! written out as CSV and JSON.
//!
//! `cargo run --example config_run [out_dir]`

use std::path::PathBuf;

use gbe::cli::{parse_config, run, verify, Command, Manifest};

const CONFIG: &str = r#"{
    "problem": {
        "inline": {
            "horizon": 4,
            "dynamics": {"kind": "integrator"},
            "bounds": {"lo": [-2.0], "hi": [2.0]},
            "grid": [9],
            "lookup": "nearest",
            "inputs": [[-0.5], [0.0], [0.5]],
            "cost": {"family": "max", "reference": [1.0], "input_weight": 0.1},
            "initial_states": [[-1.5], [0.0]]
        }
    },
    "seed": 1
}"#;

fn main() -> gbe::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("gbe-config-run"));
    let mut config = parse_config(CONFIG)?;
    config.out = Some(out.clone());

    let manifest = run(Command::Solve, &config)?;
    for r in &manifest.results {
        println!("start {:?}: value {:?}, trajectory in {}", r.start, r.value, r.file);
    }
    let report = verify(&config)?;
    for check in &report.checks {
        println!("{} {}: {}", if check.passed { "pass" } else { "FAIL" }, check.name, check.detail);
    }

    let reread = Manifest::read(&out)?;
    println!("\n{} files under {}:", reread.files.len(), out.display());
    for f in &reread.files {
        println!("  {:<18} {}", f.path, f.schema);
    }
    Ok(())
}
