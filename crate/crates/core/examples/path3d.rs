//! A point in `[-1, 1]^3` steered into a cube past spheres, first static
//! and then drifting linearly with time.
//!
//! `cargo run --release --example path3d [grid_scale]`

use std::time::Instant;

use gbe::problems::{path3d_problem, Path3dConfig};
use gbe::solver::{extract_policy, solve_gbe};

fn main() -> gbe::Result<()> {
    let grid_scale: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.5);
    for moving in [false, true] {
        let instance = path3d_problem(&Path3dConfig { grid_scale, moving, ..Default::default() })?;
        let clock = Instant::now();
        let table = solve_gbe(&instance.problem, &instance.space)?;
        println!(
            "{} obstacles on {} grid states, solved in {:.1?}",
            if moving { "moving" } else { "static" },
            instance.space.len(),
            clock.elapsed()
        );
        for x0 in &instance.starts {
            let traj = extract_policy(&instance.problem, &instance.space, &table, x0)?;
            println!(
                "  start {:?}: enters at {:?}, feasible {}, collision {}",
                x0.as_slice(),
                instance.entry_index(&traj.states),
                traj.feasible,
                instance.collides(0, &traj.states)
            );
        }
    }
    Ok(())
}
