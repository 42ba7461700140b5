//! Minimum-time entry of a Dubins car into a box past random circular
//! obstacles. The value table lives on a 3D grid (position and heading);
//! trajectories are simulated in continuous state.
//!
//! `cargo run --release --example dubins [grid_scale]`

use std::time::Instant;

use gbe::problems::{dubins_problem, DubinsConfig};
use gbe::solver::{extract_policy, solve_gbe, state_value};

fn main() -> gbe::Result<()> {
    let grid_scale: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.5);
    let instance = dubins_problem(&DubinsConfig { grid_scale, ..Default::default() })?;
    println!("{} grid states, {} obstacles", instance.space.len(), instance.obstacles.len());

    let clock = Instant::now();
    let table = solve_gbe(&instance.problem, &instance.space)?;
    println!("solved in {:.1?}", clock.elapsed());

    for x0 in &instance.starts {
        let value = state_value(&instance.problem, &instance.space, &table, x0, 0)?;
        let traj = extract_policy(&instance.problem, &instance.space, &table, x0)?;
        let entry = instance.entry_index(&traj.states);
        println!(
            "start ({:+.3}, {:+.3}, {:+.3}): V = {value:.3}, enters at {entry:?}, feasible {}, collision {}",
            x0[0],
            x0[1],
            x0[2],
            traj.feasible,
            instance.collides(0, &traj.states)
        );
    }
    Ok(())
}
