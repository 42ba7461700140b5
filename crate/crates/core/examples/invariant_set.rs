//! States of a switching system that can be kept inside time-varying sets
//! for four stages, found as `{V(., 0) < 0}` under the max cost, then
//! approximated by a polynomial level set.
//!
//! `cargo run --release --example invariant_set [grid_points] [degree]`
//!
//! The grid defaults to 21x21 here; at the library default of 5x5 no node
//! is in the set.

use gbe::problems::{compute_fthmis, fit_levelset, fthmis_problem, FthmisConfig};
use gbe::solver::solve_gbe;

fn main() -> gbe::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().ok());
    let grid_points = args.next().flatten().unwrap_or(21);
    let degree = args.next().flatten().unwrap_or(4);
    let (problem, space) = fthmis_problem(&FthmisConfig { grid_points, ..Default::default() })?;
    let table = solve_gbe(&problem, &space)?;
    let mask = compute_fthmis(&table);

    // Rows from x2 = 1 down to x2 = -1; grid indices are row-major in (x1, x2).
    println!("{} of {} grid states in the set:", mask.iter().filter(|m| **m).count(), mask.len());
    for row in (0..grid_points).rev() {
        let line: String = (0..grid_points)
            .map(|col| if mask[col * grid_points + row] { '#' } else { '.' })
            .collect();
        println!("  {line}");
    }

    let points: Vec<_> = (0..space.len()).map(|i| space.state(i)).collect();
    let fit = fit_levelset(&points, table.stage(0), &mask, degree)?;
    println!(
        "degree {degree} fit: residual {:.4}, sign agreement {:.3}",
        fit.residual, fit.sign_agreement
    );
    Ok(())
}
