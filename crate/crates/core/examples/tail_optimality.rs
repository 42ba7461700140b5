//! A three-stage walk whose cost (additive input costs plus the running
//! maximum of the state) has no backward separable form. The unique optimum
//! is found by enumeration and its tail from stage 2 is not optimal for the
//! re-initialized problem, so no backward recursion can recover it.
//!
//! `cargo run --example tail_optimality`

use gbe::oracle::{check_principle_of_optimality, enumerate_solve};
use gbe::problems::{lemma3_additive_part, lemma3_problem, lemma3_space};
use gbe::solver::{extract_policy, solve_gbe};

fn main() -> gbe::Result<()> {
    for h in [0.25, 0.5, 1.0, 2.0] {
        let problem = lemma3_problem(h);
        let found = enumerate_solve(&problem, &[0.0], 1_000)?;
        let best = found.best.clone().expect("feasible");
        let inputs: Vec<f64> = best.inputs.iter().map(|u| u[0]).collect();
        println!(
            "h = {h}: {} sequences, {} feasible, optimum {} at {:?} (unique: {})",
            found.candidates, found.feasible, found.value, inputs, found.unique
        );
        let po = check_principle_of_optimality(&problem, &best, 1_000)?;
        if let (Some(t), Some((claimed, tail_best))) = (po.witness_stage, po.witness_tail_cost) {
            println!("  tail from stage {t} costs {claimed}, but {tail_best} is attainable there");
        }

        // The additive part alone is separable and solved exactly.
        let additive = lemma3_additive_part(h);
        let space = lemma3_space(h);
        let table = solve_gbe(&additive, &space)?;
        let traj = extract_policy(&additive, &space, &table, &[0.0])?;
        println!("  additive part alone: {} via the recursion", traj.cost);
    }
    Ok(())
}
