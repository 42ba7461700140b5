//! A walk on the integers `0..=6` scored by each cost family in turn. Every
//! family is solved by the backward recursion and compared against brute
//! force enumeration, and its maps are sampled for monotonicity. The last
//! part shows a stopping-probability set that loses mass being rejected.
//!
//! `cargo run --example custom_costs`

use gbe::costs::{
    additive_maps, check_monotone, check_total_probability, max_maps, min_time_maps, point_mass_maps,
    stopped_additive_maps, MonotoneSample, StageCostSet, StoppingProbSet, TargetSet,
};
use gbe::model::StateSpace;
use gbe::oracle::enumerate_solve;
use gbe::solver::{solve_gbe, state_value};
use gbe::{point, Dynamics, Msop, Objective, RepMaps, StageSet, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HORIZON: usize = 5;
const TOP: f64 = 6.0;

fn walk(maps: RepMaps) -> gbe::Result<Msop> {
    Msop::new(
        HORIZON,
        Dynamics::new(|x, u, _| point(&[x[0] + u[0]])),
        vec![StageSet::closed_box(vec![0.0], vec![TOP]); HORIZON + 1],
        vec![point(&[-1.0]), point(&[0.0]), point(&[1.0])],
        Objective::Separable(maps),
    )
}

/// Distance to 4 plus a charge for moving.
fn costs() -> StageCostSet {
    StageCostSet::new(HORIZON, |x, u, _| (x[0] - 4.0).abs() + 0.5 * u[0].abs(), |x| (x[0] - 4.0).abs()).bounded(true)
}

/// Every input sequence from `x = 1`, as probes for validation.
fn probes(problem: &Msop) -> Vec<Trajectory> {
    (0..3usize.pow(HORIZON as u32))
        .map(|mut code| {
            let inputs: Vec<_> = (0..HORIZON)
                .map(|_| {
                    let u = problem.inputs()[code % 3].clone();
                    code /= 3;
                    u
                })
                .collect();
            problem.simulate(&[1.0], &inputs).expect("shapes match")
        })
        .collect()
}

fn main() -> gbe::Result<()> {
    let space = StateSpace::exact((0..=6).map(|i| point(&[i as f64])).collect())?;
    let scaffold = walk(additive_maps(costs()))?;
    let probes = probes(&scaffold);
    let stopping = StoppingProbSet::new(|x, _, _| if x[0] == 4.0 { 0.5 } else { 0.1 });
    let families = [
        ("additive", additive_maps(costs())),
        ("max", max_maps(costs())),
        ("multiplicative", point_mass_maps(StageCostSet::new(HORIZON, |x, _, _| 1.0 + 0.1 * x[0], |x| 1.0 + x[0]), &probes)?),
        ("stopped additive", stopped_additive_maps(costs(), stopping.clone(), &probes)?),
        ("min time", min_time_maps(TargetSet::new(|x| (x[0] - 5.0).abs() - 0.5), HORIZON)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for (name, maps) in families {
        let problem = walk(maps)?;
        let table = solve_gbe(&problem, &space)?;
        let value = state_value(&problem, &space, &table, &[1.0], 0)?;
        let brute = enumerate_solve(&problem, &[1.0], 1_000)?;
        let maps = problem.rep_maps()?;
        let monotone = check_monotone(
            maps,
            || {
                let a: f64 = rng.gen_range(0.0..10.0);
                let b: f64 = rng.gen_range(0.0..10.0);
                MonotoneSample {
                    t: rng.gen_range(0..HORIZON),
                    x: vec![rng.gen_range(0..=6) as f64],
                    u: vec![rng.gen_range(-1..=1) as f64],
                    z: a.max(b),
                    w: a.min(b),
                }
            },
            10_000,
        );
        println!(
            "{name:>16}: V(1, 0) = {value:.6}, enumeration {:.6}, monotone {} ({} strict checks)",
            brute.value,
            monotone.passed(),
            monotone.strict_checks
        );
    }

    // Stopping probabilities must account for every trajectory: here stage
    // probabilities are fine but stopping at T is only half certain.
    let leaky = stopping.with_terminal(|_| 0.5);
    let report = check_total_probability(&leaky, HORIZON, &probes);
    println!("\nleaky stopping: holds {}, first deficit {:?}", report.holds(), report.counterexample);
    match stopped_additive_maps(costs(), leaky, &probes) {
        Ok(_) => println!("accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
