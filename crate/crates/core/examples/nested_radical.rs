//! The nested radical `sqrt(x0 + u0 + sqrt(x1 + u1 + ...))` solved three
//! ways: the backward recursion on its two states, the classical recursion
//! on the history-augmented problem, and rollout of a fixed base policy.
//!
//! `cargo run --release --example nested_radical [max_horizon]`

use std::time::Instant;

use gbe::problems::{sqrt_base_policy, sqrt_msop};
use gbe::solver::{augment_forward_separable, extract_policy, rollout_policy, solve_bellman_additive, solve_gbe};

fn main() -> gbe::Result<()> {
    let max: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10_000);
    println!("{:>7}  {:>18}  {:>18}  {:>10}  {:>10}", "T", "optimal", "rollout", "gbe time", "rollout time");
    let mut t = 10;
    while t <= max {
        let nr = sqrt_msop(t);
        let clock = Instant::now();
        let table = solve_gbe(&nr.problem, &nr.space)?;
        let best = extract_policy(&nr.problem, &nr.space, &table, &nr.initial_state)?;
        let gbe = clock.elapsed();
        let clock = Instant::now();
        let rolled = rollout_policy(&nr.problem, &sqrt_base_policy(), &nr.initial_state)?;
        let rollout = clock.elapsed();
        println!("{t:>7}  {:>18.15}  {:>18.15}  {:>10.2?}  {:>10.2?}", best.cost, rolled.cost, gbe, rollout);
        t *= 10;
    }

    // The augmented state is the whole history, so the table doubles with
    // every stage.
    println!("\naugmented state space:");
    for t in 6..=12 {
        let nr = sqrt_msop(t);
        let clock = Instant::now();
        let aug = augment_forward_separable(&nr.problem, &nr.forward, &nr.initial_state, 100_000_000)?;
        let table = solve_bellman_additive(&aug.problem, &aug.space)?;
        let best = extract_policy(&aug.problem, &aug.space, &table, &aug.initial_state)?;
        println!("{t:>3}  {:>8} states  {:.15}  {:.2?}", aug.space.len(), best.cost, clock.elapsed());
    }
    Ok(())
}
