mod common;

use common::{close, random_msop, Family, FAMILIES, WIDE};
use gbe::oracle::{check_principle_of_optimality, enumerate_solve};
use gbe::solver::{extract_policy, fixed_point_residual, solve_bellman_additive, solve_gbe, solve_gbe_with, SolveOptions};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(FAMILIES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recursion_matches_closed_form_brute_force(family in family(), seed in any::<u64>()) {
        let r = random_msop(family, seed, WIDE);
        let table = solve_gbe(&r.problem, &r.space).unwrap();
        for x0 in 0..r.tables.n {
            let brute = r.tables.brute_force(x0);
            prop_assert!(close(table.value(x0, 0), brute, 1e-9), "x0 {}: {} vs {}", x0, table.value(x0, 0), brute);
        }
    }

    #[test]
    fn library_enumeration_matches_closed_form(family in family(), seed in any::<u64>()) {
        let r = random_msop(family, seed, WIDE);
        for x0 in 0..r.tables.n {
            let found = enumerate_solve(&r.problem, &[x0 as f64], 1_000_000).unwrap();
            prop_assert!(close(found.value, r.tables.brute_force(x0), 1e-9));
        }
    }

    #[test]
    fn extracted_trajectory_costs_its_value(family in family(), seed in any::<u64>()) {
        let r = random_msop(family, seed, WIDE);
        let table = solve_gbe(&r.problem, &r.space).unwrap();
        prop_assert_eq!(fixed_point_residual(&r.problem, &r.space, &table).unwrap(), 0.0);
        for x0 in 0..r.tables.n {
            let v = table.value(x0, 0);
            match extract_policy(&r.problem, &r.space, &table, &[x0 as f64]) {
                Ok(traj) => {
                    prop_assert!(traj.feasible);
                    prop_assert!(close(traj.cost, v, 1e-9), "{} vs {}", traj.cost, v);
                }
                Err(gbe::Error::NoFeasibleTrajectory) => prop_assert!(v.is_infinite()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn strict_families_give_tail_optimal_trajectories(seed in any::<u64>()) {
        for family in [Family::Additive, Family::Multiplicative, Family::StoppedAdditive] {
            let r = random_msop(family, seed, WIDE);
            let table = solve_gbe(&r.problem, &r.space).unwrap();
            if let Ok(traj) = extract_policy(&r.problem, &r.space, &table, &[0.0]) {
                prop_assert!(check_principle_of_optimality(&r.problem, &traj, 1_000_000).unwrap().holds);
            }
        }
    }

    #[test]
    fn additive_recursions_agree_entrywise(seed in any::<u64>()) {
        let r = random_msop(Family::Additive, seed, WIDE);
        let a = solve_gbe(&r.problem, &r.space).unwrap();
        let b = solve_bellman_additive(&r.problem, &r.space).unwrap();
        for t in 0..=r.tables.horizon {
            for x in 0..r.tables.n {
                prop_assert!(close(a.value(x, t), b.value(x, t), 1e-12));
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_the_table(family in family(), seed in any::<u64>()) {
        let r = random_msop(family, seed, WIDE);
        let one = solve_gbe_with(&r.problem, &r.space, &SolveOptions { threads: Some(1) }).unwrap();
        let two = solve_gbe_with(&r.problem, &r.space, &SolveOptions { threads: Some(2) }).unwrap();
        for t in 0..=r.tables.horizon {
            prop_assert_eq!(one.stage(t), two.stage(t));
        }
    }
}

#[test]
fn non_separable_walk_is_rejected_by_the_recursion() {
    let p = gbe::problems::lemma3_problem(1.0);
    let space = gbe::problems::lemma3_space(1.0);
    assert!(matches!(solve_gbe(&p, &space), Err(gbe::Error::NotSeparable)));
}
