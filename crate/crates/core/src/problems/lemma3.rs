use crate::costs::{additive_maps, StageCostSet};
use crate::model::{point, Dynamics, Msop, Objective, StageSet, StateSpace};

/// Stage input costs `c_0(u) = -u`, `c_1(u) = u`, `c_2(u) = -u/2`.
const INPUT_COST: [f64; 3] = [-1.0, 1.0, -0.5];

/// Three-stage walk `x+ = x + u` on `[0, h]`, `U = {-h, 0, h}`, `x0 = 0`,
/// with cost `sum_s c_s(u(s)) + max_s x(s)` over the stages from the start
/// stage on.
///
/// The cost is evaluated directly: the sum of input costs and the running
/// maximum are each backward separable, but their sum is not, and its
/// optimum violates the principle of optimality.
pub fn lemma3_problem(h: f64) -> Msop {
    assert!(h > 0.0, "step must be positive");
    let cost = Objective::direct(|start, states, inputs| {
        let inputs_cost: f64 = inputs.iter().enumerate().map(|(k, u)| INPUT_COST[start + k] * u[0]).sum();
        inputs_cost + states.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max)
    });
    walk(h, cost)
}

/// The same walk with only the additive input costs.
pub fn lemma3_additive_part(h: f64) -> Msop {
    let costs = StageCostSet::new(3, |_, u, t| INPUT_COST[t] * u[0], |_| 0.0).bounded(true);
    walk(h, Objective::Separable(additive_maps(costs)))
}

/// States `{0, h}`, the reachable part of `[0, h]`.
pub fn lemma3_space(h: f64) -> StateSpace {
    StateSpace::exact(vec![point(&[0.0]), point(&[h])]).expect("distinct states")
}

fn walk(h: f64, objective: Objective) -> Msop {
    Msop::new(
        3,
        Dynamics::new(|x, u, _| point(&[x[0] + u[0]])),
        vec![StageSet::closed_box(vec![0.0], vec![h]); 4],
        vec![point(&[-h]), point(&[0.0]), point(&[h])],
        objective,
    )
    .expect("well-formed")
    .with_initial_state(point(&[0.0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn claimed_optimum_cost() {
        for h in [0.25, 0.5, 1.0, 2.0] {
            let p = lemma3_problem(h);
            let traj = p.simulate(&[0.0], &[point(&[h]), point(&[-h]), point(&[h])]).unwrap();
            assert!(traj.feasible);
            assert_eq!(traj.cost, -1.5 * h);
        }
    }

    #[test]
    fn last_stage_from_zero() {
        let p = lemma3_problem(1.0).reinitialized(&[0.0], 2);
        assert_eq!(p.simulate(&[0.0], &[point(&[0.0])]).unwrap().cost, 0.0);
        assert_eq!(p.simulate(&[0.0], &[point(&[1.0])]).unwrap().cost, 0.5);
    }
}
