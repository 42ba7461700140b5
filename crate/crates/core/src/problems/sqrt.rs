use crate::model::{point, Dynamics, Input, Msop, Objective, RepMaps, StageSet, StateSpace};
use crate::solver::{BasePolicy, ForwardMaps};

/// `sqrt(x0 + u0 + sqrt(x1 + u1 + ... sqrt(x_T)))` with `x+ = 2` after
/// `u = 0.5` and `x+ = 1` after `u = 1`, on `X_t = {1, 2}`.
#[derive(Clone, Debug)]
pub struct NestedRadical {
    pub problem: Msop,
    pub space: StateSpace,
    /// Forward maps carrying the whole `(x, u)` history.
    pub forward: ForwardMaps,
    pub initial_state: [f64; 1],
}

pub fn sqrt_msop(horizon: usize) -> NestedRadical {
    assert!(horizon >= 1, "horizon must be positive");
    let maps = RepMaps::custom(
        horizon,
        |x| x[0].sqrt(),
        |x, u, z, _| (x[0] + u[0] + z).sqrt(),
        vec![true; horizon],
        true,
    );
    let problem = Msop::new(
        horizon,
        Dynamics::new(|_, u, _| point(&[if u[0] == 1.0 { 1.0 } else { 2.0 }])),
        vec![StageSet::new(|x| x[0] == 1.0 || x[0] == 2.0); horizon + 1],
        vec![point(&[0.5]), point(&[1.0])],
        Objective::Separable(maps),
    )
    .expect("well-formed")
    .with_initial_state(point(&[2.0]));
    let forward = ForwardMaps::new(
        horizon,
        |x, u| vec![x[0], u[0]],
        |x, u, z, _| {
            let mut out = Vec::with_capacity(z.len() + 2);
            out.extend_from_slice(z);
            out.extend_from_slice(&[x[0], u[0]]);
            out
        },
        |x, z| z.chunks(2).rev().fold(x[0].sqrt(), |acc, pair| (pair[0] + pair[1] + acc).sqrt()),
    );
    NestedRadical {
        problem,
        space: StateSpace::exact(vec![point(&[1.0]), point(&[2.0])]).expect("distinct states"),
        forward,
        initial_state: [2.0],
    }
}

/// `u = 1` at stages divisible by four, `u = 0.5` otherwise.
pub fn sqrt_base_policy() -> BasePolicy {
    BasePolicy::new(|_: &[f64], t: usize| -> Input { point(&[if t.is_multiple_of(4) { 1.0 } else { 0.5 }]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Policy, Trajectory};

    #[test]
    fn dynamics_ignore_the_state() {
        let p = sqrt_msop(3).problem;
        for x in [1.0, 2.0, 7.5] {
            assert_eq!(p.step(&[x], &[1.0], 1)[0], 1.0);
            assert_eq!(p.step(&[x], &[0.5], 0)[0], 2.0);
        }
    }

    #[test]
    fn forward_and_backward_forms_agree() {
        let inst = sqrt_msop(4);
        let inputs: Vec<Input> = [0.5, 1.0, 1.0, 0.5].iter().map(|u| point(&[*u])).collect();
        let traj = inst.problem.simulate(&inst.initial_state, &inputs).unwrap();
        let by_hand = (2.0f64
            + 0.5
            + (2.0f64 + 1.0 + (1.0f64 + 1.0 + (1.0f64 + 0.5 + 2f64.sqrt()).sqrt()).sqrt()).sqrt())
        .sqrt();
        assert!((traj.cost - by_hand).abs() < 1e-14);
        assert!((inst.forward.evaluate(&traj).unwrap() - by_hand).abs() < 1e-14);
    }

    #[test]
    fn base_policy_schedule() {
        let base = sqrt_base_policy();
        let us: Vec<f64> = (0..9).map(|t| base.input(&[2.0], t)[0]).collect();
        assert_eq!(us, vec![1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0]);
        let _ = Trajectory::from_parts(0, vec![point(&[2.0])], vec![]);
    }
}
