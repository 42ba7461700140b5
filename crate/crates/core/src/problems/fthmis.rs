use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::costs::{max_maps, StageCostSet};
use crate::error::{Error, Result};
use crate::model::{point, Axis, Dynamics, LookupPolicy, Msop, Objective, StageSet, State, StateSpace, ValueTable};

pub const FTHMIS_HORIZON: usize = 4;

/// `g_t(x) = (x1 - (t-1)/4)^2 + (x2 - (t+1)/4)^2 - 1.5`; the set to stay
/// in at stage `t` is `g_t < 0`.
pub fn fthmis_constraint(x: &[f64], t: usize) -> f64 {
    let s = t as f64;
    (x[0] - (s - 1.0) / 4.0).powi(2) + (x[1] - (s + 1.0) / 4.0).powi(2) - 1.5
}

/// Switching dynamics: outside the unit disc around `(1, 0)` the first
/// branch applies, inside it the second.
pub fn fthmis_step(x: &[f64], u: f64) -> State {
    let (a, b) = (x[0], x[1]);
    if 1.0 - (a - 1.0).powi(2) - b * b <= 0.0 {
        point(&[a, (0.5 + u) * a - 0.1 * b])
    } else {
        point(&[b, 0.2 * a - (0.1 + u) * b + b * b])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FthmisConfig {
    /// Points per axis of the grid on `[-1, 1]^2`.
    pub grid_points: usize,
    /// Points of the input grid on `[-0.1, 0.1]`.
    pub inputs: usize,
    pub lookup: LookupPolicy,
}

impl Default for FthmisConfig {
    fn default() -> Self {
        FthmisConfig { grid_points: 5, inputs: 21, lookup: LookupPolicy::Interpolate }
    }
}

/// Four stages of the switching system on `X_t = [-1, 1]^2` with cost
/// `max_t g_t(x(t))`, so that `{V(., 0) < 0}` is the set of states that
/// can be kept inside every `{g_t < 0}`.
pub fn fthmis_problem(config: &FthmisConfig) -> Result<(Msop, StateSpace)> {
    if config.inputs < 1 {
        return Err(Error::EmptyInputSet);
    }
    let inputs = if config.inputs == 1 {
        vec![point(&[0.0])]
    } else {
        (0..config.inputs).map(|i| point(&[-0.1 + 0.2 * i as f64 / (config.inputs - 1) as f64])).collect()
    };
    let costs = StageCostSet::new(FTHMIS_HORIZON, |x, _, t| fthmis_constraint(x, t), |x| {
        fthmis_constraint(x, FTHMIS_HORIZON)
    })
    .bounded(true);
    let problem = Msop::new(
        FTHMIS_HORIZON,
        Dynamics::new(|x, u, _| fthmis_step(x, u[0])),
        vec![StageSet::closed_box(vec![-1.0, -1.0], vec![1.0, 1.0]); FTHMIS_HORIZON + 1],
        inputs,
        Objective::Separable(max_maps(costs)),
    )?
    .with_input_bounds(vec![-0.1], vec![0.1])?;
    let axis = Axis::uniform(-1.0, 1.0, config.grid_points)?;
    Ok((problem, StateSpace::grid(vec![axis.clone(), axis], config.lookup)?))
}

/// Stage-0 states with `V(x, 0) < 0`.
pub fn compute_fthmis(table: &ValueTable) -> Vec<bool> {
    table.stage(0).iter().map(|v| *v < 0.0).collect()
}

/// Least-squares polynomial fit whose zero sublevel set approximates a mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetFit {
    pub degree: usize,
    /// Monomial exponents, one row per coefficient.
    pub exponents: Vec<Vec<u32>>,
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual over the fitted samples; `+inf` when the
    /// design matrix is rank deficient.
    pub residual: f64,
    /// Fraction of points where `p(x) < 0` agrees with the mask.
    pub sign_agreement: f64,
}

impl LevelSetFit {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.exponents.iter().zip(&self.coefficients).map(|(e, c)| c * monomial(x, e)).sum()
    }
}

fn monomial(x: &[f64], exponents: &[u32]) -> f64 {
    x.iter().zip(exponents).map(|(v, e)| v.powi(*e as i32)).product()
}

/// All exponent vectors in `dim` variables of total degree at most `degree`,
/// in graded lexicographic order.
pub fn monomial_exponents(dim: usize, degree: usize) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree as u32 {
        rec(dim, total, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

const RANK_TOLERANCE: f64 = 1e-12;

/// Fits a polynomial of total degree `degree` to the finite `values` at
/// `points`, then scores its zero sublevel set against `mask` at every point.
pub fn fit_levelset(points: &[State], values: &[f64], mask: &[bool], degree: usize) -> Result<LevelSetFit> {
    if points.len() != values.len() || points.len() != mask.len() {
        return Err(Error::Dimension { expected: points.len(), actual: values.len().min(mask.len()) });
    }
    let dim = points.first().map_or(0, |p| p.len());
    let exponents = monomial_exponents(dim.max(1), degree);
    let samples: Vec<usize> = (0..points.len()).filter(|i| values[*i].is_finite()).collect();
    if samples.len() < exponents.len() {
        return Err(Error::Validation(format!(
            "{} finite samples cannot determine {} coefficients",
            samples.len(),
            exponents.len()
        )));
    }
    let a = DMatrix::from_fn(samples.len(), exponents.len(), |r, c| monomial(&points[samples[r]], &exponents[c]));
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|i| values[*i]));
    let svd = a.clone().svd(true, true);
    let largest = svd.singular_values.max();
    let rank_deficient = svd.singular_values.iter().any(|s| *s <= RANK_TOLERANCE * largest.max(1.0));
    let coefficients: Vec<f64> = if rank_deficient {
        vec![0.0; exponents.len()]
    } else {
        svd.solve(&b, RANK_TOLERANCE).map_err(|e| Error::Validation(e.to_string()))?.iter().copied().collect()
    };
    let residual = if rank_deficient {
        f64::INFINITY
    } else {
        let fitted = &a * DVector::from_column_slice(&coefficients);
        ((fitted - &b).norm_squared() / samples.len() as f64).sqrt()
    };
    let mut fit = LevelSetFit { degree, exponents, coefficients, residual, sign_agreement: 0.0 };
    let agree = points.iter().zip(mask).filter(|(p, m)| (fit.eval(p) < 0.0) == **m).count();
    fit.sign_agreement = agree as f64 / points.len().max(1) as f64;
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_gbe;

    #[test]
    fn branch_selection() {
        // 1 - 0 - 0 > 0 at (1, 0): second branch.
        let x = fthmis_step(&[1.0, 0.0], 0.05);
        assert_eq!(x.as_slice(), &[0.0, 0.2]);
        // Far from (1, 0): first branch.
        let y = fthmis_step(&[-1.0, 0.5], 0.1);
        assert_eq!(y.as_slice(), &[-1.0, -0.6 - 0.05]);
    }

    #[test]
    fn origin_is_admissible_at_stage_zero() {
        assert!((fthmis_constraint(&[0.0, 0.0], 0) + 1.375).abs() < 1e-15);
    }

    #[test]
    fn exponent_count() {
        assert_eq!(monomial_exponents(2, 4).len(), 15);
        assert_eq!(monomial_exponents(3, 2).len(), 10);
        assert_eq!(monomial_exponents(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn exact_quadratic_is_recovered() {
        let axis = Axis::uniform(-1.0, 1.0, 7).unwrap();
        let space = StateSpace::grid(vec![axis.clone(), axis], LookupPolicy::Interpolate).unwrap();
        let points: Vec<State> = (0..space.len()).map(|i| space.state(i)).collect();
        let values: Vec<f64> = points.iter().map(|p| p[0] * p[0] + 2.0 * p[1] * p[1] - 0.5 + 0.3 * p[0] * p[1]).collect();
        let mask: Vec<bool> = values.iter().map(|v| *v < 0.0).collect();
        let fit = fit_levelset(&points, &values, &mask, 2).unwrap();
        assert!(fit.residual <= 1e-9);
        assert_eq!(fit.sign_agreement, 1.0);
        assert!((fit.eval(&[0.2, -0.4]) - (0.04 + 0.32 - 0.5 - 0.024)).abs() < 1e-9);
    }

    #[test]
    fn constant_positive_values_give_empty_set() {
        let points: Vec<State> = (0..10).map(|i| point(&[i as f64 / 10.0, (i * i) as f64 / 50.0])).collect();
        let fit = fit_levelset(&points, &[1.0; 10], &[false; 10], 1).unwrap();
        assert!(points.iter().all(|p| fit.eval(p) >= 0.0));
        assert_eq!(fit.sign_agreement, 1.0);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        // All samples on the line x2 = 0: the x2 column vanishes.
        let points: Vec<State> = (0..6).map(|i| point(&[i as f64, 0.0])).collect();
        let fit = fit_levelset(&points, &[1.0; 6], &[false; 6], 1).unwrap();
        assert_eq!(fit.residual, f64::INFINITY);
        assert!(fit_levelset(&points[..2], &[1.0; 2], &[false; 2], 1).is_err());
    }

    #[test]
    fn mask_is_strict() {
        let mut table = ValueTable::new(3, 1);
        table.set_value(0, 0, -1.0);
        table.set_value(1, 0, 0.0);
        assert_eq!(compute_fthmis(&table), vec![true, false, false]);
    }

    #[test]
    fn mask_grows_with_resolution() {
        let (p, space) = fthmis_problem(&FthmisConfig::default()).unwrap();
        assert_eq!(space.len(), 25);
        // No 5x5 node can be kept inside the sets: the origin is a fixed
        // point with g_4 > 0 and the other nodes leave the box or the sets.
        assert!(compute_fthmis(&solve_gbe(&p, &space).unwrap()).iter().all(|m| !*m));
        let (p, space) = fthmis_problem(&FthmisConfig { grid_points: 21, ..Default::default() }).unwrap();
        let mask = compute_fthmis(&solve_gbe(&p, &space).unwrap());
        assert!(mask.iter().any(|m| *m));
    }
}
