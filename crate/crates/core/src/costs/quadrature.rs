use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Axis-aligned box a noise variable `w` ranges over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl NoiseBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "noise box bounds must agree in dimension");
        NoiseBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// A quadrature rule: nodes and weights approximating `∫ g(w) dw` over a box.
///
/// Rules used without a density must themselves be a probability measure
/// (weights summing to one).
pub trait Quadrature: Send + Sync {
    fn rule(&self, domain: &NoiseBox) -> Vec<(Vec<f64>, f64)>;
}

/// Deterministic noise: all mass at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMass {
    pub at: Vec<f64>,
}

impl Quadrature for PointMass {
    fn rule(&self, _domain: &NoiseBox) -> Vec<(Vec<f64>, f64)> {
        vec![(self.at.clone(), 1.0)]
    }
}

/// Tensor-product Gauss-Legendre rule of the given order per dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussLegendre {
    pub order: usize,
}

impl Quadrature for GaussLegendre {
    fn rule(&self, domain: &NoiseBox) -> Vec<(Vec<f64>, f64)> {
        let (nodes, weights) = gauss_legendre(self.order);
        let mut out: Vec<(Vec<f64>, f64)> = vec![(Vec::with_capacity(domain.dim()), 1.0)];
        for (lo, hi) in domain.lo.iter().zip(&domain.hi) {
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let mut next = Vec::with_capacity(out.len() * nodes.len());
            for (point, weight) in &out {
                for (n, w) in nodes.iter().zip(&weights) {
                    let mut p = point.clone();
                    p.push(mid + half * n);
                    next.push((p, weight * w * half));
                }
            }
            out = next;
        }
        out
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
