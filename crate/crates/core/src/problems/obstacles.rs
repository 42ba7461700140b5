use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Open ball `{x : |x - (center + drift t)|^2 - radius^2 < 0}`, present at
/// stages `stage_range.0..=stage_range.1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub stage_range: (usize, usize),
    pub center: Vec<f64>,
    pub radius: f64,
    pub drift: Vec<f64>,
}

impl Obstacle {
    /// `h_t(x)`; negative inside. Only the leading `center.len()`
    /// coordinates of `x` are used.
    #[inline]
    pub fn level(&self, x: &[f64], t: usize) -> f64 {
        let s = t as f64;
        self.center
            .iter()
            .zip(&self.drift)
            .zip(x)
            .map(|((c, d), v)| {
                let e = v - c - d * s;
                e * e
            })
            .sum::<f64>()
            - self.radius * self.radius
    }

    #[inline]
    pub fn contains(&self, x: &[f64], t: usize) -> bool {
        t >= self.stage_range.0 && t <= self.stage_range.1 && self.level(x, t) < 0.0
    }
}

/// Seeded circles or spheres. Serializes as a bare JSON array of obstacles.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObstacleSet {
    pub obstacles: Vec<Obstacle>,
}

/// Sampling ranges for [`ObstacleSet::generate`].
#[derive(Clone, Debug)]
pub struct ObstacleSpec {
    pub count: usize,
    pub center_lo: Vec<f64>,
    pub center_hi: Vec<f64>,
    pub radius: (f64, f64),
    /// Per-coordinate drift is drawn from `[-max_drift, max_drift]`.
    pub max_drift: f64,
    pub horizon: usize,
    /// Points every obstacle must keep clear of at all stages, with the
    /// clearance added to the radius.
    pub keep_clear: Vec<Vec<f64>>,
    pub clearance: f64,
    /// Extra rejection test on `(center, radius)`.
    pub reject: fn(&[f64], f64) -> bool,
}

impl ObstacleSet {
    /// Rejection sampling from a ChaCha stream seeded with `seed`.
    pub fn generate(spec: &ObstacleSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut obstacles = Vec::with_capacity(spec.count);
        while obstacles.len() < spec.count {
            let center: Vec<f64> =
                spec.center_lo.iter().zip(&spec.center_hi).map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect();
            let radius = rng.gen_range(spec.radius.0..spec.radius.1);
            // Drawn even when static so that both variants share centers and radii.
            let drift: Vec<f64> = center.iter().map(|_| rng.gen_range(-1.0..1.0) * spec.max_drift).collect();
            let candidate = Obstacle { stage_range: (0, spec.horizon), center, radius, drift };
            let grown = Obstacle { radius: radius + spec.clearance, ..candidate.clone() };
            let blocks = spec.keep_clear.iter().any(|p| (0..=spec.horizon).any(|t| grown.contains(p, t)));
            if blocks || (spec.reject)(&candidate.center, candidate.radius) {
                continue;
            }
            obstacles.push(candidate);
        }
        ObstacleSet { obstacles }
    }

    #[inline]
    pub fn blocks(&self, x: &[f64], t: usize) -> bool {
        self.obstacles.iter().any(|o| o.contains(x, t))
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(max_drift: f64) -> ObstacleSpec {
        ObstacleSpec {
            count: 10,
            center_lo: vec![-1.0, -1.0, -1.0],
            center_hi: vec![1.0, 1.0, 1.0],
            radius: (0.1, 0.2),
            max_drift,
            horizon: 20,
            keep_clear: vec![vec![0.0, 0.0, 0.0]],
            clearance: 0.05,
            reject: |_, _| false,
        }
    }

    #[test]
    fn generation_is_seeded_and_round_trips() {
        let a = ObstacleSet::generate(&spec(0.01), 3);
        assert_eq!(a, ObstacleSet::generate(&spec(0.01), 3));
        assert_ne!(a, ObstacleSet::generate(&spec(0.01), 4));
        let text = a.to_json().unwrap();
        assert!(text.trim_start().starts_with('['));
        assert_eq!(ObstacleSet::from_json(&text).unwrap(), a);
        assert!((0..=20).all(|t| !a.blocks(&[0.0, 0.0, 0.0], t)));
    }

    #[test]
    fn drift_shifts_membership() {
        let set = ObstacleSet::generate(&spec(0.02), 11);
        let t = 7;
        for o in &set.obstacles {
            for p in [[0.1, -0.3, 0.5], [0.9, 0.2, -0.4], [o.center[0], o.center[1], o.center[2]]] {
                let shifted: Vec<f64> = p.iter().zip(&o.drift).map(|(v, d)| v - d * t as f64).collect();
                assert_eq!(o.contains(&p, t), o.contains(&shifted, 0));
            }
        }
    }
}
