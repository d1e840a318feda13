use serde::{Deserialize, Serialize};

use crate::data::Points;
use crate::error::{Error, Result};

/// Spread below this is treated as a constant column and left unscaled.
const MIN_STD: f64 = 1e-12;

/// Per-feature zero-mean, unit-variance scaling fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Population statistics of every column; constant columns get std 1.
    pub fn fit(points: &Points) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample("standardizer input"));
        }
        let d = points.dim();
        let n = points.len() as f64;
        let mut means = vec![0.0; d];
        for r in points.rows() {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; d];
        for r in points.rows() {
            for ((s, v), m) in vars.iter_mut().zip(r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd < MIN_STD { 1.0 } else { sd }
            })
            .collect();
        Ok(Self { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform(&self, points: &Points) -> Result<Points> {
        points.check_dim(self.dim())?;
        let mut out = points.clone();
        for i in 0..out.len() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.stds) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, points: &Points) -> Result<Points> {
        points.check_dim(self.dim())?;
        let mut out = points.clone();
        for i in 0..out.len() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.stds) {
                *v = *v * s + m;
            }
        }
        Ok(out)
    }
}
