//! Kernel functions and the `gamma` conventions of the SVM grids.

use crate::data::Points;
use crate::error::FitErrorKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    /// `exp(-gamma * |x - z|^2)`
    Rbf { gamma: f64 },
    /// `tanh(gamma * <x, z>)`
    Sigmoid { gamma: f64 },
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => (-gamma * super::neighbors::sq_dist(a, b)).exp(),
            Kernel::Sigmoid { gamma } => (gamma * dot(a, b)).tanh(),
        }
    }

    /// Builds a kernel from grid names. `gamma` is `"auto"` (`1/d`),
    /// `"scale"` (`1/(d * var)` over every entry of `train`) or a number.
    pub fn from_names(kernel: &str, gamma: &str, train: &Points) -> Result<Self, FitErrorKind> {
        let d = train.dim().max(1) as f64;
        let g = match gamma {
            "auto" => 1.0 / d,
            "scale" => {
                let v = entry_variance(train);
                if v > 0.0 {
                    1.0 / (d * v)
                } else {
                    1.0
                }
            }
            other => other
                .parse::<f64>()
                .ok()
                .filter(|g| *g > 0.0 && g.is_finite())
                .ok_or_else(|| FitErrorKind::InvalidHyperparameter(format!("gamma={other}")))?,
        };
        match kernel {
            "linear" => Ok(Kernel::Linear),
            "rbf" => Ok(Kernel::Rbf { gamma: g }),
            "sigmoid" => Ok(Kernel::Sigmoid { gamma: g }),
            other => Err(FitErrorKind::InvalidHyperparameter(format!("kernel={other}"))),
        }
    }
}

/// Population variance of all matrix entries taken together.
pub fn entry_variance(points: &Points) -> f64 {
    let v = points.as_flat();
    if v.is_empty() {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

/// `sum_i coef_i K(sv_i, x)` for each row of `points`.
pub fn expansion(kernel: &Kernel, support: &Points, coef: &[f64], points: &Points) -> Vec<f64> {
    use rayon::prelude::*;
    points
        .as_flat()
        .par_chunks(points.dim().max(1))
        .map(|x| support.rows().zip(coef).map(|(s, c)| c * kernel.eval(s, x)).sum())
        .collect()
}
