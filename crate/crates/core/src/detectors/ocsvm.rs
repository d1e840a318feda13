//! One-class SVM, nu formulation.

use super::kernel::{expansion, Kernel};
use super::smo::{self, Problem};
use crate::data::Points;
use crate::error::FitErrorKind;

#[derive(Debug, Clone, PartialEq)]
pub struct OcsvmModel {
    kernel: Kernel,
    support: Points,
    coef: Vec<f64>,
    rho: f64,
}

/// Feasible start: the first `floor(nu n)` multipliers at 1, the remainder
/// of `nu n` on the next one.
pub fn initial_alpha(n: usize, nu: f64) -> Vec<f64> {
    let total = nu * n as f64;
    let full = (total as usize).min(n);
    let mut a = vec![0.0; n];
    a[..full].fill(1.0);
    if full < n {
        a[full] = total - full as f64;
    }
    a
}

impl OcsvmModel {
    pub fn fit(train: &Points, kernel: Kernel, nu: f64) -> Result<Self, FitErrorKind> {
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(FitErrorKind::InvalidHyperparameter(format!("nu={nu} outside (0, 1]")));
        }
        let n = train.len();
        if n == 0 {
            return Err(FitErrorKind::TooFewSamples { needed: 1, available: 0 });
        }
        let sol = dual(train, kernel, nu)?;
        let sv: Vec<usize> = (0..n).filter(|&i| sol.alpha[i] > 0.0).collect();
        Ok(Self { kernel, support: train.select(&sv), coef: sv.iter().map(|&i| sol.alpha[i]).collect(), rho: sol.rho })
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// `sum_i a_i K(x_i, x) - rho`: positive inside the learned region.
    pub fn decision(&self, points: &Points) -> Vec<f64> {
        expansion(&self.kernel, &self.support, &self.coef, points).into_iter().map(|v| v - self.rho).collect()
    }

    pub fn score(&self, points: &Points) -> Vec<f64> {
        self.decision(points).into_iter().map(|v| -v).collect()
    }
}

/// Multipliers after a solve, exposed for feasibility checks.
pub fn dual(train: &Points, kernel: Kernel, nu: f64) -> Result<smo::Solution, FitErrorKind> {
    let n = train.len();
    smo::solve(&Problem {
        points: train,
        kernel,
        y: vec![1.0; n],
        p: vec![0.0; n],
        upper: vec![1.0; n],
        alpha0: initial_alpha(n, nu),
    })
}
