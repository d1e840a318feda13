//! Soft-margin C-SVM with balanced class weights.

use super::kernel::{expansion, Kernel};
use super::smo::{self, Problem};
use crate::data::{Class, Points};
use crate::error::FitErrorKind;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    kernel: Kernel,
    support: Points,
    coef: Vec<f64>,
    rho: f64,
}

/// Per-sample upper bounds `C * n / (2 n_class)`.
pub fn balanced_bounds(labels: &[Class], c: f64) -> Result<Vec<f64>, FitErrorKind> {
    let n = labels.len() as f64;
    let nf = labels.iter().filter(|l| l.is_faulty()).count();
    let nh = labels.len() - nf;
    if nf == 0 {
        return Err(FitErrorKind::MissingClass("faulty"));
    }
    if nh == 0 {
        return Err(FitErrorKind::MissingClass("healthy"));
    }
    let wf = n / (2.0 * nf as f64);
    let wh = n / (2.0 * nh as f64);
    Ok(labels.iter().map(|l| c * if l.is_faulty() { wf } else { wh }).collect())
}

fn problem<'a>(train: &'a Points, labels: &[Class], kernel: Kernel, c: f64) -> Result<Problem<'a>, FitErrorKind> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(FitErrorKind::InvalidHyperparameter(format!("C={c}")));
    }
    let n = train.len();
    Ok(Problem {
        points: train,
        kernel,
        y: labels.iter().map(|l| if l.is_faulty() { 1.0 } else { -1.0 }).collect(),
        p: vec![-1.0; n],
        upper: balanced_bounds(labels, c)?,
        alpha0: vec![0.0; n],
    })
}

/// Raw dual solution, for feasibility checks.
pub fn dual(train: &Points, labels: &[Class], kernel: Kernel, c: f64) -> Result<(smo::Solution, Vec<f64>, Vec<f64>), FitErrorKind> {
    let prob = problem(train, labels, kernel, c)?;
    let sol = smo::solve(&prob)?;
    Ok((sol, prob.y, prob.upper))
}

impl SvmModel {
    pub fn fit(train: &Points, labels: &[Class], kernel: Kernel, c: f64) -> Result<Self, FitErrorKind> {
        let (sol, y, _) = dual(train, labels, kernel, c)?;
        let sv: Vec<usize> = (0..sol.alpha.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
        Ok(Self {
            kernel,
            support: train.select(&sv),
            coef: sv.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
            rho: sol.rho,
        })
    }

    /// Signed decision value, positive on the faulty side.
    pub fn score(&self, points: &Points) -> Vec<f64> {
        expansion(&self.kernel, &self.support, &self.coef, points).into_iter().map(|v| v - self.rho).collect()
    }
}
