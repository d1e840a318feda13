//! Pairwise working-set solver for the SVM duals.
//!
//! Solves
//!
//! ```text
//! min  0.5 a'Qa + p'a   s.t.  y'a = const,  0 <= a_i <= C_i
//! ```
//!
//! with `Q_ij = y_i y_j K(x_i, x_j)` and `y_i` in {-1, +1}. The working pair
//! is chosen by maximal violation for `i` and second-order gain for `j`.
//! The constraint `y'a` is fixed by the starting point.

use rayon::prelude::*;

use super::kernel::Kernel;
use crate::data::Points;
use crate::error::FitErrorKind;

pub const TAU: f64 = 1e-12;
pub const KKT_TOL: f64 = 1e-3;
/// Above this many rows the kernel matrix is recomputed row by row.
pub const DENSE_LIMIT: usize = 4000;

pub struct Problem<'a> {
    pub points: &'a Points,
    pub kernel: Kernel,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub upper: Vec<f64>,
    pub alpha0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub objective: f64,
}

enum QMatrix {
    Dense(Vec<f64>),
    OnTheFly,
}

struct Q<'a> {
    points: &'a Points,
    kernel: Kernel,
    y: &'a [f64],
    store: QMatrix,
    diag: Vec<f64>,
}

impl<'a> Q<'a> {
    fn new(points: &'a Points, kernel: Kernel, y: &'a [f64]) -> Self {
        let n = points.len();
        let diag = (0..n).map(|i| kernel.eval(points.row(i), points.row(i))).collect();
        let store = if n <= DENSE_LIMIT {
            let mut m = vec![0.0; n * n];
            m.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
                let xi = points.row(i);
                for (j, v) in row.iter_mut().enumerate() {
                    *v = y[i] * y[j] * kernel.eval(xi, points.row(j));
                }
            });
            QMatrix::Dense(m)
        } else {
            QMatrix::OnTheFly
        };
        Self { points, kernel, y, store, diag }
    }

    fn row<'b>(&'b self, i: usize, buf: &'b mut Vec<f64>) -> &'b [f64] {
        let n = self.points.len();
        match &self.store {
            QMatrix::Dense(m) => &m[i * n..(i + 1) * n],
            QMatrix::OnTheFly => {
                let xi = self.points.row(i);
                buf.clear();
                buf.extend((0..n).map(|j| self.y[i] * self.y[j] * self.kernel.eval(xi, self.points.row(j))));
                buf
            }
        }
    }
}

pub fn max_iterations(n: usize) -> usize {
    (100 * n).max(100_000)
}

pub fn solve(prob: &Problem) -> Result<Solution, FitErrorKind> {
    let n = prob.points.len();
    let y = &prob.y[..];
    let c = &prob.upper[..];
    let mut alpha = prob.alpha0.clone();
    debug_assert!(y.len() == n && prob.p.len() == n && c.len() == n && alpha.len() == n);
    let q = Q::new(prob.points, prob.kernel, y);
    if q.diag.iter().any(|v| !v.is_finite()) {
        return Err(FitErrorKind::SingularKernel("non-finite diagonal"));
    }

    let mut grad = prob.p.clone();
    let mut buf = Vec::new();
    for i in 0..n {
        if alpha[i] != 0.0 {
            let qi = q.row(i, &mut buf);
            for (g, qv) in grad.iter_mut().zip(qi) {
                *g += alpha[i] * qv;
            }
        }
    }

    let is_upper = |a: f64, cap: f64| a >= cap;
    let is_lower = |a: f64| a <= 0.0;
    let cap = max_iterations(n);
    let mut buf_i = Vec::new();
    let mut buf_j = Vec::new();
    let mut iter = 0;
    loop {
        // select i
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if y[t] > 0.0 {
                if !is_upper(alpha[t], c[t]) && -grad[t] >= gmax {
                    gmax = -grad[t];
                    i_sel = Some(t);
                }
            } else if !is_lower(alpha[t]) && grad[t] >= gmax {
                gmax = grad[t];
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };
        let qi = q.row(i, &mut buf_i);
        // select j
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let (diff, quad) = if y[t] > 0.0 {
                if is_lower(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                (gmax + grad[t], q.diag[i] + q.diag[t] - 2.0 * y[i] * qi[t])
            } else {
                if is_upper(alpha[t], c[t]) {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                (gmax - grad[t], q.diag[i] + q.diag[t] + 2.0 * y[i] * qi[t])
            };
            if diff > 0.0 {
                let obj = -diff * diff / if quad > 0.0 { quad } else { TAU };
                if obj <= best {
                    best = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel.filter(|_| gmax + gmax2 >= KKT_TOL) else { break };
        if iter >= cap {
            return Err(FitErrorKind::NotConverged(cap));
        }
        iter += 1;

        let qj = q.row(j, &mut buf_j);
        let (ci, cj) = (c[i], c[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = q.diag[i] + q.diag[j] + 2.0 * qi[j];
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = q.diag[i] + q.diag[j] - 2.0 * qi[j];
            let quad = if quad > 0.0 { quad } else { TAU };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += qi[t] * di + qj[t] * dj;
        }
    }

    if grad.iter().any(|g| !g.is_finite()) {
        return Err(FitErrorKind::NonFinite);
    }
    let rho = compute_rho(y, &grad, &alpha, c);
    let objective = alpha.iter().zip(grad.iter().zip(&prob.p)).map(|(a, (g, p))| a * (g + p)).sum::<f64>() / 2.0;
    Ok(Solution { alpha, rho, iterations: iter, objective })
}

fn compute_rho(y: &[f64], grad: &[f64], alpha: &[f64], c: &[f64]) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
