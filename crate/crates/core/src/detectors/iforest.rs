//! Isolation forest.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::data::Points;
use crate::error::FitErrorKind;
use crate::seed;

/// Subsample size per tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxSamples {
    /// `min(256, n)`
    Auto,
    /// `floor(fraction * n)`
    Fraction(f64),
}

impl MaxSamples {
    pub fn resolve(self, n: usize) -> Result<usize, FitErrorKind> {
        let m = match self {
            MaxSamples::Auto => n.min(256),
            MaxSamples::Fraction(f) if f > 0.0 && f <= 1.0 => (f * n as f64) as usize,
            MaxSamples::Fraction(f) => {
                return Err(FitErrorKind::InvalidHyperparameter(format!("max_samples={f} outside (0, 1]")))
            }
        };
        if m < 1 {
            return Err(FitErrorKind::TooFewSamples { needed: 1, available: n });
        }
        Ok(m)
    }
}

/// `H(i)` for `i = 0..=n`, summed exactly.
fn harmonic_table(n: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(0.0);
    for i in 1..=n {
        h.push(h[i - 1] + 1.0 / i as f64);
    }
    h
}

/// Average unsuccessful-search path length in a binary search tree of `n`
/// keys: `2 H(n-1) - 2(n-1)/n`, zero for `n <= 1`.
pub fn average_path_length(n: usize) -> f64 {
    c_from_table(&harmonic_table(n.saturating_sub(1)), n)
}

fn c_from_table(h: &[f64], n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        2.0 * h[n - 1] - 2.0 * (n - 1) as f64 / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
    Leaf { depth_plus_c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn path_length(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { depth_plus_c } => return *depth_plus_c,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] < *threshold { *left } else { *right } as usize;
                }
            }
        }
    }
}

struct Builder<'a, R> {
    points: &'a Points,
    rng: R,
    max_depth: usize,
    c_table: &'a [f64],
    nodes: Vec<Node>,
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, idx: &mut [usize], depth: usize) -> u32 {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { depth_plus_c: 0.0 });
        let leaf = Node::Leaf { depth_plus_c: depth as f64 + self.c_table[idx.len()] };
        if depth >= self.max_depth || idx.len() <= 1 {
            self.nodes[id] = leaf;
            return id as u32;
        }
        // Try features in random order; constant features cannot split.
        let d = self.points.dim();
        let mut features: Vec<usize> = (0..d).collect();
        let mut chosen = None;
        while !features.is_empty() {
            let f = features.swap_remove(self.rng.random_range(0..features.len()));
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = self.points.row(i)[f];
                (lo.min(v), hi.max(v))
            });
            if hi > lo {
                let mut t = lo + self.rng.random::<f64>() * (hi - lo);
                if t <= lo {
                    t = lo + (hi - lo) * 0.5;
                }
                chosen = Some((f, t));
                break;
            }
        }
        let Some((feature, threshold)) = chosen else {
            self.nodes[id] = leaf;
            return id as u32;
        };
        let mut split = 0;
        for j in 0..idx.len() {
            if self.points.row(idx[j])[feature] < threshold {
                idx.swap(j, split);
                split += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsolationForest {
    trees: Vec<Tree>,
    psi: usize,
    c_psi: f64,
}

impl IsolationForest {
    pub fn fit(train: &Points, n_estimators: usize, max_samples: MaxSamples, seed: u64) -> Result<Self, FitErrorKind> {
        if n_estimators == 0 {
            return Err(FitErrorKind::InvalidHyperparameter("n_estimators must be positive".into()));
        }
        let n = train.len();
        let psi = max_samples.resolve(n)?;
        let max_depth = (psi.max(2) as f64).log2().ceil() as usize;
        let h = harmonic_table(psi);
        let c_table: Vec<f64> = (0..=psi).map(|m| c_from_table(&h, m)).collect();
        let trees = (0..n_estimators)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::stream(seed, "iforest-tree", t as u64);
                let mut idx = sample(&mut rng, n, psi).into_vec();
                let mut b = Builder { points: train, rng, max_depth, c_table: &c_table, nodes: Vec::new() };
                b.grow(&mut idx, 0);
                Tree { nodes: b.nodes }
            })
            .collect();
        Ok(Self { trees, psi, c_psi: c_table[psi] })
    }

    pub fn subsample_size(&self) -> usize {
        self.psi
    }

    /// `2^(-E[h(x)] / c(psi))`, in (0, 1].
    pub fn score(&self, points: &Points) -> Vec<f64> {
        let denom = if self.c_psi > 0.0 { self.c_psi } else { 1.0 };
        points
            .as_flat()
            .par_chunks(points.dim().max(1))
            .map(|x| {
                let mean = self.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / self.trees.len() as f64;
                (-mean / denom).exp2()
            })
            .collect()
    }
}
