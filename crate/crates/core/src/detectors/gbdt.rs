//! Second-order gradient boosting of depth-limited trees on logistic loss.

use crate::data::{Class, Points};
use crate::error::FitErrorKind;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub eta: f64,
    pub lambda: f64,
    pub min_child_weight: f64,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self { rounds: 100, max_depth: 3, eta: 0.3, lambda: 1.0, min_child_weight: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split { feature: usize, threshold: f64, left: u32, right: u32 },
    Leaf(f64),
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(w) => return w,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] < threshold { left } else { right } as usize;
                }
            }
        }
    }
}

struct Grower<'a> {
    x: &'a Points,
    g: &'a [f64],
    h: &'a [f64],
    params: &'a BoostParams,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn leaf_weight(&self, gs: f64, hs: f64) -> f64 {
        -self.params.eta * gs / (hs + self.params.lambda)
    }

    /// `sorted[f]` holds the node's samples ordered by feature `f`.
    fn grow(&mut self, sorted: Vec<Vec<usize>>, depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let lambda = self.params.lambda;
        let mcw = self.params.min_child_weight;
        let members = &sorted[0];
        let gs: f64 = members.iter().map(|&i| self.g[i]).sum();
        let hs: f64 = members.iter().map(|&i| self.h[i]).sum();
        self.nodes.push(Node::Leaf(self.leaf_weight(gs, hs)));
        if depth >= self.params.max_depth || members.len() < 2 {
            return id;
        }
        let parent = gs * gs / (hs + lambda);
        let mut best: Option<(f64, usize, f64)> = None;
        for (f, order) in sorted.iter().enumerate() {
            let (mut gl, mut hl) = (0.0, 0.0);
            for w in 0..order.len() - 1 {
                let i = order[w];
                gl += self.g[i];
                hl += self.h[i];
                let a = self.x.row(i)[f];
                let b = self.x.row(order[w + 1])[f];
                if a == b {
                    continue;
                }
                let (gr, hr) = (gs - gl, hs - hl);
                if hl < mcw || hr < mcw {
                    continue;
                }
                let gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                if gain > best.map_or(0.0, |b| b.0) {
                    best = Some((gain, f, 0.5 * (a + b)));
                }
            }
        }
        let Some((_, feature, threshold)) = best else { return id };
        let goes_left = |i: usize| self.x.row(i)[feature] < threshold;
        let mut left = Vec::with_capacity(sorted.len());
        let mut right = Vec::with_capacity(sorted.len());
        for order in &sorted {
            let (l, r): (Vec<usize>, Vec<usize>) = order.iter().partition(|&&i| goes_left(i));
            left.push(l);
            right.push(r);
        }
        drop(sorted);
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id as usize] = Node::Split { feature, threshold, left: l, right: r };
        id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Booster {
    trees: Vec<Tree>,
}

fn sigmoid(m: f64) -> f64 {
    1.0 / (1.0 + (-m).exp())
}

/// Mean logistic loss of margins `m` against 0/1 targets `t`.
pub fn logistic_loss(m: &[f64], t: &[f64]) -> f64 {
    // log(1 + e^m) - t m, computed stably
    let total: f64 = m.iter().zip(t).map(|(&m, &t)| m.max(0.0) + (-m.abs()).exp().ln_1p() - t * m).sum();
    total / m.len() as f64
}

impl Booster {
    pub fn fit(x: &Points, labels: &[Class], params: &BoostParams) -> Result<Self, FitErrorKind> {
        Self::fit_traced(x, labels, params).map(|(b, _)| b)
    }

    /// Also returns the training loss before the first round and after each.
    pub fn fit_traced(x: &Points, labels: &[Class], params: &BoostParams) -> Result<(Self, Vec<f64>), FitErrorKind> {
        let n = x.len();
        if !labels.iter().any(|l| l.is_faulty()) {
            return Err(FitErrorKind::MissingClass("faulty"));
        }
        if labels.iter().all(|l| l.is_faulty()) {
            return Err(FitErrorKind::MissingClass("healthy"));
        }
        let t: Vec<f64> = labels.iter().map(|l| if l.is_faulty() { 1.0 } else { 0.0 }).collect();
        let mut presorted: Vec<Vec<usize>> = Vec::with_capacity(x.dim());
        for f in 0..x.dim() {
            let mut o: Vec<usize> = (0..n).collect();
            o.sort_by(|&a, &b| x.row(a)[f].total_cmp(&x.row(b)[f]).then(a.cmp(&b)));
            presorted.push(o);
        }
        if presorted.is_empty() {
            presorted.push((0..n).collect());
        }
        let mut margin = vec![0.0; n];
        let mut trace = vec![logistic_loss(&margin, &t)];
        let mut trees = Vec::with_capacity(params.rounds);
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        for _ in 0..params.rounds {
            for i in 0..n {
                let p = sigmoid(margin[i]);
                g[i] = p - t[i];
                h[i] = (p * (1.0 - p)).max(1e-16);
            }
            let mut grower = Grower { x, g: &g, h: &h, params, nodes: Vec::new() };
            grower.grow(presorted.clone(), 0);
            let tree = Tree { nodes: grower.nodes };
            for (i, m) in margin.iter_mut().enumerate() {
                *m += tree.predict(x.row(i));
            }
            trees.push(tree);
            trace.push(logistic_loss(&margin, &t));
        }
        if margin.iter().any(|m| !m.is_finite()) {
            return Err(FitErrorKind::NonFinite);
        }
        Ok((Self { trees }, trace))
    }

    /// Log-odds of the faulty class.
    pub fn margin(&self, points: &Points) -> Vec<f64> {
        points.rows().map(|x| self.trees.iter().map(|t| t.predict(x)).sum()).collect()
    }
}
