//! Dense point matrices and labelled datasets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `n x d` matrix of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Points {
    dim: usize,
    data: Vec<f64>,
}

impl Points {
    pub fn new(dim: usize) -> Self {
        Self { dim, data: Vec::new() }
    }

    pub fn with_capacity(dim: usize, rows: usize) -> Self {
        Self { dim, data: Vec::with_capacity(dim * rows) }
    }

    /// Build from a flat row-major buffer.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::Shape { expected: dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut p = Self::with_capacity(dim, rows.len());
        for r in rows {
            p.push(r.as_ref())?;
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dim {
            return Err(Error::Shape { expected: self.dim, got: row.len() });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    /// Copy of the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Points {
        let mut out = Points::with_capacity(self.dim, indices.len());
        for &i in indices {
            out.data.extend_from_slice(self.row(i));
        }
        out
    }

    /// Append the columns of `other` to every row.
    pub fn hstack(&self, other: &Points) -> Result<Points> {
        if self.len() != other.len() {
            return Err(Error::Shape { expected: self.len(), got: other.len() });
        }
        let dim = self.dim + other.dim;
        let mut data = Vec::with_capacity(dim * self.len());
        for (a, b) in self.rows().zip(other.rows()) {
            data.extend_from_slice(a);
            data.extend_from_slice(b);
        }
        Ok(Points { dim, data })
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim != expected && !self.is_empty() {
            return Err(Error::Shape { expected, got: self.dim });
        }
        Ok(())
    }
}

/// Class membership of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Healthy,
    Faulty,
}

impl Class {
    pub fn is_faulty(self) -> bool {
        matches!(self, Class::Faulty)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Healthy => "healthy",
            Class::Faulty => "faulty",
        }
    }
}

/// Points with binary labels and the seed that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub points: Points,
    pub labels: Vec<Class>,
    pub seed: u64,
}

impl LabeledDataset {
    pub fn new(points: Points, labels: Vec<Class>, seed: u64) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Shape { expected: points.len(), got: labels.len() });
        }
        Ok(Self { points, labels, seed })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn n_faulty(&self) -> usize {
        self.labels.iter().filter(|c| c.is_faulty()).count()
    }

    pub fn n_healthy(&self) -> usize {
        self.len() - self.n_faulty()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            points: self.points.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            seed: self.seed,
        }
    }

    /// Only the rows of one class.
    pub fn class_only(&self, class: Class) -> LabeledDataset {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i] == class).collect();
        self.subset(&idx)
    }

    /// Concatenate two datasets of equal dimension; the seed of `self` is kept.
    pub fn concat(&self, other: &LabeledDataset) -> Result<LabeledDataset> {
        if self.dim() != other.dim() {
            return Err(Error::Shape { expected: self.dim(), got: other.dim() });
        }
        let mut points = self.points.clone();
        points.data.extend_from_slice(&other.points.data);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(LabeledDataset { points, labels, seed: self.seed })
    }

    /// Scores split by class, healthy first.
    pub fn split_scores(&self, scores: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut healthy = Vec::with_capacity(self.n_healthy());
        let mut faulty = Vec::with_capacity(self.n_faulty());
        for (s, c) in scores.iter().zip(&self.labels) {
            match c {
                Class::Healthy => healthy.push(*s),
                Class::Faulty => faulty.push(*s),
            }
        }
        (healthy, faulty)
    }
}
