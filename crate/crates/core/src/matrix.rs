//! Dense row-stochastic transition matrices.

use std::fmt;

use crate::error::{ModelError, Result};

/// Which stage of the clock cycle a matrix describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixRole {
    /// Issue stage: instructions leave the queue for the functional units.
    Consumption,
    /// Dispatch stage: new instructions enter the queue.
    Arrival,
    /// One full cycle, issue followed by dispatch.
    Complete,
    /// Anything built directly from user-supplied entries.
    Generic,
}

/// Dense square matrix of transition probabilities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    role: MatrixRole,
    dim: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    pub fn zeros(role: MatrixRole, dim: usize) -> Self {
        Self {
            role,
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(role: MatrixRole, dim: usize) -> Self {
        let mut m = Self::zeros(role, dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from rows, checking it is square and row-stochastic.
    pub fn from_rows(role: MatrixRole, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = Self::zeros(role, dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(ModelError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            m.row_mut(i).copy_from_slice(row);
        }
        m.check_stochastic(1e-9)?;
        Ok(m)
    }

    pub fn role(&self) -> MatrixRole {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.dim.max(1))
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    /// Largest deviation of any row sum from 1.
    pub fn max_row_deviation(&self) -> f64 {
        (0..self.dim)
            .map(|i| (self.row_sum(i) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Every entry in [0, 1] and every row summing to 1 within `tol`.
    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        for i in 0..self.dim {
            if let Some(j) = self.row(i).iter().position(|p| !(0.0..=1.0).contains(p)) {
                return Err(ModelError::Numerical(format!(
                    "entry ({i}, {j}) = {} is not a probability",
                    self.get(i, j)
                )));
            }
            let sum = self.row_sum(i);
            if (sum - 1.0).abs() > tol {
                return Err(ModelError::Numerical(format!("row {i} sums to {sum}")));
            }
        }
        Ok(())
    }

    /// Matrix product `self × rhs`, tagged with `role`.
    ///
    /// Each entry is accumulated over the intermediate index in ascending
    /// order, so the result does not depend on how rows are scheduled.
    pub fn multiply(&self, rhs: &TransitionMatrix, role: MatrixRole) -> Result<TransitionMatrix> {
        if self.dim != rhs.dim {
            return Err(ModelError::DimensionMismatch(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.dim, rhs.dim
            )));
        }
        let mut out = TransitionMatrix::zeros(role, self.dim);
        for i in 0..self.dim {
            let acc = out.row_mut(i);
            for (m, &c) in self.row(i).iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (slot, &a) in acc.iter_mut().zip(rhs.row(m)) {
                    *slot += c * a;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix, `v × self`.
    pub fn left_multiply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, &w) in v.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (slot, &p) in out.iter_mut().zip(self.row(i)) {
                *slot += w * p;
            }
        }
        out
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(3);
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|p| format!("{p:.prec$}")).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}
