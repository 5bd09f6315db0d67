//! Tridiagonal storage and LU solve.

use crate::error::{Error, Result};

/// Square tridiagonal matrix. `lower[k]` is entry `(k+1, k)`, `upper[k]` is
/// entry `(k, k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Add `v` at `(row, col)`; `|row - col| <= 1`.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        if row == col {
            self.diag[row] += v;
        } else if col == row + 1 {
            self.upper[row] += v;
        } else if row == col + 1 {
            self.lower[col] += v;
        } else {
            panic!("({row}, {col}) outside the tridiagonal band");
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if row == col {
            self.diag[row]
        } else if col == row + 1 {
            self.upper[row]
        } else if row == col + 1 {
            self.lower[col]
        } else {
            0.0
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k] * x[k];
                if k > 0 {
                    s += self.lower[k - 1] * x[k - 1];
                }
                if k + 1 < n {
                    s += self.upper[k] * x[k + 1];
                }
                s
            })
            .collect()
    }

    /// Leading `n x n` block.
    pub fn leading(&self, n: usize) -> Tridiagonal {
        Tridiagonal {
            lower: self.lower[..n.saturating_sub(1)].to_vec(),
            diag: self.diag[..n].to_vec(),
            upper: self.upper[..n.saturating_sub(1)].to_vec(),
        }
    }

    pub fn scaled_add(&mut self, alpha: f64, other: &Tridiagonal) {
        for (a, b) in self.diag.iter_mut().zip(&other.diag) {
            *a += alpha * b;
        }
        for (a, b) in self.lower.iter_mut().zip(&other.lower) {
            *a += alpha * b;
        }
        for (a, b) in self.upper.iter_mut().zip(&other.upper) {
            *a += alpha * b;
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| (l - u).abs() <= tol * l.abs().max(u.abs()))
    }

    /// LU factorization without pivoting.
    pub fn factor(&self) -> Result<TridiagonalLu> {
        let n = self.dim();
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
        let scale = self.diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        for k in 0..n {
            let mut p = self.diag[k];
            if k > 0 {
                let l = self.lower[k - 1] / pivots[k - 1];
                p -= l * self.upper[k - 1];
                multipliers.push(l);
            }
            if !(p.abs() > f64::EPSILON * scale * 1e-3) || !p.is_finite() {
                return Err(Error::SingularTridiagonal { row: k });
            }
            pivots.push(p);
        }
        Ok(TridiagonalLu {
            pivots,
            multipliers,
            upper: self.upper.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    pivots: Vec<f64>,
    multipliers: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.pivots.len();
        let mut y = rhs.to_vec();
        for k in 1..n {
            y[k] -= self.multipliers[k - 1] * y[k - 1];
        }
        for k in (0..n).rev() {
            if k + 1 < n {
                y[k] -= self.upper[k] * y[k + 1];
            }
            y[k] /= self.pivots[k];
        }
        y
    }
}
