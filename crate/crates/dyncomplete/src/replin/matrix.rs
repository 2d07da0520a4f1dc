//! Exact matrices over the rationals.
//!
//! Everything here is plain dense Gaussian elimination over `BigRational`.
//! Dimension counts downstream must be exact integers, so no floating point
//! appears anywhere in the crate.

use num::{BigRational, One, Signed, Zero};
use std::fmt;

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("inconsistent linear system")]
    Inconsistent,
    #[error("matrix is not invertible")]
    NotInvertible,
}

/// Dense row-major matrix with exact rational entries.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }
}

impl RatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        RatMatrix::from_fn(r, c, |i, j| rat(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        RatMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(
            self.cols, other.rows,
            "mul shape mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = RatMatrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let t = a * &other[(k, c)];
                    out[(r, c)] += t;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        RatMatrix::from_fn(self.rows, self.cols, |r, c| {
            &self[(r, c)] - &other[(r, c)]
        })
    }

    pub fn scale(&self, s: &Rat) -> RatMatrix {
        RatMatrix::from_fn(self.rows, self.cols, |r, c| &self[(r, c)] * s)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.cols);
        RatMatrix::from_fn(self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self[(r, c)].clone()
            } else {
                other[(r - self.rows, c)].clone()
            }
        })
    }

    pub fn hstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.rows, other.rows);
        RatMatrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        })
    }

    pub fn column(&self, c: usize) -> Vec<Rat> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Rat>]) -> RatMatrix {
        RatMatrix::from_fn(rows, cols.len(), |r, c| cols[c][r].clone())
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &RatMatrix) -> RatMatrix {
        RatMatrix::from_fn(
            self.rows + other.rows,
            self.cols + other.cols,
            |r, c| {
                if r < self.rows && c < self.cols {
                    self[(r, c)].clone()
                } else if r >= self.rows && c >= self.cols {
                    other[(r - self.rows, c - self.cols)].clone()
                } else {
                    Rat::zero()
                }
            },
        )
    }

    /// In-place reduced row echelon form; returns the pivot column indices.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            // pick a pivot with the largest absolute value to keep numbers small-ish
            let mut best: Option<usize> = None;
            for r in row..self.rows {
                if !self[(r, col)].is_zero() {
                    best = Some(r);
                    break;
                }
            }
            let Some(p) = best else { continue };
            if p != row {
                for c in 0..self.cols {
                    let tmp = self[(p, c)].clone();
                    self[(p, c)] = self[(row, c)].clone();
                    self[(row, c)] = tmp;
                }
            }
            let inv = self[(row, col)].clone();
            for c in col..self.cols {
                let v = &self[(row, c)] / &inv;
                self[(row, c)] = v;
            }
            for r in 0..self.rows {
                if r != row && !self[(r, col)].is_zero() {
                    let factor = self[(r, col)].clone();
                    for c in col..self.cols {
                        let v = &self[(r, c)] - &(&factor * &self[(row, c)]);
                        self[(r, c)] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right kernel, as columns.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![Rat::zero(); self.cols];
            v[f] = Rat::one();
            for (ri, &p) in pivots.iter().enumerate() {
                v[p] = -m[(ri, f)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `self * X = rhs` column-wise. Errors when inconsistent; when the
    /// solution is not unique the free variables are set to zero.
    pub fn solve(&self, rhs: &RatMatrix) -> Result<RatMatrix, MatrixError> {
        if self.rows != rhs.rows {
            return Err(MatrixError::DimMismatch(format!(
                "solve: {} rows vs rhs {} rows",
                self.rows, rhs.rows
            )));
        }
        let mut aug = self.hstack(rhs);
        let pivots = aug.rref();
        // any pivot in the rhs block means inconsistency
        if pivots.iter().any(|&p| p >= self.cols) {
            return Err(MatrixError::Inconsistent);
        }
        let mut x = RatMatrix::zero(self.cols, rhs.cols);
        for (ri, &p) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x[(p, c)] = aug[(ri, self.cols + c)].clone();
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<RatMatrix, MatrixError> {
        if self.rows != self.cols {
            return Err(MatrixError::NotInvertible);
        }
        let n = self.rows;
        let mut aug = self.hstack(&RatMatrix::identity(n));
        let pivots = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(MatrixError::NotInvertible);
        }
        Ok(RatMatrix::from_fn(n, n, |r, c| aug[(r, n + c)].clone()))
    }

    /// Indices of standard basis vectors extending the column space of `self`
    /// to the full ambient space.
    pub fn column_space_complement(&self) -> Vec<usize> {
        let aug = self.hstack(&RatMatrix::identity(self.rows));
        let mut m = aug;
        let pivots = m.rref();
        pivots
            .into_iter()
            .filter(|&p| p >= self.cols)
            .map(|p| p - self.cols)
            .collect()
    }

    pub fn abs_max_num(&self) -> Rat {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(Rat::zero)
    }
}
