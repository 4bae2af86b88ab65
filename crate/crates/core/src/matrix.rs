//! Small dense matrices for gradient values.
//!
//! Gradients of the vector fields handled here are `m x d` real matrices with
//! `m, d <= 3`, so the storage is a fixed inline array and values are `Copy`.
//! The norm convention throughout the crate is Frobenius.

use crate::error::{HomError, Result};
use crate::math;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

pub const MAX_DIM: usize = 3;

/// An `m x d` matrix of gradient values, row-major in a fixed buffer.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    a: [f64; MAX_DIM * MAX_DIM],
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&rows) && (1..=MAX_DIM).contains(&cols),
            "matrix dimensions must lie in 1..=3"
        );
        Matrix {
            rows,
            cols,
            a: [0.0; MAX_DIM * MAX_DIM],
        }
    }

    /// Square identity of size `d`.
    pub fn identity(d: usize) -> Self {
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            m.set(i, i, 1.0);
        }
        m
    }

    /// 1x1 matrix holding a scalar gradient.
    pub fn scalar(v: f64) -> Self {
        let mut m = Matrix::zeros(1, 1);
        m.set(0, 0, v);
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        m
    }

    /// Builds from a row-major flat slice of length `rows * cols`.
    pub fn from_flat(rows: usize, cols: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != rows * cols {
            return Err(HomError::InvalidParameter(
                "flat entry count does not match rows*cols",
            ));
        }
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, flat[i * cols + j]);
            }
        }
        Ok(m)
    }

    /// Rank-one matrix `a (x) b` for `a` in R^m and `b` in R^d.
    pub fn rank_one(a: &[f64], b: &[f64]) -> Self {
        let mut m = Matrix::zeros(a.len(), b.len());
        for i in 0..a.len() {
            for j in 0..b.len() {
                m.set(i, j, a[i] * b[j]);
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.a[i * MAX_DIM + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.a[i * MAX_DIM + j] = v;
    }

    #[inline]
    pub fn add_assign_scaled(&mut self, other: &Matrix, s: f64) {
        debug_assert_eq!(self.shape(), other.shape());
        for i in 0..self.rows {
            for j in 0..self.cols {
                self.a[i * MAX_DIM + j] += s * other.a[i * MAX_DIM + j];
            }
        }
    }

    pub fn check_shape(&self, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(HomError::DimensionMismatch {
                expected: self.shape(),
                got: other.shape(),
            });
        }
        Ok(())
    }

    /// Frobenius inner product.
    #[inline]
    pub fn dot(&self, other: &Matrix) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += self.a[i * MAX_DIM + j] * other.a[i * MAX_DIM + j];
            }
        }
        s
    }

    /// Frobenius norm.
    #[inline]
    pub fn norm(&self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        let mut out = *self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.a[i * MAX_DIM + j] *= s;
            }
        }
        out
    }

    /// Row-major flat copy of the entries.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                v.push(self.get(i, j));
            }
        }
        v
    }

    /// Determinant by cofactor expansion; exact at these sizes. Square only.
    pub fn det(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(HomError::DimensionMismatch {
                expected: (self.rows, self.rows),
                got: self.shape(),
            });
        }
        Ok(match self.rows {
            1 => self.get(0, 0),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            _ => {
                self.get(0, 0) * (self.get(1, 1) * self.get(2, 2) - self.get(1, 2) * self.get(2, 1))
                    - self.get(0, 1)
                        * (self.get(1, 0) * self.get(2, 2) - self.get(1, 2) * self.get(2, 0))
                    + self.get(0, 2)
                        * (self.get(1, 0) * self.get(2, 1) - self.get(1, 1) * self.get(2, 0))
            }
        })
    }
}

impl Add for Matrix {
    type Output = Matrix;
    fn add(self, rhs: Matrix) -> Matrix {
        debug_assert_eq!(self.shape(), rhs.shape());
        let mut out = self;
        out.add_assign_scaled(&rhs, 1.0);
        out
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        debug_assert_eq!(self.shape(), rhs.shape());
        let mut out = self;
        out.add_assign_scaled(&rhs, -1.0);
        out
    }
}

impl Mul<f64> for Matrix {
    type Output = Matrix;
    fn mul(self, rhs: f64) -> Matrix {
        self.scale(rhs)
    }
}

impl Neg for Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frobenius_norm() {
        let m = Matrix::from_rows(&[&[3.0, 0.0], &[0.0, 4.0]]);
        assert_eq!(m.norm(), 5.0);
    }

    #[test]
    fn rank_one_entries() {
        let m = Matrix::rank_one(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 1), 8.0);
        assert_eq!(m.get(1, 0), 6.0);
    }

    #[test]
    fn det_small_sizes() {
        assert_eq!(Matrix::scalar(5.0).det().unwrap(), 5.0);
        let m2 = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(m2.det().unwrap(), -2.0);
        let m3 = Matrix::from_rows(&[&[2.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 4.0]]);
        assert_eq!(m3.det().unwrap(), 24.0);
        let tri = Matrix::from_rows(&[&[1.0, 0.9], &[0.0, 1.0]]);
        assert_eq!(tri.det().unwrap(), 1.0);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Matrix::zeros(2, 2);
        let b = Matrix::zeros(1, 2);
        assert!(matches!(
            a.check_shape(&b),
            Err(HomError::DimensionMismatch { .. })
        ));
    }
}
