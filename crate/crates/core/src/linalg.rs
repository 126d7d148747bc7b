//! Dense storage: packed symmetric matrices and small row-major float matrices.

use rug::Assign;
use serde::{Deserialize, Serialize};

use crate::numerics::BigFloat;

/// Symmetric matrix stored as its upper triangle, row by row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T> SymMatrix<T> {
    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle (i ≤ j, zero-based).
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Takes ownership of an upper-packed buffer.
    pub fn from_packed(n: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == n * (n + 1) / 2).then_some(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.index(i, j);
        self.data[k] = v;
    }

    pub fn packed(&self) -> &[T] {
        &self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> SymMatrix<U> {
        SymMatrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    /// Leading k×k principal submatrix.
    pub fn leading(&self, k: usize) -> SymMatrix<T>
    where
        T: Clone,
    {
        SymMatrix::from_fn(k, |i, j| self.get(i, j).clone())
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }
}

/// Row-major dense matrix of p-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMatrix {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<BigFloat>,
}

impl FloatMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Self { rows, cols, prec, data: vec![BigFloat::new(prec); rows * cols] }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m.set(i, i, BigFloat::with_val(prec, 1u32));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, prec: u32, mut f: impl FnMut(usize, usize) -> BigFloat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(BigFloat::with_val(prec, f(i, j)));
            }
        }
        Self { rows, cols, prec, data }
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(values: &[BigFloat], prec: u32) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n, prec);
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, BigFloat::with_val(prec, v));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn get(&self, i: usize, j: usize) -> &BigFloat {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut BigFloat {
        &mut self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigFloat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigFloat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(cols: &[Vec<BigFloat>], rows: usize, prec: u32) -> Self {
        Self::from_fn(rows, cols.len(), prec, |i, j| cols[j][i].clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.prec, |i, j| self.get(j, i).clone())
    }

    pub fn matmul(&self, other: &FloatMatrix) -> FloatMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let prec = self.prec.max(other.prec);
        let mut out = FloatMatrix::zeros(self.rows, other.cols, prec);
        let mut acc = BigFloat::new(prec);
        for i in 0..self.rows {
            for j in 0..other.cols {
                acc.assign(0u32);
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc.clone());
            }
        }
        out
    }

    pub fn matvec(&self, v: &[BigFloat]) -> Vec<BigFloat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = BigFloat::new(self.prec);
                for (k, vk) in v.iter().enumerate() {
                    acc += self.get(i, k) * vk;
                }
                acc
            })
            .collect()
    }

    /// Aᵀ A as a packed symmetric matrix.
    pub fn gram_of_columns(&self) -> SymMatrix<BigFloat> {
        SymMatrix::from_fn(self.cols, |i, j| {
            let mut acc = BigFloat::new(self.prec);
            for k in 0..self.rows {
                acc += self.get(k, i) * self.get(k, j);
            }
            acc
        })
    }

    pub fn sub(&self, other: &FloatMatrix) -> FloatMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        FloatMatrix::from_fn(self.rows, self.cols, self.prec, |i, j| {
            BigFloat::with_val(self.prec, self.get(i, j) - other.get(i, j))
        })
    }

    pub fn frobenius_norm(&self) -> BigFloat {
        let mut acc = BigFloat::new(self.prec);
        for x in &self.data {
            acc += BigFloat::with_val(self.prec, x.square_ref());
        }
        acc.sqrt()
    }

    /// Largest |entry|.
    pub fn max_abs(&self) -> BigFloat {
        let mut best = BigFloat::new(self.prec);
        for x in &self.data {
            let a = BigFloat::with_val(self.prec, x.abs_ref());
            if a > best {
                best = a;
            }
        }
        best
    }
}

pub fn dot(a: &[BigFloat], b: &[BigFloat], prec: u32) -> BigFloat {
    let mut acc = BigFloat::new(prec);
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

pub fn norm(a: &[BigFloat], prec: u32) -> BigFloat {
    dot(a, a, prec).sqrt()
}
