//! Dense real symmetric matrices.

use std::fmt::Write as _;
use std::ops::{Add, Sub};

use crate::error::{Error, Result};

/// Dense symmetric matrix, stored in full row-major form. Every write goes to
/// both `(i, j)` and `(j, i)`, so the two halves are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Fills from `f(i, j)` evaluated on the lower triangle `j <= i`.
    pub fn from_lower_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds from a full row-major array, failing if it is not exactly symmetric.
    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimMismatch(data.len(), dim * dim));
        }
        for i in 0..dim {
            for j in 0..i {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(Error::BadParams(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Plain matrix product; the result is symmetrized (products of symmetric
    /// matrices are symmetric only when they commute, as powers do).
    pub fn mul_sym(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        let n = self.dim;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(SymMatrix::from_lower_fn(n, |i, j| {
            0.5 * (out[i * n + j] + out[j * n + i])
        }))
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(self.dim, other.dim));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn principal_submatrix(&self, keep: &[usize]) -> SymMatrix {
        SymMatrix::from_lower_fn(keep.len(), |i, j| self.get(keep[i], keep[j]))
    }

    /// Text dump: a `dim` header line, then the lower triangle row by row.
    pub fn dump_lower(&self) -> String {
        let mut out = format!("{}\n", self.dim);
        for i in 0..self.dim {
            let row: Vec<String> = (0..=i).map(|j| format!("{:e}", self.get(i, j))).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn parse_lower(text: &str) -> Result<SymMatrix> {
        let mut lines = text.lines().enumerate();
        let (_, head) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing dimension".into(),
        })?;
        let dim: usize = head.trim().parse().map_err(|e| Error::Parse {
            line: 1,
            msg: format!("dimension: {e}"),
        })?;
        let mut m = SymMatrix::zeros(dim);
        for i in 0..dim {
            let (ln, l) = lines.next().ok_or(Error::Parse {
                line: i + 2,
                msg: "missing row".into(),
            })?;
            let vals: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: ln + 1,
                    msg: e.to_string(),
                })?;
            if vals.len() != i + 1 {
                return Err(Error::Parse {
                    line: ln + 1,
                    msg: format!("row {i} has {} entries, expected {}", vals.len(), i + 1),
                });
            }
            for (j, v) in vals.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    fn zip_with(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}
