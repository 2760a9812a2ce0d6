//! Compressed sparse row operators over a Fock basis.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Assemble from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Self {
        let mut t: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: keep_cols,
            vals: keep_vals,
            hermitian: false,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            hermitian: true,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; dim])
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut op = Self::from_triplets(
            diag.len(),
            diag.iter()
                .enumerate()
                .map(|(k, &d)| (k, k, Complex64::new(d, 0.0))),
        );
        op.hermitian = true;
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub(crate) fn raw(&self) -> (&[usize], &[usize], &[Complex64]) {
        (&self.row_ptr, &self.cols, &self.vals)
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|k| self.get(k, k)).collect()
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `<x|A|x>`.
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.dim);
        let mut acc = ZERO;
        for r in 0..self.dim {
            let mut row = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.vals[k] * x[self.cols[k]];
            }
            acc += x[r].conj() * row;
        }
        acc
    }

    pub fn adjoint(&self) -> Self {
        let mut op = Self::from_triplets(
            self.dim,
            (0..self.dim).flat_map(|r| self.row(r).map(move |(c, v)| (c, r, v.conj()))),
        );
        op.hermitian = self.hermitian;
        op
    }

    /// `max |A - A†|` over all entries.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Verify hermiticity to `tol` and set the flag.
    pub fn into_hermitian(mut self, tol: f64) -> Result<Self> {
        let res = self.hermiticity_residual();
        if res > tol {
            return Err(Error::NotHermitian(res));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= c;
        }
        out.hermitian = self.hermitian && c.im == 0.0;
        out
    }

    /// `Σ c_k A_k`. All operators must share one dimension.
    pub fn linear_combination(terms: &[(Complex64, &SparseOperator)]) -> Result<Self> {
        let dim = terms.first().map(|t| t.1.dim).unwrap_or(0);
        for (_, op) in terms {
            if op.dim != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim,
                });
            }
        }
        let mut out = Self::from_triplets(
            dim,
            terms.iter().flat_map(|(c, op)| {
                (0..op.dim).flat_map(move |r| op.row(r).map(move |(col, v)| (r, col, *c * v)))
            }),
        );
        out.hermitian = terms.iter().all(|(c, op)| op.hermitian && c.im == 0.0);
        Ok(out)
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &SparseOperator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut acc = vec![ZERO; self.dim];
        let mut mark = vec![usize::MAX; self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.dim {
            touched.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = ZERO;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != ZERO {
                    cols.push(c);
                    vals.push(acc[c]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        Ok(Self {
            dim: self.dim,
            row_ptr,
            cols,
            vals,
            hermitian: false,
        })
    }

    pub fn commutator(&self, other: &SparseOperator) -> Result<Self> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Self::linear_combination(&[(Complex64::new(1.0, 0.0), &ab), (Complex64::new(-1.0, 0.0), &ba)])
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &SparseOperator) -> Result<f64> {
        let d = Self::linear_combination(&[
            (Complex64::new(1.0, 0.0), self),
            (Complex64::new(-1.0, 0.0), other),
        ])?;
        Ok(d.max_abs())
    }

    /// Restriction to the rows and columns listed in `indices`.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            pos[i] = k;
        }
        let mut out = Self::from_triplets(
            indices.len(),
            indices.iter().enumerate().flat_map(|(k, &i)| {
                let pos = &pos;
                self.row(i)
                    .filter(move |(c, _)| pos[*c] != usize::MAX)
                    .map(move |(c, v)| (k, pos[c], v))
            }),
        );
        out.hermitian = self.hermitian;
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, ZERO);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Coordinate dump, one `row col re im` line per stored entry.
    pub fn write_coordinates(&self, mut w: impl Write) -> std::io::Result<()> {
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                writeln!(w, "{r} {c} {:.11e} {:.11e}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// Real-valued CSR with 32-bit column indices, used in the time-stepping hot loop.
#[derive(Debug, Clone)]
pub(crate) struct RealCsr {
    pub row_ptr: Vec<u32>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl RealCsr {
    pub fn from_operator(op: &SparseOperator) -> Result<Self> {
        if !op.is_real() {
            return Err(Error::InvalidParameter(
                "fast kernel requires a real operator".into(),
            ));
        }
        if op.dim() > u32::MAX as usize {
            return Err(Error::InvalidParameter("operator too large for u32 indices".into()));
        }
        let (rp, cols, vals) = op.raw();
        Ok(Self {
            row_ptr: rp.iter().map(|&x| x as u32).collect(),
            cols: cols.iter().map(|&x| x as u32).collect(),
            vals: vals.iter().map(|v| v.re).collect(),
        })
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn max_row_sum(&self) -> f64 {
        self.row_ptr
            .windows(2)
            .map(|w| self.vals[w[0] as usize..w[1] as usize].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let op = SparseOperator::from_triplets(
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0)), (1, 0, c(0.0, 0.0))],
        );
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(0, 1), c(3.0, 0.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseOperator::from_triplets(
            3,
            vec![(0, 1, c(1.0, 1.0)), (1, 2, c(2.0, 0.0)), (2, 0, c(0.5, -1.0)), (1, 1, c(3.0, 0.0))],
        );
        let b = a.adjoint();
        let p = a.matmul(&b).unwrap().to_dense();
        let q = a.to_dense() * b.to_dense();
        assert!((p - q).norm() < 1e-14);
    }

    #[test]
    fn hermiticity_check() {
        let h = SparseOperator::from_triplets(2, vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0))]);
        assert!(h.into_hermitian(1e-14).is_ok());
        let n = SparseOperator::from_triplets(2, vec![(0, 1, c(0.0, 1.0))]);
        assert!(n.into_hermitian(1e-14).is_err());
    }
}
