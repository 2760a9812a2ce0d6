//! Lowest eigenpair of a Hermitian sparse operator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Below this dimension a dense Hermitian eigensolver is used.
pub const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    /// `|A x - λ x|` for the returned unit vector.
    pub residual: f64,
}

pub fn residual_norm(op: &SparseOperator, value: f64, x: &[Complex64]) -> f64 {
    let y = op.apply(x);
    y.iter()
        .zip(x)
        .map(|(a, b)| (a - b * value).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Lowest eigenvalue and a unit eigenvector. `tol` bounds the residual norm.
pub fn lowest_eigenpair(op: &SparseOperator, tol: f64) -> Result<Eigenpair> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::EigenSolver("empty operator".into()));
    }
    if !op.is_hermitian() {
        return Err(Error::EigenSolver("operator is not marked hermitian".into()));
    }
    if n <= DENSE_LIMIT {
        return dense_lowest(op);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let start: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() + 0.5, 0.0))
        .collect();
    lanczos(op, start, tol, 160, 60)
}

fn dense_lowest(op: &SparseOperator) -> Result<Eigenpair> {
    let eig = op
        .to_dense()
        .try_symmetric_eigen(1e-15, 100_000)
        .ok_or_else(|| Error::EigenSolver("dense Hermitian eigensolver did not converge".into()))?;
    let (k, &value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let vector: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
    let residual = residual_norm(op, value, &vector);
    Ok(Eigenpair {
        value,
        vector,
        residual,
    })
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

/// Restarted Lanczos with full reorthogonalization.
fn lanczos(
    op: &SparseOperator,
    mut start: Vec<Complex64>,
    tol: f64,
    krylov: usize,
    restarts: usize,
) -> Result<Eigenpair> {
    let n = op.dim();
    let krylov = krylov.min(n);
    let mut best_residual = f64::INFINITY;
    for _ in 0..restarts {
        normalize(&mut start);
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        let mut ritz: Option<(f64, DVector<f64>)> = None;
        for j in 0..krylov {
            op.apply_into(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let done = b < 1e-13 * a.abs().max(1.0) || j + 1 == krylov;
            if j % 8 == 7 || done {
                let (theta, s) = tridiagonal_lowest(&alpha, &beta)?;
                let estimate = b * s[s.len() - 1].abs();
                ritz = Some((theta, s));
                if estimate < 0.1 * tol || done {
                    break;
                }
            }
            beta.push(b);
            let next: Vec<Complex64> = w.iter().map(|x| x / b).collect();
            basis.push(next);
        }
        let (theta, s) = ritz.expect("at least one Ritz evaluation");
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (coef, v) in s.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += vi * *coef);
        }
        normalize(&mut x);
        let residual = residual_norm(op, theta, &x);
        if residual < tol {
            return Ok(Eigenpair {
                value: theta,
                vector: x,
                residual,
            });
        }
        best_residual = best_residual.min(residual);
        start = x;
    }
    Err(Error::EigenSolver(format!(
        "Lanczos did not reach residual {tol:.1e} (best {best_residual:.3e})"
    )))
}

fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> Result<(f64, DVector<f64>)> {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t
        .try_symmetric_eigen(1e-15, 100_000)
        .ok_or_else(|| Error::EigenSolver("tridiagonal eigensolver did not converge".into()))?;
    let (i, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    Ok((theta, eig.eigenvectors.column(i).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lanczos_matches_known_spectrum() {
        // Path-graph Laplacian-like chain with known lowest eigenvalue.
        let n = 600;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, Complex64::new(2.0, 0.0)));
            if i + 1 < n {
                t.push((i, i + 1, Complex64::new(-1.0, 0.0)));
                t.push((i + 1, i, Complex64::new(-1.0, 0.0)));
            }
        }
        let op = SparseOperator::from_triplets(n, t).into_hermitian(0.0).unwrap();
        let e = lowest_eigenpair(&op, 1e-9).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((e.value - exact).abs() < 1e-10);
        assert!(e.residual < 1e-9);
    }
}
