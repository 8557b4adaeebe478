//! Small dense row-major matrices: products, induced norms, a cyclic Jacobi
//! eigensolver for symmetric matrices and a pivoted LU solve.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrgError};
use crate::pairings::{NormKind, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(SrgError::EmptyVector);
        }
        let n_cols = rows[0].len();
        if n_cols == 0 {
            return Err(SrgError::EmptyVector);
        }
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(SrgError::DimensionMismatch {
                    expected: n_cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(SrgError::NonFinite { index, value });
        }
        Ok(Matrix {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn square_from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Self::from_rows(rows)?;
        m.require_square()?;
        Ok(m)
    }

    pub fn zeros(n: usize) -> Self {
        Matrix {
            rows: n,
            cols: n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(SrgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix {
            rows: self.cols,
            cols: self.rows,
            data: vec![0.0; self.data.len()],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn scaled(&self, alpha: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SrgError::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(SrgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix {
            rows: self.rows,
            cols: other.cols,
            data: vec![0.0; self.rows * other.cols],
        };
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.cols {
            return Err(SrgError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Vector) -> Vector {
        Vector::from_vec_unchecked(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> Result<Matrix> {
        self.require_square()?;
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                s.set(i, j, 0.5 * (self.get(i, j) + self.get(j, i)));
            }
        }
        Ok(s)
    }

    /// Diagonal of a square matrix.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Operator norm induced by the given vector norm (l2 via the Jacobi eigensolver on `A^T A`).
    pub fn induced_norm(&self, kind: NormKind) -> Result<f64> {
        Ok(match kind {
            NormKind::L1 => (0..self.cols)
                .map(|j| (0..self.rows).map(|i| self.get(i, j).abs()).sum::<f64>())
                .fold(0.0, f64::max),
            NormKind::LInf => (0..self.rows)
                .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            NormKind::L2 => {
                let gram = self.transpose().matmul(self)?;
                let eig = symmetric_eigenvalues(&gram, JACOBI_TOL)?;
                eig.last().copied().unwrap_or(0.0).max(0.0).sqrt()
            }
        })
    }

    /// Solve `A x = b` by LU with partial pivoting.
    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        let n = self.require_square()?;
        if b.len() != n {
            return Err(SrgError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut a = self.data.clone();
        let mut x = b.as_slice().to_vec();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&p, &q| a[p * n + k].abs().total_cmp(&a[q * n + k].abs()))
                .expect("nonempty range");
            if a[pivot * n + k].abs() <= scale * 1e-14 {
                return Err(SrgError::Singular);
            }
            if pivot != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot * n + j);
                }
                x.swap(k, pivot);
            }
            for i in k + 1..n {
                let f = a[i * n + k] / a[k * n + k];
                if f != 0.0 {
                    for j in k..n {
                        a[i * n + j] -= f * a[k * n + j];
                    }
                    x[i] -= f * x[k];
                }
            }
        }
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
            x[k] = (x[k] - s) / a[k * n + k];
        }
        Vector::new(x)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.require_square()?;
        let mut inv = Matrix::zeros(n);
        for j in 0..n {
            let col = self.solve(&Vector::basis(n, j))?;
            for i in 0..n {
                inv.set(i, j, col[i]);
            }
        }
        Ok(inv)
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = SrgError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

/// Off-diagonal Frobenius norm at which Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi rotations).
///
/// Only the upper triangle is trusted; the input is symmetrised first.
pub fn symmetric_eigenvalues(a: &Matrix, tol: f64) -> Result<Vec<f64>> {
    let n = a.require_square()?;
    let mut m = a.symmetric_part()?;
    let scale = m.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut eig = m.diagonal();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn jacobi_matches_known_spectrum() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigenvalues(&a, JACOBI_TOL).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 3.0, epsilon = 1e-12);
        let d = Matrix::from_rows(&[vec![-4.0, 0.0], vec![0.0, 5.0]]).unwrap();
        assert_eq!(symmetric_eigenvalues(&d, JACOBI_TOL).unwrap(), vec![-4.0, 5.0]);
    }

    #[test]
    fn solve_and_inverse() {
        let a = Matrix::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 2.0, 5.0]])
            .unwrap();
        let b = Vector::from_slice(&[1.0, 2.0, 3.0]).unwrap();
        let x = a.solve(&b).unwrap();
        let r = &a.apply(&x).unwrap() - &b;
        assert!(r.norm(NormKind::LInf) < 1e-14);
        let inv = a.inverse().unwrap();
        let id = a.matmul(&inv).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(id.get(i, j), if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        let sing = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(sing.solve(&Vector::zeros(2)), Err(SrgError::Singular)));
    }

    #[test]
    fn induced_norms() {
        let a = Matrix::from_rows(&[vec![1.0, -3.0], vec![2.0, -8.0]]).unwrap();
        assert_eq!(a.induced_norm(NormKind::L1).unwrap(), 11.0);
        assert_eq!(a.induced_norm(NormKind::LInf).unwrap(), 10.0);
        let d = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -4.0]]).unwrap();
        assert_abs_diff_eq!(d.induced_norm(NormKind::L2).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_ragged_and_non_square() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        let r = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(r.require_square(), Err(SrgError::NonSquare { rows: 1, cols: 2 })));
    }
}
