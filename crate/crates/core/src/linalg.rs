//! Dense factorizations generic over [`Real`], so duals pass through solves.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("expected a square matrix, got {rows}×{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("right-hand side has {got} rows, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T: Real> {
    l: DMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors a symmetric matrix; only the lower triangle is read.
    pub fn factor(a: &DMatrix<T>) -> Result<Self, LinalgError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(LinalgError::NotSquare {
                rows: n,
                cols: a.ncols(),
            });
        }
        let mut l = DMatrix::<T>::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            let pivot = d.value();
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { index: j, pivot });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn l(&self) -> &DMatrix<T> {
        &self.l
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, LinalgError> {
        let n = self.l.nrows();
        if b.len() != n {
            return Err(LinalgError::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        Ok(y)
    }

    /// Solves for every column of `b`.
    pub fn solve_matrix(&self, b: &DMatrix<T>) -> Result<DMatrix<T>, LinalgError> {
        let mut out = DMatrix::zeros(b.nrows(), b.ncols());
        for c in 0..b.ncols() {
            let col: Vec<T> = b.column(c).iter().copied().collect();
            for (r, v) in self.solve(&col)?.into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        Ok(out)
    }

    /// `A⁻¹`, for small task-space matrices only.
    pub fn inverse(&self) -> DMatrix<T> {
        let n = self.l.nrows();
        self.solve_matrix(&DMatrix::identity(n, n))
            .expect("identity has matching rows")
    }
}

/// Determinant by LU with partial pivoting (pivot choice on primal values).
pub fn determinant<T: Real>(a: &DMatrix<T>) -> Result<T, LinalgError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinalgError::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    let mut m = a.clone();
    let mut det = T::one();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[(x, c)].value().abs().total_cmp(&m[(y, c)].value().abs()))
            .expect("non-empty range");
        if m[(p, c)].value() == 0.0 {
            return Ok(T::zero());
        }
        if p != c {
            m.swap_rows(p, c);
            det = -det;
        }
        let pivot = m[(c, c)];
        det *= pivot;
        for r in c + 1..n {
            let f = m[(r, c)] / pivot;
            for k in c + 1..n {
                let sub = f * m[(c, k)];
                m[(r, k)] -= sub;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spd() -> DMatrix<f64> {
        let b = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.5, 3.0, 1.0, -1.0, 0.2, 1.5]);
        &b * b.transpose() + DMatrix::identity(3, 3) * 0.1
    }

    #[test]
    fn cholesky_solves() {
        let a = spd();
        let chol = Cholesky::factor(&a).unwrap();
        let x = chol.solve(&[1.0, -2.0, 0.5]).unwrap();
        let back = &a * nalgebra::DVector::from_vec(x);
        assert_relative_eq!(back.as_slice(), &[1.0, -2.0, 0.5][..], epsilon = 1e-12);
        assert_relative_eq!(
            chol.inverse() * &a,
            DMatrix::identity(3, 3),
            epsilon = 1e-12
        );
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            Cholesky::factor(&a),
            Err(LinalgError::NotPositiveDefinite { index: 1, .. })
        ));
        let z = DMatrix::<f64>::zeros(2, 2);
        assert!(Cholesky::factor(&z).is_err());
    }

    #[test]
    fn determinant_matches_nalgebra() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 1.0, 1.0, -1.0, 3.0, 4.0, 0.5, 2.0]);
        assert_relative_eq!(determinant(&a).unwrap(), a.determinant(), epsilon = 1e-12);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(determinant(&singular).unwrap(), 0.0);
    }
}
