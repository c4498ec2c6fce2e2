//! Dense equality-constrained quadratic programs.
//!
//! ```text
//! minimize    ½ xᵀ P x + qᵀ x
//! subject to  A x = b
//! ```
//!
//! solved through the KKT system
//!
//! ```text
//! [ P  Aᵀ ] [ x ]   [ -q ]
//! [ A  0  ] [ λ ] = [  b ]
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EqualityQp {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub a_eq: DMatrix<f64>,
    pub b_eq: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Lagrange multipliers of the equality constraints.
    pub multipliers: DVector<f64>,
}

impl EqualityQp {
    pub fn new(
        hessian: DMatrix<f64>,
        linear: DVector<f64>,
        a_eq: DMatrix<f64>,
        b_eq: DVector<f64>,
    ) -> Result<Self> {
        let n = hessian.nrows();
        if hessian.ncols() != n || linear.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: linear.len(),
            });
        }
        if a_eq.ncols() != n || a_eq.nrows() != b_eq.len() {
            return Err(Error::DimensionMismatch {
                expected: a_eq.nrows(),
                got: b_eq.len(),
            });
        }
        Ok(Self {
            hessian,
            linear,
            a_eq,
            b_eq,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.hessian.nrows()
    }

    pub fn n_constraints(&self) -> usize {
        self.a_eq.nrows()
    }

    pub fn kkt_matrix(&self) -> DMatrix<f64> {
        let (n, m) = (self.n_vars(), self.n_constraints());
        let mut k = DMatrix::zeros(n + m, n + m);
        k.view_mut((0, 0), (n, n)).copy_from(&self.hessian);
        k.view_mut((0, n), (n, m)).copy_from(&self.a_eq.transpose());
        k.view_mut((n, 0), (m, n)).copy_from(&self.a_eq);
        k
    }

    /// Solves the KKT system by LU with partial pivoting.
    pub fn solve(&self) -> Result<QpSolution> {
        let (n, m) = (self.n_vars(), self.n_constraints());
        let mut rhs = DVector::zeros(n + m);
        rhs.rows_mut(0, n).copy_from(&(-&self.linear));
        rhs.rows_mut(n, m).copy_from(&self.b_eq);
        let sol = self
            .kkt_matrix()
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularKkt)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularKkt);
        }
        Ok(QpSolution {
            x: sol.rows(0, n).into_owned(),
            multipliers: sol.rows(n, m).into_owned(),
        })
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.hessian * x)) + self.linear.dot(x)
    }

    /// Max-norm of `A x − b`.
    pub fn constraint_residual(&self, x: &DVector<f64>) -> f64 {
        (&self.a_eq * x - &self.b_eq).amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_onto_a_line() {
        // min (x-3)² + (y-1)²  s.t. x + y = 2  →  (2, 0)
        let qp = EqualityQp::new(
            DMatrix::identity(2, 2) * 2.0,
            DVector::from_vec(vec![-6.0, -2.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DVector::from_vec(vec![2.0]),
        )
        .unwrap();
        let s = qp.solve().unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
        assert!(qp.constraint_residual(&s.x) < 1e-12);
        // stationarity: P x + q + Aᵀ λ = 0
        let grad = &qp.hessian * &s.x + &qp.linear + qp.a_eq.transpose() * &s.multipliers;
        assert!(grad.amax() < 1e-12);
    }

    #[test]
    fn dependent_constraints_are_singular() {
        let qp = EqualityQp::new(
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]),
            DVector::from_vec(vec![1.0, 2.0]),
        )
        .unwrap();
        assert!(matches!(qp.solve(), Err(Error::SingularKkt)));
    }

    #[test]
    fn shape_mismatch() {
        assert!(EqualityQp::new(
            DMatrix::identity(2, 2),
            DVector::zeros(3),
            DMatrix::zeros(1, 2),
            DVector::zeros(1)
        )
        .is_err());
    }
}
