//! The trust-region subproblem `min ½xᵀAx − bᵀx s.t. ‖x‖ ≤ Δ`: the Lanczos
//! method, its tridiagonal subproblem, and a dense spectral reference solver.

pub mod dense;
pub mod lanczos;
pub mod tridiagonal;

use crate::model::{Quadratic, Vector};

pub use dense::{dense_trs_oracle, spectral_trs, SpectralSolution};
pub use lanczos::{LanczosOptions, LanczosState};
pub use tridiagonal::{solve_tridiagonal_trs, Tridiagonal};

pub const SECULAR_TOL: f64 = 1e-10;
pub const SECULAR_MAX_ITERS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktResiduals {
    /// `‖(A+μI)x − b‖`
    pub stationarity: f64,
    /// `μ|Δ − ‖x‖|`
    pub complementarity: f64,
    /// `max(0, ‖x‖ − Δ)`
    pub feasibility: f64,
    /// `λ₁(A) + μ`, nonnegative at a global solution.
    pub curvature_margin: f64,
}

impl KktResiduals {
    /// Largest of the three residuals plus any negative curvature margin.
    pub fn worst(&self) -> f64 {
        self.stationarity
            .max(self.complementarity)
            .max(self.feasibility)
            .max(-self.curvature_margin)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrsSolution {
    pub x: Vector,
    pub mu: f64,
    pub kkt: KktResiduals,
}

pub fn kkt_certify(quad: &Quadratic, delta: f64, x: &Vector, mu: f64) -> KktResiduals {
    let stationarity = (quad.apply(x) + x * mu - quad.b()).norm();
    let nx = x.norm();
    let complementarity = if delta.is_finite() { mu * (delta - nx).abs() } else { 0.0 };
    KktResiduals {
        stationarity,
        complementarity,
        feasibility: (nx - delta).max(0.0),
        curvature_margin: quad.lambda_min() + mu,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn canonical_solution_certifies() {
        let q = Quadratic::dense(DMatrix::identity(2, 2), Vector::from_vec(vec![2.0, 0.0])).unwrap();
        let r = kkt_certify(&q, 1.0, &Vector::from_vec(vec![1.0, 0.0]), 1.0);
        assert!(r.stationarity <= 1e-12 && r.complementarity <= 1e-12 && r.feasibility == 0.0);
        assert_eq!(r.curvature_margin, 2.0);
    }

    #[test]
    fn wrong_multiplier_is_reported() {
        let q = Quadratic::dense(DMatrix::identity(2, 2), Vector::from_vec(vec![2.0, 0.0])).unwrap();
        let r = kkt_certify(&q, 1.0, &Vector::from_vec(vec![1.0, 0.0]), 0.5);
        assert!((r.stationarity - 0.5).abs() < 1e-15);
        assert!(r.worst() > 0.1);
    }
}
