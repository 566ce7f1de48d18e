//! Geometric descent, accelerated gradient and FISTA, with their potentials.

pub mod ag;
pub mod fista;
pub mod gd_convex;
pub mod gd_strong;

use crate::model::{CompositeProblem, Vector};

pub use ag::{Ag, AgAudit, AgState, Sigma0};
pub use fista::FistaState;
pub use gd_convex::GdConvexState;
pub use gd_strong::GdStrongState;

pub const DEFAULT_EPS: f64 = 1e-8;

/// A known minimizer, used only by verification code.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub x: Vector,
    pub value: f64,
}

impl Optimum {
    pub fn new(problem: &CompositeProblem, x: Vector) -> Self {
        let value = problem.objective(&x);
        Self { x, value }
    }

    /// `F(p) − F*`, cancellation-free for quadratics.
    pub fn gap(&self, problem: &CompositeProblem, p: &Vector) -> f64 {
        problem.objective_difference(p, &self.x)
    }
}

/// `‖y−x*‖² + k(k+1)(F(p)−F*)/(2L)`.
pub fn convex_potential(problem: &CompositeProblem, y: &Vector, p: &Vector, k: usize, opt: &Optimum) -> f64 {
    let k = k as f64;
    (y - &opt.x).norm_squared() + k * (k + 1.0) * opt.gap(problem, p) / (2.0 * problem.lipschitz())
}

/// `‖y−x*‖² + 2(F(p)−F*)/α`.
pub fn strong_potential(problem: &CompositeProblem, y: &Vector, p: &Vector, opt: &Optimum) -> f64 {
    (y - &opt.x).norm_squared() + 2.0 * opt.gap(problem, p) / problem.strong_convexity()
}

/// `(2L‖x₀−x*‖² + 2(F(x₀)−F*))/(k(k+1))`.
pub fn sublinear_bound(problem: &CompositeProblem, x0: &Vector, k: usize, opt: &Optimum) -> f64 {
    let k = k as f64;
    let l = problem.lipschitz();
    (2.0 * l * (x0 - &opt.x).norm_squared() + 2.0 * opt.gap(problem, x0)) / (k * (k + 1.0))
}

/// `√(2L(F(x₀)−F*)/(k+1))`.
pub fn stationarity_rate(problem: &CompositeProblem, x0: &Vector, k: usize, f_star: f64) -> f64 {
    (2.0 * problem.lipschitz() * (problem.objective(x0) - f_star) / (k as f64 + 1.0)).sqrt()
}
