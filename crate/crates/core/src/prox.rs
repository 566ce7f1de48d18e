//! Prox operators, the forward-backward step and the prox-gradient mapping.

use crate::model::{CompositeProblem, SimpleConvexTerm, Vector};

/// Output of one forward-backward step from `x` with step `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxGradResult {
    /// `x̄ = prox_{tΨ}(x − t∇f(x))`
    pub point: Vector,
    /// `G_t(x) = (x − x̄)/t`
    pub grad_map: Vector,
    pub step: f64,
}

impl ProxGradResult {
    pub fn norm(&self) -> f64 {
        self.grad_map.norm()
    }

    /// `x − G/scale`; with `scale = α` this is the long step `x̿`.
    pub fn scaled_step(&self, x: &Vector, scale: f64) -> Vector {
        x - &self.grad_map / scale
    }
}

/// `argmin_z Ψ(z) + ‖x − z‖²/(2t)`.
pub fn prox(psi: &SimpleConvexTerm, t: f64, x: &Vector) -> Vector {
    debug_assert!(t > 0.0);
    match psi {
        SimpleConvexTerm::Zero => x.clone(),
        SimpleConvexTerm::Ball { radius } => {
            let nx = x.norm();
            if nx <= *radius {
                x.clone()
            } else {
                x * (radius / nx)
            }
        }
        SimpleConvexTerm::Box { lower, upper } => {
            Vector::from_fn(x.len(), |i, _| x[i].clamp(lower[i], upper[i]))
        }
        SimpleConvexTerm::L1 { weight } => {
            let tau = t * weight;
            x.map(|v| v.signum() * (v.abs() - tau).max(0.0))
        }
    }
}

pub fn forward_backward(problem: &CompositeProblem, t: f64, x: &Vector) -> ProxGradResult {
    let trial = x - problem.gradient(x) * t;
    let point = prox(problem.psi(), t, &trial);
    let grad_map = (x - &point) / t;
    ProxGradResult { point, grad_map, step: t }
}

/// The step `t = 1/L` used throughout the methods.
pub fn prox_grad(problem: &CompositeProblem, x: &Vector) -> ProxGradResult {
    forward_backward(problem, 1.0 / problem.lipschitz(), x)
}

/// `2‖G_{1/L}(x)‖`, an upper bound on `dist(0, ∂F(x̄))`.
pub fn stationarity_bound(problem: &CompositeProblem, x: &Vector) -> f64 {
    2.0 * prox_grad(problem, x).norm()
}

/// `F(x̄) ≤ F(x) − ‖G‖²/(2L)` up to a relative rounding slack.
pub fn descent_check(problem: &CompositeProblem, x: &Vector) -> bool {
    let l = problem.lipschitz();
    let pg = prox_grad(problem, x);
    let fx = problem.objective(x);
    let fbar = problem.objective(&pg.point);
    fbar <= fx - pg.norm().powi(2) / (2.0 * l) + slack(fx)
}

/// Relative slack `1e−10·(1+|scale|)` used in every theorem comparison.
pub fn slack(scale: f64) -> f64 {
    if scale.is_finite() {
        1e-10 * (1.0 + scale.abs())
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Quadratic;
    use nalgebra::DMatrix;

    fn v(e: &[f64]) -> Vector {
        Vector::from_row_slice(e)
    }

    fn scalar_problem(a: f64, b: f64, psi: SimpleConvexTerm) -> CompositeProblem {
        let q = Quadratic::diagonal(v(&[a]), v(&[b])).unwrap();
        CompositeProblem::quadratic(q, psi).unwrap()
    }

    #[test]
    fn ball_projection() {
        let psi = SimpleConvexTerm::ball(1.0).unwrap();
        let p = prox(&psi, 0.3, &v(&[3.0, 4.0]));
        assert!((p - v(&[0.6, 0.8])).norm() < 1e-15);
    }

    #[test]
    fn zero_is_identity() {
        let x = v(&[1.5, -2.0, 7.0]);
        assert_eq!(prox(&SimpleConvexTerm::Zero, 2.0, &x), x);
    }

    #[test]
    fn soft_threshold() {
        let psi = SimpleConvexTerm::l1(1.0).unwrap();
        assert_eq!(prox(&psi, 0.5, &v(&[2.0, -0.3, 0.0])), v(&[1.5, 0.0, 0.0]));
    }

    #[test]
    fn box_clamp() {
        let psi = SimpleConvexTerm::boxed(v(&[-1.0, 0.0]), v(&[1.0, 0.5])).unwrap();
        assert_eq!(prox(&psi, 1.0, &v(&[-3.0, 0.25])), v(&[-1.0, 0.25]));
    }

    #[test]
    fn gradient_step_to_minimizer() {
        let p = scalar_problem(1.0, 0.0, SimpleConvexTerm::Zero);
        let r = forward_backward(&p, 1.0, &v(&[1.0]));
        assert_eq!(r.point, v(&[0.0]));
        assert_eq!(r.grad_map, v(&[1.0]));
    }

    #[test]
    fn projected_step_on_canonical_instance() {
        let q = Quadratic::dense(DMatrix::identity(2, 2), v(&[2.0, 0.0])).unwrap();
        let p = CompositeProblem::quadratic(q, SimpleConvexTerm::ball(1.0).unwrap()).unwrap();
        let r = forward_backward(&p, 1.0, &v(&[0.0, 0.0]));
        assert_eq!(r.point, v(&[1.0, 0.0]));
        assert_eq!(r.grad_map, v(&[-1.0, 0.0]));
    }

    #[test]
    fn stationarity_values() {
        let p = scalar_problem(1.0, 0.0, SimpleConvexTerm::Zero);
        assert_eq!(stationarity_bound(&p, &v(&[1.0])), 2.0);
        let p = scalar_problem(2.0, 3.0, SimpleConvexTerm::Zero);
        assert_eq!(stationarity_bound(&p, &v(&[1.5])), 0.0);
    }

    #[test]
    fn descent_at_stationary_point() {
        let p = scalar_problem(2.0, 3.0, SimpleConvexTerm::Zero);
        assert!(descent_check(&p, &v(&[1.5])));
    }

    #[test]
    fn reconstruction_identity() {
        let q = Quadratic::dense(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]), v(&[4.0, -1.0]))
            .unwrap();
        let p = CompositeProblem::quadratic(q, SimpleConvexTerm::ball(0.5).unwrap()).unwrap();
        let x = v(&[0.2, -0.7]);
        let r = prox_grad(&p, &x);
        let rebuilt = &x - &r.grad_map * r.step;
        assert!((rebuilt - &r.point).norm() <= 1e-15 * (1.0 + x.norm()));
    }
}
