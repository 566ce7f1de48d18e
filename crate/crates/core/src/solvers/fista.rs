//! FISTA with the auxiliary `y` sequence used by its potential.

use crate::model::{CompositeProblem, Vector};
use crate::prox::prox_grad;

#[derive(Clone, Debug)]
pub struct FistaState {
    pub k: usize,
    pub x: Vector,
    pub x_prev: Vector,
    pub w: Vector,
    /// `α_k`
    pub alpha: f64,
    /// `‖G_{1/L}(w_{k−1})‖` from the latest step.
    pub last_g_norm: Option<f64>,
}

pub fn next_alpha(a: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * a * a).sqrt())
}

impl FistaState {
    pub fn init(x0: &Vector) -> Self {
        Self { k: 0, x: x0.clone(), x_prev: x0.clone(), w: x0.clone(), alpha: 1.0, last_g_norm: None }
    }

    pub fn step(&mut self, problem: &CompositeProblem) {
        let pg = prox_grad(problem, &self.w);
        let x_new = pg.point.clone();
        let a_next = next_alpha(self.alpha);
        let w_new = &x_new + (&x_new - &self.x) * ((self.alpha - 1.0) / a_next);
        self.x_prev = std::mem::replace(&mut self.x, x_new);
        self.w = w_new;
        self.alpha = a_next;
        self.k += 1;
        self.last_g_norm = Some(pg.norm());
    }

    /// `y_k = x_k + α_k(w_k − x_k)`
    pub fn y(&self) -> Vector {
        &self.x + (&self.w - &self.x) * self.alpha
    }

    pub fn converged(&self, eps: f64, lipschitz: f64) -> bool {
        self.last_g_norm.is_some_and(|g| g <= eps * lipschitz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Quadratic, SimpleConvexTerm};
    use crate::prox::forward_backward;

    #[test]
    fn alpha_sequence() {
        let a1 = next_alpha(1.0);
        assert!((a1 - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!(next_alpha(a1) > a1);
    }

    #[test]
    fn first_step_is_plain_forward_backward() {
        let q = Quadratic::diagonal(Vector::from_vec(vec![1.0, 3.0]), Vector::from_vec(vec![1.0, 1.0]))
            .unwrap();
        let p = CompositeProblem::quadratic(q, SimpleConvexTerm::l1(0.1).unwrap()).unwrap();
        let x0 = Vector::from_vec(vec![2.0, -1.0]);
        let mut s = FistaState::init(&x0);
        s.step(&p);
        let fb = forward_backward(&p, 1.0 / 3.0, &x0).point;
        assert_eq!(s.x, fb);
        assert_eq!(s.w, fb);
    }
}
