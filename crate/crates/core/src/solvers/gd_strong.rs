//! Geometric descent for strongly convex composites.

use crate::error::{Error, Result};
use crate::line_search::{find_z, ZCase, DEFAULT_TOL};
use crate::model::{CompositeProblem, Vector};
use crate::prox::{prox_grad, ProxGradResult};

/// Diagnostics of the step that produced the current state.
#[derive(Clone, Debug)]
pub struct GdStrongStep {
    pub case: ZCase,
    pub s: f64,
    /// Residual bound the line search met.
    pub allowance: f64,
    /// `ξ̃²` before the step.
    pub prev_xi_sq: f64,
    /// `F(z̄)` before the step.
    pub prev_f_zbar: f64,
    /// `y` before the step, the far endpoint of the segment searched.
    pub prev_y: Vector,
    pub rho_sq: f64,
    pub sigma_sq: f64,
    pub delta_sq: f64,
}

/// State at index `k`: holds `z_{k−1}`, `y_k` and `ξ̃²_k`.
#[derive(Clone, Debug)]
pub struct GdStrongState {
    pub k: usize,
    pub z: Vector,
    pub y: Vector,
    pub xi_sq: f64,
    /// `F(z̄_{k−1})`
    pub f_zbar: f64,
    pub lambda: f64,
    /// Forward-backward data at `z_{k−1}`; its point is `z̄_{k−1}`.
    pub prox_z: ProxGradResult,
    pub line_search_tol: f64,
    pub last_step: Option<GdStrongStep>,
}

impl GdStrongState {
    pub fn init(problem: &CompositeProblem, x0: &Vector) -> Result<Self> {
        let alpha = problem.strong_convexity();
        if alpha <= 0.0 {
            return Err(Error::Incompatible("geometric descent needs alpha > 0".into()));
        }
        let l = problem.lipschitz();
        let pg = prox_grad(problem, x0);
        let g_sq = pg.norm().powi(2);
        let y = pg.scaled_step(x0, alpha);
        let xi_sq = (1.0 / (alpha * alpha) - 1.0 / (l * alpha)) * g_sq;
        Ok(Self {
            k: 1,
            z: x0.clone(),
            y,
            xi_sq,
            f_zbar: problem.objective(&pg.point),
            lambda: 0.0,
            prox_z: pg,
            line_search_tol: DEFAULT_TOL,
            last_step: None,
        })
    }

    pub fn with_line_search_tol(mut self, tol: f64) -> Self {
        self.line_search_tol = tol;
        self
    }

    /// `z̄_{k−1}`
    pub fn zbar(&self) -> &Vector {
        &self.prox_z.point
    }

    pub fn converged(&self, eps: f64) -> bool {
        self.xi_sq <= eps * eps
    }

    pub fn step(&mut self, problem: &CompositeProblem) -> Result<()> {
        let alpha = problem.strong_convexity();
        let l = problem.lipschitz();
        let x = self.prox_z.point.clone();
        let (z, pg, case, s, allowance) = if (&self.y - &x).norm() == 0.0 {
            let pg = prox_grad(problem, &x);
            (x, pg, ZCase::AtX, 0.0, 0.0)
        } else {
            let r = find_z(problem, &x, &self.y, self.line_search_tol)?;
            (r.z, r.prox, r.case, r.s, r.allowance)
        };

        let g_sq = pg.norm().powi(2);
        let delta_sq = g_sq / (alpha * alpha);
        let rho_sq = (1.0 - alpha / l) * delta_sq;
        let sigma_sq = self.xi_sq - (alpha / l) * delta_sq;
        let (lambda, xi_next) = if delta_sq > 0.0 && sigma_sq <= rho_sq + delta_sq {
            let lambda = (delta_sq + rho_sq - sigma_sq) / (2.0 * delta_sq);
            let xi = 0.5 * rho_sq + 0.5 * sigma_sq
                - 0.25 * delta_sq
                - (rho_sq - sigma_sq).powi(2) / (4.0 * delta_sq);
            (lambda, xi)
        } else {
            (0.0, rho_sq)
        };
        let long = pg.scaled_step(&z, alpha);
        let y_next = long * (1.0 - lambda) + &self.y * lambda;

        let step = GdStrongStep {
            case,
            s,
            allowance,
            prev_xi_sq: self.xi_sq,
            prev_f_zbar: self.f_zbar,
            prev_y: std::mem::replace(&mut self.y, y_next),
            rho_sq,
            sigma_sq,
            delta_sq,
        };
        self.k += 1;
        self.z = z;
        self.xi_sq = xi_next.max(0.0);
        self.f_zbar = problem.objective(&pg.point);
        self.lambda = lambda;
        self.prox_z = pg;
        self.last_step = Some(step);
        Ok(())
    }
}
