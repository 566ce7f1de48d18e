//! Accelerated gradient for strongly convex composites, with the auxiliary
//! `y`/`σ̃²` sequences that certify it.

use crate::error::{Error, Result};
use crate::model::{CompositeProblem, Vector};
use crate::prox::{prox_grad, ProxGradResult};

use super::Optimum;

#[derive(Clone, Debug)]
pub struct AgState {
    pub k: usize,
    pub x: Vector,
    pub x_prev: Vector,
    pub w: Vector,
    pub theta: f64,
    pub kappa: f64,
}

impl AgState {
    pub fn init(problem: &CompositeProblem, x0: &Vector) -> Result<Self> {
        let alpha = problem.strong_convexity();
        if alpha <= 0.0 {
            return Err(Error::Incompatible("accelerated gradient needs alpha > 0".into()));
        }
        let kappa = problem.lipschitz() / alpha;
        let sk = kappa.sqrt();
        Ok(Self {
            k: 0,
            x: x0.clone(),
            x_prev: x0.clone(),
            w: x0.clone(),
            theta: (sk - 1.0) / (sk + 1.0),
            kappa,
        })
    }

    /// Advances to `k+1`; returns the forward-backward data at the old `w_k`.
    pub fn step(&mut self, problem: &CompositeProblem) -> ProxGradResult {
        let pg = prox_grad(problem, &self.w);
        let x_new = pg.point.clone();
        let w_new = &x_new + (&x_new - &self.x) * self.theta;
        self.x_prev = std::mem::replace(&mut self.x, x_new);
        self.w = w_new;
        self.k += 1;
        pg
    }

    /// `y_k = x_k + (√κ−1)(x_k − x_{k−1})`.
    pub fn y_momentum(&self) -> Vector {
        &self.x + (&self.x - &self.x_prev) * (self.kappa.sqrt() - 1.0)
    }

    /// `y_k = (√κ+1)w_k − √κ·x_k`.
    pub fn y_from_w(&self) -> Vector {
        let sk = self.kappa.sqrt();
        &self.w * (sk + 1.0) - &self.x * sk
    }
}

#[derive(Clone, Debug)]
pub struct AgAudit {
    pub y: Vector,
    pub sigma_sq: f64,
}

/// How `σ̃₀²` is obtained.
#[derive(Clone, Debug)]
pub enum Sigma0 {
    /// `‖x₀−x*‖² + 2(F(x₀)−F*)/α`
    Exact(Optimum),
    /// An upper bound computable from one forward-backward step at `x₀`.
    Computable,
}

/// Upper bound on `‖x₀−x*‖² + 2(F(x₀)−F*)/α` built from the geometric-descent
/// initial radius `ξ̃₁² = (1/α² − 1/(Lα))‖G(x₀)‖²`.
pub fn computable_sigma0(problem: &CompositeProblem, x0: &Vector) -> Result<f64> {
    let alpha = problem.strong_convexity();
    let l = problem.lipschitz();
    let pg = prox_grad(problem, x0);
    let g = pg.norm();
    let xi = ((1.0 / (alpha * alpha) - 1.0 / (l * alpha)) * g * g).max(0.0).sqrt();
    let drop = problem.objective_difference(x0, &pg.point);
    if !drop.is_finite() {
        return Err(Error::InvalidParameter("x0 must be feasible for the audit".into()));
    }
    Ok((g / alpha + xi).powi(2) + 2.0 * drop / alpha)
}

impl AgAudit {
    pub fn init(problem: &CompositeProblem, x0: &Vector, sigma0: &Sigma0) -> Result<Self> {
        let alpha = problem.strong_convexity();
        let sigma_sq = match sigma0 {
            Sigma0::Exact(opt) => (x0 - &opt.x).norm_squared() + 2.0 * opt.gap(problem, x0) / alpha,
            Sigma0::Computable => computable_sigma0(problem, x0)?,
        };
        Ok(Self { y: x0.clone(), sigma_sq })
    }
}

/// `y_{k+1} = κ^{−1/2} w̿_k + (1−κ^{−1/2}) y_k` and
/// `σ̃²_{k+1} = (1−κ^{−1/2})σ̃²_k − (κ^{1/2}−κ^{−1/2})‖w_k−x_k‖²`.
pub fn ag_audit_step(
    alpha: f64,
    kappa: f64,
    audit: &AgAudit,
    w: &Vector,
    x: &Vector,
    pg_w: &ProxGradResult,
) -> AgAudit {
    let inv = 1.0 / kappa.sqrt();
    let long = pg_w.scaled_step(w, alpha);
    let y = long * inv + &audit.y * (1.0 - inv);
    let sigma_sq = (1.0 - inv) * audit.sigma_sq - (kappa.sqrt() - inv) * (w - x).norm_squared();
    AgAudit { y, sigma_sq }
}

/// Accelerated gradient with its audit sequence advanced in lock-step.
#[derive(Clone, Debug)]
pub struct Ag {
    pub state: AgState,
    pub audit: AgAudit,
    /// `‖G_{1/L}(w_{k−1})‖` from the latest step.
    pub last_g_norm: Option<f64>,
}

impl Ag {
    pub fn new(problem: &CompositeProblem, x0: &Vector, sigma0: &Sigma0) -> Result<Self> {
        let state = AgState::init(problem, x0)?;
        let audit = AgAudit::init(problem, x0, sigma0)?;
        Ok(Self { state, audit, last_g_norm: None })
    }

    pub fn step(&mut self, problem: &CompositeProblem) {
        let (w, x) = (self.state.w.clone(), self.state.x.clone());
        let pg = self.state.step(problem);
        self.audit =
            ag_audit_step(problem.strong_convexity(), self.state.kappa, &self.audit, &w, &x, &pg);
        self.last_g_norm = Some(pg.norm());
    }

    pub fn converged(&self, eps: f64, lipschitz: f64) -> bool {
        self.last_g_norm.is_some_and(|g| g <= eps * lipschitz)
    }
}
