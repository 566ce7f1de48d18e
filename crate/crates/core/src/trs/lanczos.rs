//! Trust-region Lanczos: conjugate gradients while the iterate stays inside
//! the ball, then the tridiagonal subproblem on the Krylov basis.

use crate::error::{Error, Result};
use crate::model::{Quadratic, SmoothOracle, Vector};

use super::tridiagonal::{solve_tridiagonal_trs, Tridiagonal};
use super::{kkt_certify, TrsSolution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Full re-orthogonalization of the residuals; `None` means "on for n ≤ 500".
    pub reorthogonalize: Option<bool>,
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { reorthogonalize: None, tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosState {
    /// Number of completed iterations; `x` is `x_k`.
    pub k: usize,
    pub x: Vector,
    pub r: Vector,
    pub p: Vector,
    /// `α_{k−1}` from the latest iteration.
    pub alpha: f64,
    /// `β_{k−1}` from the latest iteration.
    pub beta: f64,
    /// `σ_k`
    pub sign: f64,
    pub boundary_mode: bool,
    pub q: Vec<Vector>,
    pub t: Tridiagonal,
    pub mu: f64,
    pub converged: bool,
    pub delta: f64,
    b_norm: f64,
    reorth: bool,
    tol: f64,
    inv_alpha_prev: f64,
}

impl LanczosState {
    pub fn init(quad: &Quadratic, delta: f64, opts: LanczosOptions) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {delta}")));
        }
        let n = quad.dim();
        let b = quad.b().clone();
        let b_norm = b.norm();
        Ok(Self {
            k: 0,
            x: Vector::zeros(n),
            q: if b_norm > 0.0 { vec![&b / b_norm] } else { Vec::new() },
            r: b.clone(),
            p: b,
            alpha: 0.0,
            beta: 0.0,
            sign: 1.0,
            boundary_mode: false,
            t: Tridiagonal::default(),
            mu: 0.0,
            converged: b_norm == 0.0,
            delta,
            b_norm,
            reorth: opts.reorthogonalize.unwrap_or(n <= 500),
            tol: opts.tol,
            inv_alpha_prev: 0.0,
        })
    }

    /// `‖r₀‖ = ‖b‖`
    pub fn r0_norm(&self) -> f64 {
        self.b_norm
    }

    pub fn step(&mut self, quad: &Quadratic) -> Result<()> {
        if self.converged {
            return Ok(());
        }
        let ap = quad.apply(&self.p);
        let pap = self.p.dot(&ap);
        let rr = self.r.norm_squared();
        let curvature_floor = 1e-14 * quad.lipschitz() * self.p.norm_squared();
        // A vanishing denominator is tolerated only if this turns out to be
        // the final iteration.
        let degenerate = pap <= curvature_floor;
        let (alpha, inv_alpha) = if degenerate { (f64::INFINITY, 0.0) } else { (rr / pap, pap / rr) };

        let d = inv_alpha + if self.k > 0 { self.beta * self.inv_alpha_prev } else { 0.0 };
        let e = if self.k > 0 { self.beta.sqrt() * self.inv_alpha_prev.abs() } else { 0.0 };
        self.t.push(d, e);

        if !self.boundary_mode && (degenerate || (&self.x + &self.p * alpha).norm() >= self.delta) {
            self.boundary_mode = true;
        }
        if self.boundary_mode {
            let (h, mu) = solve_tridiagonal_trs(&self.t, self.b_norm, self.delta)?;
            let mut x = Vector::zeros(self.x.len());
            for (qi, hi) in self.q.iter().zip(h.iter()) {
                x.axpy(*hi, qi, 1.0);
            }
            self.x = x;
            self.mu = mu;
        } else {
            self.x.axpy(alpha, &self.p, 1.0);
            self.mu = 0.0;
        }

        if !degenerate {
            self.r.axpy(-alpha, &ap, 1.0);
            if self.reorth {
                for qi in &self.q {
                    let c = qi.dot(&self.r);
                    self.r.axpy(-c, qi, 1.0);
                }
            }
        }
        self.k += 1;

        let r_norm = self.r.norm();
        let residual_small = r_norm <= self.tol * self.b_norm;
        let kkt_small = self.boundary_mode
            && (quad.apply(&self.x) + &self.x * self.mu - quad.b()).norm() <= self.tol * self.b_norm;
        if residual_small || kkt_small {
            self.converged = true;
            return Ok(());
        }
        if degenerate {
            return Err(Error::Breakdown(self.k - 1));
        }

        let beta = r_norm * r_norm / rr;
        self.p = &self.r + &self.p * beta;
        self.sign = -alpha.signum() * self.sign;
        self.q.push(&self.r * (self.sign / r_norm));
        self.alpha = alpha;
        self.beta = beta;
        self.inv_alpha_prev = inv_alpha;
        Ok(())
    }

    pub fn solution(&self, quad: &Quadratic) -> TrsSolution {
        TrsSolution { x: self.x.clone(), mu: self.mu, kkt: kkt_certify(quad, self.delta, &self.x, self.mu) }
    }
}

/// Runs to convergence or the iteration cap, returning every state visited.
pub fn trs_lanczos_run(quad: &Quadratic, delta: f64, opts: LanczosOptions, max_iters: usize) -> Result<Vec<LanczosState>> {
    let mut s = LanczosState::init(quad, delta, opts)?;
    let mut out = vec![s.clone()];
    while !s.converged && s.k < max_iters {
        s.step(quad)?;
        out.push(s.clone());
    }
    Ok(out)
}
