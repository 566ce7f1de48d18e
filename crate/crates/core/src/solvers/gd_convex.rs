//! Geometric descent without strong convexity, optionally safeguarded by a
//! sufficient-decrease test so that it also applies to nonconvex `f`.

use crate::error::Result;
use crate::line_search::{find_z, ZCase, DEFAULT_TOL};
use crate::model::{CompositeProblem, Curvature, Vector};
use crate::prox::{prox_grad, ProxGradResult};

#[derive(Clone, Debug)]
pub struct GdConvexStep {
    pub case: ZCase,
    /// Residual bound the line search met.
    pub allowance: f64,
    /// Whether the safeguard replaced the line-search point.
    pub replaced: bool,
    pub prev_f_zbar: f64,
    pub prev_y: Vector,
    /// `z̄_{k−1}`, the near endpoint of the searched segment.
    pub segment_start: Vector,
    /// Line-search point `z_k` and its prox data, before any replacement.
    pub searched_z: Vector,
    pub searched_prox: ProxGradResult,
    /// `‖G_{1/L}(z̄_{k−1})‖`, available when the safeguard is active.
    pub g_norm_at_start: Option<f64>,
}

/// State at index `k`: holds `z_{k−1}` and `y_k`.
#[derive(Clone, Debug)]
pub struct GdConvexState {
    pub k: usize,
    pub z: Vector,
    pub y: Vector,
    /// `F(z̄_{k−1})`
    pub f_zbar: f64,
    /// `γ_k = (k+1)/(2L)`
    pub gamma: f64,
    pub safeguard_active: bool,
    /// `min_j ‖G_{1/L}(z_j)‖` over the accepted points so far.
    pub best_g_norm: f64,
    pub prox_z: ProxGradResult,
    pub line_search_tol: f64,
    pub last_step: Option<GdConvexStep>,
}

impl GdConvexState {
    /// `z₀ = y₁ = x₀`; the safeguard defaults to on exactly for nonconvex `f`.
    pub fn init(problem: &CompositeProblem, x0: &Vector, safeguard: Option<bool>) -> Self {
        let pg = prox_grad(problem, x0);
        let l = problem.lipschitz();
        Self {
            k: 1,
            z: x0.clone(),
            y: x0.clone(),
            f_zbar: problem.objective(&pg.point),
            gamma: 2.0 / (2.0 * l),
            safeguard_active: safeguard.unwrap_or(problem.curvature() == Curvature::Nonconvex),
            best_g_norm: pg.norm(),
            prox_z: pg,
            line_search_tol: DEFAULT_TOL,
            last_step: None,
        }
    }

    pub fn with_line_search_tol(mut self, tol: f64) -> Self {
        self.line_search_tol = tol;
        self
    }

    /// `z̄_{k−1}`
    pub fn zbar(&self) -> &Vector {
        &self.prox_z.point
    }

    pub fn g_norm(&self) -> f64 {
        self.prox_z.norm()
    }

    pub fn step(&mut self, problem: &CompositeProblem) -> Result<()> {
        let l = problem.lipschitz();
        let x = self.prox_z.point.clone();
        let (z, pg, case, allowance) = if (&self.y - &x).norm() == 0.0 {
            let pg = prox_grad(problem, &x);
            (x.clone(), pg, ZCase::AtX, 0.0)
        } else {
            let r = find_z(problem, &x, &self.y, self.line_search_tol)?;
            (r.z, r.prox, r.case, r.allowance)
        };
        let y_next = &self.y - &pg.grad_map * self.gamma;
        let f_next = problem.objective(&pg.point);

        let mut accepted = (z.clone(), pg.clone(), f_next);
        let mut replaced = false;
        let mut g_start = None;
        if self.safeguard_active {
            let at_start = prox_grad(problem, &x);
            let g = at_start.norm();
            g_start = Some(g);
            if f_next > self.f_zbar - g * g / (2.0 * l) {
                let f = problem.objective(&at_start.point);
                accepted = (x.clone(), at_start, f);
                replaced = true;
            }
        }

        let step = GdConvexStep {
            case,
            allowance,
            replaced,
            prev_f_zbar: self.f_zbar,
            prev_y: std::mem::replace(&mut self.y, y_next),
            segment_start: x,
            searched_z: z,
            searched_prox: pg,
            g_norm_at_start: g_start,
        };
        let (z, pg, f) = accepted;
        self.best_g_norm = self.best_g_norm.min(pg.norm());
        self.k += 1;
        self.gamma = (self.k as f64 + 1.0) / (2.0 * l);
        self.z = z;
        self.prox_z = pg;
        self.f_zbar = f;
        self.last_step = Some(step);
        Ok(())
    }
}
