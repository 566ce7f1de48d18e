//! Search for the auxiliary point `z` on a segment `[x, y]`.
//!
//! `h̄(s) = G_{1/L}(x + s(y−x))ᵀ(y−x)` is continuous, so a sign change on
//! `[0, 1]` brackets a point where both sign conditions hold.

use crate::error::{Error, Result};
use crate::model::{CompositeProblem, Vector};
use crate::prox::{prox_grad, ProxGradResult};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const MAX_BISECTIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZCase {
    AtY,
    AtX,
    Interior,
}

#[derive(Clone, Debug)]
pub struct ZSearchResult {
    pub z: Vector,
    pub s: f64,
    pub case: ZCase,
    /// `h̄(s)` at the returned point.
    pub residual: f64,
    /// Bound on `|h̄|` the returned interior point meets: `tol·L‖y−x‖²`,
    /// raised to the rounding floor of `h̄` when that is larger.
    pub allowance: f64,
    /// Forward-backward data at `z`, reused by callers.
    pub prox: ProxGradResult,
    pub evaluations: usize,
}

fn point_on(x: &Vector, d: &Vector, s: f64) -> Vector {
    x + d * s
}

pub fn hbar(problem: &CompositeProblem, x: &Vector, y: &Vector, s: f64) -> Result<f64> {
    let d = y - x;
    if d.norm() == 0.0 {
        return Err(Error::InvalidParameter("segment endpoints coincide".into()));
    }
    Ok(prox_grad(problem, &point_on(x, &d, s)).grad_map.dot(&d))
}

pub fn find_z(problem: &CompositeProblem, x: &Vector, y: &Vector, tol: f64) -> Result<ZSearchResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let d = y - x;
    let d_sq = d.norm_squared();
    if d_sq == 0.0 {
        return Err(Error::InvalidParameter("segment endpoints coincide".into()));
    }
    let l = problem.lipschitz();
    let threshold = tol * l * d_sq;
    let d_norm = d_sq.sqrt();
    let eval = |s: f64| {
        let z = point_on(x, &d, s);
        let pg = prox_grad(problem, &z);
        let h = pg.grad_map.dot(&d);
        (z, pg, h)
    };
    // Rounding in G = L(z − x̄) limits how small |h̄| can be resolved.
    let floor = |z: &Vector, pg: &ProxGradResult| 16.0 * f64::EPSILON * l * d_norm * (z.norm() + pg.point.norm());

    let (zy, pgy, h1) = eval(1.0);
    if h1 <= 0.0 {
        return Ok(ZSearchResult { z: zy, s: 1.0, case: ZCase::AtY, residual: h1, allowance: 0.0, prox: pgy, evaluations: 1 });
    }
    let (zx, pgx, h0) = eval(0.0);
    if h0 >= 0.0 {
        return Ok(ZSearchResult { z: zx, s: 0.0, case: ZCase::AtX, residual: h0, allowance: 0.0, prox: pgx, evaluations: 2 });
    }

    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut best = (f64::INFINITY, 0.5);
    for it in 0..MAX_BISECTIONS {
        let s = 0.5 * (lo + hi);
        let (z, pg, h) = eval(s);
        let allowance = threshold.max(floor(&z, &pg));
        if h.abs() <= allowance {
            return Ok(ZSearchResult { z, s, case: ZCase::Interior, residual: h, allowance, prox: pg, evaluations: it + 3 });
        }
        if h.abs() < best.0 {
            best = (h.abs(), s);
        }
        if h < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
    }
    Err(Error::LineSearch { iterations: MAX_BISECTIONS, best_s: best.1 })
}
