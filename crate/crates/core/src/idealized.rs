//! The idealized frameworks, run exactly on quadratic problems with a known
//! minimizer. Each iteration works on a nested affine subspace `M_k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::line_search::{find_z, DEFAULT_TOL};
use crate::model::{CompositeProblem, Quadratic, SimpleConvexTerm, SmoothOracle, Vector};
use crate::prox::{prox, prox_grad};
use crate::solvers::Optimum;
use crate::trs::dense::dense_matrix_trs;

/// Relative residual below which a new direction is treated as dependent.
pub const REORTH_THRESHOLD: f64 = 1e-10;

/// Affine set `origin + span(basis)` with an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    pub origin: Vector,
    pub basis: Vec<Vector>,
}

impl Subspace {
    pub fn new(origin: Vector) -> Self {
        Self { origin, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Modified Gram–Schmidt with a second pass. Returns whether `v` added a
    /// new direction.
    pub fn add(&mut self, v: &Vector) -> bool {
        let scale = v.norm();
        if scale == 0.0 || !scale.is_finite() || self.basis.len() >= v.len() {
            return false;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let nw = w.norm();
        if nw <= REORTH_THRESHOLD * scale {
            return false;
        }
        self.basis.push(w / nw);
        true
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        if self.basis.is_empty() {
            DMatrix::zeros(self.origin.len(), 0)
        } else {
            DMatrix::from_columns(&self.basis)
        }
    }

    /// Orthogonal projection of `p` onto the affine set.
    pub fn project(&self, p: &Vector) -> Vector {
        let d = p - &self.origin;
        let mut out = self.origin.clone();
        for q in &self.basis {
            out.axpy(q.dot(&d), q, 1.0);
        }
        out
    }

    /// Largest `|qᵀ(p − proj p)|`, zero for an exact projection.
    pub fn projection_residual(&self, p: &Vector) -> f64 {
        let r = p - self.project(p);
        self.basis.iter().map(|q| q.dot(&r).abs()).fold(0.0, f64::max)
    }

    pub fn contains(&self, p: &Vector, tol: f64) -> bool {
        (p - self.project(p)).norm() <= tol * (1.0 + p.norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IaKind {
    Strong,
    Convex,
}

#[derive(Clone, Debug)]
pub struct IaState {
    pub k: usize,
    pub subspace: Subspace,
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    pub x_star: Vector,
    pub f_star: f64,
    /// `F(x_k) − F*`
    pub gap_x: f64,
    /// `F(z̄_k) − F*`
    pub gap_zbar: f64,
    /// `F(x̄_k) − F*`
    pub gap_xbar: f64,
    /// `‖G_{1/L}(x_k)‖`
    pub g_norm_x: f64,
    /// `‖G_{1/L}(z_k)‖`
    pub g_norm_z: f64,
    /// `G_{1/L}(z_k)ᵀ(y_k − z_k)`
    pub z_inner: f64,
    /// `G_{1/L}(z_k)ᵀ(x_k − z_k)`
    pub z_inner_x: f64,
    /// Residual bound met by the search for `z_k`.
    pub z_allowance: f64,
    /// `None` for the initial state.
    pub potential: Option<f64>,
}

fn require_quadratic(problem: &CompositeProblem) -> Result<&Quadratic> {
    problem
        .as_quadratic()
        .ok_or_else(|| Error::Incompatible("the idealized framework needs a quadratic f".into()))
}

/// Minimizes `F` over the affine subspace.
pub fn subspace_minimize(problem: &CompositeProblem, m: &Subspace) -> Result<Vector> {
    let quad = require_quadratic(problem)?;
    if m.dim() == 0 {
        return Ok(m.origin.clone());
    }
    let v = m.matrix();
    let h = quad.project(&v);
    match problem.psi() {
        SimpleConvexTerm::Zero | SimpleConvexTerm::Ball { .. } => {
            // Write x = o⊥ + Vu with o⊥ orthogonal to the span, so that
            // ‖x‖² = ‖o⊥‖² + ‖u‖².
            let p = v.transpose() * &m.origin;
            let o_perp = &m.origin - &v * &p;
            let g = v.transpose() * (quad.b() - quad.apply(&o_perp));
            let radius = match problem.psi() {
                SimpleConvexTerm::Ball { radius } => {
                    let r_sq = radius * radius - o_perp.norm_squared();
                    if r_sq <= 0.0 {
                        return Err(Error::Subspace("affine subspace misses the ball".into()));
                    }
                    r_sq.sqrt()
                }
                _ => f64::INFINITY,
            };
            let (u, _) = dense_matrix_trs(&h, &g, radius).map_err(|e| Error::Subspace(e.to_string()))?;
            Ok(o_perp + v * u)
        }
        psi => admm_minimize(quad, psi, m, &v, &h),
    }
}

/// ADMM on `½cᵀHc − gᵀc + Ψ(u)` subject to `u = o + Vc`, for the nonsmooth
/// terms whose composition with an affine map has no simple prox.
fn admm_minimize(quad: &Quadratic, psi: &SimpleConvexTerm, m: &Subspace, v: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<Vector> {
    let (values, vectors) = crate::linalg::sym_eigen(h)?;
    let lo = values.min();
    if lo < -1e-12 * quad.lipschitz() {
        return Err(Error::Subspace("nonconvex reduced problem with a nonsmooth term".into()));
    }
    let hi = values.max().max(0.0);
    let rho = (lo.max(1e-3 * hi) * hi).sqrt().max(1e-12 * quad.lipschitz()).max(f64::MIN_POSITIVE);
    let g = v.transpose() * (quad.b() - quad.apply(&m.origin));
    let shifted = DMatrix::from_diagonal(&values.map(|l| 1.0 / (l.max(0.0) + rho)));
    let solve = &vectors * shifted * vectors.transpose();

    let n = m.origin.len();
    let mut u = m.origin.clone();
    let mut w = Vector::zeros(n);
    let mut c = Vector::zeros(v.ncols());
    let scale = 1.0 + m.origin.norm() + quad.b().norm() / quad.lipschitz();
    for _ in 0..50_000 {
        c = &solve * (&g + v.transpose() * (&u - &m.origin - &w) * rho);
        let x = &m.origin + v * &c;
        let u_prev = std::mem::replace(&mut u, prox(psi, 1.0 / rho, &(&x + &w)));
        let primal = &x - &u;
        w += &primal;
        let dual = (&u - &u_prev).norm();
        if primal.norm() <= 1e-13 * scale && dual <= 1e-13 * scale {
            break;
        }
    }
    let x = &m.origin + v * c;
    if psi.value(&x).is_infinite() {
        // Rounding-level box violations left by the splitting.
        return Ok(prox(psi, 1.0, &x));
    }
    Ok(x)
}

/// `z_k ∈ [x_k, y_k]` with both sign conditions, and the residual bound met.
fn select_z(problem: &CompositeProblem, x: &Vector, y: &Vector) -> Result<(Vector, f64)> {
    let d = (y - x).norm();
    if d <= 1e-15 * (1.0 + x.norm()) {
        // Both inner products are at most ‖G(x)‖‖y−x‖ in size.
        return Ok((x.clone(), prox_grad(problem, x).norm() * d));
    }
    let r = find_z(problem, x, y, DEFAULT_TOL)?;
    Ok((r.z, r.allowance))
}

fn ia_run(kind: IaKind, problem: &CompositeProblem, x0: &Vector, x_star: &Vector, max_iters: usize) -> Result<Vec<IaState>> {
    require_quadratic(problem)?;
    if kind == IaKind::Strong && !(problem.strong_convexity() > 0.0) {
        return Err(Error::Incompatible("strong framework needs α > 0".into()));
    }
    crate::model::check_dim(x0, problem.dim())?;
    crate::model::check_dim(x_star, problem.dim())?;
    let opt = Optimum::new(problem, x_star.clone());
    let l = problem.lipschitz();
    let alpha = problem.strong_convexity();

    let pg0 = prox_grad(problem, x0);
    let mut m = Subspace::new(x0.clone());
    m.add(&pg0.grad_map);
    let mut out = vec![IaState {
        k: 0,
        subspace: Subspace::new(x0.clone()),
        x: x0.clone(),
        y: x0.clone(),
        z: x0.clone(),
        x_star: x_star.clone(),
        f_star: opt.value,
        gap_x: opt.gap(problem, x0),
        gap_zbar: opt.gap(problem, &pg0.point),
        gap_xbar: opt.gap(problem, &pg0.point),
        g_norm_x: pg0.norm(),
        g_norm_z: pg0.norm(),
        z_inner: 0.0,
        z_inner_x: 0.0,
        z_allowance: 0.0,
        potential: None,
    }];

    for k in 1..=max_iters {
        let y = m.project(x_star);
        let x = subspace_minimize(problem, &m)?;
        let (z, z_allowance) = select_z(problem, &x, &y)?;
        let pgx = prox_grad(problem, &x);
        let pgz = prox_grad(problem, &z);
        let gap_x = opt.gap(problem, &x);
        let kf = k as f64;
        let potential = match kind {
            IaKind::Strong => (&y - x_star).norm_squared() + 2.0 * gap_x / alpha,
            IaKind::Convex => (&y - x_star).norm_squared() + kf * (kf + 1.0) * gap_x / (2.0 * l),
        };
        let state = IaState {
            k,
            subspace: m.clone(),
            z_inner: pgz.grad_map.dot(&(&y - &z)),
            z_inner_x: pgz.grad_map.dot(&(&x - &z)),
            z_allowance,
            gap_x,
            gap_zbar: opt.gap(problem, &pgz.point),
            gap_xbar: opt.gap(problem, &pgx.point),
            g_norm_x: pgx.norm(),
            g_norm_z: pgz.norm(),
            x,
            y,
            z,
            x_star: x_star.clone(),
            f_star: opt.value,
            potential: Some(potential),
        };
        let grew = match kind {
            IaKind::Strong => {
                let a = m.add(&(&state.y - &state.z));
                m.add(&pgz.grad_map) || a
            }
            IaKind::Convex => {
                let a = m.add(&pgz.grad_map);
                m.add(&pgx.grad_map) || a
            }
        };
        let done = potential == 0.0 || state.g_norm_x == 0.0;
        out.push(state);
        if done || !grew {
            break;
        }
    }
    Ok(out)
}

/// Strongly convex framework; needs the exact minimizer `x*`.
pub fn ia_strong_run(problem: &CompositeProblem, x0: &Vector, x_star: &Vector, max_iters: usize) -> Result<Vec<IaState>> {
    ia_run(IaKind::Strong, problem, x0, x_star, max_iters)
}

/// Convex and nonconvex framework with the enlarged subspace update.
pub fn ia_convex_run(problem: &CompositeProblem, x0: &Vector, x_star: &Vector, max_iters: usize) -> Result<Vec<IaState>> {
    ia_run(IaKind::Convex, problem, x0, x_star, max_iters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trs::dense_trs_oracle;

    fn v(e: &[f64]) -> Vector {
        Vector::from_row_slice(e)
    }

    fn diag_ball(d: &[f64], b: &[f64], r: f64) -> CompositeProblem {
        let q = Quadratic::diagonal(v(d), v(b)).unwrap();
        CompositeProblem::quadratic(q, SimpleConvexTerm::ball(r).unwrap()).unwrap()
    }

    #[test]
    fn mgs_rejects_dependent_direction() {
        let mut m = Subspace::new(Vector::zeros(3));
        assert!(m.add(&v(&[1.0, 1.0, 0.0])));
        assert!(m.add(&v(&[1.0, 0.0, 0.0])));
        assert!(!m.add(&v(&[3.0, -2.0, 0.0])));
        assert!(!m.add(&Vector::zeros(3)));
        assert_eq!(m.dim(), 2);
        let g = m.matrix();
        assert!((g.transpose() * &g - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn projection_is_orthogonal() {
        let mut m = Subspace::new(v(&[1.0, 0.0, 0.0]));
        m.add(&v(&[0.0, 1.0, 1.0]));
        let p = v(&[3.0, 2.0, -1.0]);
        assert!(m.projection_residual(&p) < 1e-15);
        assert!((m.project(&p) - v(&[1.0, 0.5, 0.5])).norm() < 1e-15);
    }

    #[test]
    fn start_at_optimum_terminates() {
        let p = diag_ball(&[1.0, 2.0], &[1.0, 1.0], 10.0);
        let xs = v(&[1.0, 0.5]);
        let run = ia_strong_run(&p, &xs, &xs, 10).unwrap();
        assert_eq!(run.len(), 2);
        assert_eq!(run[1].potential, Some(0.0));
    }

    #[test]
    fn optimum_in_first_subspace() {
        // x* = (1, 0) lies on x₀ + span{G(x₀)} from x₀ = 0.
        let p = diag_ball(&[1.0, 2.0], &[2.0, 0.0], 1.0);
        let xs = dense_trs_oracle(p.as_quadratic().unwrap(), 1.0).unwrap().x;
        let run = ia_convex_run(&p, &Vector::zeros(2), &xs, 10).unwrap();
        assert!((&run[1].x - &xs).norm() < 1e-12);
        assert!(run[1].potential.unwrap() < 1e-20);
    }

    #[test]
    fn strong_contraction_small_instance() {
        let p = diag_ball(&[1.0, 3.0, 7.0, 10.0], &[3.0, -2.0, 5.0, 1.0], 0.8);
        let xs = dense_trs_oracle(p.as_quadratic().unwrap(), 0.8).unwrap().x;
        let run = ia_strong_run(&p, &Vector::zeros(4), &xs, 20).unwrap();
        let q = 1.0 - (0.1_f64).sqrt();
        for w in run[1..].windows(2) {
            let (a, b) = (w[0].potential.unwrap(), w[1].potential.unwrap());
            assert!(b <= q * a + 1e-12, "{b} > {q}·{a}");
        }
    }

    #[test]
    fn l1_subspace_minimum_is_stationary_in_full_space() {
        let q = Quadratic::diagonal(v(&[1.0, 2.0]), v(&[1.0, 0.1])).unwrap();
        let p = CompositeProblem::quadratic(q, SimpleConvexTerm::l1(0.3).unwrap()).unwrap();
        let mut m = Subspace::new(Vector::zeros(2));
        m.add(&v(&[1.0, 0.0]));
        m.add(&v(&[0.0, 1.0]));
        let x = subspace_minimize(&p, &m).unwrap();
        assert!((x - v(&[0.7, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn requires_strong_convexity() {
        let p = diag_ball(&[0.0, 1.0], &[1.0, 1.0], 1.0);
        let e = ia_strong_run(&p, &Vector::zeros(2), &Vector::zeros(2), 3).unwrap_err();
        assert!(matches!(e, Error::Incompatible(_)));
    }
}
