//! Symmetric tridiagonal matrices and the trust-region subproblem on them.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::Vector;

use super::{SECULAR_MAX_ITERS, SECULAR_TOL};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i+1`.
    pub off: Vec<f64>,
}

/// `T + μI = L D Lᵀ` with unit lower-bidiagonal `L`.
struct Ldl {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl Ldl {
    /// Returns `h = (T+μI)⁻¹rhs` and `hᵀ(T+μI)⁻¹h`, the Newton denominator.
    fn solve(&self, rhs: &[f64]) -> (Vec<f64>, f64) {
        let n = self.d.len();
        let mut z = rhs.to_vec();
        for i in 1..n {
            z[i] -= self.l[i - 1] * z[i - 1];
        }
        for i in 0..n {
            z[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            z[i] -= self.l[i] * z[i + 1];
        }
        let mut w = z.clone();
        for i in 1..n {
            w[i] -= self.l[i - 1] * w[i - 1];
        }
        let w_sq = w.iter().zip(&self.d).map(|(wi, di)| wi * wi / di).sum();
        (z, w_sq)
    }
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter("tridiagonal needs n diagonal and n−1 off-diagonal entries".into()));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Appends a row with diagonal `d`, coupled to the previous row by `e`.
    pub fn push(&mut self, d: f64, e: f64) {
        if !self.diag.is_empty() {
            self.off.push(e);
        }
        self.diag.push(d);
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = self.off.get(i).map_or(0.0, |e| e.abs());
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    pub fn mul(&self, h: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * h[i];
                if i > 0 {
                    s += self.off[i - 1] * h[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * h[i + 1];
                }
                s
            })
            .collect()
    }

    fn factor_shifted(&self, mu: f64) -> Option<Ldl> {
        let n = self.dim();
        let floor = 1e-14 * self.max_row_sum().max(mu.abs()).max(f64::MIN_POSITIVE);
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        d.push(self.diag[0] + mu);
        if d[0] <= floor {
            return None;
        }
        for i in 1..n {
            let li = self.off[i - 1] / d[i - 1];
            let di = self.diag[i] + mu - li * self.off[i - 1];
            if di <= floor {
                return None;
            }
            l.push(li);
            d.push(di);
        }
        Some(Ldl { d, l })
    }
}

/// Minimizes `½hᵀTh − ‖r₀‖h₁` over `‖h‖ ≤ Δ`; returns `(h, μ)`.
pub fn solve_tridiagonal_trs(t: &Tridiagonal, r0_norm: f64, delta: f64) -> Result<(Vector, f64)> {
    let n = t.dim();
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {delta}")));
    }
    if r0_norm == 0.0 {
        return Ok((Vector::zeros(n), 0.0));
    }
    let mut rhs = vec![0.0; n];
    rhs[0] = r0_norm;

    let mut lo = 0.0;
    let mut hi = r0_norm / delta + t.max_row_sum();
    let mut mu = 0.0;
    if let Some(f) = t.factor_shifted(0.0) {
        let (h, _) = f.solve(&rhs);
        let h = Vector::from_vec(h);
        if h.norm() <= delta {
            return Ok((h, 0.0));
        }
    } else {
        mu = 0.5 * hi;
    }

    for _ in 0..SECULAR_MAX_ITERS {
        let Some(f) = t.factor_shifted(mu) else {
            lo = mu;
            mu = 0.5 * (lo + hi);
            continue;
        };
        let (h, w_sq) = f.solve(&rhs);
        let h = Vector::from_vec(h);
        let nh = h.norm();
        if (nh - delta).abs() <= SECULAR_TOL * delta {
            return Ok(polish(t, &rhs, delta, h, mu, w_sq));
        }
        if nh > delta {
            lo = mu;
        } else {
            hi = mu;
        }
        let newton = mu + (nh * nh / w_sq) * (nh - delta) / delta;
        mu = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::SecularNonConvergence(SECULAR_MAX_ITERS))
}

/// A couple of extra Newton steps once within tolerance; quadratic
/// convergence takes the radius error to rounding level.
fn polish(t: &Tridiagonal, rhs: &[f64], delta: f64, h: Vector, mu: f64, w_sq: f64) -> (Vector, f64) {
    let (mut best_h, mut best_mu, mut w_sq) = (h, mu, w_sq);
    for _ in 0..2 {
        let nh = best_h.norm();
        let next = best_mu + (nh * nh / w_sq) * (nh - delta) / delta;
        let Some(f) = (next >= 0.0).then(|| t.factor_shifted(next)).flatten() else {
            break;
        };
        let (h, ws) = f.solve(rhs);
        let h = Vector::from_vec(h);
        if (h.norm() - delta).abs() >= (nh - delta).abs() {
            break;
        }
        (best_h, best_mu, w_sq) = (h, next, ws);
    }
    (best_h, best_mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_boundary() {
        let t = Tridiagonal::new(vec![1.0], vec![]).unwrap();
        let (h, mu) = solve_tridiagonal_trs(&t, 2.0, 1.0).unwrap();
        assert!((h[0] - 1.0).abs() <= 1e-10);
        assert!((mu - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn scalar_interior() {
        let t = Tridiagonal::new(vec![2.0], vec![]).unwrap();
        let (h, mu) = solve_tridiagonal_trs(&t, 1.0, 1.0).unwrap();
        assert_eq!(h[0], 0.5);
        assert_eq!(mu, 0.0);
    }

    #[test]
    fn singular_psd_goes_to_boundary() {
        // T = [[1,1],[1,1]] is singular; e₁ has a component on its null vector.
        let t = Tridiagonal::new(vec![1.0, 1.0], vec![1.0]).unwrap();
        let (h, mu) = solve_tridiagonal_trs(&t, 1.0, 10.0).unwrap();
        assert!((h.norm() - 10.0).abs() <= 1e-9 * 10.0);
        assert!(mu > 0.0);
        let th = t.mul(h.as_slice());
        assert!(((th[0] + mu * h[0]) - 1.0).abs() < 1e-9);
        assert!((th[1] + mu * h[1]).abs() < 1e-9);
    }

    #[test]
    fn push_builds_matrix() {
        let mut t = Tridiagonal::default();
        t.push(1.0, 0.0);
        t.push(2.0, 0.5);
        t.push(3.0, 0.25);
        assert_eq!(t.diag, vec![1.0, 2.0, 3.0]);
        assert_eq!(t.off, vec![0.5, 0.25]);
        assert_eq!(t.to_dense()[(2, 1)], 0.25);
        assert_eq!(t.max_row_sum(), 3.25);
    }

    #[test]
    fn zero_rhs() {
        let t = Tridiagonal::new(vec![1.0, 1.0], vec![1.0]).unwrap();
        let (h, mu) = solve_tridiagonal_trs(&t, 0.0, 1.0).unwrap();
        assert_eq!(h.norm(), 0.0);
        assert_eq!(mu, 0.0);
    }
}
