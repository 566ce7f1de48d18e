//! Reference trust-region solver working in the eigenbasis of `A`.
//!
//! With `A = VΛVᵀ` and `c = Vᵀb`, the solution is `u_i = c_i/(λ_i+μ)` for the
//! smallest admissible `μ ≥ max(0, −λ₁)` with `‖u‖ ≤ Δ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{Quadratic, Vector};

use super::{kkt_certify, TrsSolution};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSolution {
    /// Solution coordinates in the eigenbasis.
    pub u: Vector,
    pub mu: f64,
}

fn norm_at(lam: &[f64], c: &[f64], mu: f64) -> (f64, f64) {
    let mut n2 = 0.0;
    let mut d3 = 0.0;
    for (l, ci) in lam.iter().zip(c) {
        let s = l + mu;
        n2 += ci * ci / (s * s);
        d3 += ci * ci / (s * s * s);
    }
    (n2.sqrt(), d3)
}

/// Globally solves `min ½Σλ_i u_i² − Σc_i u_i` over `‖u‖ ≤ Δ` (`Δ` may be `∞`).
pub fn spectral_trs(lam: &[f64], c: &[f64], delta: f64) -> Result<SpectralSolution> {
    if lam.len() != c.len() {
        return Err(Error::DimensionMismatch { expected: lam.len(), got: c.len() });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {delta}")));
    }
    let n = lam.len();
    let scale = lam.iter().fold(0.0_f64, |m, l| m.max(l.abs())).max(f64::MIN_POSITIVE);
    let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if c_norm == 0.0 && lam.iter().all(|&l| l >= 0.0) {
        return Ok(SpectralSolution { u: Vector::zeros(n), mu: 0.0 });
    }
    let zero_tol = 1e-12 * scale;
    let lam_min = lam.iter().copied().fold(f64::INFINITY, f64::min);

    if lam_min >= -zero_tol {
        // μ = 0 is admissible when c has no component on the null space and
        // the minimum-norm solution fits.
        let consistent = lam
            .iter()
            .zip(c)
            .all(|(l, ci)| l.abs() > zero_tol || ci.abs() <= 1e-14 * c_norm.max(1.0));
        if consistent {
            let u = Vector::from_fn(n, |i, _| if lam[i].abs() > zero_tol { c[i] / lam[i] } else { 0.0 });
            if u.norm() <= delta {
                return Ok(SpectralSolution { u, mu: 0.0 });
            }
        }
    }
    if delta.is_infinite() {
        return Err(Error::InvalidParameter("quadratic is unbounded below without a radius".into()));
    }

    let lo0 = (-lam_min).max(0.0);
    // Hard case: no weight on the bottom eigenspace and the limiting norm fits.
    let bottom: Vec<usize> = (0..n).filter(|&i| lam[i] - lam_min <= zero_tol).collect();
    if lam_min < -zero_tol && bottom.iter().all(|&i| c[i].abs() <= 1e-14 * c_norm.max(1.0)) {
        let rest: f64 = (0..n)
            .filter(|i| !bottom.contains(i))
            .map(|i| (c[i] / (lam[i] - lam_min)).powi(2))
            .sum::<f64>()
            .sqrt();
        if rest <= delta {
            return Err(Error::HardCase);
        }
    }

    let mut lo = lo0;
    let mut hi = c_norm / delta + lo0 + scale * 1e-12;
    let mut mu = hi;
    let mut best = (f64::INFINITY, mu);
    for _ in 0..500 {
        let (nu, d3) = norm_at(lam, c, mu);
        let err = (nu - delta).abs();
        if err < best.0 {
            best = (err, mu);
        }
        if err <= 1e-15 * delta || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        if nu > delta {
            lo = mu;
        } else {
            hi = mu;
        }
        let newton = mu + (nu * nu / d3) * (nu - delta) / delta;
        mu = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    let mu = best.1;
    let u = Vector::from_fn(n, |i, _| c[i] / (lam[i] + mu));
    Ok(SpectralSolution { u, mu })
}

/// Eigen-decomposes a small dense symmetric matrix and solves the TRS with
/// linear term `g`; returns `(x, μ)` in the original coordinates.
pub fn dense_matrix_trs(h: &DMatrix<f64>, g: &Vector, delta: f64) -> Result<(Vector, f64)> {
    let (values, vectors) = crate::linalg::sym_eigen(h)?;
    let c = vectors.transpose() * g;
    let sol = spectral_trs(values.as_slice(), c.as_slice(), delta)?;
    Ok((&vectors * sol.u, sol.mu))
}

/// Globally optimal TRS solution for a quadratic, including indefinite `A`
/// outside the hard case.
pub fn dense_trs_oracle(quad: &Quadratic, delta: f64) -> Result<TrsSolution> {
    if quad.dim() > 2000 {
        return Err(Error::InvalidParameter("dense oracle limited to n <= 2000".into()));
    }
    let lam = quad.eigenvalues();
    let (x, mu) = match quad.eigenvectors() {
        Some(v) => {
            let c = v.transpose() * quad.b();
            let sol = spectral_trs(lam.as_slice(), c.as_slice(), delta)?;
            (v * sol.u, sol.mu)
        }
        None => {
            let sol = spectral_trs(lam.as_slice(), quad.b().as_slice(), delta)?;
            (sol.u, sol.mu)
        }
    };
    let kkt = kkt_certify(quad, delta, &x, mu);
    Ok(TrsSolution { x, mu, kkt })
}
