//! Enclosing balls for the intersection of two balls.

use crate::error::{Error, Result};
use crate::model::Vector;

#[derive(Clone, Debug, PartialEq)]
pub struct BallEnclosure {
    pub center: Vector,
    pub radius_sq: f64,
}

impl BallEnclosure {
    pub fn contains(&self, p: &Vector, slack: f64) -> bool {
        (p - &self.center).norm_squared() <= self.radius_sq + slack
    }
}

const CLIP: f64 = 1e-12;

/// Clips rounding-sized negative radicands to zero.
pub fn clip_radicand(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -CLIP * scale.abs().max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::Precondition(format!("{what} radicand is negative ({value:e})")))
    }
}

/// Ball containing `B(z,ρ) ∩ B(y,σ)` centred at `(1−λ)z + λy`, valid when `δ ≤ ‖z−y‖`.
pub fn enclose_with_lambda(
    z: &Vector,
    rho_sq: f64,
    y: &Vector,
    sigma_sq: f64,
    lambda: f64,
    delta_sq: f64,
) -> Result<BallEnclosure> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("lambda must lie in [0,1], got {lambda}")));
    }
    let center = z * (1.0 - lambda) + y * lambda;
    let radius_sq =
        (1.0 - lambda) * rho_sq + lambda * sigma_sq - lambda * (1.0 - lambda) * delta_sq;
    Ok(BallEnclosure { center, radius_sq })
}

/// The λ minimising the enclosure radius.
pub fn optimal_lambda(rho_sq: f64, sigma_sq: f64, delta_sq: f64) -> f64 {
    (delta_sq + rho_sq - sigma_sq) / (2.0 * delta_sq)
}

pub fn enclose_optimal(
    z: &Vector,
    rho_sq: f64,
    y: &Vector,
    sigma_sq: f64,
    delta_sq: f64,
) -> Result<BallEnclosure> {
    if rho_sq < 0.0 || sigma_sq < 0.0 || delta_sq <= 0.0 {
        return Err(Error::Precondition(format!(
            "radii must be nonnegative and delta positive (rho²={rho_sq}, sigma²={sigma_sq}, delta²={delta_sq})"
        )));
    }
    let scale = rho_sq.max(sigma_sq).max(delta_sq);
    let (rho, sigma, delta) = (rho_sq.sqrt(), sigma_sq.sqrt(), delta_sq.sqrt());
    if rho + sigma < delta * (1.0 - CLIP) {
        return Err(Error::Precondition(format!("rho + sigma < delta ({} < {delta})", rho + sigma)));
    }
    if (rho_sq - sigma_sq).abs() > delta_sq + CLIP * scale {
        return Err(Error::Precondition("|rho² − sigma²| > delta²".into()));
    }
    let lambda = optimal_lambda(rho_sq, sigma_sq, delta_sq).clamp(0.0, 1.0);
    let center = z * (1.0 - lambda) + y * lambda;
    let raw = 0.5 * rho_sq + 0.5 * sigma_sq
        - 0.25 * delta_sq
        - (rho_sq - sigma_sq).powi(2) / (4.0 * delta_sq);
    let radius_sq = clip_radicand(raw, scale, "enclosing")?;
    Ok(BallEnclosure { center, radius_sq })
}

/// Combination step of geometric descent.
///
/// The two balls are `B(y, √(r1²−εr2²−C))` and `B(z, √((1−ε)r2²−C))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GdCombination {
    pub enclosure: BallEnclosure,
    pub lambda: f64,
    /// `(1−√ε)r1² − C`
    pub certified_bound: f64,
}

pub fn gd_combine(
    z: &Vector,
    y: &Vector,
    r1_sq: f64,
    r2_sq: f64,
    eps: f64,
    c: f64,
) -> Result<GdCombination> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in [0,1], got {eps}")));
    }
    if c < 0.0 || r2_sq <= 0.0 || r1_sq < 0.0 {
        return Err(Error::InvalidParameter("need C >= 0, r1² >= 0 and r2² > 0".into()));
    }
    let scale = r1_sq.max(r2_sq);
    let sigma_sq = clip_radicand(r1_sq - eps * r2_sq - c, scale, "y-ball")?;
    let rho_sq = clip_radicand((1.0 - eps) * r2_sq - c, scale, "z-ball")?;
    let dist = (y - z).norm();
    let tol = CLIP * scale.sqrt().max(1.0);
    if dist < r2_sq.sqrt() - tol {
        return Err(Error::Precondition(format!("‖y−z‖ = {dist} < r2 = {}", r2_sq.sqrt())));
    }
    if dist > sigma_sq.sqrt() + rho_sq.sqrt() + tol {
        return Err(Error::Precondition("the two balls do not intersect".into()));
    }
    let (lambda, radius_sq) = if r1_sq <= 2.0 * r2_sq {
        let lambda = (2.0 * r2_sq - r1_sq) / (2.0 * r2_sq);
        (lambda, r1_sq - eps * r2_sq - r1_sq * r1_sq / (4.0 * r2_sq) - c)
    } else {
        (0.0, (1.0 - eps) * r2_sq - c)
    };
    let center = z * (1.0 - lambda) + y * lambda;
    let certified_bound = (1.0 - eps.sqrt()) * r1_sq - c;
    if radius_sq > certified_bound + 1e-10 * (1.0 + scale) {
        return Err(Error::Precondition(format!(
            "radius {radius_sq} exceeds certified bound {certified_bound}"
        )));
    }
    Ok(GdCombination {
        enclosure: BallEnclosure { center, radius_sq: clip_radicand(radius_sq, scale, "combined")? },
        lambda,
        certified_bound,
    })
}
