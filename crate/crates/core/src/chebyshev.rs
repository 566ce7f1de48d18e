//! Chebyshev comparator polynomials and the rate bounds they give for the
//! trust-region Lanczos method started from `x₀ = 0`.

use crate::error::{Error, Result};
use crate::model::Vector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralData {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub mu: f64,
    pub delta: f64,
    /// `f(x₀) − f(x*)`
    pub f0_gap: f64,
}

impl SpectralData {
    /// `ζ = √((λ_n+μ*)/(λ₁+μ*))`
    pub fn zeta(&self) -> f64 {
        ((self.lambda_max + self.mu) / (self.lambda_min + self.mu)).sqrt()
    }

    /// Right end of the shifted spectrum, `λ_n + μ*`.
    pub fn top(&self) -> f64 {
        self.lambda_max + self.mu
    }

    fn check_interval(&self) -> Result<()> {
        if !(self.lambda_max > self.lambda_min) {
            return Err(Error::InvalidParameter("degenerate spectral interval".into()));
        }
        if !(self.lambda_min + self.mu > 0.0) {
            return Err(Error::InvalidParameter("need λ₁ + μ* > 0".into()));
        }
        Ok(())
    }
}

/// First-kind Chebyshev polynomial `T_k(z)`.
pub fn chebyshev_t(k: usize, z: f64) -> f64 {
    if z.abs() <= 1.0 {
        return (k as f64 * z.acos()).cos();
    }
    match k {
        0 => 1.0,
        1 => z,
        _ => {
            let (mut prev, mut cur) = (1.0, z);
            for _ in 1..k {
                (prev, cur) = (cur, 2.0 * z * cur - prev);
            }
            cur
        }
    }
}

/// `T̂_k = 1 + T_k` for even `k`, `1 − T_k` for odd `k`; nonnegative on `[−1, 1]`.
pub fn t_hat(k: usize, z: f64) -> f64 {
    if k % 2 == 0 {
        1.0 + chebyshev_t(k, z)
    } else {
        1.0 - chebyshev_t(k, z)
    }
}

/// `Ṫ_k = 1 + T_k` for odd `k`, `1 − T_k` for even `k`; vanishes at `z = −1`.
pub fn t_dot(k: usize, z: f64) -> f64 {
    if k % 2 == 1 {
        1.0 + chebyshev_t(k, z)
    } else {
        1.0 - chebyshev_t(k, z)
    }
}

/// Image of `t` under the affine map sending `[λ₁+μ*, λ_n+μ*]` to `[−1, 1]`.
fn map_a(t: f64, s: &SpectralData) -> f64 {
    (2.0 * t - (s.lambda_min + s.lambda_max + 2.0 * s.mu)) / (s.lambda_max - s.lambda_min)
}

/// `c_k = 1/T̂_k(image of 0)`.
pub fn c_k(k: usize, s: &SpectralData) -> Result<f64> {
    s.check_interval()?;
    Ok(1.0 / t_hat(k, map_a(0.0, s)))
}

/// The closed-form estimate `2((ζ−1)/(ζ+1))^k`.
pub fn c_k_closed_form(k: usize, s: &SpectralData) -> f64 {
    let z = s.zeta();
    2.0 * ((z - 1.0) / (z + 1.0)).powi(k as i32)
}

pub fn q_a(k: usize, t: f64, s: &SpectralData) -> Result<f64> {
    Ok(c_k(k, s)? * t_hat(k, map_a(t, s)))
}

/// `q^B(t) = (λ_n+μ*)·Ṫ_{k+1}(2t/(λ_n+μ*) − 1)/(2(k+1)²t)`, which does not
/// depend on `λ₁`.
pub fn q_b(k: usize, t: f64, s: &SpectralData) -> f64 {
    let top = s.top();
    let m = (k + 1) as f64;
    let ratio = t / top;
    if ratio.abs() < 1e-8 {
        // Limit value 1 plus the first-order term of the series.
        return 1.0 - (m * m - 1.0) * ratio / 3.0;
    }
    if (0.0..=1.0).contains(&ratio) {
        // With sin ψ = √(t/top), Ṫ_{k+1} = 2sin²((k+1)ψ), giving a
        // cancellation-free Fejér-kernel form.
        let psi = ratio.sqrt().asin();
        let r = (m * psi).sin() / (m * psi.sin());
        return r * r;
    }
    top * t_dot(k + 1, 2.0 * ratio - 1.0) / (2.0 * m * m * t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    A,
    B,
}

pub fn q_family(family: Family, k: usize, t: f64, s: &SpectralData) -> Result<f64> {
    match family {
        Family::A => q_a(k, t, s),
        Family::B => Ok(q_b(k, t, s)),
    }
}

fn shifted(d: &[f64], b: &[f64], s: &SpectralData) -> Result<()> {
    if d.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: d.len(), got: b.len() });
    }
    if d.iter().any(|l| !(l + s.mu > 0.0)) {
        return Err(Error::InvalidParameter("comparator needs λ_i + μ* > 0".into()));
    }
    Ok(())
}

/// Comparator point `y = −q̃(D+μ*I)b` where `q(t) = 1 + t·q̃(t)`, for a
/// diagonal `D`. It lies in the Krylov space of dimension `k`.
pub fn comparator(family: Family, k: usize, d: &[f64], b: &[f64], s: &SpectralData) -> Result<Vector> {
    shifted(d, b, s)?;
    let mut y = Vector::zeros(d.len());
    for (i, (l, bi)) in d.iter().zip(b).enumerate() {
        let t = l + s.mu;
        y[i] = (1.0 - q_family(family, k, t, s)?) * bi / t;
    }
    Ok(y)
}

/// The two terms `t₁`, `t₂` whose sum is `f(y) − f(x*)` for the comparator.
pub fn comparator_terms(family: Family, k: usize, d: &[f64], b: &[f64], s: &SpectralData) -> Result<(f64, f64)> {
    shifted(d, b, s)?;
    let (mut t1, mut t2) = (0.0, 0.0);
    for (l, bi) in d.iter().zip(b) {
        let t = l + s.mu;
        let q = q_family(family, k, t, s)?;
        t1 += q * q * bi * bi / t;
        t2 += bi * bi / (t * t) * q * (2.0 - q);
    }
    Ok((0.5 * t1, 0.5 * s.mu * t2))
}

/// `6 c_k (f(x₀) − f(x*))`, valid when `μ* > 0`.
pub fn linear_rate_bound(k: usize, s: &SpectralData) -> Result<f64> {
    if !(s.mu > 0.0) {
        return Err(Error::InvalidParameter("linear bound needs μ* > 0".into()));
    }
    Ok(6.0 * c_k(k, s)? * s.f0_gap)
}

/// `3(λ_n+μ*)Δ²/(2(k+1)²)`
pub fn sublinear_rate_bound(k: usize, s: &SpectralData) -> f64 {
    let m = (k + 1) as f64;
    3.0 * s.top() * s.delta * s.delta / (2.0 * m * m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(l1: f64, ln: f64, mu: f64) -> SpectralData {
        SpectralData { lambda_min: l1, lambda_max: ln, mu, delta: 1.0, f0_gap: 1.0 }
    }

    #[test]
    fn base_cases() {
        for z in [-3.0, -1.0, -0.2, 0.0, 0.7, 1.0, 2.5] {
            assert_eq!(chebyshev_t(0, z), 1.0);
            assert!((chebyshev_t(1, z) - z).abs() < 1e-15);
        }
        assert!((chebyshev_t(2, 0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn recurrence_outside_unit_interval() {
        // T₅(z) = 16z⁵ − 20z³ + 5z
        let z: f64 = 1.3;
        let exact = 16.0 * z.powi(5) - 20.0 * z.powi(3) + 5.0 * z;
        assert!((chebyshev_t(5, z) - exact).abs() <= 1e-12 * exact.abs());
    }

    #[test]
    fn q_a_normalized_at_origin() {
        let s = spec(0.5, 20.0, 0.5);
        for k in 1..=10 {
            assert!((q_a(k, 0.0, &s).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn c_k_for_zeta_three() {
        let s = spec(1.0, 9.0, 0.0);
        assert!((s.zeta() - 3.0).abs() < 1e-15);
        for k in 0..12 {
            let c = c_k(k, &s).unwrap();
            assert!(c <= 2.0 * 0.5_f64.powi(k as i32) + 1e-15);
            if k > 0 {
                assert!(c < 0.5);
            }
        }
        let s = SpectralData { mu: 0.5, lambda_min: 0.5, lambda_max: 8.5, ..s };
        assert!(linear_rate_bound(4, &s).unwrap() <= 0.75);
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(c_k(3, &spec(2.0, 2.0, 1.0)).is_err());
        assert!(linear_rate_bound(2, &spec(1.0, 4.0, 0.0)).is_err());
    }

    #[test]
    fn q_b_limit_and_independence() {
        let a = spec(0.1, 10.0, 1.0);
        let b = spec(5.0, 10.0, 1.0);
        for k in 1..=10 {
            assert_eq!(q_b(k, 0.0, &a), 1.0);
            for t in [1e-12, 0.3, 2.0, 7.7, 11.0] {
                assert_eq!(q_b(k, t, &a), q_b(k, t, &b));
            }
        }
    }

    #[test]
    fn q_b_trig_form_matches_definition() {
        let s = spec(0.0, 4.0, 1.0);
        for k in 1..8 {
            for t in [0.01, 0.5, 1.3, 2.9, 4.99] {
                let direct = s.top() * t_dot(k + 1, 2.0 * t / s.top() - 1.0)
                    / (2.0 * ((k + 1) * (k + 1)) as f64 * t);
                assert!((q_b(k, t, &s) - direct).abs() < 1e-11, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn sublinear_values() {
        let s = SpectralData { lambda_min: 0.0, lambda_max: 1.0, mu: 0.0, delta: 1.0, f0_gap: 1.0 };
        assert_eq!(sublinear_rate_bound(0, &s), 1.5);
        assert!(sublinear_rate_bound(3, &s) < sublinear_rate_bound(2, &s));
    }
}
