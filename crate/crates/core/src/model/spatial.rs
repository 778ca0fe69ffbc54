use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::specfun::{gamma_inv_pq, hyp2f1_fb, ln_matern_m, matern_corr, reg_beta_pair};

/// Spatial function C(r) of the scalar argument r = ‖s‖δ(ω).
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialCorrelation {
    /// φ·c₀·M_μ(α r)/M_μ(0); c₀ = M_μ(0) for the unnormalized class-1 form, 1 otherwise.
    /// `ln_norm` caches ln c₀ − ln M_μ(0).
    Matern { phi: f64, alpha: f64, order: f64, at_zero: f64, ln_norm: f64 },
    /// φ exp(−α² r²).
    Gaussian { phi: f64, alpha: f64 },
}

impl SpatialCorrelation {
    /// φ M_μ(α r) with C(0) = φ 2^{μ−1} Γ(μ).
    pub fn matern_unnormalized(phi: f64, alpha: f64, order: f64) -> Self {
        let at_zero = ((order - 1.0) * std::f64::consts::LN_2 + ln_gamma(order)).exp();
        SpatialCorrelation::Matern { phi, alpha, order, at_zero, ln_norm: 0.0 }
    }

    /// φ M_μ(α r)/M_μ(0), so C(0) = φ.
    pub fn matern_normalized(phi: f64, alpha: f64, order: f64) -> Self {
        let ln_norm = -((order - 1.0) * std::f64::consts::LN_2 + ln_gamma(order));
        SpatialCorrelation::Matern { phi, alpha, order, at_zero: 1.0, ln_norm }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpatialCorrelation::Matern { phi, alpha, order, .. } => {
                phi > 0.0 && alpha > 0.0 && order > 0.0 && phi.is_finite() && alpha.is_finite()
            }
            SpatialCorrelation::Gaussian { phi, alpha } => {
                phi > 0.0 && alpha > 0.0 && phi.is_finite() && alpha.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Param(format!("spatial parameters out of domain: {self:?}")))
        }
    }

    pub fn at_zero(&self) -> f64 {
        match *self {
            SpatialCorrelation::Matern { phi, at_zero, .. } => phi * at_zero,
            SpatialCorrelation::Gaussian { phi, .. } => phi,
        }
    }

    /// C(r) for r ≥ 0 (r = +∞ gives 0).
    pub fn value(&self, r: f64) -> f64 {
        if r == 0.0 {
            return self.at_zero();
        }
        if r.is_infinite() {
            return 0.0;
        }
        match *self {
            SpatialCorrelation::Matern { phi, alpha, order, ln_norm, .. } => {
                let x = alpha * r;
                if x > 800.0 + order.max(0.5) * 20.0 {
                    return 0.0;
                }
                phi * (ln_matern_m(order, x) + ln_norm).exp()
            }
            SpatialCorrelation::Gaussian { phi, alpha } => phi * (-(alpha * r).powi(2)).exp(),
        }
    }

    /// Distance beyond which C(r)/C(0) < rel.
    pub fn negligible_beyond(&self, rel: f64) -> f64 {
        match *self {
            SpatialCorrelation::Matern { alpha, order, .. } => {
                let mut lo = 0.0;
                let mut hi = 1.0;
                while matern_corr(order, hi).unwrap_or(0.0) > rel {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if matern_corr(order, mid).unwrap_or(0.0) > rel {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi / alpha
            }
            SpatialCorrelation::Gaussian { alpha, .. } => (-rel.ln()).sqrt() / alpha,
        }
    }

    /// Spectral density h(λ) of C in d dimensions, with C(s) = (2π)^{−d} ∫ h(λ) e^{isλ} dλ.
    pub fn spectral_density(&self, lambda_norm: f64, d: usize) -> f64 {
        let dd = d as f64;
        match *self {
            SpatialCorrelation::Matern { phi, alpha, order, at_zero, .. } => {
                // ∫ (α² + λ²)^{−(μ+d/2)} e^{isλ} dλ = π^{d/2} 2^{1−μ} M_μ(α s) / (Γ(μ+d/2) α^{2μ})
                let e = order + dd / 2.0;
                let ln_c = dd * (2.0 * PI).ln() + (phi * at_zero).ln()
                    - ((order - 1.0) * std::f64::consts::LN_2 + ln_gamma(order))
                    + ln_gamma(e)
                    + 2.0 * order * alpha.ln()
                    - 0.5 * dd * PI.ln()
                    - (1.0 - order) * std::f64::consts::LN_2;
                (ln_c - e * (alpha * alpha + lambda_norm * lambda_norm).ln()).exp()
            }
            SpatialCorrelation::Gaussian { phi, alpha } => {
                phi * (PI / (alpha * alpha)).powf(dd / 2.0)
                    * (-(lambda_norm * lambda_norm) / (4.0 * alpha * alpha)).exp()
            }
        }
    }

    /// Fourier-decay class of h: Some(order) for algebraic decay, None for Gaussian.
    pub fn matern_order(&self) -> Option<f64> {
        match *self {
            SpatialCorrelation::Matern { order, .. } => Some(order),
            SpatialCorrelation::Gaussian { .. } => None,
        }
    }
}

/// Interaction function δ(ω).
#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    /// δ ≡ c (separable).
    Constant(f64),
    /// δ(ω) = f(ω)^{exponent}, exponent = −1/(2ν+1).
    Power { exponent: f64 },
    /// δ(ω) = F_{|A|}^{-1}(2F_B(|ω|) − 1) with |A| ~ 1/√(2χ²_{2ν}) and F_B the
    /// Student-type distribution with parameters (β, κ).
    QuantileCoupling { beta: f64, kappa: f64, nu: f64 },
}

impl Interaction {
    pub fn value(&self, omega: f64, f: f64) -> Result<f64> {
        match *self {
            Interaction::Constant(c) => Ok(c),
            Interaction::Power { exponent } => {
                if f.is_infinite() {
                    Ok(0.0)
                } else {
                    Ok(f.powf(exponent))
                }
            }
            Interaction::QuantileCoupling { beta, kappa, nu } => quantile_delta(beta, kappa, nu, omega),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Interaction::Constant(_))
    }
}

/// Two-sided probabilities (u, 1 − u) with u = 2F_B(|ω|) − 1 = P(|B| ≤ |ω|).
pub fn student_two_sided(beta: f64, kappa: f64, omega: f64) -> Result<(f64, f64)> {
    let z = omega.abs() / beta;
    if z == 0.0 {
        return Ok((0.0, 1.0));
    }
    if z <= 1.0 {
        let c = (ln_gamma(kappa + 0.5) - ln_gamma(kappa) - 0.5 * PI.ln()).exp();
        let u = 2.0 * c * z * hyp2f1_fb(kappa, z)?;
        Ok((u, 1.0 - u))
    } else {
        // upper tail P(|B| > |ω|) = I_{β²/(β²+ω²)}(κ, 1/2)
        let x = 1.0 / (1.0 + z * z);
        let (q, u) = reg_beta_pair(kappa, 0.5, x)?;
        Ok((u, q))
    }
}

/// Distribution function F_B(ω) of the unit-mass Student-type density.
pub fn student_cdf(beta: f64, kappa: f64, omega: f64) -> Result<f64> {
    let (u, q) = student_two_sided(beta, kappa, omega)?;
    Ok(if omega >= 0.0 { 0.5 + 0.5 * u } else { 0.5 * q })
}

fn quantile_delta(beta: f64, kappa: f64, nu: f64, omega: f64) -> Result<f64> {
    let (u, q) = student_two_sided(beta, kappa, omega)?;
    if u == 0.0 {
        return Ok(0.0);
    }
    if q == 0.0 {
        return Ok(f64::INFINITY);
    }
    // quantile of |A| at level u: 1/√(4 P⁻¹(ν, 1 − u))
    let x = gamma_inv_pq(nu, q, u)?;
    if x == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (4.0 * x).sqrt())
}

/// Builds δ for the class-1 construction from the temporal spectrum.
pub(crate) fn class1_interaction(nu: f64) -> Interaction {
    Interaction::Power { exponent: -1.0 / (2.0 * nu + 1.0) }
}
