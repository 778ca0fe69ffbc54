use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::specfun::{aux_g, matern_m};

/// Temporal spectral density f(ω). The convention is K_f(t) = ∫ f(ω) e^{itω} dω.
#[derive(Debug, Clone, PartialEq)]
pub enum TemporalSpectrum {
    /// (β² + ω²)^{−(κ+1/2)}, scale fixed at one.
    PowerMatern { beta: f64, kappa: f64 },
    /// Unit-mass Student-type density β^{2κ} Γ(κ+1/2)/(√π Γ(κ)) (β² + ω²)^{−(κ+1/2)}.
    StudentT { beta: f64, kappa: f64 },
    /// Continuous AR(2): β₁β₂ / (π((β₂ − ω²)² + β₁²ω²)), unit variance.
    Ar2 { beta1: f64, beta2: f64 },
    /// Spectrum of (β|t| + 1)^{−1}: f_G(ω; β, 1)/(2π).
    Gneiting { beta: f64 },
    /// β/(π(β² + ω²)), the spectrum of e^{−β|t|}.
    Exponential { beta: f64 },
    /// (β² + ω²)^{−1}.
    Cauchy { beta: f64 },
}

fn ln_student_norm(beta: f64, kappa: f64) -> f64 {
    2.0 * kappa * beta.ln() + ln_gamma(kappa + 0.5) - 0.5 * PI.ln() - ln_gamma(kappa)
}

impl TemporalSpectrum {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TemporalSpectrum::PowerMatern { beta, kappa } | TemporalSpectrum::StudentT { beta, kappa } => {
                beta > 0.0 && kappa > 0.0 && beta.is_finite() && kappa.is_finite()
            }
            TemporalSpectrum::Ar2 { beta1, beta2 } => {
                beta1 > 0.0 && beta2 > 0.0 && beta1.is_finite() && beta2.is_finite()
            }
            TemporalSpectrum::Gneiting { beta }
            | TemporalSpectrum::Exponential { beta }
            | TemporalSpectrum::Cauchy { beta } => beta > 0.0 && beta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Param(format!("temporal spectrum parameters out of domain: {self:?}")))
        }
    }

    /// f(ω). The Gneiting density is +∞ at ω = 0.
    pub fn density(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        match *self {
            TemporalSpectrum::PowerMatern { beta, kappa } => (beta * beta + w2).powf(-(kappa + 0.5)),
            TemporalSpectrum::StudentT { beta, kappa } => {
                (ln_student_norm(beta, kappa) - (kappa + 0.5) * (beta * beta + w2).ln()).exp()
            }
            TemporalSpectrum::Ar2 { beta1, beta2 } => {
                let a = beta2 - w2;
                beta1 * beta2 / (PI * (a * a + beta1 * beta1 * w2))
            }
            TemporalSpectrum::Gneiting { beta } => {
                if omega == 0.0 {
                    f64::INFINITY
                } else {
                    aux_g(omega.abs() / beta).expect("positive argument") / (PI * beta)
                }
            }
            TemporalSpectrum::Exponential { beta } => beta / (PI * (beta * beta + w2)),
            TemporalSpectrum::Cauchy { beta } => 1.0 / (beta * beta + w2),
        }
    }

    /// Closed-form temporal covariance K_f(t) = ∫ f(ω) e^{itω} dω.
    pub fn covariance(&self, t: f64) -> f64 {
        let at = t.abs();
        match *self {
            TemporalSpectrum::PowerMatern { beta, kappa } => {
                // 2√π / (Γ(κ+1/2) 2^κ β^{2κ}) M_κ(β|t|)
                let ln_c = std::f64::consts::LN_2 + 0.5 * PI.ln()
                    - ln_gamma(kappa + 0.5)
                    - kappa * std::f64::consts::LN_2
                    - 2.0 * kappa * beta.ln();
                ln_c.exp() * matern_m(kappa, beta * at).expect("valid order")
            }
            TemporalSpectrum::StudentT { beta, kappa } => {
                let ln_c = (kappa - 1.0) * std::f64::consts::LN_2 + ln_gamma(kappa);
                matern_m(kappa, beta * at).expect("valid order") / ln_c.exp()
            }
            TemporalSpectrum::Ar2 { beta1, beta2 } => ar2_covariance(beta1, beta2, at),
            TemporalSpectrum::Gneiting { beta } => 1.0 / (beta * at + 1.0),
            TemporalSpectrum::Exponential { beta } => (-beta * at).exp(),
            TemporalSpectrum::Cauchy { beta } => PI / beta * (-beta * at).exp(),
        }
    }

    /// K_f(0), the integral of f.
    pub fn mass(&self) -> f64 {
        self.covariance(0.0)
    }

    /// (c, k) with f(ω) ~ c |ω|^{−k} as |ω| → ∞.
    pub fn tail(&self) -> (f64, f64) {
        match *self {
            TemporalSpectrum::PowerMatern { kappa, .. } => (1.0, 2.0 * kappa + 1.0),
            TemporalSpectrum::StudentT { beta, kappa } => {
                (ln_student_norm(beta, kappa).exp(), 2.0 * kappa + 1.0)
            }
            TemporalSpectrum::Ar2 { beta1, beta2 } => (beta1 * beta2 / PI, 4.0),
            TemporalSpectrum::Gneiting { beta } => (beta / PI, 2.0),
            TemporalSpectrum::Exponential { beta } => (beta / PI, 2.0),
            TemporalSpectrum::Cauchy { .. } => (1.0, 2.0),
        }
    }

    /// Coefficient c of a −c ln|ω| singularity at the origin, if any.
    pub fn log_singularity(&self) -> Option<f64> {
        match *self {
            TemporalSpectrum::Gneiting { beta } => Some(1.0 / (PI * beta)),
            _ => None,
        }
    }

    /// f is nonincreasing in |ω| beyond this frequency.
    pub fn monotone_from(&self) -> f64 {
        match *self {
            TemporalSpectrum::Ar2 { beta1, beta2 } => (beta2 - 0.5 * beta1 * beta1).max(0.0).sqrt(),
            _ => 0.0,
        }
    }

    /// Characteristic frequency scale.
    pub fn scale(&self) -> f64 {
        match *self {
            TemporalSpectrum::PowerMatern { beta, .. }
            | TemporalSpectrum::StudentT { beta, .. }
            | TemporalSpectrum::Gneiting { beta }
            | TemporalSpectrum::Exponential { beta }
            | TemporalSpectrum::Cauchy { beta } => beta,
            TemporalSpectrum::Ar2 { beta1, beta2 } => beta1.max(beta2.sqrt()),
        }
    }
}

/// Unit-variance covariance of the continuous AR(2) spectrum.
fn ar2_covariance(a1: f64, a2: f64, t: f64) -> f64 {
    let disc = a1 * a1 / 4.0 - a2;
    let scale = a1 * a1 / 4.0 + a2;
    if disc.abs() <= 1e-12 * scale {
        let l = a1 / 2.0;
        (-l * t).exp() * (1.0 + l * t)
    } else if disc < 0.0 {
        let b = (-disc).sqrt();
        (-a1 * t / 2.0).exp() * ((b * t).cos() + a1 / (2.0 * b) * (b * t).sin())
    } else {
        let r = disc.sqrt();
        let l1 = a1 / 2.0 + r;
        let l2 = a1 / 2.0 - r;
        (l1 * (-l2 * t).exp() - l2 * (-l1 * t).exp()) / (l1 - l2)
    }
}

/// f_G(ω) = (φ/β)[π sin x − 2 Si(x) sin x − 2 Ci(x) cos x], x = |ω|/β,
/// the cosine-transform spectrum of φ(β|t| + 1)^{−1}.
pub fn f_g_eval(beta: f64, phi_var: f64, omega: f64) -> Result<f64> {
    if !(beta > 0.0) || !(phi_var > 0.0) || omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(format!("f_G(beta={beta}, phi={phi_var}, omega={omega})")));
    }
    Ok(2.0 * phi_var / beta * aux_g(omega.abs() / beta)?)
}
