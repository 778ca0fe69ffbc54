//! Half-spectral space-time covariance models.
//!
//! A model is specified through its half-spectrum in time,
//! f(ω)[C(s δ(ω)) + η² 1{s=0}] e^{iθ(ω)φᵀs}, with K(s,t) = ∫ (…) e^{itω} dω.

mod gneiting;
mod params;
mod spatial;
mod temporal;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gneiting::{gneiting_g_cov, GneitingG};
pub use params::{Param, ParamVector};
pub use spatial::{student_cdf, student_two_sided, Interaction, SpatialCorrelation};
pub use temporal::{f_g_eval, TemporalSpectrum};

/// Built-in model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "matern_in_time")]
    MaternInTime,
    /// Matérn in time with κ tied to ν: a (d+1)-dimensional Matérn.
    #[serde(rename = "matern")]
    Matern,
    #[serde(rename = "ar2_in_time")]
    Ar2InTime,
    #[serde(rename = "marginal_matern")]
    MarginalMatern,
    #[serde(rename = "k_fG")]
    KfG,
    #[serde(rename = "separable_exponential")]
    SeparableExponential,
    #[serde(rename = "cressie_huang")]
    CressieHuang,
    #[serde(rename = "gneiting_separable_half")]
    GneitingSeparableHalf,
    #[serde(rename = "gneiting_g")]
    GneitingG,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::MaternInTime,
        Family::Matern,
        Family::Ar2InTime,
        Family::MarginalMatern,
        Family::KfG,
        Family::SeparableExponential,
        Family::CressieHuang,
        Family::GneitingSeparableHalf,
        Family::GneitingG,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::MaternInTime => "matern_in_time",
            Family::Matern => "matern",
            Family::Ar2InTime => "ar2_in_time",
            Family::MarginalMatern => "marginal_matern",
            Family::KfG => "k_fG",
            Family::SeparableExponential => "separable_exponential",
            Family::CressieHuang => "cressie_huang",
            Family::GneitingSeparableHalf => "gneiting_separable_half",
            Family::GneitingG => "gneiting_g",
        }
    }

    /// Parameters the family always uses (ρ is optional for half-spectral families).
    pub fn params(self) -> &'static [Param] {
        use Param::*;
        match self {
            Family::MaternInTime | Family::MarginalMatern => &[PhiVar, Alpha, Beta, Kappa, Nu, Eta2],
            Family::Matern | Family::KfG => &[PhiVar, Alpha, Beta, Nu, Eta2],
            Family::Ar2InTime => &[PhiVar, Alpha, Beta1, Beta2, Nu, Eta2],
            Family::SeparableExponential | Family::CressieHuang | Family::GneitingSeparableHalf => {
                &[PhiVar, Alpha, Beta, Eta2]
            }
            Family::GneitingG => &[PhiVar, Alpha, Beta, Kappa, Gamma, Eta2],
        }
    }

    /// Default parameter values (used by the CLI and diagnostics).
    pub fn defaults(self) -> ParamVector {
        use Param::*;
        let base = ParamVector::new().with(PhiVar, 1.0).with(Alpha, 1.0).with(Eta2, 0.0);
        match self {
            Family::MaternInTime => base.with(Beta, 1.0).with(Kappa, 0.5).with(Nu, 0.4),
            Family::Matern => base.with(Beta, 1.0).with(Nu, 0.5),
            Family::Ar2InTime => base.with(Beta1, 1.0).with(Beta2, 1.0).with(Nu, 1.5),
            Family::MarginalMatern => base.with(Beta, 1.0).with(Kappa, 0.5).with(Nu, 0.5),
            Family::KfG => base.with(Beta, 1.0).with(Nu, 0.5),
            Family::SeparableExponential | Family::CressieHuang | Family::GneitingSeparableHalf => {
                base.with(Beta, 1.0)
            }
            Family::GneitingG => base.with(Beta, 1.0).with(Kappa, 1.0).with(Gamma, 0.0),
        }
    }

    pub fn is_half_spectral(self) -> bool {
        self != Family::GneitingG
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(key))
            .or(match key.to_ascii_lowercase().as_str() {
                "example1" | "example_1" => Some(Family::MaternInTime),
                "example2" | "example_2" | "ar2" => Some(Family::Ar2InTime),
                "example3" | "example_3" => Some(Family::MarginalMatern),
                "kfg" | "k_fg" => Some(Family::KfG),
                "g" | "gneiting" => Some(Family::GneitingG),
                _ => None,
            })
            .ok_or_else(|| Error::Parse(format!("unknown model family '{s}'")))
    }
}

/// Serializable model description: `{family, params{...}, d, phi:[...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub params: ParamVector,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
}

impl ModelSpec {
    pub fn new(family: Family, params: ParamVector, d: usize) -> Self {
        ModelSpec { family, params, d, phi: None }
    }

    pub fn build(&self) -> Result<CovModel> {
        if self.family == Family::GneitingG {
            return Ok(CovModel::G(GneitingG::from_params(&self.params)?));
        }
        let mut m = HalfSpectralModel::new(self.family, &self.params, self.d)?;
        if let Some(phi) = &self.phi {
            m = m.with_phi(phi)?;
        }
        Ok(CovModel::Half(m))
    }
}

/// Either a half-spectral model or the closed-form Gneiting covariance.
#[derive(Debug, Clone)]
pub enum CovModel {
    Half(HalfSpectralModel),
    G(GneitingG),
}

impl CovModel {
    pub fn family(&self) -> Family {
        match self {
            CovModel::Half(m) => m.family,
            CovModel::G(_) => Family::GneitingG,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            CovModel::Half(m) => m.variance(),
            CovModel::G(g) => g.variance(),
        }
    }

    pub fn as_half(&self) -> Result<&HalfSpectralModel> {
        match self {
            CovModel::Half(m) => Ok(m),
            CovModel::G(_) => Err(Error::Unsupported(
                "no closed-form half-spectrum for the general Gneiting covariance".into(),
            )),
        }
    }
}

/// A half-spectral space-time covariance model.
#[derive(Debug, Clone)]
pub struct HalfSpectralModel {
    pub family: Family,
    pub params: ParamVector,
    pub temporal: TemporalSpectrum,
    pub spatial: SpatialCorrelation,
    pub interaction: Interaction,
    /// Phase slope: θ(ω) = ρω.
    pub rho: f64,
    /// Unit direction of the phase shift.
    pub phi: Vec<f64>,
    pub eta2: f64,
    pub d: usize,
    /// Spatial smoothness parameter ν where the family has one.
    pub nu: Option<f64>,
    negligible_r: f64,
}

fn positive(p: &ParamVector, k: Param) -> Result<f64> {
    let v = p.require(k)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Param(format!("{k} must be positive and finite, got {v}")))
    }
}

impl HalfSpectralModel {
    /// Builds a family from named parameters. ρ defaults to 0 and φ to the first axis.
    pub fn new(family: Family, p: &ParamVector, d: usize) -> Result<Self> {
        use Param::*;
        let phi_var = positive(p, PhiVar)?;
        let alpha = positive(p, Alpha)?;
        let eta2 = p.get_or(Eta2, 0.0);
        if !(eta2 >= 0.0) || !eta2.is_finite() {
            return Err(Error::Param(format!("eta2 must be nonnegative, got {eta2}")));
        }
        let rho = p.get_or(Rho, 0.0);
        if !rho.is_finite() {
            return Err(Error::Param("rho must be finite".into()));
        }
        let class1_nu = |p: &ParamVector| -> Result<f64> {
            let nu = p.require(Nu)?;
            if nu + 0.5 > 0.0 && nu.is_finite() {
                Ok(nu)
            } else {
                Err(Error::Param(format!("nu + 1/2 must be positive, got nu = {nu}")))
            }
        };
        let (temporal, spatial, interaction, nu) = match family {
            Family::MaternInTime | Family::Matern => {
                let beta = positive(p, Beta)?;
                let nu = class1_nu(p)?;
                let kappa = if family == Family::Matern {
                    if !(nu > 0.0) {
                        return Err(Error::Param("matern requires nu > 0".into()));
                    }
                    nu
                } else {
                    positive(p, Kappa)?
                };
                (
                    TemporalSpectrum::PowerMatern { beta, kappa },
                    SpatialCorrelation::matern_unnormalized(phi_var, alpha, nu + 0.5),
                    spatial::class1_interaction(nu),
                    Some(nu),
                )
            }
            Family::Ar2InTime => {
                let nu = class1_nu(p)?;
                (
                    TemporalSpectrum::Ar2 { beta1: positive(p, Beta1)?, beta2: positive(p, Beta2)? },
                    SpatialCorrelation::matern_unnormalized(phi_var, alpha, nu + 0.5),
                    spatial::class1_interaction(nu),
                    Some(nu),
                )
            }
            Family::KfG => {
                let nu = class1_nu(p)?;
                (
                    TemporalSpectrum::Gneiting { beta: positive(p, Beta)? },
                    SpatialCorrelation::matern_unnormalized(phi_var, alpha, nu + 0.5),
                    spatial::class1_interaction(nu),
                    Some(nu),
                )
            }
            Family::MarginalMatern => {
                let beta = positive(p, Beta)?;
                let kappa = positive(p, Kappa)?;
                let nu = positive(p, Nu)?;
                (
                    TemporalSpectrum::StudentT { beta, kappa },
                    SpatialCorrelation::Gaussian { phi: phi_var, alpha },
                    Interaction::QuantileCoupling { beta, kappa, nu },
                    Some(nu),
                )
            }
            Family::SeparableExponential => (
                TemporalSpectrum::Exponential { beta: positive(p, Beta)? },
                SpatialCorrelation::matern_normalized(phi_var, alpha, 0.5),
                Interaction::Constant(1.0),
                None,
            ),
            Family::CressieHuang => (
                TemporalSpectrum::Cauchy { beta: positive(p, Beta)? },
                SpatialCorrelation::Gaussian { phi: phi_var, alpha },
                Interaction::Constant(1.0),
                None,
            ),
            Family::GneitingSeparableHalf => (
                TemporalSpectrum::Gneiting { beta: positive(p, Beta)? },
                SpatialCorrelation::matern_normalized(phi_var, alpha, 0.5),
                Interaction::Constant(1.0),
                None,
            ),
            Family::GneitingG => {
                return Err(Error::Unsupported(
                    "gneiting_g has no half-spectral form; use GneitingG".into(),
                ))
            }
        };
        temporal.validate()?;
        spatial.validate()?;
        let mut phi = vec![0.0; d];
        if d > 0 {
            phi[0] = 1.0;
        }
        let negligible_r = spatial.negligible_beyond(1e-18);
        Ok(HalfSpectralModel {
            family,
            params: p.clone(),
            temporal,
            spatial,
            interaction,
            rho,
            phi,
            eta2,
            d,
            nu,
            negligible_r,
        })
    }

    /// Sets the phase direction (normalized to unit length).
    pub fn with_phi(mut self, phi: &[f64]) -> Result<Self> {
        if phi.len() != self.d {
            return Err(Error::Param(format!("phi has length {}, expected d = {}", phi.len(), self.d)));
        }
        let n = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Param("phi must be a nonzero finite vector".into()));
        }
        self.phi = phi.iter().map(|x| x / n).collect();
        Ok(self)
    }

    /// Sets the phase slope ρ in θ(ω) = ρω.
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self.params.set(Param::Rho, rho);
        self
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec { family: self.family, params: self.params.clone(), d: self.d, phi: Some(self.phi.clone()) }
    }

    /// Temporal spectral density f(ω).
    pub fn f(&self, omega: f64) -> f64 {
        self.temporal.density(omega)
    }

    /// Interaction δ(ω).
    pub fn delta(&self, omega: f64) -> Result<f64> {
        self.interaction.value(omega, self.f(omega))
    }

    /// Phase θ(ω) = ρω.
    pub fn theta(&self, omega: f64) -> f64 {
        self.rho * omega
    }

    /// φᵀs.
    pub fn project(&self, s: &[f64]) -> f64 {
        self.phi.iter().zip(s).map(|(a, b)| a * b).sum()
    }

    /// C(r·δ) + η² 1{r=0}, given δ.
    pub fn q_with_delta(&self, s_norm: f64, delta: f64) -> f64 {
        if s_norm == 0.0 {
            return self.spatial.at_zero() + self.eta2;
        }
        if delta == 0.0 {
            return self.spatial.at_zero();
        }
        let r = s_norm * delta;
        if r > self.negligible_r {
            0.0
        } else {
            self.spatial.value(r)
        }
    }

    /// C(‖s‖δ(ω)) + η² 1{s=0}.
    pub fn q(&self, s_norm: f64, omega: f64) -> Result<f64> {
        if s_norm == 0.0 {
            return Ok(self.spatial.at_zero() + self.eta2);
        }
        Ok(self.q_with_delta(s_norm, self.delta(omega)?))
    }

    /// Limits of q as ω → 0 and |ω| → ∞.
    pub fn q_limits(&self, s_norm: f64) -> Result<(f64, f64)> {
        if s_norm == 0.0 {
            let v = self.spatial.at_zero() + self.eta2;
            return Ok((v, v));
        }
        let q0 = self.q(s_norm, 0.0)?;
        let qinf = match self.interaction {
            Interaction::Constant(c) => self.q_with_delta(s_norm, c),
            _ => 0.0,
        };
        Ok((q0, qinf))
    }

    /// Half-spectrum f(ω)[C(sδ(ω)) + η² 1{s=0}] e^{iθ(ω)φᵀs}.
    pub fn half_spectrum(&self, s: &[f64], omega: f64) -> Result<Complex64> {
        self.check_dim(s.len())?;
        let s_norm = norm(s);
        let f = self.f(omega);
        let q = self.q(s_norm, omega)?;
        let amp = if q == 0.0 { 0.0 } else { f * q };
        let phase = self.theta(omega) * self.project(s);
        if phase == 0.0 {
            Ok(Complex64::new(amp, 0.0))
        } else {
            Ok(Complex64::from_polar(amp, phase))
        }
    }

    /// Full space-time spectral density g(λ, ω) with
    /// K(s,t) = (2π)^{−(d+1)} ∫∫ g(λ,ω) e^{i(sλ + tω)} dλ dω (nugget excluded).
    pub fn full_spectrum(&self, lambda: &[f64], omega: f64) -> Result<f64> {
        Ok(self.ln_full_spectrum(lambda, omega)?.exp())
    }

    /// ln g(λ, ω), finite even where g underflows.
    pub fn ln_full_spectrum(&self, lambda: &[f64], omega: f64) -> Result<f64> {
        self.check_dim(lambda.len())?;
        let th = self.theta(omega);
        let shifted2: f64 = lambda
            .iter()
            .zip(&self.phi)
            .map(|(l, p)| {
                let v = l - th * p;
                v * v
            })
            .sum();
        let f = self.f(omega);
        let delta = self.delta(omega)?;
        if !(delta > 0.0) || !delta.is_finite() || !f.is_finite() {
            return Err(Error::Domain(format!("full spectrum undefined at omega = {omega}")));
        }
        let dd = self.d as f64;
        let ln = match self.spatial {
            SpatialCorrelation::Matern { alpha, order, .. } => {
                // f δ^{-d} h(λ/δ) = f δ^{2μ} · A (α²δ² + λ²)^{−(μ+d/2)}
                let e = order + dd / 2.0;
                let a_coef = self.spatial.spectral_density(0.0, self.d) * alpha.powf(2.0 * e);
                f.ln() + 2.0 * order * delta.ln() + a_coef.ln() - e * ((alpha * delta).powi(2) + shifted2).ln()
            }
            SpatialCorrelation::Gaussian { alpha, .. } => {
                let h0 = self.spatial.spectral_density(0.0, self.d);
                f.ln() - dd * delta.ln() + h0.ln() - shifted2 / (4.0 * alpha * alpha * delta * delta)
            }
        };
        Ok((2.0 * PI).ln() + ln)
    }

    /// Closed-form temporal margin K_f(t) = ∫ f(ω) e^{itω} dω.
    pub fn temporal_cov(&self, t: f64) -> f64 {
        self.temporal.covariance(t)
    }

    /// K(0, 0).
    pub fn variance(&self) -> f64 {
        self.temporal.mass() * (self.spatial.at_zero() + self.eta2)
    }

    /// δ is monotone nondecreasing in |ω| beyond this frequency.
    pub fn delta_monotone_from(&self) -> f64 {
        match self.interaction {
            Interaction::Power { .. } => self.temporal.monotone_from(),
            Interaction::QuantileCoupling { .. } => 0.0,
            Interaction::Constant(_) => f64::INFINITY,
        }
    }

    /// Spatial distance beyond which C is below 1e−18 of C(0).
    pub fn negligible_distance(&self) -> f64 {
        self.negligible_r
    }

    pub fn is_fully_symmetric(&self) -> bool {
        self.rho == 0.0
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.d {
            Err(Error::Param(format!("vector of length {n} for a model with d = {}", self.d)))
        } else {
            Ok(())
        }
    }
}

pub(crate) fn norm(s: &[f64]) -> f64 {
    s.iter().map(|x| x * x).sum::<f64>().sqrt()
}

macro_rules! family_ctor {
    ($(#[$m:meta])* $name:ident, $fam:expr) => {
        $(#[$m])*
        pub fn $name(params: &ParamVector, d: usize) -> Result<HalfSpectralModel> {
            HalfSpectralModel::new($fam, params, d)
        }
    };
}

family_ctor!(
    /// Example 1: f(ω) = (β² + ω²)^{−(κ+1/2)}, C = φ M_{ν+1/2}(α‖s‖), δ = f^{−1/(2ν+1)}.
    make_matern_in_time,
    Family::MaternInTime
);
family_ctor!(
    /// Example 2: continuous AR(2) temporal spectrum in the class-1 construction.
    make_ar2_in_time,
    Family::Ar2InTime
);
family_ctor!(
    /// Example 3: Student-type f_B, Gaussian C, quantile-coupled δ.
    make_marginal_matern,
    Family::MarginalMatern
);
family_ctor!(
    /// f_G/(2π) in the class-1 construction.
    make_k_fg,
    Family::KfG
);
family_ctor!(make_separable_exponential, Family::SeparableExponential);
family_ctor!(make_cressie_huang, Family::CressieHuang);
family_ctor!(make_gneiting_separable_half, Family::GneitingSeparableHalf);

/// Half-spectrum at lag s and frequency ω.
pub fn half_spectrum_eval(model: &HalfSpectralModel, s: &[f64], omega: f64) -> Result<Complex64> {
    model.half_spectrum(s, omega)
}

/// Full spectrum g(λ, ω).
pub fn full_spectrum_eval(model: &HalfSpectralModel, lambda: &[f64], omega: f64) -> Result<f64> {
    model.full_spectrum(lambda, omega)
}
