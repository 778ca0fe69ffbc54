use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::params::{Param, ParamVector};

/// Gneiting's covariance
/// G(s,t) = φ (β|t|^κ + 1)^{−1} exp(−α‖s‖ / (β|t|^κ + 1)^{γ/2}) + η² (β|t|^κ + 1)^{−1} 1{s=0}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GneitingG {
    pub phi_var: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub eta2: f64,
}

impl GneitingG {
    pub fn from_params(p: &ParamVector) -> Result<Self> {
        let g = GneitingG {
            phi_var: p.require(Param::PhiVar)?,
            alpha: p.require(Param::Alpha)?,
            beta: p.require(Param::Beta)?,
            kappa: p.get_or(Param::Kappa, 1.0),
            gamma: p.get_or(Param::Gamma, 0.0),
            eta2: p.get_or(Param::Eta2, 0.0),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.phi_var > 0.0
            && self.alpha > 0.0
            && self.beta > 0.0
            && self.kappa > 0.0
            && self.kappa <= 2.0
            && (0.0..=1.0).contains(&self.gamma)
            && self.eta2 >= 0.0
            && [self.phi_var, self.alpha, self.beta, self.eta2].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Param(format!("Gneiting G parameters out of domain: {self:?}")))
        }
    }

    /// G at spatial distance ‖s‖ and time lag t.
    pub fn cov(&self, s_norm: f64, t: f64) -> f64 {
        let psi = self.beta * t.abs().powf(self.kappa) + 1.0;
        let mut v = self.phi_var / psi * (-self.alpha * s_norm / psi.powf(self.gamma / 2.0)).exp();
        if s_norm == 0.0 {
            v += self.eta2 / psi;
        }
        v
    }

    /// G for a lag vector.
    pub fn cov_vec(&self, s: &[f64], t: f64) -> f64 {
        self.cov(s.iter().map(|x| x * x).sum::<f64>().sqrt(), t)
    }

    pub fn variance(&self) -> f64 {
        self.phi_var + self.eta2
    }
}

/// Free-function form of [`GneitingG::cov_vec`].
pub fn gneiting_g_cov(params: &ParamVector, s: &[f64], t: f64) -> Result<f64> {
    Ok(GneitingG::from_params(params)?.cov_vec(s, t))
}
