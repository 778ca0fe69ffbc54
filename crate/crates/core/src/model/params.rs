use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    PhiVar,
    Alpha,
    Beta,
    Beta1,
    Beta2,
    Kappa,
    Nu,
    Eta2,
    Rho,
    Gamma,
}

impl Param {
    pub const ALL: [Param; 10] = [
        Param::PhiVar,
        Param::Alpha,
        Param::Beta,
        Param::Beta1,
        Param::Beta2,
        Param::Kappa,
        Param::Nu,
        Param::Eta2,
        Param::Rho,
        Param::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::PhiVar => "phi_var",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::Beta1 => "beta1",
            Param::Beta2 => "beta2",
            Param::Kappa => "kappa",
            Param::Nu => "nu",
            Param::Eta2 => "eta2",
            Param::Rho => "rho",
            Param::Gamma => "gamma",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let p = match key.as_str() {
            "phi_var" | "phi" | "sigma2" => Param::PhiVar,
            "alpha" => Param::Alpha,
            "beta" => Param::Beta,
            "beta1" | "beta_1" => Param::Beta1,
            "beta2" | "beta_2" => Param::Beta2,
            "kappa" => Param::Kappa,
            "nu" => Param::Nu,
            "eta2" | "eta_2" | "nugget" => Param::Eta2,
            "rho" => Param::Rho,
            "gamma" => Param::Gamma,
            _ => return Err(Error::Parse(format!("unknown parameter '{s}'"))),
        };
        Ok(p)
    }
}

/// Parameter values keyed by name. Iteration order is fixed (declaration order).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(BTreeMap<Param, f64>);

impl ParamVector {
    pub fn new() -> Self {
        ParamVector(BTreeMap::new())
    }

    pub fn with(mut self, p: Param, v: f64) -> Self {
        self.0.insert(p, v);
        self
    }

    pub fn set(&mut self, p: Param, v: f64) {
        self.0.insert(p, v);
    }

    pub fn get(&self, p: Param) -> Option<f64> {
        self.0.get(&p).copied()
    }

    pub fn require(&self, p: Param) -> Result<f64> {
        self.get(p).ok_or_else(|| Error::Param(format!("missing parameter {p}")))
    }

    pub fn get_or(&self, p: Param, default: f64) -> f64 {
        self.get(p).unwrap_or(default)
    }

    pub fn contains(&self, p: Param) -> bool {
        self.0.contains_key(&p)
    }

    pub fn remove(&mut self, p: Param) -> Option<f64> {
        self.0.remove(&p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Param, f64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = Param> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Overwrites entries with those of `other`.
    pub fn merge(&mut self, other: &ParamVector) {
        for (k, v) in other.iter() {
            self.set(k, v);
        }
    }

    /// Parses `name=value` pairs separated by commas.
    pub fn parse_pairs(s: &str) -> Result<ParamVector> {
        let mut out = ParamVector::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected name=value, got '{item}'")))?;
            let p: Param = k.parse()?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number in '{item}'")))?;
            out.set(p, v);
        }
        Ok(out)
    }
}

impl FromIterator<(Param, f64)> for ParamVector {
    fn from_iter<I: IntoIterator<Item = (Param, f64)>>(iter: I) -> Self {
        ParamVector(iter.into_iter().collect())
    }
}
