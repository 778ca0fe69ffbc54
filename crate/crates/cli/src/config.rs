use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use halfspec::model::{Family, Param, ParamVector};
use halfspec::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "halfspec", version, about = "Half-spectral space-time covariance models")]
pub struct Cli {
    /// Worker thread cap.
    #[arg(long, global = true, env = "HALFSPEC_THREADS")]
    pub threads: Option<usize>,
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Model family, e.g. matern_in_time, ar2_in_time, k_fG, separable_exponential.
    #[arg(long)]
    pub family: Option<String>,
    /// Parameters as name=value pairs separated by commas.
    #[arg(long)]
    pub params: Option<String>,
    /// Process variance φ_var.
    #[arg(long)]
    pub phi_var: Option<f64>,
    /// Spatial inverse range α (per distance unit).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Temporal inverse range β (per time unit).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Nugget variance η².
    #[arg(long)]
    pub eta2: Option<f64>,
    /// Phase slope ρ (distance units per radian/time unit).
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Spatial dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Phase direction φ, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phase_dir: Option<Vec<f64>>,
}

impl ModelArgs {
    pub fn flag_params(&self) -> Result<ParamVector> {
        let mut p = match &self.params {
            Some(s) => ParamVector::parse_pairs(s)?,
            None => ParamVector::new(),
        };
        let flags = [
            (Param::PhiVar, self.phi_var),
            (Param::Alpha, self.alpha),
            (Param::Beta, self.beta),
            (Param::Beta1, self.beta1),
            (Param::Beta2, self.beta2),
            (Param::Kappa, self.kappa),
            (Param::Nu, self.nu),
            (Param::Eta2, self.eta2),
            (Param::Rho, self.rho),
            (Param::Gamma, self.gamma),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                p.set(k, v);
            }
        }
        Ok(p)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Whittle,
    Exact,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw regular monitoring data from a model (time step 1).
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// CSV of site coordinates, one site per line, no header.
        #[arg(long)]
        sites: Option<PathBuf>,
        /// Number of uniformly placed random sites, used when --sites is absent.
        #[arg(long)]
        random_sites: Option<usize>,
        /// Side of the square (or cube) holding random sites.
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
        /// Number of time points.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Square root, remove seasonal harmonics, standardize, and map sites to km.
    Preprocess {
        /// Long-format CSV: station, lon, lat, date, value.
        #[arg(long)]
        input: PathBuf,
        /// Station ids to leave out, comma separated.
        #[arg(long, value_delimiter = ',')]
        drop: Vec<String>,
        #[arg(long, default_value_t = 4)]
        harmonics: usize,
        /// Fit the seasonal curve per station instead of pooled.
        #[arg(long)]
        per_station: bool,
        /// Regress out harmonics before the square root.
        #[arg(long)]
        harmonics_first: bool,
    },
    /// Covariance at a point, along a time-lag grid, or on a space-time contour grid.
    Cov {
        #[command(flatten)]
        model: ModelArgs,
        /// Spatial lag, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Option<Vec<f64>>,
        /// Time lag for a point evaluation.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Emit K(s, t) for |t| <= t_max as CSV.
        #[arg(long)]
        grid: bool,
        /// Emit K(r u, t) over distances r and lags t as CSV.
        #[arg(long)]
        contour: bool,
        /// Frequency grid size (power of two).
        #[arg(long)]
        n_grid: Option<usize>,
        /// Frequency cutoff (radians per time unit).
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long, default_value_t = 3.0)]
        t_max: f64,
        #[arg(long, default_value_t = 3.0)]
        s_max: f64,
        #[arg(long, default_value_t = 31)]
        s_steps: usize,
        /// Direction u for --contour, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
    },
    /// Half-spectrum f(ω)C(‖s‖δ(ω))e^{iθ(ω)φᵀs} or the full spectral density.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Evaluate the full spectral density g(λ, ω) instead of the half-spectrum.
        #[arg(long)]
        full: bool,
        /// Spatial lag for the half-spectrum.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Option<Vec<f64>>,
        /// Spatial frequency for the full spectrum.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lambda: Option<Vec<f64>>,
        /// Temporal frequencies, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        omega: Vec<f64>,
    },
    /// Numerical check that the full spectrum is flat at infinity in the relative sense.
    CheckCond {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 512)]
        grid_density: usize,
        /// Increasing path norms, comma separated (default 10^1, 10^1.5, .., 10^4).
        #[arg(long, value_delimiter = ',')]
        norms: Option<Vec<f64>>,
    },
    /// Effective smoothness in space and time.
    Smoothness {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Maximum likelihood fit; model parameters given on the command line are starting values.
    Fit {
        #[arg(long, value_enum, default_value_t = MethodArg::Whittle)]
        method: MethodArg,
        #[command(flatten)]
        model: ModelArgs,
        /// Data file written by `simulate` or `preprocess`.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Parameters held fixed, name=value pairs.
        #[arg(long)]
        fix: Option<String>,
        /// Also estimate the phase slope ρ.
        #[arg(long)]
        free_rho: bool,
        #[arg(long)]
        max_evals: Option<usize>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Write the optimizer trace as CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Log-likelihood of a model for a data file.
    Loglik {
        #[arg(long, value_enum, default_value_t = MethodArg::Whittle)]
        method: MethodArg,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Human-readable table from a fit result JSON.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Values a JSON config may supply. All fields are optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Option<Family>,
    #[serde(default)]
    pub params: ParamVector,
    #[serde(default)]
    pub fixed: ParamVector,
    pub d: Option<usize>,
    pub phi: Option<Vec<f64>>,
    pub data: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub sites: Option<Vec<Vec<f64>>>,
    pub alias_m: Option<usize>,
    pub n_grid: Option<usize>,
    pub omega_max: Option<f64>,
    pub max_evals: Option<usize>,
    pub restarts: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
    }
}
