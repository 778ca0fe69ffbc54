//! Multivariate Whittle log-likelihood for regular monitoring data.
//!
//! With J_k = Σ_t x_t e^{−iω_k t} and I_k = J_k J_k* / (2πn), the likelihood is
//! ℓ_W = −½ Σ_{k=1}^{n−1} [log det S(ω_k) + tr S(ω_k)^{−1} I_k],
//! where S is the aliased cross-spectral matrix in the convention
//! K(s, τ) = ∫_{−π}^{π} S(ω) e^{iτω} dω. Mirror frequencies contribute conjugate
//! terms, so only 1 ≤ k ≤ n/2 are evaluated.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::covops::{assemble_cross_spectrum, AliasTable};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_cholesky_jittered, hermitian_min_eigenvalue};
use crate::model::{CovModel, HalfSpectralModel};

/// Default aliasing truncation.
pub const DEFAULT_ALIAS_M: usize = 50;

/// p sites observed at the same n equally spaced times.
#[derive(Debug, Clone)]
pub struct RegularMonitoringData {
    /// Site coordinates.
    pub coords: Vec<Vec<f64>>,
    /// p×n matrix, one row per site.
    pub series: DMatrix<f64>,
    /// Sampling interval, in the time unit of the model.
    pub dt: f64,
}

impl RegularMonitoringData {
    pub fn new(coords: Vec<Vec<f64>>, series: DMatrix<f64>, dt: f64) -> Result<Self> {
        let data = RegularMonitoringData { coords, series, dt };
        data.validate()?;
        Ok(data)
    }

    pub fn validate(&self) -> Result<()> {
        let (p, n) = self.series.shape();
        if p == 0 || n < 2 {
            return Err(Error::Data(format!("need p >= 1 and n >= 2, got p={p}, n={n}")));
        }
        if self.coords.len() != p {
            return Err(Error::Data(format!("{} coordinates for {p} series", self.coords.len())));
        }
        let d = self.coords[0].len();
        if self.coords.iter().any(|c| c.len() != d) {
            return Err(Error::Data("site coordinates differ in dimension".into()));
        }
        if let Some(i) = self.series.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("missing or non-finite entry at site {}, time {}", i % p, i / p)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Data(format!("sampling interval must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.series.nrows()
    }

    pub fn n(&self) -> usize {
        self.series.ncols()
    }
}

/// DFT coefficients at ω_k = 2πk/n for k = 1..=⌊n/2⌋.
#[derive(Debug, Clone)]
pub struct PeriodogramSet {
    pub n: usize,
    pub omega: Vec<f64>,
    pub j: Vec<DVector<Complex64>>,
    /// 1 for interior frequencies (standing for k and n−k), ½ at Nyquist.
    pub weight: Vec<f64>,
}

impl PeriodogramSet {
    /// I_k = J_k J_k* / (2πn) at the k-th stored frequency.
    pub fn matrix(&self, idx: usize) -> DMatrix<Complex64> {
        let j = &self.j[idx];
        (j * j.adjoint()) / Complex64::new(2.0 * PI * self.n as f64, 0.0)
    }

    /// (2π/n) Σ_{k=1}^{n−1} tr I_k, which equals the summed per-site variance.
    pub fn total_power(&self) -> f64 {
        let s: f64 = self
            .j
            .iter()
            .zip(&self.weight)
            .map(|(j, w)| 2.0 * w * j.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        s / (self.n as f64 * self.n as f64)
    }
}

/// Per-site DFTs at the positive Fourier frequencies (frequency 0 dropped).
pub fn periodograms(data: &RegularMonitoringData) -> PeriodogramSet {
    let (p, n) = data.series.shape();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let half = n / 2;
    let mut j = vec![DVector::from_element(p, Complex64::new(0.0, 0.0)); half];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..p {
        for (b, x) in buf.iter_mut().zip(data.series.row(i).iter()) {
            *b = Complex64::new(*x, 0.0);
        }
        fft.process(&mut buf);
        for k in 1..=half {
            j[k - 1][i] = buf[k];
        }
    }
    let omega = (1..=half).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let weight = (1..=half).map(|k| if 2 * k == n { 0.5 } else { 1.0 }).collect();
    PeriodogramSet { n, omega, j, weight }
}

/// Whittle log-likelihood of a half-spectral model.
pub fn whittle_loglik(model: &HalfSpectralModel, data: &RegularMonitoringData, m: usize) -> Result<f64> {
    data.validate()?;
    whittle_loglik_pg(model, &data.coords, &periodograms(data), m)
}

/// As [`whittle_loglik`] for any covariance model with a half-spectrum.
pub fn whittle_loglik_model(model: &CovModel, data: &RegularMonitoringData, m: usize) -> Result<f64> {
    match model {
        CovModel::Half(h) => whittle_loglik(h, data, m),
        CovModel::G(_) => Err(Error::Unsupported(
            "Whittle likelihood needs a half-spectral family; Gneiting G has no closed-form half-spectrum".into(),
        )),
    }
}

/// Whittle log-likelihood from precomputed periodograms.
pub fn whittle_loglik_pg(
    model: &HalfSpectralModel,
    coords: &[Vec<f64>],
    pg: &PeriodogramSet,
    m: usize,
) -> Result<f64> {
    if pg.j.first().is_some_and(|j| j.len() != coords.len()) {
        return Err(Error::Data(format!(
            "periodograms cover {} sites but {} coordinates were given",
            pg.j[0].len(),
            coords.len()
        )));
    }
    let table = AliasTable::new(model, &pg.omega, m)?;
    let scale = 2.0 * PI * pg.n as f64;
    let terms: Vec<f64> = (0..pg.omega.len())
        .into_par_iter()
        .map(|k| {
            let s = assemble_cross_spectrum(model, &table, k, coords)?;
            let om = pg.omega[k];
            let (chol, _) = hermitian_cholesky_jittered(&s).ok_or_else(|| Error::Singular {
                omega: om,
                min_eig: hermitian_min_eigenvalue(&s),
            })?;
            let l = chol.l_dirty();
            let logdet: f64 = (0..s.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
            let y = l.solve_lower_triangular(&pg.j[k]).ok_or_else(|| Error::Singular {
                omega: om,
                min_eig: hermitian_min_eigenvalue(&s),
            })?;
            let quad = y.iter().map(|z| z.norm_sqr()).sum::<f64>() / scale;
            let v = pg.weight[k] * (logdet + quad);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Singular { omega: om, min_eig: hermitian_min_eigenvalue(&s) })
            }
        })
        .collect::<Result<_>>()?;
    Ok(-terms.iter().sum::<f64>())
}
