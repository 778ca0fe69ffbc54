//! Diagnostics on full spectra: a numerical check of relative flatness at
//! infinity, and effective smoothness from the temporal tail exponent.

use std::fmt;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{HalfSpectralModel, Interaction, SpatialCorrelation};

/// Direction along which (λ, ω) is sent to infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    /// ω = N with λ = 0.
    Omega,
    /// λ = N e₁ with ω = 1.
    Lambda,
    /// (λ, ω) = N (e₁, 1)/√2.
    Diagonal,
}

impl PathKind {
    pub const ALL: [PathKind; 3] = [PathKind::Omega, PathKind::Lambda, PathKind::Diagonal];

    fn point(self, d: usize, n: f64) -> (Vec<f64>, f64) {
        let mut lam = vec![0.0; d];
        match self {
            PathKind::Omega => (lam, n),
            PathKind::Lambda => {
                lam[0] = n;
                (lam, 1.0)
            }
            PathKind::Diagonal => {
                let c = n / std::f64::consts::SQRT_2;
                lam[0] = c;
                (lam, c)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub path: PathKind,
    pub norms: Vec<f64>,
    /// Estimated sup over the ball of |g(λ+v, ω+u)/g(λ, ω) − 1| at each norm.
    #[serde(serialize_with = "finite_or_null")]
    pub sups: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub radius: f64,
    pub grid_density: usize,
    pub paths: Vec<PathReport>,
    pub verdict: Verdict,
}

fn finite_or_null<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| if x.is_finite() { Some(*x) } else { None }))
}

/// Settings for [`check_condition`].
#[derive(Debug, Clone)]
pub struct ConditionOptions {
    pub radius: f64,
    pub norms: Vec<f64>,
    pub grid_density: usize,
    pub paths: Vec<PathKind>,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions {
            radius: 5.0,
            norms: (0..=6).map(|i| 10f64.powf(1.0 + 0.5 * i as f64)).collect(),
            grid_density: 512,
            paths: PathKind::ALL.to_vec(),
        }
    }
}

pub const PASS_BELOW: f64 = 0.05;
pub const FAIL_ABOVE: f64 = 0.5;

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// Halton points of the unit ball in dimension `dim`, by rejection from the cube.
pub fn halton_ball(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || dim > PRIMES.len() {
        return Err(Error::Param(format!("ball dimension {dim} unsupported")));
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let p: Vec<f64> = PRIMES[..dim].iter().map(|&b| 2.0 * radical_inverse(i, b) - 1.0).collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            out.push(p);
        }
        i += 1;
    }
    Ok(out)
}

fn path_verdict(sups: &[f64]) -> Verdict {
    let tail = &sups[sups.len() - sups.len().div_ceil(3)..];
    if tail.iter().all(|v| *v > FAIL_ABOVE) {
        return Verdict::Fail;
    }
    let finite = tail.iter().all(|v| v.is_finite() && *v >= 0.0);
    if finite {
        let gm = (tail.iter().map(|v| v.max(1e-300).ln()).sum::<f64>() / tail.len() as f64).exp();
        let decreasing = tail.last() <= tail.first();
        if gm < PASS_BELOW && decreasing {
            return Verdict::Pass;
        }
    }
    Verdict::Inconclusive
}

/// Checks whether ln g flattens out in the relative sense along each path.
/// `ln_g(λ, ω)` is the log spectral density on ℝ^d × ℝ (d may be 0).
pub fn check_condition<G>(ln_g: G, d: usize, opts: &ConditionOptions) -> Result<ConditionReport>
where
    G: Fn(&[f64], f64) -> Result<f64> + Sync,
{
    if opts.norms.len() < 3 || opts.norms.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Param("norms must be increasing with at least 3 entries".into()));
    }
    if !(opts.radius > 0.0) {
        return Err(Error::Param("radius must be positive".into()));
    }
    let ball = halton_ball(d + 1, opts.grid_density)?;
    let paths: Vec<PathKind> =
        if d == 0 { vec![PathKind::Omega] } else { opts.paths.clone() };
    let mut reports = Vec::new();
    for path in paths {
        let sups: Vec<f64> = opts
            .norms
            .par_iter()
            .map(|&n| {
                let (lam, om) = path.point(d, n);
                let base = ln_g(&lam, om)?;
                let mut sup = 0.0f64;
                let mut shifted = lam.clone();
                for b in &ball {
                    for k in 0..d {
                        shifted[k] = lam[k] + opts.radius * b[k];
                    }
                    let v = ln_g(&shifted, om + opts.radius * b[d])?;
                    let dev = ((v - base).exp() - 1.0).abs();
                    sup = if dev.is_nan() { f64::INFINITY } else { sup.max(dev) };
                }
                Ok(sup)
            })
            .collect::<Result<_>>()?;
        let verdict = path_verdict(&sups);
        reports.push(PathReport { path, norms: opts.norms.clone(), sups, verdict });
    }
    let verdict = if reports.iter().all(|r| r.verdict == Verdict::Pass) {
        Verdict::Pass
    } else if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(ConditionReport { radius: opts.radius, grid_density: opts.grid_density, paths: reports, verdict })
}

/// [`check_condition`] on a model's full spectrum. Points where the spectrum is
/// undefined count as a violation.
pub fn check_model(model: &HalfSpectralModel, opts: &ConditionOptions) -> Result<ConditionReport> {
    check_condition(
        |l, w| Ok(model.ln_full_spectrum(l, w).unwrap_or(f64::NAN)),
        model.d,
        opts,
    )
}

/// True when the overall verdicts with θ ≡ 0 and with θ(ω) = ρω agree.
/// Individual paths may differ, since the phase shears the spectrum.
pub fn check_theorem1_invariance(model: &HalfSpectralModel, rho: f64, opts: &ConditionOptions) -> Result<bool> {
    let a = check_model(&model.clone().with_rho(0.0), opts)?;
    let b = check_model(&model.clone().with_rho(rho), opts)?;
    Ok(a.verdict == b.verdict)
}

/// An exact rational, or ∞ for infinitely smooth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Finite(Ratio<i64>),
    Infinite,
}

impl Smoothness {
    pub fn value(self) -> f64 {
        match self {
            Smoothness::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Smoothness::Infinite => f64::INFINITY,
        }
    }

    /// Largest integer strictly below the smoothness.
    pub fn differentiability(self) -> Option<i64> {
        match self {
            Smoothness::Finite(r) => Some(r.ceil().to_integer() - 1),
            Smoothness::Infinite => None,
        }
    }
}

impl fmt::Display for Smoothness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothness::Finite(r) => write!(f, "{r}"),
            Smoothness::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Smoothness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    /// Temporal tail exponent: f(ω) ~ c ω^{−k}.
    pub k: Smoothness,
    /// Log-log regression estimate of k over ω ∈ [10³, 10⁶].
    pub k_regression: f64,
    pub nu_eff_space: Smoothness,
    pub nu_eff_time: Smoothness,
    /// Mean-square differentiability orders (None when unbounded).
    pub m_space: Option<i64>,
    pub m_time: Option<i64>,
}

fn rational(x: f64, what: &str) -> Result<Ratio<i64>> {
    let r = Ratio::<i64>::approximate_float(x)
        .ok_or_else(|| Error::Domain(format!("{what} = {x} has no rational approximation")))?;
    if (*r.numer() as f64 / *r.denom() as f64 - x).abs() > 1e-12 * x.abs().max(1.0) || *r.denom() > 1_000_000 {
        return Err(Error::Domain(format!("{what} = {x} is not a simple rational")));
    }
    Ok(r)
}

/// Slope of −ln f against ln ω on 31 log-spaced points in [lo, hi]; errors if
/// the two halves disagree by more than 0.05.
pub fn estimate_tail_exponent(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = (0..31)
        .map(|i| {
            let w = lo * (hi / lo).powf(i as f64 / 30.0);
            (w.ln(), -f(w).ln())
        })
        .collect();
    let slope = |p: &[(f64, f64)]| -> f64 {
        let n = p.len() as f64;
        let mx = p.iter().map(|q| q.0).sum::<f64>() / n;
        let my = p.iter().map(|q| q.1).sum::<f64>() / n;
        let sxy: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = p.iter().map(|q| (q.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    let all = slope(&pts);
    let (a, b) = (slope(&pts[..16]), slope(&pts[15..]));
    if !all.is_finite() || (a - b).abs() > 0.05 {
        return Err(Error::NonConvergence { what: "log-log tail slope of f".into(), estimate: all });
    }
    Ok(all)
}

/// Effective smoothness in space and time from the tail exponent of f.
pub fn smoothness_report(model: &HalfSpectralModel) -> Result<SmoothnessReport> {
    let (_, k) = model.temporal.tail();
    let k_regression = estimate_tail_exponent(|w| model.f(w), 1e3, 1e6)?;
    let kr = rational(k, "tail exponent")?;
    if kr <= Ratio::from_integer(1) {
        return Err(Error::Domain(format!("tail exponent {k} must exceed 1")));
    }
    let one = Ratio::from_integer(1);
    let half = Ratio::new(1, 2);
    let time = Smoothness::Finite((kr - one) * half);
    let space = match (&model.interaction, &model.spatial) {
        (Interaction::Power { .. }, SpatialCorrelation::Matern { order, .. }) => {
            Smoothness::Finite(rational(*order, "spatial order")? * (kr - one) / kr)
        }
        (Interaction::QuantileCoupling { nu, .. }, _) => Smoothness::Finite(rational(*nu, "nu")?),
        (Interaction::Constant(_), SpatialCorrelation::Matern { order, .. }) => {
            Smoothness::Finite(rational(*order, "spatial order")?)
        }
        (_, SpatialCorrelation::Gaussian { .. }) => Smoothness::Infinite,
    };
    Ok(SmoothnessReport {
        k: Smoothness::Finite(kr),
        k_regression,
        nu_eff_space: space,
        nu_eff_time: time,
        m_space: space.differentiability(),
        m_time: time.differentiability(),
    })
}
