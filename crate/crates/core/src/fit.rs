//! Derivative-free maximum likelihood: Nelder–Mead in unconstrained
//! coordinates, numerical Hessians and delta-method standard errors.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlik::{block_sequence, exact_loglik_blocks, stack};
use crate::model::{Family, ModelSpec, Param, ParamVector};
use crate::whittle::{periodograms, whittle_loglik_pg, RegularMonitoringData, DEFAULT_ALIAS_M};

/// Map from a parameter's natural domain to the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Transform {
    Identity,
    /// x = log(θ − lo)
    LogShift { lo: f64 },
    /// x = logit((θ − lo)/(hi − lo))
    Logit { lo: f64, hi: f64 },
}

impl Transform {
    pub fn forward(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::LogShift { lo } => (v - lo).ln(),
            Transform::Logit { lo, hi } => {
                let u = (v - lo) / (hi - lo);
                (u / (1.0 - u)).ln()
            }
        }
    }

    pub fn inverse(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::LogShift { lo } => lo + x.exp(),
            Transform::Logit { lo, hi } => lo + (hi - lo) / (1.0 + (-x).exp()),
        }
    }

    /// dθ/dx at x.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Transform::Identity => 1.0,
            Transform::LogShift { .. } => x.exp(),
            Transform::Logit { lo, hi } => {
                let s = 1.0 / (1.0 + (-x).exp());
                (hi - lo) * s * (1.0 - s)
            }
        }
    }
}

/// The transform used for a parameter of a family.
pub fn transform_for(family: Family, param: Param) -> Transform {
    use Param::*;
    let class1 = matches!(family, Family::MaternInTime | Family::Matern | Family::Ar2InTime | Family::KfG);
    match param {
        Rho => Transform::Identity,
        Nu if class1 => Transform::LogShift { lo: -0.5 },
        Kappa if family == Family::GneitingG => Transform::Logit { lo: 0.0, hi: 2.0 },
        Gamma => Transform::Logit { lo: 0.0, hi: 1.0 },
        _ => Transform::LogShift { lo: 0.0 },
    }
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitOptions {
    /// Evaluation budget per simplex run.
    pub max_evals: usize,
    pub restarts: usize,
    /// Simplex diameter tolerance in transformed coordinates.
    pub xtol: f64,
    /// Objective spread tolerance, relative to 1 + |best|.
    pub ftol: f64,
    /// Initial simplex edge in transformed coordinates.
    pub step: f64,
    pub keep_trace: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { max_evals: 3000, restarts: 3, xtol: 1e-6, ftol: 1e-8, step: 0.3, keep_trace: false }
    }
}

/// One row of the optimizer trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub n_evals: usize,
    pub loglik: f64,
    pub params: ParamVector,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub family: Family,
    pub params: ParamVector,
    pub loglik: f64,
    /// Free parameters, in the order of the Hessian rows.
    pub free: Vec<Param>,
    /// Second differences of the objective in transformed coordinates.
    pub hessian: Vec<Vec<f64>>,
    /// Delta-method standard errors (NaN where the Hessian is not negative definite).
    pub se: ParamVector,
    pub n_evals: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRow>,
}

impl FitResult {
    pub fn se_of(&self, p: Param) -> Option<f64> {
        self.se.get(p)
    }

    /// Trace as CSV with one column per free parameter.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,n_evals,loglik");
        for p in &self.free {
            out.push(',');
            out.push_str(p.name());
        }
        out.push('\n');
        for r in &self.trace {
            out.push_str(&format!("{},{},{}", r.iteration, r.n_evals, r.loglik));
            for p in &self.free {
                out.push_str(&format!(",{}", r.params.get(*p).unwrap_or(f64::NAN)));
            }
            out.push('\n');
        }
        out
    }
}

/// Free parameters and the maps between them and an unconstrained vector.
struct Coordinates {
    base: ParamVector,
    free: Vec<Param>,
    transforms: Vec<Transform>,
}

impl Coordinates {
    fn new(family: Family, fixed: &ParamVector, init: &ParamVector) -> Result<Self> {
        let mut base = init.clone();
        base.merge(fixed);
        let free: Vec<Param> = init.keys().filter(|k| !fixed.contains(*k)).collect();
        let transforms = free.iter().map(|p| transform_for(family, *p)).collect();
        let c = Coordinates { base, free, transforms };
        let x = c.to_x(&c.base);
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Param(format!(
                "initial value of {} is outside its domain or not finite",
                c.free[i]
            )));
        }
        Ok(c)
    }

    fn to_x(&self, p: &ParamVector) -> Vec<f64> {
        self.free.iter().zip(&self.transforms).map(|(k, t)| t.forward(p.get(*k).unwrap_or(f64::NAN))).collect()
    }

    fn to_params(&self, x: &[f64]) -> ParamVector {
        let mut p = self.base.clone();
        for ((k, t), v) in self.free.iter().zip(&self.transforms).zip(x) {
            p.set(*k, t.inverse(*v));
        }
        p
    }
}

struct Counter<'a, F> {
    f: &'a F,
    coords: &'a Coordinates,
    n: std::sync::atomic::AtomicUsize,
}

impl<F: Fn(&ParamVector) -> Result<f64> + Sync> Counter<'_, F> {
    /// Negated objective; failures and non-finite values become +∞.
    fn cost(&self, x: &[f64]) -> f64 {
        self.n.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        match (self.f)(&self.coords.to_params(x)) {
            Ok(v) if v.is_finite() => -v,
            _ => f64::INFINITY,
        }
    }

    fn count(&self) -> usize {
        self.n.load(std::sync::atomic::Ordering::Relaxed)
    }
}

/// Maximizes `objective` over the parameters in `init` that are not pinned in `fixed`.
pub fn fit<F>(objective: F, family: Family, fixed: &ParamVector, init: &ParamVector, opts: &FitOptions) -> Result<FitResult>
where
    F: Fn(&ParamVector) -> Result<f64> + Sync,
{
    let coords = Coordinates::new(family, fixed, init)?;
    let counter = Counter { f: &objective, coords: &coords, n: Default::default() };
    let x0 = coords.to_x(&coords.base);
    let f_init = counter.cost(&x0);
    let mut trace = Vec::new();
    let mut converged = false;
    let (mut best_x, mut best_f) = (x0.clone(), f_init);
    if !x0.is_empty() {
        for run in 0..=opts.restarts {
            let step = if run == 0 { opts.step } else { opts.step * 0.5f64.powi(run as i32) };
            let out = nelder_mead(&counter, &best_x, step, opts, &mut trace)?;
            let improved = best_f - out.f;
            if out.f <= best_f {
                best_x = out.x;
                best_f = out.f;
            }
            converged = out.converged;
            if out.converged && run > 0 && improved.abs() <= opts.ftol * (1.0 + best_f.abs()) {
                break;
            }
        }
    } else {
        converged = f_init.is_finite();
    }
    if !best_f.is_finite() {
        return Err(Error::NonFinite { coordinate: "objective at the initial point".into() });
    }
    let params = coords.to_params(&best_x);
    let loglik = -best_f;
    let hessian = if best_x.is_empty() {
        DMatrix::zeros(0, 0)
    } else {
        numerical_hessian(|x| Ok(-counter.cost(x)), &best_x, &coords.free)?
    };
    let se = delta_method_se(&coords, &best_x, &hessian);
    let trace = if opts.keep_trace {
        trace.into_iter().map(|(it, n, f, x)| TraceRow { iteration: it, n_evals: n, loglik: -f, params: coords.to_params(&x) }).collect()
    } else {
        Vec::new()
    };
    Ok(FitResult {
        family,
        params,
        loglik,
        free: coords.free.clone(),
        hessian: (0..hessian.nrows()).map(|i| hessian.row(i).iter().copied().collect()).collect(),
        se,
        n_evals: counter.count(),
        converged,
        trace,
    })
}

fn delta_method_se(coords: &Coordinates, x: &[f64], h: &DMatrix<f64>) -> ParamVector {
    let k = x.len();
    let nan = || coords.free.iter().map(|p| (*p, f64::NAN)).collect();
    if k == 0 {
        return ParamVector::new();
    }
    let neg = -h.clone();
    let Some(ch) = neg.cholesky() else {
        return nan();
    };
    let cov = ch.inverse();
    coords
        .free
        .iter()
        .enumerate()
        .map(|(i, p)| (*p, coords.transforms[i].derivative(x[i]).abs() * cov[(i, i)].sqrt()))
        .collect()
}

struct SimplexOutcome {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

type Trace = Vec<(usize, usize, f64, Vec<f64>)>;

fn nelder_mead<F>(c: &Counter<'_, F>, x0: &[f64], step: f64, opts: &FitOptions, trace: &mut Trace) -> Result<SimplexOutcome>
where
    F: Fn(&ParamVector) -> Result<f64> + Sync,
{
    let k = x0.len();
    let start = c.count();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..k {
        let mut p = x0.to_vec();
        p[i] += step;
        pts.push(p);
    }
    let mut fs: Vec<f64> = pts.par_iter().map(|p| c.cost(p)).collect();
    let base_iter = trace.last().map(|t| t.0 + 1).unwrap_or(0);
    let mut iter = 0;
    loop {
        let mut order: Vec<usize> = (0..=k).collect();
        order.sort_by(|&a, &b| fs[a].total_cmp(&fs[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        fs = order.iter().map(|&i| fs[i]).collect();
        trace.push((base_iter + iter, c.count(), fs[0], pts[0].clone()));

        let diameter = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = fs[k] - fs[0];
        if fs[0].is_finite() && diameter < opts.xtol && spread <= opts.ftol * (1.0 + fs[0].abs()) {
            return Ok(SimplexOutcome { x: pts[0].clone(), f: fs[0], converged: true });
        }
        if c.count() - start >= opts.max_evals {
            return Ok(SimplexOutcome { x: pts[0].clone(), f: fs[0], converged: false });
        }
        iter += 1;

        let centroid: Vec<f64> = (0..k).map(|j| pts[..k].iter().map(|p| p[j]).sum::<f64>() / k as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[k]).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = c.cost(&xr);
        if fr < fs[0] {
            let xe = along(-2.0);
            let fe = c.cost(&xe);
            if fe < fr {
                pts[k] = xe;
                fs[k] = fe;
            } else {
                pts[k] = xr;
                fs[k] = fr;
            }
            continue;
        }
        if fr < fs[k - 1] {
            pts[k] = xr;
            fs[k] = fr;
            continue;
        }
        let (xc, fc) = if fr < fs[k] {
            let x = along(-0.5);
            let f = c.cost(&x);
            (x, f)
        } else {
            let x = along(0.5);
            let f = c.cost(&x);
            (x, f)
        };
        if fc < fs[k].min(fr) {
            pts[k] = xc;
            fs[k] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best = pts[0].clone();
        for p in pts.iter_mut().skip(1) {
            for (v, b) in p.iter_mut().zip(&best) {
                *v = b + 0.5 * (*v - b);
            }
        }
        let new: Vec<f64> = pts[1..].par_iter().map(|p| c.cost(p)).collect();
        fs[1..].copy_from_slice(&new);
    }
}

/// Central second differences of `objective` at `at`, with step
/// max(1e−4, 1e−4·|x_i|) per coordinate. `names` label coordinates in errors.
pub fn numerical_hessian<F, N>(objective: F, at: &[f64], names: &[N]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
    N: std::fmt::Display + Sync,
{
    let k = at.len();
    let h: Vec<f64> = at.iter().map(|x| (1e-4 * x.abs()).max(1e-4)).collect();
    let eval = |shifts: &[(usize, f64)]| -> Result<f64> {
        let mut x = at.to_vec();
        for &(i, s) in shifts {
            x[i] += s * h[i];
        }
        let v = objective(&x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            let i = shifts.first().map(|s| s.0).unwrap_or(0);
            Err(Error::NonFinite { coordinate: names.get(i).map(|n| n.to_string()).unwrap_or_default() })
        }
    };
    let f0 = eval(&[])?;
    let mut jobs: Vec<Vec<(usize, f64)>> = Vec::new();
    for i in 0..k {
        jobs.push(vec![(i, 1.0)]);
        jobs.push(vec![(i, -1.0)]);
        for j in 0..i {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                jobs.push(vec![(i, a), (j, b)]);
            }
        }
    }
    let vals: Vec<f64> = jobs.par_iter().map(|s| eval(s)).collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(k, k);
    let mut it = vals.into_iter();
    for i in 0..k {
        let fp = it.next().unwrap_or(f64::NAN);
        let fm = it.next().unwrap_or(f64::NAN);
        out[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let pp = it.next().unwrap_or(f64::NAN);
            let pm = it.next().unwrap_or(f64::NAN);
            let mp = it.next().unwrap_or(f64::NAN);
            let mm = it.next().unwrap_or(f64::NAN);
            let v = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Likelihood used as a fitting objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Whittle,
    Exact,
}

/// Fits a family to monitoring data by Whittle or exact likelihood. The phase
/// direction φ, when given, is held fixed.
pub fn fit_data(
    method: Method,
    family: Family,
    data: &RegularMonitoringData,
    phi: Option<&[f64]>,
    fixed: &ParamVector,
    init: &ParamVector,
    opts: &FitOptions,
) -> Result<FitResult> {
    data.validate()?;
    let d = data.coords[0].len();
    let spec = |p: &ParamVector| ModelSpec { family, params: p.clone(), d, phi: phi.map(|v| v.to_vec()) };
    match method {
        Method::Whittle => {
            let pg = periodograms(data);
            let obj = |p: &ParamVector| -> Result<f64> {
                let m = spec(p).build()?;
                whittle_loglik_pg(m.as_half()?, &data.coords, &pg, DEFAULT_ALIAS_M)
            };
            fit(obj, family, fixed, init, opts)
        }
        Method::Exact => {
            let z = stack(data);
            let obj = |p: &ParamVector| -> Result<f64> {
                let m = spec(p).build()?;
                exact_loglik_blocks(&block_sequence(&m, &data.coords, data.n())?, &z)
            };
            fit(obj, family, fixed, init, opts)
        }
    }
}

/// Heuristic starting values: φ_var from the average site variance, α from the
/// median inter-site distance, β from the lag-1 autocorrelation; remaining
/// parameters take family defaults.
pub fn default_init(family: Family, data: &RegularMonitoringData) -> ParamVector {
    use Param::*;
    let (p, n) = data.series.shape();
    let mut var = 0.0;
    let mut r1 = 0.0;
    for i in 0..p {
        let row = data.series.row(i);
        let mean = row.iter().sum::<f64>() / n as f64;
        let v = row.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let c1 = (1..n).map(|t| (row[t] - mean) * (row[t - 1] - mean)).sum::<f64>() / n as f64;
        var += v;
        if v > 0.0 {
            r1 += c1 / v;
        }
    }
    var /= p as f64;
    r1 = (r1 / p as f64).clamp(0.05, 0.95);
    let mut dists: Vec<f64> = Vec::new();
    for i in 0..p {
        for j in 0..i {
            dists.push(crate::model::norm(&crate::covops::lag(&data.coords[i], &data.coords[j])));
        }
    }
    dists.sort_by(f64::total_cmp);
    let med = dists.get(dists.len() / 2).copied().filter(|d| *d > 0.0).unwrap_or(1.0);
    let beta = -r1.ln();
    let mut init = family.defaults();
    init.set(PhiVar, if var > 0.0 { var } else { 1.0 });
    init.set(Alpha, 1.0 / med);
    match family {
        Family::Ar2InTime => {
            init.set(Beta1, 2.0 * beta);
            init.set(Beta2, beta * beta + 0.25);
        }
        _ => init.set(Beta, beta),
    }
    if init.get(Eta2) == Some(0.0) {
        init.set(Eta2, 0.1 * init.get(PhiVar).unwrap_or(1.0));
    }
    init
}
