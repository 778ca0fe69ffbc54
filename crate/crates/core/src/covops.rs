//! Covariances from half-spectra: quadrature at single points, FFT over
//! time-lag grids, aliased spectra and cross-spectral matrices.
//!
//! The FFT routes use the closed-form temporal margin as a control variate:
//! K(s,t) = q₀ K_f(t + ρφᵀs) + ∫ f(ω)(q(ω) − q₀) e^{iθ(ω)φᵀs} e^{itω} dω,
//! where q(ω) = C(‖s‖δ(ω)) + η²1{s=0} and q₀ = q(0). The remainder is bounded
//! even when f has a singularity at the origin, and its power-law tail beyond
//! the grid is added analytically.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{norm, HalfSpectralModel};
use crate::quad::{integrate_panels, kronrod_nodes, QuadSpec};
use crate::specfun::sin_integral;

/// Covariance values on a uniform time-lag grid at a fixed spatial lag.
#[derive(Debug, Clone, Serialize)]
pub struct CovGrid {
    pub s: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

impl CovGrid {
    /// Value at the grid point nearest to t.
    pub fn at(&self, t: f64) -> f64 {
        let dt = self.t_grid[1] - self.t_grid[0];
        let i = ((t - self.t_grid[0]) / dt).round() as isize;
        self.values[i.clamp(0, self.values.len() as isize - 1) as usize]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,value\n");
        for (t, v) in self.t_grid.iter().zip(&self.values) {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }
}

/// Result of [`cov_point`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CovPoint {
    pub value: f64,
    /// Imaginary part left over by the quadrature; should vanish.
    pub imag_residue: f64,
    pub error_estimate: f64,
}

/// Options for [`cov_slice_fft`].
#[derive(Debug, Clone, Copy)]
pub struct FftOptions {
    /// Subtract q₀ f(ω) and add q₀ K_f(t) back in closed form.
    pub control_variate: bool,
}

impl Default for FftOptions {
    fn default() -> Self {
        FftOptions { control_variate: true }
    }
}

/// Default frequency cutoff and grid size for covariance plots (β = 1 units).
pub const DEFAULT_OMEGA_MAX: f64 = 1024.0;
pub const DEFAULT_N_GRID: usize = 1 << 16;

/// J_k(t, W) = ∫_{|ω|>W} |ω|^{−k} e^{itω} dω = 2∫_W^∞ ω^{−k} cos(tω) dω, k > 1.
pub fn power_tail_integral(k: f64, t: f64, w: f64) -> Result<f64> {
    if !(k > 1.0) || !(w > 0.0) {
        return Err(Error::Domain(format!("power tail integral k={k}, W={w}")));
    }
    let t = t.abs();
    if t == 0.0 {
        return Ok(2.0 * w.powf(1.0 - k) / (k - 1.0));
    }
    let a = t * w;
    if k == 2.0 {
        return Ok(2.0 * (a.cos() / w - t * (FRAC_PI_2 - sin_integral(a)?)));
    }
    // 2 t^{k−1} ∫_a^∞ u^{−k} cos u du
    let start = a.max(60.0);
    let mut head = 0.0;
    if a < start {
        let spec = QuadSpec { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 4000 };
        let mut breaks = vec![a];
        let mut x = a;
        while x < start {
            x = (x + PI).min(start);
            breaks.push(x);
        }
        head = integrate_panels(|u: f64| Ok(u.powf(-k) * u.cos()), &breaks, &spec)?.value;
    }
    Ok(2.0 * t.powf(k - 1.0) * (head + cos_tail_asymptotic(k, start)))
}

/// ∫_a^∞ u^{−k} cos u du for large a by the asymptotic series of
/// ∫_a^∞ u^{−k} e^{iu} du = i e^{ia} a^{−k} Σ_n (k)_n (−i/a)^n.
fn cos_tail_asymptotic(k: f64, a: f64) -> f64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for n in 0..200 {
        term *= Complex64::new(0.0, -(k + n as f64) / a);
        let tn = term.norm();
        if tn > prev {
            break;
        }
        sum += term;
        prev = tn;
        if tn < 1e-17 * sum.norm() {
            break;
        }
    }
    let v = Complex64::new(0.0, 1.0) * Complex64::from_polar(a.powf(-k), a) * sum;
    v.re
}

/// Covariance K(s, t) by adaptive quadrature of the half-spectrum over ω,
/// with the power-law tail beyond the integration range added analytically.
pub fn cov_point(model: &HalfSpectralModel, s: &[f64], t: f64, quad: &QuadSpec) -> Result<CovPoint> {
    if s.len() != model.d {
        return Err(Error::Param(format!("lag of length {} for d = {}", s.len(), model.d)));
    }
    let s_norm = norm(s);
    let (_, q_inf) = model.q_limits(s_norm)?;
    let (c, k) = model.temporal.tail();
    let tp = t + model.rho * model.project(s);
    let scale = model.temporal.scale();

    let mut w = 300.0 * scale;
    let q0_scale = model.spatial.at_zero() + model.eta2;
    while (model.q(s_norm, w)? - q_inf).abs() > 1e-12 * q0_scale {
        w *= 4.0;
        if w > 1e7 * scale {
            return Err(Error::NonConvergence {
                what: "half-spectrum does not settle to its high-frequency limit".into(),
                estimate: w,
            });
        }
    }

    let osc = if tp != 0.0 { PI / tp.abs() } else { f64::INFINITY };
    let mut x = (scale / 16.0).min(osc);
    let mut breaks = vec![0.0];
    if s_norm > 0.0 && is_singular_at_origin(model) {
        // graded toward the origin, where the integrand has a weak singularity
        breaks.extend((1..=40).rev().map(|i| x * 0.5f64.powi(i)));
    }
    while x < w {
        breaks.push(x);
        x = (2.0 * x).min(x + osc);
    }
    breaks.push(w);

    let integrand = |om: f64| -> Result<Complex64> {
        let plus = model.half_spectrum(s, om)? * Complex64::from_polar(1.0, t * om);
        let minus = model.half_spectrum(s, -om)? * Complex64::from_polar(1.0, -t * om);
        Ok(plus + minus)
    };
    let est = integrate_panels(integrand, &breaks, quad)?;
    let tail = if q_inf != 0.0 { q_inf * c * power_tail_integral(k, tp, w)? } else { 0.0 };
    Ok(CovPoint { value: est.value.re + tail, imag_residue: est.value.im, error_estimate: est.error })
}

fn fft_inverse(buf: &mut [Complex64]) {
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}

/// K(s, t) on the grid t_j = jπ/Ω, j = −N/2..N/2−1, from a midpoint-rule FFT of
/// the half-spectrum on N points in [−Ω, Ω].
pub fn cov_slice_fft(
    model: &HalfSpectralModel,
    s: &[f64],
    n_grid: usize,
    omega_max: f64,
) -> Result<CovGrid> {
    cov_slice_fft_with(model, s, n_grid, omega_max, FftOptions::default())
}

pub fn cov_slice_fft_with(
    model: &HalfSpectralModel,
    s: &[f64],
    n_grid: usize,
    omega_max: f64,
    opts: FftOptions,
) -> Result<CovGrid> {
    if !n_grid.is_power_of_two() || n_grid < 4 {
        return Err(Error::Param(format!("n_grid must be a power of two >= 4, got {n_grid}")));
    }
    if !(omega_max > 0.0) || !omega_max.is_finite() {
        return Err(Error::Param(format!("omega_max must be positive, got {omega_max}")));
    }
    if s.len() != model.d {
        return Err(Error::Param(format!("lag of length {} for d = {}", s.len(), model.d)));
    }
    let n = n_grid;
    let s_norm = norm(s);
    let proj = model.project(s);
    let (q0_true, q_inf) = model.q_limits(s_norm)?;
    let q0 = if opts.control_variate { q0_true } else { 0.0 };
    let (c, k) = model.temporal.tail();
    let h = 2.0 * omega_max / n as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, b) in buf.iter_mut().enumerate() {
        let om = -omega_max + (i as f64 + 0.5) * h;
        let q = model.q(s_norm, om)?;
        let r = model.f(om) * (q - q0);
        *b = if r == 0.0 { Complex64::new(0.0, 0.0) } else { Complex64::from_polar(r, model.theta(om) * proj) };
    }
    let central = if s_norm > 0.0 && q0 != 0.0 && is_singular_at_origin(model) {
        let zero = n / 2;
        let cells = central_cells(model, h, n / 4);
        let a = cells as f64 * h;
        for (k, b) in buf.iter_mut().enumerate().take(zero + cells).skip(zero - cells) {
            let om = -omega_max + (k as f64 + 0.5) * h;
            *b *= 1.0 - taper(om / a);
        }
        let nodes = CentralNodes::new(a, (n / 2) as f64 * PI / omega_max, |om| {
            let r = model.f(om) * (model.q(s_norm, om)? - q0) * taper(om / a);
            Ok(Complex64::from_polar(r, model.theta(om) * proj))
        })?;
        Some(nodes.transform(PI / omega_max, n / 2))
    } else {
        None
    };
    fft_inverse(&mut buf);

    let mut warnings = Vec::new();
    let q_edge = model.q(s_norm, omega_max)?;
    let q_scale = model.spatial.at_zero() + model.eta2;
    if (q_edge - q_inf).abs() > 1e-8 * q_scale {
        warnings.push(format!(
            "half-spectrum has not reached its high-frequency limit at omega_max = {omega_max}; \
             truncation error likely"
        ));
    }

    let log_corr = if !opts.control_variate {
        model.temporal.log_singularity().map(|cl| cl * q0_true * h * std::f64::consts::LN_2).unwrap_or(0.0)
    } else {
        0.0
    };

    let dt = PI / omega_max;
    let half = (n / 2) as isize;
    let mut t_grid = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for j in -half..half {
        let idx = j.rem_euclid(n as isize) as usize;
        let t = j as f64 * dt;
        // e^{i t_j (−Ω + h/2)} = (−1)^j e^{iπj/N}
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let pref = Complex64::from_polar(sign, PI * j as f64 / n as f64);
        let mut v = h * (pref * buf[idx]).re;
        let tp = t + model.rho * proj;
        if opts.control_variate && q0 != 0.0 {
            v += q0 * model.temporal_cov(tp);
        }
        let tail_amp = q_inf - q0;
        if tail_amp != 0.0 {
            v += tail_amp * c * power_tail_integral(k, tp, omega_max)?;
        }
        v += log_corr;
        if let Some((cp, cn)) = &central {
            v += if j >= 0 { cp[j as usize] } else { cn[(-j) as usize] };
        }
        t_grid.push(t);
        values.push(v);
    }
    Ok(CovGrid { s: s.to_vec(), t_grid, values, warnings })
}

/// Grid cells on each side of ω = 0 replaced by graded quadrature: at least
/// four, and enough to cover a fixed fraction of the temporal scale.
fn central_cells(model: &HalfSpectralModel, h: f64, max_cells: usize) -> usize {
    let want = (CENTRAL_WIDTH * model.temporal.scale() / h).ceil() as usize;
    want.max(16).min(max_cells)
}

/// Smooth cutoff equal to 1 for |u| ≤ ½ and 0 for |u| ≥ 1.
fn taper(u: f64) -> f64 {
    let v = 2.0 * u.abs() - 1.0;
    if v <= 0.0 {
        1.0
    } else if v >= 1.0 {
        0.0
    } else {
        1.0 / (1.0 + (1.0 / (1.0 - v) - 1.0 / v).exp())
    }
}

const CENTRAL_WIDTH: f64 = 0.5;

/// True when f or δ degenerates at ω = 0, which leaves the remainder
/// f(q − q₀) with a weak (logarithmic type) singularity there.
fn is_singular_at_origin(model: &HalfSpectralModel) -> bool {
    if model.interaction.is_constant() {
        return false;
    }
    let f0 = model.f(0.0);
    let d0 = model.delta(0.0).unwrap_or(f64::NAN);
    !(f0.is_finite() && d0.is_finite() && d0 > 0.0)
}

/// Quadrature of a remainder over [−a, a] on a mesh graded geometrically toward
/// the origin. Intervals short enough that e^{itω} is nearly constant for every
/// requested t are lumped into their first three moments.
struct CentralNodes {
    nodes: Vec<(f64, Complex64)>,
    moments: [Complex64; 3],
}

impl CentralNodes {
    fn new(a: f64, t_max: f64, mut r: impl FnMut(f64) -> Result<Complex64>) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut moments = [Complex64::new(0.0, 0.0); 3];
        let mut hi = a;
        for _ in 0..60 {
            let lo = 0.5 * hi;
            let lump = t_max * hi < 1e-3;
            let pieces = ((hi - lo) * t_max / 2.0).ceil().max(1.0) as usize;
            let step = (hi - lo) / pieces as f64;
            for p in 0..pieces {
                let (x0, x1) = (lo + p as f64 * step, lo + (p + 1) as f64 * step);
                for sign in [1.0, -1.0] {
                    for (x, w) in kronrod_nodes(x0, x1) {
                        let om = sign * x;
                        let v = r(om)? * w;
                        if lump {
                            moments[0] += v;
                            moments[1] += v * om;
                            moments[2] += v * om * om;
                        } else {
                            nodes.push((om, v));
                        }
                    }
                }
            }
            hi = lo;
        }
        Ok(CentralNodes { nodes, moments })
    }

    /// Re Σ v e^{iωt} at t = j·dt for j = 0..=m, and separately for t = −j·dt.
    fn transform(&self, dt: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
        let mut pos = vec![0.0; m + 1];
        let mut neg = vec![0.0; m + 1];
        for &(om, v) in &self.nodes {
            let z = Complex64::from_polar(1.0, om * dt);
            let mut zp = v;
            let mut zn = v;
            for j in 0..=m {
                pos[j] += zp.re;
                neg[j] += zn.re;
                zp *= z;
                zn *= z.conj();
            }
        }
        let [m0, m1, m2] = self.moments;
        let i = Complex64::new(0.0, 1.0);
        for j in 0..=m {
            let t = j as f64 * dt;
            pos[j] += (m0 + i * t * m1 - m2 * (0.5 * t * t)).re;
            neg[j] += (m0 - i * t * m1 - m2 * (0.5 * t * t)).re;
        }
        (pos, neg)
    }
}

/// One row of a contour grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContourPoint {
    pub s: f64,
    pub t: f64,
    pub value: f64,
}

/// K(s·u, t) on a grid of distances along the unit direction u and times |t| ≤ t_max.
pub fn cov_contour(
    model: &HalfSpectralModel,
    direction: &[f64],
    distances: &[f64],
    t_max: f64,
    n_grid: usize,
    omega_max: f64,
) -> Result<Vec<ContourPoint>> {
    let un = norm(direction);
    if !(un > 0.0) {
        return Err(Error::Param("contour direction must be nonzero".into()));
    }
    let mut out = Vec::new();
    for &dist in distances {
        let s: Vec<f64> = direction.iter().map(|x| x / un * dist).collect();
        let grid = cov_slice_fft(model, &s, n_grid, omega_max)?;
        for (t, v) in grid.t_grid.iter().zip(&grid.values) {
            if t.abs() <= t_max + 1e-12 {
                out.push(ContourPoint { s: dist, t: *t, value: *v });
            }
        }
    }
    Ok(out)
}

/// Largest excess max_{s>0} K(s, t) − K(0, t) over t > 0 in a contour grid,
/// relative to K(0, 0). Positive values indicate a dimple.
pub fn dimple_metric(points: &[ContourPoint]) -> f64 {
    use std::collections::BTreeMap;
    let mut by_t: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    let mut k00 = f64::NAN;
    for p in points {
        let key = (p.t * 1e9).round() as i64;
        let e = by_t.entry(key).or_insert((f64::NAN, f64::NEG_INFINITY));
        if p.s == 0.0 {
            e.0 = p.value;
            if key == 0 {
                k00 = p.value;
            }
        } else {
            e.1 = e.1.max(p.value);
        }
    }
    by_t.iter()
        .filter(|(k, _)| **k > 0)
        .map(|(_, (at0, best))| (best - at0) / k00)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Alias frequencies ω + 2πj for j = −m..m, with f and δ precomputed.
pub(crate) struct AliasTable {
    pub m: usize,
    pub omega: Vec<f64>,
    pub f: Vec<f64>,
    pub delta: Vec<f64>,
    pub f_sum: Vec<f64>,
}

impl AliasTable {
    pub fn new(model: &HalfSpectralModel, base: &[f64], m: usize) -> Result<Self> {
        let width = 2 * m + 1;
        let mut omega = Vec::with_capacity(base.len() * width);
        let mut f = Vec::with_capacity(base.len() * width);
        let mut delta = Vec::with_capacity(base.len() * width);
        let mut f_sum = Vec::with_capacity(base.len());
        let constant_delta = model.interaction.is_constant();
        let d_const = if constant_delta { model.delta(1.0)? } else { 0.0 };
        for &w in base {
            let mut acc = 0.0;
            for j in 0..width {
                let om = w + 2.0 * PI * (j as f64 - m as f64);
                let fv = model.f(om);
                let dv = if constant_delta { d_const } else { model.interaction.value(om, fv)? };
                omega.push(om);
                f.push(fv);
                delta.push(dv);
                acc += fv;
            }
            f_sum.push(acc);
        }
        Ok(AliasTable { m, omega, f, delta, f_sum })
    }

    fn width(&self) -> usize {
        2 * self.m + 1
    }

    /// Aliased half-spectrum Σ_j f C(‖s‖δ) e^{iθφᵀs} at base index k. Each
    /// direction stops once δ is monotone and a term drops below 1e−17 of the
    /// diagonal value, since f and C only decrease from there on.
    pub fn spectrum(&self, model: &HalfSpectralModel, k: usize, s_norm: f64, proj: f64) -> Complex64 {
        let q0 = model.spatial.at_zero() + model.eta2;
        if s_norm == 0.0 {
            return Complex64::new(self.f_sum[k] * q0, 0.0);
        }
        let w = self.width();
        let off = k * w;
        let mono = model.delta_monotone_from();
        let phase = model.rho * proj;
        let negligible = 1e-17 * self.f_sum[k] * q0;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut add = |j: usize| -> bool {
            let i = off + j;
            let amp = self.f[i] * model.q_with_delta(s_norm, self.delta[i]);
            if amp <= negligible {
                return self.omega[i].abs() >= mono;
            }
            acc += if phase == 0.0 {
                Complex64::new(amp, 0.0)
            } else {
                Complex64::from_polar(amp, phase * self.omega[i])
            };
            false
        };
        for j in self.m..w {
            if add(j) {
                break;
            }
        }
        for j in (0..self.m).rev() {
            if add(j) {
                break;
            }
        }
        acc
    }

    /// Σ_j f (q − q₀) e^{iθφᵀs} at base index k.
    pub fn remainder(&self, model: &HalfSpectralModel, k: usize, s_norm: f64, proj: f64, q0: f64) -> Complex64 {
        let w = self.width();
        let off = k * w;
        let mono = model.delta_monotone_from();
        let phase = model.rho * proj;
        let mut acc = Complex64::new(0.0, 0.0);
        let term = |i: usize, q: f64| -> Complex64 {
            let amp = self.f[i] * (q - q0);
            if phase == 0.0 {
                Complex64::new(amp, 0.0)
            } else {
                Complex64::from_polar(amp, phase * self.omega[i])
            }
        };
        let dirs: [Box<dyn Iterator<Item = usize>>; 2] =
            [Box::new(self.m..w), Box::new((0..self.m).rev())];
        for dir in dirs {
            let mut rest_zero = false;
            for j in dir {
                let i = off + j;
                if rest_zero {
                    acc += term(i, 0.0);
                    continue;
                }
                let q = model.q_with_delta(s_norm, self.delta[i]);
                acc += term(i, q);
                if q == 0.0 && self.omega[i].abs() >= mono {
                    rest_zero = true;
                }
            }
        }
        acc
    }
}

/// Aliased half-spectrum Σ_{|j|≤m} f(ω+2πj)[C(sδ(ω+2πj)) + η²1{s=0}] e^{iθ(ω+2πj)φᵀs}.
pub fn aliased_half_spectrum(model: &HalfSpectralModel, s: &[f64], omega: f64, m: usize) -> Result<Complex64> {
    if s.len() != model.d {
        return Err(Error::Param(format!("lag of length {} for d = {}", s.len(), model.d)));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in -(m as i64)..=(m as i64) {
        acc += model.half_spectrum(s, omega + 2.0 * PI * j as f64)?;
    }
    Ok(acc)
}

/// Cross-spectral matrix of the sampled process at one frequency.
#[derive(Debug, Clone)]
pub struct CrossSpectralMatrix {
    pub omega: f64,
    pub s: DMatrix<Complex64>,
    pub coords: Vec<Vec<f64>>,
}

impl CrossSpectralMatrix {
    /// Smallest eigenvalue of the Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        crate::linalg::hermitian_min_eigenvalue(&self.s)
    }
}

pub(crate) fn lag(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// S_ij(ω) = aliased half-spectrum at lag s_i − s_j. Errors if the matrix has an
/// eigenvalue below −1e−10·trace.
pub fn cross_spectral_matrix(
    model: &HalfSpectralModel,
    coords: &[Vec<f64>],
    omega: f64,
    m: usize,
) -> Result<CrossSpectralMatrix> {
    let table = AliasTable::new(model, &[omega], m)?;
    let s = assemble_cross_spectrum(model, &table, 0, coords)?;
    let out = CrossSpectralMatrix { omega, s, coords: coords.to_vec() };
    let tr: f64 = (0..coords.len()).map(|i| out.s[(i, i)].re).sum();
    let me = out.min_eigenvalue();
    if me < -1e-10 * tr {
        return Err(Error::NotPd(format!(
            "cross-spectral matrix at omega = {omega} has eigenvalue {me:e} (trace {tr:e})"
        )));
    }
    Ok(out)
}

pub(crate) fn assemble_cross_spectrum(
    model: &HalfSpectralModel,
    table: &AliasTable,
    k: usize,
    coords: &[Vec<f64>],
) -> Result<DMatrix<Complex64>> {
    let p = coords.len();
    let mut s = DMatrix::from_element(p, p, Complex64::new(0.0, 0.0));
    for i in 0..p {
        if coords[i].len() != model.d {
            return Err(Error::Param(format!("site {i} has dimension {} for d = {}", coords[i].len(), model.d)));
        }
        s[(i, i)] = table.spectrum(model, k, 0.0, 0.0);
        for j in 0..i {
            let l = lag(&coords[i], &coords[j]);
            let v = table.spectrum(model, k, norm(&l), model.project(&l));
            s[(i, j)] = v;
            s[(j, i)] = v.conj();
        }
    }
    Ok(s)
}

/// K(s, τ) for integer τ in −(n−1)..=n−1, returned as (K(s,0..n), K(s,0,−1..−(n−1))),
/// i.e. `pos[τ] = K(s, τ)` and `neg[τ] = K(s, −τ)`.
pub fn cov_integer_lags(model: &HalfSpectralModel, s: &[f64], n: usize, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let engine = LagEngine::new(model, n, m)?;
    engine.lags(model, norm(s), model.project(s))
}

/// Reusable alias table on the midpoint grid of (−π, π] for integer-lag covariances.
pub(crate) struct LagEngine {
    n: usize,
    n_fft: usize,
    table: AliasTable,
}

impl LagEngine {
    pub fn new(model: &HalfSpectralModel, n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Param("need at least one lag".into()));
        }
        let n_fft = (4 * n).next_power_of_two().max(64);
        let h = 2.0 * PI / n_fft as f64;
        let base: Vec<f64> = (0..n_fft).map(|k| -PI + (k as f64 + 0.5) * h).collect();
        let table = AliasTable::new(model, &base, m)?;
        Ok(LagEngine { n, n_fft, table })
    }

    pub fn lags(&self, model: &HalfSpectralModel, s_norm: f64, proj: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let (q0, q_inf) = model.q_limits(s_norm)?;
        let shift = model.rho * proj;
        let mut pos = vec![0.0; n];
        let mut neg = vec![0.0; n];
        if s_norm == 0.0 || model.interaction.is_constant() {
            // the remainder vanishes identically
            for t in 0..n {
                pos[t] = q0 * model.temporal_cov(t as f64 + shift);
                neg[t] = q0 * model.temporal_cov(-(t as f64) + shift);
            }
            return Ok((pos, neg));
        }
        let nf = self.n_fft;
        let h = 2.0 * PI / nf as f64;
        let mut buf: Vec<Complex64> = (0..nf).map(|k| self.table.remainder(model, k, s_norm, proj, q0)).collect();
        let central = if q0 != 0.0 && is_singular_at_origin(model) {
            // only the unshifted alias is singular; move its tapered part off the grid
            let zero = nf / 2;
            let cells = central_cells(model, h, nf / 4);
            let a = cells as f64 * h;
            let r = |om: f64| -> Result<Complex64> {
                let v = model.f(om) * (model.q(s_norm, om)? - q0) * taper(om / a);
                Ok(Complex64::from_polar(v, model.theta(om) * proj))
            };
            for k in zero - cells..zero + cells {
                buf[k] -= r(self.table.omega[k * (2 * self.table.m + 1) + self.table.m])?;
            }
            let nodes = CentralNodes::new(a, n as f64, r)?;
            Some(nodes.transform(1.0, n))
        } else {
            None
        };
        fft_inverse(&mut buf);
        let (c, kk) = model.temporal.tail();
        let w_edge = (2 * self.table.m + 1) as f64 * PI;
        let value = |tau: i64| -> Result<f64> {
            let idx = tau.rem_euclid(nf as i64) as usize;
            let sign = if tau % 2 == 0 { 1.0 } else { -1.0 };
            let pref = Complex64::from_polar(sign, PI * tau as f64 / nf as f64);
            let tp = tau as f64 + shift;
            let mut v = h * (pref * buf[idx]).re + q0 * model.temporal_cov(tp);
            if q_inf - q0 != 0.0 {
                v += (q_inf - q0) * c * power_tail_integral(kk, tp, w_edge)?;
            }
            if let Some((cp, cn)) = &central {
                v += if tau >= 0 { cp[tau as usize] } else { cn[(-tau) as usize] };
            }
            Ok(v)
        };
        for t in 0..n {
            pos[t] = value(t as i64)?;
            neg[t] = value(-(t as i64))?;
        }
        Ok((pos, neg))
    }
}
