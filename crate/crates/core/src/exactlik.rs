//! Exact Gaussian log-likelihood for regular monitoring data through the
//! multivariate Durbin–Levinson recursion on the block-Toeplitz covariance.
//!
//! Data are stacked time-major, z = (x_1, …, x_n) with x_t ∈ ℝ^p, and
//! Γ_τ = Cov(x_{t+τ}, x_t), so Γ_{−τ} = Γ_τᵀ. The recursion produces one-step
//! prediction coefficients Φ_{k,j} and innovation covariances V_k, which give
//! log det T = Σ log det V_k and T⁻¹ = Lᵀ D⁻¹ L with L built from the Φ_{k,·}.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::covops::{lag, LagEngine};
use crate::error::{Error, Result};
use crate::linalg::{dense_logdet_solve, Block, Chol};
use crate::model::{norm, CovModel, GneitingG, HalfSpectralModel};
use crate::whittle::{RegularMonitoringData, DEFAULT_ALIAS_M};

/// Largest p·n for which the dense oracle is allowed.
pub const DENSE_LIMIT: usize = 5000;

/// Covariance blocks Γ_0..Γ_{n−1} of the sampled process.
#[derive(Debug, Clone)]
pub struct BlockCovarianceSequence {
    pub p: usize,
    pub blocks: Vec<Block>,
}

impl BlockCovarianceSequence {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let p = blocks.first().map(|b| b.p).ok_or_else(|| Error::Param("empty block sequence".into()))?;
        if blocks.iter().any(|b| b.p != p || b.a.len() != p * p) {
            return Err(Error::Param("blocks differ in size".into()));
        }
        Ok(BlockCovarianceSequence { p, blocks })
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    /// Γ_τ for τ of either sign.
    pub fn gamma(&self, tau: isize) -> Block {
        if tau >= 0 {
            self.blocks[tau as usize].clone()
        } else {
            self.blocks[(-tau) as usize].transpose()
        }
    }

    /// The full pn×pn covariance of the time-major stack.
    pub fn dense(&self) -> DMatrix<f64> {
        let (p, n) = (self.p, self.n());
        let mut t = DMatrix::zeros(p * n, p * n);
        for a in 0..n {
            for b in 0..n {
                let g = self.gamma(a as isize - b as isize);
                for i in 0..p {
                    for j in 0..p {
                        t[(a * p + i, b * p + j)] = g.get(i, j);
                    }
                }
            }
        }
        t
    }
}

/// Γ_τ[i][j] = K(s_i − s_j, τ) for τ = 0..n−1, with integer time lags.
pub fn block_sequence(model: &CovModel, coords: &[Vec<f64>], n: usize) -> Result<BlockCovarianceSequence> {
    if n == 0 {
        return Err(Error::Param("need n >= 1".into()));
    }
    match model {
        CovModel::Half(h) => half_block_sequence(h, coords, n, DEFAULT_ALIAS_M),
        CovModel::G(g) => Ok(g_block_sequence(g, coords, n)),
    }
}

fn g_block_sequence(g: &GneitingG, coords: &[Vec<f64>], n: usize) -> BlockCovarianceSequence {
    let p = coords.len();
    let blocks = (0..n)
        .map(|tau| Block::from_fn(p, |i, j| g.cov(norm(&lag(&coords[i], &coords[j])), tau as f64)))
        .collect();
    BlockCovarianceSequence { p, blocks }
}

/// Half-spectral blocks from the aliased integer-lag engine with truncation m.
pub fn half_block_sequence(
    model: &HalfSpectralModel,
    coords: &[Vec<f64>],
    n: usize,
    m: usize,
) -> Result<BlockCovarianceSequence> {
    let p = coords.len();
    if let Some(c) = coords.iter().find(|c| c.len() != model.d) {
        return Err(Error::Param(format!("site of dimension {} for d = {}", c.len(), model.d)));
    }
    let engine = LagEngine::new(model, n, m)?;
    let mut pairs = vec![(0usize, 0usize)];
    for i in 0..p {
        for j in 0..i {
            pairs.push((i, j));
        }
    }
    let series: Vec<(Vec<f64>, Vec<f64>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let l = lag(&coords[i], &coords[j]);
            engine.lags(model, norm(&l), model.project(&l))
        })
        .collect::<Result<_>>()?;
    let mut blocks = vec![Block::zeros(p); n];
    for (tau, b) in blocks.iter_mut().enumerate() {
        for i in 0..p {
            b.set(i, i, series[0].0[tau]);
        }
        for (&(i, j), (pos, neg)) in pairs.iter().zip(&series).skip(1) {
            b.set(i, j, pos[tau]);
            b.set(j, i, neg[tau]);
        }
    }
    Ok(BlockCovarianceSequence { p, blocks })
}

/// Forward prediction state of the recursion.
struct Recursion<'a> {
    seq: &'a BlockCovarianceSequence,
    /// Φ_{k,1..k}
    phi: Vec<Block>,
    /// Ψ_{k,1..k}
    psi: Vec<Block>,
    v: Block,
    u: Block,
    k: usize,
}

impl<'a> Recursion<'a> {
    fn new(seq: &'a BlockCovarianceSequence) -> Self {
        let g0 = seq.blocks[0].clone();
        Recursion { seq, phi: Vec::new(), psi: Vec::new(), v: g0.clone(), u: g0, k: 0 }
    }

    /// Advances from order k to k+1.
    fn step(&mut self) -> Result<()> {
        let k = self.k;
        let p = self.seq.p;
        // Δ_k = Γ_{k+1} − Σ_j Φ_{k,j} Γ_{k+1−j}
        let mut delta = self.seq.blocks[k + 1].clone();
        for (j, ph) in self.phi.iter().enumerate() {
            delta.sub_mul(ph, &self.seq.blocks[k - j]);
        }
        let cu = Chol::new(&self.u).ok_or(Error::NotPositiveDefinite { step: k })?;
        let cv = Chol::new(&self.v).ok_or(Error::NotPositiveDefinite { step: k })?;
        let a = cu.right_solve_block(&delta);
        let b = cv.right_solve_block(&delta.transpose());
        let mut phi = Vec::with_capacity(k + 1);
        let mut psi = Vec::with_capacity(k + 1);
        for j in 0..k {
            let mut f = self.phi[j].clone();
            f.sub_mul(&a, &self.psi[k - 1 - j]);
            phi.push(f);
            let mut g = self.psi[j].clone();
            g.sub_mul(&b, &self.phi[k - 1 - j]);
            psi.push(g);
        }
        phi.push(a.clone());
        psi.push(b.clone());
        self.v.sub_mul_t(&a, &delta);
        self.u.sub_mul(&b, &delta);
        self.v.symmetrize();
        self.u.symmetrize();
        debug_assert_eq!(self.v.p, p);
        self.phi = phi;
        self.psi = psi;
        self.k = k + 1;
        Ok(())
    }

    /// Innovation x_{k+1} − Σ_j Φ_{k,j} x_{k+1−j} for the stacked vector z.
    fn innovation(&self, z: &[f64]) -> Vec<f64> {
        let p = self.seq.p;
        let k = self.k;
        let mut e = z[k * p..(k + 1) * p].to_vec();
        for (j, ph) in self.phi.iter().enumerate() {
            let t = k - 1 - j;
            ph.sub_matvec(&z[t * p..(t + 1) * p], &mut e);
        }
        e
    }
}

/// Solves T x = b for the block-Toeplitz T and returns (x, log det T).
pub fn block_levinson(seq: &BlockCovarianceSequence, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (p, n) = (seq.p, seq.n());
    if rhs.len() != p * n {
        return Err(Error::Param(format!("right-hand side has length {} for p·n = {}", rhs.len(), p * n)));
    }
    let mut rec = Recursion::new(seq);
    let mut x = vec![0.0; p * n];
    let mut logdet = 0.0;
    for k in 0..n {
        if k > 0 {
            rec.step()?;
        }
        let cv = Chol::new(&rec.v).ok_or(Error::NotPositiveDefinite { step: k })?;
        logdet += cv.logdet();
        let mut w = rec.innovation(rhs);
        cv.solve_in_place(&mut w);
        // x += L_kᵀ w, where row k of L is (−Φ_{k,k}, …, −Φ_{k,1}, I)
        for (xi, wi) in x[k * p..(k + 1) * p].iter_mut().zip(&w) {
            *xi += wi;
        }
        for (j, ph) in rec.phi.iter().enumerate() {
            let t = k - 1 - j;
            ph.sub_matvec_t(&w, &mut x[t * p..(t + 1) * p]);
        }
    }
    Ok((x, logdet))
}

/// log det T and zᵀT⁻¹z in one streaming pass, without forming the solution.
pub fn levinson_logdet_quad(seq: &BlockCovarianceSequence, z: &[f64]) -> Result<(f64, f64)> {
    let (p, n) = (seq.p, seq.n());
    if z.len() != p * n {
        return Err(Error::Param(format!("data vector has length {} for p·n = {}", z.len(), p * n)));
    }
    let mut rec = Recursion::new(seq);
    let mut logdet = 0.0;
    let mut quad = 0.0;
    for k in 0..n {
        if k > 0 {
            rec.step()?;
        }
        let cv = Chol::new(&rec.v).ok_or(Error::NotPositiveDefinite { step: k })?;
        logdet += cv.logdet();
        let e = rec.innovation(z);
        let mut w = e.clone();
        cv.solve_in_place(&mut w);
        quad += e.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok((logdet, quad))
}

/// Dense Cholesky solve and log-determinant, limited to p·n ≤ [`DENSE_LIMIT`].
pub fn dense_solve(seq: &BlockCovarianceSequence, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
    let size = seq.p * seq.n();
    if size > DENSE_LIMIT {
        return Err(Error::Unsupported(format!("dense oracle limited to p·n <= {DENSE_LIMIT}, got {size}")));
    }
    if rhs.len() != size {
        return Err(Error::Param(format!("right-hand side has length {} for p·n = {size}", rhs.len())));
    }
    let (ld, x) = dense_logdet_solve(&seq.dense(), &DVector::from_column_slice(rhs))?;
    Ok((x.as_slice().to_vec(), ld))
}

/// Time-major stack (x_1, …, x_n) of the series.
pub fn stack(data: &RegularMonitoringData) -> Vec<f64> {
    let (p, n) = data.series.shape();
    let mut z = Vec::with_capacity(p * n);
    for t in 0..n {
        for i in 0..p {
            z.push(data.series[(i, t)]);
        }
    }
    z
}

fn gaussian_loglik(size: usize, logdet: f64, quad: f64) -> f64 {
    -0.5 * (size as f64 * (2.0 * std::f64::consts::PI).ln() + logdet + quad)
}

/// Exact Gaussian log-likelihood −½[pn log 2π + log det T + zᵀT⁻¹z].
pub fn exact_loglik(model: &CovModel, data: &RegularMonitoringData) -> Result<f64> {
    data.validate()?;
    let seq = block_sequence(model, &data.coords, data.n())?;
    exact_loglik_blocks(&seq, &stack(data))
}

/// Exact log-likelihood for given blocks and stacked data.
pub fn exact_loglik_blocks(seq: &BlockCovarianceSequence, z: &[f64]) -> Result<f64> {
    let (ld, q) = levinson_logdet_quad(seq, z)?;
    Ok(gaussian_loglik(z.len(), ld, q))
}

/// The same likelihood from a dense Cholesky factorization.
pub fn dense_loglik(model: &CovModel, data: &RegularMonitoringData) -> Result<f64> {
    data.validate()?;
    let seq = block_sequence(model, &data.coords, data.n())?;
    let z = stack(data);
    let (x, ld) = dense_solve(&seq, &z)?;
    let q: f64 = x.iter().zip(&z).map(|(a, b)| a * b).sum();
    Ok(gaussian_loglik(z.len(), ld, q))
}

/// Draws a zero-mean Gaussian series with the given block covariance by running
/// the prediction recursion forward with innovations V_k^{1/2} ε_k.
pub fn simulate_blocks(seq: &BlockCovarianceSequence, seed: u64) -> Result<DMatrix<f64>> {
    let (p, n) = (seq.p, seq.n());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut z = vec![0.0; p * n];
    let mut rec = Recursion::new(seq);
    let mut eps = vec![0.0; p];
    let mut shock = vec![0.0; p];
    for k in 0..n {
        if k > 0 {
            rec.step()?;
        }
        let cv = Chol::new(&rec.v).ok_or(Error::NotPositiveDefinite { step: k })?;
        for e in eps.iter_mut() {
            *e = StandardNormal.sample(&mut rng);
        }
        cv.lower_mul(&eps, &mut shock);
        // prediction from the past, negated by innovation()
        let pred: Vec<f64> = rec.innovation(&z).into_iter().map(|v| -v).collect();
        for i in 0..p {
            z[k * p + i] = pred[i] + shock[i];
        }
    }
    Ok(DMatrix::from_fn(p, n, |i, t| z[t * p + i]))
}

/// Simulates regular monitoring data from a model at the given sites.
pub fn simulate(model: &CovModel, coords: &[Vec<f64>], n: usize, seed: u64) -> Result<RegularMonitoringData> {
    let seq = block_sequence(model, coords, n)?;
    let series = simulate_blocks(&seq, seed)?;
    RegularMonitoringData::new(coords.to_vec(), series, 1.0)
}
