//! Small dense helpers on row-major p×p blocks, plus complex Hermitian utilities.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major square matrix of order p stored in a flat slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub p: usize,
    pub a: Vec<f64>,
}

impl Block {
    pub fn zeros(p: usize) -> Self {
        Block { p, a: vec![0.0; p * p] }
    }

    pub fn identity(p: usize) -> Self {
        let mut b = Block::zeros(p);
        for i in 0..p {
            b.a[i * p + i] = 1.0;
        }
        b
    }

    pub fn from_fn(p: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut b = Block::zeros(p);
        for i in 0..p {
            for j in 0..p {
                b.a[i * p + j] = f(i, j);
            }
        }
        b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.p + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.p + j] = v;
    }

    pub fn transpose(&self) -> Block {
        Block::from_fn(self.p, |i, j| self.get(j, i))
    }

    pub fn scaled(&self, c: f64) -> Block {
        Block { p: self.p, a: self.a.iter().map(|x| x * c).collect() }
    }

    /// self += a·b
    pub fn add_mul(&mut self, a: &Block, b: &Block) {
        let p = self.p;
        for i in 0..p {
            for l in 0..p {
                let ail = a.a[i * p + l];
                if ail == 0.0 {
                    continue;
                }
                let row = &b.a[l * p..(l + 1) * p];
                let out = &mut self.a[i * p..(i + 1) * p];
                for (o, r) in out.iter_mut().zip(row) {
                    *o += ail * r;
                }
            }
        }
    }

    /// self −= a·b
    pub fn sub_mul(&mut self, a: &Block, b: &Block) {
        let p = self.p;
        for i in 0..p {
            for l in 0..p {
                let ail = a.a[i * p + l];
                if ail == 0.0 {
                    continue;
                }
                let row = &b.a[l * p..(l + 1) * p];
                let out = &mut self.a[i * p..(i + 1) * p];
                for (o, r) in out.iter_mut().zip(row) {
                    *o -= ail * r;
                }
            }
        }
    }

    /// self −= a·bᵀ
    pub fn sub_mul_t(&mut self, a: &Block, b: &Block) {
        let p = self.p;
        for i in 0..p {
            let ar = &a.a[i * p..(i + 1) * p];
            for j in 0..p {
                let br = &b.a[j * p..(j + 1) * p];
                let dot: f64 = ar.iter().zip(br).map(|(x, y)| x * y).sum();
                self.a[i * p + j] -= dot;
            }
        }
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        let p = self.p;
        for i in 0..p {
            out[i] = self.a[i * p..(i + 1) * p].iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// y −= self·x
    pub fn sub_matvec(&self, x: &[f64], y: &mut [f64]) {
        let p = self.p;
        for i in 0..p {
            let dot: f64 = self.a[i * p..(i + 1) * p].iter().zip(x).map(|(a, b)| a * b).sum();
            y[i] -= dot;
        }
    }

    /// y −= selfᵀ·x
    pub fn sub_matvec_t(&self, x: &[f64], y: &mut [f64]) {
        let p = self.p;
        for l in 0..p {
            let xl = x[l];
            if xl == 0.0 {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(&self.a[l * p..(l + 1) * p]) {
                *yi -= a * xl;
            }
        }
    }

    pub fn symmetrize(&mut self) {
        let p = self.p;
        for i in 0..p {
            for j in 0..i {
                let v = 0.5 * (self.a[i * p + j] + self.a[j * p + i]);
                self.a[i * p + j] = v;
                self.a[j * p + i] = v;
            }
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.p, self.p, &self.a)
    }
}

/// Lower Cholesky factor of a symmetric positive definite block.
#[derive(Debug, Clone)]
pub struct Chol {
    p: usize,
    l: Vec<f64>,
}

impl Chol {
    /// Returns None if the matrix is not numerically positive definite.
    pub fn new(m: &Block) -> Option<Chol> {
        let p = m.p;
        let mut l = vec![0.0; p * p];
        for j in 0..p {
            let mut d = m.a[j * p + j];
            for k in 0..j {
                d -= l[j * p + k] * l[j * p + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return None;
            }
            let djj = d.sqrt();
            l[j * p + j] = djj;
            for i in (j + 1)..p {
                let mut s = m.a[i * p + j];
                for k in 0..j {
                    s -= l[i * p + k] * l[j * p + k];
                }
                l[i * p + j] = s / djj;
            }
        }
        Some(Chol { p, l })
    }

    pub fn logdet(&self) -> f64 {
        (0..self.p).map(|i| 2.0 * self.l[i * self.p + i].ln()).sum()
    }

    /// Solves M x = b in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let p = self.p;
        for i in 0..p {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[i * p + k] * b[k];
            }
            b[i] = s / self.l[i * p + i];
        }
        for i in (0..p).rev() {
            let mut s = b[i];
            for k in (i + 1)..p {
                s -= self.l[k * p + i] * b[k];
            }
            b[i] = s / self.l[i * p + i];
        }
    }

    /// Returns X with M X = B (columnwise), i.e. M⁻¹B.
    pub fn solve_block(&self, b: &Block) -> Block {
        let p = self.p;
        let mut out = Block::zeros(p);
        let mut col = vec![0.0; p];
        for j in 0..p {
            for i in 0..p {
                col[i] = b.a[i * p + j];
            }
            self.solve_in_place(&mut col);
            for i in 0..p {
                out.a[i * p + j] = col[i];
            }
        }
        out
    }

    /// Returns B M⁻¹ (M symmetric).
    pub fn right_solve_block(&self, b: &Block) -> Block {
        let p = self.p;
        let mut out = Block::zeros(p);
        let mut row = vec![0.0; p];
        for i in 0..p {
            row.copy_from_slice(&b.a[i * p..(i + 1) * p]);
            self.solve_in_place(&mut row);
            out.a[i * p..(i + 1) * p].copy_from_slice(&row);
        }
        out
    }

    /// L z for the lower factor L.
    pub fn lower_mul(&self, z: &[f64], out: &mut [f64]) {
        let p = self.p;
        for i in 0..p {
            out[i] = (0..=i).map(|k| self.l[i * p + k] * z[k]).sum();
        }
    }
}

/// Smallest eigenvalue of a Hermitian complex matrix.
pub fn hermitian_min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let e = m.clone().symmetric_eigen();
    e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Hermitian Cholesky with trace-relative diagonal jitter escalation 1e−12 → 1e−8.
/// Returns the factorization and the jitter actually used.
pub fn hermitian_cholesky_jittered(
    m: &DMatrix<Complex64>,
) -> Option<(nalgebra::Cholesky<Complex64, nalgebra::Dyn>, f64)> {
    if let Some(c) = m.clone().cholesky() {
        return Some((c, 0.0));
    }
    let p = m.nrows();
    let tr: f64 = (0..p).map(|i| m[(i, i)].re).sum::<f64>() / p.max(1) as f64;
    for eps in [1e-12, 1e-11, 1e-10, 1e-9, 1e-8] {
        let mut j = m.clone();
        for i in 0..p {
            j[(i, i)] += Complex64::new(eps * tr, 0.0);
        }
        if let Some(c) = j.cholesky() {
            return Some((c, eps * tr));
        }
    }
    None
}

/// Dense symmetric positive definite log-determinant and solve (oracle routes).
pub fn dense_logdet_solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
    let c = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPd("dense covariance matrix".into()))?;
    let ld = 2.0 * c.l_dirty().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    Ok((ld, c.solve(b)))
}
