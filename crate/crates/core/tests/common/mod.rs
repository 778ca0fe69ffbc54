//! Independent numerical oracles for tests. Nothing here calls into the crate's
//! own quadrature or special functions.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule with n (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// K_ν(x) from ∫₀^∞ e^{−x cosh t} cosh(νt) dt by the trapezoid rule, which
/// converges geometrically for this even, analytic integrand.
pub fn bessel_k_oracle(nu: f64, x: f64) -> f64 {
    let h: f64 = 0.01;
    let mut sum = 0.5 * (-x).exp();
    let mut t = h;
    loop {
        let v = (-x * t.cosh()).exp() * (nu * t).cosh();
        sum += v;
        if v < 1e-300 || (t > 1.0 && v < 1e-18 * sum) {
            break;
        }
        t += h;
    }
    sum * h
}

/// Γ(x) for x > 0 by the Lanczos approximation (g = 7, 9 terms).
pub fn gamma_fn(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_fn(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// r^ν K_ν(r) with its limit at 0.
pub fn matern_m_oracle(nu: f64, r: f64) -> f64 {
    if r == 0.0 {
        2f64.powf(nu - 1.0) * gamma_fn(nu)
    } else {
        r.powf(nu) * bessel_k_oracle(nu, r)
    }
}

/// ₂F₁(1/2, κ+1/2; 3/2; −z²) = ∫₀¹ (1 + z²u²)^{−(κ+1/2)} du.
pub fn hyp2f1_fb_oracle(kappa: f64, z: f64) -> f64 {
    simpson(|u| (1.0 + z * z * u * u).powf(-(kappa + 0.5)), 0.0, 1.0, 20_000)
}

/// Regularized lower incomplete gamma P(s, x) via x = u².
pub fn reg_gamma_p_oracle(s: f64, x: f64) -> f64 {
    let top = x.sqrt();
    2.0 * simpson(|u| u.powf(2.0 * s - 1.0) * (-u * u).exp(), 0.0, top, 20_000) / gamma_fn(s)
}

/// Inverse of [`reg_gamma_p_oracle`] in x by bisection.
pub fn reg_gamma_p_inv_oracle(s: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 100.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if reg_gamma_p_oracle(s, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ci(x) = γ + ln x + Σ (−x²)^k / (2k (2k)!).
pub fn ci_series(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..60 {
        let k2 = 2.0 * k as f64;
        term *= -x * x / ((k2 - 1.0) * k2);
        sum += term / k2;
        if term.abs() < 1e-18 {
            break;
        }
    }
    EULER + x.ln() + sum
}

/// 2φ ∫₀^∞ cos(ωt)/(βt + 1) dt, rewritten through 1/(1+βt) = ∫ e^{−u(1+βt)} du
/// as 2φ ∫₀^∞ e^{−u} uβ/(u²β² + ω²) du.
pub fn f_g_oracle(beta: f64, phi: f64, omega: f64) -> f64 {
    let w = omega.abs();
    2.0 * phi * simpson(|u| (-u).exp() * u * beta / (u * u * beta * beta + w * w), 0.0, 60.0, 400_000)
}

/// Origin-normalized (d+1)-dimensional Matérn with smoothness 1/2 in the
/// space-time metric r = β√(α²‖s‖² + t²).
pub fn exp_st_oracle(alpha: f64, beta: f64, s_norm: f64, t: f64) -> f64 {
    (-beta * (alpha * alpha * s_norm * s_norm + t * t).sqrt()).exp()
}

/// Mean and unbiased variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Small deterministic generator for test inputs (SplitMix64).
pub struct Mix(pub u64);

impl Mix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}
