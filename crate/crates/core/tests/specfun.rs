mod common;

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use approx::assert_relative_eq;
use common::*;
use halfspec::specfun::*;
use proptest::prelude::*;

#[test]
fn bessel_k_half_integer_closed_forms() {
    for &x in &[0.01, 0.3, 1.0, 4.5, 20.0, 200.0] {
        let k12 = (PI / (2.0 * x)).sqrt() * (-x).exp();
        assert_relative_eq!(bessel_k(0.5, x).unwrap(), k12, max_relative = 1e-12);
        assert_relative_eq!(bessel_k(1.5, x).unwrap(), k12 * (1.0 + 1.0 / x), max_relative = 1e-12);
        assert_relative_eq!(bessel_k(-0.5, x).unwrap(), k12, max_relative = 1e-12);
    }
}

#[test]
fn bessel_k_matches_integral_representation() {
    for &nu in &[0.0, 0.125, 0.4, 1.0, 2.3, 7.5] {
        for &x in &[0.05, 0.5, 1.7, 3.0, 12.0, 60.0] {
            let want = bessel_k_oracle(nu, x);
            assert_relative_eq!(bessel_k(nu, x).unwrap(), want, max_relative = 1e-10);
        }
    }
}

#[test]
fn bessel_k_rejects_nonpositive_argument() {
    assert!(bessel_k(0.5, 0.0).is_err());
    assert!(bessel_k(0.5, -1.0).is_err());
}

#[test]
fn matern_m_limits() {
    for &nu in &[0.125, 0.5, 1.0, 2.5] {
        let m0 = 2f64.powf(nu - 1.0) * gamma_fn(nu);
        assert_relative_eq!(matern_m(nu, 0.0).unwrap(), m0, max_relative = 1e-12);
        // M_ν(0) − M_ν(r) = O(r^{2 min(ν, 1)}).
        let r = 1e-9f64;
        assert_relative_eq!(matern_m(nu, r).unwrap(), m0, max_relative = (10.0 * r.powf(2.0 * nu.min(1.0))).max(1e-14));
        assert_relative_eq!(matern_m(nu, 1e-3).unwrap(), matern_m_oracle(nu, 1e-3), max_relative = 1e-10);
        assert_relative_eq!(matern_corr(nu, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        for &r in &[0.1, 1.0, 5.0] {
            assert_relative_eq!(matern_m(nu, r).unwrap(), matern_m_oracle(nu, r), max_relative = 1e-10);
            assert_relative_eq!(ln_matern_m(nu, r), matern_m_oracle(nu, r).ln(), max_relative = 1e-10);
        }
    }
    assert_relative_eq!(matern_corr(0.5, 2.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-12);
    assert!(matern_m(0.5, 1000.0).unwrap() < 1e-300);
}

#[test]
fn matern_m_is_decreasing_and_log_convex_for_small_order() {
    // Completely monotone for ν ≤ 1/2, hence log-convex.
    let nu = 0.3;
    let r: Vec<f64> = (1..200).map(|i| i as f64 * 0.05).collect();
    let l: Vec<f64> = r.iter().map(|&x| ln_matern_m(nu, x)).collect();
    for w in l.windows(3) {
        assert!(w[1] < w[0]);
        assert!(w[0] - 2.0 * w[1] + w[2] > -1e-12);
    }
}

#[test]
fn incomplete_gamma_known_values() {
    for &x in &[0.1, 1.0, 3.0, 10.0] {
        assert_relative_eq!(reg_gamma_p(1.0, x).unwrap(), 1.0 - (-x).exp(), max_relative = 1e-13);
        let (p, q) = reg_gamma_pq(2.5, x).unwrap();
        assert_relative_eq!(p + q, 1.0, epsilon = 1e-14);
        assert_relative_eq!(p, reg_gamma_p_oracle(2.5, x), max_relative = 1e-9);
    }
    assert_relative_eq!(reg_gamma_p_inv(1.0, 0.5).unwrap(), LN_2, max_relative = 1e-12);
    assert_relative_eq!(reg_gamma_p_inv(2.5, 0.3).unwrap(), reg_gamma_p_inv_oracle(2.5, 0.3), max_relative = 1e-8);
    assert_eq!(reg_gamma_p_inv(2.0, 0.0).unwrap(), 0.0);
    assert!(reg_gamma_p_inv(2.0, 1.0).is_err() || reg_gamma_p_inv(2.0, 1.0).unwrap().is_infinite());
}

#[test]
fn gamma_inverse_keeps_precision_in_upper_tail() {
    let s = 1.0;
    let q = 1e-30;
    let x = gamma_inv_pq(s, 1.0 - q, q).unwrap();
    assert_relative_eq!(x, -q.ln(), max_relative = 1e-10);
}

#[test]
fn incomplete_beta_simple_cases() {
    for &x in &[0.0, 0.2, 0.5, 0.93, 1.0] {
        let (i, c) = reg_beta_pair(1.0, 1.0, x).unwrap();
        assert_relative_eq!(i, x, epsilon = 1e-14);
        assert_relative_eq!(c, 1.0 - x, epsilon = 1e-14);
        let (i3, _) = reg_beta_pair(3.0, 1.0, x).unwrap();
        assert_relative_eq!(i3, x.powi(3), epsilon = 1e-13);
    }
}

#[test]
fn hyp2f1_values() {
    assert_eq!(hyp2f1_fb(1.3, 0.0).unwrap(), 1.0);
    assert_relative_eq!(hyp2f1_fb(0.5, 1.0).unwrap(), PI / 4.0, max_relative = 1e-13);
    assert_relative_eq!(hyp2f1_fb(1.7, 3.2).unwrap(), hyp2f1_fb_oracle(1.7, 3.2), max_relative = 1e-10);
    for &k in &[0.25, 0.5, 1.0, 2.0, 4.5] {
        for &z in &[0.1, 0.9, 1.0, 2.0, 10.0, 150.0] {
            assert_relative_eq!(hyp2f1_fb(k, z).unwrap(), hyp2f1_fb_oracle(k, z), max_relative = 1e-8);
        }
    }
    // Direct series and the transformed evaluation agree at small w.
    let (k, z) = (1.2f64, 0.4f64);
    let w = z * z / (1.0 + z * z);
    let via_pfaff = (1.0 + z * z).powf(-0.5) * pfaff_series(k, w).unwrap();
    assert_relative_eq!(via_pfaff, hyp2f1_fb(k, z).unwrap(), max_relative = 1e-12);
}

#[test]
fn sine_cosine_integrals() {
    assert_eq!(sin_integral(0.0).unwrap(), 0.0);
    assert_relative_eq!(sin_integral(1e6).unwrap(), FRAC_PI_2, epsilon = 1e-5);
    for &x in &[0.1, 1.0, 2.5, 7.0] {
        assert_relative_eq!(sin_integral(-x).unwrap(), -sin_integral(x).unwrap(), epsilon = 1e-15);
        let si = simpson(|u| if u == 0.0 { 1.0 } else { u.sin() / u }, 0.0, x, 20_000);
        assert_relative_eq!(sin_integral(x).unwrap(), si, max_relative = 1e-11);
        assert_relative_eq!(cos_integral(x).unwrap(), ci_series(x), max_relative = 1e-11);
        let (s, c) = si_ci(x).unwrap();
        assert_eq!(s, sin_integral(x).unwrap());
        assert_eq!(c, cos_integral(x).unwrap());
    }
    assert_relative_eq!(cos_integral(1.0).unwrap(), 0.337_403_922_900_968_1, max_relative = 1e-13);
    // Ci(x) ~ γ + ln x for tiny x.
    let x = 1e-8;
    assert_relative_eq!(cos_integral(x).unwrap(), 0.577_215_664_901_532_9 + x.ln(), max_relative = 1e-12);
}

#[test]
fn aux_g_matches_definition() {
    for &x in &[0.01, 0.5, 2.0, 9.0] {
        let (s, c) = (sin_integral(x).unwrap(), cos_integral(x).unwrap());
        let want = -c * x.cos() - (s - FRAC_PI_2) * x.sin();
        assert_relative_eq!(aux_g(x).unwrap(), want, max_relative = 1e-10);
    }
    // g(x) ~ 1/x² for large x.
    let x = 1e5;
    assert_relative_eq!(aux_g(x).unwrap() * x * x, 1.0, max_relative = 1e-6);
}

proptest! {
    #[test]
    fn gamma_inverse_round_trip(s in 0.05f64..30.0, p in 0.001f64..0.999) {
        let x = reg_gamma_p_inv(s, p).unwrap();
        let back = reg_gamma_p(s, x).unwrap();
        prop_assert!((back - p).abs() < 1e-10 * p.max(1e-3), "s={s} p={p} x={x} back={back}");
    }

    #[test]
    fn hyp2f1_decreasing_in_z(k in 0.1f64..5.0, z in 0.01f64..50.0) {
        let a = hyp2f1_fb(k, z).unwrap();
        let b = hyp2f1_fb(k, z * 1.1).unwrap();
        prop_assert!(b < a && a <= 1.0 && b > 0.0);
    }
}
