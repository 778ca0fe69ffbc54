mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use common::*;
use halfspec::covops::cov_point;
use halfspec::model::*;
use halfspec::quad::QuadSpec;

fn pv(pairs: &[(Param, f64)]) -> ParamVector {
    pairs.iter().fold(ParamVector::new(), |p, &(k, v)| p.with(k, v))
}

fn example1(nu: f64, kappa: f64, d: usize) -> HalfSpectralModel {
    use Param::*;
    make_matern_in_time(&pv(&[(PhiVar, 1.3), (Alpha, 0.7), (Beta, 1.1), (Kappa, kappa), (Nu, nu)]), d).unwrap()
}

#[test]
fn equal_smoothness_gives_space_time_matern_spectrum() {
    // g ∝ (α²(β²+ω²) + ‖λ‖²)^{−(ν+(d+1)/2)} with a constant independent of (λ, ω).
    let (nu, d) = (0.7, 2);
    let m = example1(nu, nu, d);
    let (alpha, beta) = (0.7, 1.1);
    let e = nu + (d as f64 + 1.0) / 2.0;
    let mut ratio = None;
    for &(l0, l1, w) in &[(0.0, 0.0, 0.0), (1.0, -2.0, 0.3), (5.0, 0.5, -7.0), (40.0, 3.0, 100.0), (0.01, 0.0, 2.5)] {
        let g = m.full_spectrum(&[l0, l1], w).unwrap();
        let want = (alpha * alpha * (beta * beta + w * w) + l0 * l0 + l1 * l1).powf(-e);
        let r = g / want;
        match ratio {
            None => ratio = Some(r),
            Some(r0) => assert_relative_eq!(r, r0, max_relative = 1e-12),
        }
    }
}

#[test]
fn class1_full_spectrum_formula() {
    // g(λ, ω) ∝ (α² f(ω)^{−1/(ν+1/2)} + ‖λ‖²)^{−(ν+(d+1)/2)}
    let (nu, kappa, d) = (0.4, 1.3, 3);
    let m = example1(nu, kappa, d);
    let alpha = 0.7;
    let e = nu + (d as f64 + 1.0) / 2.0;
    let base = m.full_spectrum(&[0.0; 3], 0.0).unwrap()
        / (alpha * alpha * m.f(0.0).powf(-1.0 / (nu + 0.5))).powf(-e);
    for &(l, w) in &[(0.5, 1.0), (3.0, -0.2), (11.0, 20.0)] {
        let lam = [l, -l / 2.0, 0.3];
        let l2: f64 = lam.iter().map(|x| x * x).sum();
        let want = base * (alpha * alpha * m.f(w).powf(-1.0 / (nu + 0.5)) + l2).powf(-e);
        assert_relative_eq!(m.full_spectrum(&lam, w).unwrap(), want, max_relative = 1e-12);
    }
}

#[test]
fn example1_half_spectrum_closed_form() {
    let (nu, kappa) = (0.125, 2.0);
    let m = example1(nu, kappa, 2);
    for &(s0, s1, w) in &[(0.0, 0.0, 0.4), (0.3, -0.4, 0.0), (1.0, 2.0, 3.0), (0.1, 0.0, -15.0)] {
        let f = (1.1f64 * 1.1 + w * w).powf(-(kappa + 0.5));
        let delta = f.powf(-1.0 / (2.0 * nu + 1.0));
        let r = f64::sqrt(s0 * s0 + s1 * s1);
        let want = f * 1.3 * matern_m_oracle(nu + 0.5, 0.7 * r * delta);
        let got = m.half_spectrum(&[s0, s1], w).unwrap();
        assert_relative_eq!(got.re, want, max_relative = 1e-9);
        assert_eq!(got.im, 0.0);
    }
    // s = 0: f(ω) φ 2^{ν−1/2} Γ(ν+1/2)
    let at0 = m.half_spectrum(&[0.0, 0.0], 2.0).unwrap().re;
    let want = m.f(2.0) * 1.3 * 2f64.powf(nu - 0.5) * gamma_fn(nu + 0.5);
    assert_relative_eq!(at0, want, max_relative = 1e-10);
}

#[test]
fn class1_delta_is_even_and_unbounded() {
    for m in [example1(0.4, 0.5, 2), example1(0.125, 2.0, 2)] {
        let mut prev = 0.0;
        for j in 1..=6 {
            let w = 10f64.powi(j);
            let d = m.delta(w).unwrap();
            assert_eq!(d, m.delta(-w).unwrap());
            assert!(d > prev && d > 0.0);
            prev = d;
        }
        assert!(prev > 1e3);
    }
}

#[test]
fn ar2_spectrum_and_margin() {
    use Param::*;
    let (b1, b2) = (0.8, 2.5);
    let m = make_ar2_in_time(&pv(&[(PhiVar, 1.0), (Alpha, 1.0), (Beta1, b1), (Beta2, b2), (Nu, 1.0)]), 2).unwrap();
    assert_relative_eq!(m.f(0.0), b1 / (PI * b2), max_relative = 1e-14);
    let w: f64 = 1e4;
    assert_relative_eq!(w.powi(4) * m.f(w), b1 * b2 / PI, max_relative = 1e-6);
    // unit mass: ∫ f = 1 via ω = tan(u)
    let mass = simpson(|u| if u.abs() >= FRAC_PI_2 { 0.0 } else { m.f(u.tan()) / u.cos().powi(2) }, -FRAC_PI_2, FRAC_PI_2, 200_000);
    assert_relative_eq!(mass, 1.0, max_relative = 1e-7);

    let m1 = make_ar2_in_time(&pv(&[(PhiVar, 1.0), (Alpha, 1.0), (Beta1, 1.0), (Beta2, 1.0), (Nu, 1.0)]), 2).unwrap();
    let lag = (0..200).map(|i| i as f64 * 0.05).find(|&t| m1.temporal_cov(t) < 0.0);
    let t_neg = lag.expect("negative temporal covariance for beta1 = beta2 = 1");
    let k = cov_point(&m1, &[0.0, 0.0], t_neg + 0.5, &QuadSpec::default()).unwrap();
    assert!(k.value < 0.0, "K(0, t) = {}", k.value);
}

#[test]
fn example3_distribution_and_interaction() {
    use Param::*;
    let (beta, kappa, nu) = (0.9, 1.4, 0.8);
    let m = make_marginal_matern(&pv(&[(PhiVar, 1.0), (Alpha, 1.0), (Beta, beta), (Kappa, kappa), (Nu, nu)]), 2).unwrap();
    assert_relative_eq!(student_cdf(beta, kappa, 0.0).unwrap(), 0.5, epsilon = 1e-15);
    for &w in &[0.2, 0.9, 2.0, 30.0] {
        let want = 0.5 + simpson(|u| m.f(u), 0.0, w, 20_000);
        assert_relative_eq!(student_cdf(beta, kappa, w).unwrap(), want, max_relative = 1e-9);
        assert_relative_eq!(student_cdf(beta, kappa, -w).unwrap(), 1.0 - want, max_relative = 1e-8);
    }
    let grid: Vec<f64> = (1..400).map(|i| 0.05 * i as f64).collect();
    let d: Vec<f64> = grid.iter().map(|&w| m.delta(w).unwrap()).collect();
    assert!(d.windows(2).all(|p| p[1] >= p[0]));
    assert!(m.delta(1e8).unwrap() > 10.0 * d[d.len() - 1]);
    for &w in &grid[..20] {
        assert_eq!(m.delta(w).unwrap(), m.delta(-w).unwrap());
    }
}

#[test]
fn f_g_matches_cosine_transform() {
    for &(beta, phi) in &[(1.0, 1.0), (0.3, 2.0), (4.0, 0.5)] {
        for &x in &[0.01, 0.3, 1.0, 2.0, 10.0] {
            let w = x * beta;
            let got = f_g_eval(beta, phi, w).unwrap();
            assert_relative_eq!(got, f_g_oracle(beta, phi, w), max_relative = 1e-7);
            assert_eq!(got, f_g_eval(beta, phi, -w).unwrap());
            assert!(got > 0.0);
        }
    }
    assert!(f_g_eval(1.0, 1.0, 0.0).is_err());
    let (beta, phi) = (0.7, 1.5);
    let w = 1e4 * beta;
    assert_relative_eq!(w * w * f_g_eval(beta, phi, w).unwrap() / (phi * beta), 2.0, max_relative = 1e-2);
}

#[test]
fn k_fg_uses_normalized_f_g() {
    use Param::*;
    let m = make_k_fg(&pv(&[(PhiVar, 1.0), (Alpha, 1.0), (Beta, 0.6), (Nu, 0.5)]), 2).unwrap();
    for &w in &[0.1, 1.0, 8.0] {
        assert_relative_eq!(m.f(w), f_g_eval(0.6, 1.0, w).unwrap() / (2.0 * PI), max_relative = 1e-12);
    }
    assert!(m.delta(1e6).unwrap() > m.delta(1e3).unwrap());
}

#[test]
fn separable_families() {
    use Param::*;
    let p = pv(&[(PhiVar, 2.0), (Alpha, 0.8), (Beta, 0.5)]);
    let ch = make_cressie_huang(&p, 2).unwrap();
    assert_relative_eq!(ch.f(0.0) * 2.0, 2.0 / (0.5 * 0.5), max_relative = 1e-14);
    assert_relative_eq!(
        ch.half_spectrum(&[0.5, 0.0], 1.5).unwrap().re,
        2.0 / (0.25 + 2.25) * (-0.64f64 * 0.25).exp(),
        max_relative = 1e-14
    );

    let gs = make_gneiting_separable_half(&p, 2).unwrap();
    for &t in &[0.0, 0.5, 3.0, 40.0] {
        assert_relative_eq!(gs.temporal_cov(t), 1.0 / (0.5 * t + 1.0), max_relative = 1e-14);
    }

    let se = make_separable_exponential(&p, 2).unwrap();
    let q = QuadSpec::default();
    let k = |s: &[f64], t: f64| cov_point(&se, s, t, &q).unwrap().value;
    let k00 = k(&[0.0, 0.0], 0.0);
    assert_relative_eq!(k00, 2.0, max_relative = 5e-8);
    for &(s, t) in &[(0.3, 0.5), (1.0, 2.0), (2.5, 0.1)] {
        let lhs = k(&[s, 0.0], t) * k00;
        let rhs = k(&[s, 0.0], 0.0) * k(&[0.0, 0.0], t);
        assert!((lhs - rhs).abs() < 1e-8, "s={s} t={t}: {lhs} vs {rhs}");
        assert_relative_eq!(k(&[s, 0.0], t), 2.0 * (-0.8 * s - 0.5 * t).exp(), max_relative = 5e-8);
    }
}

#[test]
fn gneiting_g_properties() {
    use Param::*;
    let p = pv(&[(PhiVar, 1.5), (Alpha, 0.4), (Beta, 0.7), (Kappa, 1.0), (Gamma, 0.5), (Eta2, 0.2)]);
    assert_relative_eq!(gneiting_g_cov(&p, &[0.0, 0.0], 0.0).unwrap(), 1.7, max_relative = 1e-15);
    let g = GneitingG::from_params(&p).unwrap();
    for &t in &[0.5, 2.0] {
        let g0 = g.cov(1e-12, t);
        let mut prev = f64::INFINITY;
        for i in 1..30 {
            let r = g.cov(0.2 * i as f64, t) / g0;
            assert!(r < prev && r < 1.0);
            prev = r;
        }
    }
    let sep = GneitingG::from_params(&p.clone().with(Gamma, 0.0).with(Eta2, 0.0)).unwrap();
    for &(s, t) in &[(0.5, 1.0), (2.0, 0.3)] {
        assert_relative_eq!(sep.cov(s, t) * sep.cov(0.0, 0.0), sep.cov(s, 0.0) * sep.cov(0.0, t), max_relative = 1e-14);
    }
    assert!(GneitingG::from_params(&p.clone().with(Gamma, 1.5)).is_err());
    assert!(GneitingG::from_params(&p.with(Kappa, 2.5)).is_err());
}

#[test]
fn half_spectrum_is_hermitian_in_frequency() {
    use Param::*;
    let p = pv(&[(PhiVar, 1.0), (Alpha, 0.9), (Beta, 1.2), (Kappa, 0.7), (Nu, 0.6), (Eta2, 0.3), (Rho, 1.7)]);
    let models = [
        make_matern_in_time(&p, 2).unwrap(),
        make_marginal_matern(&p, 2).unwrap(),
        make_k_fg(&p, 2).unwrap(),
        make_separable_exponential(&p, 2).unwrap(),
    ];
    for m in models {
        let m = m.with_phi(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(m.phi.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-12);
        for &(s, w) in &[([0.3, -0.2], 0.7), ([1.0, 0.5], 4.0), ([0.0, 0.0], 2.0)] {
            let a = m.half_spectrum(&s, w).unwrap();
            let b = m.half_spectrum(&s, -w).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-14);
            assert_relative_eq!(a.im, -b.im, max_relative = 1e-14, epsilon = 1e-300);
            assert_eq!(m.theta(-w), -m.theta(w));
        }
        let z = m.half_spectrum(&[0.0, 0.0], 2.0).unwrap();
        assert_eq!(z.im, 0.0);
        assert_relative_eq!(z.re, m.f(2.0) * (m.spatial.at_zero() + 0.3), max_relative = 1e-14);
        let sym = m.clone().with_rho(0.0);
        assert_eq!(sym.half_spectrum(&[0.4, 0.9], 1.3).unwrap().im, 0.0);
    }
}

#[test]
fn full_spectrum_integrates_to_variance() {
    // (2π)^{−2} ∫∫ g dλ dω = K(0, 0) for d = 1, via λ = c tan u and ω = tan v.
    for m in [example1(0.4, 0.5, 1), example1(0.9, 1.5, 1)] {
        let inner = |w: f64| {
            let c = 0.7 * m.delta(w).unwrap();
            simpson(
                |u| {
                    if u.abs() >= FRAC_PI_2 {
                        0.0
                    } else {
                        m.full_spectrum(&[c * u.tan()], w).unwrap() * c / u.cos().powi(2)
                    }
                },
                -FRAC_PI_2,
                FRAC_PI_2,
                2000,
            )
        };
        for &w in &[0.0, 0.8, 6.0] {
            assert_relative_eq!(inner(w) / (2.0 * PI).powi(2), m.f(w) * m.spatial.at_zero(), max_relative = 1e-6);
        }
        let total = simpson(
            |v| if v.abs() >= FRAC_PI_2 { 0.0 } else { inner(v.tan()) / v.cos().powi(2) },
            -FRAC_PI_2,
            FRAC_PI_2,
            4000,
        ) / (2.0 * PI).powi(2);
        assert_relative_eq!(total, m.variance(), max_relative = 1e-3);
    }
}

#[test]
fn example3_full_spectrum_is_gaussian_in_lambda() {
    use Param::*;
    let m = make_marginal_matern(&pv(&[(PhiVar, 1.0), (Alpha, 0.6), (Beta, 1.0), (Kappa, 0.5), (Nu, 0.7)]), 2).unwrap();
    let w = 1.7;
    let d = m.delta(w).unwrap();
    let g0 = m.full_spectrum(&[0.0, 0.0], w).unwrap();
    let g1 = m.full_spectrum(&[1.0, 2.0], w).unwrap();
    assert_relative_eq!(g1 / g0, (-5.0 / (4.0 * 0.36 * d * d)).exp(), max_relative = 1e-12);
}

#[test]
fn model_spec_json_round_trip() {
    use Param::*;
    let spec = ModelSpec {
        family: Family::KfG,
        params: pv(&[(PhiVar, 1.0), (Alpha, 0.02), (Beta, 0.3), (Nu, 0.5), (Eta2, 0.1), (Rho, -2.0)]),
        d: 3,
        phi: Some(vec![0.0, 1.0, 0.0]),
    };
    let text = serde_json::to_string(&spec).unwrap();
    assert!(text.contains("\"family\":\"k_fG\""));
    assert!(text.contains("\"phi_var\":1.0"));
    let back: ModelSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(back, spec);
    let built = back.build().unwrap();
    assert_eq!(built.as_half().unwrap().rho, -2.0);
}

#[test]
fn family_names_parse() {
    for f in Family::ALL {
        assert_eq!(f.name().parse::<Family>().unwrap(), f);
        let spec = ModelSpec::new(f, f.defaults(), 2);
        assert!(spec.build().is_ok(), "{f}");
    }
    assert!("nonsense".parse::<Family>().is_err());
    assert!(make_matern_in_time(&Family::MaternInTime.defaults().with(Param::Alpha, -1.0), 2).is_err());
    assert!(make_matern_in_time(&Family::MaternInTime.defaults().with(Param::Nu, -0.6), 2).is_err());
    assert!(make_matern_in_time(&Family::MaternInTime.defaults().with(Param::Eta2, -0.1), 2).is_err());
}
