mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use common::*;
use halfspec::covops::*;
use halfspec::model::*;
use halfspec::quad::QuadSpec;

fn pv(pairs: &[(Param, f64)]) -> ParamVector {
    pairs.iter().fold(ParamVector::new(), |p, &(k, v)| p.with(k, v))
}

fn zoo() -> Vec<HalfSpectralModel> {
    use Param::*;
    let p = pv(&[(PhiVar, 1.2), (Alpha, 0.8), (Beta, 1.0), (Beta1, 1.0), (Beta2, 1.5), (Kappa, 0.9), (Nu, 0.6), (Eta2, 0.1)]);
    vec![
        make_matern_in_time(&p, 2).unwrap(),
        make_ar2_in_time(&p, 2).unwrap(),
        make_marginal_matern(&p, 2).unwrap(),
        make_k_fg(&p, 2).unwrap(),
        make_separable_exponential(&p, 2).unwrap(),
        make_cressie_huang(&p, 2).unwrap(),
        make_gneiting_separable_half(&p, 2).unwrap(),
    ]
}

#[test]
fn origin_value_is_total_variance() {
    for m in zoo() {
        let k = cov_point(&m, &[0.0, 0.0], 0.0, &QuadSpec::default()).unwrap();
        assert_relative_eq!(k.value, m.variance(), max_relative = 1e-7);
        assert!(k.imag_residue.abs() < 1e-10);
    }
}

#[test]
fn fft_separable_exponential_margin() {
    use Param::*;
    let m = make_separable_exponential(&pv(&[(PhiVar, 1.7), (Alpha, 1.0), (Beta, 1.0)]), 2).unwrap();
    let g = cov_slice_fft(&m, &[0.0, 0.0], DEFAULT_N_GRID, DEFAULT_OMEGA_MAX).unwrap();
    for (t, v) in g.t_grid.iter().zip(&g.values) {
        if t.abs() <= 20.0 {
            assert!((v - 1.7 * (-t.abs()).exp()).abs() < 1e-5, "t={t}: {v}");
        }
    }
}

#[test]
fn fft_k_fg_margin() {
    use Param::*;
    let m = make_k_fg(&pv(&[(PhiVar, 2.0), (Alpha, 1.0), (Beta, 1.0), (Nu, 0.5)]), 2).unwrap();
    let g = cov_slice_fft(&m, &[0.0, 0.0], DEFAULT_N_GRID, DEFAULT_OMEGA_MAX).unwrap();
    let c0 = m.spatial.at_zero();
    for (t, v) in g.t_grid.iter().zip(&g.values) {
        if t.abs() <= 50.0 {
            let want = c0 / (t.abs() + 1.0);
            assert_relative_eq!(*v, want, max_relative = 1e-3);
        }
    }
}

#[test]
fn fft_agrees_with_quadrature() {
    let models = zoo();
    let mut rng = Mix(7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m = &models[(rng.next_u64() % models.len() as u64) as usize];
        let s = [rng.range(-1.5, 1.5), rng.range(-1.5, 1.5)];
        let g = cov_slice_fft(m, &s, DEFAULT_N_GRID, DEFAULT_OMEGA_MAX).unwrap();
        let dt = g.t_grid[1] - g.t_grid[0];
        let t = (rng.range(-4.0, 4.0) / dt).round() * dt;
        let fft = g.at(t);
        let quad = cov_point(m, &s, t, &QuadSpec::default()).unwrap().value;
        worst = worst.max((fft - quad).abs() / m.variance());
    }
    assert!(worst < 1e-4, "worst relative difference {worst}");
}

#[test]
fn symmetry_of_grids() {
    use Param::*;
    let base = pv(&[(PhiVar, 1.0), (Alpha, 0.9), (Beta, 1.0), (Kappa, 0.7), (Nu, 0.3)]);
    let m = make_matern_in_time(&base, 2).unwrap();
    let g = cov_slice_fft(&m, &[0.4, 0.3], 1 << 14, 256.0).unwrap();
    for t in [0.1, 0.5, 2.0] {
        assert!((g.at(t) - g.at(-t)).abs() < 1e-12);
    }
    let m = make_matern_in_time(&base.with(Rho, 0.8), 2).unwrap();
    let a = cov_slice_fft(&m, &[0.4, 0.3], 1 << 14, 256.0).unwrap();
    let b = cov_slice_fft(&m, &[-0.4, -0.3], 1 << 14, 256.0).unwrap();
    let mut asym: f64 = 0.0;
    for t in [0.1, 0.5, 2.0] {
        assert!((a.at(t) - b.at(-t)).abs() < 1e-10);
        asym = asym.max((a.at(t) - a.at(-t)).abs());
    }
    assert!(asym > 1e-3, "phase should break K(s,t) = K(s,-t)");
    assert!(a.values.iter().all(|v| v.abs() <= m.variance() * (1.0 + 1e-9)));
}

#[test]
fn aliasing_sum() {
    use Param::*;
    let m = make_matern_in_time(&pv(&[(PhiVar, 1.0), (Alpha, 1.0), (Beta, 1.0), (Kappa, 0.5), (Nu, 0.4)]), 2).unwrap();
    for &w in &[0.1, 1.0, 3.0] {
        assert_eq!(aliased_half_spectrum(&m, &[0.3, 0.0], w, 0).unwrap(), m.half_spectrum(&[0.3, 0.0], w).unwrap());
        let a0 = aliased_half_spectrum(&m, &[0.0, 0.0], w, 50).unwrap();
        assert_eq!(a0.im, 0.0);
        assert!(a0.re > m.f(w) * m.spatial.at_zero());
        let mut prev = 0.0;
        for k in [1, 5, 50, 200] {
            let v = aliased_half_spectrum(&m, &[0.0, 0.0], w, k).unwrap().re;
            assert!(v >= prev);
            prev = v;
        }
        // Off the origin the spatial factor kills far aliases.
        let s = [0.5, 0.2];
        let a = aliased_half_spectrum(&m, &s, w, 50).unwrap();
        let b = aliased_half_spectrum(&m, &s, w, 200).unwrap();
        assert!((a - b).norm() < 1e-6 * b.norm());
    }
}

#[test]
fn integer_lags_match_quadrature() {
    for m in zoo().into_iter().take(4) {
        let m = m.with_rho(0.6);
        let s = [0.3, -0.5];
        let (pos, neg) = cov_integer_lags(&m, &s, 8, 50).unwrap();
        for tau in 0..8 {
            let want = cov_point(&m, &s, tau as f64, &QuadSpec::default()).unwrap().value;
            assert!((pos[tau] - want).abs() < 2e-4 * m.variance(), "{} tau={tau}: {} vs {want}", m.family, pos[tau]);
            let want = cov_point(&m, &s, -(tau as f64), &QuadSpec::default()).unwrap().value;
            assert!((neg[tau] - want).abs() < 2e-4 * m.variance());
        }
    }
}

#[test]
fn cross_spectral_structure() {
    use Param::*;
    let p = pv(&[(PhiVar, 1.0), (Alpha, 0.8), (Beta, 1.0), (Kappa, 0.5), (Nu, 0.4), (Eta2, 0.3)]);
    let m = make_matern_in_time(&p, 2).unwrap();
    let one = cross_spectral_matrix(&m, &[vec![0.2, 0.1]], 0.7, 50).unwrap();
    assert_eq!(one.s.shape(), (1, 1));
    assert_relative_eq!(one.s[(0, 0)].re, aliased_half_spectrum(&m, &[0.0, 0.0], 0.7, 50).unwrap().re, max_relative = 1e-14);

    let coords = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.75f64.sqrt()]];
    let s = cross_spectral_matrix(&m, &coords, 1.3, 50).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(s.s[(i, j)].im, 0.0);
            assert_eq!(s.s[(i, j)], s.s[(j, i)]);
        }
    }

    // Separable: S = (Σ_j f(ω + 2πj)) (C + η² I).
    let sep = make_separable_exponential(&p, 2).unwrap();
    let w = -2.1;
    let s = cross_spectral_matrix(&sep, &coords, w, 50).unwrap();
    let fa: f64 = (-50..=50).map(|j| sep.f(w + 2.0 * PI * j as f64)).sum();
    let off = (-0.8f64).exp();
    for i in 0..3 {
        assert_relative_eq!(s.s[(i, i)].re, fa * (1.0 + 0.3), max_relative = 1e-10);
        for j in 0..i {
            assert_relative_eq!(s.s[(i, j)].re, fa * off, max_relative = 1e-10);
        }
    }
    // equilateral: eigenvalues fa(1+η²+2e^{-α}) once and fa(1+η²−e^{-α}) twice
    assert_relative_eq!(s.min_eigenvalue(), fa * (1.3 - off), max_relative = 1e-9);
}

#[test]
fn cross_spectral_matrices_are_psd() {
    let mut rng = Mix(11);
    for m in zoo() {
        let m = m.with_rho(0.4);
        for _ in 0..25 {
            let coords: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.range(0.0, 3.0), rng.range(0.0, 3.0)]).collect();
            let w = rng.range(-PI, PI);
            let s = cross_spectral_matrix(&m, &coords, w, 50).unwrap();
            let tr: f64 = (0..5).map(|i| s.s[(i, i)].re).sum();
            assert!(s.min_eigenvalue() >= -1e-10 * tr);
            for i in 0..5 {
                for j in 0..5 {
                    assert_eq!(s.s[(i, j)], s.s[(j, i)].conj());
                }
            }
        }
    }
}

#[test]
fn dimple_in_example1_contours() {
    use Param::*;
    let m = make_matern_in_time(&pv(&[(PhiVar, 1.0), (Alpha, 1.0), (Beta, 1.0), (Kappa, 2.0), (Nu, 0.125)]), 2).unwrap();
    let d: Vec<f64> = (0..31).map(|i| i as f64 * 0.1).collect();
    let pts = cov_contour(&m, &[1.0, 0.0], &d, 3.0, 1 << 14, 256.0).unwrap();
    assert!(dimple_metric(&pts) > 0.0);
    // A separable model has no dimple.
    let sep = make_separable_exponential(&pv(&[(PhiVar, 1.0), (Alpha, 1.0), (Beta, 1.0)]), 2).unwrap();
    let pts = cov_contour(&sep, &[1.0, 0.0], &d, 3.0, 1 << 14, 256.0).unwrap();
    assert!(dimple_metric(&pts) < 0.0);
    let csv: Vec<_> = pts.iter().filter(|p| p.s == 0.0).collect();
    assert!(!csv.is_empty());
}

#[test]
fn grid_csv_layout() {
    let m = zoo().remove(0);
    let g = cov_slice_fft(&m, &[0.0, 0.0], 1024, 64.0).unwrap();
    let csv = g.to_csv();
    assert!(csv.starts_with("t,value\n"));
    assert_eq!(csv.lines().count(), g.t_grid.len() + 1);
    assert_relative_eq!(g.t_grid[1] - g.t_grid[0], PI / 64.0, max_relative = 1e-12);
}
