//! Distribution checks for the relay model: derivative consistency,
//! normalization, the nested-quadrature CDF and Monte Carlo agreement.

use afrelay::montecarlo::{simulate, simulate_minbound_metric, Metric, SimConfig};
use afrelay::quadrature::{integrate, integrate_to_infinity, QuadratureSpec};
use afrelay::relay::{
    cdf_eq, cdf_eq_quadrature, cdf_minbound, cdf_srd_exact, pdf_eq, pdf_minbound, pdf_srd_exact, series_cdf_coeffs,
    BesselBackend, ChannelParams, SeriesCdfCoeffs,
};
use afrelay::series::series_coeffs;
use afrelay::validation::random_params;
use proptest::prelude::*;

fn unit_params(gamma: f64) -> ChannelParams {
    ChannelParams::new(gamma, 1.0, 1.0, 1.0).unwrap()
}

fn coeffs(p: &ChannelParams, k: usize) -> SeriesCdfCoeffs {
    series_cdf_coeffs(p, &series_coeffs(1.0, k).unwrap()).unwrap()
}

/// Fourth-order central difference.
fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn srd_density_is_derivative_of_cdf() {
    let backend = BesselBackend::default();
    for p in [unit_params(1000.0), ChannelParams::new(50.0, 1.0, 0.4, 2.5).unwrap()] {
        for x in [0.05, 0.3, 1.0, 2.5, 6.0] {
            let fd = derivative(|t| cdf_srd_exact(&p, t, &backend).unwrap(), x, 1e-3 * x);
            let pdf = pdf_srd_exact(&p, x, &backend).unwrap();
            assert!((fd - pdf).abs() < 1e-5 * pdf.max(1.0), "x = {x}: {fd} vs {pdf}");
        }
    }
}

#[test]
fn srd_density_integrates_to_one() {
    let backend = BesselBackend::default();
    let spec = QuadratureSpec::new(1e-12, 1e-9, 4000).unwrap();
    for p in [unit_params(1000.0), ChannelParams::new(10.0, 1.0, 3.0, 0.7).unwrap()] {
        let head = integrate(|x| pdf_srd_exact(&p, x.max(1e-300), &backend).unwrap(), 0.0, 1.0, &spec).unwrap();
        let tail = integrate_to_infinity(|x| pdf_srd_exact(&p, x, &backend).unwrap(), 1.0, &spec).unwrap();
        let total = head.value + tail.value;
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        // Head mass agrees with the CDF.
        assert!((head.value - cdf_srd_exact(&p, 1.0, &backend).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn srd_cdf_with_series_backend_tracks_oracle_at_high_snr() {
    let p = unit_params(1000.0);
    for x in [0.5, 1.0, 2.0] {
        let oracle = cdf_srd_exact(&p, x, &BesselBackend::default()).unwrap();
        let series = cdf_srd_exact(&p, x, &BesselBackend::Series { k: 10 }).unwrap();
        assert!((oracle - series).abs() < 0.05, "x = {x}: {oracle} vs {series}");
    }
}

#[test]
fn srd_cdf_matches_monte_carlo() {
    let p = unit_params(1000.0);
    let cfg = SimConfig::new(7, 10_000_000);
    // Direct link switched off by a huge rate: its draws are ~1e-12.
    let srd_only = ChannelParams::new(1000.0, 1e12, 1.0, 1.0).unwrap();
    let mc = simulate(&srd_only, &cfg, Metric::CdfAt(0.5)).unwrap().estimate().unwrap();
    let exact = cdf_srd_exact(&p, 0.5, &BesselBackend::default()).unwrap();
    assert!((mc.value - exact).abs() < 3e-3, "{} vs {}", mc.value, exact);
}

#[test]
fn srd_density_matches_histogram() {
    let srd_only = ChannelParams::new(1000.0, 1e12, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(11, 10_000_000).histogram(200, 0.0, 10.0);
    let h = simulate(&srd_only, &cfg, Metric::PdfHistogram).unwrap().histogram().unwrap();
    let width = h.width();
    // Bin [0.975, 1.025] centred on 1; compare with the bin-averaged density.
    let spec = QuadratureSpec::default();
    let p = unit_params(1000.0);
    let exact = integrate(|x| pdf_srd_exact(&p, x, &BesselBackend::default()).unwrap(), 0.975, 1.025, &spec)
        .unwrap()
        .value
        / 0.05;
    let empirical = h.counts[(1.0 / width) as usize - 1..=(1.0 / width) as usize]
        .iter()
        .sum::<u64>() as f64
        / (2.0 * width * h.samples() as f64);
    assert!(((empirical - exact) / exact).abs() < 0.02, "{empirical} vs {exact}");
}

#[test]
fn series_cdf_matches_monte_carlo() {
    let p = unit_params(1000.0);
    let c = coeffs(&p, 10);
    let mc = simulate(&p, &SimConfig::new(3, 10_000_000), Metric::CdfAt(1.0))
        .unwrap()
        .estimate()
        .unwrap();
    let analytic = cdf_eq(&c, 1.0).unwrap().value;
    assert!((mc.value - analytic).abs() < 5e-3, "{} vs {}", mc.value, analytic);
}

#[test]
fn series_cdf_is_close_to_exact_at_very_high_snr() {
    let p = unit_params(1e6);
    let c = coeffs(&p, 10);
    let spec = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for j in 1..=20 {
        let x = 0.25 * j as f64;
        let d = (cdf_eq(&c, x).unwrap().value - cdf_eq_quadrature(&p, x, &spec).unwrap()).abs();
        worst = worst.max(d);
    }
    assert!(worst < 1e-3, "sup difference {worst}");
}

#[test]
fn series_density_integrates_to_one() {
    let spec = QuadratureSpec::default();
    for p in random_params(9, 6).unwrap() {
        let c = coeffs(&p, 10);
        let total = integrate_to_infinity(|x| pdf_eq(&c, x).unwrap(), 0.0, &spec).unwrap().value;
        assert!((total - 1.0).abs() < 1e-9, "{p:?}: {total}");
    }
}

#[test]
fn series_density_is_derivative_of_cdf() {
    let p = unit_params(1000.0);
    let c = coeffs(&p, 10);
    for x in [0.1, 0.5, 1.0, 3.0, 7.0] {
        let fd = derivative(|t| cdf_eq(&c, t).unwrap().raw, x, 1e-3);
        assert!((fd - pdf_eq(&c, x).unwrap()).abs() < 1e-6);
    }
}

#[test]
fn cdfs_are_monotone_on_fine_grid() {
    let p = unit_params(1000.0);
    let c = coeffs(&p, 10);
    let backend = BesselBackend::default();
    let (mut prev_eq, mut prev_srd, mut prev_min) = (0.0, 0.0, 0.0);
    for j in 0..=1000 {
        let x = 0.01 * j as f64;
        let eq = cdf_eq(&c, x).unwrap().value;
        let srd = cdf_srd_exact(&p, x, &backend).unwrap();
        let min = cdf_minbound(&p, x).unwrap();
        assert!(eq >= prev_eq - 1e-12 && srd >= prev_srd - 1e-12 && min >= prev_min - 1e-12, "x = {x}");
        for v in [eq, srd, min] {
            assert!((0.0..=1.0).contains(&v));
        }
        (prev_eq, prev_srd, prev_min) = (eq, srd, min);
    }
}

#[test]
fn min_bound_understates_outage() {
    // min(X, Y) ≥ XY/(X + Y + 1/γ), so the min-bound power is stochastically
    // larger and its CDF lies below the exact one.
    let spec = QuadratureSpec::default();
    for p in [unit_params(1000.0), ChannelParams::new(100.0, 0.5, 2.0, 1.0).unwrap()] {
        for j in 1..=16 {
            let x = 0.25 * j as f64;
            let exact = cdf_eq_quadrature(&p, x, &spec).unwrap();
            let bound = cdf_minbound(&p, x).unwrap();
            assert!(bound <= exact + 1e-9, "x = {x}: bound {bound} vs exact {exact}");
        }
    }
}

#[test]
fn min_bound_matches_its_monte_carlo() {
    let p = unit_params(1000.0);
    let cfg = SimConfig::new(5, 10_000_000);
    for x in [0.5, 1.0, 2.0] {
        let mc = simulate_minbound_metric(&p, &cfg, Metric::CdfAt(x)).unwrap().estimate().unwrap();
        assert!((mc.value - cdf_minbound(&p, x).unwrap()).abs() < 3e-3);
    }
    // Erlang branch, λ_sd = λ_sr + λ_rd.
    let p = ChannelParams::new(1000.0, 2.0, 1.0, 1.0).unwrap();
    assert!((pdf_minbound(&p, 0.5).unwrap() - 4.0 * 0.5 * (-1.0f64).exp()).abs() < 1e-14);
}

proptest! {
    #[test]
    fn a_minus_one_is_sum_of_constant_terms(
        lsd in 0.2f64..5.0, lsr in 0.2f64..5.0, lrd in 0.2f64..5.0, gamma_db in 10.0f64..40.0,
    ) {
        let p = ChannelParams::from_db(gamma_db, lsd, lsr, lrd).unwrap();
        let d = p.derived();
        prop_assume!(((d.lambda_srd - lsd) / d.lambda_srd).abs() > 0.05);
        let c = coeffs(&p, 10);
        let constant: f64 = c.b().iter().map(|row| row[0]).sum();
        prop_assert!(((c.a() - 1.0) - constant).abs() <= 1e-9 * c.a().abs().max(1.0));
        // F_eq(0) = 0 follows.
        prop_assert!(cdf_eq(&c, 0.0).unwrap().raw.abs() < 1e-9);
    }

    #[test]
    fn cdf_values_are_probabilities(x in 0.0f64..50.0, gamma_db in 0.0f64..40.0) {
        let p = ChannelParams::from_db(gamma_db, 1.0, 1.0, 1.0).unwrap();
        let c = coeffs(&p, 10);
        let v = cdf_eq(&c, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&v.value));
        let srd = cdf_srd_exact(&p, x, &BesselBackend::Oracle(QuadratureSpec::default())).unwrap();
        prop_assert!((0.0..=1.0).contains(&srd));
    }
}
