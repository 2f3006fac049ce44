//! Sampler-versus-quadrature consistency for the mollified spectral
//! measure. The oracle side below integrates the density directly with
//! the quadrature engine, never through the measure's own closed forms.

use pam_core::hurst::HurstParams;
use pam_core::quad;
use pam_core::special;
use pam_core::spectral::MollifiedSpectralMeasure;
use pam_core::stats;
use pam_core::streams::{Domain, StreamFactory};

/// `2 int_0^inf c r^{1-2h} e^{-eps r^2} f(r) dr` for even `f`, by direct
/// quadrature with the endpoint power flattened by substitution.
fn one_dim_integral(c: f64, h: f64, eps: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let g = |r: f64| c * r.powf(1.0 - 2.0 * h) * (-eps * r * r).exp() * f(r);
    let cut = 10.0 / eps.sqrt();
    let head = quad::power_singular(&g, 1.0_f64.min(cut), 1.0 - 2.0 * h, 1e-11, 1e-14).unwrap();
    let rest = if cut > 1.0 {
        quad::adaptive(&g, 1.0, cut, 1e-11, 1e-14).unwrap()
    } else {
        0.0
    };
    2.0 * (head + rest)
}

fn test_measure() -> MollifiedSpectralMeasure {
    let params = HurstParams::from_f64(0.8, &[0.3, 0.7]).unwrap();
    MollifiedSpectralMeasure::new(params, 0.5, 0.8).unwrap()
}

fn draw_samples(m: &MollifiedSpectralMeasure, k: usize) -> Vec<pam_core::spectral::SpectralSample> {
    let factory = StreamFactory::new(2024);
    stats::par_map(k, |i| {
        let mut rng = factory.stream(Domain::Spectral, 0, i as u64);
        m.sample(&mut rng).unwrap()
    })
}

/// Weighted sampler mean of `f` across precomputed samples, with its
/// standard error.
fn weighted_mean(
    samples: &[pam_core::spectral::SpectralSample],
    f: &dyn Fn(f64, &[f64]) -> f64,
) -> stats::SampleSummary {
    let vals: Vec<f64> = samples
        .iter()
        .map(|s| s.weight * f(s.lambda, &s.xi))
        .collect();
    stats::SampleSummary::from_samples(&vals)
}

#[test]
fn mass_closed_form_matches_brute_force_quadrature() {
    let m = test_measure();
    let one = |_: f64| 1.0;
    let oracle = one_dim_integral(m.c0(), 0.8, m.eps_time(), &one)
        * one_dim_integral(m.c_spatial()[0], 0.3, m.eps_space(), &one)
        * one_dim_integral(m.c_spatial()[1], 0.7, m.eps_space(), &one);
    let mass = m.spectral_mass().unwrap();
    assert!(
        (mass - oracle).abs() < 1e-6 * oracle,
        "closed form {mass} vs quadrature {oracle}"
    );
}

#[test]
fn mass_closed_form_matches_quadrature_in_one_dimension() {
    let params = HurstParams::from_f64(0.6, &[0.45]).unwrap();
    let m = MollifiedSpectralMeasure::new(params, 1.3, 0.2).unwrap();
    let one = |_: f64| 1.0;
    let oracle = one_dim_integral(m.c0(), 0.6, m.eps_time(), &one)
        * one_dim_integral(m.c_spatial()[0], 0.45, m.eps_space(), &one);
    let mass = m.spectral_mass().unwrap();
    assert!((mass - oracle).abs() < 1e-6 * oracle);
}

#[test]
fn sampler_matches_quadrature_on_test_functions() {
    let m = test_measure();
    let samples = draw_samples(&m, 100_000);

    // Gaussian, cosine, and box-indicator test functions, all separable,
    // so the oracle integral is a product of one-dimensional ones.
    let gauss = |l: f64, x: &[f64]| (-l * l - x[0] * x[0] - x[1] * x[1]).exp();
    let gauss_oracle = one_dim_integral(m.c0(), 0.8, m.eps_time(), &|r| (-r * r).exp())
        * one_dim_integral(m.c_spatial()[0], 0.3, m.eps_space(), &|r| (-r * r).exp())
        * one_dim_integral(m.c_spatial()[1], 0.7, m.eps_space(), &|r| (-r * r).exp());

    let cosine = |l: f64, x: &[f64]| (0.7 * l).cos() * (0.3 * x[0]).cos() * (0.3 * x[1]).cos();
    let cosine_oracle = one_dim_integral(m.c0(), 0.8, m.eps_time(), &|r| (0.7 * r).cos())
        * one_dim_integral(m.c_spatial()[0], 0.3, m.eps_space(), &|r| (0.3 * r).cos())
        * one_dim_integral(m.c_spatial()[1], 0.7, m.eps_space(), &|r| (0.3 * r).cos());

    let in_box =
        |l: f64, x: &[f64]| if l.abs() <= 1.0 && x[0].abs() <= 2.0 && x[1].abs() <= 2.0 {
            1.0
        } else {
            0.0
        };
    let step = |bound: f64| move |r: f64| if r <= bound { 1.0 } else { 0.0 };
    let box_oracle = one_dim_integral(m.c0(), 0.8, m.eps_time(), &step(1.0))
        * one_dim_integral(m.c_spatial()[0], 0.3, m.eps_space(), &step(2.0))
        * one_dim_integral(m.c_spatial()[1], 0.7, m.eps_space(), &step(2.0));

    for (name, est, oracle) in [
        ("gaussian", weighted_mean(&samples, &gauss), gauss_oracle),
        ("cosine", weighted_mean(&samples, &cosine), cosine_oracle),
        ("box", weighted_mean(&samples, &in_box), box_oracle),
    ] {
        assert!(
            (est.mean - oracle).abs() <= 3.0 * est.std_error,
            "{name}: sampler {} +- {} vs quadrature {oracle}",
            est.mean,
            est.std_error
        );
    }
}

#[test]
fn sampler_signs_are_symmetric() {
    let m = test_measure();
    let samples = draw_samples(&m, 100_000);
    for pick in 0..3 {
        let vals: Vec<f64> = samples
            .iter()
            .map(|s| if pick == 0 { s.lambda } else { s.xi[pick - 1] })
            .collect();
        let s = stats::SampleSummary::from_samples(&vals);
        assert!(
            s.mean.abs() <= 3.0 * s.std_error,
            "coordinate {pick} mean {} +- {}",
            s.mean,
            s.std_error
        );
    }
}

#[test]
fn sampler_weight_is_the_mass() {
    let m = test_measure();
    let samples = draw_samples(&m, 10);
    let mass = m.spectral_mass().unwrap();
    assert!(samples.iter().all(|s| s.weight == mass));
}

#[test]
fn common_random_numbers_across_mollification_levels() {
    // The same stream at eps and eps/4 must give exactly scaled draws,
    // which is what lets mollification scans difference out sampling
    // noise.
    let params = HurstParams::from_f64(0.8, &[0.5]).unwrap();
    let coarse = MollifiedSpectralMeasure::new(params.clone(), 0.5, 1.0).unwrap();
    let fine = MollifiedSpectralMeasure::new(params, 0.125, 0.25).unwrap();
    let factory = StreamFactory::new(9);
    for i in 0..50 {
        let a = coarse
            .sample(&mut factory.stream(Domain::Spectral, 0, i))
            .unwrap();
        let b = fine
            .sample(&mut factory.stream(Domain::Spectral, 0, i))
            .unwrap();
        assert_eq!(b.lambda, a.lambda * 2.0);
        assert_eq!(b.xi[0], a.xi[0] * 2.0);
    }
}

#[test]
fn independent_constants_agree_with_sampled_normalization() {
    // Spot check that the measure's constants are the ones the
    // normalization identity demands.
    for &h in &[0.3, 0.5, 0.8] {
        let c = special::fbm_spectral_constant(h);
        let alpha = special::alpha_h(h).unwrap();
        assert!((c * alpha - 1.0).abs() < 1e-9);
    }
}
