//! Cross-checks between the Monte Carlo path-functional estimators and
//! their deterministic quadrature counterparts.

use num_complex::Complex64;
use pam_core::hurst::HurstParams;
use pam_core::montecarlo::{
    alpha_offdiag_mean_quadrature, alpha_pair, beta_mean_quadrature, draw_spectral_set,
    scaling_identity_check, FunctionalEstimate, PathEnsemble,
};
use pam_core::quad;
use pam_core::special;
use pam_core::spectral::MollifiedSpectralMeasure;
use pam_core::stats;
use pam_core::streams::StreamFactory;

fn test_params() -> HurstParams {
    HurstParams::from_f64(0.8, &[0.75]).unwrap()
}

/// Independent route to `E[beta]`: integrate over the spectral
/// variables numerically and the time variables in closed form,
///
/// `E[beta] = 2 int dmu0(lambda) dmu(xi) Re[t/z - (1 - e^{-t z})/z^2]`
///
/// with `z = |xi|^2 / 2 + i lambda`. The shipped quadrature runs over
/// the time separation instead, so agreement is a genuine consistency
/// check.
fn beta_mean_spectral_route(t: f64, eps0: f64, eps: f64, h0: f64, h1: f64) -> f64 {
    let c0 = special::fbm_spectral_constant(h0);
    let c1 = special::fbm_spectral_constant(h1);
    // int_0^t (t - v) e^{-v z} dv = t^2 (w - 1 + e^{-w}) / w^2 with
    // w = t z; the closed form cancels catastrophically for small |w|,
    // where the series sum_k (-w)^k / (k + 2)! takes over.
    let time_block = move |lambda: f64, xi: f64| {
        let z = Complex64::new(0.5 * xi * xi, lambda);
        let w = t * z;
        if w.norm() < 0.5 {
            let mut term = Complex64::new(0.5, 0.0);
            let mut sum = term;
            for k in 1..24 {
                term *= -w / (k + 2) as f64;
                sum += term;
                if term.norm() < 1e-18 {
                    break;
                }
            }
            t * t * sum.re
        } else {
            (t / z - (1.0 - (-w).exp()) / (z * z)).re
        }
    };
    let inner = move |lambda: f64| {
        let f = move |xi: f64| c1 * xi.powf(1.0 - 2.0 * h1) * (-eps * xi * xi).exp() * time_block(lambda, xi);
        let head = quad::power_singular(f, 1.0, 1.0 - 2.0 * h1, 1e-9, 1e-12).unwrap();
        let tail = quad::adaptive(f, 1.0, 12.0 / eps.sqrt().min(1.0), 1e-9, 1e-12).unwrap();
        head + tail
    };
    let g = move |lambda: f64| {
        c0 * lambda.powf(1.0 - 2.0 * h0) * (-eps0 * lambda * lambda).exp() * inner(lambda)
    };
    let head = quad::power_singular(g, 1.0, 1.0 - 2.0 * h0, 1e-7, 1e-10).unwrap();
    let tail = quad::adaptive(g, 1.0, 12.0 / eps0.sqrt().min(1.0), 1e-7, 1e-10).unwrap();
    // Factor 8: a 2 from the defining formula, and a 2 for each
    // frequency integral folded onto the positive half-line.
    8.0 * (head + tail)
}

#[test]
fn beta_mean_matches_the_spectral_route() {
    let t = 1.0;
    let spectral = beta_mean_spectral_route(t, 0.5, 0.5, 0.8, 0.75);
    let time_domain = beta_mean_quadrature(t, 0.5, 0.5, &test_params()).unwrap();
    assert!(
        (spectral - time_domain).abs() < 1e-5 * time_domain.abs(),
        "spectral route {spectral} vs time-domain route {time_domain}"
    );
}

#[test]
fn diagonal_sampler_agrees_with_beta_quadrature() {
    let t = 1.0;
    let params = test_params();
    let measure = MollifiedSpectralMeasure::new(params.clone(), 0.5, 0.5).unwrap();
    let expected = beta_mean_quadrature(t, 0.5, 0.5, &params).unwrap();

    let n_paths = 500;
    let k_spectral = 512;
    let paths = PathEnsemble::sample(t, 256, n_paths, 1, 9001).unwrap();
    let factory = StreamFactory::new(9001);
    let per_path: Vec<f64> = stats::par_map(n_paths, |k| {
        let samples = draw_spectral_set(&measure, &factory, k as u32, k_spectral).unwrap();
        alpha_pair(paths.path(k), paths.path(k), &samples)
            .unwrap()
            .mean
    });
    let summary = stats::SampleSummary::from_samples(&per_path);
    let band = 3.0 * summary.std_error;
    assert!(
        (summary.mean - expected).abs() < band,
        "MC {} +- {} vs quadrature {expected}",
        summary.mean,
        summary.std_error
    );
}

#[test]
fn offdiagonal_sampler_agrees_with_alpha_quadrature() {
    let t = 1.0;
    let params = test_params();
    let measure = MollifiedSpectralMeasure::new(params.clone(), 0.5, 0.5).unwrap();
    let expected = alpha_offdiag_mean_quadrature(t, 0.5, 0.5, &params).unwrap();

    let n_pairs = 200;
    let k_spectral = 512;
    let paths = PathEnsemble::sample(t, 256, 2 * n_pairs, 1, 4242).unwrap();
    let factory = StreamFactory::new(4242);
    let per_pair: Vec<f64> = stats::par_map(n_pairs, |k| {
        let samples = draw_spectral_set(&measure, &factory, k as u32, k_spectral).unwrap();
        alpha_pair(paths.path(2 * k), paths.path(2 * k + 1), &samples)
            .unwrap()
            .mean
    });
    let summary = stats::SampleSummary::from_samples(&per_pair);
    let band = 3.0 * summary.std_error;
    assert!(
        (summary.mean - expected).abs() < band,
        "MC {} +- {} vs quadrature {expected}",
        summary.mean,
        summary.std_error
    );
}

#[test]
fn grid_refinement_shifts_the_estimate_within_noise() {
    let t = 1.0;
    let params = test_params();
    let measure = MollifiedSpectralMeasure::new(params, 0.5, 0.5).unwrap();
    let factory = StreamFactory::new(31);
    let n_paths = 200;
    let k_spectral = 256;

    let run = |m: usize| {
        let paths = PathEnsemble::sample(t, m, n_paths, 1, 31).unwrap();
        let per_path: Vec<f64> = stats::par_map(n_paths, |k| {
            let samples = draw_spectral_set(&measure, &factory, k as u32, k_spectral).unwrap();
            alpha_pair(paths.path(k), paths.path(k), &samples)
                .unwrap()
                .mean
        });
        stats::SampleSummary::from_samples(&per_path)
    };
    let coarse = run(64);
    let fine = run(128);
    let band = 3.0 * (coarse.std_error.powi(2) + fine.std_error.powi(2)).sqrt();
    assert!(
        (coarse.mean - fine.mean).abs() < band,
        "m=64 gives {} +- {}, m=128 gives {} +- {}",
        coarse.mean,
        coarse.std_error,
        fine.mean,
        fine.std_error
    );
}

#[test]
fn heavy_tail_flag_tracks_the_q95_to_mean_ratio() {
    // Near-cancelling oscillation: the bulk magnitude is 1 while the
    // mean is 0.001, so relative accuracy of the mean is hopeless.
    let mut values = Vec::new();
    values.extend(std::iter::repeat(1.0).take(50));
    values.extend(std::iter::repeat(-1.0).take(49));
    values.push(-0.9);
    let cancelling = FunctionalEstimate::from_values(&values).unwrap();
    assert!(cancelling.heavy_tailed());

    let flat = FunctionalEstimate::from_values(&[1.0, 1.1, 0.9, 1.05]).unwrap();
    assert!(!flat.heavy_tailed());
}

#[test]
fn rescaled_horizon_identity_holds_in_the_critical_regime() {
    let params = HurstParams::from_fractions((4, 5), &[(1, 2), (1, 2)]).unwrap();
    let report = scaling_identity_check(1.0, 4.0, &params, 1e-3).unwrap();
    assert!(
        report.passed,
        "lhs {} rhs {} rel {}",
        report.lhs, report.rhs, report.rel_discrepancy
    );
    assert!(report.rel_discrepancy < 1e-3);
}

#[test]
fn rescaled_horizon_identity_ignores_spatial_hurst_order() {
    let a = HurstParams::from_fractions((4, 5), &[(3, 10), (7, 10)]).unwrap();
    let b = HurstParams::from_fractions((4, 5), &[(7, 10), (3, 10)]).unwrap();
    let ra = scaling_identity_check(1.0, 4.0, &a, 1e-3).unwrap();
    let rb = scaling_identity_check(1.0, 4.0, &b, 1e-3).unwrap();
    assert!(ra.passed && rb.passed);
    assert!((ra.rel_discrepancy - rb.rel_discrepancy).abs() < 1e-12);
}
