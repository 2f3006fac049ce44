//! Cross-module checks of the variational machinery: trial-family
//! bounds against the shooting oracle, certificate horizons against the
//! critical-time formula, and the Feynman-Kac curve against the family
//! bound.

use pam_core::hurst::HurstParams;
use pam_core::regime;
use pam_core::variational::{
    blowup_certificate, fk_asymptotics, gn_kappa_townes, kappa_lower_bound, rayleigh_ratio,
    FkConfig, SearchConfig, SpectralAtom, TrialFamily, TrialFunction,
};
use proptest::prelude::*;

fn white_noise() -> HurstParams {
    HurstParams::from_fractions((1, 1), &[(1, 2), (1, 2)]).unwrap()
}

#[test]
fn gaussian_family_tracks_the_ground_state_constant() {
    let bound = kappa_lower_bound(
        &white_noise(),
        TrialFamily::GaussianProduct,
        &SearchConfig::default(),
    )
    .unwrap();
    assert!(bound.converged);

    // The optimized two-dimensional Gaussian ratio is 1/(2 pi) exactly.
    let analytic = (2.0 * std::f64::consts::PI).powf(-0.25);
    assert!(
        (bound.kappa_lb - analytic).abs() < 1e-6 * analytic,
        "{} vs {analytic}",
        bound.kappa_lb
    );

    let townes = gn_kappa_townes().unwrap();
    let ratio = bound.kappa_lb / townes.kappa;
    assert!(ratio > 0.9 && ratio < 1.0, "ratio {ratio}");
}

#[test]
fn ground_state_mass_sets_the_pair_moment_horizon() {
    let townes = gn_kappa_townes().unwrap();
    let t0 = regime::critical_time(2.0, &white_noise(), townes.kappa).unwrap();
    let by_mass = 0.5 * townes.q_mass;
    assert!((t0 - by_mass).abs() < 1e-12 * by_mass, "{t0} vs {by_mass}");
    assert!((t0 * townes.kappa.powi(4) - 1.0).abs() < 1e-12);
}

#[test]
fn near_optimal_trial_certifies_past_the_ground_state_horizon() {
    let params = white_noise();
    let bound = kappa_lower_bound(
        &params,
        TrialFamily::GaussianProduct,
        &SearchConfig::default(),
    )
    .unwrap();
    let townes = gn_kappa_townes().unwrap();
    let t0 = 0.5 * townes.q_mass;

    let late = blowup_certificate(1.2 * t0, 2.0, &bound.best_trial, &params).unwrap();
    assert!(late.certified, "margin {}", late.margin);

    // Below the optimal horizon no trial can certify, in particular not
    // this one.
    let early = blowup_certificate(0.8 * t0, 2.0, &bound.best_trial, &params).unwrap();
    assert!(!early.certified);
    assert!(early.margin < 0.0);
}

#[test]
fn modulated_family_contains_the_product_family() {
    let params = HurstParams::from_fractions((4, 5), &[(7, 10), (3, 10)]).unwrap();
    let product = kappa_lower_bound(
        &params,
        TrialFamily::GaussianProduct,
        &SearchConfig::default(),
    )
    .unwrap();
    let cfg = SearchConfig {
        sweeps: 12,
        rel_tol: 1e-8,
        initial_width: 1.0,
    };
    let modulated =
        kappa_lower_bound(&params, TrialFamily::TimeModulatedGaussian, &cfg).unwrap();
    assert!(
        modulated.ratio >= product.ratio * (1.0 - 1e-4),
        "{} vs {}",
        modulated.ratio,
        product.ratio
    );
}

#[test]
fn cosine_potential_curve_dominates_the_family_bound() {
    let atoms = vec![
        SpectralAtom {
            lambda: 0.0,
            xi: vec![1.0],
            weight_re: 0.5,
            weight_im: 0.0,
        },
        SpectralAtom {
            lambda: 0.0,
            xi: vec![-1.0],
            weight_re: 0.5,
            weight_im: 0.0,
        },
    ];
    let theta = 0.2;
    let cfg = FkConfig {
        paths: 4000,
        steps_per_unit: 64,
        seed: 11,
        search: SearchConfig::default(),
    };
    let report = fk_asymptotics(&atoms, theta, &[4.0, 8.0, 16.0], &cfg).unwrap();
    assert!(report.search_converged);
    assert!(report.variational_lb > 0.01, "{}", report.variational_lb);
    for point in &report.mc_curve {
        assert!(!point.flagged, "heavy tail at b = {}", point.b);
        assert!(
            point.value >= report.variational_lb - 3.0 * point.std_error,
            "b = {}: {} vs lb {}",
            point.b,
            point.value,
            report.variational_lb
        );
        // The potential is bounded by 1, so the curve cannot exceed theta.
        assert!(point.value <= theta + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trials_stay_normalized_and_ray_invariant(
        w1 in 0.3f64..2.5,
        w2 in 0.3f64..2.5,
        scale in 0.5f64..3.0,
        rate in -1.2f64..1.2,
    ) {
        let params = white_noise();
        let base = TrialFunction::gaussian_product(vec![w1, w2]).unwrap();
        prop_assert!(base.normalization_defect() < 1e-12);
        let scaled = TrialFunction::gaussian_product(vec![w1 * scale, w2 * scale]).unwrap();
        let r1 = rayleigh_ratio(&base, &params).unwrap();
        let r2 = rayleigh_ratio(&scaled, &params).unwrap();
        prop_assert!(r1 > 0.0);
        prop_assert!((r1 - r2).abs() < 1e-8 * r1);

        let modulated = TrialFunction::time_modulated(vec![w1], rate).unwrap();
        prop_assert!(modulated.normalization_defect() < 1e-12);
    }
}
