//! Cross-checks of the renormalization constants against independent
//! routes: the exact time-domain identity linking them to the mean
//! self-interaction functional, a measure-matched importance-sampling
//! estimate of the base spectral integral, and the scale-invariant
//! shell integral that governs the boundary-case increments.

use pam_core::hurst::HurstParams;
use pam_core::montecarlo;
use pam_core::quad;
use pam_core::renorm;
use pam_core::special;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma};

fn below_params() -> HurstParams {
    HurstParams::from_fractions((7, 10), &[(9, 20)]).unwrap()
}

fn boundary_params() -> HurstParams {
    HurstParams::from_fractions((3, 4), &[(1, 2)]).unwrap()
}

/// The subtracted constant, the remainder, and half the mean of the
/// self-interaction functional satisfy `c_n t - r_n(t) = E[beta_n]/2`
/// exactly; all three come from independent quadratures (scaled spectral
/// base integral, time-kernel tail, time-domain double integral).
#[test]
fn level_constants_tie_out_with_the_time_domain_identity() {
    let params = below_params();
    let t = 0.5;
    for n in 1..=3 {
        let c_n = renorm::renorm_constant(n, &params).unwrap();
        let r_n = renorm::r_n_t(n, t, &params).unwrap();
        let eps_time = (-4.0 * n as f64).exp2();
        let eps_space = (-2.0 * n as f64).exp2();
        let half_beta =
            0.5 * montecarlo::beta_mean_quadrature(t, eps_time, eps_space, &params).unwrap();
        let rel = (c_n * t - r_n - half_beta).abs() / half_beta;
        assert!(
            rel <= 1e-4,
            "level {n}: c_n t = {}, r_n = {}, half mean = {half_beta}, rel {rel:.3e}",
            c_n * t,
            r_n
        );
    }
}

/// Importance sampling matched to the spectral density: `lambda^2` and
/// `xi^2` are Gamma(1 - h) draws, making the proposal proportional to
/// `|lambda|^{1-2h0} |xi|^{1-2h1} e^{-lambda^2-xi^2}` with normalization
/// `Gamma(1-h0) Gamma(1-h1)` over the full plane. The heat factor
/// `Re[1/(xi^2/2 + i lambda)]` has infinite variance under this proposal
/// because of the spectral corner, so the ball `|z| <= 1` around it is
/// evaluated by quadrature and only the exterior is sampled.
#[test]
fn base_integral_agrees_with_importance_sampling() {
    let params = below_params();
    let h0 = 0.7;
    let h1 = 0.45;
    let j_quad = renorm::j_integral(&params).unwrap();

    let z0 = 1.0;
    let ball = {
        let inner = |xi: f64| {
            let a = 0.5 * xi * xi;
            let width = (z0 * z0 - a * a).sqrt();
            quad::power_singular(
                |l: f64| l.powf(1.0 - 2.0 * h0) * (-l * l).exp() * a / (a * a + l * l),
                width,
                1.0 - 2.0 * h0,
                1e-9,
                1e-13,
            )
            .unwrap()
        };
        let f = |xi: f64| xi.powf(1.0 - 2.0 * h1) * (-xi * xi).exp() * inner(xi);
        quad::power_singular(&f, (2.0 * z0).sqrt(), 3.0 - 4.0 * h0 - 2.0 * h1, 1e-8, 1e-12)
            .unwrap()
    };

    let samples = 6_000_000_usize;
    let mut rng = ChaCha12Rng::seed_from_u64(193);
    let time_sq = Gamma::new(1.0 - h0, 1.0).unwrap();
    let space_sq = Gamma::new(1.0 - h1, 1.0).unwrap();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let lambda_sq: f64 = time_sq.sample(&mut rng);
        let xi_sq: f64 = space_sq.sample(&mut rng);
        let a = 0.5 * xi_sq;
        let value = if a * a + lambda_sq > z0 * z0 {
            a / (a * a + lambda_sq)
        } else {
            0.0
        };
        sum += value;
        sum_sq += value * value;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    let mass = special::gamma(1.0 - h0) * special::gamma(1.0 - h1);
    let j_is = mass * mean + 4.0 * ball;
    let se = mass * (var / samples as f64).sqrt();

    // The sample size must make the Monte Carlo noise small against the
    // 1e-3 agreement target, otherwise the comparison is vacuous.
    assert!(3.0 * se < 1e-3 * j_quad, "se {se:.3e} too large for {j_quad}");
    let rel = (j_is - j_quad).abs() / j_quad;
    assert!(
        rel <= 1e-3,
        "importance sampling {j_is} vs quadrature {j_quad}, rel {rel:.3e}"
    );
}

/// On the window boundary the constants' increments converge to the
/// integral of the spectral density times the heat factor over the
/// scale-invariant shell `1/4 <= |lambda| + |xi|^2 < 1`; invariance
/// holds because `2 h0 + H = d + 1` makes the integrand degree zero
/// under the parabolic scaling. The shell integral below is specialized
/// to `h0 = 3/4`, where `lambda = w^2` removes the endpoint power
/// exactly.
#[test]
fn boundary_increments_match_the_invariant_shell_integral() {
    let h1 = 0.5;
    let inner = |xi: f64, lo: f64, hi: f64| {
        let a = 0.5 * xi * xi;
        2.0 * quad::adaptive(
            |w: f64| a / (a * a + w * w * w * w),
            lo.sqrt(),
            hi.sqrt(),
            1e-9,
            1e-13,
        )
        .unwrap()
    };
    // xi in [0, 1/2): lambda runs from 1/4 - xi^2 to 1 - xi^2.
    let piece1 = quad::power_singular(
        |d: f64| {
            let xi = 0.5 - d;
            xi.powf(1.0 - 2.0 * h1) * inner(xi, d - d * d, 1.0 - xi * xi)
        },
        0.5,
        0.0,
        1e-8,
        1e-12,
    )
    .unwrap();
    // xi in [1/2, 1): lambda runs from 0 to 1 - xi^2.
    let piece2 = quad::power_singular(
        |d: f64| {
            let xi = 1.0 - d;
            xi.powf(1.0 - 2.0 * h1) * inner(xi, 0.0, 1.0 - xi * xi)
        },
        0.5,
        0.0,
        1e-8,
        1e-12,
    )
    .unwrap();
    let density_norm =
        special::fbm_spectral_constant(0.75) * special::fbm_spectral_constant(0.5);
    let shell = density_norm * 4.0 * (piece1 + piece2);

    let params = boundary_params();
    let c: Vec<f64> = (5..=7)
        .map(|n| renorm::renorm_constant(n, &params).unwrap())
        .collect();
    let inc_5 = c[1] - c[0];
    let inc_6 = c[2] - c[1];
    // The Gaussian mollifier profile deviates from 1 by O(delta_n) on
    // the shell, so the increments approach the invariant value at that
    // rate.
    assert!(
        (inc_5 / shell - 1.0).abs() <= 3e-3,
        "increment {inc_5} vs shell {shell}"
    );
    assert!(
        (inc_6 / shell - 1.0).abs() <= 1e-3,
        "increment {inc_6} vs shell {shell}"
    );
}

/// Boundary constants grow at most linearly in the level: increments
/// increase monotonically toward the invariant shell value, so
/// `c_n <= c_1 + (n - 1) * shell-size bound`.
#[test]
fn boundary_constants_grow_at_most_linearly() {
    let params = boundary_params();
    let c: Vec<f64> = (1..=8)
        .map(|n| renorm::renorm_constant(n, &params).unwrap())
        .collect();
    let incs: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    for w in incs.windows(2) {
        assert!(w[1] > w[0] * (1.0 - 1e-9), "increments not monotone: {incs:?}");
    }
    let last = incs[incs.len() - 1];
    for (i, &cn) in c.iter().enumerate() {
        assert!(
            cn <= c[0] + i as f64 * last * 1.005,
            "superlinear growth at level {}: {c:?}",
            i + 1
        );
    }
}

/// The remainder integral increases with the level (the mollifier only
/// removes mass) and converges geometrically: the missing mass lives at
/// separations below the spatial mollification width `4^{-n}`, scaling
/// like `(4^{-n})^{2h0 + H - d}`, a factor `4^{-0.85}` per level here.
#[test]
fn remainder_sequence_converges_in_the_level() {
    let params = below_params();
    let t = 0.5;
    let r: Vec<f64> = (1..=6)
        .map(|n| renorm::r_n_t(n, t, &params).unwrap())
        .collect();
    for w in r.windows(2) {
        assert!(w[1] > w[0], "not increasing: {r:?}");
    }
    let ratio_a = (r[4] - r[3]) / (r[3] - r[2]);
    let ratio_b = (r[5] - r[4]) / (r[4] - r[3]);
    for ratio in [ratio_a, ratio_b] {
        assert!(
            (0.15..0.45).contains(&ratio),
            "increment ratios {ratio_a:.4} {ratio_b:.4} off the predicted 4^-0.85 ~ 0.31"
        );
    }
}

/// Tightening the requested tolerance by three orders must not move the
/// reported value by more than ten times the looser tolerance.
#[test]
fn tolerance_scaling_is_honest() {
    let params = below_params();
    let loose = renorm::j_integral_with_tol(&params, 1e-5).unwrap();
    let tight = renorm::j_integral_with_tol(&params, 1e-8).unwrap();
    assert!((loose - tight).abs() <= 10.0 * 1e-5 * tight.abs());

    let params = boundary_params();
    let loose = renorm::renorm_constant_with_tol(3, &params, 1e-5).unwrap();
    let tight = renorm::renorm_constant_with_tol(3, &params, 1e-8).unwrap();
    assert!((loose - tight).abs() <= 10.0 * 1e-5 * tight.abs());
}

/// The gap `|c_n t - E[beta_n]/2|` stays bounded across levels in both
/// branches: strictly below it converges to the remainder limit, on the
/// boundary it stays bounded even though `c_n` itself diverges.
#[test]
fn gap_stays_bounded_in_both_branches() {
    let t = 0.5;

    let below = renorm::gap_report(t, 5, &below_params()).unwrap();
    assert_eq!(below.rows.len(), 5);
    assert!(!below.growth_flagged, "slope {} mean {}", below.slope, below.mean_gap);
    for row in &below.rows {
        assert!(row.gap.is_finite());
        let r_n = row.r_n.unwrap();
        assert!((row.gap - r_n).abs() <= 1e-6 * r_n.max(1e-12));
    }

    let boundary = renorm::gap_report(t, 7, &boundary_params()).unwrap();
    assert!(
        !boundary.growth_flagged,
        "slope {} mean {}",
        boundary.slope, boundary.mean_gap
    );
    for w in boundary.rows.windows(2) {
        assert!(w[1].c_n > w[0].c_n, "boundary constants should diverge");
    }
    // The gaps converge from below: increments stay positive and shrink
    // by at least a fifth per level.
    let gaps: Vec<f64> = boundary.rows.iter().map(|r| r.gap).collect();
    let incs: Vec<f64> = gaps.windows(2).map(|w| w[1] - w[0]).collect();
    for w in incs.windows(2) {
        assert!(w[0] > 0.0 && w[1] > 0.0, "gaps not increasing toward the limit: {gaps:?}");
        assert!(w[1] < 0.8 * w[0], "gap increments not contracting: {incs:?}");
    }
}

/// Relabeling the spatial coordinates permutes the nesting order of the
/// quadrature but cannot change the base integral.
#[test]
fn base_integral_is_symmetric_under_coordinate_swap() {
    let a = HurstParams::from_fractions((9, 10), &[(11, 20), (9, 20)]).unwrap();
    let b = HurstParams::from_fractions((9, 10), &[(9, 20), (11, 20)]).unwrap();
    let ja = renorm::j_integral_with_tol(&a, 1e-4).unwrap();
    let jb = renorm::j_integral_with_tol(&b, 1e-4).unwrap();
    assert!(ja > 0.0);
    let rel = (ja - jb).abs() / ja;
    assert!(rel <= 1e-3, "{ja} vs {jb}, rel {rel:.3e}");
}
