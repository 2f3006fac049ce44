//! Brownian path ensembles and the spectral path functionals built on
//! them.
//!
//! The central objects are the oscillatory path integrals
//! `osc(B; lambda, xi) = int_0^t e^{i(lambda s + xi . B_s)} ds` and the
//! pair functionals obtained by integrating
//! `Re[osc(B^1) conj(osc(B^2))]` over the mollified spectral measure.
//! Spectral integration is importance sampling from the exactly
//! normalized mollified density; time integration is trapezoidal on the
//! ensemble grid. Deterministic quadrature routes for the first moments
//! `E[beta]` and `E[alpha^{12}]` serve as oracles for the samplers and
//! as the two sides of the time-rescaling identity check.

use num_complex::Complex64;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{PamError, Result};
use crate::hurst::HurstParams;
use crate::quad;
use crate::regime::{self, SkorohodRegime};
use crate::spectral::{MollifiedSpectralMeasure, SpectralSample};
use crate::stats;
use crate::streams::{Domain, StreamFactory};

/// A reproducible family of discretized Brownian paths on `[0, t]`.
/// Path `k` is generated from substream `k`, so ensembles of different
/// counts share their common prefix and growing an ensemble never
/// changes existing paths.
#[derive(Clone, Debug)]
pub struct PathEnsemble {
    horizon: f64,
    steps: usize,
    count: usize,
    dim: usize,
    seed: u64,
    lane: u32,
    positions: Vec<f64>,
}

impl PathEnsemble {
    /// Sample `count` independent `dim`-dimensional Brownian paths with
    /// `m` uniform steps on `[0, t]`.
    pub fn sample(t: f64, m: usize, count: usize, dim: usize, seed: u64) -> Result<Self> {
        Self::sample_in_lane(&StreamFactory::new(seed), 0, t, m, count, dim)
    }

    /// As [`Self::sample`], but placed in a separate stream lane so
    /// several ensembles under one seed stay independent.
    pub fn sample_in_lane(
        factory: &StreamFactory,
        lane: u32,
        t: f64,
        m: usize,
        count: usize,
        dim: usize,
    ) -> Result<Self> {
        if !(t > 0.0) {
            return Err(PamError::invalid(format!("path horizon must be > 0, got {t}")));
        }
        if m < 2 {
            return Err(PamError::invalid("need at least 2 time steps"));
        }
        if count == 0 || dim == 0 {
            return Err(PamError::invalid("need at least one path and one dimension"));
        }
        let stride = (m + 1) * dim;
        let scale = (t / m as f64).sqrt();
        let positions = stats::par_map(count, |k| {
            let mut rng = factory.stream(Domain::Paths, lane, k as u64);
            let mut path = vec![0.0_f64; stride];
            for s in 1..=m {
                for c in 0..dim {
                    let z: f64 = rand::Rng::sample(&mut rng, StandardNormal);
                    path[s * dim + c] = path[(s - 1) * dim + c] + scale * z;
                }
            }
            path
        })
        .into_iter()
        .flatten()
        .collect();
        Ok(PathEnsemble {
            horizon: t,
            steps: m,
            count,
            dim,
            seed: factory.seed(),
            lane,
            positions,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn lane(&self) -> u32 {
        self.lane
    }

    pub fn path(&self, k: usize) -> PathView<'_> {
        assert!(k < self.count, "path index {k} out of range");
        let stride = (self.steps + 1) * self.dim;
        PathView {
            horizon: self.horizon,
            steps: self.steps,
            dim: self.dim,
            positions: &self.positions[k * stride..(k + 1) * stride],
        }
    }
}

/// Borrowed view of one path of an ensemble.
#[derive(Clone, Copy, Debug)]
pub struct PathView<'a> {
    horizon: f64,
    steps: usize,
    dim: usize,
    positions: &'a [f64],
}

impl<'a> PathView<'a> {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Position vector after `step` steps (`step = 0` is the origin).
    pub fn position(&self, step: usize) -> &'a [f64] {
        &self.positions[step * self.dim..(step + 1) * self.dim]
    }

    fn compatible_with(&self, other: &PathView<'_>) -> bool {
        self.horizon == other.horizon && self.steps == other.steps && self.dim == other.dim
    }
}

/// Trapezoidal discretization of
/// `int_0^t e^{i(lambda s + xi . B_s)} ds` along one path, returned for
/// the phase pair `(+lambda, -lambda)` in one sweep (the antithetic
/// partner used by the pair estimators). The modulus of either result
/// is at most `t`.
pub fn osc_integral_pm(path: PathView<'_>, lambda: f64, xi: &[f64]) -> (Complex64, Complex64) {
    assert_eq!(xi.len(), path.dim(), "frequency dimension mismatch");
    let m = path.steps();
    let dt = path.horizon() / m as f64;
    let mut plus = Complex64::new(0.0, 0.0);
    let mut minus = Complex64::new(0.0, 0.0);
    for s in 0..=m {
        let weight = if s == 0 || s == m { 0.5 * dt } else { dt };
        let pos = path.position(s);
        let mut space = 0.0;
        for c in 0..pos.len() {
            space += xi[c] * pos[c];
        }
        let time = lambda * (s as f64) * dt;
        let (sin_t, cos_t) = time.sin_cos();
        let (sin_s, cos_s) = space.sin_cos();
        // e^{i(time + space)} and e^{i(space - time)} from one pair of
        // evaluations.
        plus += weight * Complex64::new(cos_t * cos_s - sin_t * sin_s, sin_t * cos_s + cos_t * sin_s);
        minus +=
            weight * Complex64::new(cos_t * cos_s + sin_t * sin_s, cos_t * sin_s - sin_t * cos_s);
    }
    (plus, minus)
}

/// Trapezoidal oscillatory time integral along a path.
pub fn osc_integral(path: PathView<'_>, lambda: f64, xi: &[f64]) -> Complex64 {
    osc_integral_pm(path, lambda, xi).0
}

/// Monte Carlo estimate of a spectral path functional, with tail
/// diagnostics.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FunctionalEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// 95th percentile of per-sample absolute values.
    pub q95_abs: f64,
}

impl FunctionalEstimate {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(PamError::invalid(
                "functional estimates need at least 2 samples",
            ));
        }
        let summary = stats::SampleSummary::from_samples(values);
        let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        mags.sort_unstable_by(f64::total_cmp);
        let idx = ((0.95 * mags.len() as f64).ceil() as usize).clamp(1, mags.len()) - 1;
        Ok(FunctionalEstimate {
            mean: summary.mean,
            std_error: summary.std_error,
            samples: values.len(),
            q95_abs: mags[idx],
        })
    }

    /// An estimate whose 95th percentile dwarfs its mean is dominated by
    /// rare spikes; downstream consumers surface this as a warning.
    pub fn heavy_tailed(&self) -> bool {
        self.q95_abs > 50.0 * self.mean.abs()
    }
}

/// Both oscillatory profiles of one path against a spectral sample set:
/// entry `k` holds `osc(B; +lambda_k, xi_k)` and `osc(B; -lambda_k, xi_k)`.
pub fn osc_profiles(path: PathView<'_>, samples: &[SpectralSample]) -> Vec<(Complex64, Complex64)> {
    samples
        .iter()
        .map(|s| osc_integral_pm(path, s.lambda, &s.xi))
        .collect()
}

/// Per-sample contributions to the pair functional from precomputed
/// profiles: `weight * (Re[p1+ conj(p2+)] + Re[p1- conj(p2-)]) / 2`.
pub fn pair_values(
    profiles1: &[(Complex64, Complex64)],
    profiles2: &[(Complex64, Complex64)],
    samples: &[SpectralSample],
) -> Vec<f64> {
    samples
        .iter()
        .zip(profiles1.iter().zip(profiles2))
        .map(|(s, (a, b))| {
            let plus = (a.0 * b.0.conj()).re;
            let minus = (a.1 * b.1.conj()).re;
            s.weight * 0.5 * (plus + minus)
        })
        .collect()
}

/// Importance-sampled estimate of the mollified pair functional
/// `int Re[osc(B^1; lambda, xi) conj(osc(B^2; lambda, xi))] dmu0 dmu`
/// across a shared spectral sample set. With `path2 = path1` the
/// integrand is `|osc|^2` times a positive weight, so every per-sample
/// value is nonnegative and the estimate targets the self-interaction
/// functional `beta`.
pub fn alpha_pair(
    path1: PathView<'_>,
    path2: PathView<'_>,
    samples: &[SpectralSample],
) -> Result<FunctionalEstimate> {
    if !path1.compatible_with(&path2) {
        return Err(PamError::invalid(
            "pair functional needs paths on a common grid",
        ));
    }
    if samples.is_empty() {
        return Err(PamError::invalid("pair functional needs spectral samples"));
    }
    let profiles1 = osc_profiles(path1, samples);
    let profiles2 = osc_profiles(path2, samples);
    let values = pair_values(&profiles1, &profiles2, samples);
    FunctionalEstimate::from_values(&values)
}

/// Draw a shared spectral sample set of size `k` for pair estimators.
pub fn draw_spectral_set(
    measure: &MollifiedSpectralMeasure,
    factory: &StreamFactory,
    lane: u32,
    k: usize,
) -> Result<Vec<SpectralSample>> {
    if k == 0 {
        return Err(PamError::invalid("need at least one spectral sample"));
    }
    measure.spectral_mass()?;
    let draws = stats::par_map(k, |i| {
        let mut rng = factory.stream(Domain::Spectral, lane, i as u64);
        measure.sample(&mut rng).expect("mass validated above")
    });
    Ok(draws)
}

/// Exponent of the integrand of the first-moment time integrals at zero
/// separation; must exceed -1 for the unmollified integral to exist.
fn zero_separation_exponent(measure: &MollifiedSpectralMeasure) -> f64 {
    let params = measure.params();
    let mut e = 0.0;
    if !measure.time_independent() && measure.eps_time() == 0.0 {
        e += 2.0 * params.h0_f64() - 2.0;
    }
    if measure.eps_space() == 0.0 {
        let h: f64 = params.spatial_f64().iter().sum();
        e += h - params.d() as f64;
    }
    e
}

/// Deterministic value of `E[beta_t]`, the mean self-interaction
/// functional:
///
/// `E[beta] = 2 int_0^t (t - v) k0(v) M(v) dv`,
///
/// where `k0` is the time covariance kernel and
/// `M(v) = int e^{-v |xi|^2 / 2} dmu^eps` the spatial mass smoothed by
/// the Brownian transition over time lag `v`. Unmollified parameters are
/// accepted whenever the zero-separation singularity stays integrable.
pub fn beta_mean_quadrature(
    t: f64,
    eps_time: f64,
    eps_space: f64,
    params: &HurstParams,
) -> Result<f64> {
    let measure = MollifiedSpectralMeasure::new(params.clone(), eps_time, eps_space)?;
    beta_mean_quadrature_measure(t, &measure)
}

pub fn beta_mean_quadrature_measure(t: f64, measure: &MollifiedSpectralMeasure) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(PamError::invalid("horizon must be nonnegative"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let exponent = zero_separation_exponent(measure);
    if exponent <= -1.0 {
        return Err(PamError::numerical(format!(
            "non-integrable configuration: zero-separation exponent {exponent} <= -1"
        )));
    }
    let f = |v: f64| {
        let k0 = measure.time_kernel(v).unwrap_or(f64::NAN);
        let m = measure.spatial_mass_smoothed(v).unwrap_or(f64::NAN);
        (t - v) * k0 * m
    };
    let split = t.min(1.0);
    let mut total = quad::power_singular(f, split, exponent, 1e-10, 1e-13)?;
    if t > split {
        total += quad::adaptive(f, split, t, 1e-10, 1e-13)?;
    }
    let value = 2.0 * total;
    if !value.is_finite() {
        return Err(PamError::numerical(
            "first-moment quadrature produced a non-finite value",
        ));
    }
    Ok(value)
}

/// Deterministic value of `E[alpha_t^{12}]` for two independent paths:
///
/// `E[alpha^{12}] = int_{[0,t]^2} k0(s1 - s2) M(s1 + s2) ds1 ds2`,
///
/// the difference from `E[beta]` being that the Gaussian smoothing
/// variance is `s1 + s2` rather than `|s1 - s2|`.
pub fn alpha_offdiag_mean_quadrature(
    t: f64,
    eps_time: f64,
    eps_space: f64,
    params: &HurstParams,
) -> Result<f64> {
    let measure = MollifiedSpectralMeasure::new(params.clone(), eps_time, eps_space)?;
    if !(t > 0.0) {
        return Err(PamError::invalid("horizon must be positive"));
    }
    let diff_exponent = if !measure.time_independent() && measure.eps_time() == 0.0 {
        2.0 * measure.params().h0_f64() - 2.0
    } else {
        0.0
    };
    let sum_exponent = if measure.eps_space() == 0.0 {
        let h: f64 = measure.params().spatial_f64().iter().sum();
        h - measure.params().d() as f64
    } else {
        0.0
    };
    let k_diff = |u: f64| measure.time_kernel(u).unwrap_or(f64::NAN);
    let k_sum = |w: f64| measure.spatial_mass_smoothed(w).unwrap_or(f64::NAN);
    let value = double_time_quadrature(t, &k_diff, diff_exponent, &k_sum, sum_exponent)?;
    if !value.is_finite() {
        return Err(PamError::numerical(
            "first-moment quadrature produced a non-finite value",
        ));
    }
    Ok(value)
}

/// `int_{[0,T]^2} k_diff(|s1 - s2|) k_sum(s1 + s2) ds1 ds2` by nested
/// quadrature. `k_diff` may blow up like `u^{diff_exponent}` at zero
/// separation and `k_sum` like `w^{sum_exponent}` at zero sum; the
/// former must be integrable on its own, the latter only jointly at the
/// corner, where the effective exponent is
/// `1 + diff_exponent + sum_exponent`.
fn double_time_quadrature(
    total_t: f64,
    k_diff: &dyn Fn(f64) -> f64,
    diff_exponent: f64,
    k_sum: &dyn Fn(f64) -> f64,
    sum_exponent: f64,
) -> Result<f64> {
    if diff_exponent <= -1.0 {
        return Err(PamError::numerical(
            "non-integrable configuration in a double time integral",
        ));
    }
    let corner = 1.0 + diff_exponent + sum_exponent;
    if corner <= -1.0 {
        return Err(PamError::numerical(
            "non-integrable corner in a double time integral",
        ));
    }
    // Symmetric under (s1, s2) swap: integrate the lower triangle twice.
    // Inner integral in the separation delta = s1 - s2 in [0, s1].
    let inner = |s1: f64| -> f64 {
        quad::power_singular(
            |delta| k_diff(delta) * k_sum(2.0 * s1 - delta),
            s1,
            diff_exponent,
            1e-9,
            1e-13,
        )
        .unwrap_or(f64::NAN)
    };
    let value = quad::power_singular(inner, total_t, corner, 1e-8, 1e-12)?;
    Ok(2.0 * value)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingIdentityReport {
    pub t: f64,
    pub b: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_discrepancy: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Time-rescaling identity for the unmollified first moment in the
/// critical regime: `E[alpha_t] = b^{-1} t^{2 h0 - 1} E[Z_b]`, where
/// `Z_b` is the same double integral on horizon `b` with the time kernel
/// argument scaled by `1/b`. Both sides are evaluated by independent
/// nested quadrature (they only coincide as integrals when `b = t`).
pub fn scaling_identity_check(
    t: f64,
    b: f64,
    params: &HurstParams,
    tol: f64,
) -> Result<ScalingIdentityReport> {
    if !(t > 0.0 && b > 0.0) {
        return Err(PamError::invalid("horizons must be positive"));
    }
    if !(tol > 0.0) {
        return Err(PamError::invalid("tolerance must be positive"));
    }
    let report = regime::classify(params);
    if report.skorohod != SkorohodRegime::Critical {
        return Err(PamError::invalid(
            "the time-rescaling identity requires the critical regime",
        ));
    }
    let h0 = params.h0_f64();
    let h_sum: f64 = params.spatial_f64().iter().sum();
    let d = params.d() as f64;
    let gamma0 = |u: f64| {
        if h0 == 1.0 {
            1.0
        } else {
            h0 * (2.0 * h0 - 1.0) * u.powf(2.0 * h0 - 2.0)
        }
    };
    let k_gamma: f64 = params
        .spatial_f64()
        .iter()
        .map(|&h| crate::special::fbm_spectral_constant(h) * crate::special::gamma(1.0 - h))
        .product();
    let k_sum = |w: f64| k_gamma * (0.5 * w).powf(h_sum - d);
    let diff_exponent = 2.0 * h0 - 2.0;
    let sum_exponent = h_sum - d;

    let lhs = double_time_quadrature(t, &gamma0, diff_exponent, &k_sum, sum_exponent)?;
    let scaled_gamma0 = |u: f64| gamma0(u / b);
    let z_b = double_time_quadrature(b, &scaled_gamma0, diff_exponent, &k_sum, sum_exponent)?;
    let rhs = t.powf(2.0 * h0 - 1.0) / b * z_b;
    if !(lhs.is_finite() && rhs.is_finite()) {
        return Err(PamError::numerical(
            "scaling identity quadrature produced non-finite values",
        ));
    }
    let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs());
    Ok(ScalingIdentityReport {
        t,
        b,
        lhs,
        rhs,
        rel_discrepancy: rel,
        tol,
        passed: rel < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensembles_are_reproducible() {
        let a = PathEnsemble::sample(1.0, 64, 3, 2, 42).unwrap();
        let b = PathEnsemble::sample(1.0, 64, 3, 2, 42).unwrap();
        assert_eq!(a.positions, b.positions);
        let c = PathEnsemble::sample(1.0, 64, 3, 2, 43).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn ensembles_share_prefixes() {
        let small = PathEnsemble::sample(1.0, 32, 2, 1, 7).unwrap();
        let large = PathEnsemble::sample(1.0, 32, 5, 1, 7).unwrap();
        for k in 0..2 {
            for s in 0..=32 {
                assert_eq!(small.path(k).position(s), large.path(k).position(s));
            }
        }
    }

    #[test]
    fn terminal_variance_is_the_horizon() {
        let t = 0.8;
        let count = 10_000;
        let e = PathEnsemble::sample(t, 16, count, 2, 5).unwrap();
        for c in 0..2 {
            let sq: Vec<f64> = (0..count)
                .map(|k| {
                    let x = e.path(k).position(16)[c];
                    x * x
                })
                .collect();
            let mean = stats::pairwise_sum(&sq) / count as f64;
            let band = 4.0 * t * (2.0 / count as f64).sqrt();
            assert!(
                (mean - t).abs() < band,
                "coordinate {c}: variance {mean} vs {t} (band {band})"
            );
        }
    }

    #[test]
    fn rejects_degenerate_ensembles() {
        assert!(PathEnsemble::sample(0.0, 16, 1, 1, 0).is_err());
        assert!(PathEnsemble::sample(-1.0, 16, 1, 1, 0).is_err());
        assert!(PathEnsemble::sample(1.0, 1, 1, 1, 0).is_err());
        assert!(PathEnsemble::sample(1.0, 16, 0, 1, 0).is_err());
    }

    #[test]
    fn osc_at_zero_frequency_is_the_horizon() {
        let e = PathEnsemble::sample(1.0, 256, 1, 2, 3).unwrap();
        let v = osc_integral(e.path(0), 0.0, &[0.0, 0.0]);
        assert_eq!(v.re, 1.0);
        assert_eq!(v.im, 0.0);
        let e = PathEnsemble::sample(0.7, 100, 1, 1, 3).unwrap();
        let v = osc_integral(e.path(0), 0.0, &[0.0]);
        assert!((v.re - 0.7).abs() < 1e-14 && v.im.abs() < 1e-16);
    }

    #[test]
    fn osc_pure_time_phase_matches_closed_form() {
        let t = 1.0;
        let lambda = 3.0;
        let e = PathEnsemble::sample(t, 256, 1, 1, 3).unwrap();
        let got = osc_integral(e.path(0), lambda, &[0.0]);
        let i = Complex64::new(0.0, 1.0);
        let exact = ((i * lambda * t).exp() - 1.0) / (i * lambda);
        assert!(
            (got - exact).norm() < 1e-4 * exact.norm(),
            "{got} vs {exact}"
        );
    }

    #[test]
    fn osc_modulus_bounded_by_horizon() {
        let t = 1.3;
        let e = PathEnsemble::sample(t, 64, 4, 2, 11).unwrap();
        let factory = StreamFactory::new(12);
        let mut rng = factory.stream(Domain::Spectral, 9, 0);
        for i in 0..100 {
            let lambda: f64 = rand::Rng::random_range(&mut rng, -20.0..20.0);
            let xi = [
                rand::Rng::random_range(&mut rng, -20.0..20.0),
                rand::Rng::random_range(&mut rng, -20.0..20.0),
            ];
            let (plus, minus) = osc_integral_pm(e.path(i % 4), lambda, &xi);
            assert!(plus.norm() <= t * (1.0 + 1e-12));
            assert!(minus.norm() <= t * (1.0 + 1e-12));
        }
    }

    #[test]
    fn antithetic_partner_is_the_lambda_flip() {
        let e = PathEnsemble::sample(1.0, 64, 1, 1, 11).unwrap();
        let (_plus, minus) = osc_integral_pm(e.path(0), 1.7, &[0.4]);
        let direct = osc_integral(e.path(0), -1.7, &[0.4]);
        assert!((minus - direct).norm() < 1e-14);
    }

    #[test]
    fn diagonal_pair_values_are_nonnegative() {
        let params = HurstParams::from_f64(0.8, &[0.75]).unwrap();
        let measure = MollifiedSpectralMeasure::new(params, 0.5, 0.5).unwrap();
        let factory = StreamFactory::new(21);
        let samples = draw_spectral_set(&measure, &factory, 0, 64).unwrap();
        let e = PathEnsemble::sample(1.0, 64, 1, 1, 22).unwrap();
        let profiles = osc_profiles(e.path(0), &samples);
        let values = pair_values(&profiles, &profiles, &samples);
        assert!(values.iter().all(|&v| v >= 0.0));
        let est = alpha_pair(e.path(0), e.path(0), &samples).unwrap();
        assert!(est.mean > 0.0);
    }

    #[test]
    fn extreme_mollification_kills_the_estimate() {
        let params = HurstParams::from_f64(0.8, &[0.75]).unwrap();
        let measure = MollifiedSpectralMeasure::new(params, 1e8, 1e8).unwrap();
        let factory = StreamFactory::new(21);
        let samples = draw_spectral_set(&measure, &factory, 0, 32).unwrap();
        let e = PathEnsemble::sample(1.0, 32, 2, 1, 22).unwrap();
        let est = alpha_pair(e.path(0), e.path(1), &samples).unwrap();
        assert!(est.mean.abs() < 1e-3);
    }

    #[test]
    fn pair_estimator_rejects_mismatched_grids() {
        let params = HurstParams::from_f64(0.8, &[0.75]).unwrap();
        let measure = MollifiedSpectralMeasure::new(params, 0.5, 0.5).unwrap();
        let factory = StreamFactory::new(21);
        let samples = draw_spectral_set(&measure, &factory, 0, 8).unwrap();
        let a = PathEnsemble::sample(1.0, 32, 1, 1, 22).unwrap();
        let b = PathEnsemble::sample(0.5, 32, 1, 1, 22).unwrap();
        assert!(alpha_pair(a.path(0), b.path(0), &samples).is_err());
    }

    #[test]
    fn beta_mean_is_positive_and_monotone_in_mollification() {
        let params = HurstParams::from_f64(0.8, &[0.75]).unwrap();
        let base = beta_mean_quadrature(1.0, 0.5, 0.5, &params).unwrap();
        assert!(base > 0.0);
        let wider_time = beta_mean_quadrature(1.0, 1.0, 0.5, &params).unwrap();
        let wider_space = beta_mean_quadrature(1.0, 0.5, 1.0, &params).unwrap();
        assert!(wider_time < base);
        assert!(wider_space < base);
        // Loosening the mollifier toward zero can only grow the value.
        let tighter = beta_mean_quadrature(1.0, 0.25, 0.25, &params).unwrap();
        assert!(tighter > base);
    }

    #[test]
    fn beta_mean_accepts_integrable_unmollified_case() {
        // h0 = 0.8, H = 0.75, d = 1: exponent 2*0.8 - 2 + 0.75 - 1 = 0.35.
        let params = HurstParams::from_f64(0.8, &[0.75]).unwrap();
        let v = beta_mean_quadrature(1.0, 0.0, 0.0, &params).unwrap();
        assert!(v > 0.0);
        // Rough space pushes the exponent below -1: 1.6 - 2 + 0.3 - 1 = -1.1.
        let rough = HurstParams::from_f64(0.8, &[0.3]).unwrap();
        let err = beta_mean_quadrature(1.0, 0.0, 0.0, &rough);
        assert!(matches!(err, Err(PamError::Numerical(_))));
    }

    #[test]
    fn beta_mean_at_zero_horizon_vanishes() {
        let params = HurstParams::from_f64(0.8, &[0.75]).unwrap();
        assert_eq!(beta_mean_quadrature(0.0, 0.5, 0.5, &params).unwrap(), 0.0);
    }

    #[test]
    fn scaling_identity_is_exact_at_equal_horizons() {
        let params = HurstParams::from_fractions((4, 5), &[(1, 2), (1, 2)]).unwrap();
        let r = scaling_identity_check(1.0, 1.0, &params, 1e-3).unwrap();
        assert!(r.rel_discrepancy < 1e-13, "discrepancy {}", r.rel_discrepancy);
    }

    #[test]
    fn scaling_identity_rejects_noncritical_params() {
        let params = HurstParams::from_f64(0.8, &[0.6]).unwrap();
        assert!(scaling_identity_check(1.0, 4.0, &params, 1e-3).is_err());
    }
}
