//! Trial-function machinery for the interaction energy functional.
//!
//! On the class of time-indexed probability amplitudes (unit spatial
//! `L^2` mass for every `s` in `[0, 1]`), the noise covariance pairs a
//! quartic interaction energy against the gradient energy; the best
//! constant `kappa` in that inequality controls the critical moment
//! blowup time. This module evaluates both energies in closed form for
//! Gaussian trial families, searches them for lower bounds on `kappa`,
//! certifies moment blowup at a given `(t, p)` through the positivity
//! of the optimized variational margin, and exposes the Feynman-Kac
//! long-time asymptotics that connect path averages to the same
//! variational program. The `kappa` reference value for the spatial
//! white noise in two dimensions comes from the ground state of the
//! cubic field equation, computed by shooting.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{PamError, Result};
use crate::hurst::HurstParams;
use crate::montecarlo::{FunctionalEstimate, PathEnsemble};
use crate::quad;
use crate::regime::{self, SkorohodRegime};
use crate::special;
use crate::spectral;
use crate::stats;

/// A trial amplitude on `[0, 1] x R^d` with unit spatial mass at every
/// time slice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TrialFunction {
    /// `g(x) = prod_j (pi s_j^2)^{-1/4} exp(-x_j^2 / (2 s_j^2))`,
    /// constant in time.
    GaussianProduct { widths: Vec<f64> },
    /// Same product with every width modulated by `exp(rate (s - 1/2))`
    /// over the time interval; spatial mass stays exactly 1 for each s.
    TimeModulatedGaussian { widths: Vec<f64>, rate: f64 },
}

fn check_widths(widths: &[f64]) -> Result<()> {
    if widths.is_empty() {
        return Err(PamError::invalid("trial needs at least one width"));
    }
    for &w in widths {
        if !(w > 0.0 && w.is_finite()) {
            return Err(PamError::invalid(format!(
                "trial widths must be positive and finite, got {w}"
            )));
        }
    }
    Ok(())
}

impl TrialFunction {
    pub fn gaussian_product(widths: Vec<f64>) -> Result<Self> {
        check_widths(&widths)?;
        Ok(TrialFunction::GaussianProduct { widths })
    }

    pub fn time_modulated(widths: Vec<f64>, rate: f64) -> Result<Self> {
        check_widths(&widths)?;
        if !rate.is_finite() {
            return Err(PamError::invalid("modulation rate must be finite"));
        }
        Ok(TrialFunction::TimeModulatedGaussian { widths, rate })
    }

    pub fn dim(&self) -> usize {
        self.widths().len()
    }

    pub fn widths(&self) -> &[f64] {
        match self {
            TrialFunction::GaussianProduct { widths } => widths,
            TrialFunction::TimeModulatedGaussian { widths, .. } => widths,
        }
    }

    fn modulation(&self, s: f64) -> f64 {
        match self {
            TrialFunction::GaussianProduct { .. } => 1.0,
            TrialFunction::TimeModulatedGaussian { rate, .. } => (rate * (s - 0.5)).exp(),
        }
    }

    /// Pointwise value `g(s, x)`.
    pub fn value(&self, s: f64, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "coordinate dimension mismatch");
        let m = self.modulation(s);
        let mut v = 1.0;
        for (j, &w) in self.widths().iter().enumerate() {
            let sigma = w * m;
            v *= (std::f64::consts::PI * sigma * sigma).powf(-0.25)
                * (-x[j] * x[j] / (2.0 * sigma * sigma)).exp();
        }
        v
    }

    /// Worst deviation of the spatial mass from 1 over a spread of time
    /// slices, measured by quadrature. Zero up to quadrature error for
    /// the Gaussian families.
    pub fn normalization_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for &s in &[0.0, 0.27, 0.5, 0.81, 1.0] {
            let m = self.modulation(s);
            let mut mass = 1.0;
            for &w in self.widths() {
                let sigma = w * m;
                let g2 = move |x: f64| {
                    (std::f64::consts::PI * sigma * sigma).powf(-0.5)
                        * (-x * x / (sigma * sigma)).exp()
                };
                let half = quad::adaptive(g2, 0.0, 9.0 * sigma, 1e-13, 1e-16).unwrap_or(f64::NAN);
                mass *= 2.0 * half;
            }
            worst = worst.max((mass - 1.0).abs());
        }
        worst
    }

    /// `int_0^1 int |grad_x g|^2 dx ds`, in closed form: each coordinate
    /// contributes `1 / (2 s_j(s)^2)`, and the time modulation integrates
    /// to `sinh(rate)/rate`.
    pub fn gradient_energy(&self) -> f64 {
        let base: f64 = self.widths().iter().map(|w| 0.5 / (w * w)).sum();
        match self {
            TrialFunction::GaussianProduct { .. } => base,
            TrialFunction::TimeModulatedGaussian { rate, .. } => base * sinhc(*rate),
        }
    }
}

/// `sinh(x)/x` continued through zero.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// Interaction energy `int |F(g^2)(lambda, xi)|^2 mu_0(dlambda) mu(dxi)`
/// of a trial against the noise spectral measure, where `F` is the
/// Fourier transform over `[0, 1] x R^d`.
///
/// For a time-constant trial the time marginal integrates to exactly 1
/// (the squared window transform `2(1 - cos lambda)/lambda^2` against
/// the time spectral density is the unit variance of the corresponding
/// fractional path at time 1), leaving the closed form
/// `prod_j c_j Gamma(1 - h_j) (s_j^2/2)^{h_j - 1}`. Time-modulated
/// trials go through the equivalent time-domain double integral against
/// the covariance `h0 (2 h0 - 1) |s - r|^{2 h0 - 2}`, which requires
/// `h0 > 1/2`.
pub fn interaction_energy(trial: &TrialFunction, params: &HurstParams) -> Result<f64> {
    if trial.dim() != params.d() {
        return Err(PamError::invalid(format!(
            "trial has {} coordinates but the noise has {}",
            trial.dim(),
            params.d()
        )));
    }
    let hs = params.spatial_f64();
    match trial {
        TrialFunction::GaussianProduct { widths } => {
            let mut n = 1.0;
            for (&w, &h) in widths.iter().zip(hs.iter()) {
                n *= special::fbm_spectral_constant(h)
                    * special::gamma(1.0 - h)
                    * (0.5 * w * w).powf(h - 1.0);
            }
            Ok(n)
        }
        TrialFunction::TimeModulatedGaussian { widths, rate } => {
            let h0 = params.h0_f64();
            if h0 <= 0.5 {
                return Err(PamError::invalid(
                    "time-modulated trials need a pointwise time covariance, so h0 > 1/2",
                ));
            }
            let mut front = 1.0;
            let mut h_sum = 0.0;
            for (&w, &h) in widths.iter().zip(hs.iter()) {
                front *= special::fbm_spectral_constant(h)
                    * special::gamma(1.0 - h)
                    * (w * w).powf(h - 1.0);
                h_sum += h;
            }
            let decay = h_sum - params.d() as f64;
            let gamma0 = move |u: f64| spectral::covariance_gamma0(u, params).unwrap_or(f64::NAN);
            let tau = *rate;
            let pair = move |s: f64, r: f64| {
                let ms = (tau * (s - 0.5)).exp();
                let mr = (tau * (r - 0.5)).exp();
                (0.25 * (ms * ms + mr * mr)).powf(decay)
            };
            let inner = move |u: f64| {
                quad::adaptive(|s: f64| pair(s, s - u), u, 1.0, 1e-10, 1e-14)
                    .unwrap_or(f64::NAN)
            };
            let time = 2.0
                * quad::power_singular(
                    |u: f64| gamma0(u) * inner(u),
                    1.0,
                    2.0 * h0 - 2.0,
                    1e-9,
                    1e-13,
                )?;
            let value = front * time;
            if !value.is_finite() {
                return Err(PamError::numerical(
                    "interaction energy quadrature did not converge",
                ));
            }
            Ok(value)
        }
    }
}

/// Ratio of interaction energy to gradient energy; its fourth root is a
/// lower bound for the best interaction constant.
pub fn rayleigh_ratio(trial: &TrialFunction, params: &HurstParams) -> Result<f64> {
    Ok(interaction_energy(trial, params)? / trial.gradient_energy())
}

/// Reference constant for the two-dimensional spatial white noise: the
/// ground state `Q` of `Q'' + Q'/r = Q - Q^3` with `Q'(0) = 0` and decay
/// at infinity, found by bisecting the initial amplitude.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TownesOracle {
    /// `2 pi int_0^inf Q(r)^2 r dr`.
    pub q_mass: f64,
    /// `(2 / q_mass)^{1/4}`.
    pub kappa: f64,
    /// The bisected initial amplitude `Q(0)`.
    pub amplitude: f64,
    /// Sup norm of the field-equation residual on the interior grid,
    /// from high-order finite differences of the stored profile.
    pub ode_residual: f64,
}

const TOWNES_DOMAIN: f64 = 12.0;

/// Integrate the radial profile from amplitude `a`; returns `1` if the
/// solution turns back upward while positive (amplitude too small), `-1`
/// if it crosses zero (too large), `0` if neither happens on the domain.
/// When `store` is given, the profile is recorded as `(Q, Q')` per node.
fn shoot(a: f64, h: f64, store: Option<&mut Vec<(f64, f64)>>) -> i32 {
    // Series start handles the coordinate singularity at r = 0:
    // Q ~ a + (a - a^3) r^2 / 4.
    let c2 = 0.25 * (a - a * a * a);
    let mut r = h;
    let mut q = a + c2 * r * r;
    let mut dq = 2.0 * c2 * r;
    let mut out = store;
    if let Some(v) = out.as_deref_mut() {
        v.clear();
        v.push((a, 0.0));
        v.push((q, dq));
    }
    let rhs = |r: f64, q: f64, dq: f64| (q - q * q * q - dq / r, dq);
    let steps = (TOWNES_DOMAIN / h).round() as usize;
    for _ in 1..steps {
        let (k1d, k1q) = rhs(r, q, dq);
        let (k2d, k2q) = rhs(r + 0.5 * h, q + 0.5 * h * k1q, dq + 0.5 * h * k1d);
        let (k3d, k3q) = rhs(r + 0.5 * h, q + 0.5 * h * k2q, dq + 0.5 * h * k2d);
        let (k4d, k4q) = rhs(r + h, q + h * k3q, dq + h * k3d);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        dq += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        r += h;
        if let Some(v) = out.as_deref_mut() {
            v.push((q, dq));
        }
        if q < 0.0 {
            return -1;
        }
        if dq > 0.0 {
            return 1;
        }
    }
    0
}

pub fn gn_kappa_townes() -> Result<TownesOracle> {
    gn_kappa_townes_with_step(5e-4)
}

pub fn gn_kappa_townes_with_step(h: f64) -> Result<TownesOracle> {
    if !(h > 0.0 && h < 0.1) {
        return Err(PamError::invalid("step must lie in (0, 0.1)"));
    }
    let mut lo = 1.5;
    let mut hi = 3.0;
    if shoot(lo, h, None) != 1 || shoot(hi, h, None) != -1 {
        return Err(PamError::numerical(
            "oracle failed: amplitudes 1.5 and 3.0 do not bracket the ground state",
        ));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        match shoot(mid, h, None) {
            1 => lo = mid,
            -1 => hi = mid,
            _ => break,
        }
    }
    let amplitude = 0.5 * (lo + hi);
    let mut profile = Vec::new();
    shoot(amplitude, h, Some(&mut profile));

    // Trapezoidal mass on the stored grid; the profile decays like
    // exp(-r) so the domain end contributes nothing at this precision.
    let mut mass = 0.0;
    for (i, &(q, _)) in profile.iter().enumerate() {
        let r = i as f64 * h;
        let w = if i == 0 || i == profile.len() - 1 { 0.5 } else { 1.0 };
        mass += w * q * q * r * h;
    }
    let q_mass = 2.0 * std::f64::consts::PI * mass;

    // Field-equation residual with fourth-order stencils, skipping the
    // first nodes whose stencil touches the series start.
    let mut residual: f64 = 0.0;
    for i in 4..profile.len().saturating_sub(2) {
        let r = i as f64 * h;
        let q = profile[i].0;
        let d2 = (-profile[i - 2].0 + 16.0 * profile[i - 1].0 - 30.0 * q
            + 16.0 * profile[i + 1].0
            - profile[i + 2].0)
            / (12.0 * h * h);
        let d1 = profile[i].1;
        residual = residual.max((d2 + d1 / r - q + q * q * q).abs());
    }

    Ok(TownesOracle {
        q_mass,
        kappa: (2.0 / q_mass).powf(0.25),
        amplitude,
        ode_residual: residual,
    })
}

/// Which trial family a search runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TrialFamily {
    GaussianProduct,
    TimeModulatedGaussian,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchConfig {
    /// Coordinate-ascent sweeps over all free parameters.
    pub sweeps: usize,
    /// Stop when a full sweep improves the objective by less than this
    /// relative amount.
    pub rel_tol: f64,
    pub initial_width: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            sweeps: 60,
            rel_tol: 1e-10,
            initial_width: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaBound {
    pub kappa_lb: f64,
    /// The optimized interaction-to-gradient ratio `kappa_lb^4`.
    pub ratio: f64,
    pub best_trial: TrialFunction,
    pub converged: bool,
    pub sweeps_used: usize,
}

/// Golden-section maximization on `[a, b]`.
fn golden_max(f: &dyn Fn(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximize `objective` over the free parameters of a trial family by
/// coordinate ascent with golden-section line searches on expanding
/// brackets. Parameters are the log-widths plus, for the modulated
/// family, the rate.
fn ascend<F: Fn(&TrialFunction) -> f64>(
    d: usize,
    family: TrialFamily,
    cfg: &SearchConfig,
    objective: F,
) -> (TrialFunction, f64, bool, usize) {
    let build = |coords: &[f64]| -> TrialFunction {
        let widths: Vec<f64> = coords[..d].iter().map(|y| y.exp()).collect();
        match family {
            TrialFamily::GaussianProduct => TrialFunction::GaussianProduct { widths },
            TrialFamily::TimeModulatedGaussian => TrialFunction::TimeModulatedGaussian {
                widths,
                rate: coords[d],
            },
        }
    };
    let n_coords = match family {
        TrialFamily::GaussianProduct => d,
        TrialFamily::TimeModulatedGaussian => d + 1,
    };
    let mut coords = vec![cfg.initial_width.ln(); n_coords];
    if family == TrialFamily::TimeModulatedGaussian {
        coords[d] = 0.0;
    }
    let mut best = objective(&build(&coords));
    let mut converged = false;
    let mut sweeps_used = 0;
    for sweep in 0..cfg.sweeps {
        sweeps_used = sweep + 1;
        let before = best;
        for k in 0..n_coords {
            let center = coords[k];
            let line = |y: f64| {
                let mut c = coords.clone();
                c[k] = y;
                objective(&build(&c))
            };
            let mut half_span = 1.5;
            let (mut y, mut fy) = golden_max(&line, center - half_span, center + half_span, 70);
            // Re-bracket if the maximum sits at the edge of the span.
            let mut expansions = 0;
            while (y - center).abs() > 0.9 * half_span && expansions < 6 {
                half_span *= 3.0;
                let r = golden_max(&line, center - half_span, center + half_span, 80);
                y = r.0;
                fy = r.1;
                expansions += 1;
            }
            if fy > best {
                best = fy;
                coords[k] = y;
            }
        }
        if best - before <= cfg.rel_tol * best.abs().max(1e-300) {
            converged = true;
            break;
        }
    }
    (build(&coords), best, converged, sweeps_used)
}

/// Lower bound on the best interaction constant from a trial-family
/// search in the critical regime: `kappa >= (sup R)^{1/4}` where `R` is
/// the interaction-to-gradient ratio.
pub fn kappa_lower_bound(
    params: &HurstParams,
    family: TrialFamily,
    cfg: &SearchConfig,
) -> Result<KappaBound> {
    let report = regime::classify(params);
    if report.skorohod != SkorohodRegime::Critical {
        return Err(PamError::invalid(format!(
            "interaction-constant bounds are defined in the Critical regime, got {:?}",
            report.skorohod
        )));
    }
    if family == TrialFamily::TimeModulatedGaussian && params.h0_f64() <= 0.5 {
        return Err(PamError::invalid(
            "time-modulated trials need a pointwise time covariance, so h0 > 1/2",
        ));
    }
    let (best_trial, ratio, converged, sweeps_used) = ascend(params.d(), family, cfg, |trial| {
        rayleigh_ratio(trial, params).unwrap_or(f64::NEG_INFINITY)
    });
    if !(ratio > 0.0) {
        return Err(PamError::numerical(
            "trial search never produced a positive ratio",
        ));
    }
    Ok(KappaBound {
        kappa_lb: ratio.powf(0.25),
        ratio,
        best_trial,
        converged,
        sweeps_used,
    })
}

/// Positivity certificate for moment blowup at `(t, p)`: with the
/// optimal spectral pairing, the variational margin is
/// `((p - 1) t^{2 h0 - 1} / 2) * interaction - gradient / 2`, and a
/// positive value witnesses divergence of the p-th moment.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub t: f64,
    pub p: f64,
    pub trial: TrialFunction,
    pub numerator: f64,
    pub gradient_energy: f64,
    pub margin: f64,
    pub certified: bool,
}

pub fn blowup_certificate(
    t: f64,
    p: f64,
    trial: &TrialFunction,
    params: &HurstParams,
) -> Result<CertificateReport> {
    if !(p > 1.0) {
        return Err(PamError::invalid(format!(
            "certificates need moment order p > 1, got {p}"
        )));
    }
    if !(t > 0.0) {
        return Err(PamError::invalid("certificates need a positive horizon"));
    }
    let report = regime::classify(params);
    if report.skorohod != SkorohodRegime::Critical {
        return Err(PamError::invalid(format!(
            "blowup certificates are defined in the Critical regime, got {:?}",
            report.skorohod
        )));
    }
    let numerator = interaction_energy(trial, params)?;
    let gradient_energy = trial.gradient_energy();
    let h0 = params.h0_f64();
    let margin = 0.5 * (p - 1.0) * t.powf(2.0 * h0 - 1.0) * numerator - 0.5 * gradient_energy;
    Ok(CertificateReport {
        t,
        p,
        trial: trial.clone(),
        numerator,
        gradient_energy,
        margin,
        certified: margin > 0.0,
    })
}

/// The horizon at which the certificate margin of this trial crosses
/// zero: `(gradient / ((p - 1) interaction))^{1/(2 h0 - 1)}`. Matches
/// the critical-time formula evaluated at `kappa = R(trial)^{1/4}`.
pub fn zero_margin_time(p: f64, trial: &TrialFunction, params: &HurstParams) -> Result<f64> {
    if !(p > 1.0) {
        return Err(PamError::invalid(format!(
            "certificates need moment order p > 1, got {p}"
        )));
    }
    let numerator = interaction_energy(trial, params)?;
    let gradient_energy = trial.gradient_energy();
    let h0 = params.h0_f64();
    Ok((gradient_energy / ((p - 1.0) * numerator)).powf(1.0 / (2.0 * h0 - 1.0)))
}

/// One frequency atom of a trigonometric test potential; the full
/// potential is `sum_k Re[w_k exp(i(lambda_k s + xi_k . x))]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralAtom {
    pub lambda: f64,
    pub xi: Vec<f64>,
    pub weight_re: f64,
    pub weight_im: f64,
}

impl SpectralAtom {
    fn weight(&self) -> Complex64 {
        Complex64::new(self.weight_re, self.weight_im)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FkConfig {
    pub paths: usize,
    /// Time-grid resolution per unit horizon.
    pub steps_per_unit: usize,
    pub seed: u64,
    pub search: SearchConfig,
}

impl Default for FkConfig {
    fn default() -> Self {
        FkConfig {
            paths: 4000,
            steps_per_unit: 64,
            seed: 1,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FkPoint {
    pub b: f64,
    /// `(1/b) log` of the Monte Carlo mean of the exponential path
    /// functional.
    pub value: f64,
    pub std_error: f64,
    /// Heavy-tail warning from the sample diagnostics.
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FkReport {
    pub mc_curve: Vec<FkPoint>,
    pub variational_lb: f64,
    pub best_trial: TrialFunction,
    pub search_converged: bool,
}

fn potential_value(atoms: &[SpectralAtom], s: f64, x: &[f64]) -> f64 {
    let mut v = 0.0;
    for atom in atoms {
        let mut phase = atom.lambda * s;
        for (c, &xi) in atom.xi.iter().enumerate() {
            phase += xi * x[c];
        }
        let (sin_p, cos_p) = phase.sin_cos();
        v += atom.weight_re * cos_p - atom.weight_im * sin_p;
    }
    v
}

/// `int_0^1 e^{i lambda s} ds`.
fn window_transform(lambda: f64) -> Complex64 {
    if lambda.abs() < 1e-8 {
        Complex64::new(1.0 - lambda * lambda / 6.0, 0.5 * lambda)
    } else {
        Complex64::new(lambda.sin() / lambda, (1.0 - lambda.cos()) / lambda)
    }
}

/// `int_0^1 int potential g^2 dx ds` for a time-constant Gaussian
/// product trial, in closed form per atom.
fn potential_pairing(atoms: &[SpectralAtom], widths: &[f64]) -> f64 {
    let mut total = 0.0;
    for atom in atoms {
        let mut damp = 0.0;
        for (j, &xi) in atom.xi.iter().enumerate() {
            damp += 0.25 * widths[j] * widths[j] * xi * xi;
        }
        total += (atom.weight() * window_transform(atom.lambda)).re * (-damp).exp();
    }
    total
}

/// Long-horizon Feynman-Kac asymptotics for a trigonometric potential:
/// the normalized log moment-generating curve of
/// `theta int_0^b potential(s/b, B_s) ds` over Brownian paths, together
/// with the variational lower bound
/// `sup_g {theta int potential g^2 - gradient/2}` over the Gaussian
/// product family. The large-`b` limit of the curve dominates the
/// family bound, so the two sides bracket the true growth rate.
pub fn fk_asymptotics(
    atoms: &[SpectralAtom],
    theta: f64,
    b_list: &[f64],
    cfg: &FkConfig,
) -> Result<FkReport> {
    if atoms.is_empty() {
        return Err(PamError::invalid("need at least one potential atom"));
    }
    let d = atoms[0].xi.len();
    if d == 0 {
        return Err(PamError::invalid("potential atoms need spatial frequencies"));
    }
    for atom in atoms {
        if atom.xi.len() != d {
            return Err(PamError::invalid("potential atoms have mixed dimensions"));
        }
        let mirrored = atoms.iter().any(|other| {
            other.lambda == -atom.lambda
                && other.xi.iter().zip(atom.xi.iter()).all(|(a, b)| *a == -*b)
                && other.weight_re == atom.weight_re
                && other.weight_im == -atom.weight_im
        });
        if !mirrored {
            return Err(PamError::invalid(
                "potential must be real: every atom needs its mirrored conjugate",
            ));
        }
    }
    if !(theta >= 0.0) {
        return Err(PamError::invalid("potential strength must be nonnegative"));
    }
    if b_list.is_empty() {
        return Err(PamError::invalid("need at least one horizon"));
    }
    if cfg.paths < 2 || cfg.steps_per_unit == 0 {
        return Err(PamError::invalid("need at least 2 paths and a time grid"));
    }

    let mc_curve = b_list
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            if !(b > 0.0) {
                return Err(PamError::invalid("horizons must be positive"));
            }
            let m = ((b * cfg.steps_per_unit as f64).ceil() as usize).max(2);
            let ensemble =
                PathEnsemble::sample(b, m, cfg.paths, d, cfg.seed.wrapping_add(i as u64))?;
            let dt = b / m as f64;
            let values: Vec<f64> = stats::par_map(cfg.paths, |k| {
                let path = ensemble.path(k);
                let mut integral = 0.0;
                for step in 0..=m {
                    let w = if step == 0 || step == m { 0.5 * dt } else { dt };
                    let s = step as f64 * dt;
                    integral += w * potential_value(atoms, s / b, path.position(step));
                }
                (theta * integral).exp()
            });
            let estimate = FunctionalEstimate::from_values(&values)?;
            Ok(FkPoint {
                b,
                value: estimate.mean.ln() / b,
                std_error: estimate.std_error / (estimate.mean * b),
                flagged: estimate.heavy_tailed(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (best_trial, variational_lb, search_converged) = if theta == 0.0 {
        // The objective is -gradient/2, whose supremum 0 is approached
        // as the widths grow without bound.
        (
            TrialFunction::gaussian_product(vec![cfg.search.initial_width; d])?,
            0.0,
            true,
        )
    } else {
        let (trial, lb, converged, _) =
            ascend(d, TrialFamily::GaussianProduct, &cfg.search, |trial| {
                theta * potential_pairing(atoms, trial.widths()) - 0.5 * trial.gradient_energy()
            });
        (trial, lb, converged)
    };

    Ok(FkReport {
        mc_curve,
        variational_lb,
        best_trial,
        search_converged,
    })
}
