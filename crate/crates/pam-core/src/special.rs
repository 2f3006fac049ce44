//! Special functions for the spectral description of the noise.
//!
//! A one-dimensional fractional covariance with Hurst index `h` has
//! spectral density `c_h |xi|^{1-2h}`, where `c_h` is fixed by requiring
//! that the increment variance `E[(W(1) - W(0))^2]` equals one. That
//! requirement reads `c_h * alpha_h = 1` with
//!
//! `alpha_h = int_R |e^{i xi} - 1|^2 |xi|^{-(2h+1)} d xi`,
//!
//! and resolves to the closed form `c_h = Gamma(2h+1) sin(pi h) / (2 pi)`.
//! This module provides the closed form, an independent quadrature route
//! to `alpha_h` used to validate it, and the kernel
//!
//! `Phi_h(y) = int_R e^{-u^2} cos(y u) |u|^{1-2h} du`,
//!
//! which gives every mollified covariance evaluation through the exact
//! rescaling `int_R e^{-eps xi^2} cos(v xi) |xi|^{1-2h} d xi
//! = eps^{h-1} Phi_h(v / sqrt(eps))`.

use std::f64::consts::PI;

use crate::error::{PamError, Result};
use crate::quad;

/// Euler gamma function (positive arguments only in this crate).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Spectral normalization constant `c_h = Gamma(2h+1) sin(pi h) / (2 pi)`
/// for Hurst index `0 < h < 1`. With this constant the spectral density
/// `c_h |xi|^{1-2h}` reproduces unit increment variance; in particular
/// `c_{1/2} = 1 / (2 pi)`, the plain white-noise Fourier normalization.
pub fn fbm_spectral_constant(h: f64) -> f64 {
    debug_assert!(h > 0.0 && h < 1.0, "fbm_spectral_constant needs h in (0, 1)");
    gamma(2.0 * h + 1.0) * (PI * h).sin() / (2.0 * PI)
}

/// Increment-variance integral `alpha_h = int_R (2 - 2 cos xi)
/// |xi|^{-(2h+1)} d xi`, computed by quadrature. Independent of
/// [`fbm_spectral_constant`]; the identity `fbm_spectral_constant(h) * alpha_h(h) = 1` is the
/// consistency check between the two routes.
pub fn alpha_h(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(PamError::invalid(format!(
            "increment-variance integral needs h in (0, 1), got {h}"
        )));
    }
    let p = 2.0 * h + 1.0;
    // 1 - cos x written as 2 sin^2(x/2), which stays accurate near zero.
    let f = |x: f64| {
        let s = (0.5 * x).sin();
        2.0 * s * s * x.powf(-p)
    };
    // Near zero the integrand behaves like x^{1-2h} / 2.
    let near = quad::power_singular(f, 1.0, 1.0 - 2.0 * h, 1e-13, 1e-15)?;
    const R: f64 = 50.0;
    let mid = quad::adaptive(f, 1.0, R, 1e-13, 1e-15)?;
    // Beyond R, split 1 - cos: the constant gives an exact power tail,
    // the cosine an integration-by-parts series.
    let (cos_tail, _) = quad::oscillatory_tail(p, R);
    let tail = R.powf(-2.0 * h) / (2.0 * h) - cos_tail;
    Ok(4.0 * (near + mid + tail))
}

/// Constant `K(h)` in the unmollified cosine transform
/// `int_R cos(v xi) |xi|^{1-2h} d xi = K(h) |v|^{2h-2}`, valid for
/// `h in (0, 1)`, `h != 1/2`:
///
/// `K(h) = -2 Gamma(2 - 2h) cos(pi h)`.
///
/// Together with [`fbm_spectral_constant`] it satisfies
/// `fbm_spectral_constant(h) * K(h) = h (2h - 1)`, recovering the familiar
/// fractional covariance density `h (2h - 1) |v|^{2h-2}` for `h > 1/2`.
pub fn power_cosine_constant(h: f64) -> f64 {
    debug_assert!(h > 0.0 && h < 1.0, "power_cosine_constant needs h in (0, 1)");
    -2.0 * gamma(2.0 - 2.0 * h) * (PI * h).cos()
}

/// Above this argument the asymptotic series for `Phi_h` is accurate to
/// well below 1e-14 relative, while direct quadrature below it needs at
/// most a few dozen oscillation cycles.
const PHI_SERIES_SWITCH: f64 = 30.0;

/// Gaussian-damped cosine transform of the spectral power weight:
///
/// `Phi_h(y) = int_R e^{-u^2} cos(y u) |u|^{1-2h} du`,  `0 < h < 1`.
///
/// `Phi_h(0) = Gamma(1 - h)`, and for `|y| -> inf`
///
/// `Phi_h(y) ~ -2 cos(pi h) y^{2h-2} sum_k Gamma(2k + 2 - 2h) / k! y^{-2k}`.
///
/// Small arguments are integrated directly (with the `|u|^{1-2h}`
/// endpoint flattened by substitution); large arguments use the series,
/// truncated at its smallest term.
pub fn phi_kernel(h: f64, y: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(PamError::invalid(format!(
            "damped cosine kernel needs h in (0, 1), got {h}"
        )));
    }
    let y = y.abs();
    if y > PHI_SERIES_SWITCH {
        return Ok(phi_series(h, y));
    }
    let f = |u: f64| 2.0 * (-u * u).exp() * (y * u).cos() * u.powf(1.0 - 2.0 * h);
    // Split so the endpoint substitution never has to resolve
    // oscillations: on [0, 1] there is at most one half-cycle per unit of
    // y, on [1, 8.5] the integrand is smooth. e^{-8.5^2} < 1e-31 bounds
    // the truncation.
    let head = quad::power_singular(f, 1.0, 1.0 - 2.0 * h, 1e-12, 1e-15)?;
    let rest = quad::adaptive(f, 1.0, 8.5, 1e-12, 1e-15)?;
    Ok(head + rest)
}

fn phi_series(h: f64, y: f64) -> f64 {
    let y2 = y * y;
    let mut term = gamma(2.0 - 2.0 * h);
    let mut sum = 0.0;
    for k in 0..64 {
        sum += term;
        let kf = k as f64;
        let next = term * (2.0 * kf + 2.0 - 2.0 * h) * (2.0 * kf + 3.0 - 2.0 * h) / ((kf + 1.0) * y2);
        if next >= term || next < f64::EPSILON * sum {
            break;
        }
        term = next;
    }
    -2.0 * (PI * h).cos() * y.powf(2.0 * h - 2.0) * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_half_is_two_pi() {
        let a = alpha_h(0.5).unwrap();
        assert!((a - 2.0 * PI).abs() < 1e-10, "alpha_1/2 = {a}");
    }

    #[test]
    fn normalization_identity_on_grid() {
        for &h in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            let prod = fbm_spectral_constant(h) * alpha_h(h).unwrap();
            assert!(
                (prod - 1.0).abs() < 1e-9,
                "c_h * alpha_h = {prod} at h = {h}"
            );
        }
    }

    #[test]
    fn phi_at_zero_is_gamma() {
        for &h in &[0.2, 0.5, 0.8, 0.95] {
            let v = phi_kernel(h, 0.0).unwrap();
            assert!((v - gamma(1.0 - h)).abs() < 1e-11 * gamma(1.0 - h));
        }
    }

    #[test]
    fn phi_at_half_is_gaussian() {
        // At h = 1/2 the weight |u|^{1-2h} disappears and the transform
        // is sqrt(pi) e^{-y^2/4} exactly.
        for &y in &[0.0, 0.7, 3.0, 11.0, 20.0] {
            let v = phi_kernel(0.5, y).unwrap();
            let exact = PI.sqrt() * (-y * y / 4.0).exp();
            assert!(
                (v - exact).abs() < 1e-12,
                "phi_1/2({y}) = {v}, expected {exact}"
            );
        }
    }

    #[test]
    fn phi_series_matches_quadrature_at_crossover() {
        for &h in &[0.3, 0.55, 0.8, 0.95] {
            let y = PHI_SERIES_SWITCH - 1e-9;
            let direct = phi_kernel(h, y).unwrap();
            let series = phi_series(h, y + 2e-9);
            let scale = direct.abs().max(1e-3);
            assert!(
                (direct - series).abs() < 1e-10 * scale,
                "crossover mismatch at h = {h}: {direct} vs {series}"
            );
        }
    }

    #[test]
    fn phi_is_even() {
        let a = phi_kernel(0.7, 4.0).unwrap();
        let b = phi_kernel(0.7, -4.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cosine_constant_matches_covariance_density() {
        // c_h K(h) = h (2h - 1) links the spectral normalization to the
        // real-space covariance density for h > 1/2.
        for &h in &[0.6, 0.75, 0.8, 0.9] {
            let lhs = fbm_spectral_constant(h) * power_cosine_constant(h);
            let rhs = h * (2.0 * h - 1.0);
            assert!((lhs - rhs).abs() < 1e-12, "h = {h}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn unmollified_limit_of_phi() {
        // eps^{h-1} Phi_h(v / sqrt(eps)) -> K(h) v^{2h-2} as eps -> 0.
        let h = 0.8;
        let v: f64 = 1.3;
        let exact = power_cosine_constant(h) * v.powf(2.0 * h - 2.0);
        for &eps in &[1e-3_f64, 1e-5] {
            let approx = eps.powf(h - 1.0) * phi_kernel(h, v / eps.sqrt()).unwrap();
            let tol = 40.0 * eps / v / v * exact.abs() + 1e-12;
            assert!(
                (approx - exact).abs() < tol,
                "eps = {eps}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn rejects_out_of_range_h() {
        assert!(alpha_h(0.0).is_err());
        assert!(alpha_h(1.0).is_err());
        assert!(phi_kernel(-0.2, 1.0).is_err());
    }
}
