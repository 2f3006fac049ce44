//! Growth-regime classification and the critical blowup time.
//!
//! For a Hurst vector with spatial sum `H` and rough-direction
//! coefficients `(d*, H*)`, moments of the Wick-interpreted solution
//! stay finite for all time when
//!
//! `d - H < 1` and `4(1 - h0) + 2(d - H) + (d* - 2H*) < 4`,
//!
//! and grow with a finite blowup time on the boundary
//!
//! `d - H = 1` with `4(1 - h0) + (d* - 2H*) < 2`.
//!
//! On that boundary the `p`-th moment explodes at
//! `t0(p) = (kappa^4 (p - 1))^{-1/(2 h0 - 1)}` for an interaction
//! constant `kappa` supplied by the variational machinery. The pathwise
//! (renormalized product) interpretation instead requires
//! `d + 2/3 < 2 h0 + H <= d + 1`, tracked as a separate flag.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{PamError, Result};
use crate::hurst::{ExactOrFloat, HurstParams};

/// Tolerance for deciding boundary conditions when any Hurst component
/// is only known as a float. Exact-rational inputs never use it.
const FLOAT_BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SkorohodRegime {
    /// Moments finite for all time.
    Subcritical,
    /// Moments finite up to an explicit critical time, infinite after.
    Critical,
    /// Outside the range where the Wick-product moment theory applies.
    Unsupported,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeReport {
    pub params: HurstParams,
    pub d_star: usize,
    pub h_star: f64,
    pub h_sum: f64,
    pub skorohod: SkorohodRegime,
    pub stratonovich_ok: bool,
    pub notes: Vec<String>,
}

/// Three-way comparison of a possibly exact quantity with a rational
/// threshold, recording whether a float tolerance had to decide it.
fn compare_boundary(value: ExactOrFloat, threshold: Rational64) -> (std::cmp::Ordering, bool) {
    match value {
        ExactOrFloat::Exact(r) => (r.cmp(&threshold), false),
        ExactOrFloat::Float(x) => {
            let t = *threshold.numer() as f64 / *threshold.denom() as f64;
            if (x - t).abs() <= FLOAT_BOUNDARY_TOL {
                (std::cmp::Ordering::Equal, true)
            } else {
                (x.partial_cmp(&t).expect("finite comparison"), false)
            }
        }
    }
}

/// Classify a Hurst vector into the growth regimes of both product
/// interpretations.
pub fn classify(params: &HurstParams) -> RegimeReport {
    let mut notes = Vec::new();
    let d = params.d() as f64;
    let h0 = params.h0_f64();
    let h_sum_v = params.h_sum();
    let h_sum = h_sum_v.as_f64();
    let d_star = params.d_star();
    let h_star = params.h_star();
    let rough = d_star as f64 - 2.0 * h_star;

    let gap = params.codimension_gap();
    let (gap_cmp, gap_by_tol) = compare_boundary(gap, Rational64::new(1, 1));
    if gap_by_tol {
        notes.push(format!(
            "d - H = 1 decided within float tolerance {FLOAT_BOUNDARY_TOL:e}; pass exact rationals to decide it exactly"
        ));
    }

    let skorohod = if h0 <= 0.5 {
        notes.push("time index h0 <= 1/2 is outside the Wick-product moment theory".into());
        SkorohodRegime::Unsupported
    } else {
        match gap_cmp {
            std::cmp::Ordering::Less => {
                if 4.0 * (1.0 - h0) + 2.0 * (d - h_sum) + rough < 4.0 {
                    SkorohodRegime::Subcritical
                } else {
                    notes.push("d - H < 1 but the rough-direction condition fails".into());
                    SkorohodRegime::Unsupported
                }
            }
            std::cmp::Ordering::Equal => {
                if 4.0 * (1.0 - h0) + rough < 2.0 {
                    SkorohodRegime::Critical
                } else {
                    notes
                        .push("on the d - H = 1 boundary but the rough-direction condition fails".into());
                    SkorohodRegime::Unsupported
                }
            }
            std::cmp::Ordering::Greater => {
                notes.push("d - H > 1: noise too rough for any moment theory used here".into());
                SkorohodRegime::Unsupported
            }
        }
    };

    let window = stratonovich_window(params);
    let stratonovich_ok = window.in_window;
    if window.decided_by_tol && stratonovich_ok {
        notes.push(format!(
            "2 h0 + H = d + 1 decided within float tolerance {FLOAT_BOUNDARY_TOL:e}"
        ));
    }

    RegimeReport {
        params: params.clone(),
        d_star,
        h_star,
        h_sum,
        skorohod,
        stratonovich_ok,
        notes,
    }
}

/// Where `2 h0 + H` sits relative to the pathwise admissible window
/// `(d + 2/3, d + 1]`.
#[derive(Clone, Copy, Debug)]
pub struct StratonovichWindow {
    pub in_window: bool,
    /// `2 h0 + H = d + 1` exactly; the renormalization constant then
    /// diverges logarithmically instead of geometrically.
    pub on_upper_boundary: bool,
    pub decided_by_tol: bool,
}

/// Pathwise condition: `d + 2/3 < 2 h0 + H <= d + 1`. The upper bound
/// includes equality, so it is decided exactly when possible.
pub fn stratonovich_window(params: &HurstParams) -> StratonovichWindow {
    let h_sum_v = params.h_sum();
    let strato_sum = match (params.h0(), h_sum_v) {
        (crate::hurst::HurstValue::Exact(r0), ExactOrFloat::Exact(h)) => {
            use num_traits::CheckedAdd;
            match (r0 * 2).checked_add(&h) {
                Some(s) => ExactOrFloat::Exact(s),
                None => ExactOrFloat::Float(2.0 * params.h0_f64() + h_sum_v.as_f64()),
            }
        }
        _ => ExactOrFloat::Float(2.0 * params.h0_f64() + h_sum_v.as_f64()),
    };
    let lower = Rational64::new(params.d() as i64 * 3 + 2, 3);
    let upper = Rational64::new(params.d() as i64 + 1, 1);
    let (lo_cmp, lo_by_tol) = compare_boundary(strato_sum, lower);
    let (hi_cmp, hi_by_tol) = compare_boundary(strato_sum, upper);
    StratonovichWindow {
        in_window: lo_cmp == std::cmp::Ordering::Greater && hi_cmp != std::cmp::Ordering::Greater,
        on_upper_boundary: hi_cmp == std::cmp::Ordering::Equal,
        decided_by_tol: lo_by_tol || hi_by_tol,
    }
}

/// Blowup time of the `p`-th moment in the critical regime:
/// `t0(p) = (kappa^4 (p - 1))^{-1/(2 h0 - 1)}`.
///
/// At `h0 = 1` the exponent is 1; `h0 <= 1/2` never reaches here because
/// such parameters are never classified Critical.
pub fn critical_time(p: f64, params: &HurstParams, kappa: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(PamError::invalid(format!(
            "critical time needs moment order p > 1, got {p}"
        )));
    }
    if !(kappa > 0.0) {
        return Err(PamError::invalid(format!(
            "interaction constant must be positive, got {kappa}"
        )));
    }
    let report = classify(params);
    if report.skorohod != SkorohodRegime::Critical {
        return Err(PamError::invalid(format!(
            "critical time is defined only in the Critical regime, got {:?}",
            report.skorohod
        )));
    }
    let h0 = params.h0_f64();
    let exponent = -1.0 / (2.0 * h0 - 1.0);
    Ok((kappa.powi(4) * (p - 1.0)).powf(exponent))
}
