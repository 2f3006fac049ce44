//! Hurst parameter vectors with exact-rational awareness.
//!
//! The boundary `d - H = 1` separating growth regimes is a measure-zero
//! condition, so deciding it with floating point alone is hopeless.
//! Values entered as fractions or finite decimals are therefore kept as
//! exact rationals and the boundary is decided with integer arithmetic;
//! anything else falls back to `f64` with a documented tolerance.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedSub};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PamError, Result};

/// A Hurst index that remembers whether it is exactly known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HurstValue {
    /// Entered as a fraction or finite decimal; arithmetic on it is exact.
    Exact(Rational64),
    /// Only known as a float; boundary decisions use a 1e-12 tolerance.
    Approx(f64),
}

impl HurstValue {
    pub fn exact(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(PamError::invalid("rational with zero denominator"));
        }
        Ok(HurstValue::Exact(Rational64::new(num, den)))
    }

    pub fn approx(x: f64) -> Self {
        HurstValue::Approx(x)
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            HurstValue::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            HurstValue::Approx(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, HurstValue::Exact(_))
    }

    fn as_rational(&self) -> Option<Rational64> {
        match self {
            HurstValue::Exact(r) => Some(*r),
            HurstValue::Approx(_) => None,
        }
    }
}

impl fmt::Display for HurstValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HurstValue::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            HurstValue::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for HurstValue {
    type Err = PamError;

    /// Accepts `"n/m"`, integers, and finite decimals as exact rationals;
    /// anything else (scientific notation, overly long decimals) parses
    /// as an approximate float.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let n: i64 = num
                .trim()
                .parse()
                .map_err(|_| PamError::invalid(format!("bad numerator in {s:?}")))?;
            let d: i64 = den
                .trim()
                .parse()
                .map_err(|_| PamError::invalid(format!("bad denominator in {s:?}")))?;
            return HurstValue::exact(n, d);
        }
        if let Some(r) = parse_finite_decimal(s) {
            return Ok(HurstValue::Exact(r));
        }
        let x: f64 = s
            .parse()
            .map_err(|_| PamError::invalid(format!("cannot parse {s:?} as a number")))?;
        Ok(HurstValue::Approx(x))
    }
}

/// Parse `-12`, `0.8`, `.75` into an exact rational, returning `None`
/// when the digits would overflow `i64` or the form is not a plain
/// finite decimal.
fn parse_finite_decimal(s: &str) -> Option<Rational64> {
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i64, rest),
        None => (1i64, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return None;
    }
    if frac_part.len() > 15 {
        return None;
    }
    let mut numer: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let mut denom: i64 = 1;
    for b in frac_part.bytes() {
        numer = numer.checked_mul(10)?.checked_add((b - b'0') as i64)?;
        denom = denom.checked_mul(10)?;
    }
    Some(Rational64::new(sign * numer, denom))
}

impl Serialize for HurstValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for HurstValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The full index vector of the noise: `h0` in time, one `h[j]` per
/// spatial coordinate. `h0 = 1` encodes noise constant in time, whose
/// spectral measure in the time variable degenerates to a unit point
/// mass at zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HurstParams {
    h0: HurstValue,
    h: Vec<HurstValue>,
}

/// The sum `Sigma h_j`, kept exact when every summand is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactOrFloat {
    Exact(Rational64),
    Float(f64),
}

impl ExactOrFloat {
    pub fn as_f64(&self) -> f64 {
        match self {
            ExactOrFloat::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            ExactOrFloat::Float(x) => *x,
        }
    }
}

impl HurstParams {
    /// Validates `0 < h0 <= 1` and `0 < h_j < 1` for every spatial index.
    pub fn new(h0: HurstValue, h: Vec<HurstValue>) -> Result<Self> {
        let v0 = h0.as_f64();
        if !(v0 > 0.0 && v0 <= 1.0) {
            return Err(PamError::invalid(format!(
                "time index must lie in (0, 1], got {h0}"
            )));
        }
        if h.is_empty() {
            return Err(PamError::invalid("need at least one spatial index"));
        }
        for (j, hj) in h.iter().enumerate() {
            let v = hj.as_f64();
            if !(v > 0.0 && v < 1.0) {
                return Err(PamError::invalid(format!(
                    "spatial index {j} must lie in (0, 1), got {hj}"
                )));
            }
        }
        Ok(HurstParams { h0, h })
    }

    /// Convenience constructor from floats (all values approximate).
    pub fn from_f64(h0: f64, h: &[f64]) -> Result<Self> {
        HurstParams::new(
            HurstValue::approx(h0),
            h.iter().map(|&x| HurstValue::approx(x)).collect(),
        )
    }

    /// Convenience constructor from exact fractions `(num, den)`.
    pub fn from_fractions(h0: (i64, i64), h: &[(i64, i64)]) -> Result<Self> {
        let h0 = HurstValue::exact(h0.0, h0.1)?;
        let h = h
            .iter()
            .map(|&(n, d)| HurstValue::exact(n, d))
            .collect::<Result<Vec<_>>>()?;
        HurstParams::new(h0, h)
    }

    pub fn h0(&self) -> HurstValue {
        self.h0
    }

    pub fn spatial(&self) -> &[HurstValue] {
        &self.h
    }

    pub fn d(&self) -> usize {
        self.h.len()
    }

    pub fn h0_f64(&self) -> f64 {
        self.h0.as_f64()
    }

    pub fn spatial_f64(&self) -> Vec<f64> {
        self.h.iter().map(|v| v.as_f64()).collect()
    }

    /// `H = Sigma_j h_j`, exact when every spatial index is exact and the
    /// rational sum does not overflow.
    pub fn h_sum(&self) -> ExactOrFloat {
        let mut acc = Rational64::new(0, 1);
        for hj in &self.h {
            match hj.as_rational().and_then(|r| acc.checked_add(&r)) {
                Some(next) => acc = next,
                None => {
                    return ExactOrFloat::Float(self.h.iter().map(|v| v.as_f64()).sum());
                }
            }
        }
        ExactOrFloat::Exact(acc)
    }

    /// Indices with `h_j < 1/2`, the rough spatial directions.
    pub fn j_star(&self) -> Vec<usize> {
        let half = Rational64::new(1, 2);
        self.h
            .iter()
            .enumerate()
            .filter(|(_, hj)| match hj {
                HurstValue::Exact(r) => *r < half,
                HurstValue::Approx(x) => *x < 0.5,
            })
            .map(|(j, _)| j)
            .collect()
    }

    pub fn d_star(&self) -> usize {
        self.j_star().len()
    }

    /// `H* = Sigma_{h_j < 1/2} h_j`.
    pub fn h_star(&self) -> f64 {
        self.j_star().iter().map(|&j| self.h[j].as_f64()).sum()
    }

    /// `d - H`, the quantity whose comparison with 1 separates the
    /// growth regimes. Exact when [`Self::h_sum`] is.
    pub fn codimension_gap(&self) -> ExactOrFloat {
        match self.h_sum() {
            ExactOrFloat::Exact(h) => {
                let d = Rational64::new(self.d() as i64, 1);
                match d.checked_sub(&h) {
                    Some(g) => ExactOrFloat::Exact(g),
                    None => ExactOrFloat::Float(self.d() as f64 - h.to_f64()),
                }
            }
            ExactOrFloat::Float(h) => ExactOrFloat::Float(self.d() as f64 - h),
        }
    }
}

trait RationalF64 {
    fn to_f64(&self) -> f64;
}
impl RationalF64 for Rational64 {
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
