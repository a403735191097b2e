//! Extended-precision binary floats used for the classical precomputation.
//!
//! All planner constants are evaluated here at [`working_precision`] bits and
//! only then rounded to the `n`-bit fixed-point grid, so no double rounding
//! passes through `f64`.

use std::cmp::Ordering;
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

use crate::{Error, Result};

/// Binary arbitrary-precision float, round-half-even.
pub type HpFloat = FBig<HalfEven, 2>;

/// Bits of working precision for an `n`-bit range register.
///
/// At least `2n + 16`; the extra headroom absorbs the error growth of up to
/// 64 successive squarings.
pub fn working_precision(n: u32) -> usize {
    2 * n as usize + 16 + 96
}

/// Parses a decimal literal such as `"0.389"` or `"1e-3"` at `prec` bits.
pub fn parse_decimal(text: &str, prec: usize) -> Result<HpFloat> {
    let trimmed = text.trim();
    let dec = FBig::<HalfEven, 10>::from_str(trimmed)
        .map_err(|e| Error::InvalidSpec(format!("cannot parse number {trimmed:?}: {e}")))?;
    Ok(dec.with_base_and_precision::<2>(prec).value())
}

/// Exact conversion of an `f64`, then widened to `prec` bits.
pub fn from_f64(v: f64, prec: usize) -> Result<HpFloat> {
    let x = HpFloat::try_from(v)
        .map_err(|_| Error::Domain(format!("non-finite value {v}")))?;
    Ok(with_prec(x, prec))
}

pub fn from_u64(v: u64, prec: usize) -> HpFloat {
    with_prec(HpFloat::from(v), prec)
}

/// `2^k` at `prec` bits.
pub fn pow2(k: i64, prec: usize) -> HpFloat {
    with_prec(HpFloat::from_parts(1.into(), k as isize), prec)
}

pub fn with_prec(x: HpFloat, prec: usize) -> HpFloat {
    x.with_precision(prec).value()
}

/// `a^(2^k)` by `k` squarings.
pub fn pow_pow2(a: &HpFloat, k: u32) -> HpFloat {
    let mut p = a.clone();
    for _ in 0..k {
        p = p.sqr();
    }
    p
}

/// `a^e` for a non-negative integer exponent.
pub fn pow_u64(a: &HpFloat, e: u64) -> HpFloat {
    let prec = a.precision();
    let mut result = from_u64(1, prec);
    let mut base = a.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = base.sqr();
        }
    }
    result
}

pub fn exp(x: &HpFloat) -> HpFloat {
    x.exp()
}

pub fn log2(x: &HpFloat) -> HpFloat {
    let prec = x.precision();
    let ln2 = from_u64(2, prec).ln();
    x.ln() / ln2
}

pub fn to_f64(x: &HpFloat) -> f64 {
    x.to_f64().value()
}

/// Splits `v * 2^n` (for `v >= 0`) into its integer floor and the position of
/// the fractional remainder relative to one half.
pub fn scaled_floor(v: &HpFloat, n: u32) -> Result<(u64, Ordering)> {
    let prec = v.precision().max(working_precision(n));
    let scaled = with_prec(v.clone(), prec) * pow2(n as i64, prec);
    let floor = scaled.floor();
    let frac = &scaled - &floor;
    let half = pow2(-1, prec);
    let int = floor.to_int().value();
    let int = u64::try_from(int)
        .map_err(|_| Error::Domain("scaled value does not fit 64 bits".into()))?;
    Ok((int, frac.cmp(&half)))
}
