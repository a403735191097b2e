//! Fixed-point constants and multiplication-count planning.
//!
//! The function `f(x') = C * A^x` is evaluated by conditionally multiplying by
//! `A_i = A^(2^i)` for each set exponent bit `x_i`. This module derives `A`,
//! `C` and the rounded `A_i`, and decides how many of those multiplications
//! can actually change an `n`-bit result.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::hp::{self, HpFloat};
use crate::{Error, Result};

/// Widest register the simulator and planner accept.
pub const MAX_WIDTH: u32 = 62;

/// An `n`-bit unsigned binary fraction `mantissa / 2^n` in `[0, 1)`.
///
/// Bit `j` has weight `2^-(n-j)`; bit 0 is the least significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedPoint {
    width: u32,
    mantissa: u64,
}

impl FixedPoint {
    pub fn new(width: u32, mantissa: u64) -> Result<Self> {
        if !(2..=MAX_WIDTH).contains(&width) {
            return Err(Error::Domain(format!(
                "fixed-point width {width} outside 2..={MAX_WIDTH}"
            )));
        }
        if mantissa >> width != 0 {
            return Err(Error::Domain(format!(
                "mantissa {mantissa} does not fit {width} bits"
            )));
        }
        Ok(Self { width, mantissa })
    }

    pub fn zero(width: u32) -> Result<Self> {
        Self::new(width, 0)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn mantissa(&self) -> u64 {
        self.mantissa
    }

    pub fn bit(&self, j: u32) -> bool {
        j < self.width && (self.mantissa >> j) & 1 == 1
    }

    pub fn value(&self) -> f64 {
        self.mantissa as f64 / (1u64 << self.width) as f64
    }

    /// Indices of the bits equal to one, ascending.
    pub fn set_bits(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.width).filter(move |&j| self.bit(j))
    }

    /// Digits `y_{n-1} ... y_0`, most significant first.
    pub fn bit_string(&self) -> String {
        (0..self.width)
            .rev()
            .map(|j| if self.bit(j) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bit_string(bits: &str) -> Result<Self> {
        let bits = bits.trim().trim_start_matches("0.").trim_start_matches('.');
        let width = bits.len() as u32;
        let mut mantissa = 0u64;
        for ch in bits.chars() {
            let b = match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::Format(format!("invalid binary digit {ch:?}"))),
            };
            if width > MAX_WIDTH {
                break;
            }
            mantissa = (mantissa << 1) | b;
        }
        Self::new(width, mantissa)
    }
}

impl fmt::Display for FixedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0.{}", self.bit_string())
    }
}

/// Rounds `v` in `[0, 1]` to the nearest `n`-bit fraction, ties to even.
/// `v = 1` (and anything rounding up to it) clamps to `1 - 2^-n`.
pub fn fp_round(v: f64, n: u32) -> Result<FixedPoint> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{v} is outside [0, 1]")));
    }
    fp_round_hp(&hp::from_f64(v, hp::working_precision(n))?, n)
}

/// Extended-precision form of [`fp_round`].
pub fn fp_round_hp(v: &HpFloat, n: u32) -> Result<FixedPoint> {
    if !(2..=MAX_WIDTH).contains(&n) {
        return Err(Error::Domain(format!("width {n} outside 2..={MAX_WIDTH}")));
    }
    let prec = hp::working_precision(n);
    if *v < HpFloat::ZERO {
        return Err(Error::Domain(format!("{} is outside [0, 1]", hp::to_f64(v))));
    }
    if *v > hp::from_u64(1, prec) {
        return Err(Error::Domain(format!("{} is outside [0, 1]", hp::to_f64(v))));
    }
    let (floor, frac) = hp::scaled_floor(v, n)?;
    let round_up = match frac {
        Ordering::Greater => true,
        Ordering::Equal => floor & 1 == 1,
        Ordering::Less => false,
    };
    let top = (1u64 << n) - 1;
    let mantissa = (floor + round_up as u64).min(top);
    FixedPoint::new(n, mantissa)
}

/// Decimal-text real number, parsed into extended precision on use so that
/// inputs like `0.1` never pass through a binary double.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Real(String);

impl Real {
    pub fn parse(text: &str) -> Result<Self> {
        hp::parse_decimal(text, 64)?;
        Ok(Real(text.trim().to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn to_hp(&self, prec: usize) -> HpFloat {
        hp::parse_decimal(&self.0, prec).expect("validated at construction")
    }

    pub fn to_f64(&self) -> f64 {
        hp::to_f64(&self.to_hp(64))
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(format!("{v:?}"))
    }
}

impl From<u32> for Real {
    fn from(v: u32) -> Self {
        Real(v.to_string())
    }
}

impl TryFrom<String> for Real {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Real::parse(&s)
    }
}

impl From<Real> for String {
    fn from(r: Real) -> String {
        r.0
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    Exponential,
    Gaussian,
}

/// How the Gaussian's domain register maps onto the exponent register.
///
/// `Full`: the `d`-bit index `x` is unsigned, the exponent `x^2` takes `2d`
/// bits. `Symmetric`: the index is a `d`-bit two's-complement value centred
/// on zero, so `x^2 <= 2^(2d-2)` fits `2d - 1` bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianDomain {
    #[default]
    Full,
    Symmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    GateSaving,
    SpaceSaving,
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanMode::GateSaving => "gate_saving",
            PlanMode::SpaceSaving => "space_saving",
        })
    }
}

/// User-facing problem description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: FunctionKind,
    pub alpha: Real,
    pub x_min: Real,
    pub x_max: Real,
    /// Domain qubits.
    pub d: u32,
    /// Range qubits.
    pub n: u32,
    #[serde(default)]
    pub gaussian_domain: GaussianDomain,
}

impl ProblemSpec {
    pub fn exponential(
        alpha: impl Into<Real>,
        x_min: impl Into<Real>,
        x_max: impl Into<Real>,
        d: u32,
        n: u32,
    ) -> Self {
        Self {
            kind: FunctionKind::Exponential,
            alpha: alpha.into(),
            x_min: x_min.into(),
            x_max: x_max.into(),
            d,
            n,
            gaussian_domain: GaussianDomain::Full,
        }
    }

    /// Gaussian centred at the origin over `[0, x_max)`.
    pub fn gaussian(
        alpha: impl Into<Real>,
        x_max: impl Into<Real>,
        d: u32,
        n: u32,
        domain: GaussianDomain,
    ) -> Self {
        Self {
            kind: FunctionKind::Gaussian,
            alpha: alpha.into(),
            x_min: Real::from(0u32),
            x_max: x_max.into(),
            d,
            n,
            gaussian_domain: domain,
        }
    }

    /// Width of the register whose bits control the multiplications.
    pub fn d_eff(&self) -> u32 {
        match (self.kind, self.gaussian_domain) {
            (FunctionKind::Exponential, _) => self.d,
            (FunctionKind::Gaussian, GaussianDomain::Full) => 2 * self.d,
            (FunctionKind::Gaussian, GaussianDomain::Symmetric) => 2 * self.d - 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prec = hp::working_precision(self.n.min(MAX_WIDTH));
        let zero = hp::from_u64(0, prec);
        let alpha = self.alpha.to_hp(prec);
        let x_min = self.x_min.to_hp(prec);
        let x_max = self.x_max.to_hp(prec);
        if alpha <= zero {
            return Err(Error::InvalidSpec(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if x_min < zero {
            return Err(Error::InvalidSpec(format!(
                "x_min must be non-negative, got {}",
                self.x_min
            )));
        }
        if x_max <= x_min {
            return Err(Error::InvalidSpec(format!(
                "empty domain: x_max {} <= x_min {}",
                self.x_max, self.x_min
            )));
        }
        if self.d < 1 {
            return Err(Error::InvalidSpec("d must be at least 1".into()));
        }
        if !(2..=MAX_WIDTH).contains(&self.n) {
            return Err(Error::InvalidSpec(format!(
                "n must lie in 2..={MAX_WIDTH}, got {}",
                self.n
            )));
        }
        match self.kind {
            FunctionKind::Exponential => {
                if self.gaussian_domain == GaussianDomain::Symmetric {
                    return Err(Error::InvalidSpec(
                        "the symmetric domain applies to the Gaussian only".into(),
                    ));
                }
            }
            FunctionKind::Gaussian => {
                if x_min != zero {
                    return Err(Error::InvalidSpec(
                        "the Gaussian is evaluated about the origin; x_min must be 0".into(),
                    ));
                }
                if self.gaussian_domain == GaussianDomain::Symmetric && self.d < 2 {
                    return Err(Error::InvalidSpec(
                        "the symmetric Gaussian domain needs d >= 2".into(),
                    ));
                }
            }
        }
        if self.d_eff() > MAX_WIDTH {
            return Err(Error::InvalidSpec(format!(
                "exponent register of {} bits exceeds {MAX_WIDTH}",
                self.d_eff()
            )));
        }
        Ok(())
    }

    /// `(delta, A, C)` at `prec` bits.
    pub(crate) fn reals(&self, prec: usize) -> (HpFloat, HpFloat, HpFloat) {
        let alpha = self.alpha.to_hp(prec);
        let x_min = self.x_min.to_hp(prec);
        let x_max = self.x_max.to_hp(prec);
        let delta = (&x_max - &x_min) * hp::pow2(-(self.d as i64), prec);
        let (a_arg, c_arg) = match self.kind {
            FunctionKind::Exponential => (&alpha * &delta, &alpha * &x_min),
            FunctionKind::Gaussian => (&alpha * delta.sqr(), &alpha * x_min.sqr()),
        };
        (delta, hp::exp(&-a_arg), hp::exp(&-c_arg))
    }

    /// The exponent `e` in `f = C * A^e` for raw domain index `x`.
    pub fn exponent_of(&self, x: u64) -> Result<u64> {
        if self.d >= 64 || x >> self.d != 0 {
            return Err(Error::Domain(format!(
                "domain value {x} does not fit {} bits",
                self.d
            )));
        }
        Ok(match (self.kind, self.gaussian_domain) {
            (FunctionKind::Exponential, _) => x,
            (FunctionKind::Gaussian, GaussianDomain::Full) => x * x,
            (FunctionKind::Gaussian, GaussianDomain::Symmetric) => {
                let signed = signed_index(x, self.d);
                signed.unsigned_abs() * signed.unsigned_abs()
            }
        })
    }
}

/// Two's-complement reading of a `d`-bit pattern.
pub fn signed_index(x: u64, d: u32) -> i64 {
    if x >> (d - 1) & 1 == 1 {
        x as i64 - (1i64 << d)
    } else {
        x as i64
    }
}

/// Classical constants a circuit is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanConstants {
    /// Grid spacing.
    pub delta: f64,
    pub a_real: f64,
    pub c_real: f64,
    /// `round(A^(2^i))` for `0 <= i < m`.
    pub a_i: Vec<FixedPoint>,
    pub c_fp: FixedPoint,
    /// `round(C * A)`, the result of the first multiplication.
    pub c1_fp: FixedPoint,
}

pub fn derive_constants(spec: &ProblemSpec, m: u32) -> Result<PlanConstants> {
    spec.validate()?;
    if m < 1 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let n = spec.n;
    let prec = hp::working_precision(n);
    let (delta, a, c) = spec.reals(prec);
    let one = hp::from_u64(1, prec);
    if a >= one || a <= HpFloat::ZERO {
        return Err(Error::InvalidSpec(format!(
            "A = {} is not inside (0, 1)",
            hp::to_f64(&a)
        )));
    }
    let mut a_i = Vec::with_capacity(m as usize);
    let mut power = a.clone();
    for i in 0..m {
        if i > 0 {
            power = power.sqr();
        }
        a_i.push(fp_round_hp(&power, n)?);
    }
    let c1 = &c * &a;
    Ok(PlanConstants {
        delta: hp::to_f64(&delta),
        a_real: hp::to_f64(&a),
        c_real: hp::to_f64(&c),
        a_i,
        c_fp: fp_round_hp(&c, n)?,
        c1_fp: fp_round_hp(&c1, n)?,
    })
}

/// Number of multiplications for an `f64` base; see [`compute_m_hp`].
pub fn compute_m(n: u32, d_eff: u32, a_real: f64) -> Result<u32> {
    if a_real.is_nan() || a_real <= 0.0 {
        return Err(Error::Domain(format!("A = {a_real} must be positive")));
    }
    compute_m_hp(n, d_eff, &hp::from_f64(a_real, hp::working_precision(n))?)
}

/// Smallest `i` with `A^(2^i) < 2^-n`, capped at `d_eff`, by direct search.
pub fn compute_m_hp(n: u32, d_eff: u32, a: &HpFloat) -> Result<u32> {
    let prec = hp::working_precision(n).max(a.precision());
    let a = hp::with_prec(a.clone(), prec);
    let one = hp::from_u64(1, prec);
    let floor = hp::pow2(-(n as i64), prec);
    if a >= one {
        return Err(Error::Domain(format!("A = {} must be < 1", hp::to_f64(&a))));
    }
    if a <= HpFloat::ZERO {
        return Err(Error::Domain(format!("A = {} must be positive", hp::to_f64(&a))));
    }
    if a < floor {
        return Err(Error::Unsupported(format!(
            "A = {} is below 2^-{n}; every output would underflow",
            hp::to_f64(&a)
        )));
    }
    let mut power = a;
    for i in 0..d_eff {
        if power < floor {
            return Ok(i);
        }
        power = power.sqr();
    }
    Ok(d_eff)
}

/// Closed form `min(d_eff, floor(log2(n / log2(1/A))) + 1)` in extended
/// precision. Agrees with [`compute_m_hp`] except within rounding noise of a
/// power-of-two boundary.
pub fn closed_form_m(n: u32, d_eff: u32, a: &HpFloat) -> Result<u32> {
    let prec = hp::working_precision(n).max(a.precision());
    let a = hp::with_prec(a.clone(), prec);
    if a >= hp::from_u64(1, prec) || a <= HpFloat::ZERO {
        return Err(Error::Domain(format!("A = {} not in (0, 1)", hp::to_f64(&a))));
    }
    let bits_lost = -hp::log2(&a);
    let ratio = hp::from_u64(n as u64, prec) / bits_lost;
    let k = hp::log2(&ratio).floor().to_int().value();
    let k = i64::try_from(k).map_err(|_| Error::Domain("log2 out of range".into()))?;
    let m = k + 1;
    if m < 1 {
        return Err(Error::Unsupported(format!(
            "A = {} is below 2^-{n}",
            hp::to_f64(&a)
        )));
    }
    Ok((m as u64).min(d_eff as u64) as u32)
}

/// `2^(-n / 2^(d_eff - 1))`: the smallest `A` for which all `d_eff`
/// multiplications are needed.
pub fn compute_a_max(n: u32, d_eff: u32) -> f64 {
    let exponent = -(n as f64) / 2f64.powi(d_eff as i32 - 1);
    exponent.exp2()
}

/// A fully resolved evaluation plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub spec: ProblemSpec,
    pub d_eff: u32,
    pub m: u32,
    /// `m` as found by the search, before any override.
    pub m_planned: u32,
    pub a_max: f64,
    pub constants: PlanConstants,
    pub mode: PlanMode,
}

impl Plan {
    pub fn n(&self) -> u32 {
        self.spec.n
    }

    pub fn kind(&self) -> FunctionKind {
        self.spec.kind
    }

    /// Short `(n,d,m)` label.
    pub fn triple(&self) -> String {
        format!("({},{},{})", self.spec.n, self.d_eff, self.m)
    }

    pub fn with_mode(&self, mode: PlanMode) -> Plan {
        Plan {
            mode,
            ..self.clone()
        }
    }
}

pub fn make_plan(spec: &ProblemSpec, mode: PlanMode, m_override: Option<u32>) -> Result<Plan> {
    spec.validate()?;
    let n = spec.n;
    let d_eff = spec.d_eff();
    let prec = hp::working_precision(n);
    let (_, a, _) = spec.reals(prec);
    let m_planned = compute_m_hp(n, d_eff, &a)?;
    let m = match m_override {
        Some(0) => return Err(Error::InvalidSpec("m override must be at least 1".into())),
        Some(m) if m > d_eff => {
            return Err(Error::InvalidSpec(format!(
                "m override {m} exceeds the exponent width {d_eff}"
            )))
        }
        Some(m) => m,
        None => m_planned,
    };
    let constants = derive_constants(spec, m)?;
    if let Some(i) = constants.a_i.iter().position(|c| c.mantissa() == 0) {
        return Err(Error::Unsupported(format!(
            "A_{i} rounds to zero at n = {n}; m = {m} is too large"
        )));
    }
    Ok(Plan {
        spec: spec.clone(),
        d_eff,
        m,
        m_planned,
        a_max: compute_a_max(n, d_eff),
        constants,
        mode,
    })
}
