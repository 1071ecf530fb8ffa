//! Arithmetic used by the dynamic programs.
//!
//! Kernels hand out rows in any [`Weight`]; `f64` is used for long horizons and
//! [`BigRational`] for exact small-horizon verification.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Run-level switch between floating point and exact rational arithmetic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    #[default]
    Float,
    Rational,
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticMode::Float => f.write_str("float"),
            ArithmeticMode::Rational => f.write_str("rational"),
        }
    }
}

pub trait Weight: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational64) -> Self;
    fn from_big(num: &BigInt, den: &BigInt) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    fn from_frac(num: u64, den: u64) -> Self {
        Self::from_big(&BigInt::from(num), &BigInt::from(den))
    }

    /// `1 - self`.
    fn complement(&self) -> Self;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_rational(r: &Rational64) -> Self {
        *r.numer() as f64 / *r.denom() as f64
    }

    fn from_big(num: &BigInt, den: &BigInt) -> Self {
        ToPrimitive::to_f64(&BigRational::new(num.clone(), den.clone())).unwrap_or(f64::NAN)
    }

    fn from_frac(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn complement(&self) -> Self {
        1.0 - self
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_rational(r: &Rational64) -> Self {
        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
    }

    fn from_big(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn complement(&self) -> Self {
        <BigRational as One>::one() - self
    }
}

/// Parses a decimal (`0.7`, `-3`, `1e-3` is rejected) or fraction (`3/5`) literal exactly.
pub fn parse_rational(text: &str) -> Option<Rational64> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational64::new(n, d));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if frac_part.len() > 17 {
        return None;
    }
    let den = 10i64.checked_pow(frac_part.len() as u32)?;
    let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().ok()? };
    let frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().ok()? };
    let num = int.checked_mul(den)?.checked_add(frac)?;
    Some(Rational64::new(if neg { -num } else { num }, den))
}

/// Shortest decimal-or-fraction spelling that [`parse_rational`] reads back exactly.
pub fn format_rational(r: &Rational64) -> String {
    let den = *r.denom();
    let mut d = den;
    let mut pow = 0u32;
    for p in [2i64, 5] {
        while d % p == 0 {
            d /= p;
        }
    }
    if d == 1 {
        // Terminating decimal.
        let mut scale = 1i64;
        while scale % den != 0 {
            scale *= 10;
            pow += 1;
        }
        let num = *r.numer() * (scale / den);
        if pow == 0 {
            return num.to_string();
        }
        let neg = num < 0;
        let digits = format!("{:0width$}", num.abs(), width = pow as usize + 1);
        let (i, f) = digits.split_at(digits.len() - pow as usize);
        format!("{}{}.{}", if neg { "-" } else { "" }, i, f)
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
