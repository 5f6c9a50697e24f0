//! Exact non-negative rationals for thresholds and tolerances.
//!
//! Thresholds such as `0.1` are not representable in binary floating point,
//! and the sizing rules take ceilings of expressions like `2α/ε₂`. Doing that
//! in `f64` can land one above the exact value (`22201` for `22200`). Every
//! parameter is therefore parsed from its decimal text into an exact rational.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{ChhError, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(BigRational);

impl Fraction {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(ChhError::invalid("zero denominator"));
        }
        Ok(Fraction(BigRational::new(numer.into(), denom.into())))
    }

    pub fn from_integer(value: u64) -> Self {
        Fraction(BigRational::from_integer(value.into()))
    }

    /// Converts through the shortest decimal that round-trips to `value`, so
    /// `0.1_f64` becomes exactly `1/10`.
    pub fn from_f64(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(ChhError::invalid(format!("{value} is not a finite non-negative number")));
        }
        format!("{value}").parse()
    }

    pub(crate) fn from_ratio(ratio: BigRational) -> Self {
        debug_assert!(!ratio.is_negative());
        Fraction(ratio)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// True for values strictly inside (0, 1).
    pub fn is_proper(&self) -> bool {
        !self.0.is_zero() && self.0 < BigRational::one()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// `numer/denom` text, always exact; used by snapshots.
    pub fn to_ratio_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Smallest integer ≥ `value`, or `None` if it does not fit in `u64`.
pub(crate) fn ceil_u64(value: &BigRational) -> Option<u64> {
    value.ceil().to_integer().to_u64()
}

impl std::ops::Mul for &Fraction {
    type Output = Fraction;

    fn mul(self, rhs: &Fraction) -> Fraction {
        Fraction(&self.0 * &rhs.0)
    }
}

impl FromStr for Fraction {
    type Err = ChhError;

    /// Accepts `n/d`, plain decimals (`0.05`, `.5`, `3`) and scientific
    /// notation (`1e-3`, `2.5E-2`).
    fn from_str(text: &str) -> Result<Self> {
        let bad = || ChhError::invalid(format!("cannot parse {text:?} as a non-negative number"));
        let s = text.trim();
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() || n.is_negative() || d.is_negative() {
                return Err(bad());
            }
            return Ok(Fraction(BigRational::new(n, d)));
        }

        let s = s.strip_prefix('+').unwrap_or(s);
        let (mantissa, exponent) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
        let scale = exponent - frac_part.len() as i32;
        if scale.unsigned_abs() > 4096 {
            return Err(bad());
        }
        let pow = num_traits::pow(BigInt::from(10u8), scale.unsigned_abs() as usize);
        let ratio = if scale >= 0 {
            BigRational::from_integer(numer * pow)
        } else {
            BigRational::new(numer, pow)
        };
        Ok(Fraction(ratio))
    }
}

impl fmt::Display for Fraction {
    /// Terminating decimals print as decimals (`0.05`), everything else as
    /// `n/d`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let numer = self.0.numer();
        let denom = self.0.denom();
        let mut rest = denom.clone();
        let (mut twos, mut fives) = (0usize, 0usize);
        let two = BigInt::from(2u8);
        let five = BigInt::from(5u8);
        while rest.is_even() && !rest.is_zero() {
            rest /= &two;
            twos += 1;
        }
        while (&rest % &five).is_zero() {
            rest /= &five;
            fives += 1;
        }
        if !rest.is_one() {
            return write!(f, "{numer}/{denom}");
        }
        let places = twos.max(fives);
        if places == 0 {
            return write!(f, "{numer}");
        }
        let scaled = numer * num_traits::pow(BigInt::from(10u8), places) / denom;
        let (sign, mut digits) = scaled.to_radix_be(10);
        debug_assert!(sign != Sign::Minus);
        for d in digits.iter_mut() {
            *d += b'0';
        }
        let digits = String::from_utf8(digits).expect("ascii digits");
        let digits = format!("{digits:0>width$}", width = places + 1);
        let (int_part, frac_part) = digits.split_at(digits.len() - places);
        write!(f, "{int_part}.{frac_part}")
    }
}
