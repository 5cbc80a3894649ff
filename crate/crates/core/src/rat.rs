//! Exact rational numbers.
//!
//! Every size, load and capacity in the crate is a [`Rat`]. Values are always
//! kept in canonical form (positive denominator, numerator and denominator
//! coprime), so structural equality is numeric equality.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest denominator accepted when parsing text.
pub const MAX_PARSE_DENOMINATOR: u64 = 1_000_000_000;

/// Maximum number of fractional digits accepted in decimal notation.
pub const MAX_DECIMAL_DIGITS: usize = 9;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRatError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("`{0}` has more than {MAX_DECIMAL_DIGITS} fractional digits")]
    TooManyDigits(String),
    #[error("denominator of `{0}` exceeds {MAX_PARSE_DENOMINATOR}")]
    DenominatorTooLarge(String),
}

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `num / den`, reducing to canonical form. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num, den))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    /// Lossy conversion, for human-readable output only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_integer(n)
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        Rat(r)
    }
}

impl fmt::Display for Rat {
    /// `p` when the value is an integer, `p/q` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `p/q`, a plain integer, or a decimal `d.f` with at most nine
    /// fractional digits. Decimals are parsed exactly: `d.f` is
    /// `(d * 10^k + f) / 10^k`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRatError::Empty);
        }
        let malformed = || ParseRatError::Malformed(s.to_string());

        let value = if let Some((p, q)) = s.split_once('/') {
            let p = parse_int(p.trim()).ok_or_else(malformed)?;
            let q = parse_int(q.trim()).ok_or_else(malformed)?;
            if q.is_zero() {
                return Err(ParseRatError::ZeroDenominator(s.to_string()));
            }
            if q.is_negative() {
                return Err(malformed());
            }
            BigRational::new(p, q)
        } else if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed());
            }
            if frac.len() > MAX_DECIMAL_DIGITS {
                return Err(ParseRatError::TooManyDigits(s.to_string()));
            }
            let (negative, digits) = match whole.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, whole.strip_prefix('+').unwrap_or(whole)),
            };
            if digits.is_empty() && frac.is_empty() {
                return Err(malformed());
            }
            let whole = if digits.is_empty() {
                BigInt::zero()
            } else {
                parse_unsigned(digits).ok_or_else(malformed)?
            };
            let frac_val = parse_unsigned(frac).ok_or_else(malformed)?;
            let scale = BigInt::from(10u64.pow(frac.len() as u32));
            let mut num = whole * &scale + frac_val;
            if negative {
                num = -num;
            }
            BigRational::new(num, scale)
        } else {
            BigRational::from_integer(parse_int(s).ok_or_else(malformed)?)
        };

        if value.denom() > &BigInt::from(MAX_PARSE_DENOMINATOR) {
            return Err(ParseRatError::DenominatorTooLarge(s.to_string()));
        }
        Ok(Rat(value))
    }
}

fn parse_unsigned(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

fn parse_int(s: &str) -> Option<BigInt> {
    match s.strip_prefix('-') {
        Some(rest) => parse_unsigned(rest).map(|v| -v),
        None => parse_unsigned(s.strip_prefix('+').unwrap_or(s)),
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($trait::$method(self.0, rhs.0))
            }
        }
        impl<'a> $trait<&'a Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &'a Rat) -> Rat {
                Rat($trait::$method(self.0, &rhs.0))
            }
        }
        impl<'a> $trait<Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($trait::$method(&self.0, rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rat> for &'a Rat {
            type Output = Rat;
            fn $method(self, rhs: &'b Rat) -> Rat {
                Rat($trait::$method(&self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn parses_all_notations() {
        assert_eq!(r("19/2"), Rat::new(19, 2));
        assert_eq!(r("12"), Rat::from(12));
        assert_eq!(r("6/1"), Rat::from(6));
        assert_eq!(r("3.5"), Rat::new(7, 2));
        assert_eq!(r("0.000000001"), Rat::new(1, 1_000_000_000));
        assert_eq!(r("-1.25"), Rat::new(-5, 4));
        assert_eq!(r(".5"), Rat::new(1, 2));
        assert_eq!(r(" 4/6 "), Rat::new(2, 3));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!("".parse::<Rat>(), Err(ParseRatError::Empty));
        assert!(matches!("1/0".parse::<Rat>(), Err(ParseRatError::ZeroDenominator(_))));
        assert!(matches!("0.1234567891".parse::<Rat>(), Err(ParseRatError::TooManyDigits(_))));
        assert!(matches!("1/1000000007".parse::<Rat>(), Err(ParseRatError::DenominatorTooLarge(_))));
        assert!("abc".parse::<Rat>().is_err());
        assert!("1.".parse::<Rat>().is_err());
        assert!("1/-2".parse::<Rat>().is_err());
        assert!("1e3".parse::<Rat>().is_err());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(Rat::new(36, 24).to_string(), "3/2");
        assert_eq!(Rat::new(24, 2).to_string(), "12");
        assert_eq!(Rat::new(-3, 6).to_string(), "-1/2");
        assert_eq!(Rat::new(3, -6).to_string(), "-1/2");
        assert_eq!(Rat::zero().to_string(), "0");
    }

    #[test]
    fn serde_uses_text_form() {
        let v = serde_json::to_string(&Rat::new(3, 2)).unwrap();
        assert_eq!(v, "\"3/2\"");
        let back: Rat = serde_json::from_str(&v).unwrap();
        assert_eq!(back, Rat::new(3, 2));
    }

    proptest! {
        #[test]
        fn add_sub_is_exact(an in -1_000_000i64..1_000_000, ad in 1i64..=1_000_000,
                            bn in -1_000_000i64..1_000_000, bd in 1i64..=1_000_000) {
            let a = Rat::new(an, ad);
            let b = Rat::new(bn, bd);
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            prop_assert_eq!(&(&a * &b) + &a, &a * &(&b + &Rat::one()));
        }

        #[test]
        fn display_parse_round_trip(n in -10_000_000i64..10_000_000, d in 1i64..=1_000_000) {
            let a = Rat::new(n, d);
            prop_assert_eq!(a.to_string().parse::<Rat>().unwrap(), a.clone());
            prop_assert!(a.denom() > &BigInt::zero());
            prop_assert!(num_integer::Integer::gcd(a.numer(), a.denom()) == BigInt::one());
        }
    }
}
