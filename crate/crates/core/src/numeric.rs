//! Exact rational arithmetic.
//!
//! Every tree value, cost and bound in this crate is a [`Value`]: a reduced
//! fraction of arbitrary-precision integers. Nothing here rounds; the only
//! rounding in the crate happens inside [`crate::fpsim`].

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest decimal exponent accepted by [`parse_value`]. Bigger exponents
/// would allocate integers with tens of thousands of digits from a short
/// literal.
pub const MAX_DECIMAL_EXPONENT: u32 = 4096;

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Value(BigRational);

impl Value {
    pub fn zero() -> Self {
        Value(BigRational::zero())
    }

    pub fn one() -> Self {
        Value(BigRational::one())
    }

    /// `numer / denom`, reduced. Panics if `denom` is zero.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Value(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Value(BigRational::from_integer(n.into()))
    }

    /// `2^exp` for any integer exponent.
    pub fn pow2(exp: i64) -> Self {
        let shift = exp.unsigned_abs() as usize;
        let p = BigInt::one() << shift;
        if exp >= 0 {
            Value::from_integer(p)
        } else {
            Value(BigRational::new_raw(BigInt::one(), p))
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Value {
        Value(self.0.abs())
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Largest integer not greater than the value.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer not less than the value.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Lossy conversion for display and diagnostics only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact value of a finite `f64`. Returns `None` for NaN or infinities.
    pub fn from_f64(x: f64) -> Option<Value> {
        BigRational::from_float(x).map(Value)
    }

    /// `true` when the decimal expansion terminates, i.e. the denominator
    /// has no prime factors other than 2 and 5.
    pub fn has_terminating_decimal(&self) -> bool {
        decimal_scale(self.denom()).is_some()
    }
}

/// Number of fractional decimal digits needed to write `1/denom` exactly, or
/// `None` if the expansion does not terminate.
fn decimal_scale(denom: &BigInt) -> Option<u64> {
    let mut d = denom.magnitude().clone();
    let twos = d.trailing_zeros().unwrap_or(0);
    d >>= twos as usize;
    let five = BigUint::from(5u32);
    let mut fives = 0u64;
    loop {
        let (q, r) = d.div_rem(&five);
        if !r.is_zero() {
            break;
        }
        d = q;
        fives += 1;
    }
    d.is_one().then_some(twos.max(fives))
}

impl fmt::Display for Value {
    /// Terminating values print as plain decimals (`19`, `-1.125`); anything
    /// else prints as `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(scale) = decimal_scale(self.denom()) else {
            return write!(f, "{}/{}", self.numer(), self.denom());
        };
        if scale == 0 {
            return write!(f, "{}", self.numer());
        }
        let ten_k = BigInt::from(10u32).pow(scale as u32);
        let scaled = (self.numer() * &ten_k) / self.denom();
        let digits = scaled.magnitude().to_string();
        let scale = scale as usize;
        let padded =
            if digits.len() <= scale { format!("{}{}", "0".repeat(scale - digits.len() + 1), digits) } else { digits };
        let (int_part, frac_part) = padded.split_at(padded.len() - scale);
        let frac_part = frac_part.trim_end_matches('0');
        let sign = if self.is_negative() { "-" } else { "" };
        if frac_part.is_empty() {
            write!(f, "{sign}{int_part}")
        } else {
            write!(f, "{sign}{int_part}.{frac_part}")
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({self})")
    }
}

impl FromStr for Value {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_value(s)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_value(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! impl_from_int {
    ($($t:ty),*) => {$(
        impl From<$t> for Value {
            fn from(n: $t) -> Self {
                Value::from_integer(n)
            }
        }
    )*};
}
impl_from_int!(i8, i16, i32, i64, i128, u8, u16, u32, u64, u128, usize, BigInt);

impl From<BigRational> for Value {
    fn from(r: BigRational) -> Self {
        Value(r)
    }
}

/// Integer operands skip the gcd normalisation of general rational
/// arithmetic.
fn integer_fast_path(a: &BigRational, b: &BigRational, op: fn(&BigInt, &BigInt) -> BigInt) -> Option<BigRational> {
    (a.is_integer() && b.is_integer()).then(|| BigRational::from_integer(op(a.numer(), b.numer())))
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $fast:expr) => {
        impl $trait<Value> for Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                match $fast(&self.0, &rhs.0) {
                    Some(r) => Value(r),
                    None => Value($trait::$method(self.0, rhs.0)),
                }
            }
        }
        impl $trait<&Value> for Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                match $fast(&self.0, &rhs.0) {
                    Some(r) => Value(r),
                    None => Value($trait::$method(self.0, &rhs.0)),
                }
            }
        }
        impl $trait<Value> for &Value {
            type Output = Value;
            fn $method(self, rhs: Value) -> Value {
                match $fast(&self.0, &rhs.0) {
                    Some(r) => Value(r),
                    None => Value($trait::$method(&self.0, rhs.0)),
                }
            }
        }
        impl $trait<&Value> for &Value {
            type Output = Value;
            fn $method(self, rhs: &Value) -> Value {
                match $fast(&self.0, &rhs.0) {
                    Some(r) => Value(r),
                    None => Value($trait::$method(&self.0, &rhs.0)),
                }
            }
        }
    };
}
impl_binop!(Add, add, |a, b| integer_fast_path(a, b, |x, y| x + y));
impl_binop!(Sub, sub, |a, b| integer_fast_path(a, b, |x, y| x - y));
impl_binop!(Mul, mul, |a, b| integer_fast_path(a, b, |x, y| x * y));
// Division panics on a zero divisor, like the integer types.
impl_binop!(Div, div, |_: &BigRational, _: &BigRational| None::<BigRational>);

impl AddAssign<&Value> for Value {
    fn add_assign(&mut self, rhs: &Value) {
        if self.0.is_integer() && rhs.0.is_integer() {
            let sum = self.0.numer() + rhs.0.numer();
            self.0 = BigRational::from_integer(sum);
        } else {
            self.0 += &rhs.0;
        }
    }
}

impl AddAssign<Value> for Value {
    fn add_assign(&mut self, rhs: Value) {
        *self += &rhs;
    }
}

impl SubAssign<&Value> for Value {
    fn sub_assign(&mut self, rhs: &Value) {
        if self.0.is_integer() && rhs.0.is_integer() {
            let diff = self.0.numer() - rhs.0.numer();
            self.0 = BigRational::from_integer(diff);
        } else {
            self.0 -= &rhs.0;
        }
    }
}

impl Neg for Value {
    type Output = Value;
    fn neg(self) -> Value {
        Value(-self.0)
    }
}

impl Neg for &Value {
    type Output = Value;
    fn neg(self) -> Value {
        Value(-&self.0)
    }
}

impl Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a Value> for Value {
    fn sum<I: Iterator<Item = &'a Value>>(iter: I) -> Value {
        let mut acc = Value::zero();
        for v in iter {
            acc += v;
        }
        acc
    }
}

/// Exact sum of `values`; zero for an empty slice.
pub fn exact_sum(values: &[Value]) -> Value {
    values.iter().sum()
}

/// Unit roundoff of the standard floating-point model,
/// `fl(x+y) = (x+y)(1+d)` with `|d| <= alpha`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorModel {
    alpha: Value,
}

impl ErrorModel {
    pub fn new(alpha: Value) -> Result<Self> {
        if alpha.is_negative() || alpha >= Value::one() {
            return Err(Error::InvalidParameter(format!("unit roundoff must satisfy 0 <= alpha < 1, got {alpha}")));
        }
        Ok(ErrorModel { alpha })
    }

    /// Round-to-nearest with `bits` significand bits: `alpha = 2^-bits`.
    pub fn binary(bits: u32) -> Self {
        ErrorModel { alpha: Value::pow2(-i64::from(bits)) }
    }

    /// IEEE-754 binary64.
    pub fn double() -> Self {
        Self::binary(53)
    }

    pub fn alpha(&self) -> &Value {
        &self.alpha
    }

    /// `alpha * cost`.
    pub fn scale(&self, cost: &Value) -> Value {
        &self.alpha * cost
    }
}

impl Default for ErrorModel {
    fn default() -> Self {
        Self::double()
    }
}

/// Parses a decimal integer, decimal fraction, scientific-notation literal or
/// `p/q` fraction into the exact rational it denotes.
///
/// `"0.1"` is exactly `1/10`, never the nearest binary double.
pub fn parse_value(text: &str) -> Result<Value> {
    let token = text.trim();
    let fail = |reason: &'static str| Error::ParseValue { token: token.to_string(), reason };

    if token.is_empty() {
        return Err(fail("empty literal"));
    }

    let (negative, body) = match token.as_bytes()[0] {
        b'-' => (true, &token[1..]),
        b'+' => (false, &token[1..]),
        _ => (false, token),
    };

    if let Some((num, den)) = body.split_once('/') {
        if !is_digits(num) || !is_digits(den) {
            return Err(fail("fraction must be digits '/' digits"));
        }
        let num: BigInt = num.parse().map_err(|_| fail("bad numerator"))?;
        let den: BigInt = den.parse().map_err(|_| fail("bad denominator"))?;
        if den.is_zero() {
            return Err(fail("zero denominator"));
        }
        let v = Value::new(num, den);
        return Ok(if negative { -v } else { v });
    }

    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };

    let (int_digits, frac_digits) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_digits.is_empty() && frac_digits.is_empty() {
        return Err(fail("missing digits"));
    }
    if !(int_digits.is_empty() || is_digits(int_digits)) || !(frac_digits.is_empty() || is_digits(frac_digits)) {
        return Err(fail("unexpected character"));
    }

    let exp: i64 = match exponent {
        None => 0,
        Some(e) => {
            let (eneg, edigits) = match e.as_bytes().first() {
                Some(b'-') => (true, &e[1..]),
                Some(b'+') => (false, &e[1..]),
                _ => (false, e),
            };
            if !is_digits(edigits) {
                return Err(fail("malformed exponent"));
            }
            let mag: u32 = edigits
                .parse()
                .ok()
                .filter(|m| *m <= MAX_DECIMAL_EXPONENT)
                .ok_or_else(|| fail("exponent out of range"))?;
            if eneg {
                -i64::from(mag)
            } else {
                i64::from(mag)
            }
        }
    };

    let digits = format!("{int_digits}{frac_digits}");
    let significand: BigInt = digits.parse().map_err(|_| fail("unexpected character"))?;
    let shift = exp - frac_digits.len() as i64;
    if shift.unsigned_abs() > 2 * u64::from(MAX_DECIMAL_EXPONENT) {
        return Err(fail("exponent out of range"));
    }
    let ten_pow = BigInt::from(10u32).pow(shift.unsigned_abs() as u32);
    let v = if shift >= 0 { Value::from_integer(significand * ten_pow) } else { Value::new(significand, ten_pow) };
    Ok(if negative { -v } else { v })
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(n: i64, d: i64) -> Value {
        Value::new(n, d)
    }

    #[test]
    fn parses_exact_decimals() {
        assert_eq!(parse_value("1.25").unwrap(), v(5, 4));
        assert_eq!(parse_value("-3e2").unwrap(), v(-300, 1));
        assert_eq!(parse_value("0.1").unwrap(), v(1, 10));
        assert_eq!(parse_value("1.1").unwrap(), v(11, 10));
        assert_eq!(parse_value("+.5").unwrap(), v(1, 2));
        assert_eq!(parse_value("7.").unwrap(), v(7, 1));
        assert_eq!(parse_value("2.5E-3").unwrap(), v(1, 400));
        assert_eq!(parse_value("-1/3").unwrap(), v(-1, 3));
        assert_eq!(parse_value("6/4").unwrap(), v(3, 2));
        assert_eq!(parse_value(" 42 ").unwrap(), v(42, 1));
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", "-", ".", "1..2", "1e", "e5", "abc", "1/0", "1/-2", "--1", "1e99999", "0x10", "1 2"] {
            let err = parse_value(bad).unwrap_err();
            match err {
                Error::ParseValue { ref token, .. } => assert_eq!(token, bad.trim()),
                other => panic!("unexpected error {other:?}"),
            }
        }
    }

    #[test]
    fn exact_sum_examples() {
        assert_eq!(exact_sum(&[1.into(), 2.into(), 3.into()]), Value::from(6));
        assert_eq!(exact_sum(&[]), Value::zero());
        assert_eq!(exact_sum(&[v(1, 10), v(2, 10)]), v(3, 10));
    }

    #[test]
    fn display_terminating_and_fractional() {
        assert_eq!(Value::from(19).to_string(), "19");
        assert_eq!(v(9, 8).to_string(), "1.125");
        assert_eq!(v(-3, 1000).to_string(), "-0.003");
        assert_eq!(v(1, 3).to_string(), "1/3");
        assert_eq!(v(-7, 12).to_string(), "-7/12");
        assert_eq!(Value::zero().to_string(), "0");
        assert_eq!(Value::pow2(-3).to_string(), "0.125");
    }

    #[test]
    fn zero_is_zero_over_one() {
        let z = v(0, 17);
        assert!(z.denom().is_one());
        assert!(z.numer().is_zero());
    }

    #[test]
    fn error_model_bounds() {
        assert!(ErrorModel::new(Value::zero()).is_ok());
        assert!(ErrorModel::new(Value::one()).is_err());
        assert!(ErrorModel::new(v(-1, 8)).is_err());
        let m = ErrorModel::new(v(1, 8)).unwrap();
        assert_eq!(m.scale(&9.into()), v(9, 8));
        assert_eq!(ErrorModel::new(v(1, 1000)).unwrap().scale(&3.into()), v(3, 1000));
    }

    fn arb_value() -> impl Strategy<Value = Value> {
        (any::<i64>(), 1i64..1_000_000).prop_map(|(n, d)| Value::new(n, d))
    }

    proptest! {
        #[test]
        fn integer_fast_path_matches_rational_arithmetic(a in any::<i64>(), b in any::<i64>(), c in 1i64..50) {
            let (ra, rb) = (BigRational::from_integer(a.into()), BigRational::from_integer(b.into()));
            let (va, vb) = (Value::from(a), Value::from(b));
            prop_assert_eq!((&va + &vb).0, &ra + &rb);
            prop_assert_eq!((&va - &vb).0, &ra - &rb);
            prop_assert_eq!((&va * &vb).0, &ra * &rb);
            let mut acc = va.clone();
            acc += &vb;
            acc -= &Value::new(1, c);
            prop_assert_eq!(acc.0, &ra + &rb - BigRational::new(1.into(), c.into()));
        }

        #[test]
        fn add_then_sub_is_identity(a in arb_value(), b in arb_value()) {
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn order_is_translation_invariant(a in arb_value(), b in arb_value(), c in arb_value()) {
            prop_assume!(a < b);
            prop_assert!(&a + &c < &b + &c);
        }

        #[test]
        fn display_parses_back(a in arb_value()) {
            prop_assert_eq!(parse_value(&a.to_string()).unwrap(), a);
        }

        #[test]
        fn reduced_form(a in arb_value()) {
            prop_assert!(a.denom().is_positive());
            prop_assert!(a.numer().gcd(a.denom()).is_one() || a.is_zero());
        }
    }
}
