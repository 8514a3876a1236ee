//! Exact rational numbers.
//!
//! Values that fit a pair of `i64` stay on a fast path with `i128`
//! intermediates; everything else falls back to [`BigRational`]. A value
//! is kept in the small form whenever it fits, so structural equality and
//! hashing agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone)]
enum Repr {
    /// Reduced, denominator > 0.
    Small(i64, i64),
    /// Reduced by `BigRational`, and never representable as `Small`.
    Big(BigRational),
}

/// An exact rational number in lowest terms.
#[derive(Clone)]
pub struct Rational(Repr);

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(Repr::Small(n, 1))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }

    /// `num / den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i128(num as i128, den as i128)
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Self::from_big(BigRational::new(num, den))
    }

    fn from_i128(num: i128, den: i128) -> Self {
        debug_assert!(den != 0);
        let (mut n, mut d) = (num, den);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(BigRational::new_raw(n.into(), d.into()))),
        }
    }

    fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(r)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw((*n).into(), (*d).into()),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => (*n).into(),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => (*d).into(),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                Self::from_i128(*d as i128, *n as i128)
            }
            Repr::Big(r) => Self::from_big(r.recip()),
        }
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => n.div_floor(d).into(),
            Repr::Big(r) => r.floor().to_integer(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => (-num_integer::Integer::div_floor(&-n, d)).into(),
            Repr::Big(r) => r.ceil().to_integer(),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Always `p/q`, even for integers (`3/1`, `0/1`).
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    /// Decimal approximation with 10 significant digits, for display only.
    pub fn approx(&self) -> String {
        let v = self.to_f64();
        if v == 0.0 {
            return "0".to_string();
        }
        let digits = 10 - 1 - v.abs().log10().floor() as i32;
        if (0..=30).contains(&digits) {
            let s = format!("{:.*}", digits as usize, v);
            if s.contains('.') {
                s.trim_end_matches('0').trim_end_matches('.').to_string()
            } else {
                s
            }
        } else {
            format!("{:.9e}", v)
        }
    }

    fn add_ref(&self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if *b == 1 && *d == 1 {
                    return Self::from_i128(*a as i128 + *c as i128, 1);
                }
                let g = gcd_i128(*b as i128, *d as i128);
                let num = *a as i128 * (*d as i128 / g) + *c as i128 * (*b as i128 / g);
                let den = (*b as i128 / g) * *d as i128;
                Self::from_i128(num, den)
            }
            _ => Self::from_big(self.to_big() + rhs.to_big()),
        }
    }

    fn sub_ref(&self, rhs: &Rational) -> Rational {
        self.add_ref(&-rhs)
    }

    fn mul_ref(&self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if *a == 0 || *c == 0 {
                    return Rational::zero();
                }
                let g1 = gcd_i128(*a as i128, *d as i128);
                let g2 = gcd_i128(*c as i128, *b as i128);
                let num = (*a as i128 / g1) * (*c as i128 / g2);
                let den = (*b as i128 / g2) * (*d as i128 / g1);
                Self::from_i128(num, den)
            }
            _ => Self::from_big(self.to_big() * rhs.to_big()),
        }
    }

    fn div_ref(&self, rhs: &Rational) -> Rational {
        self.mul_ref(&rhs.recip())
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigint(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational::from_big(r)
    }
}

impl From<Rational> for BigRational {
    fn from(r: Rational) -> Self {
        r.to_big()
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(r) => {
                1u8.hash(state);
                r.numer().hash(state);
                r.denom().hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational::from_i128(-(*n as i128), *d as i128),
            Repr::Big(r) => Rational::from_big(-r.clone()),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $imp:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                self.$imp(rhs)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$imp(&rhs)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                (&self).$imp(rhs)
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$imp(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = self.add_ref(rhs);
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = self.add_ref(&rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = self.sub_ref(rhs);
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = self.sub_ref(&rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = self.mul_ref(rhs);
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational::one()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error returned when a string is not an integer, fraction or decimal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `-3`, `2/5`, `0.58`, `-.5`, `1.25/3` is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            return Ok(Rational::from_bigints(p, q));
        }
        if let Some((int, frac)) = t.split_once('.') {
            let (neg, int) = match int.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, int.strip_prefix('+').unwrap_or(int)),
            };
            let valid = |d: &str| d.chars().all(|c| c.is_ascii_digit());
            if !valid(int) || !valid(frac) || (int.is_empty() && frac.is_empty()) {
                return Err(err());
            }
            let digits = format!("{int}{frac}");
            let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| err())? };
            let den = num_traits::pow(BigInt::from(10), frac.len());
            let r = Rational::from_bigints(num, den);
            return Ok(if neg { -r } else { r });
        }
        let n: BigInt = t.parse().map_err(|_| err())?;
        Ok(Rational::from_bigint(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Shorthand for `Rational::new(num, den)`.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Least common multiple of the denominators, and the numerators scaled to it.
pub fn common_denominator(values: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let mut lcm = BigInt::one();
    for v in values {
        lcm = lcm.lcm(&v.denom());
    }
    let scaled = values.iter().map(|v| v.numer() * (&lcm / v.denom())).collect();
    (scaled, lcm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_literals() {
        assert_eq!("2/5".parse::<Rational>().unwrap(), q(2, 5));
        assert_eq!("-4/10".parse::<Rational>().unwrap(), q(-2, 5));
        assert_eq!("0.58".parse::<Rational>().unwrap(), q(29, 50));
        assert_eq!("-.5".parse::<Rational>().unwrap(), q(-1, 2));
        assert_eq!("7".parse::<Rational>().unwrap(), q(7, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert!(".".parse::<Rational>().is_err());
    }

    #[test]
    fn display_forms() {
        assert_eq!(q(6, 4).to_string(), "3/2");
        assert_eq!(q(4, 2).to_string(), "2");
        assert_eq!(q(4, 2).to_fraction_string(), "2/1");
        assert_eq!(Rational::zero().to_fraction_string(), "0/1");
        assert_eq!(q(1, 3).approx(), "0.3333333333");
        assert_eq!(q(2, 5).approx(), "0.4");
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rational::from_integer(i64::MAX);
        let sum = &big + &big;
        assert_eq!(sum.numer(), BigInt::from(i64::MAX) * 2);
        let back = &sum - &big;
        assert_eq!(back, big);
        assert!(matches!(back.0, Repr::Small(..)));
        let tiny = Rational::new(1, i64::MAX);
        let prod = &tiny * &tiny;
        assert_eq!(&prod * &big * &big, Rational::one());
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(q(7, 2).floor(), BigInt::from(3));
        assert_eq!(q(7, 2).ceil(), BigInt::from(4));
        assert_eq!(q(-7, 2).floor(), BigInt::from(-4));
        assert_eq!(q(-7, 2).ceil(), BigInt::from(-3));
        assert_eq!(q(4, 1).ceil(), BigInt::from(4));
    }

    #[test]
    fn serde_uses_fraction_strings() {
        let s = serde_json::to_string(&q(-3, 6)).unwrap();
        assert_eq!(s, "\"-1/2\"");
        let back: Rational = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q(-1, 2));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        prop_oneof![
            (-1000i64..1000, 1i64..1000).prop_map(|(n, d)| q(n, d)),
            (any::<i64>(), 1i64..i64::MAX).prop_map(|(n, d)| q(n, d)),
        ]
    }

    proptest! {
        #[test]
        fn field_ops_agree_with_bigrational(a in arb_rational(), b in arb_rational()) {
            let (ba, bb): (BigRational, BigRational) = (a.clone().into(), b.clone().into());
            prop_assert_eq!(BigRational::from(&a + &b), &ba + &bb);
            prop_assert_eq!(BigRational::from(&a - &b), &ba - &bb);
            prop_assert_eq!(BigRational::from(&a * &b), &ba * &bb);
            if !b.is_zero() {
                prop_assert_eq!(BigRational::from(&a / &b), &ba / &bb);
            }
            prop_assert_eq!(a.cmp(&b), ba.cmp(&bb));
        }
    }
}
