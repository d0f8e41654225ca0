//! Exact rational scalars and vectors.
//!
//! Every quantity in the reduction (base points, supporting prices, ε, M,
//! level offsets) is a [`Rational`]. Values are kept in canonical form
//! (positive denominator, coprime parts) after every operation so that
//! equality, hashing and ordering are structural.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericsError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Arbitrary-precision fraction in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    numer: BigInt,
    denom: BigInt,
}

impl Rational {
    /// Builds `numer / denom`, reducing to canonical form.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, NumericsError> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(NumericsError::ZeroDenominator);
        }
        Ok(Self::canonical(numer.into(), denom))
    }

    /// Shorthand for literals known to have a nonzero denominator.
    ///
    /// Panics when `denom == 0`.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational { numer: n.into(), denom: BigInt::one() }
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    fn canonical(numer: BigInt, denom: BigInt) -> Self {
        let g = numer.gcd(&denom);
        let (mut numer, mut denom) = if g.is_one() || g.is_zero() {
            (numer, denom)
        } else {
            (numer / &g, denom / &g)
        };
        if denom.is_negative() {
            numer = -numer;
            denom = -denom;
        }
        if numer.is_zero() {
            denom = BigInt::one();
        }
        Rational { numer, denom }
    }

    pub fn numer(&self) -> &BigInt {
        &self.numer
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.numer.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.numer.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.denom.is_one()
    }

    pub fn abs(&self) -> Self {
        Rational { numer: self.numer.abs(), denom: self.denom.clone() }
    }

    pub fn recip(&self) -> Result<Self, NumericsError> {
        if self.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Self::canonical(self.denom.clone(), self.numer.clone()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self, NumericsError> {
        if rhs.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Self::canonical(&self.numer * &rhs.denom, &self.denom * &rhs.numer))
    }

    /// `2^exp` as a rational.
    pub fn pow2(exp: u32) -> Self {
        Self::from_integer(BigInt::one() << exp as usize)
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.denom == other.denom {
            return self.numer.cmp(&other.numer);
        }
        (&self.numer * &other.denom).cmp(&(&other.numer * &self.denom))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        if self.denom == rhs.denom {
            return Rational::canonical(&self.numer + &rhs.numer, self.denom.clone());
        }
        Rational::canonical(
            &self.numer * &rhs.denom + &rhs.numer * &self.denom,
            &self.denom * &rhs.denom,
        )
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        if self.denom == rhs.denom {
            return Rational::canonical(&self.numer - &rhs.numer, self.denom.clone());
        }
        Rational::canonical(
            &self.numer * &rhs.denom - &rhs.numer * &self.denom,
            &self.denom * &rhs.denom,
        )
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        if self.is_zero() || rhs.is_zero() {
            return Rational::zero();
        }
        Rational::canonical(&self.numer * &rhs.numer, &self.denom * &rhs.denom)
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    /// Panics on division by zero; use [`Rational::checked_div`] otherwise.
    fn div(self, rhs: &Rational) -> Rational {
        self.checked_div(rhs).expect("division by zero")
    }
}

macro_rules! forward_owned_binop {
    ($($trait:ident $method:ident),*) => {$(
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational { (&self).$method(&rhs) }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational { (&self).$method(rhs) }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational { self.$method(&rhs) }
        }
    )*};
}

forward_owned_binop!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational { numer: -self.numer, denom: self.denom }
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational { numer: -&self.numer, denom: self.denom.clone() }
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom.is_one() {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_int(s: &str, allow_sign: bool) -> Option<BigInt> {
    let digits = if allow_sign {
        s.strip_prefix(['-', '+']).unwrap_or(s)
    } else {
        s
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.strip_prefix('+').unwrap_or(s).parse().ok()
}

impl FromStr for Rational {
    type Err = NumericsError;

    /// Accepts `[sign]int` or `[sign]int/int` with a positive denominator.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NumericsError::Parse(s.to_string());
        match s.split_once('/') {
            None => parse_int(s, true).map(Rational::from_integer).ok_or_else(bad),
            Some((n, d)) => {
                let numer = parse_int(n, true).ok_or_else(bad)?;
                let denom = parse_int(d, false).ok_or_else(bad)?;
                Rational::new(numer, denom)
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Outcome of a componentwise comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    StrictlyGreater,
    Equal,
    IncomparableOrLess,
}

/// Dense vector of rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RVector(Vec<Rational>);

impl RVector {
    pub fn new(entries: Vec<Rational>) -> Self {
        RVector(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        RVector(vec![Rational::zero(); dim])
    }

    /// Unit vector with a one at zero-based `index`.
    pub fn unit(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[index] = Rational::one();
        v
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        RVector(entries.iter().map(|&n| Rational::from(n)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    fn check_dim(&self, other: &RVector) -> Result<(), NumericsError> {
        if self.dim() != other.dim() {
            return Err(NumericsError::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn dot(&self, other: &RVector) -> Result<Rational, NumericsError> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).filter(|(a, b)| !a.is_zero() && !b.is_zero()).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, other: &RVector) -> Result<RVector, NumericsError> {
        self.check_dim(other)?;
        Ok(RVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &RVector) -> Result<RVector, NumericsError> {
        self.check_dim(other)?;
        Ok(RVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, c: &Rational) -> RVector {
        RVector(self.0.iter().map(|a| a * c).collect())
    }

    /// Sum of entries, i.e. the dot product with the all-ones vector.
    pub fn sum(&self) -> Rational {
        self.0.iter().cloned().sum()
    }

    /// Pads with zeros up to `dim` (the embedding `x ↦ (x, 0, …, 0)`).
    pub fn embed(&self, dim: usize) -> RVector {
        assert!(dim >= self.dim(), "cannot embed dimension {} into {}", self.dim(), dim);
        let mut out = self.0.clone();
        out.resize(dim, Rational::zero());
        RVector(out)
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> RVector {
        RVector(self.0[range].to_vec())
    }

    pub fn concat(&self, other: &RVector) -> RVector {
        let mut out = self.0.clone();
        out.extend(other.0.iter().cloned());
        RVector(out)
    }

    /// Componentwise `self ≥ other`.
    pub fn ge(&self, other: &RVector) -> Result<bool, NumericsError> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).all(|(a, b)| a >= b))
    }

    pub fn dominates(&self, other: &RVector) -> Result<Dominance, NumericsError> {
        self.check_dim(other)?;
        if self == other {
            Ok(Dominance::Equal)
        } else if self.ge(other)? {
            Ok(Dominance::StrictlyGreater)
        } else {
            Ok(Dominance::IncomparableOrLess)
        }
    }
}

impl std::ops::Index<usize> for RVector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl FromIterator<Rational> for RVector {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        RVector(iter.into_iter().collect())
    }
}

impl fmt::Debug for RVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn v(xs: &[&str]) -> RVector {
        xs.iter().map(|s| r(s)).collect()
    }

    #[test]
    fn canonical_form() {
        let x = Rational::new(6, -4).unwrap();
        assert_eq!(x.numer(), &BigInt::from(-3));
        assert_eq!(x.denom(), &BigInt::from(2));
        assert_eq!(Rational::new(0, -7).unwrap(), Rational::zero());
        assert_eq!(Rational::new(1, 0), Err(NumericsError::ZeroDenominator));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(r("-3/2"), Rational::frac(-3, 2));
        assert_eq!(r("7"), Rational::from(7));
        assert_eq!(r("+4/6").to_string(), "2/3");
        assert_eq!(r("10/5").to_string(), "2");
        for bad in ["", "1/0", "1/-2", "a", "1/", "/2", "1.5", "--1", "1/2/3"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn dot_examples() {
        assert_eq!(v(&["1/2", "1/2"]).dot(&v(&["3/2", "2/3"])).unwrap(), r("13/12"));
        assert_eq!(v(&["1/2", "1/2"]).dot(&v(&["1", "1"])).unwrap(), r("1"));
        assert_eq!(v(&["0", "0"]).dot(&v(&["5", "7"])).unwrap(), r("0"));
        assert_eq!(
            v(&["1"]).dot(&v(&["1", "2"])),
            Err(NumericsError::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn dominance_examples() {
        use Dominance::*;
        assert_eq!(v(&["2", "2"]).dominates(&v(&["1", "1"])).unwrap(), StrictlyGreater);
        assert_eq!(v(&["1", "1"]).dominates(&v(&["1", "1"])).unwrap(), Equal);
        assert_eq!(v(&["1", "1"]).dominates(&v(&["3/2", "2/3"])).unwrap(), IncomparableOrLess);
        assert_eq!(v(&["3/2", "2/3"]).dominates(&v(&["1", "1"])).unwrap(), IncomparableOrLess);
        assert!(v(&["1"]).dominates(&v(&["1", "1"])).is_err());
    }

    #[test]
    fn serde_as_strings() {
        let x = v(&["-3/2", "7"]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"["-3/2","7"]"#);
        let back: RVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<Rational>(r#""1/0""#).is_err());
    }

    #[test]
    fn embed_and_unit() {
        let z = v(&["1", "1/2"]);
        let e = z.embed(4);
        assert_eq!(e, v(&["1", "1/2", "0", "0"]));
        assert_eq!(RVector::unit(3, 2), v(&["0", "0", "1"]));
        assert_eq!(e.slice(0..2), z);
    }
}
