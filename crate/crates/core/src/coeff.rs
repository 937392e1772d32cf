//! Exact coefficients in `Q[e]/(e^p)`.
//!
//! A [`Coefficient`] is a truncated polynomial in a nilpotent symbol `e`
//! with arbitrary-precision rational parts. `p = 1` is plain `Q`. Every
//! value in one computation shares the same `p`; the arithmetic operators
//! panic on a mismatch, the `checked_*` methods report it instead.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("{0} is not a unit")]
    NonUnit(String),
    #[error("nilpotency orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("nilpotency order must be at least 1")]
    ZeroOrder,
    #[error("cannot embed {0} into order {1}")]
    Embed(String, usize),
    #[error("cannot parse coefficient {0:?}")]
    Parse(String),
}

/// Element of `Q[e]/(e^p)`; `parts[i]` is the coefficient of `e^i`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Coefficient {
    parts: Vec<BigRational>,
}

impl Coefficient {
    pub fn zero(p: usize) -> Self {
        assert!(p >= 1, "nilpotency order must be at least 1");
        Coefficient { parts: vec![BigRational::zero(); p] }
    }

    pub fn one(p: usize) -> Self {
        Self::from_int(1, p)
    }

    pub fn from_int(n: i64, p: usize) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)), p)
    }

    pub fn from_ratio(num: i64, den: i64, p: usize) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()), p)
    }

    pub fn from_rational(r: BigRational, p: usize) -> Self {
        let mut c = Self::zero(p);
        c.parts[0] = r;
        c
    }

    /// The nilpotent generator `e`. For `p = 1` this is zero.
    pub fn epsilon(p: usize) -> Self {
        let mut c = Self::zero(p);
        if p > 1 {
            c.parts[1] = BigRational::one();
        }
        c
    }

    pub fn from_parts(parts: Vec<BigRational>) -> Result<Self, CoeffError> {
        if parts.is_empty() {
            return Err(CoeffError::ZeroOrder);
        }
        Ok(Coefficient { parts })
    }

    pub fn order(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[BigRational] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &BigRational {
        &self.parts[i]
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.parts[0].is_one() && self.parts[1..].iter().all(Zero::is_zero)
    }

    /// A unit iff the `e^0` part is nonzero.
    pub fn is_unit(&self) -> bool {
        !self.parts[0].is_zero()
    }

    /// True when only the `e^0` part may be nonzero.
    pub fn is_scalar(&self) -> bool {
        self.parts[1..].iter().all(Zero::is_zero)
    }

    pub fn is_integer(&self) -> bool {
        self.parts.iter().all(|r| r.is_integer())
    }

    fn check(&self, other: &Self) -> Result<(), CoeffError> {
        if self.order() != other.order() {
            Err(CoeffError::OrderMismatch(self.order(), other.order()))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, CoeffError> {
        self.check(other)?;
        let parts = self.parts.iter().zip(&other.parts).map(|(a, b)| a + b).collect();
        Ok(Coefficient { parts })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, CoeffError> {
        self.check(other)?;
        let parts = self.parts.iter().zip(&other.parts).map(|(a, b)| a - b).collect();
        Ok(Coefficient { parts })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, CoeffError> {
        self.check(other)?;
        let p = self.order();
        if p == 1 {
            return Ok(Coefficient { parts: vec![mul_q(&self.parts[0], &other.parts[0])] });
        }
        let mut parts = vec![BigRational::zero(); p];
        for (i, a) in self.parts.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.parts[..p - i].iter().enumerate() {
                if !b.is_zero() {
                    add_q(&mut parts[i + j], &mul_q(a, b));
                }
            }
        }
        Ok(Coefficient { parts })
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Coefficient { parts: self.parts.iter().map(|a| mul_q(a, r)).collect() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&BigRational::from_integer(n.into()))
    }

    /// Inverse through the geometric series of the nilpotent part.
    pub fn invert(&self) -> Result<Self, CoeffError> {
        if !self.is_unit() {
            return Err(CoeffError::NonUnit(self.to_string()));
        }
        let a0 = self.parts[0].recip();
        let p = self.order();
        // self = parts[0] * (1 + n) with n nilpotent
        let mut n = self.scale(&a0);
        n.parts[0] = BigRational::zero();
        let minus_n = -&n;
        let mut sum = Self::one(p);
        let mut power = Self::one(p);
        for _ in 1..p {
            power = &power * &minus_n;
            if power.is_zero() {
                break;
            }
            sum += &power;
        }
        Ok(sum.scale(&a0))
    }

    pub fn pow(&self, exp: i64) -> Result<Self, CoeffError> {
        let base = if exp < 0 { self.invert()? } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::one(self.order());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }

    /// Reinterprets in order `p`: truncation is always allowed, widening
    /// only for scalars.
    pub fn embed(&self, p: usize) -> Result<Self, CoeffError> {
        if p == 0 {
            return Err(CoeffError::ZeroOrder);
        }
        if p <= self.order() {
            return Ok(Coefficient { parts: self.parts[..p].to_vec() });
        }
        if !self.is_scalar() {
            return Err(CoeffError::Embed(self.to_string(), p));
        }
        Ok(Self::from_rational(self.parts[0].clone(), p))
    }

    /// Least common multiple of the denominators of all parts.
    pub fn denominator(&self) -> BigInt {
        self.parts.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
    }

    /// Parses the canonical rendering (`"1/2 - 3*e^2"`) at order `p`.
    pub fn parse(s: &str, p: usize) -> Result<Self, CoeffError> {
        let err = || CoeffError::Parse(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err());
        }
        let mut out = Self::zero(p);
        let bytes = compact.as_bytes();
        let mut start = 0;
        while start < bytes.len() {
            let mut sign = BigRational::one();
            let mut i = start;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            }
            let mut end = i;
            while end < bytes.len() && bytes[end] != b'+' && bytes[end] != b'-' {
                end += 1;
            }
            let body = &compact[i..end];
            if body.is_empty() {
                return Err(err());
            }
            let (scalar, power) = match body.find('e') {
                None => (body, 0usize),
                Some(pos) => {
                    let tail = &body[pos + 1..];
                    let k = if tail.is_empty() {
                        1
                    } else {
                        tail.strip_prefix('^').ok_or_else(err)?.parse().map_err(|_| err())?
                    };
                    let head = &body[..pos];
                    let head = if head.is_empty() { "1" } else { head.strip_suffix('*').ok_or_else(err)? };
                    (head, k)
                }
            };
            let r = parse_rational(scalar).ok_or_else(err)?;
            if power >= p {
                return Err(err());
            }
            out.parts[power] += sign * r;
            start = end;
        }
        Ok(out)
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n.parse().ok()?, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Product skipping the gcd when both factors are integers.
fn mul_q(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_integer() && b.is_integer() {
        BigRational::from_integer(a.numer() * b.numer())
    } else {
        a * b
    }
}

/// `a += b`, skipping the gcd when both are integers.
fn add_q(a: &mut BigRational, b: &BigRational) {
    if a.is_integer() && b.is_integer() {
        *a = BigRational::from_integer(a.numer() + b.numer());
    } else {
        *a += b;
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, r) in self.parts.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            let negative = r.is_negative();
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            let abs = r.abs();
            match i {
                0 => f.write_str(&fmt_rational(&abs))?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{}*", fmt_rational(&abs))?;
                    }
                    if i == 1 {
                        f.write_str("e")?;
                    } else {
                        write!(f, "e^{i}")?;
                    }
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&Coefficient> for &Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: &Coefficient) -> Coefficient {
                self.$checked(rhs).expect("coefficient order mismatch")
            }
        }
        impl $tr<Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: Coefficient) -> Coefficient {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Coefficient> for Coefficient {
            type Output = Coefficient;
            fn $method(self, rhs: &Coefficient) -> Coefficient {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &Coefficient) {
        assert_eq!(self.order(), rhs.order(), "coefficient order mismatch");
        for (a, b) in self.parts.iter_mut().zip(&rhs.parts) {
            if !b.is_zero() {
                add_q(a, b);
            }
        }
    }
}

impl SubAssign<&Coefficient> for Coefficient {
    fn sub_assign(&mut self, rhs: &Coefficient) {
        assert_eq!(self.order(), rhs.order(), "coefficient order mismatch");
        for (a, b) in self.parts.iter_mut().zip(&rhs.parts) {
            if !b.is_zero() {
                add_q(a, &-b);
            }
        }
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient { parts: self.parts.iter().map(|a| -a).collect() }
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntegralityVerdict {
    Integer,
    JLocal,
    Rational,
}

impl fmt::Display for IntegralityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntegralityVerdict::Integer => "INTEGER",
            IntegralityVerdict::JLocal => "J_LOCAL",
            IntegralityVerdict::Rational => "RATIONAL",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Integrality {
    pub verdict: IntegralityVerdict,
    pub denominator: BigInt,
}

/// Classifies `c` as integral, integral after inverting `j`, or neither.
///
/// For `p > 1` the denominator is the lcm over all parts. `j = 0` never
/// yields `JLocal`.
pub fn integrality_profile(c: &Coefficient, j: i64) -> Integrality {
    let denominator = c.denominator();
    let verdict = if denominator.is_one() {
        IntegralityVerdict::Integer
    } else if j == 0 {
        IntegralityVerdict::Rational
    } else {
        let j = BigInt::from(j).abs();
        let mut rest = denominator.clone();
        loop {
            let g = rest.gcd(&j);
            if g.is_one() {
                break;
            }
            rest /= g;
        }
        if rest.is_one() {
            IntegralityVerdict::JLocal
        } else {
            IntegralityVerdict::Rational
        }
    };
    Integrality { verdict, denominator }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(parts: &[(i64, i64)]) -> Coefficient {
        Coefficient::from_parts(parts.iter().map(|&(n, d)| BigRational::new(n.into(), d.into())).collect()).unwrap()
    }

    #[test]
    fn invert_examples() {
        assert_eq!(Coefficient::from_int(2, 1).invert().unwrap(), Coefficient::from_ratio(1, 2, 1));
        let x = c(&[(1, 1), (1, 1), (0, 1)]);
        let inv = x.invert().unwrap();
        assert_eq!(inv, c(&[(1, 1), (-1, 1), (1, 1)]));
        assert!((&x * &inv).is_one());
        assert!(matches!(Coefficient::epsilon(2).invert(), Err(CoeffError::NonUnit(_))));
    }

    #[test]
    fn epsilon_power_vanishes() {
        for p in 1..7 {
            let e = Coefficient::epsilon(p);
            let mut acc = Coefficient::one(p);
            for _ in 0..p {
                acc = &acc * &e;
            }
            assert!(acc.is_zero(), "e^{p} != 0 at p = {p}");
        }
    }

    #[test]
    fn integrality_examples() {
        let v = integrality_profile(&Coefficient::from_ratio(3, 8, 1), 2);
        assert_eq!(v.verdict, IntegralityVerdict::JLocal);
        assert_eq!(v.denominator, BigInt::from(8));
        assert_eq!(integrality_profile(&Coefficient::from_int(5, 1), 3).verdict, IntegralityVerdict::Integer);
        assert_eq!(integrality_profile(&Coefficient::from_ratio(1, 6, 1), 2).verdict, IntegralityVerdict::Rational);
        assert_eq!(integrality_profile(&Coefficient::from_ratio(1, 6, 1), -6).verdict, IntegralityVerdict::JLocal);
        assert_eq!(integrality_profile(&Coefficient::from_ratio(1, 2, 1), 0).verdict, IntegralityVerdict::Rational);
    }

    #[test]
    fn rendering() {
        assert_eq!(Coefficient::from_ratio(-3, 4, 1).to_string(), "-3/4");
        assert_eq!(Coefficient::zero(3).to_string(), "0");
        assert_eq!(c(&[(1, 1), (1, 1), (0, 1)]).to_string(), "1 + e");
        assert_eq!(c(&[(0, 1), (1, 1), (-1, 2)]).to_string(), "e - 1/2*e^2");
        assert_eq!(c(&[(0, 1), (-1, 1), (0, 1), (2, 3)]).to_string(), "-e + 2/3*e^3");
    }

    #[test]
    fn order_mismatch_is_reported() {
        let a = Coefficient::one(1);
        let b = Coefficient::one(2);
        assert_eq!(a.checked_add(&b), Err(CoeffError::OrderMismatch(1, 2)));
        assert!(Coefficient::epsilon(3).embed(5).is_err());
        assert_eq!(Coefficient::from_int(4, 1).embed(3).unwrap(), Coefficient::from_int(4, 3));
    }

    fn arb_coeff(p: usize) -> impl Strategy<Value = Coefficient> {
        proptest::collection::vec((-30i64..30, 1i64..12), p).prop_map(|v| {
            Coefficient::from_parts(v.into_iter().map(|(n, d)| BigRational::new(n.into(), d.into())).collect()).unwrap()
        })
    }

    fn arb_triple() -> impl Strategy<Value = (Coefficient, Coefficient, Coefficient)> {
        (1usize..5).prop_flat_map(|p| (arb_coeff(p), arb_coeff(p), arb_coeff(p)))
    }

    proptest! {
        #[test]
        fn ring_axioms((a, b, c) in arb_triple()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn inversion((a, _, _) in arb_triple()) {
            prop_assume!(a.is_unit());
            let inv = a.invert().unwrap();
            prop_assert!((&a * &inv).is_one());
            prop_assert_eq!(inv.invert().unwrap(), a);
        }

        #[test]
        fn parse_inverts_display((a, _, _) in arb_triple()) {
            prop_assert_eq!(Coefficient::parse(&a.to_string(), a.order()).unwrap(), a);
        }
    }
}
