//! Exact univariate polynomials over the rationals.
//!
//! Used to re-derive the k = 2 cycle quadratic at rational parameter points:
//! the numerator of `f(f(z)) - z` is divided by the numerator of
//! `f(z) - z`, and the quotient is compared with the closed-form
//! coefficients from [`crate::analysis`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::analysis::printed_coeffs;
use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Coefficients in ascending degree; never has a trailing zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPoly {
    coeffs: Vec<Rational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `c0 + c1 z`.
    pub fn linear(c0: Rational, c1: Rational) -> Self {
        Self::new(vec![c0, c1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut out = Self::constant(Rational::one());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
    }

    /// Long division: `self = divisor * quotient + remainder` with
    /// `deg(remainder) < deg(divisor)`.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self)> {
        let lead = divisor.leading().ok_or(Error::ZeroDivisor)?;
        let dd = divisor.degree();
        let mut rem = self.coeffs.clone();
        if rem.len() < divisor.coeffs.len() {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for shift in (0..quot.len()).rev() {
            let factor = &rem[shift + dd] / lead;
            if factor.is_zero() {
                continue;
            }
            for (i, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] -= &factor * c;
            }
            quot[shift] = factor;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// `lambda` with `self = lambda * other`, if it exists.
    pub fn scalar_multiple_of(&self, other: &Self) -> Option<Rational> {
        if self.coeffs.len() != other.coeffs.len() {
            return None;
        }
        if other.is_zero() {
            return Some(Rational::one());
        }
        let lambda = self.leading()? / other.leading()?;
        (*self == other.scale(&lambda)).then_some(lambda)
    }
}

impl Add<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul<&RationalPoly> for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            let mag = if i == 0 || mag.is_integer() { mag.to_string() } else { format!("({mag})") };
            match i {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag}*z")?,
                _ => write!(f, "{mag}*z^{i}")?,
            }
        }
        Ok(())
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.32` exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidParameter(format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if frac_part.chars().any(|c| !c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let d = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok(Rational::new(n, d))
}

/// Numerators of the cycle equation at one rational parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleQuotient {
    pub theta: Rational,
    pub r: Rational,
    pub k: usize,
    /// Numerator of `f(f(z)) - z`.
    pub period_two: RationalPoly,
    /// Numerator of `f(z) - z`.
    pub fixed: RationalPoly,
    /// `period_two / fixed` (the remainder is zero).
    pub quotient: RationalPoly,
}

/// Builds `N(z) = (2 theta + r z)^k`, `D(z) = (theta^2 + theta z + r)^k`,
/// the period-two numerator `(2 theta D + r N)^k - z (theta^2 D + theta N + r D)^k`
/// and the fixed-point numerator `N - z D`, then divides exactly.
pub fn cycle_quotient(theta: &Rational, r: &Rational, k: usize) -> Result<CycleQuotient> {
    if !theta.is_positive() || !r.is_positive() {
        return Err(Error::InvalidParameter("theta and r must be positive".into()));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let two = Rational::from_integer(2.into());
    let z = RationalPoly::linear(Rational::zero(), Rational::one());
    let inner_num = RationalPoly::linear(&two * theta, r.clone());
    let inner_den = RationalPoly::linear(theta * theta + r, theta.clone());
    let num = inner_num.pow(k);
    let den = inner_den.pow(k);

    let outer_num = &den.scale(&(&two * theta)) + &num.scale(r);
    let outer_den = &(&den.scale(&(theta * theta)) + &num.scale(theta)) + &den.scale(r);
    let period_two = &outer_num.pow(k) - &(&z * &outer_den.pow(k));
    let fixed = &num - &(&z * &den);

    let (quotient, remainder) = period_two.divmod(&fixed)?;
    if !remainder.is_zero() {
        return Err(Error::NonzeroRemainder { degree: remainder.degree() });
    }
    Ok(CycleQuotient { theta: theta.clone(), r: r.clone(), k, period_two, fixed, quotient })
}

/// The closed-form quadratic `a z^2 + b z + c` in exact arithmetic.
pub fn closed_form_quadratic(theta: &Rational, r: &Rational) -> RationalPoly {
    let [a, b, c] = printed_coeffs(theta, r);
    RationalPoly::new(vec![c, b, a])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticCheck {
    pub theta: String,
    pub r: String,
    pub degree_period_two: usize,
    pub degree_fixed: usize,
    pub degree_quotient: usize,
    pub remainder_zero: bool,
    pub quotient: String,
    pub closed_form: String,
    /// `quotient = scale * closed_form`, when proportional.
    pub scale: Option<String>,
    pub proportional: bool,
}

/// Divides exactly and compares against the closed-form coefficients.
pub fn verify_quadratic(theta: &Rational, r: &Rational) -> Result<QuadraticCheck> {
    let cq = cycle_quotient(theta, r, 2)?;
    let closed = closed_form_quadratic(theta, r);
    let scale = cq.quotient.scalar_multiple_of(&closed);
    Ok(QuadraticCheck {
        theta: theta.to_string(),
        r: r.to_string(),
        degree_period_two: cq.period_two.degree(),
        degree_fixed: cq.fixed.degree(),
        degree_quotient: cq.quotient.degree(),
        remainder_zero: true,
        quotient: cq.quotient.to_string(),
        closed_form: closed.to_string(),
        proportional: scale.as_ref().is_some_and(|s| !s.is_zero()),
        scale: scale.map(|s| s.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn basic_arithmetic() {
        let zm1 = RationalPoly::from_ints(&[-1, 1]);
        let zp1 = RationalPoly::from_ints(&[1, 1]);
        let z2m1 = RationalPoly::from_ints(&[-1, 0, 1]);
        assert_eq!(&zp1 * &zm1, z2m1);
        let (quot, rem) = z2m1.divmod(&zm1).unwrap();
        assert_eq!(quot, zp1);
        assert!(rem.is_zero());
        let z2p1 = RationalPoly::from_ints(&[1, 0, 1]);
        assert_eq!(z2p1.eval(&q(2, 1)), q(5, 1));
        assert_eq!(&zp1 + &zm1, RationalPoly::from_ints(&[0, 2]));
        assert_eq!(&zp1 - &zp1, RationalPoly::zero());
        assert_eq!(z2m1.divmod(&RationalPoly::zero()), Err(Error::ZeroDivisor));
    }

    #[test]
    fn quotient_at_one_one() {
        let cq = cycle_quotient(&q(1, 1), &q(1, 1), 2).unwrap();
        let target = RationalPoly::from_ints(&[36, 36, 9]);
        assert!(cq.quotient.scalar_multiple_of(&target).is_some());
        assert_eq!(closed_form_quadratic(&q(1, 1), &q(1, 1)), target);
    }

    #[test]
    fn quotient_at_half_quarter() {
        let check = verify_quadratic(&q(1, 2), &q(1, 4)).unwrap();
        assert!(check.proportional);
        assert_eq!((check.degree_period_two, check.degree_fixed, check.degree_quotient), (5, 3, 2));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational("0.32").unwrap(), q(8, 25));
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("0.1e3").is_err());
    }

    #[test]
    fn display_is_readable() {
        let p = RationalPoly::new(vec![q(1, 2), q(0, 1), q(-3, 1)]);
        assert_eq!(p.to_string(), "-3*z^2 + 1/2");
    }

    fn small_poly() -> impl Strategy<Value = RationalPoly> {
        proptest::collection::vec((-20i64..20, 1i64..6), 0..5)
            .prop_map(|cs| RationalPoly::new(cs.into_iter().map(|(n, d)| q(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn division_identity(p in small_poly(), d in small_poly()) {
            prop_assume!(!d.is_zero());
            let (quot, rem) = p.divmod(&d).unwrap();
            prop_assert_eq!(&(&d * &quot) + &rem, p);
            prop_assert!(rem.is_zero() || rem.degree() < d.degree());
        }

        #[test]
        fn eval_is_a_ring_morphism(p in small_poly(), s in small_poly(), n in -5i64..5, d in 1i64..5) {
            let x = q(n, d);
            prop_assert_eq!((&p * &s).eval(&x), p.eval(&x) * s.eval(&x));
            prop_assert_eq!((&p + &s).eval(&x), p.eval(&x) + s.eval(&x));
        }
    }
}
