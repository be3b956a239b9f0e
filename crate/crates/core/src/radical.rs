//! Exact sums `Σ c_s · s^(1/d)` with rational coefficients `c_s` and `d`-th-power-free
//! integer radicands `s`.
//!
//! Real `d`-th roots of distinct `d`-th-power-free positive integers are linearly
//! independent over the rationals, so once every radicand is reduced the canonical
//! term map decides equality exactly. Signs of nonzero sums are found by certified
//! interval refinement with outward rounding; the precision is doubled up to a cap.
//!
//! Reduction uses trial division. A radicand whose cofactor cannot be certified
//! power-free within the trial bound marks the sum as uncertified: equality is then
//! only claimed for canonically identical forms and sign refinement may hit the cap.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{format_rational, Rational};

pub const DEFAULT_PRECISION_CAP: u32 = 4096;
pub const INITIAL_PRECISION: u32 = 128;
const TRIAL_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RadicalError {
    #[error("could not separate two distinct values within {bits} bits of precision")]
    PrecisionExhausted { bits: u32 },
    #[error("zero raised to a non-positive power")]
    ZeroToNonPositive,
    #[error("negative base {0} for a fractional power")]
    NegativeBase(String),
    #[error("exponent {0} out of supported range")]
    ExponentRange(String),
}

#[derive(Debug, Clone)]
pub struct RootSum {
    degree: u32,
    terms: BTreeMap<BigUint, Rational>,
    certified: bool,
    cap: u32,
}

impl RootSum {
    pub fn zero() -> Self {
        RootSum { degree: 1, terms: BTreeMap::new(), certified: true, cap: 0 }
    }

    pub fn from_rational(r: Rational) -> Self {
        let mut s = RootSum::zero();
        if !r.is_zero() {
            s.terms.insert(BigUint::one(), r);
        }
        s
    }

    /// `base^exponent` for `base ≥ 0` and a rational exponent.
    pub fn power(base: &Rational, exponent: &Rational) -> Result<Self, RadicalError> {
        if base.is_negative() {
            return Err(RadicalError::NegativeBase(format_rational(base)));
        }
        let a = exponent
            .numer()
            .to_i64()
            .filter(|a| a.unsigned_abs() <= u32::MAX as u64)
            .ok_or_else(|| RadicalError::ExponentRange(format_rational(exponent)))?;
        let degree = exponent.denom().to_u32().ok_or_else(|| RadicalError::ExponentRange(format_rational(exponent)))?;
        if base.is_zero() {
            return if a > 0 { Ok(RootSum::zero()) } else { Err(RadicalError::ZeroToNonPositive) };
        }
        let num = base.numer().magnitude().clone();
        let den = base.denom().magnitude().clone();
        let k = a.unsigned_abs() as usize;
        let (p, q) = if a >= 0 {
            (num_traits::pow(num, k), num_traits::pow(den, k))
        } else {
            (num_traits::pow(den, k), num_traits::pow(num, k))
        };
        // (p/q)^(1/d) = (p * q^(d-1))^(1/d) / q
        let radicand = &p * num_traits::pow(q.clone(), degree as usize - 1);
        let (outside, inside, certified) = extract_powers(radicand, degree);
        let coef = Rational::new(BigInt::from_biguint(Sign::Plus, outside), BigInt::from_biguint(Sign::Plus, q));
        let mut terms = BTreeMap::new();
        terms.insert(inside, coef);
        Ok(RootSum { degree, terms, certified, cap: 0 }.normalized())
    }

    pub fn with_cap(mut self, cap: u32) -> Self {
        self.cap = cap;
        self
    }

    pub fn cap(&self) -> u32 {
        if self.cap == 0 {
            DEFAULT_PRECISION_CAP
        } else {
            self.cap
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// Returns the value if it is rational.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return RootSum { cap: self.cap, ..RootSum::zero() };
        }
        let terms = self.terms.iter().map(|(s, c)| (s.clone(), c * factor)).collect();
        RootSum { degree: self.degree, terms, certified: self.certified, cap: self.cap }
    }

    fn lifted_terms(&self, degree: u32) -> BTreeMap<BigUint, Rational> {
        if degree == self.degree {
            return self.terms.clone();
        }
        let e = (degree / self.degree) as usize;
        self.terms.iter().map(|(s, c)| (num_traits::pow(s.clone(), e), c.clone())).collect()
    }

    fn combine(&self, other: &RootSum, negate_other: bool) -> RootSum {
        let degree = self.degree.lcm(&other.degree);
        let mut terms = self.lifted_terms(degree);
        for (s, c) in other.lifted_terms(degree) {
            let c = if negate_other { -c } else { c };
            let entry = terms.entry(s).or_insert_with(Rational::zero);
            *entry += c;
        }
        RootSum { degree, terms, certified: self.certified && other.certified, cap: self.cap.max(other.cap) }
            .normalized()
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| !c.is_zero());
        if self.terms.keys().all(|s| s.is_one()) {
            self.degree = 1;
        }
        self
    }

    /// Certified enclosure `[lo, hi]` with each root rounded outward at `bits` bits.
    pub fn bounds(&self, bits: u32) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for (s, c) in &self.terms {
            if s.is_one() {
                lo += c;
                hi += c;
                continue;
            }
            let (rlo, rhi) = root_bounds(s, self.degree, bits);
            if c.is_positive() {
                lo += c * rlo;
                hi += c * rhi;
            } else {
                lo += c * rhi;
                hi += c * rlo;
            }
        }
        (lo, hi)
    }

    pub fn signum(&self) -> Result<Ordering, RadicalError> {
        if self.terms.is_empty() {
            return Ok(Ordering::Equal);
        }
        if self.terms.values().all(Signed::is_positive) {
            return Ok(Ordering::Greater);
        }
        if self.terms.values().all(Signed::is_negative) {
            return Ok(Ordering::Less);
        }
        if let Some(sign) = self.float_signum() {
            return Ok(sign);
        }
        let cap = self.cap();
        let mut bits = INITIAL_PRECISION.min(cap);
        loop {
            let (lo, hi) = self.bounds(bits);
            if lo.is_positive() {
                return Ok(Ordering::Greater);
            }
            if hi.is_negative() {
                return Ok(Ordering::Less);
            }
            if bits >= cap {
                return Err(RadicalError::PrecisionExhausted { bits: cap });
            }
            bits = (bits * 2).min(cap);
        }
    }

    /// The sign from a double-precision estimate when the estimate clears its error by a wide margin.
    fn float_signum(&self) -> Option<Ordering> {
        const RANGE: std::ops::RangeInclusive<f64> = 1e-250..=1e250;
        let mut total = 0.0f64;
        let mut magnitude = 0.0f64;
        for (s, c) in &self.terms {
            let coef = c.to_f64()?;
            let root = if s.is_one() { 1.0 } else { s.to_f64()?.powf(1.0 / f64::from(self.degree)) };
            let term = coef * root;
            if !RANGE.contains(&term.abs()) || !RANGE.contains(&root) {
                return None;
            }
            total += term;
            magnitude += term.abs();
        }
        (total.abs() > 1e-6 * magnitude).then_some(if total > 0.0 { Ordering::Greater } else { Ordering::Less })
    }

    pub fn try_cmp(&self, other: &RootSum) -> Result<Ordering, RadicalError> {
        self.combine(other, true).signum()
    }
}

impl PartialEq for RootSum {
    fn eq(&self, other: &Self) -> bool {
        self.combine(other, true).is_zero()
    }
}

impl Add for &RootSum {
    type Output = RootSum;
    fn add(self, rhs: &RootSum) -> RootSum {
        self.combine(rhs, false)
    }
}

impl Sub for &RootSum {
    type Output = RootSum;
    fn sub(self, rhs: &RootSum) -> RootSum {
        self.combine(rhs, true)
    }
}

impl Neg for &RootSum {
    type Output = RootSum;
    fn neg(self) -> RootSum {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for RootSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if s.is_one() {
                write!(f, "{}", format_rational(c))?;
            } else if c.is_one() {
                write!(f, "{}^(1/{})", s, self.degree)?;
            } else {
                write!(f, "{}*{}^(1/{})", format_rational(c), s, self.degree)?;
            }
        }
        Ok(())
    }
}

/// Splits `r = outside^d * inside` with `inside` free of `d`-th powers as far as trial
/// division can certify.
fn extract_powers(mut rest: BigUint, degree: u32) -> (BigUint, BigUint, bool) {
    let mut outside = BigUint::one();
    let mut inside = BigUint::one();
    if degree == 1 {
        return (rest, inside, true);
    }
    let mut p: u64 = 2;
    while p <= TRIAL_LIMIT && BigUint::from(p * p) <= rest {
        let big_p = BigUint::from(p);
        let mut e = 0u32;
        while (&rest % &big_p).is_zero() {
            rest /= &big_p;
            e += 1;
        }
        if e > 0 {
            outside *= num_traits::pow(big_p.clone(), (e / degree) as usize);
            inside *= num_traits::pow(big_p, (e % degree) as usize);
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut certified = true;
    if !rest.is_one() {
        if BigUint::from(p * p) > rest {
            // every prime factor below p is gone, so the cofactor is prime
            inside *= rest;
        } else {
            let root = rest.nth_root(degree);
            if num_traits::pow(root.clone(), degree as usize) == rest {
                outside *= root;
            } else {
                inside *= rest;
                certified = false;
            }
        }
    }
    (outside, inside, certified)
}

/// Outward-rounded dyadic enclosure of `s^(1/d)` at `bits` fractional bits.
pub(crate) fn root_bounds(s: &BigUint, degree: u32, bits: u32) -> (Rational, Rational) {
    let scaled = s << (bits as usize * degree as usize);
    let r = scaled.nth_root(degree);
    let exact = num_traits::pow(r.clone(), degree as usize) == scaled;
    let denom = BigInt::one() << bits as usize;
    let lo_num = BigInt::from_biguint(Sign::Plus, r);
    let hi_num = if exact { lo_num.clone() } else { &lo_num + 1 };
    (Rational::new(lo_num, denom.clone()), Rational::new(hi_num, denom))
}

/// Outward-rounded enclosure of `x^(1/d)` for a rational `x ≥ 0`.
pub(crate) fn rational_root_bounds(x: &Rational, degree: u32, bits: u32) -> (Rational, Rational) {
    if degree == 1 {
        return (x.clone(), x.clone());
    }
    let num = x.numer().magnitude();
    let den = x.denom().magnitude();
    let scaled = (num << (bits as usize * degree as usize)) / den;
    let exact_div = (num << (bits as usize * degree as usize)) % den == BigUint::zero();
    let r = scaled.nth_root(degree);
    let exact = exact_div && num_traits::pow(r.clone(), degree as usize) == scaled;
    let denom = BigInt::one() << bits as usize;
    let lo_num = BigInt::from_biguint(Sign::Plus, r);
    let hi_num = if exact { lo_num.clone() } else { &lo_num + 1 };
    (Rational::new(lo_num, denom.clone()), Rational::new(hi_num, denom))
}
