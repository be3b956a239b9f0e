//! p-mean welfare: exact score keys for optimization and certified decimals for reporting.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{format_rational, parse_rational, Allocation, Instance, Rational};
use crate::radical::{rational_root_bounds, RadicalError, RootSum, DEFAULT_PRECISION_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WelfareError {
    #[error("invalid welfare exponent {0:?}: expected 1, 0, a rational below 1, or -inf")]
    BadExponent(String),
    #[error(transparent)]
    Precision(#[from] RadicalError),
    #[error("score keys built under different exponents cannot be compared")]
    KeyMismatch,
}

/// The welfare exponent `p ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PExponent {
    One,
    Zero,
    /// `0 < q < 1`
    Pos(Rational),
    /// `q < 0`
    Neg(Rational),
    NegInf,
}

impl PExponent {
    pub fn from_rational(q: Rational) -> Result<Self, WelfareError> {
        if q.is_one() {
            Ok(PExponent::One)
        } else if q.is_zero() {
            Ok(PExponent::Zero)
        } else if q.is_negative() {
            Ok(PExponent::Neg(q))
        } else if q < Rational::one() {
            Ok(PExponent::Pos(q))
        } else {
            Err(WelfareError::BadExponent(format_rational(&q)))
        }
    }

    pub fn integer(q: i64) -> Result<Self, WelfareError> {
        Self::from_rational(Rational::from_integer(q.into()))
    }

    /// The finite exponent, if any.
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            PExponent::One => Some(Rational::one()),
            PExponent::Zero => Some(Rational::zero()),
            PExponent::Pos(q) | PExponent::Neg(q) => Some(q.clone()),
            PExponent::NegInf => None,
        }
    }

    /// `p ∈ (0, 1]`
    pub fn is_positive(&self) -> bool {
        matches!(self, PExponent::One | PExponent::Pos(_))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            PExponent::One | PExponent::Zero => true,
            PExponent::Neg(q) => q.is_integer(),
            PExponent::Pos(_) | PExponent::NegInf => false,
        }
    }
}

impl FromStr for PExponent {
    type Err = WelfareError;

    fn from_str(s: &str) -> Result<Self, WelfareError> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "-inf" | "-infinity" | "neginf" | "min") {
            return Ok(PExponent::NegInf);
        }
        let q = parse_rational(&t).map_err(|_| WelfareError::BadExponent(s.to_string()))?;
        PExponent::from_rational(q).map_err(|_| WelfareError::BadExponent(s.to_string()))
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(q) => write!(f, "{}", format_rational(&q)),
            None => write!(f, "-inf"),
        }
    }
}

/// How profiles are ordered when `p = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EgalitarianOrder {
    /// Minimum first, ties broken by the ascending sorted vector.
    #[default]
    Leximin,
    /// Minimum only.
    MinOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WelfareOptions {
    pub egalitarian: EgalitarianOrder,
    pub max_precision_bits: u32,
}

impl Default for WelfareOptions {
    fn default() -> Self {
        WelfareOptions { egalitarian: EgalitarianOrder::Leximin, max_precision_bits: DEFAULT_PRECISION_CAP }
    }
}

/// `v_i(A_i)` for each agent.
pub type UtilityProfile = Vec<Rational>;

pub fn utilities(inst: &Instance, alloc: &Allocation) -> UtilityProfile {
    (0..inst.n()).map(|i| inst.bundle_value(i, alloc.bundle(i))).collect()
}

#[derive(Debug, Clone)]
pub enum KeyBody {
    Exact(Rational),
    Sorted(Vec<Rational>),
    Algebraic(RootSum),
}

/// Totally orders profiles the same way `W_p` does for a fixed `p`.
///
/// `zero` is set when `p ≤ 0` and some utility is zero; all such keys are equal and
/// lie below every other key.
#[derive(Debug, Clone)]
pub struct ScoreKey {
    pub zero: bool,
    pub body: KeyBody,
}

impl ScoreKey {
    pub fn zero_welfare() -> Self {
        ScoreKey { zero: true, body: KeyBody::Exact(Rational::zero()) }
    }

    pub fn try_cmp(&self, other: &ScoreKey) -> Result<Ordering, WelfareError> {
        match (self.zero, other.zero) {
            (true, true) => return Ok(Ordering::Equal),
            (true, false) => return Ok(Ordering::Less),
            (false, true) => return Ok(Ordering::Greater),
            (false, false) => {}
        }
        match (&self.body, &other.body) {
            (KeyBody::Exact(a), KeyBody::Exact(b)) => Ok(a.cmp(b)),
            (KeyBody::Sorted(a), KeyBody::Sorted(b)) => Ok(a.cmp(b)),
            (KeyBody::Algebraic(a), KeyBody::Algebraic(b)) => Ok(a.try_cmp(b)?),
            _ => Err(WelfareError::KeyMismatch),
        }
    }

    /// Whether the welfare this key stands for is zero.
    pub fn is_zero(&self) -> bool {
        self.zero
            || match &self.body {
                KeyBody::Exact(r) => r.is_zero(),
                KeyBody::Sorted(v) => v.first().is_none_or(Zero::is_zero),
                KeyBody::Algebraic(s) => s.is_zero(),
            }
    }
}

impl fmt::Display for ScoreKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            return write!(f, "0");
        }
        match &self.body {
            KeyBody::Exact(r) => write!(f, "{}", format_rational(r)),
            KeyBody::Sorted(v) => {
                let parts: Vec<String> = v.iter().map(format_rational).collect();
                write!(f, "[{}]", parts.join(", "))
            }
            KeyBody::Algebraic(s) => write!(f, "{s}"),
        }
    }
}

/// `x^e` for an integer exponent; `x` must be nonzero when `e < 0`.
pub fn rational_pow(x: &Rational, e: i64) -> Rational {
    let k = e.unsigned_abs() as usize;
    let r = Rational::new(num_traits::pow(x.numer().clone(), k), num_traits::pow(x.denom().clone(), k));
    if e < 0 {
        r.recip()
    } else {
        r
    }
}

/// `Σ v^q` exactly, for `q > 0`.
pub fn power_sum(profile: &[Rational], q: &Rational) -> RootSum {
    profile
        .iter()
        .fold(RootSum::zero(), |acc, v| &acc + &RootSum::power(v, q).expect("nonnegative base with positive exponent"))
}

/// Monotone surrogate of `W_p`: sum for `p = 1`, product for `p = 0`, `sign(p)·Σ v^p`
/// otherwise, and the minimum (or sorted vector) for `p = -inf`.
pub fn score_key(profile: &[Rational], p: &PExponent, opts: &WelfareOptions) -> ScoreKey {
    let has_zero = profile.iter().any(Zero::is_zero);
    let exact = |r: Rational| ScoreKey { zero: false, body: KeyBody::Exact(r) };
    match p {
        PExponent::One => exact(profile.iter().sum()),
        _ if has_zero && !p.is_positive() => ScoreKey::zero_welfare(),
        PExponent::Zero => exact(profile.iter().product()),
        PExponent::Neg(q) if q.is_integer() => {
            let e = q.to_integer().to_i64().expect("exponent fits in i64");
            exact(-profile.iter().map(|v| rational_pow(v, e)).sum::<Rational>())
        }
        PExponent::Pos(q) | PExponent::Neg(q) => {
            let mut total = RootSum::zero().with_cap(opts.max_precision_bits);
            for v in profile {
                let term = RootSum::power(v, q).expect("nonnegative base with admissible exponent");
                total = &total + &term;
            }
            if q.is_negative() {
                total = -&total;
            }
            ScoreKey { zero: false, body: KeyBody::Algebraic(total) }
        }
        PExponent::NegInf => match opts.egalitarian {
            EgalitarianOrder::Leximin => {
                let mut sorted = profile.to_vec();
                sorted.sort();
                ScoreKey { zero: false, body: KeyBody::Sorted(sorted) }
            }
            EgalitarianOrder::MinOnly => exact(profile.iter().min().cloned().unwrap_or_else(Rational::zero)),
        },
    }
}

pub fn compare(a: &[Rational], b: &[Rational], p: &PExponent, opts: &WelfareOptions) -> Result<Ordering, WelfareError> {
    score_key(a, p, opts).try_cmp(&score_key(b, p, opts))
}

/// Certified enclosure of `W_p(profile)` with roots rounded outward at `bits` bits.
pub fn pmean_bounds(profile: &[Rational], p: &PExponent, bits: u32) -> (Rational, Rational) {
    let n = profile.len();
    if n == 0 {
        return (Rational::zero(), Rational::zero());
    }
    let count = Rational::from_integer(BigInt::from(n));
    if !p.is_positive() && profile.iter().any(Zero::is_zero) {
        return (Rational::zero(), Rational::zero());
    }
    match p {
        PExponent::One => {
            let mean = profile.iter().sum::<Rational>() / count;
            (mean.clone(), mean)
        }
        PExponent::NegInf => {
            let min = profile.iter().min().cloned().expect("nonempty");
            (min.clone(), min)
        }
        PExponent::Zero => {
            let product: Rational = profile.iter().product();
            rational_root_bounds(&product, n as u32, bits)
        }
        PExponent::Pos(q) | PExponent::Neg(q) => {
            let a = q.numer().to_i64().expect("exponent numerator fits in i64");
            let b = q.denom().to_u32().expect("exponent denominator fits in u32");
            let mut bits = bits;
            loop {
                let mut lo = Rational::zero();
                let mut hi = Rational::zero();
                for v in profile {
                    if v.is_zero() {
                        continue;
                    }
                    let (l, h) = rational_root_bounds(&rational_pow(v, a), b, bits);
                    lo += l;
                    hi += h;
                }
                lo /= &count;
                hi /= &count;
                // W = M^(b/a), increasing in M for a > 0 and decreasing for a < 0
                let degree = a.unsigned_abs() as u32;
                if a > 0 {
                    let w_lo = rational_root_bounds(&rational_pow(&lo, b as i64), degree, bits).0;
                    let w_hi = rational_root_bounds(&rational_pow(&hi, b as i64), degree, bits).1;
                    return (w_lo, w_hi);
                }
                if !lo.is_zero() {
                    let w_lo = rational_root_bounds(&rational_pow(&hi, -(b as i64)), degree, bits).0;
                    let w_hi = rational_root_bounds(&rational_pow(&lo, -(b as i64)), degree, bits).1;
                    return (w_lo, w_hi);
                }
                bits *= 2;
            }
        }
    }
}

/// Decimal approximation of `W_p` carrying about `bits` bits of precision.
pub fn pmean_value(profile: &[Rational], p: &PExponent, bits: u32) -> String {
    let bits = bits.max(16);
    let digits = ((bits as f64) * std::f64::consts::LOG10_2).floor() as usize - 1;
    pmean_decimal(profile, p, digits.max(3))
}

/// `W_p(profile)` rounded to `digits` significant digits.
pub fn pmean_decimal(profile: &[Rational], p: &PExponent, digits: usize) -> String {
    let guard = (digits as f64 / std::f64::consts::LOG10_2).ceil() as u32 + 32;
    let (lo, hi) = pmean_bounds(profile, p, guard);
    format_decimal(&((lo + hi) / Rational::from_integer(2.into())), digits)
}

fn pow10(e: i64) -> Rational {
    let t = num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(t)
    } else {
        Rational::new(BigInt::one(), t)
    }
}

/// Rounds `x` to `digits` significant digits (half away from zero) in plain notation.
pub fn format_decimal(x: &Rational, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let a = x.abs();
    let mut e = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    loop {
        if a < pow10(e) {
            e -= 1;
        } else if a >= pow10(e + 1) {
            e += 1;
        } else {
            break;
        }
    }
    let mut shift = digits as i64 - 1 - e;
    let scaled = &a * pow10(shift);
    let two = BigInt::from(2);
    let mut int = (scaled.numer() * &two + scaled.denom()).div_floor(&(scaled.denom() * &two));
    if int.to_string().len() > digits {
        int /= 10;
        shift -= 1;
    }
    let s = int.to_string();
    let mut out = if shift <= 0 {
        format!("{s}{}", "0".repeat((-shift) as usize))
    } else if shift as usize >= s.len() {
        format!("0.{}{s}", "0".repeat(shift as usize - s.len()))
    } else {
        let cut = s.len() - shift as usize;
        format!("{}.{}", &s[..cut], &s[cut..])
    };
    if out.contains('.') {
        out = out.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if x.is_negative() {
        out.insert(0, '-');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{integer, rational};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| integer(x)).collect()
    }

    fn key(v: &[Rational], p: &str) -> ScoreKey {
        score_key(v, &p.parse().unwrap(), &WelfareOptions::default())
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("1".parse::<PExponent>().unwrap(), PExponent::One);
        assert_eq!("0".parse::<PExponent>().unwrap(), PExponent::Zero);
        assert_eq!("-inf".parse::<PExponent>().unwrap(), PExponent::NegInf);
        assert_eq!("1/2".parse::<PExponent>().unwrap(), PExponent::Pos(rational(1, 2)));
        assert_eq!("-2".parse::<PExponent>().unwrap(), PExponent::Neg(integer(-2)));
        assert!("2".parse::<PExponent>().is_err());
        assert!("abc".parse::<PExponent>().is_err());
        assert_eq!("-1/3".parse::<PExponent>().unwrap().to_string(), "-1/3");
    }

    #[test]
    fn nash_key_is_product() {
        let k = key(&ints(&[6, 5, 1]), "0");
        assert!(!k.zero);
        assert_eq!(k.to_string(), "30");
        let z = key(&ints(&[6, 5, 0]), "0");
        assert!(z.zero);
        assert_eq!(z.try_cmp(&key(&vec![rational(1, 1000); 3], "0")).unwrap(), Ordering::Less);
    }

    #[test]
    fn harmonic_key_orders_by_reciprocal_sum() {
        let a = key(&ints(&[2, 8]), "-1");
        assert_eq!(a.to_string(), "-5/8");
        let b = key(&ints(&[4, 4]), "-1");
        assert_eq!(a.try_cmp(&b).unwrap(), Ordering::Less);
    }

    #[test]
    fn compare_examples() {
        let opts = WelfareOptions::default();
        let a = ints(&[6, 5, 1]);
        let b = vec![integer(5), integer(5), rational(11, 10)];
        assert_eq!(compare(&a, &b, &PExponent::Zero, &opts).unwrap(), Ordering::Greater);
        for p in ["1", "1/2", "0", "-1", "-3/2", "-inf"] {
            let p: PExponent = p.parse().unwrap();
            assert_eq!(compare(&ints(&[1, 1]), &ints(&[1, 1]), &p, &opts).unwrap(), Ordering::Equal);
        }
        assert_eq!(
            compare(&ints(&[0, 9]), &ints(&[1, 1]), &PExponent::integer(-1).unwrap(), &opts).unwrap(),
            Ordering::Less
        );
    }

    #[test]
    fn fractional_keys_decide_equal_algebraic_values() {
        // sqrt(1) + sqrt(16) = sqrt(4) + sqrt(9)
        let a = key(&ints(&[1, 16]), "1/2");
        let b = key(&ints(&[4, 9]), "1/2");
        assert_eq!(a.try_cmp(&b).unwrap(), Ordering::Equal);
        let c = key(&ints(&[2, 8]), "1/2");
        let d = key(&ints(&[5, 5]), "1/2");
        assert_eq!(c.try_cmp(&d).unwrap(), Ordering::Less);
    }

    #[test]
    fn egalitarian_orders() {
        let lex = key(&ints(&[1, 5, 2]), "-inf");
        let lex2 = key(&ints(&[3, 1, 2]), "-inf");
        assert_eq!(lex.try_cmp(&lex2).unwrap(), Ordering::Greater);
        let opts = WelfareOptions { egalitarian: EgalitarianOrder::MinOnly, ..Default::default() };
        let a = score_key(&ints(&[1, 5, 2]), &PExponent::NegInf, &opts);
        let b = score_key(&ints(&[3, 1, 2]), &PExponent::NegInf, &opts);
        assert_eq!(a.try_cmp(&b).unwrap(), Ordering::Equal);
    }

    #[test]
    fn pmean_values() {
        assert!(pmean_value(&ints(&[6, 5, 1]), &PExponent::Zero, 64).starts_with("3.10723"));
        for p in ["1", "1/2", "0", "-1", "-1/2", "-inf"] {
            assert_eq!(pmean_decimal(&ints(&[7, 7, 7]), &p.parse().unwrap(), 12), "7");
        }
        assert_eq!(pmean_decimal(&ints(&[2, 8]), &PExponent::One, 12), "5");
        assert_eq!(pmean_decimal(&ints(&[2, 8]), &PExponent::integer(-1).unwrap(), 12), "3.2");
        // ((sqrt 2 + sqrt 8) / 2)^2 = 4.5
        assert_eq!(pmean_decimal(&ints(&[2, 8]), &"1/2".parse().unwrap(), 12), "4.5");
        assert_eq!(pmean_decimal(&ints(&[0, 8]), &PExponent::Zero, 12), "0");
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(&rational(1, 3), 5), "0.33333");
        assert_eq!(format_decimal(&rational(2, 3), 3), "0.667");
        assert_eq!(format_decimal(&integer(123456), 3), "123000");
        assert_eq!(format_decimal(&rational(-9999, 1000), 3), "-10");
        assert_eq!(format_decimal(&rational(1, 100000), 2), "0.00001");
        assert_eq!(format_decimal(&rational(5, 2), 12), "2.5");
    }
}
