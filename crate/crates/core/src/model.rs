//! Core domain types: exact rationals, instances, allocations and their validation.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("instance needs at least one agent")]
    NoAgents,
    #[error("instance needs at least one good")]
    NoGoods,
    #[error("duplicate identifier {0:?}")]
    DuplicateId(String),
    #[error("valuation row {row} has {found} entries, expected {expected}")]
    RowLength { row: usize, found: usize, expected: usize },
    #[error("expected {expected} valuation rows, found {found}")]
    RowCount { found: usize, expected: usize },
    #[error("negative value for agent {agent} and good {good}")]
    NegativeValue { agent: usize, good: usize },
    #[error("worthless good {name:?} (index {index}): no agent values it positively")]
    WorthlessGood { index: usize, name: String },
    #[error("allocation has {found} bundles, expected {expected}")]
    WrongBundleCount { found: usize, expected: usize },
    #[error("good {0:?} appears in more than one bundle")]
    DuplicateGood(String),
    #[error("good {0:?} is not allocated")]
    MissingGood(String),
    #[error("unknown good {0:?}")]
    UnknownGood(String),
}

/// Parses `"5"`, `"-3"`, `"0.1"`, `"1/10"` or `"2.5/3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ModelError> {
    let bad = || ModelError::BadRational(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(bad)?;
        let den = parse_decimal(den.trim()).ok_or_else(bad)?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let all_digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Canonical text form: `"5"` for integers, `"num/den"` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// A fair-division instance with additive valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<String>,
    goods: Vec<String>,
    valuations: Vec<Vec<Rational>>,
}

impl Instance {
    /// Builds an instance, checking shape, identifier uniqueness and nonnegativity.
    /// Worthless goods are accepted here; see [`validate_instance`].
    pub fn new(agents: Vec<String>, goods: Vec<String>, valuations: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        if agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        if goods.is_empty() {
            return Err(ModelError::NoGoods);
        }
        let mut seen = HashSet::new();
        for id in agents.iter().chain(goods.iter()) {
            if !seen.insert(id.as_str()) {
                return Err(ModelError::DuplicateId(id.clone()));
            }
        }
        if valuations.len() != agents.len() {
            return Err(ModelError::RowCount { found: valuations.len(), expected: agents.len() });
        }
        for (i, row) in valuations.iter().enumerate() {
            if row.len() != goods.len() {
                return Err(ModelError::RowLength { row: i, found: row.len(), expected: goods.len() });
            }
            if let Some(g) = row.iter().position(|v| v.is_negative()) {
                return Err(ModelError::NegativeValue { agent: i, good: g });
            }
        }
        Ok(Instance { agents, goods, valuations })
    }

    /// Convenience constructor with generated names `a1..an`, `g1..gm`.
    pub fn from_rows(valuations: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let n = valuations.len();
        let m = valuations.first().map_or(0, Vec::len);
        let agents = (1..=n).map(|i| format!("a{i}")).collect();
        let goods = (1..=m).map(|j| format!("g{j}")).collect();
        Instance::new(agents, goods, valuations)
    }

    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Result<Self, ModelError> {
        Instance::from_rows(rows.iter().map(|r| r.iter().map(|&v| integer(v)).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.goods.len()
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn goods(&self) -> &[String] {
        &self.goods
    }

    pub fn valuations(&self) -> &[Vec<Rational>] {
        &self.valuations
    }

    pub fn value(&self, agent: usize, good: usize) -> &Rational {
        &self.valuations[agent][good]
    }

    pub fn bundle_value(&self, agent: usize, bundle: &[usize]) -> Rational {
        let row = &self.valuations[agent];
        bundle.iter().fold(Rational::zero(), |acc, &g| acc + &row[g])
    }

    pub fn good_index(&self, name: &str) -> Option<usize> {
        self.goods.iter().position(|g| g == name)
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    /// `m - n`; negative when there are fewer goods than agents.
    pub fn surplus(&self) -> i64 {
        self.m() as i64 - self.n() as i64
    }

    /// Nonzero marginal utilities: every agent values every good strictly positively.
    /// Returns the first zero entry in row-major order otherwise.
    pub fn first_zero_entry(&self) -> Option<(usize, usize)> {
        self.valuations.iter().enumerate().find_map(|(i, row)| row.iter().position(Zero::is_zero).map(|g| (i, g)))
    }

    pub fn is_nmu(&self) -> bool {
        self.first_zero_entry().is_none()
    }
}

/// `m - n` for a valid instance.
pub fn surplus(inst: &Instance) -> i64 {
    inst.surplus()
}

/// Checks every [`Instance`] invariant, including that each good is valued by someone
/// (skipped when `allow_worthless` is set).
pub fn validate_instance(inst: &Instance, allow_worthless: bool) -> Result<(), ModelError> {
    if inst.n() == 0 {
        return Err(ModelError::NoAgents);
    }
    if inst.m() == 0 {
        return Err(ModelError::NoGoods);
    }
    if allow_worthless {
        return Ok(());
    }
    for g in 0..inst.m() {
        if (0..inst.n()).all(|i| inst.value(i, g).is_zero()) {
            return Err(ModelError::WorthlessGood { index: g, name: inst.goods[g].clone() });
        }
    }
    Ok(())
}

/// A list of `n` bundles of good indices. Bundles are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

impl Allocation {
    pub fn new(mut bundles: Vec<Vec<usize>>) -> Self {
        for b in &mut bundles {
            b.sort_unstable();
        }
        Allocation { bundles }
    }

    /// `owner[g]` is the agent receiving good `g`.
    pub fn from_owners(n: usize, owner: &[usize]) -> Self {
        let mut bundles = vec![Vec::new(); n];
        for (g, &i) in owner.iter().enumerate() {
            bundles[i].push(g);
        }
        Allocation { bundles }
    }

    /// Resolves bundles given by good names against an instance.
    pub fn from_names<S: AsRef<str>>(inst: &Instance, bundles: &[Vec<S>]) -> Result<Self, ModelError> {
        let bundles = bundles
            .iter()
            .map(|b| {
                b.iter()
                    .map(|name| {
                        inst.good_index(name.as_ref()).ok_or_else(|| ModelError::UnknownGood(name.as_ref().to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Allocation::new(bundles))
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn owners(&self, m: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; m];
        for (i, b) in self.bundles.iter().enumerate() {
            for &g in b {
                if g < m {
                    owner[g] = Some(i);
                }
            }
        }
        owner
    }

    pub fn bundle_names(&self, inst: &Instance) -> Vec<Vec<String>> {
        self.bundles.iter().map(|b| b.iter().map(|&g| inst.goods()[g].clone()).collect()).collect()
    }

    /// Human-readable form such as `({g1,g2},{g4},{})`.
    pub fn display<'a>(&'a self, inst: &'a Instance) -> impl fmt::Display + 'a {
        DisplayAllocation { alloc: self, inst }
    }
}

struct DisplayAllocation<'a> {
    alloc: &'a Allocation,
    inst: &'a Instance,
}

impl fmt::Display for DisplayAllocation<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.alloc.bundles.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let names: Vec<&str> = b.iter().map(|&g| self.inst.goods()[g].as_str()).collect();
            write!(f, "{{{}}}", names.join(","))?;
        }
        write!(f, ")")
    }
}

/// Checks that `alloc` is a complete partition of the goods into `n` bundles.
pub fn validate_allocation(inst: &Instance, alloc: &Allocation) -> Result<(), ModelError> {
    if alloc.n() != inst.n() {
        return Err(ModelError::WrongBundleCount { found: alloc.n(), expected: inst.n() });
    }
    let mut seen = vec![false; inst.m()];
    for b in alloc.bundles() {
        for &g in b {
            if g >= inst.m() {
                return Err(ModelError::UnknownGood(format!("#{g}")));
            }
            if seen[g] {
                return Err(ModelError::DuplicateGood(inst.goods()[g].clone()));
            }
            seen[g] = true;
        }
    }
    if let Some(g) = seen.iter().position(|s| !s) {
        return Err(ModelError::MissingGood(inst.goods()[g].clone()));
    }
    Ok(())
}

/// `n^m`, the number of complete allocations, or `None` on overflow.
pub fn allocation_count(n: usize, m: usize) -> Option<u64> {
    (n as u64).checked_pow(u32::try_from(m).ok()?)
}

/// Valuations times their common denominator, available when every row sum stays
/// below `i64::MAX / 2`.
#[derive(Debug, Clone)]
pub struct ScaledValuations {
    pub rows: Vec<Vec<i64>>,
    pub denom: BigInt,
}

impl ScaledValuations {
    pub fn new(inst: &Instance) -> Option<Self> {
        let denom = inst.valuations().iter().flatten().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let rows = inst
            .valuations()
            .iter()
            .map(|row| {
                let scaled: Vec<i64> =
                    row.iter().map(|v| (v.numer() * (&denom / v.denom())).to_i64()).collect::<Option<_>>()?;
                scaled.iter().try_fold(0i64, |acc, &x| acc.checked_add(x)).filter(|&t| t < i64::MAX / 2)?;
                Some(scaled)
            })
            .collect::<Option<Vec<_>>>()?;
        Some(ScaledValuations { rows, denom })
    }
}

/// Mixed-radix counter over all `n^m` owner vectors; good 0 varies slowest.
#[derive(Debug, Clone)]
pub struct OwnerVectors {
    n: usize,
    current: Option<Vec<usize>>,
}

impl OwnerVectors {
    pub fn new(n: usize, m: usize) -> Self {
        OwnerVectors { n, current: if n == 0 { None } else { Some(vec![0; m]) } }
    }
}

impl Iterator for OwnerVectors {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let mut pos = cur.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            cur[pos] += 1;
            if cur[pos] < self.n {
                break;
            }
            cur[pos] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn example() -> Instance {
        let r = |s: &str| parse_rational(s).unwrap();
        Instance::from_rows(vec![
            vec![r("5"), r("1"), r("0"), r("0")],
            vec![r("0"), r("0"), r("0"), r("5")],
            vec![r("2"), r("1/10"), r("1"), r("0")],
        ])
        .unwrap()
    }

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!(parse_rational("0.1").unwrap(), rational(1, 10));
        assert_eq!(parse_rational("1/10").unwrap(), rational(1, 10));
        assert_eq!(parse_rational("-2.50").unwrap(), rational(-5, 2));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("3/6").unwrap(), rational(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1e5").is_err());
        assert_eq!(format_rational(&rational(4, 2)), "2");
        assert_eq!(format_rational(&rational(1, 10)), "1/10");
    }

    #[test]
    fn validates_example_and_rejects_worthless_goods() {
        assert!(validate_instance(&example(), false).is_ok());
        let worthless = Instance::from_integer_rows(&[vec![1, 0], vec![2, 0]]).unwrap();
        assert!(matches!(validate_instance(&worthless, false), Err(ModelError::WorthlessGood { index: 1, .. })));
        assert!(validate_instance(&worthless, true).is_ok());
        let single = Instance::from_integer_rows(&[vec![1]]).unwrap();
        assert!(validate_instance(&single, false).is_ok());
    }

    #[test]
    fn constructor_rejects_malformed_shapes() {
        assert_eq!(Instance::from_rows(vec![]).unwrap_err(), ModelError::NoAgents);
        assert!(matches!(
            Instance::from_integer_rows(&[vec![1, 2], vec![1]]),
            Err(ModelError::RowLength { row: 1, .. })
        ));
        assert!(matches!(
            Instance::from_integer_rows(&[vec![1, -2]]),
            Err(ModelError::NegativeValue { agent: 0, good: 1 })
        ));
    }

    #[test]
    fn allocation_validation() {
        let inst = example();
        let ok = Allocation::from_names(&inst, &[vec!["g1", "g2"], vec!["g4"], vec!["g3"]]).unwrap();
        assert!(validate_allocation(&inst, &ok).is_ok());
        let missing = Allocation::from_names(&inst, &[vec!["g1"], vec!["g4"], vec!["g3"]]).unwrap();
        assert_eq!(validate_allocation(&inst, &missing), Err(ModelError::MissingGood("g2".into())));
        let dup = Allocation::from_names(&inst, &[vec!["g1"], vec!["g1", "g2", "g3", "g4"], vec![]]).unwrap();
        assert_eq!(validate_allocation(&inst, &dup), Err(ModelError::DuplicateGood("g1".into())));
        let short = Allocation::new(vec![vec![0, 1, 2, 3]]);
        assert!(matches!(validate_allocation(&inst, &short), Err(ModelError::WrongBundleCount { .. })));
    }

    #[test]
    fn surplus_signs() {
        assert_eq!(surplus(&example()), 1);
        assert_eq!(surplus(&Instance::from_integer_rows(&vec![vec![1; 5]; 5]).unwrap()), 0);
        assert_eq!(surplus(&Instance::from_integer_rows(&vec![vec![1; 4]; 6]).unwrap()), -2);
    }

    #[test]
    fn owner_vectors_count_and_order() {
        let all: Vec<_> = OwnerVectors::new(3, 4).collect();
        assert_eq!(all.len(), 81);
        assert_eq!(all[0], vec![0, 0, 0, 0]);
        assert_eq!(all[1], vec![0, 0, 0, 1]);
        assert_eq!(all[80], vec![2, 2, 2, 2]);
        let distinct: HashSet<_> = all.into_iter().collect();
        assert_eq!(distinct.len(), 81);
        assert_eq!(OwnerVectors::new(1, 3).count(), 1);
        assert_eq!(OwnerVectors::new(2, 5).count(), 32);
    }

    #[test]
    fn rational_ops_agree_with_cross_multiplication() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let (a, b, c, d): (i64, i64, i64, i64) = (
                rng.gen_range(-1000..1000),
                rng.gen_range(1..1000),
                rng.gen_range(-1000..1000),
                rng.gen_range(1..1000),
            );
            let x = rational(a, b);
            let y = rational(c, d);
            let (a, b, c, d) = (BigInt::from(a), BigInt::from(b), BigInt::from(c), BigInt::from(d));
            let check = |r: &Rational, num: BigInt, den: BigInt| {
                assert_eq!(r.numer() * &den, num * r.denom());
                assert!(r.denom().is_positive());
            };
            check(&(&x + &y), &a * &d + &c * &b, &b * &d);
            check(&(&x - &y), &a * &d - &c * &b, &b * &d);
            check(&(&x * &y), &a * &c, &b * &d);
            if !c.is_zero() {
                let q = &x / &y;
                // a/b / (c/d) = a*d / (b*c)
                assert_eq!(q.numer() * (&b * &c), (&a * &d) * q.denom());
            }
            assert_eq!(x < y, &a * &d < &c * &b);
            assert_eq!(num_integer::gcd(x.numer().clone(), x.denom().clone()).to_i64(), Some(1));
        }
    }
}
