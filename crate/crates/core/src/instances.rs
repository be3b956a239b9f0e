//! Instance families, reduction gadgets, padding transformations and random instances.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{integer, rational, validate_instance, Allocation, Instance, ModelError, Rational};
use crate::radical::RootSum;
use crate::welfare::{power_sum, PExponent};

pub use crate::io::{parse_allocation, parse_instance, serialize_allocation, serialize_instance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("lambda = {0} violates the separation inequality for this exponent")]
    InvalidLambda(u64),
    #[error("the supplied split does not sum to half the total weight")]
    BadSplit,
    #[error("padding requires every good to be valued positively by some agent: {0}")]
    Hypothesis(ModelError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn param(msg: impl Into<String>) -> GenError {
    GenError::Parameter(msg.into())
}

fn names(prefix: &str, range: impl Iterator<Item = usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

/// The three-agent, four-good instance where no EFX allocation maximizes Nash welfare.
pub fn gen_example_compat() -> Instance {
    Instance::from_rows(vec![
        vec![integer(5), integer(1), integer(0), integer(0)],
        vec![integer(0), integer(0), integer(0), integer(5)],
        vec![integer(2), rational(1, 10), integer(1), integer(0)],
    ])
    .expect("fixed instance is well formed")
}

/// Agent 1 values every good at 1, everyone else at `eps`.
pub fn gen_hoarding_family(n: usize, c: i64, eps: &Rational) -> Result<Instance, GenError> {
    if n < 2 {
        return Err(param("hoarding family needs n >= 2"));
    }
    if !eps.is_positive() {
        return Err(param("eps must be positive"));
    }
    let m = n as i64 + c;
    if m < 1 {
        return Err(param("n + c must be at least 1"));
    }
    let rows = (0..n).map(|i| vec![if i == 0 { Rational::one() } else { eps.clone() }; m as usize]).collect();
    Ok(Instance::new(names("a", 1..=n), names("g", 1..=m as usize), rows)?)
}

/// Goods `p2..pn` private to agents `2..n` and `c + 1` shared goods `s1..`: agent 1 values
/// each shared good at `1/(c+1)`, agent `i ≥ 2` values `p_i` at 1 and each shared good at `1 + eps`.
pub fn gen_private_shared_family(n: usize, c: usize, eps: &Rational) -> Result<Instance, GenError> {
    if n < 2 {
        return Err(param("private-shared family needs n >= 2"));
    }
    if c > 3 {
        return Err(param("private-shared family needs c <= 3"));
    }
    if !eps.is_positive() {
        return Err(param("eps must be positive"));
    }
    let shared = c + 1;
    let mut goods = names("p", 2..=n);
    goods.extend(names("s", 1..=shared));
    let mut rows = Vec::with_capacity(n);
    let mut first = vec![Rational::zero(); n - 1];
    first.extend(std::iter::repeat_n(rational(1, shared as i64), shared));
    rows.push(first);
    for i in 2..=n {
        let mut row: Vec<Rational> = (2..=n).map(|j| if j == i { Rational::one() } else { Rational::zero() }).collect();
        row.extend(std::iter::repeat_n(Rational::one() + eps, shared));
        rows.push(row);
    }
    Ok(Instance::new(names("a", 1..=n), goods, rows)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetVariant {
    /// Goods `g_j, x, y, z_0..z_c` on `k + 3` agents.
    Compatibility,
    /// Goods `g_j, x, y, z` plus pairs `x_t, y_t` on `k + 3 + c` agents.
    Optimization,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionGadgetSpec {
    pub weights: Vec<u64>,
    pub c: usize,
    pub p: PExponent,
    pub lambda: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Gadget {
    pub instance: Instance,
    /// Weights after doubling to make the total even.
    pub weights: Vec<u64>,
    pub total: u64,
    pub lambda: u64,
    /// `Σ v_i^p` of the welfare-optimal allocations when an equal split exists.
    pub target: RootSum,
    pub witness: Option<Allocation>,
}

/// Whether `(2Λ)^p - Λ^p - 1 > 0`, i.e. `Λ^p (2^p - 1) > 1`.
pub fn lambda_separates(lambda: u64, p: &Rational) -> Result<bool, GenError> {
    let l = Rational::from_integer(BigInt::from(lambda));
    let double = RootSum::power(&(&l * integer(2)), p).map_err(|e| param(e.to_string()))?;
    let single = RootSum::power(&l, p).map_err(|e| param(e.to_string()))?;
    let diff = &(&double - &single) - &RootSum::from_rational(Rational::one());
    Ok(diff.signum().map_err(|e| param(e.to_string()))?.is_gt())
}

pub fn smallest_lambda(p: &Rational) -> Result<u64, GenError> {
    let mut lambda = 2;
    while !lambda_separates(lambda, p)? {
        lambda = lambda.checked_mul(2).ok_or_else(|| param("no lambda found"))?;
    }
    // binary search between lambda/2 (fails or is below 2) and lambda
    let (mut lo, mut hi) = (lambda / 2, lambda);
    if lo < 2 {
        return Ok(hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if lambda_separates(mid, p)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The reduction instance built from a partition problem. `split` lists the indices of
/// one half of an equal split; when given, the welfare-optimal fair witness is returned.
pub fn gen_partition_gadget(
    spec: &PartitionGadgetSpec,
    variant: GadgetVariant,
    split: Option<&[usize]>,
) -> Result<Gadget, GenError> {
    let p = match &spec.p {
        PExponent::One | PExponent::Pos(_) => spec.p.as_rational().expect("finite"),
        _ => return Err(param("gadget exponent must lie in (0, 1]")),
    };
    if spec.weights.is_empty() || spec.weights.contains(&0) {
        return Err(param("weights must be positive and nonempty"));
    }
    if spec.c > 3 {
        return Err(param("gadget surplus must be at most 3"));
    }
    let mut weights = spec.weights.clone();
    let mut total: u64 = weights.iter().sum();
    if total % 2 == 1 {
        weights.iter_mut().for_each(|w| *w *= 2);
        total *= 2;
    }
    let lambda = match spec.lambda {
        Some(l) => {
            if l < 2 || !lambda_separates(l, &p)? {
                return Err(GenError::InvalidLambda(l));
            }
            l
        }
        None => smallest_lambda(&p)?,
    };
    let k = weights.len();
    let c = spec.c;
    let t = integer(total as i64);
    let half = &t / integer(2);
    let big = integer(lambda as i64) * &t;
    let half_big = &big / integer(2);

    let core_agents = k + 3;
    let (agents, goods) = match variant {
        GadgetVariant::Compatibility => {
            let mut goods = names("g", 1..=k);
            goods.extend(["x".to_string(), "y".to_string()]);
            goods.extend(names("z", 0..=c));
            (names("a", 1..=core_agents), goods)
        }
        GadgetVariant::Optimization => {
            let mut agents = names("a", 1..=core_agents);
            agents.extend(names("d", 1..=c));
            let mut goods = names("g", 1..=k);
            goods.extend(["x".to_string(), "y".to_string(), "z".to_string()]);
            for i in 1..=c {
                goods.push(format!("x{i}"));
                goods.push(format!("y{i}"));
            }
            (agents, goods)
        }
    };
    let (n, m) = (agents.len(), goods.len());
    let mut rows = vec![vec![Rational::zero(); m]; n];
    let (x, y) = (k, k + 1);
    for (j, &w) in weights.iter().enumerate() {
        rows[0][j] = integer(w as i64);
        rows[1][j] = integer(w as i64);
    }
    for g in [x, y] {
        rows[0][g] = half.clone();
        rows[1][g] = half.clone();
        rows[2][g] = half_big.clone();
    }
    match variant {
        GadgetVariant::Compatibility => {
            for z in 0..=c {
                rows[3][k + 2 + z] = big.clone();
            }
        }
        GadgetVariant::Optimization => {
            for row in rows.iter_mut().take(core_agents).skip(3) {
                row[k + 2] = big.clone();
            }
            for d in 0..c {
                rows[core_agents + d][k + 3 + 2 * d] = Rational::one();
                rows[core_agents + d][k + 4 + 2 * d] = Rational::one();
            }
        }
    }
    let instance = Instance::new(agents, goods, rows)?;

    let optimal_profile: Vec<Rational> = match variant {
        GadgetVariant::Compatibility => {
            vec![half.clone(), half.clone(), big.clone(), integer(c as i64 + 1) * &big]
        }
        GadgetVariant::Optimization => {
            let mut v = vec![half.clone(), half.clone(), big.clone(), big.clone()];
            v.extend(std::iter::repeat_n(integer(2), c));
            v
        }
    };
    let target =
        if p.is_one() { RootSum::from_rational(optimal_profile.iter().sum()) } else { power_sum(&optimal_profile, &p) };

    let witness = match split {
        None => None,
        Some(first) => {
            let chosen: HashSet<usize> = first.iter().copied().collect();
            if chosen.iter().any(|&j| j >= k) || chosen.len() != first.len() {
                return Err(GenError::BadSplit);
            }
            let sum: u64 = chosen.iter().map(|&j| weights[j]).sum();
            if 2 * sum != total {
                return Err(GenError::BadSplit);
            }
            let mut bundles = vec![Vec::new(); n];
            for j in 0..k {
                bundles[if chosen.contains(&j) { 0 } else { 1 }].push(j);
            }
            bundles[2] = vec![x, y];
            match variant {
                GadgetVariant::Compatibility => bundles[3] = (k + 2..k + 3 + c).collect(),
                GadgetVariant::Optimization => {
                    bundles[3] = vec![k + 2];
                    for d in 0..c {
                        bundles[core_agents + d] = vec![k + 3 + 2 * d, k + 4 + 2 * d];
                    }
                }
            }
            Some(Allocation::new(bundles))
        }
    };
    Ok(Gadget { instance, weights, total, lambda, target, witness })
}

fn fresh_name(inst: &Instance, base: &str, taken: &HashSet<String>) -> String {
    let used: HashSet<&str> = inst
        .agents()
        .iter()
        .chain(inst.goods().iter())
        .map(String::as_str)
        .chain(taken.iter().map(String::as_str))
        .collect();
    if !used.contains(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|s| !used.contains(s.as_str())).expect("unbounded search")
}

fn require_positive_goods(inst: &Instance) -> Result<(), GenError> {
    validate_instance(inst, false).map_err(GenError::Hypothesis)
}

/// Adds an agent who values every good at 0, lowering the surplus by one.
pub fn pad_zero_agent(inst: &Instance) -> Result<Instance, GenError> {
    require_positive_goods(inst)?;
    let mut agents = inst.agents().to_vec();
    agents.push(fresh_name(inst, "d", &HashSet::new()));
    let mut rows = inst.valuations().to_vec();
    rows.push(vec![Rational::zero(); inst.m()]);
    Ok(Instance::new(agents, inst.goods().to_vec(), rows)?)
}

/// Adds an agent with two private goods valued 1 each, raising the surplus by one.
pub fn pad_private_pair(inst: &Instance) -> Result<Instance, GenError> {
    require_positive_goods(inst)?;
    let mut taken = HashSet::new();
    let agent = fresh_name(inst, "d", &taken);
    taken.insert(agent.clone());
    let x = fresh_name(inst, "x", &taken);
    taken.insert(x.clone());
    let y = fresh_name(inst, "y", &taken);
    let mut agents = inst.agents().to_vec();
    agents.push(agent);
    let mut goods = inst.goods().to_vec();
    goods.extend([x, y]);
    let mut rows: Vec<Vec<Rational>> = inst
        .valuations()
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.extend([Rational::zero(), Rational::zero()]);
            r
        })
        .collect();
    let mut last = vec![Rational::zero(); inst.m()];
    last.extend([Rational::one(), Rational::one()]);
    rows.push(last);
    Ok(Instance::new(agents, goods, rows)?)
}

/// Applies padding steps until the surplus equals `target`.
pub fn pad_to_surplus(inst: &Instance, target: i64) -> Result<Instance, GenError> {
    let mut current = inst.clone();
    while current.surplus() < target {
        current = pad_private_pair(&current)?;
    }
    while current.surplus() > target {
        current = pad_zero_agent(&current)?;
    }
    Ok(current)
}

/// Seeded random integer valuations. Each entry is 0 with probability `zero_density`
/// (never under `nmu`) and otherwise uniform in `1..=max_value`; goods nobody values
/// are redrawn.
pub fn gen_random(
    n: usize,
    c: i64,
    max_value: u64,
    seed: u64,
    nmu: bool,
    zero_density: &Rational,
) -> Result<Instance, GenError> {
    if n == 0 {
        return Err(param("n must be positive"));
    }
    let m = n as i64 + c;
    if m < 1 {
        return Err(param("n + c must be at least 1"));
    }
    if max_value == 0 || max_value > i64::MAX as u64 {
        return Err(param("max_value must be in 1..=2^63-1"));
    }
    if zero_density.is_negative() || *zero_density >= Rational::one() {
        return Err(param("zero_density must lie in [0, 1)"));
    }
    let density = if nmu { Rational::zero() } else { zero_density.clone() };
    let num = density.numer().to_u64().ok_or_else(|| param("zero_density too large"))?;
    let den = density.denom().to_u64().ok_or_else(|| param("zero_density denominator too large"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = m as usize;
    let mut rows = vec![vec![Rational::zero(); m]; n];
    for g in 0..m {
        loop {
            for row in rows.iter_mut() {
                let zero = num > 0 && rng.gen_range(0..den) < num;
                row[g] = if zero { Rational::zero() } else { integer(rng.gen_range(1..=max_value) as i64) };
            }
            if rows.iter().any(|row| !row[g].is_zero()) {
                break;
            }
        }
    }
    Ok(Instance::new(names("a", 1..=n), names("g", 1..=m), rows)?)
}
