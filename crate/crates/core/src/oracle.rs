//! Exhaustive ground truth over all `n^m` complete allocations.
//!
//! Allocation `index` assigns good `g` to digit `g` of `index` written in base `n`,
//! most significant digit first, so good 0 varies slowest.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::ops::{AddAssign, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::fairness::FairnessNotion;
use crate::model::{allocation_count, Allocation, Instance, OwnerVectors, Rational, ScaledValuations};
use crate::solver::{SolveStatus, SolverResult};
use crate::welfare::{
    format_decimal, pmean_bounds, score_key, utilities, EgalitarianOrder, PExponent, ScoreKey, WelfareError,
    WelfareOptions,
};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{} allocations exceed the exhaustive budget of {budget}", allocations.map_or_else(|| "too many".to_string(), |a| a.to_string()))]
    BudgetExceeded { allocations: Option<u64>, budget: u64 },
    #[error(transparent)]
    Welfare(#[from] WelfareError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Filter {
    All,
    Efx,
    Efx0,
    Ef,
}

impl From<FairnessNotion> for Filter {
    fn from(notion: FairnessNotion) -> Self {
        match notion {
            FairnessNotion::Efx => Filter::Efx,
            FairnessNotion::Efx0 => Filter::Efx0,
        }
    }
}

impl std::str::FromStr for Filter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(Filter::All),
            "efx" => Ok(Filter::Efx),
            "efx0" => Ok(Filter::Efx0),
            "ef" => Ok(Filter::Ef),
            other => Err(format!("unknown filter {other:?} (expected all, efx, efx0 or ef)")),
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Filter::All => "all",
            Filter::Efx => "efx",
            Filter::Efx0 => "efx0",
            Filter::Ef => "ef",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FairnessFlags {
    pub ef: bool,
    pub efx: bool,
    pub efx0: bool,
}

impl FairnessFlags {
    pub fn accepts(self, filter: Filter) -> bool {
        match filter {
            Filter::All => true,
            Filter::Efx => self.efx,
            Filter::Efx0 => self.efx0,
            Filter::Ef => self.ef,
        }
    }
}

/// Utilities and fairness flags of one allocation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub utilities: Vec<Rational>,
    pub flags: FairnessFlags,
}

pub fn check_budget(inst: &Instance, budget: u64) -> Result<u64, OracleError> {
    match allocation_count(inst.n(), inst.m()) {
        Some(count) if count <= budget => Ok(count),
        allocations => Err(OracleError::BudgetExceeded { allocations, budget }),
    }
}

/// Owner vector of the allocation at `index`.
pub fn owners_at(mut index: u64, n: usize, m: usize) -> Vec<usize> {
    let mut owners = vec![0; m];
    for slot in owners.iter_mut().rev() {
        *slot = (index % n as u64) as usize;
        index /= n as u64;
    }
    owners
}

/// Every complete allocation once, good 0 varying slowest.
pub fn enumerate_allocations(inst: &Instance, budget: u64) -> Result<impl Iterator<Item = Allocation>, OracleError> {
    check_budget(inst, budget)?;
    let n = inst.n();
    Ok(OwnerVectors::new(n, inst.m()).map(move |owners| Allocation::from_owners(n, &owners)))
}

fn scan<T>(n: usize, owners: &[usize], value: impl Fn(usize, usize) -> T) -> (Vec<T>, FairnessFlags)
where
    T: Clone + Ord + Zero + for<'a> AddAssign<&'a T>,
    for<'a> &'a T: Sub<&'a T, Output = T>,
{
    let zero = T::zero();
    let mut seen = vec![vec![T::zero(); n]; n];
    let mut cheapest: Vec<Vec<Option<T>>> = vec![vec![None; n]; n];
    let mut cheapest_positive: Vec<Vec<Option<T>>> = vec![vec![None; n]; n];
    for (g, &j) in owners.iter().enumerate() {
        for i in 0..n {
            let v = value(i, g);
            seen[i][j] += &v;
            if v > zero && cheapest_positive[i][j].as_ref().is_none_or(|c| v < *c) {
                cheapest_positive[i][j] = Some(v.clone());
            }
            if cheapest[i][j].as_ref().is_none_or(|c| v < *c) {
                cheapest[i][j] = Some(v);
            }
        }
    }
    let mut flags = FairnessFlags { ef: true, efx: true, efx0: true };
    for i in 0..n {
        let own = &seen[i][i];
        for j in (0..n).filter(|&j| j != i) {
            let other = &seen[i][j];
            if other <= own {
                continue;
            }
            flags.ef = false;
            if let Some(c) = &cheapest[i][j] {
                if *own < other - c {
                    flags.efx0 = false;
                }
            }
            if let Some(c) = &cheapest_positive[i][j] {
                if *own < other - c {
                    flags.efx = false;
                }
            }
        }
    }
    let utilities = (0..n).map(|i| seen[i][i].clone()).collect();
    (utilities, flags)
}

enum Evaluator<'a> {
    Scaled { rows: Vec<Vec<i64>>, denom: BigInt },
    Exact(&'a Instance),
}

impl<'a> Evaluator<'a> {
    fn new(inst: &'a Instance) -> Self {
        match ScaledValuations::new(inst) {
            Some(ScaledValuations { rows, denom }) => Evaluator::Scaled { rows, denom },
            None => Evaluator::Exact(inst),
        }
    }

    fn evaluate(&self, owners: &[usize]) -> Evaluation {
        match self {
            Evaluator::Scaled { rows, denom } => {
                let (sums, flags) = scan(rows.len(), owners, |i, g| rows[i][g]);
                let utilities = sums.into_iter().map(|x| Rational::new(BigInt::from(x), denom.clone())).collect();
                Evaluation { utilities, flags }
            }
            Evaluator::Exact(inst) => {
                let (utilities, flags) = scan(inst.n(), owners, |i, g| inst.value(i, g).clone());
                Evaluation { utilities, flags }
            }
        }
    }
}

/// Utilities plus EF, EFX and EFX₀ flags from pairwise bundle values and cheapest goods.
pub fn evaluate(inst: &Instance, owners: &[usize]) -> Evaluation {
    Evaluator::new(inst).evaluate(owners)
}

type Best = Option<(u64, ScoreKey)>;

fn pick(a: Best, b: Best) -> Result<Best, OracleError> {
    match (a, b) {
        (None, x) | (x, None) => Ok(x),
        (Some(a), Some(b)) => {
            let a_wins = match a.1.try_cmp(&b.1)? {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => a.0 < b.0,
            };
            Ok(Some(if a_wins { a } else { b }))
        }
    }
}

fn result_from(inst: &Instance, best: Best) -> SolverResult {
    match best {
        Some((index, key)) => {
            let allocation = Allocation::from_owners(inst.n(), &owners_at(index, inst.n(), inst.m()));
            let status = if key.is_zero() { SolveStatus::NoPositiveWelfare } else { SolveStatus::Found };
            SolverResult { allocation: Some(allocation), key, status, note: None }
        }
        None => SolverResult {
            allocation: None,
            key: ScoreKey::zero_welfare(),
            status: SolveStatus::InfeasibleObjective,
            note: Some("no allocation passes the filter".to_string()),
        },
    }
}

/// Welfare maximizer over the allocations passing `filter`; ties go to the earliest index.
pub fn brute_opt(
    inst: &Instance,
    p: &PExponent,
    filter: Filter,
    opts: &WelfareOptions,
    budget: u64,
) -> Result<SolverResult, OracleError> {
    let count = check_budget(inst, budget)?;
    let (n, m) = (inst.n(), inst.m());
    let evaluator = Evaluator::new(inst);
    let best = (0..count)
        .into_par_iter()
        .map(|index| -> Result<Best, OracleError> {
            let e = evaluator.evaluate(&owners_at(index, n, m));
            Ok(e.flags.accepts(filter).then(|| (index, score_key(&e.utilities, p, opts))))
        })
        .try_reduce(|| None, pick)?;
    Ok(result_from(inst, best))
}

/// Evaluations of every allocation, for answering many queries from one enumeration.
#[derive(Debug, Clone)]
pub struct AllocationTable {
    n: usize,
    m: usize,
    entries: Vec<Evaluation>,
}

impl AllocationTable {
    pub fn build(inst: &Instance, budget: u64) -> Result<Self, OracleError> {
        let count = check_budget(inst, budget)?;
        let (n, m) = (inst.n(), inst.m());
        let evaluator = Evaluator::new(inst);
        let entries = (0..count).into_par_iter().map(|index| evaluator.evaluate(&owners_at(index, n, m))).collect();
        Ok(AllocationTable { n, m, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn allocation(&self, index: usize) -> Allocation {
        Allocation::from_owners(self.n, &owners_at(index as u64, self.n, self.m))
    }

    pub fn evaluation(&self, index: usize) -> &Evaluation {
        &self.entries[index]
    }

    pub fn indices(&self, filter: Filter) -> impl Iterator<Item = usize> + '_ {
        (0..self.entries.len()).filter(move |&i| self.entries[i].flags.accepts(filter))
    }

    pub fn best(
        &self,
        p: &PExponent,
        filter: Filter,
        opts: &WelfareOptions,
    ) -> Result<Option<(usize, ScoreKey)>, OracleError> {
        let best = self
            .entries
            .par_iter()
            .enumerate()
            .map(|(index, e)| -> Result<Best, OracleError> {
                Ok(e.flags.accepts(filter).then(|| (index as u64, score_key(&e.utilities, p, opts))))
            })
            .try_reduce(|| None, pick)?;
        Ok(best.map(|(i, k)| (i as usize, k)))
    }

    pub fn brute_opt(&self, p: &PExponent, filter: Filter, opts: &WelfareOptions) -> Result<SolverResult, OracleError> {
        let best = self.best(p, filter, opts)?;
        Ok(match best {
            Some((index, key)) => {
                let status = if key.is_zero() { SolveStatus::NoPositiveWelfare } else { SolveStatus::Found };
                SolverResult { allocation: Some(self.allocation(index)), key, status, note: None }
            }
            None => result_from_empty(),
        })
    }

    pub fn price(
        &self,
        p: &PExponent,
        notion: FairnessNotion,
        opts: &WelfareOptions,
    ) -> Result<PriceReport, OracleError> {
        let (opt_index, opt_key) = self.best(p, Filter::All, opts)?.expect("at least one allocation");
        let fair = self.best(p, Filter::from(notion), opts)?;
        let opt = Optimum {
            allocation: self.allocation(opt_index),
            profile: self.entries[opt_index].utilities.clone(),
            key: opt_key,
        };
        let fair = fair.map(|(index, key)| Optimum {
            allocation: self.allocation(index),
            profile: self.entries[index].utilities.clone(),
            key,
        });
        Ok(PriceReport::new(p.clone(), notion, opt, fair))
    }

    /// First allocation in canonical order that passes `notion` and is Pareto-optimal.
    pub fn fair_po(&self, notion: FairnessNotion) -> Option<Allocation> {
        let mut profiles: Vec<(&Vec<Rational>, Rational)> =
            self.entries.iter().map(|e| (&e.utilities, e.utilities.iter().sum())).collect();
        profiles.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        profiles.dedup_by(|a, b| a.0 == b.0);
        let mut front: Vec<(&Vec<Rational>, &Rational)> = Vec::new();
        let mut on_front: HashSet<&Vec<Rational>> = HashSet::new();
        for (profile, sum) in &profiles {
            let dominated =
                front.iter().any(|(f, fsum)| *fsum > sum && f.iter().zip(profile.iter()).all(|(a, b)| a >= b));
            if !dominated {
                front.push((profile, sum));
                on_front.insert(profile);
            }
        }
        let filter = Filter::from(notion);
        self.indices(filter).find(|&i| on_front.contains(&self.entries[i].utilities)).map(|i| self.allocation(i))
    }
}

fn result_from_empty() -> SolverResult {
    SolverResult {
        allocation: None,
        key: ScoreKey::zero_welfare(),
        status: SolveStatus::InfeasibleObjective,
        note: Some("no allocation passes the filter".to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioTag {
    Zero,
    Finite,
    Infinite,
}

impl RatioTag {
    pub fn name(self) -> &'static str {
        match self {
            RatioTag::Zero => "zero",
            RatioTag::Finite => "finite",
            RatioTag::Infinite => "infinite",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimum {
    pub allocation: Allocation,
    pub profile: Vec<Rational>,
    pub key: ScoreKey,
}

impl Optimum {
    pub fn from_allocation(inst: &Instance, allocation: Allocation, key: ScoreKey) -> Self {
        let profile = utilities(inst, &allocation);
        Optimum { allocation, profile, key }
    }
}

/// Global optimum against the best fair allocation, kept exact.
#[derive(Debug, Clone)]
pub struct PriceReport {
    pub p: PExponent,
    pub notion: FairnessNotion,
    pub opt: Optimum,
    pub fair: Option<Optimum>,
    pub ratio: RatioTag,
}

impl PriceReport {
    pub fn new(p: PExponent, notion: FairnessNotion, opt: Optimum, fair: Option<Optimum>) -> Self {
        let fair_zero = fair.as_ref().is_none_or(|f| f.key.is_zero());
        let ratio = if opt.key.is_zero() {
            RatioTag::Zero
        } else if fair_zero {
            RatioTag::Infinite
        } else {
            RatioTag::Finite
        };
        PriceReport { p, notion, opt, fair, ratio }
    }

    pub fn fair_key(&self) -> ScoreKey {
        self.fair.as_ref().map_or_else(ScoreKey::zero_welfare, |f| f.key.clone())
    }

    /// Certified enclosure of `W_p(opt) / W_p(fair)` when the ratio is finite.
    pub fn ratio_bounds(&self, bits: u32) -> Option<(Rational, Rational)> {
        if self.ratio != RatioTag::Finite {
            return None;
        }
        let fair = self.fair.as_ref()?;
        let (olo, ohi) = pmean_bounds(&self.opt.profile, &self.p, bits);
        let (flo, fhi) = pmean_bounds(&fair.profile, &self.p, bits);
        if flo.is_zero() {
            return self.ratio_bounds(bits * 2);
        }
        Some((olo / fhi, ohi / flo))
    }

    pub fn ratio_decimal(&self, digits: usize) -> String {
        match self.ratio {
            RatioTag::Zero => "0".to_string(),
            RatioTag::Infinite => "inf".to_string(),
            RatioTag::Finite => {
                let bits = (digits as f64 / std::f64::consts::LOG10_2).ceil() as u32 + 32;
                let (lo, hi) = self.ratio_bounds(bits).expect("finite ratio");
                format_decimal(&((lo + hi) / Rational::from_integer(2.into())), digits)
            }
        }
    }

    /// `bound · fair` as a key; `W_p` is homogeneous, so comparing it with the optimum's
    /// key decides `ratio` against `bound` exactly.
    fn scaled_keys(&self, bound: &Rational, opts: &WelfareOptions) -> (ScoreKey, ScoreKey) {
        let opts = WelfareOptions { egalitarian: EgalitarianOrder::MinOnly, ..*opts };
        let fair = self.fair.as_ref().expect("finite ratio has a fair optimum");
        let scaled: Vec<Rational> = fair.profile.iter().map(|v| v * bound).collect();
        (score_key(&self.opt.profile, &self.p, &opts), score_key(&scaled, &self.p, &opts))
    }

    pub fn ratio_at_most(&self, bound: &Rational, opts: &WelfareOptions) -> Result<bool, WelfareError> {
        match self.ratio {
            RatioTag::Zero => Ok(!bound.is_negative()),
            RatioTag::Infinite => Ok(false),
            RatioTag::Finite if !bound.is_positive() => Ok(false),
            RatioTag::Finite => {
                let (opt, scaled) = self.scaled_keys(bound, opts);
                Ok(opt.try_cmp(&scaled)? != Ordering::Greater)
            }
        }
    }

    pub fn ratio_at_least(&self, bound: &Rational, opts: &WelfareOptions) -> Result<bool, WelfareError> {
        match self.ratio {
            RatioTag::Zero => Ok(!bound.is_positive()),
            RatioTag::Infinite => Ok(true),
            RatioTag::Finite if !bound.is_positive() => Ok(true),
            RatioTag::Finite => {
                let (opt, scaled) = self.scaled_keys(bound, opts);
                Ok(opt.try_cmp(&scaled)? != Ordering::Less)
            }
        }
    }
}

/// Exact price of fairness by exhaustive enumeration.
pub fn price_of_fairness(
    inst: &Instance,
    p: &PExponent,
    notion: FairnessNotion,
    opts: &WelfareOptions,
    budget: u64,
) -> Result<PriceReport, OracleError> {
    AllocationTable::build(inst, budget)?.price(p, notion, opts)
}

/// First allocation in canonical order that is fair and Pareto-optimal, if any.
pub fn exists_fair_po(inst: &Instance, notion: FairnessNotion, budget: u64) -> Result<Option<Allocation>, OracleError> {
    Ok(AllocationTable::build(inst, budget)?.fair_po(notion))
}
