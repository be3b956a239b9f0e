//! Exact welfare maximization, with and without EFX/EFX₀ constraints, for `m = n + c`.
//!
//! In an allocation where every agent gets at least one good, at most `c` agents hold
//! two or more goods and together they hold at most `2c` goods. The solver enumerates
//! these heavy parts and completes each one by an assignment of the remaining goods
//! to the remaining agents, one good each. Fairness reduces to thresholds on the
//! heavy bundles, so constrained completion is again an assignment problem.

use std::cmp::Ordering;
use std::ops::{AddAssign, RangeInclusive, SubAssign};
use std::sync::Arc;

use itertools::Itertools;
use num_integer::binomial;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::fairness::FairnessNotion;
use crate::matching::{
    bottleneck_min_only, bottleneck_perfect, matching_size, max_cardinality, max_weight_perfect, min_cost_perfect,
    Assignment, BipartiteWeights, MatchingError, Multiplicative,
};
use crate::model::{allocation_count, Allocation, Instance, Rational, ScaledValuations};
use crate::oracle::{self, Filter, OracleError};
use crate::radical::RootSum;
use crate::welfare::{rational_pow, score_key, EgalitarianOrder, PExponent, ScoreKey, WelfareError, WelfareOptions};

/// Parts are scored on the calling thread below this count.
const SEQUENTIAL_PARTS: u128 = 4096;

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_c: usize,
    pub welfare: WelfareOptions,
    pub oracle_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_c: 3, welfare: WelfareOptions::default(), oracle_budget: oracle::DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Found,
    NoPositiveWelfare,
    InfeasibleObjective,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Found => "found",
            SolveStatus::NoPositiveWelfare => "no-positive-welfare",
            SolveStatus::InfeasibleObjective => "infeasible-objective",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub allocation: Option<Allocation>,
    pub key: ScoreKey,
    pub status: SolveStatus,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("surplus c = {c} exceeds the configured maximum {max_c}")]
    SurplusTooLarge { c: i64, max_c: usize },
    #[error(
        "exact optimization for p = {p} in (0, 1] is NP-hard without nonzero marginal utilities; \
         the instance has {allocations} allocations, above the exhaustive budget of {budget}"
    )]
    Hardness { p: String, allocations: String, budget: u64 },
    #[error("instance lacks nonzero marginal utilities: {agent} values {good} at 0")]
    NotNmu { agent: String, good: String },
    #[error(transparent)]
    Welfare(#[from] WelfareError),
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Agents holding two or more goods, and their bundles (`bundles[t]` belongs to `agents[t]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeavyPart {
    pub agents: Vec<usize>,
    pub goods: Vec<usize>,
    pub bundles: Vec<Vec<usize>>,
}

/// Label vectors assigning `size` items to `blocks` labeled blocks of at least two
/// items each, in lexicographic order.
pub fn labeled_partitions(size: usize, blocks: usize) -> Vec<Vec<usize>> {
    fn extend(size: usize, labels: &mut Vec<usize>, counts: &mut [usize], out: &mut Vec<Vec<usize>>) {
        let remaining = size - labels.len();
        let deficit: usize = counts.iter().map(|&c| 2usize.saturating_sub(c)).sum();
        if deficit > remaining {
            return;
        }
        if remaining == 0 {
            out.push(labels.clone());
            return;
        }
        for b in 0..counts.len() {
            labels.push(b);
            counts[b] += 1;
            extend(size, labels, counts, out);
            counts[b] -= 1;
            labels.pop();
        }
    }
    let mut out = Vec::new();
    extend(size, &mut Vec::with_capacity(size), &mut vec![0; blocks], &mut out);
    out
}

/// Heavy-part sizes worth enumerating: `{0}` when `c = 0`, else `1..=min(c, n)`.
pub fn default_k_range(n: usize, c: usize) -> RangeInclusive<usize> {
    if c == 0 {
        0..=0
    } else {
        1..=c.min(n)
    }
}

fn part_shape(n: usize, m: usize, k: usize) -> Option<usize> {
    let c = m.checked_sub(n)?;
    let s = k + c;
    (k <= n && s <= m && (k > 0 || c == 0)).then_some(s)
}

/// Number of heavy parts with `k` heavy agents.
pub fn heavy_part_count(n: usize, m: usize, k: usize) -> u128 {
    match part_shape(n, m, k) {
        Some(s) => {
            binomial(n as u128, k as u128) * binomial(m as u128, s as u128) * labeled_partitions(s, k).len() as u128
        }
        None => 0,
    }
}

/// All heavy parts with `k ∈ ks`, ordered by `k`, then heavy agents, then goods, then
/// block labels, each lexicographically.
pub fn enumerate_heavy_parts(
    inst: &Instance,
    ks: RangeInclusive<usize>,
) -> impl Iterator<Item = HeavyPart> + Send + 'static {
    let (n, m) = (inst.n(), inst.m());
    ks.flat_map(move |k| {
        let shape = part_shape(n, m, k);
        let s = shape.unwrap_or(0);
        let labelings = Arc::new(if shape.is_some() { labeled_partitions(s, k) } else { Vec::new() });
        let heavy_sets: Vec<Vec<usize>> = if shape.is_some() { (0..n).combinations(k).collect() } else { Vec::new() };
        heavy_sets.into_iter().flat_map(move |agents| {
            let labelings = Arc::clone(&labelings);
            (0..m).combinations(s).flat_map(move |goods| {
                let agents = agents.clone();
                let labelings = Arc::clone(&labelings);
                (0..labelings.len()).map(move |idx| {
                    let mut bundles = vec![Vec::new(); agents.len()];
                    for (pos, &label) in labelings[idx].iter().enumerate() {
                        bundles[label].push(goods[pos]);
                    }
                    HeavyPart { agents: agents.clone(), goods: goods.clone(), bundles }
                })
            })
        })
    })
}

/// Per-edge weights for the completion kernel of one exponent.
enum Kernel {
    Sum,
    Product,
    Cost(Vec<Vec<Rational>>),
    RootGain(Vec<Vec<RootSum>>),
    RootCost(Vec<Vec<RootSum>>),
    Leximin,
    MinOnly,
}

impl Kernel {
    fn new(inst: &Instance, p: &PExponent, opts: &WelfareOptions) -> Self {
        let table = |f: &dyn Fn(&Rational) -> Option<RootSum>| -> Vec<Vec<RootSum>> {
            inst.valuations()
                .iter()
                .map(|row| row.iter().map(|v| f(v).unwrap_or_else(RootSum::zero)).collect())
                .collect()
        };
        match p {
            PExponent::One => Kernel::Sum,
            PExponent::Zero => Kernel::Product,
            PExponent::Neg(q) if q.is_integer() => {
                let e = q.to_integer().to_i64().expect("exponent fits in i64");
                Kernel::Cost(
                    inst.valuations()
                        .iter()
                        .map(|row| {
                            row.iter().map(|v| if v.is_zero() { v.clone() } else { rational_pow(v, e) }).collect()
                        })
                        .collect(),
                )
            }
            PExponent::Pos(q) => {
                Kernel::RootGain(table(&|v| RootSum::power(v, q).ok().map(|r| r.with_cap(opts.max_precision_bits))))
            }
            PExponent::Neg(q) => {
                Kernel::RootCost(table(&|v| RootSum::power(v, q).ok().map(|r| r.with_cap(opts.max_precision_bits))))
            }
            PExponent::NegInf => match opts.egalitarian {
                EgalitarianOrder::Leximin => Kernel::Leximin,
                EgalitarianOrder::MinOnly => Kernel::MinOnly,
            },
        }
    }

    /// Welfare-best assignment of `cols` to `rows`; `None` if no edge set saturates the rows.
    fn complete(
        &self,
        inst: &Instance,
        rows: &[usize],
        cols: &[usize],
        allowed: impl Fn(usize, usize) -> bool,
    ) -> Result<Option<Vec<usize>>, MatchingError> {
        fn graph<W: Clone>(
            rows: &[usize],
            cols: &[usize],
            allowed: &dyn Fn(usize, usize) -> bool,
            weight: impl Fn(usize, usize) -> W,
        ) -> BipartiteWeights<W> {
            let mut g = BipartiteWeights::new(rows.len(), cols.len());
            for (r, &agent) in rows.iter().enumerate() {
                for (c, &good) in cols.iter().enumerate() {
                    if allowed(agent, good) {
                        g.set(r, c, weight(agent, good));
                    }
                }
            }
            g
        }
        fn finish<W>(result: Result<Assignment<W>, MatchingError>) -> Result<Option<Vec<usize>>, MatchingError> {
            match result {
                Ok(a) => Ok(Some(a.row_to_col)),
                Err(MatchingError::Infeasible) => Ok(None),
                Err(e) => Err(e),
            }
        }
        if rows.is_empty() {
            return Ok(Some(Vec::new()));
        }
        let value = |a: usize, g: usize| inst.value(a, g).clone();
        match self {
            Kernel::Sum => finish(max_weight_perfect(&graph(rows, cols, &allowed, value))),
            Kernel::Product => {
                finish(max_weight_perfect(&graph(rows, cols, &allowed, |a, g| Multiplicative(value(a, g)))))
            }
            Kernel::Cost(t) => finish(min_cost_perfect(&graph(rows, cols, &allowed, |a, g| t[a][g].clone()))),
            Kernel::RootGain(t) => finish(max_weight_perfect(&graph(rows, cols, &allowed, |a, g| t[a][g].clone()))),
            Kernel::RootCost(t) => finish(min_cost_perfect(&graph(rows, cols, &allowed, |a, g| t[a][g].clone()))),
            Kernel::Leximin => finish(bottleneck_perfect(&graph(rows, cols, &allowed, value))),
            Kernel::MinOnly => finish(bottleneck_min_only(&graph(rows, cols, &allowed, value))),
        }
    }
}

struct Candidate {
    index: usize,
    key: ScoreKey,
    allocation: Allocation,
}

fn better(a: Option<Candidate>, b: Option<Candidate>) -> Result<Option<Candidate>, SolverError> {
    match (a, b) {
        (None, x) | (x, None) => Ok(x),
        (Some(a), Some(b)) => {
            let a_wins = match a.key.try_cmp(&b.key)? {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => a.index < b.index,
            };
            Ok(Some(if a_wins { a } else { b }))
        }
    }
}

/// Without fairness constraints the completion depends only on which agents and goods
/// the heavy part takes.
struct CachedCompletion {
    agents: Vec<usize>,
    goods: Vec<usize>,
    assignment: Option<Vec<usize>>,
}

struct Search<'a> {
    inst: &'a Instance,
    p: &'a PExponent,
    opts: &'a WelfareOptions,
    notion: Option<FairnessNotion>,
    kernel: Kernel,
    scaled: Option<ScaledValuations>,
}

/// Rejects the part when a heavy agent envies another heavy bundle beyond the notion,
/// otherwise returns the least value each light agent must get from its single good.
fn light_thresholds<T>(
    n: usize,
    part: &HeavyPart,
    light: &[usize],
    notion: Option<FairnessNotion>,
    positive: bool,
    value: impl Fn(usize, usize) -> T,
) -> Option<Vec<T>>
where
    T: Clone + Ord + Zero + for<'v> AddAssign<&'v T> + for<'v> SubAssign<&'v T>,
{
    let bundle_value = |a: usize, bundle: &[usize]| {
        let mut total = T::zero();
        for &g in bundle {
            total += &value(a, g);
        }
        total
    };
    let heavy_values: Vec<T> = part.agents.iter().zip(&part.bundles).map(|(&a, b)| bundle_value(a, b)).collect();
    if positive && heavy_values.iter().any(Zero::is_zero) {
        return None;
    }
    let mut threshold = vec![T::zero(); n];
    let Some(notion) = notion else {
        return Some(threshold);
    };
    let tau = |x: usize, bundle: &[usize]| {
        let mut total = bundle_value(x, bundle);
        let cheapest =
            bundle.iter().map(|&g| value(x, g)).filter(|v| notion == FairnessNotion::Efx0 || !v.is_zero()).min();
        match cheapest {
            Some(v) => {
                total -= &v;
                total
            }
            None => T::zero(),
        }
    };
    for (t, &a) in part.agents.iter().enumerate() {
        for (s, bundle) in part.bundles.iter().enumerate() {
            if s != t && heavy_values[t] < tau(a, bundle) {
                return None;
            }
        }
    }
    for &l in light {
        if let Some(max) = part.bundles.iter().map(|b| tau(l, b)).max() {
            threshold[l] = max;
        }
    }
    Some(threshold)
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, p: &'a PExponent, config: &'a SolverConfig, notion: Option<FairnessNotion>) -> Self {
        let kernel = Kernel::new(inst, p, &config.welfare);
        Search { inst, p, opts: &config.welfare, notion, kernel, scaled: ScaledValuations::new(inst) }
    }

    fn score_part(
        &self,
        index: usize,
        part: &HeavyPart,
        cache: &mut Option<CachedCompletion>,
    ) -> Result<Option<Candidate>, SolverError> {
        let inst = self.inst;
        let (n, m) = (inst.n(), inst.m());
        let positive = !self.p.is_positive();
        let mut is_heavy = vec![false; n];
        for &a in &part.agents {
            is_heavy[a] = true;
        }
        let mut used = vec![false; m];
        for &g in &part.goods {
            used[g] = true;
        }
        let light: Vec<usize> = (0..n).filter(|&i| !is_heavy[i]).collect();
        let rest: Vec<usize> = (0..m).filter(|&g| !used[g]).collect();

        let allowed: Box<dyn Fn(usize, usize) -> bool + '_> = match &self.scaled {
            Some(scaled) => {
                let rows = &scaled.rows;
                let Some(threshold) = light_thresholds(n, part, &light, self.notion, positive, |a, g| rows[a][g])
                else {
                    return Ok(None);
                };
                Box::new(move |a, g| {
                    let v = rows[a][g];
                    (!positive || v != 0) && v >= threshold[a]
                })
            }
            None => {
                let value = |a: usize, g: usize| inst.value(a, g).clone();
                let Some(threshold) = light_thresholds(n, part, &light, self.notion, positive, value) else {
                    return Ok(None);
                };
                Box::new(move |a, g| {
                    let v = inst.value(a, g);
                    (!positive || !v.is_zero()) && *v >= threshold[a]
                })
            }
        };
        let reusable = self.notion.is_none();
        let assignment = match cache {
            Some(hit) if reusable && hit.agents == part.agents && hit.goods == part.goods => hit.assignment.clone(),
            _ => {
                let assignment = self.kernel.complete(inst, &light, &rest, &*allowed)?;
                if reusable {
                    *cache = Some(CachedCompletion {
                        agents: part.agents.clone(),
                        goods: part.goods.clone(),
                        assignment: assignment.clone(),
                    });
                }
                assignment
            }
        };
        let Some(assignment) = assignment else {
            return Ok(None);
        };
        let mut bundles = vec![Vec::new(); n];
        for (t, &a) in part.agents.iter().enumerate() {
            bundles[a] = part.bundles[t].clone();
        }
        for (r, &a) in light.iter().enumerate() {
            bundles[a] = vec![rest[assignment[r]]];
        }
        let allocation = Allocation::new(bundles);
        let profile: Vec<Rational> = (0..n).map(|i| inst.bundle_value(i, allocation.bundle(i))).collect();
        let key = score_key(&profile, self.p, self.opts);
        Ok(Some(Candidate { index, key, allocation }))
    }

    fn run(&self) -> Result<Option<Candidate>, SolverError> {
        let (n, m) = (self.inst.n(), self.inst.m());
        let Some(c) = m.checked_sub(n) else {
            return Ok(None);
        };
        let ks = default_k_range(n, c);
        let total: u128 = ks.clone().map(|k| heavy_part_count(n, m, k)).sum();
        let parts = enumerate_heavy_parts(self.inst, ks).enumerate();
        if total <= SEQUENTIAL_PARTS || rayon::current_num_threads() == 1 {
            let (mut best, mut cache) = (None, None);
            for (index, part) in parts {
                best = better(best, self.score_part(index, &part, &mut cache)?)?;
            }
            Ok(best)
        } else {
            parts
                .par_bridge()
                .map_init(|| None, |cache, (index, part)| self.score_part(index, &part, cache))
                .try_reduce(|| None, better)
        }
    }
}

fn check_surplus(inst: &Instance, config: &SolverConfig) -> Result<i64, SolverError> {
    let c = inst.surplus();
    if c > config.max_c as i64 {
        return Err(SolverError::SurplusTooLarge { c, max_c: config.max_c });
    }
    Ok(c)
}

/// Agents matched to a positively valued good keep it; other goods go to agents
/// with empty bundles first, so the result has bundles of size at most one when `m ≤ n`.
fn zero_welfare_allocation(inst: &Instance, partner: &[Option<usize>]) -> Allocation {
    let (n, m) = (inst.n(), inst.m());
    let mut bundles = vec![Vec::new(); n];
    let mut taken = vec![false; m];
    for (i, g) in partner.iter().enumerate() {
        if let Some(g) = *g {
            bundles[i].push(g);
            taken[g] = true;
        }
    }
    for g in (0..m).filter(|&g| !taken[g]) {
        let target = (0..n)
            .find(|&i| bundles[i].is_empty())
            .or_else(|| (0..n).find(|&i| !inst.value(i, g).is_zero()))
            .unwrap_or(0);
        bundles[target].push(g);
    }
    Allocation::new(bundles)
}

fn positive_matching(inst: &Instance) -> Vec<Option<usize>> {
    let adjacency: Vec<Vec<usize>> =
        (0..inst.n()).map(|i| (0..inst.m()).filter(|&g| !inst.value(i, g).is_zero()).collect()).collect();
    max_cardinality(&adjacency, inst.m())
}

fn zero_result(allocation: Option<Allocation>, status: SolveStatus, note: Option<String>) -> SolverResult {
    SolverResult { allocation, key: ScoreKey::zero_welfare(), status, note }
}

fn found(candidate: Candidate) -> SolverResult {
    let status = if candidate.key.is_zero() { SolveStatus::NoPositiveWelfare } else { SolveStatus::Found };
    SolverResult { allocation: Some(candidate.allocation), key: candidate.key, status, note: None }
}

fn delegate_to_oracle(
    inst: &Instance,
    p: &PExponent,
    filter: Filter,
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    let count = allocation_count(inst.n(), inst.m());
    if count.is_none_or(|c| c > config.oracle_budget) {
        return Err(SolverError::Hardness {
            p: p.to_string(),
            allocations: count.map_or_else(|| format!("{}^{}", inst.n(), inst.m()), |c| c.to_string()),
            budget: config.oracle_budget,
        });
    }
    Ok(oracle::brute_opt(inst, p, filter, &config.welfare, config.oracle_budget)?)
}

/// Welfare-maximizing allocation over all complete allocations.
pub fn global_optimum(inst: &Instance, p: &PExponent, config: &SolverConfig) -> Result<SolverResult, SolverError> {
    if p.is_positive() {
        return delegate_to_oracle(inst, p, Filter::All, config);
    }
    check_surplus(inst, config)?;
    let partner = positive_matching(inst);
    if matching_size(&partner) < inst.n() {
        return Ok(zero_result(Some(zero_welfare_allocation(inst, &partner)), SolveStatus::NoPositiveWelfare, None));
    }
    let search = Search::new(inst, p, config, None);
    match search.run()? {
        Some(best) => Ok(found(best)),
        None => Ok(zero_result(Some(zero_welfare_allocation(inst, &partner)), SolveStatus::NoPositiveWelfare, None)),
    }
}

fn fair_fallback(
    inst: &Instance,
    p: &PExponent,
    notion: FairnessNotion,
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    if inst.m() <= inst.n() {
        let partner = positive_matching(inst);
        return Ok(zero_result(Some(zero_welfare_allocation(inst, &partner)), SolveStatus::NoPositiveWelfare, None));
    }
    if inst.surplus() > 3 {
        return Ok(zero_result(
            None,
            SolveStatus::InfeasibleObjective,
            Some("no fair allocation with positive welfare; existence is not guaranteed for c > 3".to_string()),
        ));
    }
    let within_budget = allocation_count(inst.n(), inst.m()).is_some_and(|c| c <= config.oracle_budget);
    if !within_budget {
        return Ok(zero_result(
            None,
            SolveStatus::NoPositiveWelfare,
            Some(
                "fair optimum has zero welfare; constructing a fair allocation at this size is not implemented"
                    .to_string(),
            ),
        ));
    }
    let mut result = oracle::brute_opt(inst, p, Filter::from(notion), &config.welfare, config.oracle_budget)?;
    if result.allocation.is_some() {
        result.status = SolveStatus::NoPositiveWelfare;
    }
    Ok(result)
}

/// Welfare-maximizing allocation among those satisfying `notion`.
pub fn optimize_within_fair(
    inst: &Instance,
    p: &PExponent,
    notion: FairnessNotion,
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    if p.is_positive() {
        if inst.is_nmu() {
            return solve_nmu(inst, p, notion, config);
        }
        return delegate_to_oracle(inst, p, Filter::from(notion), config);
    }
    check_surplus(inst, config)?;
    let search = Search::new(inst, p, config, Some(notion));
    match search.run()? {
        Some(best) if !best.key.is_zero() => Ok(found(best)),
        _ => fair_fallback(inst, p, notion, config),
    }
}

#[derive(Debug, Clone)]
pub enum Compatibility {
    /// A fair allocation attains the global optimum.
    Yes { allocation: Allocation, key: ScoreKey },
    /// Every fair allocation falls short of the global optimum.
    No { opt_key: ScoreKey, fair_key: ScoreKey },
    /// The global optimum is zero and no fair allocation could be produced.
    Unknown { note: String },
}

/// Decides whether some allocation satisfying `notion` is also globally welfare-optimal.
pub fn decide_compatibility(
    inst: &Instance,
    p: &PExponent,
    notion: FairnessNotion,
    config: &SolverConfig,
) -> Result<Compatibility, SolverError> {
    let opt = global_optimum(inst, p, config)?;
    let fair = optimize_within_fair(inst, p, notion, config)?;
    match fair.allocation {
        Some(allocation) => {
            if fair.key.try_cmp(&opt.key)? == Ordering::Equal {
                Ok(Compatibility::Yes { allocation, key: fair.key })
            } else {
                Ok(Compatibility::No { opt_key: opt.key, fair_key: fair.key })
            }
        }
        None if opt.key.is_zero() => Ok(Compatibility::Unknown {
            note: fair.note.unwrap_or_else(|| "global optimum is zero and no fair allocation was produced".to_string()),
        }),
        None => Ok(Compatibility::No { opt_key: opt.key, fair_key: ScoreKey::zero_welfare() }),
    }
}

/// Fair welfare optimum when every agent values every good positively (EFX and EFX₀ coincide).
pub fn solve_nmu(
    inst: &Instance,
    p: &PExponent,
    notion: FairnessNotion,
    config: &SolverConfig,
) -> Result<SolverResult, SolverError> {
    if let Some((i, g)) = inst.first_zero_entry() {
        return Err(SolverError::NotNmu { agent: inst.agents()[i].clone(), good: inst.goods()[g].clone() });
    }
    let (n, m) = (inst.n(), inst.m());
    if m < n {
        if !p.is_positive() {
            let owners: Vec<Option<usize>> = (0..n).map(|i| (i < m).then_some(i)).collect();
            return Ok(zero_result(Some(zero_welfare_allocation(inst, &owners)), SolveStatus::NoPositiveWelfare, None));
        }
        // every good to a distinct agent, maximizing the sum of v^p
        let goods: Vec<usize> = (0..m).collect();
        let agents: Vec<usize> = (0..n).collect();
        let assignment = match p {
            PExponent::One => {
                let mut g = BipartiteWeights::new(m, n);
                for &good in &goods {
                    for &a in &agents {
                        g.set(good, a, inst.value(a, good).clone());
                    }
                }
                max_weight_perfect(&g)?.row_to_col
            }
            _ => {
                let q = p.as_rational().expect("finite exponent");
                let mut g = BipartiteWeights::new(m, n);
                for &good in &goods {
                    for &a in &agents {
                        let w = RootSum::power(inst.value(a, good), &q)
                            .expect("positive value")
                            .with_cap(config.welfare.max_precision_bits);
                        g.set(good, a, w);
                    }
                }
                max_weight_perfect(&g)?.row_to_col
            }
        };
        let mut bundles = vec![Vec::new(); n];
        for (good, &a) in assignment.iter().enumerate() {
            bundles[a].push(good);
        }
        let allocation = Allocation::new(bundles);
        let profile: Vec<Rational> = (0..n).map(|i| inst.bundle_value(i, allocation.bundle(i))).collect();
        let key = score_key(&profile, p, &config.welfare);
        return Ok(SolverResult { allocation: Some(allocation), key, status: SolveStatus::Found, note: None });
    }
    check_surplus(inst, config)?;
    let search = Search::new(inst, p, config, Some(notion));
    match search.run()? {
        Some(best) => Ok(found(best)),
        None => fair_fallback(inst, p, notion, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::is_fair;
    use crate::model::{integer, rational, validate_allocation};

    fn example() -> Instance {
        Instance::from_rows(vec![
            vec![integer(5), integer(1), integer(0), integer(0)],
            vec![integer(0), integer(0), integer(0), integer(5)],
            vec![integer(2), rational(1, 10), integer(1), integer(0)],
        ])
        .unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn labeled_partition_counts() {
        assert_eq!(labeled_partitions(2, 1), vec![vec![0, 0]]);
        assert_eq!(labeled_partitions(4, 2).len(), 6);
        assert_eq!(labeled_partitions(6, 3).len(), 90);
        assert_eq!(labeled_partitions(0, 0), vec![Vec::<usize>::new()]);
        assert!(labeled_partitions(3, 2).is_empty());
    }

    #[test]
    fn heavy_part_enumeration_examples() {
        let inst = example();
        assert_eq!(enumerate_heavy_parts(&inst, 1..=1).count(), 18);
        assert_eq!(heavy_part_count(3, 4, 1), 18);
        assert_eq!(enumerate_heavy_parts(&inst, 0..=0).count(), 0);
        let single = Instance::from_integer_rows(&[vec![1, 1, 1]]).unwrap();
        let parts: Vec<HeavyPart> = enumerate_heavy_parts(&single, 1..=1).collect();
        assert_eq!(parts, vec![HeavyPart { agents: vec![0], goods: vec![0, 1, 2], bundles: vec![vec![0, 1, 2]] }]);
        let first = enumerate_heavy_parts(&inst, 1..=1).next().unwrap();
        assert_eq!(first, HeavyPart { agents: vec![0], goods: vec![0, 1], bundles: vec![vec![0, 1]] });
    }

    #[test]
    fn global_nash_optimum_of_example() {
        let inst = example();
        let r = global_optimum(&inst, &PExponent::Zero, &cfg()).unwrap();
        assert_eq!(r.status, SolveStatus::Found);
        assert_eq!(r.allocation.unwrap(), Allocation::new(vec![vec![0, 1], vec![3], vec![2]]));
        assert_eq!(r.key.to_string(), "30");
    }

    #[test]
    fn fewer_goods_than_agents_has_zero_optimum() {
        let inst = Instance::from_integer_rows(&[vec![1, 2], vec![3, 1], vec![1, 1]]).unwrap();
        let r = global_optimum(&inst, &PExponent::integer(-1).unwrap(), &cfg()).unwrap();
        assert_eq!(r.status, SolveStatus::NoPositiveWelfare);
        assert!(r.key.zero);
        validate_allocation(&inst, r.allocation.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn two_agents_three_goods() {
        let inst = Instance::from_integer_rows(&[vec![4, 1, 1], vec![1, 4, 1]]).unwrap();
        let r = global_optimum(&inst, &PExponent::Zero, &cfg()).unwrap();
        assert_eq!(r.key.to_string(), "20");
        assert_eq!(r.allocation.unwrap(), Allocation::new(vec![vec![0, 2], vec![1]]));
    }

    #[test]
    fn fair_nash_optimum_of_example() {
        let inst = example();
        for notion in [FairnessNotion::Efx, FairnessNotion::Efx0] {
            let r = optimize_within_fair(&inst, &PExponent::Zero, notion, &cfg()).unwrap();
            let alloc = r.allocation.unwrap();
            assert_eq!(alloc, Allocation::new(vec![vec![0], vec![3], vec![1, 2]]));
            assert_eq!(r.key.to_string(), "55/2");
            assert!(is_fair(&inst, &alloc, notion).is_ok());
        }
    }

    #[test]
    fn compatibility_examples() {
        let inst = example();
        match decide_compatibility(&inst, &PExponent::Zero, FairnessNotion::Efx, &cfg()).unwrap() {
            Compatibility::No { opt_key, fair_key } => {
                assert_eq!(opt_key.to_string(), "30");
                assert_eq!(fair_key.to_string(), "55/2");
            }
            other => panic!("unexpected {other:?}"),
        }
        let ones = Instance::from_integer_rows(&vec![vec![1, 1, 1]; 3]).unwrap();
        assert!(matches!(
            decide_compatibility(&ones, &PExponent::Zero, FairnessNotion::Efx0, &cfg()).unwrap(),
            Compatibility::Yes { .. }
        ));
        let short = Instance::from_integer_rows(&[vec![1], vec![2]]).unwrap();
        assert!(matches!(
            decide_compatibility(&short, &PExponent::NegInf, FairnessNotion::Efx, &cfg()).unwrap(),
            Compatibility::Yes { .. }
        ));
    }

    #[test]
    fn nmu_examples() {
        assert!(matches!(
            solve_nmu(&example(), &PExponent::Zero, FairnessNotion::Efx, &cfg()),
            Err(SolverError::NotNmu { .. })
        ));
        let twos = Instance::from_integer_rows(&[vec![2, 2, 2], vec![2, 2, 2]]).unwrap();
        let r = solve_nmu(&twos, &PExponent::One, FairnessNotion::Efx, &cfg()).unwrap();
        assert_eq!(r.key.to_string(), "6");
        let mut sizes: Vec<usize> = r.allocation.unwrap().bundles().iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
        let short = Instance::from_integer_rows(&[vec![3], vec![5]]).unwrap();
        let z = solve_nmu(&short, &PExponent::Zero, FairnessNotion::Efx, &cfg()).unwrap();
        assert!(z.key.zero);
        let u = solve_nmu(&short, &PExponent::One, FairnessNotion::Efx, &cfg()).unwrap();
        assert_eq!(u.allocation.unwrap(), Allocation::new(vec![vec![], vec![0]]));
    }

    #[test]
    fn surplus_budget_is_enforced() {
        let wide = Instance::from_integer_rows(&[vec![1; 6]]).unwrap();
        let err = global_optimum(&wide, &PExponent::Zero, &cfg()).unwrap_err();
        assert_eq!(err, SolverError::SurplusTooLarge { c: 5, max_c: 3 });
    }
}
