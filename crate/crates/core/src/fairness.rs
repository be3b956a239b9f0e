//! Envy-freeness, EFX, EFX₀ and Pareto-optimality checks.

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::{allocation_count, format_rational, Allocation, Instance, OwnerVectors, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FairnessNotion {
    /// Envy-free up to any positively valued good.
    Efx,
    /// Envy-free up to any good.
    Efx0,
}

impl FairnessNotion {
    pub fn name(self) -> &'static str {
        match self {
            FairnessNotion::Efx => "efx",
            FairnessNotion::Efx0 => "efx0",
        }
    }

    fn droppable(self, value: &Rational) -> bool {
        match self {
            FairnessNotion::Efx => value.is_positive(),
            FairnessNotion::Efx0 => true,
        }
    }
}

impl std::str::FromStr for FairnessNotion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "efx" => Ok(FairnessNotion::Efx),
            "efx0" | "efx_0" => Ok(FairnessNotion::Efx0),
            other => Err(format!("unknown fairness notion {other:?} (expected efx or efx0)")),
        }
    }
}

impl fmt::Display for FairnessNotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FairnessError {
    #[error("threshold requested for an empty bundle")]
    EmptyBundle,
}

/// Agent `envier` values `envied`'s bundle, minus `dropped_good` if any, at `rhs` and its own at `lhs < rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyWitness {
    pub envier: usize,
    pub envied: usize,
    pub dropped_good: Option<usize>,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl EnvyWitness {
    pub fn describe(&self, inst: &Instance) -> String {
        let dropped = match self.dropped_good {
            Some(g) => format!(" without {}", inst.goods()[g]),
            None => String::new(),
        };
        format!(
            "{} envies {}{}: {} < {}",
            inst.agents()[self.envier],
            inst.agents()[self.envied],
            dropped,
            format_rational(&self.lhs),
            format_rational(&self.rhs)
        )
    }
}

/// Largest value agent `x` sees in `bundle` after removing one droppable good.
pub fn tau(inst: &Instance, x: usize, bundle: &[usize], notion: FairnessNotion) -> Result<Rational, FairnessError> {
    if bundle.is_empty() {
        return Err(FairnessError::EmptyBundle);
    }
    let total = inst.bundle_value(x, bundle);
    let cheapest = bundle.iter().map(|&g| inst.value(x, g)).filter(|v| notion.droppable(v)).min();
    Ok(match cheapest {
        Some(v) => total - v,
        None => Rational::zero(),
    })
}

/// Checks the notion for every ordered pair; the first violation in (envier, envied,
/// good) order is returned.
pub fn is_fair(inst: &Instance, alloc: &Allocation, notion: FairnessNotion) -> Result<(), EnvyWitness> {
    let n = inst.n();
    for envier in 0..n {
        let own = inst.bundle_value(envier, alloc.bundle(envier));
        for envied in 0..n {
            let other = alloc.bundle(envied);
            if envied == envier || other.is_empty() {
                continue;
            }
            let seen = inst.bundle_value(envier, other);
            if seen <= own {
                continue;
            }
            for &g in other {
                let v = inst.value(envier, g);
                if !notion.droppable(v) {
                    continue;
                }
                let rhs = &seen - v;
                if own < rhs {
                    return Err(EnvyWitness { envier, envied, dropped_good: Some(g), lhs: own, rhs });
                }
            }
        }
    }
    Ok(())
}

pub fn is_envy_free(inst: &Instance, alloc: &Allocation) -> Result<(), EnvyWitness> {
    let n = inst.n();
    for envier in 0..n {
        let own = inst.bundle_value(envier, alloc.bundle(envier));
        for envied in 0..n {
            if envied == envier {
                continue;
            }
            let seen = inst.bundle_value(envier, alloc.bundle(envied));
            if own < seen {
                return Err(EnvyWitness { envier, envied, dropped_good: None, lhs: own, rhs: seen });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParetoStatus {
    Optimal,
    Dominated(Allocation),
    BudgetExceeded { allocations: Option<u64>, budget: u64 },
}

/// Exhaustive Pareto check; returns the first dominating allocation in canonical order.
pub fn is_pareto_optimal(inst: &Instance, alloc: &Allocation, budget: u64) -> ParetoStatus {
    let (n, m) = (inst.n(), inst.m());
    let count = allocation_count(n, m);
    if count.is_none_or(|c| c > budget) {
        return ParetoStatus::BudgetExceeded { allocations: count, budget };
    }
    let current: Vec<Rational> = (0..n).map(|i| inst.bundle_value(i, alloc.bundle(i))).collect();
    for owners in OwnerVectors::new(n, m) {
        let mut utility = vec![Rational::zero(); n];
        for (g, &i) in owners.iter().enumerate() {
            utility[i] += inst.value(i, g);
        }
        let weakly = utility.iter().zip(&current).all(|(u, c)| u >= c);
        if weakly && utility.iter().zip(&current).any(|(u, c)| u > c) {
            return ParetoStatus::Dominated(Allocation::from_owners(n, &owners));
        }
    }
    ParetoStatus::Optimal
}
