#![allow(dead_code)]

use efxw::model::{integer, Allocation, Instance, Rational};
use efxw::FairnessNotion;
use proptest::prelude::*;

/// Instances with `n` agents and `m` goods, small integer values, roughly one zero in `zero_weight + 3`.
pub fn instance_strategy(
    agents: std::ops::RangeInclusive<usize>,
    goods: std::ops::RangeInclusive<usize>,
    zero_weight: u32,
) -> impl Strategy<Value = Instance> {
    (agents, goods).prop_flat_map(move |(n, m)| {
        let value = prop_oneof![zero_weight => Just(0i64), 3 => 1i64..=6];
        prop::collection::vec(prop::collection::vec(value, m), n)
            .prop_map(|rows| Instance::from_integer_rows(&rows).unwrap())
    })
}

pub fn instance_with_owners(
    agents: std::ops::RangeInclusive<usize>,
    goods: std::ops::RangeInclusive<usize>,
    zero_weight: u32,
) -> impl Strategy<Value = (Instance, Vec<usize>)> {
    instance_strategy(agents, goods, zero_weight).prop_flat_map(|inst| {
        let owners = prop::collection::vec(0..inst.n(), inst.m());
        (Just(inst), owners)
    })
}

pub fn value_of(inst: &Instance, agent: usize, bundle: &[usize]) -> Rational {
    bundle.iter().map(|&g| inst.value(agent, g).clone()).sum()
}

/// The fairness definition verbatim: no agent prefers another bundle after removing any
/// single removable good from it.
pub fn fair_by_definition(inst: &Instance, alloc: &Allocation, notion: FairnessNotion) -> bool {
    let n = inst.n();
    (0..n).all(|i| {
        let own = value_of(inst, i, alloc.bundle(i));
        (0..n).filter(|&j| j != i).all(|j| {
            let other = alloc.bundle(j);
            other.iter().all(|&g| {
                let removable = match notion {
                    FairnessNotion::Efx => *inst.value(i, g) > integer(0),
                    FairnessNotion::Efx0 => true,
                };
                let rest: Vec<usize> = other.iter().copied().filter(|&h| h != g).collect();
                !removable || own >= value_of(inst, i, &rest)
            })
        })
    })
}

pub fn envy_free_by_definition(inst: &Instance, alloc: &Allocation) -> bool {
    let n = inst.n();
    (0..n).all(|i| (0..n).all(|j| value_of(inst, i, alloc.bundle(i)) >= value_of(inst, i, alloc.bundle(j))))
}

/// All owner vectors for `m` goods and `n` agents.
pub fn all_owners(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out.into_iter().flat_map(|v| (0..n).map(move |i| [v.clone(), vec![i]].concat())).collect();
    }
    out
}

pub fn profile(inst: &Instance, alloc: &Allocation) -> Vec<Rational> {
    (0..inst.n()).map(|i| value_of(inst, i, alloc.bundle(i))).collect()
}
