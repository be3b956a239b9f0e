use std::cmp::Ordering;

use efxw::matching::{
    bottleneck_min_only, bottleneck_perfect, matching_size, max_cardinality, max_weight_perfect, min_cost_perfect,
    BipartiteWeights, MatchingError, Multiplicative,
};
use efxw::model::{integer, rational, Rational};
use efxw::radical::RootSum;
use proptest::prelude::*;

/// Every injective row-to-column map using only present edges.
fn injections(table: &[Vec<Option<i64>>], cols: usize) -> Vec<Vec<usize>> {
    fn go(
        table: &[Vec<Option<i64>>],
        cols: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let row = cur.len();
        if row == table.len() {
            out.push(cur.clone());
            return;
        }
        for c in 0..cols {
            if !used[c] && table[row][c].is_some() {
                used[c] = true;
                cur.push(c);
                go(table, cols, used, cur, out);
                cur.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(table, cols, &mut vec![false; cols], &mut Vec::new(), &mut out);
    out
}

fn edge(table: &[Vec<Option<i64>>], r: usize, c: usize) -> i64 {
    table[r][c].expect("edge present")
}

fn weights<W: Clone>(table: &[Vec<Option<i64>>], cols: usize, f: impl Fn(i64) -> W) -> BipartiteWeights<W> {
    let mut g = BipartiteWeights::new(table.len(), cols);
    for (r, row) in table.iter().enumerate() {
        for (c, w) in row.iter().enumerate() {
            if let Some(w) = w {
                g.set(r, c, f(*w));
            }
        }
    }
    g
}

fn assert_valid(table: &[Vec<Option<i64>>], row_to_col: &[usize]) {
    assert_eq!(row_to_col.len(), table.len());
    let mut seen = std::collections::HashSet::new();
    for (r, &c) in row_to_col.iter().enumerate() {
        assert!(table[r][c].is_some(), "matched a missing edge");
        assert!(seen.insert(c), "column used twice");
    }
}

/// Tables with `rows ≤ cols ≤ 6`, entries in `1..=9`, some edges missing.
fn table_strategy() -> impl Strategy<Value = (Vec<Vec<Option<i64>>>, usize)> {
    (1usize..=6).prop_flat_map(|cols| {
        (0usize..=cols).prop_flat_map(move |rows| {
            let entry = prop_oneof![1 => Just(None), 4 => (1i64..=9).prop_map(Some)];
            (prop::collection::vec(prop::collection::vec(entry, cols), rows), Just(cols))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn min_cost_matches_brute_force((table, cols) in table_strategy()) {
        let all = injections(&table, cols);
        let result = min_cost_perfect(&weights(&table, cols, integer));
        let brute = all.iter().map(|a| a.iter().enumerate().map(|(r, &c)| edge(&table, r, c)).sum::<i64>()).min();
        match brute {
            None => prop_assert_eq!(result, Err(MatchingError::Infeasible)),
            Some(best) => {
                let a = result.unwrap();
                assert_valid(&table, &a.row_to_col);
                let total: i64 = a.row_to_col.iter().enumerate().map(|(r, &c)| edge(&table, r, c)).sum();
                prop_assert_eq!(total, best);
                prop_assert_eq!(a.total, integer(best));
            }
        }
    }

    #[test]
    fn max_weight_matches_brute_force((table, cols) in table_strategy()) {
        let all = injections(&table, cols);
        let result = max_weight_perfect(&weights(&table, cols, |w| rational(w, 7)));
        let brute = all.iter().map(|a| a.iter().enumerate().map(|(r, &c)| edge(&table, r, c)).sum::<i64>()).max();
        match brute {
            None => prop_assert!(result.is_err()),
            Some(best) => prop_assert_eq!(result.unwrap().total, rational(best, 7)),
        }
    }

    #[test]
    fn product_weights_match_brute_force((table, cols) in table_strategy()) {
        let all = injections(&table, cols);
        let result = max_weight_perfect(&weights(&table, cols, |w| Multiplicative(integer(w))));
        let brute = all.iter().map(|a| a.iter().enumerate().map(|(r, &c)| edge(&table, r, c)).product::<i64>()).max();
        match brute {
            None => prop_assert!(result.is_err()),
            Some(best) => {
                let a = result.unwrap();
                assert_valid(&table, &a.row_to_col);
                prop_assert_eq!(a.total, Multiplicative(integer(best)));
            }
        }
    }

    #[test]
    fn root_weights_match_brute_force((table, cols) in table_strategy()) {
        let half = rational(1, 2);
        let root = |w: i64| RootSum::power(&integer(w), &half).unwrap();
        let all = injections(&table, cols);
        let result = max_weight_perfect(&weights(&table, cols, root));
        let sum = |a: &Vec<usize>| a.iter().enumerate().fold(RootSum::zero(), |acc, (r, &c)| &acc + &root(edge(&table, r, c)));
        let brute = all.iter().map(sum).max_by(|x, y| x.try_cmp(y).unwrap());
        match brute {
            None => prop_assert!(result.is_err()),
            Some(best) => {
                let a = result.unwrap();
                assert_valid(&table, &a.row_to_col);
                prop_assert_eq!(a.total.try_cmp(&best).unwrap(), Ordering::Equal);
            }
        }
    }

    #[test]
    fn leximin_bottleneck_matches_brute_force((table, cols) in table_strategy()) {
        let all = injections(&table, cols);
        let sorted = |a: &Vec<usize>| {
            let mut v: Vec<i64> = a.iter().enumerate().map(|(r, &c)| edge(&table, r, c)).collect();
            v.sort();
            v
        };
        let result = bottleneck_perfect(&weights(&table, cols, integer));
        match all.iter().map(sorted).max() {
            None => prop_assert!(result.is_err()),
            Some(best) => {
                let a = result.unwrap();
                assert_valid(&table, &a.row_to_col);
                prop_assert_eq!(sorted(&a.row_to_col), best.clone());
                prop_assert_eq!(a.total, integer(best.first().copied().unwrap_or(0)));
            }
        }
    }

    #[test]
    fn min_only_bottleneck_matches_brute_force((table, cols) in table_strategy()) {
        let all = injections(&table, cols);
        let result = bottleneck_min_only(&weights(&table, cols, integer));
        let brute = all.iter().map(|a| a.iter().enumerate().map(|(r, &c)| edge(&table, r, c)).min().unwrap_or(0)).max();
        match brute {
            None => prop_assert!(result.is_err()),
            Some(best) => {
                let a = result.unwrap();
                assert_valid(&table, &a.row_to_col);
                prop_assert_eq!(a.total, integer(best));
            }
        }
    }

    #[test]
    fn cardinality_matches_brute_force((table, cols) in table_strategy()) {
        let adjacency: Vec<Vec<usize>> =
            table.iter().map(|row| (0..cols).filter(|&c| row[c].is_some()).collect()).collect();
        let partner = max_cardinality(&adjacency, cols);
        let size = matching_size(&partner);
        // largest subset of rows admitting an injection
        let rows = table.len();
        let mut best = 0;
        for mask in 0u32..(1 << rows) {
            let sub: Vec<Vec<Option<i64>>> =
                (0..rows).filter(|r| mask & (1 << r) != 0).map(|r| table[r].clone()).collect();
            if !injections(&sub, cols).is_empty() {
                best = best.max(sub.len());
            }
        }
        prop_assert_eq!(size, best);
        let mut seen = std::collections::HashSet::new();
        for (r, c) in partner.iter().enumerate() {
            if let Some(c) = c {
                prop_assert!(table[r][*c].is_some());
                prop_assert!(seen.insert(*c));
            }
        }
    }
}

#[test]
fn more_rows_than_columns_is_rejected() {
    let g: BipartiteWeights<Rational> = BipartiteWeights::new(3, 2);
    assert!(matches!(min_cost_perfect(&g), Err(MatchingError::TooManyRows { rows: 3, cols: 2 })));
}
