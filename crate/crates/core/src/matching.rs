//! Bipartite assignment kernels over exact weights.
//!
//! The Hungarian routine is generic over [`Weight`], any totally ordered abelian
//! group: rationals under addition, positive rationals under multiplication
//! ([`Multiplicative`]), and exact root sums. Missing entries are forbidden edges.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::Rational;
use crate::radical::{RadicalError, RootSum};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("no perfect matching exists")]
    Infeasible,
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({0}, {1}) out of range")]
    OutOfRange(usize, usize),
    #[error("more rows ({rows}) than columns ({cols})")]
    TooManyRows { rows: usize, cols: usize },
    #[error(transparent)]
    Precision(#[from] RadicalError),
}

/// An ordered abelian group written additively.
pub trait Weight: Clone {
    fn zero() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn try_cmp(&self, other: &Self) -> Result<Ordering, MatchingError>;

    fn negated(&self) -> Self {
        Self::zero().minus(self)
    }
}

impl Weight for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn try_cmp(&self, other: &Self) -> Result<Ordering, MatchingError> {
        Ok(self.cmp(other))
    }
}

/// Positive rationals with multiplication as the group operation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiplicative(pub Rational);

impl Weight for Multiplicative {
    fn zero() -> Self {
        Multiplicative(Rational::one())
    }
    fn plus(&self, other: &Self) -> Self {
        Multiplicative(&self.0 * &other.0)
    }
    fn minus(&self, other: &Self) -> Self {
        Multiplicative(&self.0 / &other.0)
    }
    fn try_cmp(&self, other: &Self) -> Result<Ordering, MatchingError> {
        Ok(self.0.cmp(&other.0))
    }
}

impl Weight for RootSum {
    fn zero() -> Self {
        RootSum::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn try_cmp(&self, other: &Self) -> Result<Ordering, MatchingError> {
        Ok(RootSum::try_cmp(self, other)?)
    }
}

/// A `rows × cols` weight table; `None` marks a missing edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteWeights<W> {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Option<W>>>,
}

impl<W: Clone> BipartiteWeights<W> {
    pub fn new(rows: usize, cols: usize) -> Self {
        BipartiteWeights { rows, cols, entries: vec![vec![None; cols]; rows] }
    }

    pub fn from_edges(
        rows: usize,
        cols: usize,
        edges: impl IntoIterator<Item = (usize, usize, W)>,
    ) -> Result<Self, MatchingError> {
        let mut g = Self::new(rows, cols);
        for (r, c, w) in edges {
            if r >= rows || c >= cols {
                return Err(MatchingError::OutOfRange(r, c));
            }
            if g.entries[r][c].is_some() {
                return Err(MatchingError::DuplicateEdge(r, c));
            }
            g.entries[r][c] = Some(w);
        }
        Ok(g)
    }

    /// Complete graph from a dense matrix.
    pub fn from_matrix(matrix: Vec<Vec<W>>) -> Self {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        let entries = matrix.into_iter().map(|row| row.into_iter().map(Some).collect()).collect();
        BipartiteWeights { rows, cols, entries }
    }

    pub fn set(&mut self, row: usize, col: usize, weight: W) {
        self.entries[row][col] = Some(weight);
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&W> {
        self.entries[row][col].as_ref()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.entries
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, w)| w.is_some()).map(|(c, _)| c).collect())
            .collect()
    }

    pub fn map<V: Clone>(&self, mut f: impl FnMut(&W) -> V) -> BipartiteWeights<V> {
        let entries = self.entries.iter().map(|row| row.iter().map(|w| w.as_ref().map(&mut f)).collect()).collect();
        BipartiteWeights { rows: self.rows, cols: self.cols, entries }
    }
}

/// A matching saturating every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<W> {
    pub row_to_col: Vec<usize>,
    pub total: W,
}

/// Maximum matching by augmenting paths, rows tried in index order. Returns the
/// partner of each row.
pub fn max_cardinality(adjacency: &[Vec<usize>], cols: usize) -> Vec<Option<usize>> {
    fn augment(
        row: usize,
        adjacency: &[Vec<usize>],
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
        row_partner: &mut [Option<usize>],
    ) -> bool {
        for &c in &adjacency[row] {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            let free = match col_owner[c] {
                None => true,
                Some(other) => augment(other, adjacency, seen, col_owner, row_partner),
            };
            if free {
                col_owner[c] = Some(row);
                row_partner[row] = Some(c);
                return true;
            }
        }
        false
    }

    let rows = adjacency.len();
    let mut col_owner = vec![None; cols];
    let mut row_partner = vec![None; rows];
    for r in 0..rows {
        let mut seen = vec![false; cols];
        augment(r, adjacency, &mut seen, &mut col_owner, &mut row_partner);
    }
    row_partner
}

pub fn matching_size(partner: &[Option<usize>]) -> usize {
    partner.iter().filter(|p| p.is_some()).count()
}

/// Minimum total cost matching that saturates every row (`rows ≤ cols`).
pub fn min_cost_perfect<W: Weight>(costs: &BipartiteWeights<W>) -> Result<Assignment<W>, MatchingError> {
    let (n, m) = (costs.rows, costs.cols);
    if n > m {
        return Err(MatchingError::TooManyRows { rows: n, cols: m });
    }
    if matching_size(&max_cardinality(&costs.adjacency(), m)) < n {
        return Err(MatchingError::Infeasible);
    }
    // potentials and augmenting search with 1-based rows/cols; index 0 is a sentinel
    let mut u = vec![W::zero(); n + 1];
    let mut v = vec![W::zero(); m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<W>> = vec![None; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<W> = None;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                if let Some(c) = &costs.entries[i0 - 1][j - 1] {
                    let cur = c.minus(&u[i0]).minus(&v[j]);
                    let better = match &minv[j] {
                        None => true,
                        Some(old) => cur.try_cmp(old)? == Ordering::Less,
                    };
                    if better {
                        minv[j] = Some(cur);
                        way[j] = j0;
                    }
                }
                if let Some(mj) = &minv[j] {
                    let better = match &delta {
                        None => true,
                        Some(d) => mj.try_cmp(d)? == Ordering::Less,
                    };
                    if better {
                        delta = Some(mj.clone());
                        j1 = j;
                    }
                }
            }
            let delta = delta.ok_or(MatchingError::Infeasible)?;
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] = u[owner[j]].plus(&delta);
                    v[j] = v[j].minus(&delta);
                } else if let Some(mj) = &minv[j] {
                    minv[j] = Some(mj.minus(&delta));
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            row_to_col[owner[j] - 1] = j - 1;
        }
    }
    let mut total = W::zero();
    for (r, &c) in row_to_col.iter().enumerate() {
        let w = costs.entries[r][c].as_ref().ok_or(MatchingError::Infeasible)?;
        total = total.plus(w);
    }
    Ok(Assignment { row_to_col, total })
}

/// Maximum total weight matching that saturates every row (`rows ≤ cols`).
pub fn max_weight_perfect<W: Weight>(weights: &BipartiteWeights<W>) -> Result<Assignment<W>, MatchingError> {
    let negated = weights.map(W::negated);
    let best = min_cost_perfect(&negated)?;
    Ok(Assignment { total: best.total.negated(), row_to_col: best.row_to_col })
}

/// Row-saturating matching whose ascending sorted edge values are lexicographically
/// largest; in particular its minimum edge value is as large as possible.
pub fn bottleneck_perfect(values: &BipartiteWeights<Rational>) -> Result<Assignment<Rational>, MatchingError> {
    let mut distinct: Vec<Rational> = values.entries.iter().flatten().flatten().cloned().collect();
    distinct.sort();
    distinct.dedup();
    let levels = distinct.len();
    let base = BigInt::from(values.rows + 1);
    let costs = values.map(|w| {
        let rank = distinct.binary_search(w).expect("value present");
        Rational::from_integer(num_traits::pow(base.clone(), levels - 1 - rank))
    });
    let best = min_cost_perfect(&costs)?;
    let min = bottleneck_value(values, &best.row_to_col);
    Ok(Assignment { row_to_col: best.row_to_col, total: min })
}

/// Row-saturating matching maximizing the minimum edge value only.
pub fn bottleneck_min_only(values: &BipartiteWeights<Rational>) -> Result<Assignment<Rational>, MatchingError> {
    let mut distinct: Vec<Rational> = values.entries.iter().flatten().flatten().cloned().collect();
    distinct.sort();
    distinct.dedup();
    let feasible = |t: &Rational| {
        let adjacency: Vec<Vec<usize>> = values
            .entries
            .iter()
            .map(|row| {
                row.iter().enumerate().filter(|(_, w)| w.as_ref().is_some_and(|w| w >= t)).map(|(c, _)| c).collect()
            })
            .collect();
        let partner = max_cardinality(&adjacency, values.cols);
        (matching_size(&partner) == values.rows).then_some(partner)
    };
    if values.rows == 0 {
        return Ok(Assignment { row_to_col: Vec::new(), total: <Rational as Zero>::zero() });
    }
    let (mut lo, mut hi) = (0usize, distinct.len());
    let mut best = None;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible(&distinct[mid]) {
            Some(partner) => {
                best = Some(partner);
                lo = mid + 1;
            }
            None => hi = mid,
        }
    }
    let partner = best.ok_or(MatchingError::Infeasible)?;
    let row_to_col: Vec<usize> = partner.into_iter().map(|c| c.expect("perfect")).collect();
    let min = bottleneck_value(values, &row_to_col);
    Ok(Assignment { row_to_col, total: min })
}

fn bottleneck_value(values: &BipartiteWeights<Rational>, row_to_col: &[usize]) -> Rational {
    row_to_col
        .iter()
        .enumerate()
        .map(|(r, &c)| values.entries[r][c].clone().expect("matched edge exists"))
        .min()
        .unwrap_or_else(<Rational as Zero>::zero)
}
