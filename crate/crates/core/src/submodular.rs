//! Integer-valued set functions: submodularity and monotonicity checks,
//! generators for the standard families, and the monotone lower extension.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{
    self, cardinality, check_dense, compress, elements, enumerate_downset, full_mask, DenseTable, PointFunction,
    PointMask,
};
use crate::error::{Error, Result};

/// Largest dimension accepted by the exhaustive property checks.
pub const MAX_CHECK_VARS: usize = 20;

/// A set function `f: 2^[n] → {0, …, k}` stored as a dense table, where `k`
/// is the declared range maximum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SetFunctionJson", into = "SetFunctionJson")]
pub struct SetFunction {
    table: DenseTable<u32>,
    range_max: u32,
}

impl SetFunction {
    pub fn new(table: DenseTable<u32>, range_max: u32) -> Result<Self> {
        if let Some(&v) = table.values().iter().find(|&&v| v > range_max) {
            return Err(Error::ValueOutOfRange {
                value: v as u64,
                max: range_max as u64,
            });
        }
        Ok(SetFunction { table, range_max })
    }

    /// Wraps a table, declaring its largest value as the range maximum.
    pub fn from_table(table: DenseTable<u32>) -> Self {
        let range_max = table.values().iter().copied().max().unwrap_or(0);
        SetFunction { table, range_max }
    }

    pub fn from_values(n: usize, values: Vec<u32>) -> Result<Self> {
        Ok(SetFunction::from_table(DenseTable::new(n, values)?))
    }

    pub fn from_fn(n: usize, f: impl FnMut(PointMask) -> u32) -> Result<Self> {
        Ok(SetFunction::from_table(DenseTable::from_fn(n, f)?))
    }

    pub fn dimension(&self) -> usize {
        self.table.dimension()
    }

    pub fn range_max(&self) -> u32 {
        self.range_max
    }

    pub fn table(&self) -> &DenseTable<u32> {
        &self.table
    }

    pub fn values(&self) -> &[u32] {
        self.table.values()
    }

    /// `f(S)`; `s` must fit in `n` bits.
    pub fn value(&self, s: PointMask) -> u32 {
        self.table.values()[s as usize]
    }

    pub fn eval(&self, s: PointMask) -> Result<u32> {
        self.table.eval(s)
    }

    /// The same function with a (larger) declared range maximum.
    pub fn with_range_max(self, range_max: u32) -> Result<Self> {
        SetFunction::new(self.table, range_max)
    }
}

impl PointFunction for SetFunction {
    type Value = u32;

    fn dimension(&self) -> usize {
        self.table.dimension()
    }

    fn value_at(&self, x: PointMask) -> u32 {
        self.value(x)
    }
}

#[derive(Serialize, Deserialize)]
struct SetFunctionJson {
    n: usize,
    values: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range_max: Option<u32>,
}

impl TryFrom<SetFunctionJson> for SetFunction {
    type Error = Error;

    fn try_from(json: SetFunctionJson) -> Result<Self> {
        let table = DenseTable::new(json.n, json.values)?;
        match json.range_max {
            Some(k) => SetFunction::new(table, k),
            None => Ok(SetFunction::from_table(table)),
        }
    }
}

impl From<SetFunction> for SetFunctionJson {
    fn from(f: SetFunction) -> Self {
        let n = f.dimension();
        SetFunctionJson {
            n,
            range_max: Some(f.range_max),
            values: f.table.into_values(),
        }
    }
}

/// A violated square `f(S∪{i}) + f(S∪{j}) < f(S∪{i,j}) + f(S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareViolation {
    pub base: PointMask,
    pub i: usize,
    pub j: usize,
}

/// First violated square in the order (S ascending, i < j), if any.
pub fn submodularity_violation(f: &SetFunction) -> Result<Option<SquareViolation>> {
    let n = f.dimension();
    check_dense(n, MAX_CHECK_VARS)?;
    let v = f.values();
    for s in 0..1u32 << n {
        let outside = full_mask(n) & !s;
        for i in elements(outside) {
            for j in elements(outside & !((2 << i) - 1)) {
                let (si, sj) = (s | 1 << i, s | 1 << j);
                let sij = si | 1 << j;
                if v[si as usize] + v[sj as usize] < v[sij as usize] + v[s as usize] {
                    return Ok(Some(SquareViolation { base: s, i, j }));
                }
            }
        }
    }
    Ok(None)
}

/// Submodularity via squares: `f(S∪{i}) + f(S∪{j}) ≥ f(S∪{i,j}) + f(S)`.
pub fn is_submodular(f: &SetFunction) -> Result<bool> {
    Ok(submodularity_violation(f)?.is_none())
}

/// Submodularity via the lattice inequality `f(S) + f(T) ≥ f(S∪T) + f(S∩T)`
/// over all pairs. Quadratic in `2^n`; meant as an independent cross-check.
pub fn is_submodular_lattice(f: &SetFunction) -> Result<bool> {
    let n = f.dimension();
    check_dense(n, 12)?;
    let v = f.values();
    for s in 0..1usize << n {
        for t in s..1usize << n {
            if v[s] + v[t] < v[s | t] + v[s & t] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Submodularity via diminishing marginals: for `S ⊂ T` and `i ∉ T`,
/// `f(S∪{i}) − f(S) ≥ f(T∪{i}) − f(T)`.
pub fn is_submodular_marginal(f: &SetFunction) -> Result<bool> {
    let n = f.dimension();
    check_dense(n, 14)?;
    let v: Vec<i64> = f.values().iter().map(|&x| x as i64).collect();
    for t in 0..1u32 << n {
        for s in enumerate_downset(t).filter(|&s| s != t) {
            for i in elements(full_mask(n) & !t) {
                let gain_s = v[(s | 1 << i) as usize] - v[s as usize];
                let gain_t = v[(t | 1 << i) as usize] - v[t as usize];
                if gain_s < gain_t {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// First `(S, i)` with `i ∉ S` and `f(S) > f(S∪{i})`, if any.
pub fn monotonicity_violation(f: &SetFunction) -> Result<Option<(PointMask, usize)>> {
    let n = f.dimension();
    check_dense(n, MAX_CHECK_VARS)?;
    let v = f.values();
    for s in 0..1u32 << n {
        for i in elements(full_mask(n) & !s) {
            if v[s as usize] > v[(s | 1 << i) as usize] {
                return Ok(Some((s, i)));
            }
        }
    }
    Ok(None)
}

/// `f(S) ≤ f(T)` whenever `S ⊆ T`.
pub fn is_monotone(f: &SetFunction) -> Result<bool> {
    Ok(monotonicity_violation(f)?.is_none())
}

/// `f(S) = |∪_{j∈S} A_j|` for sets `A_j` over `0..universe`.
pub fn coverage_function(universe: usize, sets: &[Vec<usize>]) -> Result<SetFunction> {
    if universe > 64 {
        return Err(Error::InvalidParameter(format!(
            "universe of {universe} elements exceeds 64"
        )));
    }
    let masks = sets
        .iter()
        .map(|set| {
            set.iter().try_fold(0u64, |acc, &e| {
                if e < universe {
                    Ok(acc | 1 << e)
                } else {
                    Err(Error::InvalidParameter(format!(
                        "element {e} is outside the universe of size {universe}"
                    )))
                }
            })
        })
        .collect::<Result<Vec<u64>>>()?;
    SetFunction::from_fn(masks.len(), |s| {
        elements(s).fold(0u64, |acc, j| acc | masks[j]).count_ones()
    })
}

/// Number of edges with exactly one endpoint in `S`.
pub fn cut_function(n: usize, edges: &[(usize, usize)]) -> Result<SetFunction> {
    for &(u, v) in edges {
        if u >= n || v >= n || u == v {
            return Err(Error::InvalidParameter(format!(
                "edge ({u}, {v}) is not a simple edge on {n} vertices"
            )));
        }
    }
    SetFunction::from_fn(n, |s| {
        edges.iter().filter(|&&(u, v)| (s >> u & 1) != (s >> v & 1)).count() as u32
    })
}

/// `f(S) = g(|S|)` for concave `g` given at `0..=n`.
pub fn concave_cardinality(g: &[u32]) -> Result<SetFunction> {
    if g.is_empty() {
        return Err(Error::InvalidParameter("g needs n + 1 >= 1 values".into()));
    }
    check_concave(g)?;
    SetFunction::from_fn(g.len() - 1, |s| g[cardinality(s)])
}

fn check_concave(g: &[u32]) -> Result<()> {
    for w in g.windows(3) {
        let (a, b, c) = (w[0] as i64, w[1] as i64, w[2] as i64);
        if c - b > b - a {
            return Err(Error::InvalidParameter(format!(
                "g is not concave: increments {} then {}",
                b - a,
                c - b
            )));
        }
    }
    Ok(())
}

/// Rank function of the uniform matroid `U_{rank,n}`: `min(|S|, rank)`.
pub fn uniform_matroid_rank(n: usize, rank: u32) -> Result<SetFunction> {
    SetFunction::from_fn(n, |s| (cardinality(s) as u32).min(rank))
}

/// Rank function of a partition matroid: `Σ_b min(|S ∩ B_b|, cap_b)`.
pub fn partition_matroid_rank(n: usize, blocks: &[(PointMask, u32)]) -> Result<SetFunction> {
    let mut seen = 0;
    for &(block, _) in blocks {
        if block & seen != 0 || !cube::fits(block, n) {
            return Err(Error::InvalidParameter(
                "partition blocks must be disjoint subsets of the ground set".into(),
            ));
        }
        seen |= block;
    }
    SetFunction::from_fn(n, |s| {
        blocks
            .iter()
            .map(|&(block, cap)| (cardinality(s & block) as u32).min(cap))
            .sum()
    })
}

/// The monotone lower extension on `↓S`: `Y ↦ min_{Y ⊆ Z ⊆ S} f(Z)`.
///
/// The result lives on the compressed cube of `S`: its variable `p` is the
/// `p`-th smallest element of `S` (see [`cube::compress`]). When `f`
/// restricted to `↓S` is submodular the result is monotone submodular.
pub fn monlb(f: &SetFunction, ground: PointMask) -> SetFunction {
    let m = cardinality(ground);
    let mut values: Vec<u32> = enumerate_downset(ground).map(|y| f.value(y)).collect();
    // Downset enumeration is increasing, so index y in compressed space is
    // exactly the y-th subset. Sweep from the top down.
    for y in (0..values.len()).rev() {
        let mut best = values[y];
        let outside = full_mask(m) & !(y as PointMask);
        for j in elements(outside) {
            best = best.min(values[y | 1 << j]);
        }
        values[y] = best;
    }
    debug_assert_eq!(compress(ground, ground), full_mask(m));
    SetFunction {
        table: DenseTable::new(m, values).expect("downset has 2^|S| elements"),
        range_max: f.range_max,
    }
}

/// Every submodular `f: 2^[n] → {0, …, k}` (optionally only the monotone
/// ones), in lexicographic order of value tables. Backtracking assigns values
/// in mask order and checks each square as soon as its top corner is set.
pub fn enumerate_submodular(n: usize, k: u32, monotone_only: bool) -> Result<Vec<SetFunction>> {
    if n > 4 || k > 3 {
        return Err(Error::ClassTooLarge(format!(
            "exhaustive enumeration supports n <= 4 and k <= 3 (got n={n}, k={k})"
        )));
    }
    let size = 1usize << n;
    let mut values = vec![0u32; size];
    let mut out = Vec::new();
    enumerate_from(0, k, monotone_only, &mut values, &mut out);
    Ok(out
        .into_iter()
        .map(|v| SetFunction {
            table: DenseTable::new(n, v).expect("full table"),
            range_max: k,
        })
        .collect())
}

fn enumerate_from(t: usize, k: u32, monotone_only: bool, values: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if t == values.len() {
        out.push(values.clone());
        return;
    }
    for c in 0..=k {
        values[t] = c;
        if consistent_at(t as PointMask, values, monotone_only) {
            enumerate_from(t + 1, k, monotone_only, values, out);
        }
    }
}

fn consistent_at(t: PointMask, v: &[u32], monotone_only: bool) -> bool {
    for i in elements(t) {
        if monotone_only && v[(t & !(1 << i)) as usize] > v[t as usize] {
            return false;
        }
        for j in elements(t & !((2 << i) - 1)) {
            let s = t & !(1 << i) & !(1 << j);
            if v[(s | 1 << i) as usize] + v[(s | 1 << j) as usize] < v[t as usize] + v[s as usize] {
                return false;
            }
        }
    }
    true
}

/// Graph input for [`cut_function`]: `{"n": 3, "edges": [[0,1],[1,2]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    pub fn cut_function(&self) -> Result<SetFunction> {
        cut_function(self.n, &self.edges)
    }
}

/// Set-system input for [`coverage_function`]:
/// `{"universe": 3, "sets": [[0,1],[1,2]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSystemSpec {
    pub universe: usize,
    pub sets: Vec<Vec<usize>>,
}

impl SetSystemSpec {
    pub fn coverage_function(&self) -> Result<SetFunction> {
        coverage_function(self.universe, &self.sets)
    }
}

/// Random members of the submodular families above, for test corpora.
pub mod zoo {
    use super::*;

    fn random_subset<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> PointMask {
        (0..n).filter(|_| rng.random_bool(p)).fold(0, |m, i| m | 1 << i)
    }

    /// Concave `g` on `0..=m` with integer increments in `lo..=hi`.
    fn random_concave<R: Rng + ?Sized>(m: usize, lo: i64, hi: i64, rng: &mut R) -> Vec<u32> {
        let mut steps: Vec<i64> = (0..m).map(|_| rng.random_range(lo..=hi)).collect();
        steps.sort_unstable_by(|a, b| b.cmp(a));
        let mut g = vec![rng.random_range(0..=1i64)];
        for d in steps {
            g.push(g.last().unwrap() + d);
        }
        let min = *g.iter().min().unwrap();
        g.into_iter().map(|v| (v - min) as u32).collect()
    }

    fn coverage<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
        let universe = rng.random_range(2..=5);
        let sets: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..universe).filter(|_| rng.random_bool(0.3)).collect())
            .collect();
        coverage_function(universe, &sets).expect("elements in range")
    }

    fn partition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
        let count = rng.random_range(2..=4);
        let mut blocks = vec![(0, 0); count];
        for i in 0..n {
            blocks[rng.random_range(0..count)].0 |= 1 << i;
        }
        for b in &mut blocks {
            b.1 = rng.random_range(1..=2);
        }
        partition_matroid_rank(n, &blocks).expect("blocks are disjoint")
    }

    fn concave_on_subset<R: Rng + ?Sized>(n: usize, monotone: bool, rng: &mut R) -> SetFunction {
        let support = random_subset(n, 0.6, rng);
        let m = cardinality(support);
        let g = if monotone {
            random_concave(m, 0, 2, rng)
        } else {
            random_concave(m, -2, 2, rng)
        };
        SetFunction::from_fn(n, |s| g[cardinality(s & support)]).expect("dense")
    }

    fn graph_cut<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
        let p = rng.random_range(0.15..0.4);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        cut_function(n, &edges).expect("simple graph")
    }

    fn sum(a: &SetFunction, b: &SetFunction) -> SetFunction {
        SetFunction::from_fn(a.dimension(), |s| a.value(s) + b.value(s)).expect("dense")
    }

    fn truncate(f: &SetFunction, cap: u32) -> SetFunction {
        SetFunction::from_fn(f.dimension(), |s| f.value(s).min(cap)).expect("dense")
    }

    fn reflect(f: &SetFunction) -> SetFunction {
        let full = full_mask(f.dimension());
        SetFunction::from_fn(f.dimension(), |s| f.value(full & !s)).expect("dense")
    }

    /// A random monotone submodular function: coverage, matroid ranks, concave
    /// functions of a weighted cardinality, their truncations and sums.
    pub fn random_monotone_submodular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
        match rng.random_range(0..6) {
            0 => coverage(n, rng),
            1 => uniform_matroid_rank(n, rng.random_range(1..=3)).expect("dense"),
            2 => partition(n, rng),
            3 => concave_on_subset(n, true, rng),
            4 => {
                let f = random_monotone_submodular(n, rng);
                let cap = rng.random_range(1..=f.range_max().max(1));
                truncate(&f, cap)
            }
            _ => {
                let a = random_monotone_submodular(n, rng);
                let b = random_monotone_submodular(n, rng);
                sum(&a, &b)
            }
        }
    }

    /// A random submodular function, monotone or not: the monotone families,
    /// cut functions, non-monotone concave cardinality functions,
    /// reflections `S ↦ f([n] ∖ S)`, and sums.
    pub fn random_submodular<R: Rng + ?Sized>(n: usize, rng: &mut R) -> SetFunction {
        match rng.random_range(0..6) {
            0 => random_monotone_submodular(n, rng),
            1 => graph_cut(n, rng),
            2 => concave_on_subset(n, false, rng),
            3 => reflect(&random_monotone_submodular(n, rng)),
            4 => {
                let a = graph_cut(n, rng);
                let b = random_monotone_submodular(n, rng);
                sum(&a, &b)
            }
            _ => {
                let mut parts = [concave_on_subset(n, false, rng), reflect(&coverage(n, rng))];
                parts.shuffle(rng);
                sum(&parts[0], &parts[1])
            }
        }
    }
}
