//! Random restrictions, exact decision-tree depth, canonical labeled decision
//! trees, and Monte-Carlo switching experiments.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{self, cardinality, check_dense, compress, elements, expand, full_mask, DenseTable, PointMask};
use crate::error::{Error, Result};
use crate::formula::{binomial, Formula, Term};
use crate::fourier::{wht, RangeCodec};
use crate::seed;
use crate::stats::{wilson, MeanEstimate, Proportion, Z_99};

/// Largest live dimension accepted by [`dt_depth`].
pub const MAX_DT_VARS: usize = 16;

/// A map from variables to `{0, 1, ⋆}`: `live` marks the `⋆` variables and
/// `ones` the variables fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Restriction {
    n: usize,
    live: PointMask,
    ones: PointMask,
}

impl Restriction {
    pub fn new(n: usize, live: PointMask, ones: PointMask) -> Result<Self> {
        check_dense(n, cube::MAX_VARS)?;
        cube::check_point(live, n)?;
        cube::check_point(ones, n)?;
        if live & ones != 0 {
            return Err(Error::InvalidParameter(
                "a live variable cannot also be fixed to 1".into(),
            ));
        }
        Ok(Restriction { n, live, ones })
    }

    /// Every variable live.
    pub fn identity(n: usize) -> Self {
        Restriction {
            n,
            live: full_mask(n),
            ones: 0,
        }
    }

    /// Each variable independently `⋆` with probability `p`, else a fair bit.
    pub fn sample<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        check_dense(n, cube::MAX_VARS)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} is not a probability")));
        }
        let mut live = 0;
        let mut ones = 0;
        for i in 0..n {
            if rng.random::<f64>() < p {
                live |= 1 << i;
            } else if rng.random_bool(0.5) {
                ones |= 1 << i;
            }
        }
        Ok(Restriction { n, live, ones })
    }

    /// Uniform over restrictions with exactly `live_count` live variables.
    pub fn sample_fixed<R: Rng + ?Sized>(n: usize, live_count: usize, rng: &mut R) -> Result<Self> {
        check_dense(n, cube::MAX_VARS)?;
        if live_count > n {
            return Err(Error::InvalidParameter(format!(
                "{live_count} live variables out of {n}"
            )));
        }
        let live = rand::seq::index::sample(rng, n, live_count)
            .into_iter()
            .fold(0, |m, i| m | 1 << i);
        let ones = rng.random::<u32>() & full_mask(n) & !live;
        Ok(Restriction { n, live, ones })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn live(&self) -> PointMask {
        self.live
    }

    pub fn num_live(&self) -> usize {
        cardinality(self.live)
    }

    pub fn ones(&self) -> PointMask {
        self.ones
    }

    /// Fixed variables.
    pub fn fixed(&self) -> PointMask {
        full_mask(self.n) & !self.live
    }

    /// `None` for a live variable, otherwise its fixed bit.
    pub fn get(&self, i: usize) -> Option<bool> {
        (self.live >> i & 1 == 0).then_some(self.ones >> i & 1 == 1)
    }

    /// The full point agreeing with `self` on fixed variables and with `y`
    /// (in live coordinates) on live ones.
    pub fn complete(&self, y: PointMask) -> PointMask {
        self.ones | expand(y, self.live)
    }

    /// Applies `then`, a restriction of the live variables (in live
    /// coordinates), after `self`.
    pub fn compose(&self, then: &Restriction) -> Result<Restriction> {
        if then.n != self.num_live() {
            return Err(Error::InvalidParameter(format!(
                "second restriction has {} variables, expected {}",
                then.n,
                self.num_live()
            )));
        }
        Ok(Restriction {
            n: self.n,
            live: expand(then.live, self.live),
            ones: self.ones | expand(then.ones, self.live),
        })
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_char(match self.get(i) {
                None => '*',
                Some(true) => '1',
                Some(false) => '0',
            })?;
        }
        Ok(())
    }
}

pub fn sample_restriction(n: usize, p: f64, seed: u64) -> Result<Restriction> {
    Restriction::sample(n, p, &mut seed::rng(seed))
}

pub fn sample_restriction_fixed(n: usize, live_count: usize, seed: u64) -> Result<Restriction> {
    Restriction::sample_fixed(n, live_count, &mut seed::rng(seed))
}

/// `f_ρ` as a table over the live variables in increasing index order.
pub fn restrict_table<V: Copy>(table: &DenseTable<V>, rho: &Restriction) -> Result<DenseTable<V>> {
    if table.dimension() != rho.n {
        return Err(Error::InvalidParameter(format!(
            "table has {} variables, restriction {}",
            table.dimension(),
            rho.n
        )));
    }
    DenseTable::from_fn(rho.num_live(), |y| table.values()[rho.complete(y) as usize])
}

/// `F_ρ`: falsified terms dropped, fixed literals removed, order kept, over
/// the live variables in increasing index order.
pub fn restrict_formula(formula: &Formula, rho: &Restriction) -> Result<Formula> {
    if formula.dimension() != rho.n {
        return Err(Error::InvalidParameter(format!(
            "formula has {} variables, restriction {}",
            formula.dimension(),
            rho.n
        )));
    }
    let terms = formula
        .terms()
        .iter()
        .filter_map(|t| t.assign(rho.fixed(), rho.ones))
        .map(|t| {
            Term::new(
                compress(t.positives(), rho.live),
                compress(t.negatives(), rho.live),
                t.constant(),
            )
            .expect("disjoint literals")
        })
        .collect();
    Formula::new(rho.num_live(), terms)
}

/// Minimum depth of a decision tree computing `table`.
pub fn dt_depth<V: Copy + PartialEq>(table: &DenseTable<V>) -> Result<usize> {
    check_dense(table.dimension(), MAX_DT_VARS)?;
    let mut distinct: Vec<V> = Vec::new();
    let ids: Vec<u16> = table
        .values()
        .iter()
        .map(|v| match distinct.iter().position(|d| d == v) {
            Some(i) => i as u16,
            None => {
                distinct.push(*v);
                (distinct.len() - 1) as u16
            }
        })
        .collect();
    Ok(DepthSolver::default().depth(ids) as usize)
}

#[derive(Default)]
struct DepthSolver {
    memo: HashMap<Vec<u16>, u8>,
}

impl DepthSolver {
    fn depth(&mut self, table: Vec<u16>) -> u8 {
        let table = canonical(drop_irrelevant(table));
        let m = table.len().trailing_zeros() as usize;
        if m == 0 {
            return 0;
        }
        if let Some(&d) = self.memo.get(&table) {
            return d;
        }
        let mut best = m as u8;
        for i in 0..m {
            if best == 1 {
                break;
            }
            let d0 = self.depth(cofactor(&table, i, 0));
            if d0 + 1 >= best {
                continue;
            }
            let d1 = self.depth(cofactor(&table, i, 1));
            best = best.min(1 + d0.max(d1));
        }
        self.memo.insert(table, best);
        best
    }
}

fn cofactor(table: &[u16], i: usize, b: usize) -> Vec<u16> {
    let low = (1usize << i) - 1;
    (0..table.len() / 2)
        .map(|y| table[((y & !low) << 1) | (b << i) | (y & low)])
        .collect()
}

fn drop_irrelevant(mut table: Vec<u16>) -> Vec<u16> {
    let mut i = 0;
    while (1usize << i) < table.len() {
        let relevant = (0..table.len()).any(|x| x >> i & 1 == 0 && table[x] != table[x | 1 << i]);
        if relevant {
            i += 1;
        } else {
            table = cofactor(&table, i, 0);
        }
    }
    table
}

/// Renumbers values in order of first appearance.
fn canonical(mut table: Vec<u16>) -> Vec<u16> {
    let mut map: Vec<(u16, u16)> = Vec::new();
    for v in table.iter_mut() {
        *v = match map.iter().find(|(from, _)| from == v) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len() as u16;
                map.push((*v, to));
                to
            }
        };
    }
    table
}

/// A node of a [`DecisionTree`]; `label` is the canonical-tree lower bound
/// `L_σ`, set only on nodes reached by satisfying a queried term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub label: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Leaf { value: u32 },
    Query { var: usize, zero: usize, one: usize },
}

/// A binary decision tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTree {
    n: usize,
    nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn evaluate(&self, x: PointMask) -> u32 {
        let mut at = 0;
        loop {
            match self.nodes[at].kind {
                NodeKind::Leaf { value } => return value,
                NodeKind::Query { var, zero, one } => at = if x >> var & 1 == 1 { one } else { zero },
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.depth_from(0)
    }

    fn depth_from(&self, at: usize) -> usize {
        match self.nodes[at].kind {
            NodeKind::Leaf { .. } => 0,
            NodeKind::Query { zero, one, .. } => 1 + self.depth_from(zero).max(self.depth_from(one)),
        }
    }

    pub fn leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Leaf { .. }))
            .count()
    }

    /// Whether no root-to-leaf path queries a variable twice.
    pub fn is_read_once_per_path(&self) -> bool {
        self.paths_ok(0, 0)
    }

    fn paths_ok(&self, at: usize, seen: PointMask) -> bool {
        match self.nodes[at].kind {
            NodeKind::Leaf { .. } => true,
            NodeKind::Query { var, zero, one } => {
                seen >> var & 1 == 0 && self.paths_ok(zero, seen | 1 << var) && self.paths_ok(one, seen | 1 << var)
            }
        }
    }

    pub fn to_table(&self) -> Result<DenseTable<u32>> {
        DenseTable::from_fn(self.n, |x| self.evaluate(x))
    }
}

/// The canonical labeled decision tree of a formula.
///
/// Empty terms raise a running floor `c` on the value; terms with constant at
/// most `c` can no longer matter and are dropped. If nothing remains the
/// branch is the leaf `c`. Otherwise the first remaining term's variables are
/// queried in index order as a complete binary tree, each leaf continuing
/// with the formula restricted by that path; the branch satisfying the term
/// is labeled with the larger of its predecessors' labels and the term's
/// constant.
pub fn canonical_tree(formula: &Formula) -> DecisionTree {
    let mut tree = DecisionTree {
        n: formula.dimension(),
        nodes: Vec::new(),
    };
    build_canonical(&mut tree.nodes, formula.terms().to_vec(), 0, 0, None);
    tree
}

fn build_canonical(
    nodes: &mut Vec<TreeNode>,
    terms: Vec<Term>,
    floor: u32,
    label_floor: u32,
    label: Option<u32>,
) -> usize {
    let floor = terms
        .iter()
        .filter(|t| t.is_empty())
        .map(|t| t.constant())
        .fold(floor, u32::max);
    let terms: Vec<Term> = terms.into_iter().filter(|t| t.constant() > floor).collect();
    let Some(first) = terms.first().copied() else {
        nodes.push(TreeNode {
            kind: NodeKind::Leaf { value: floor },
            label,
        });
        return nodes.len() - 1;
    };
    let vars: Vec<usize> = elements(first.variables()).collect();
    query_block(nodes, &terms, &first, &vars, 0, 0, floor, label_floor, label)
}

#[allow(clippy::too_many_arguments)]
fn query_block(
    nodes: &mut Vec<TreeNode>,
    terms: &[Term],
    first: &Term,
    vars: &[usize],
    depth: usize,
    ones: PointMask,
    floor: u32,
    label_floor: u32,
    label: Option<u32>,
) -> usize {
    if depth == vars.len() {
        let set = first.variables();
        let rest: Vec<Term> = terms.iter().filter_map(|t| t.assign(set, ones)).collect();
        if ones == first.positives() {
            let l = label_floor.max(first.constant());
            return build_canonical(nodes, rest, floor, l, Some(l));
        }
        return build_canonical(nodes, rest, floor, label_floor, None);
    }
    let at = nodes.len();
    nodes.push(TreeNode {
        kind: NodeKind::Leaf { value: 0 },
        label: if depth == 0 { label } else { None },
    });
    let var = vars[depth];
    let zero = query_block(nodes, terms, first, vars, depth + 1, ones, floor, label_floor, None);
    let one = query_block(
        nodes,
        terms,
        first,
        vars,
        depth + 1,
        ones | 1 << var,
        floor,
        label_floor,
        None,
    );
    nodes[at].kind = NodeKind::Query { var, zero, one };
    at
}

/// Which restrictions a switching experiment draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RestrictionFamily {
    /// Each variable live with probability `p`.
    Iid { p: f64 },
    /// Exactly `live` live variables; the bound uses `p = live / n`.
    Fixed { live: usize },
}

impl RestrictionFamily {
    pub fn effective_p(&self, n: usize) -> f64 {
        match *self {
            RestrictionFamily::Iid { p } => p,
            RestrictionFamily::Fixed { live } => live as f64 / n as f64,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Restriction> {
        match *self {
            RestrictionFamily::Iid { p } => Restriction::sample(n, p, rng),
            RestrictionFamily::Fixed { live } => Restriction::sample_fixed(n, live, rng),
        }
    }
}

/// One `(formula, family, s)` cell of a switching experiment. `p_hat` and the
/// interval concern `DT-depth(F_ρ) ≥ s`; the `tree_` columns concern the
/// depth of the canonical tree of `F_ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingRow {
    pub k: usize,
    pub r: u32,
    pub n: usize,
    pub p: f64,
    pub s: usize,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub violated: bool,
    pub vacuous: bool,
    pub tree_p_hat: f64,
    pub tree_ci_low: f64,
    pub tree_violated: bool,
}

impl SwitchingRow {
    pub const CSV_HEADER: &'static str =
        "k,r,n,p,s,trials,p_hat,ci_low,ci_high,bound,violated,vacuous,tree_p_hat,tree_ci_low,tree_violated";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.k,
            self.r,
            self.n,
            self.p,
            self.s,
            self.trials,
            self.p_hat,
            self.ci_low,
            self.ci_high,
            self.bound,
            self.violated,
            self.vacuous,
            self.tree_p_hat,
            self.tree_ci_low,
            self.tree_violated
        )
    }
}

pub fn rows_to_csv(rows: &[SwitchingRow]) -> String {
    let mut out = String::from(SwitchingRow::CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    out
}

/// `r·(7pk)^s`.
pub fn switching_bound(k: usize, r: u32, p: f64, s: usize) -> f64 {
    r as f64 * (7.0 * p * k as f64).powi(s as i32)
}

/// DT-depth and canonical-tree depth of `F_ρ` for `trials` restrictions;
/// trial `i` uses stream `i` of `seed`.
pub fn restricted_depths(
    formula: &Formula,
    family: RestrictionFamily,
    trials: u64,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    let n = formula.dimension();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let rho = family.draw(n, &mut seed::stream(seed, i))?;
            let restricted = restrict_formula(formula, &rho)?;
            Ok((formula_dt_depth(&restricted)?, canonical_tree(&restricted).depth()))
        })
        .collect()
}

/// DT-depth of a formula, computed on the variables its terms mention.
pub fn formula_dt_depth(formula: &Formula) -> Result<usize> {
    let support = formula.terms().iter().fold(0, |m, t| m | t.variables());
    let table = DenseTable::from_fn(cardinality(support), |y| {
        formula.eval(expand(y, support)).expect("point fits")
    })?;
    dt_depth(&table)
}

/// Estimates `Pr[DT-depth(F_ρ) ≥ s]` for each `s` in `depths` from one shared
/// batch of restrictions, with 99% Wilson intervals, against `r·(7pk)^s`.
/// A row is flagged as a violation iff its lower confidence limit exceeds the
/// bound.
pub fn switching_experiment(
    formula: &Formula,
    k: usize,
    r: u32,
    family: RestrictionFamily,
    depths: &[usize],
    trials: u64,
    seed: u64,
) -> Result<Vec<SwitchingRow>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("switching experiment needs trials >= 1".into()));
    }
    let n = formula.dimension();
    let p = family.effective_p(n);
    let outcomes = restricted_depths(formula, family, trials, seed)?;
    Ok(depths
        .iter()
        .map(|&s| {
            let hits = outcomes.iter().filter(|o| o.0 >= s).count() as u64;
            let tree_hits = outcomes.iter().filter(|o| o.1 >= s).count() as u64;
            let est: Proportion = wilson(hits, trials, Z_99);
            let tree: Proportion = wilson(tree_hits, trials, Z_99);
            let bound = switching_bound(k, r, p, s);
            SwitchingRow {
                k,
                r,
                n,
                p,
                s,
                trials,
                p_hat: est.estimate,
                ci_low: est.low,
                ci_high: est.high,
                bound,
                violated: est.low > bound,
                vacuous: bound >= 1.0,
                tree_p_hat: tree.estimate,
                tree_ci_low: tree.low,
                tree_violated: tree.low > bound,
            }
        })
        .collect())
}

/// Monte-Carlo estimate of `E_ρ[L1(F'_ρ)]`, where `F'` is `F` mapped onto the
/// grid of `codec`.
pub fn restricted_l1(formula: &Formula, codec: RangeCodec, p: f64, trials: u64, seed: u64) -> Result<MeanEstimate> {
    let n = formula.dimension();
    let samples = (0..trials)
        .into_par_iter()
        .map(|i| {
            let rho = Restriction::sample(n, p, &mut seed::stream(seed, i))?;
            let restricted = restrict_formula(formula, &rho)?;
            encoded_l1(&restricted, codec)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MeanEstimate::from_samples(&samples))
}

fn encoded_l1(formula: &Formula, codec: RangeCodec) -> Result<f64> {
    let support = formula.terms().iter().fold(0, |m, t| m | t.variables());
    let table = DenseTable::from_fn(cardinality(support), |y| {
        codec
            .encode(formula.eval(expand(y, support)).expect("point fits"))
            .expect("value within the codec range")
    })?;
    Ok(wht(&table)?.l1())
}

/// For every live count `ℓ` in `0..=n`, the exact mean of `L_{1,t}(f_ρ)` over
/// all restrictions with exactly `ℓ` live variables.
pub fn level_l1_by_live_count(table: &DenseTable<f64>, t: usize) -> Result<Vec<f64>> {
    let n = table.dimension();
    check_dense(n, 10)?;
    let mut sums = vec![0.0; n + 1];
    for live in 0..1u32 << n {
        let fixed = full_mask(n) & !live;
        for ones in cube::enumerate_downset(fixed) {
            let rho = Restriction { n, live, ones };
            sums[cardinality(live)] += wht(&restrict_table(table, &rho)?)?.level_l1(t);
        }
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(l, total)| total / (binomial(n, l) * 2f64.powi((n - l) as i32)))
        .collect())
}

/// Exact `E_ρ[L_{1,t}(f_ρ)]` over restrictions with parameter `p`.
pub fn expected_level_l1(table: &DenseTable<f64>, p: f64, t: usize) -> Result<f64> {
    let n = table.dimension();
    let by_count = level_l1_by_live_count(table, t)?;
    Ok(by_count
        .iter()
        .enumerate()
        .map(|(l, m)| binomial(n, l) * p.powi(l as i32) * (1.0 - p).powi((n - l) as i32) * m)
        .sum())
}
