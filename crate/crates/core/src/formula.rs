//! Pseudo-Boolean DNF formulas.
//!
//! A formula is `max_t a_t · (∧_{i∈A_t} x_i) · (∧_{j∈B_t} ¬x_j)`: its value at
//! `x` is the largest constant among the terms `x` satisfies, and `0` when no
//! term is satisfied.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{self, cardinality, check_dense, elements, full_mask, DenseTable, PointFunction, PointMask};
use crate::error::{Error, Result};
use crate::seed;

/// One weighted conjunction: positive literals `A`, negated literals `B`, and
/// the constant `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "TermJson", into = "TermJson")]
pub struct Term {
    positives: PointMask,
    negatives: PointMask,
    constant: u32,
}

impl Term {
    pub fn new(positives: PointMask, negatives: PointMask, constant: u32) -> Result<Self> {
        if positives & negatives != 0 {
            return Err(Error::InvalidTerm(format!(
                "variables {:?} appear both positive and negated",
                elements(positives & negatives).collect::<Vec<_>>()
            )));
        }
        Ok(Term {
            positives,
            negatives,
            constant,
        })
    }

    /// A monotone term `a · ∧_{i∈A} x_i`.
    pub fn monotone(positives: PointMask, constant: u32) -> Self {
        Term {
            positives,
            negatives: 0,
            constant,
        }
    }

    pub fn positives(&self) -> PointMask {
        self.positives
    }

    pub fn negatives(&self) -> PointMask {
        self.negatives
    }

    pub fn constant(&self) -> u32 {
        self.constant
    }

    /// All variables mentioned by the term.
    pub fn variables(&self) -> PointMask {
        self.positives | self.negatives
    }

    pub fn width(&self) -> usize {
        cardinality(self.variables())
    }

    pub fn is_empty(&self) -> bool {
        self.variables() == 0
    }

    pub fn is_satisfied_by(&self, x: PointMask) -> bool {
        x & self.positives == self.positives && x & self.negatives == 0
    }

    /// Applies a partial assignment: `set` marks the fixed variables, `ones`
    /// (a subset of `set`) those fixed to 1. Returns `None` if the term is
    /// falsified, otherwise the term with its satisfied literals removed.
    pub(crate) fn assign(&self, set: PointMask, ones: PointMask) -> Option<Term> {
        let zeros = set & !ones;
        if self.positives & zeros != 0 || self.negatives & ones != 0 {
            return None;
        }
        Some(Term {
            positives: self.positives & !set,
            negatives: self.negatives & !set,
            constant: self.constant,
        })
    }

    fn dominates(&self, other: &Term) -> bool {
        self.constant >= other.constant
            && self.positives & !other.positives == 0
            && self.negatives & !other.negatives == 0
    }
}

/// A pseudo-Boolean DNF over `n` variables. Term order is preserved; it does
/// not affect evaluation but fixes the canonical decision tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FormulaJson", into = "FormulaJson")]
pub struct Formula {
    n: usize,
    terms: Vec<Term>,
}

impl Formula {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        check_dense(n, cube::MAX_VARS)?;
        let full = full_mask(n);
        if let Some(t) = terms.iter().find(|t| t.variables() & !full != 0) {
            return Err(Error::InvalidTerm(format!(
                "term over variables {:?} does not fit in {n} variables",
                elements(t.variables()).collect::<Vec<_>>()
            )));
        }
        Ok(Formula { n, terms })
    }

    /// The formula with no terms; it evaluates to 0 everywhere.
    pub fn empty(n: usize) -> Result<Self> {
        Formula::new(n, Vec::new())
    }

    /// A single empty term carrying `c`.
    pub fn constant(n: usize, c: u32) -> Result<Self> {
        Formula::new(n, vec![Term::monotone(0, c)])
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Number of terms.
    pub fn size(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, x: PointMask) -> Result<u32> {
        cube::check_point(x, self.n)?;
        Ok(self.value_at(x))
    }

    /// Largest `|A_t| + |B_t|` (0 for an empty formula).
    pub fn width(&self) -> usize {
        self.terms.iter().map(Term::width).max().unwrap_or(0)
    }

    pub fn pos_width(&self) -> usize {
        self.terms.iter().map(|t| cardinality(t.positives)).max().unwrap_or(0)
    }

    pub fn neg_width(&self) -> usize {
        self.terms.iter().map(|t| cardinality(t.negatives)).max().unwrap_or(0)
    }

    pub fn max_constant(&self) -> u32 {
        self.terms.iter().map(|t| t.constant).max().unwrap_or(0)
    }

    /// True iff no term has a negated literal.
    pub fn is_monotone(&self) -> bool {
        self.terms.iter().all(|t| t.negatives == 0)
    }

    pub fn to_table(&self) -> Result<DenseTable<u32>> {
        DenseTable::from_fn(self.n, |x| self.value_at(x))
    }

    /// Removes zero-constant terms, duplicates, and terms dominated by another
    /// term with a constant at least as large and a subset of its literals.
    /// The computed function is unchanged.
    pub fn simplify(&self) -> Formula {
        let mut candidates: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if t.constant > 0 && !candidates.contains(t) {
                candidates.push(*t);
            }
        }
        let kept = candidates
            .iter()
            .enumerate()
            .filter(|&(i, t)| !candidates.iter().enumerate().any(|(j, u)| j != i && u.dominates(t)))
            .map(|(_, t)| *t)
            .collect();
        Formula { n: self.n, terms: kept }
    }

    /// Draws `s` terms independently. Each term's literal set is uniform
    /// over all `(A, B)` with `A ∩ B = ∅` and `|A| + |B| ≤ k`, and its
    /// constant is uniform in `1..=r`.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, r: u32, s: usize, rng: &mut R) -> Result<Self> {
        check_dense(n, cube::MAX_VARS)?;
        if k > n || r == 0 || s == 0 {
            return Err(Error::InvalidParameter(format!(
                "random formula needs k <= n, r >= 1, s >= 1 (got n={n}, k={k}, r={r}, s={s})"
            )));
        }
        // C(n, w) · 2^w legal literal sets of width w.
        let weights: Vec<f64> = (0..=k).map(|w| binomial(n, w) * 2f64.powi(w as i32)).collect();
        let widths = WeightedIndex::new(&weights).expect("weights are positive");
        let mut terms = Vec::with_capacity(s);
        for _ in 0..s {
            let w = widths.sample(rng);
            let mut positives = 0;
            let mut negatives = 0;
            for v in rand::seq::index::sample(rng, n, w) {
                if rng.random_bool(0.5) {
                    positives |= 1 << v;
                } else {
                    negatives |= 1 << v;
                }
            }
            let constant = rng.random_range(1..=r);
            terms.push(Term {
                positives,
                negatives,
                constant,
            });
        }
        Ok(Formula { n, terms })
    }
}

/// [`Formula::random`] driven by a fresh generator seeded with `seed`.
pub fn random_formula(n: usize, k: usize, r: u32, s: usize, seed: u64) -> Result<Formula> {
    Formula::random(n, k, r, s, &mut seed::rng(seed))
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl PointFunction for Formula {
    type Value = u32;

    fn dimension(&self) -> usize {
        self.n
    }

    fn value_at(&self, x: PointMask) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.is_satisfied_by(x))
            .map(|t| t.constant)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Serialize, Deserialize)]
struct FormulaJson {
    n: usize,
    terms: Vec<Term>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    pos: Vec<usize>,
    neg: Vec<usize>,
    c: u32,
}

impl TryFrom<TermJson> for Term {
    type Error = Error;

    fn try_from(t: TermJson) -> Result<Self> {
        let pos = cube::mask_of(&t.pos, cube::MAX_VARS).map_err(|e| Error::InvalidTerm(e.to_string()))?;
        let neg = cube::mask_of(&t.neg, cube::MAX_VARS).map_err(|e| Error::InvalidTerm(e.to_string()))?;
        Term::new(pos, neg, t.c)
    }
}

impl From<Term> for TermJson {
    fn from(t: Term) -> Self {
        TermJson {
            pos: elements(t.positives).collect(),
            neg: elements(t.negatives).collect(),
            c: t.constant,
        }
    }
}

impl TryFrom<FormulaJson> for Formula {
    type Error = Error;

    fn try_from(json: FormulaJson) -> Result<Self> {
        check_dense(json.n, cube::MAX_VARS)?;
        Formula::new(json.n, json.terms)
    }
}

impl From<Formula> for FormulaJson {
    fn from(f: Formula) -> Self {
        FormulaJson { n: f.n, terms: f.terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;

    fn pairs_formula(n: usize) -> Formula {
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                terms.push(Term::monotone(1 << i | 1 << j, 1));
            }
        }
        Formula::new(n, terms).unwrap()
    }

    #[test]
    fn pair_formula_evaluates_threshold_at_two() {
        let f = pairs_formula(3);
        assert_eq!(f.eval(0b011).unwrap(), 1);
        assert_eq!(f.eval(0b001).unwrap(), 0);
        assert_eq!(f.to_table().unwrap().values(), &[0, 0, 0, 1, 0, 1, 1, 1]);
    }

    #[test]
    fn constant_term_and_empty_formula() {
        let f = Formula::constant(4, 5).unwrap();
        assert!((0..16).all(|x| f.eval(x).unwrap() == 5));
        assert_eq!(f.width(), 0);
        assert!(f.to_table().unwrap().values().iter().all(|&v| v == 5));
        let e = Formula::empty(3).unwrap();
        assert_eq!(e.eval(0b111).unwrap(), 0);
        assert_eq!(e.width(), 0);
    }

    #[test]
    fn widths_and_monotonicity() {
        let f = Formula::new(4, vec![Term::new(0b0011, 0b0100, 2).unwrap()]).unwrap();
        assert_eq!((f.width(), f.pos_width(), f.neg_width()), (3, 2, 1));
        assert!(!f.is_monotone());
        assert!(pairs_formula(4).is_monotone());
    }

    #[test]
    fn term_rejects_overlapping_literals() {
        assert!(matches!(Term::new(0b1, 0b1, 1), Err(Error::InvalidTerm(_))));
        assert!(Formula::new(2, vec![Term::monotone(0b100, 1)]).is_err());
    }

    #[test]
    fn random_formula_is_deterministic_and_respects_bounds() {
        assert_eq!(
            random_formula(6, 2, 3, 4, 11).unwrap(),
            random_formula(6, 2, 3, 4, 11).unwrap()
        );
        let mut rng = seed::rng(5);
        for _ in 0..1000 {
            let f = Formula::random(6, 2, 3, 4, &mut rng).unwrap();
            assert_eq!(f.size(), 4);
            assert!(f.width() <= 2);
            assert!(f.max_constant() <= 3);
            assert!(f.terms().iter().all(|t| t.constant() >= 1));
        }
        assert!(random_formula(3, 4, 1, 1, 0).is_err());
        assert!(random_formula(3, 1, 0, 1, 0).is_err());
        assert!(random_formula(3, 1, 1, 0, 0).is_err());
    }

    #[test]
    fn random_widths_follow_legal_mask_counts() {
        // n=3, k=1: 1 empty term vs 6 single literals.
        let mut rng = seed::rng(9);
        let draws = 70_000;
        let empty = (0..draws)
            .filter(|_| Formula::random(3, 1, 1, 1, &mut rng).unwrap().width() == 0)
            .count();
        let p = empty as f64 / draws as f64;
        let sigma = (1.0 / 7.0 * 6.0 / 7.0 / draws as f64).sqrt();
        assert!((p - 1.0 / 7.0).abs() < 4.0 * sigma, "{p}");
    }

    #[test]
    fn simplify_drops_dominated_and_zero_terms() {
        let f = Formula::new(
            3,
            vec![
                Term::monotone(0b001, 2),
                Term::monotone(0b011, 1),
                Term::monotone(0b011, 3),
                Term::monotone(0b100, 0),
                Term::monotone(0b001, 2),
            ],
        )
        .unwrap();
        let s = f.simplify();
        assert_eq!(s.terms(), &[Term::monotone(0b001, 2), Term::monotone(0b011, 3)]);
        assert_eq!(s.to_table().unwrap(), f.to_table().unwrap());
    }

    #[test]
    fn json_format() {
        let f = Formula::new(3, vec![Term::new(0b011, 0b100, 2).unwrap()]).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"n":3,"terms":[{"pos":[0,1],"neg":[2],"c":2}]}"#);
        assert_eq!(serde_json::from_str::<Formula>(&json).unwrap(), f);
        assert!(serde_json::from_str::<Formula>(r#"{"n":2,"terms":[{"pos":[0],"neg":[0],"c":1}]}"#).is_err());
        assert!(serde_json::from_str::<Formula>(r#"{"n":2,"terms":[{"pos":[5],"neg":[],"c":1}]}"#).is_err());
    }

    fn arb_formula(max_n: usize) -> impl Strategy<Value = Formula> {
        (1..=max_n, 1usize..8, any::<u64>()).prop_map(|(n, s, seed)| {
            let k = n.min(3);
            random_formula(n, k, 4, s, seed).unwrap()
        })
    }

    proptest! {
        #[test]
        fn eval_is_max_over_satisfied_terms(f in arb_formula(8)) {
            for x in 0..1u32 << f.dimension() {
                let mut best = 0;
                for t in f.terms() {
                    let sat = elements(t.positives()).all(|i| x >> i & 1 == 1)
                        && elements(t.negatives()).all(|j| x >> j & 1 == 0);
                    if sat && t.constant() > best {
                        best = t.constant();
                    }
                }
                prop_assert_eq!(f.eval(x).unwrap(), best);
                prop_assert!(best <= f.max_constant());
            }
        }

        #[test]
        fn eval_ignores_term_order(f in arb_formula(8), seed in any::<u64>()) {
            let mut terms = f.terms().to_vec();
            terms.shuffle(&mut seed::rng(seed));
            let g = Formula::new(f.dimension(), terms).unwrap();
            prop_assert_eq!(f.to_table().unwrap(), g.to_table().unwrap());
            prop_assert_eq!(f.simplify().to_table().unwrap(), f.to_table().unwrap());
        }

        #[test]
        fn monotone_formulas_compute_monotone_functions(n in 1usize..=10, s in 1usize..8, seed in any::<u64>()) {
            let f = random_formula(n, n.min(3), 3, s, seed).unwrap();
            let mono = Formula::new(n, f.terms().iter().map(|t| Term::monotone(t.positives(), t.constant())).collect()).unwrap();
            prop_assert!(mono.is_monotone());
            let table = mono.to_table().unwrap();
            for x in 0..1u32 << n {
                for i in 0..n {
                    prop_assert!(table.values()[x as usize] <= table.values()[(x | 1 << i) as usize]);
                }
            }
        }
    }
}
