//! Exact pseudo-Boolean DNF representations of submodular functions.
//!
//! [`monotone_dnf`] walks upward from `∅`, emitting `f(S)·∧_{i∈S} x_i` at every
//! set reached through strict increases. [`general_dnf`] walks downward from
//! `[n]` through strict increases and, at each set `S` it reaches, represents
//! the monotone lower extension of `f` on `↓S` monotonically and conjoins the
//! negations of everything outside `S`. Both walks visit each set once.
//!
//! Every step of either walk raises `f` by at least one, so no walk is longer
//! than the range maximum `k`. That bounds the positive and the negated width
//! by `k` for any input; submodularity is what makes the result exact.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::cube::{cardinality, check_dense, elements, enumerate_downset, expand, full_mask, PointMask};
use crate::error::Result;
use crate::formula::{Formula, Term};
use crate::submodular::{monlb, SetFunction};

/// Largest dimension accepted by [`cover_check`].
pub const MAX_COVER_VARS: usize = 14;

/// `B(S) = {j ∈ S : f(S ∖ {j}) ≤ f(S)}` together with `S`. The region is the
/// interval `[S ∖ B(S), S]`, on which `f` is nondecreasing when `f` is
/// submodular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneRegion {
    pub set: PointMask,
    pub b_of_s: PointMask,
}

impl MonotoneRegion {
    /// Bottom of the region, `S ∖ B(S)`.
    pub fn floor(&self) -> PointMask {
        self.set & !self.b_of_s
    }

    pub fn contains(&self, y: PointMask) -> bool {
        y & !self.set == 0 && self.floor() & !y == 0
    }

    /// Members of the region in increasing mask order.
    pub fn members(&self) -> impl Iterator<Item = PointMask> {
        let floor = self.floor();
        enumerate_downset(self.b_of_s).map(move |b| floor | b)
    }

    pub fn len(&self) -> usize {
        1 << cardinality(self.b_of_s)
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn monotone_region(f: &SetFunction, s: PointMask) -> MonotoneRegion {
    let b_of_s = elements(s)
        .filter(|&j| f.value(s & !(1 << j)) <= f.value(s))
        .fold(0, |b, j| b | 1 << j);
    MonotoneRegion { set: s, b_of_s }
}

/// Monotone DNF of a monotone submodular `f`, with width at most `k`.
pub fn monotone_dnf(f: &SetFunction) -> Formula {
    let n = f.dimension();
    let terms = monotone_terms(f);
    Formula::new(n, terms).expect("terms fit in n variables")
}

fn monotone_terms(f: &SetFunction) -> Vec<Term> {
    let n = f.dimension();
    let mut seen = HashSet::new();
    let mut terms = Vec::new();
    let mut stack = vec![0 as PointMask];
    seen.insert(0);
    // Explicit stack in reverse push order reproduces recursive preorder with
    // ascending j.
    while let Some(s) = stack.pop() {
        debug_assert!(f.value(s) as usize >= cardinality(s));
        terms.push(Term::monotone(s, f.value(s)));
        let ups: Vec<PointMask> = elements(full_mask(n) & !s)
            .map(|j| s | 1 << j)
            .filter(|&t| f.value(t) > f.value(s))
            .collect();
        for &t in ups.iter().rev() {
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    terms
}

/// The terms contributed by one recursion set of [`general_dnf`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermGroup {
    pub set: PointMask,
    pub terms: Vec<Term>,
}

/// A DNF of `f` together with the recursion sets that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub formula: Formula,
    pub groups: Vec<TermGroup>,
}

/// Sets visited by the downward walk from `[n]` through strict increases,
/// in preorder with ascending removed element.
pub fn recursion_sets(f: &SetFunction) -> Vec<PointMask> {
    let n = f.dimension();
    let top = full_mask(n);
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut stack = vec![top];
    seen.insert(top);
    while let Some(s) = stack.pop() {
        debug_assert!(f.value(s) as usize >= n - cardinality(s));
        order.push(s);
        let downs: Vec<PointMask> = elements(s)
            .map(|j| s & !(1 << j))
            .filter(|&t| f.value(t) > f.value(s))
            .collect();
        for &t in downs.iter().rev() {
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    order
}

/// DNF of a submodular `f` with at most `k` positive and `k` negated literals
/// per term, with the term group of every recursion set.
pub fn general_dnf_traced(f: &SetFunction) -> Decomposition {
    let n = f.dimension();
    let groups: Vec<TermGroup> = recursion_sets(f)
        .into_iter()
        .map(|s| {
            let outside = full_mask(n) & !s;
            let terms = monotone_terms(&monlb(f, s))
                .into_iter()
                .map(|t| Term::new(expand(t.positives(), s), outside, t.constant()).expect("disjoint literals"))
                .collect();
            TermGroup { set: s, terms }
        })
        .collect();
    let mut seen = HashSet::new();
    let terms = groups
        .iter()
        .flat_map(|g| g.terms.iter().copied())
        .filter(|t| seen.insert(*t))
        .collect();
    Decomposition {
        formula: Formula::new(n, terms).expect("terms fit in n variables"),
        groups,
    }
}

pub fn general_dnf(f: &SetFunction) -> Formula {
    general_dnf_traced(f).formula
}

/// Whether the monotone regions of all recursion sets cover `2^[n]`.
pub fn cover_check(f: &SetFunction) -> Result<bool> {
    let n = f.dimension();
    check_dense(n, MAX_COVER_VARS)?;
    let mut covered = vec![false; 1 << n];
    for s in recursion_sets(f) {
        for y in monotone_region(f, s).members() {
            covered[y as usize] = true;
        }
    }
    Ok(covered.into_iter().all(|c| c))
}

/// Outcome of comparing a formula with a set function point by point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub exact: bool,
    pub mismatches: u64,
    pub first_mismatch: Option<PointMask>,
    pub terms: usize,
    pub width: usize,
    pub pos_width: usize,
    pub neg_width: usize,
    pub max_constant: u32,
}

pub fn verify(f: &SetFunction, formula: &Formula) -> Result<VerifyReport> {
    let table = formula.to_table()?;
    let mut mismatches = 0;
    let mut first_mismatch = None;
    for (x, (&a, &b)) in table.values().iter().zip(f.values()).enumerate() {
        if a != b {
            mismatches += 1;
            first_mismatch.get_or_insert(x as PointMask);
        }
    }
    Ok(VerifyReport {
        exact: mismatches == 0 && table.dimension() == f.dimension(),
        mismatches,
        first_mismatch,
        terms: formula.size(),
        width: formula.width(),
        pos_width: formula.pos_width(),
        neg_width: formula.neg_width(),
        max_constant: formula.max_constant(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use crate::submodular::{cut_function, enumerate_submodular, zoo};
    use proptest::prelude::*;

    fn triangle_cut() -> SetFunction {
        cut_function(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn constant_gives_one_empty_term() {
        let f = SetFunction::from_fn(3, |_| 2).unwrap();
        let d = monotone_dnf(&f);
        assert_eq!(d.terms(), &[Term::monotone(0, 2)]);
        assert_eq!(general_dnf(&f).terms(), &[Term::monotone(0, 2)]);
    }

    #[test]
    fn or_of_two() {
        let f = SetFunction::from_fn(2, |s| (s != 0) as u32).unwrap();
        let d = monotone_dnf(&f);
        assert_eq!(
            d.terms(),
            &[Term::monotone(0, 0), Term::monotone(0b01, 1), Term::monotone(0b10, 1)]
        );
        assert!(verify(&f, &d).unwrap().exact);
    }

    #[test]
    fn regions() {
        let card = SetFunction::from_fn(3, |s| cardinality(s) as u32).unwrap();
        let r = monotone_region(&card, 0b111);
        assert_eq!(r.b_of_s, 0b111);
        assert_eq!(r.members().count(), 8);

        let r = monotone_region(&triangle_cut(), 0b111);
        assert_eq!(r.b_of_s, 0);
        assert_eq!(r.members().collect::<Vec<_>>(), vec![0b111]);
        assert!(r.contains(0b111) && !r.contains(0b011));
    }

    #[test]
    fn triangle_cut_decomposition() {
        let f = triangle_cut();
        let d = general_dnf(&f);
        let report = verify(&f, &d).unwrap();
        assert!(report.exact, "{d:?}");
        assert!(report.pos_width <= 2 && report.neg_width <= 2);
        assert!(cover_check(&f).unwrap());
        assert_eq!(recursion_sets(&f)[0], 0b111);
        assert_eq!(recursion_sets(&f), vec![0b111, 0b110, 0b101, 0b011]);
    }

    #[test]
    fn monotone_input_needs_no_recursion() {
        let mut rng = seed::rng(4);
        for _ in 0..50 {
            let f = zoo::random_monotone_submodular(6, &mut rng);
            assert_eq!(recursion_sets(&f), vec![full_mask(6)]);
            assert_eq!(
                general_dnf(&f).to_table().unwrap(),
                monotone_dnf(&f).to_table().unwrap()
            );
        }
    }

    #[test]
    fn exhaustive_monotone_small_cube() {
        for k in 0..=3 {
            for f in enumerate_submodular(4, k, true).unwrap() {
                let d = monotone_dnf(&f);
                let report = verify(&f, &d).unwrap();
                assert!(report.exact && d.is_monotone() && report.width <= k as usize, "{f:?}");
            }
        }
    }

    #[test]
    fn exhaustive_general_small_cube() {
        for k in 0..=2 {
            for f in enumerate_submodular(4, k, false).unwrap() {
                let d = general_dnf(&f);
                let report = verify(&f, &d).unwrap();
                assert!(report.exact, "{f:?}");
                assert!(report.pos_width <= k as usize && report.neg_width <= k as usize);
                assert!(report.max_constant <= k);
                assert!(cover_check(&f).unwrap());
            }
        }
    }

    #[test]
    fn boolean_monotone_submodular_is_a_1_dnf() {
        for f in enumerate_submodular(4, 1, true).unwrap() {
            assert!(monotone_dnf(&f).width() <= 1);
        }
        let mut rng = seed::rng(9);
        let mut found = 0;
        while found < 40 {
            let f = zoo::random_monotone_submodular(10, &mut rng);
            if f.range_max() > 1 {
                continue;
            }
            found += 1;
            let d = monotone_dnf(&f);
            assert!(d.width() <= 1 && verify(&f, &d).unwrap().exact);
        }
    }

    #[test]
    fn non_submodular_input_reports_mismatch() {
        let threshold = SetFunction::from_fn(3, |s| (cardinality(s) >= 2) as u32).unwrap();
        let d = general_dnf(&threshold);
        let report = verify(&threshold, &d).unwrap();
        assert!(!report.exact);
        assert!(report.mismatches > 0);
    }

    #[test]
    fn cover_check_dimension_limit() {
        let f = SetFunction::from_fn(15, |_| 0).unwrap();
        assert!(cover_check(&f).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn random_submodular_round_trips(seed in any::<u64>(), n in 1usize..=8) {
            let f = zoo::random_submodular(n, &mut seed::rng(seed));
            let k = f.range_max() as usize;
            let d = general_dnf_traced(&f);
            let report = verify(&f, &d.formula).unwrap();
            prop_assert!(report.exact);
            prop_assert!(report.pos_width <= k && report.neg_width <= k);
            prop_assert!(cover_check(&f).unwrap());
            for group in &d.groups {
                prop_assert!(cardinality(group.set) + k >= n);
                let part = Formula::new(n, group.terms.clone()).unwrap().to_table().unwrap();
                let region = monotone_region(&f, group.set);
                for y in 0..1u32 << n {
                    prop_assert!(part.values()[y as usize] <= f.value(y));
                    if region.contains(y) {
                        prop_assert_eq!(part.values()[y as usize], f.value(y));
                    }
                }
            }
        }

        #[test]
        fn region_is_monotone(seed in any::<u64>(), n in 1usize..=10, s in any::<u32>()) {
            let f = zoo::random_submodular(n, &mut seed::rng(seed));
            let region = monotone_region(&f, s & full_mask(n));
            for y in region.members() {
                for j in elements(region.set & !y) {
                    prop_assert!(f.value(y) <= f.value(y | 1 << j));
                }
            }
        }
    }
}
