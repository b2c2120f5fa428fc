//! Walsh-Hadamard analysis: `f̂(S) = E_x[f(x)·χ_S(x)]` with
//! `χ_S(x) = (−1)^{|S∩x|}`, level norms, truncation, and the map from
//! `{0, …, r}` onto a grid in `[−1, 1]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cube::{self, cardinality, check_dense, elements, expand, DenseTable, PointMask, MAX_DENSE_VARS};
use crate::error::{Error, Result};
use crate::formula::Formula;

/// Coefficients with smaller magnitude are treated as zero when a dense
/// transform is stored sparsely.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// In-place unnormalised fast Walsh-Hadamard transform. Applying it twice
/// multiplies by `values.len()`.
pub fn wht_in_place(values: &mut [f64]) {
    let len = values.len();
    assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        for block in values.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// A sparse spectrum; absent sets have coefficient zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumJson", into = "SpectrumJson")]
pub struct Spectrum {
    n: usize,
    coeffs: BTreeMap<PointMask, f64>,
}

impl Spectrum {
    pub fn new(n: usize, coeffs: BTreeMap<PointMask, f64>) -> Result<Self> {
        check_dense(n, cube::MAX_VARS)?;
        if let Some(&s) = coeffs.keys().find(|&&s| !cube::fits(s, n)) {
            return Err(Error::PointOutOfRange { point: s, n });
        }
        Ok(Spectrum { n, coeffs })
    }

    pub fn zero(n: usize) -> Self {
        Spectrum {
            n,
            coeffs: BTreeMap::new(),
        }
    }

    /// Sparse view of a dense coefficient vector, dropping near-zero entries.
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), 1 << n);
        let coeffs = dense
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > ZERO_TOLERANCE)
            .map(|(s, &c)| (s as PointMask, c))
            .collect();
        Spectrum { n, coeffs }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &BTreeMap<PointMask, f64> {
        &self.coeffs
    }

    pub fn get(&self, s: PointMask) -> f64 {
        self.coeffs.get(&s).copied().unwrap_or(0.0)
    }

    /// Number of stored (nonzero) coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|S|` with a nonzero coefficient; 0 for the zero spectrum.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|&s| cardinality(s)).max().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `Σ_S |f̂(S)|`.
    pub fn l1(&self) -> f64 {
        self.coeffs.values().map(|c| c.abs()).fold(0.0, |acc, v| acc + v)
    }

    /// `L_{1,t} = Σ_{|S|=t} |f̂(S)|`.
    pub fn level_l1(&self, t: usize) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&s, _)| cardinality(s) == t)
            .map(|(_, c)| c.abs())
            .fold(0.0, |acc, v| acc + v)
    }

    /// `Σ_{|S|≤τ} |f̂(S)|`.
    pub fn low_degree_l1(&self, tau: usize) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&s, _)| cardinality(s) <= tau)
            .map(|(_, c)| c.abs())
            .fold(0.0, |acc, v| acc + v)
    }

    /// `Σ_{|S|>t} f̂(S)²`; `t = −1` gives the full mass.
    pub fn l2_tail(&self, t: i64) -> f64 {
        self.coeffs
            .iter()
            .filter(|(&s, _)| cardinality(s) as i64 > t)
            .map(|(_, c)| c * c)
            .fold(0.0, |acc, v| acc + v)
    }

    /// `Σ_S f̂(S)² = E[f²]`.
    pub fn mass(&self) -> f64 {
        self.l2_tail(-1)
    }

    /// `Σ_S f̂(S)·χ_S(x)`.
    pub fn evaluate(&self, x: PointMask) -> f64 {
        self.coeffs
            .iter()
            .map(|(&s, &c)| if cube::parity(s & x) { -c } else { c })
            .sum()
    }

    /// Keeps exactly the coefficients with `|f̂(S)| ≥ θ` and `|S| ≤ τ`.
    pub fn truncate(&self, theta: f64, tau: usize) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&s, c)| c.abs() >= theta && cardinality(s) <= tau)
            .map(|(&s, &c)| (s, c))
            .collect();
        Spectrum { n: self.n, coeffs }
    }

    /// `Σ_S (f̂(S) − ĝ(S))²`, which equals `E[(f − g)²]`.
    pub fn distance_squared(&self, other: &Spectrum) -> f64 {
        let mut total = 0.0;
        for (&s, &c) in &self.coeffs {
            let d = c - other.get(s);
            total += d * d;
        }
        for (&s, &c) in &other.coeffs {
            if !self.coeffs.contains_key(&s) {
                total += c * c;
            }
        }
        total
    }

    /// Spectrum of `a·f + b`.
    pub fn affine(&self, a: f64, b: f64) -> Spectrum {
        let mut coeffs: BTreeMap<PointMask, f64> = self.coeffs.iter().map(|(&s, &c)| (s, a * c)).collect();
        *coeffs.entry(0).or_insert(0.0) += b;
        coeffs.retain(|_, c| c.abs() > ZERO_TOLERANCE);
        Spectrum { n: self.n, coeffs }
    }

    pub fn to_dense(&self) -> Result<Vec<f64>> {
        check_dense(self.n, MAX_DENSE_VARS)?;
        let mut dense = vec![0.0; 1 << self.n];
        for (&s, &c) in &self.coeffs {
            dense[s as usize] = c;
        }
        Ok(dense)
    }
}

#[derive(Serialize, Deserialize)]
struct SpectrumJson {
    n: usize,
    coeffs: Vec<CoefficientJson>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientJson {
    set: Vec<usize>,
    value: f64,
}

impl TryFrom<SpectrumJson> for Spectrum {
    type Error = Error;

    fn try_from(json: SpectrumJson) -> Result<Self> {
        check_dense(json.n, cube::MAX_VARS)?;
        let mut coeffs = BTreeMap::new();
        for c in json.coeffs {
            let s = cube::mask_of(&c.set, json.n)?;
            if coeffs.insert(s, c.value).is_some() {
                return Err(Error::InvalidParameter(format!("set {:?} listed twice", c.set)));
            }
        }
        Spectrum::new(json.n, coeffs)
    }
}

impl From<Spectrum> for SpectrumJson {
    fn from(s: Spectrum) -> Self {
        SpectrumJson {
            n: s.n,
            coeffs: s
                .coeffs
                .into_iter()
                .map(|(set, value)| CoefficientJson {
                    set: elements(set).collect(),
                    value,
                })
                .collect(),
        }
    }
}

/// Normalised coefficients of a dense table, `f̂(S)` at index `S`.
pub fn wht_dense(table: &DenseTable<f64>) -> Result<Vec<f64>> {
    check_dense(table.dimension(), MAX_DENSE_VARS)?;
    let mut v = table.values().to_vec();
    wht_in_place(&mut v);
    let scale = 1.0 / v.len() as f64;
    v.iter_mut().for_each(|c| *c *= scale);
    Ok(v)
}

pub fn wht(table: &DenseTable<f64>) -> Result<Spectrum> {
    Ok(Spectrum::from_dense(table.dimension(), &wht_dense(table)?))
}

pub fn inverse_wht(spectrum: &Spectrum) -> Result<DenseTable<f64>> {
    let mut v = spectrum.to_dense()?;
    wht_in_place(&mut v);
    DenseTable::new(spectrum.dimension(), v)
}

/// Exact spectrum of a formula, computed on the variables its terms mention.
/// Works for any `n` as long as at most 24 variables are relevant.
pub fn formula_spectrum(formula: &Formula) -> Result<Spectrum> {
    let support = formula.terms().iter().fold(0, |m, t| m | t.variables());
    let m = cardinality(support);
    if m > MAX_DENSE_VARS {
        return Err(Error::DimensionTooLarge {
            n: m,
            max: MAX_DENSE_VARS,
        });
    }
    let table = DenseTable::from_fn(m, |y| formula.eval(expand(y, support)).expect("point fits") as f64)?;
    let dense = wht_dense(&table)?;
    let coeffs = dense
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs() > ZERO_TOLERANCE)
        .map(|(y, &c)| (expand(y as PointMask, support), c))
        .collect();
    Spectrum::new(formula.dimension(), coeffs)
}

/// The affine bijection from `{0, …, r}` onto the `r + 1` equally spaced
/// points of `[−1, 1]`: `v ↦ 2v/r − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeCodec {
    r: u32,
}

impl RangeCodec {
    pub fn new(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameter("range codec needs r >= 1".into()));
        }
        Ok(RangeCodec { r })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Distance between adjacent grid points, `2/r`.
    pub fn step(&self) -> f64 {
        2.0 / self.r as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..=self.r).map(|v| self.encode_unchecked(v)).collect()
    }

    pub fn encode(&self, v: u32) -> Result<f64> {
        if v > self.r {
            return Err(Error::ValueOutOfRange {
                value: v as u64,
                max: self.r as u64,
            });
        }
        Ok(self.encode_unchecked(v))
    }

    fn encode_unchecked(&self, v: u32) -> f64 {
        2.0 * v as f64 / self.r as f64 - 1.0
    }

    /// Nearest grid point, back in `{0, …, r}`. Midpoints go to the smaller
    /// value; values outside `[−1, 1]` clamp to the ends.
    pub fn decode(&self, y: f64) -> u32 {
        let t = (y + 1.0) * self.r as f64 / 2.0;
        let idx = (t - 0.5).ceil();
        if idx.is_nan() {
            return 0;
        }
        idx.clamp(0.0, self.r as f64) as u32
    }

    /// The grid point nearest to `y`.
    pub fn round(&self, y: f64) -> f64 {
        self.encode_unchecked(self.decode(y))
    }
}

/// `2v/r − 1` applied pointwise.
pub fn range_encode(table: &DenseTable<u32>, r: u32) -> Result<DenseTable<f64>> {
    let codec = RangeCodec::new(r)?;
    let values = table
        .values()
        .iter()
        .map(|&v| codec.encode(v))
        .collect::<Result<Vec<_>>>()?;
    DenseTable::new(table.dimension(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{random_formula, Term};
    use crate::seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn character(n: usize, s0: PointMask) -> DenseTable<f64> {
        DenseTable::from_fn(n, |x| if cube::parity(s0 & x) { -1.0 } else { 1.0 }).unwrap()
    }

    fn naive_coefficient(table: &DenseTable<f64>, s: PointMask) -> f64 {
        let sum: f64 = table
            .values()
            .iter()
            .enumerate()
            .map(|(x, &v)| if cube::parity(s & x as PointMask) { -v } else { v })
            .sum();
        sum / table.values().len() as f64
    }

    #[test]
    fn constant_and_characters() {
        let one = wht(&DenseTable::from_fn(3, |_| 1.0).unwrap()).unwrap();
        assert_eq!(one.coeffs().len(), 1);
        assert_eq!(one.get(0), 1.0);
        assert_eq!(one.level_l1(0), 1.0);
        assert_eq!(one.level_l1(2), 0.0);
        assert_eq!(one.degree(), 0);

        let chi = wht(&character(4, 0b1011)).unwrap();
        assert_eq!(chi.coeffs().len(), 1);
        assert!((chi.get(0b1011) - 1.0).abs() < 1e-15);
        assert_eq!(chi.level_l1(3), 1.0);
        assert_eq!(chi.degree(), 3);
    }

    #[test]
    fn inverse_of_single_coefficient_and_empty() {
        let s = Spectrum::new(3, BTreeMap::from([(0b101, 1.0)])).unwrap();
        assert_eq!(inverse_wht(&s).unwrap(), character(3, 0b101));
        let z = inverse_wht(&Spectrum::zero(2)).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tails() {
        let mut rng = seed::rng(1);
        let t = DenseTable::from_fn(5, |_| rng.random_range(-1.0..1.0)).unwrap();
        let spec = wht(&t).unwrap();
        let energy = t.values().iter().map(|v| v * v).sum::<f64>() / 32.0;
        assert!((spec.l2_tail(-1) - energy).abs() < 1e-9);
        assert_eq!(spec.l2_tail(5), 0.0);
        assert_eq!(spec.l2_tail(7), 0.0);
    }

    #[test]
    fn truncation_edges_and_parseval_error() {
        let mut rng = seed::rng(2);
        let t = DenseTable::from_fn(6, |_| rng.random_range(-1.0..1.0)).unwrap();
        let spec = wht(&t).unwrap();
        assert_eq!(spec.truncate(0.0, 6), spec);
        assert!(spec.truncate(spec.max_abs() + 1e-9, 6).is_empty());

        let g = spec.truncate(0.05, 3);
        assert!(g.coeffs().iter().all(|(&s, c)| c.abs() >= 0.05 && cardinality(s) <= 3));
        let dropped: f64 = spec
            .coeffs()
            .iter()
            .filter(|(s, _)| !g.coeffs().contains_key(s))
            .map(|(_, c)| c * c)
            .sum();
        let gt = inverse_wht(&g).unwrap();
        let direct = t
            .values()
            .iter()
            .zip(gt.values())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / 64.0;
        assert!((dropped - direct).abs() < 1e-9);
        assert!((spec.distance_squared(&g) - direct).abs() < 1e-9);
    }

    #[test]
    fn codec_grids() {
        let c1 = RangeCodec::new(1).unwrap();
        assert_eq!(c1.grid(), vec![-1.0, 1.0]);
        let c2 = RangeCodec::new(2).unwrap();
        assert_eq!(c2.grid(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(c2.decode(-0.5), 0);
        assert_eq!(c2.decode(0.5), 1);
        assert_eq!(c2.decode(7.0), 2);
        assert_eq!(c2.decode(-7.0), 0);
        assert!(c2.encode(3).is_err());
        assert!(RangeCodec::new(0).is_err());
    }

    #[test]
    fn codec_sweep() {
        for r in 1..=6 {
            let c = RangeCodec::new(r).unwrap();
            let half = c.step() / 2.0;
            for v in 0..=r {
                let y = c.encode(v).unwrap();
                for i in -99..=99 {
                    let delta = half * i as f64 / 100.0;
                    assert_eq!(c.decode(y + delta), v, "r={r} v={v} delta={delta}");
                }
            }
        }
    }

    #[test]
    fn encode_table() {
        let t = DenseTable::new(1, vec![0u32, 2]).unwrap();
        assert_eq!(range_encode(&t, 2).unwrap().values(), &[-1.0, 1.0]);
        assert!(range_encode(&t, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = Spectrum::new(3, BTreeMap::from([(0, 0.5), (0b110, -0.25)])).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"n":3,"coeffs":[{"set":[],"value":0.5},{"set":[1,2],"value":-0.25}]}"#
        );
        assert_eq!(serde_json::from_str::<Spectrum>(&json).unwrap(), s);
        assert!(serde_json::from_str::<Spectrum>(r#"{"n":2,"coeffs":[{"set":[2],"value":1}]}"#).is_err());
    }

    #[test]
    fn formula_spectrum_on_wide_cube() {
        let f = Formula::new(32, vec![Term::monotone(1 << 31, 1), Term::new(1, 1 << 5, 2).unwrap()]).unwrap();
        let spec = formula_spectrum(&f).unwrap();
        let mut rng = seed::rng(3);
        for _ in 0..200 {
            let x: u32 = rng.random();
            assert!((spec.evaluate(x) - f.eval(x).unwrap() as f64).abs() < 1e-9);
        }
        assert_eq!(spec.dimension(), 32);
    }

    proptest! {
        #[test]
        fn parseval_and_round_trip(values in (0usize..=8).prop_flat_map(|n| proptest::collection::vec(-1.0f64..1.0, 1 << n))) {
            let n = values.len().trailing_zeros() as usize;
            let t = DenseTable::new(n, values).unwrap();
            let spec = wht(&t).unwrap();
            let energy = t.values().iter().map(|v| v * v).sum::<f64>() / t.values().len() as f64;
            prop_assert!((spec.mass() - energy).abs() < 1e-9);
            let back = inverse_wht(&spec).unwrap();
            for (a, b) in t.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            for s in [0, 1, (1u32 << n) - 1] {
                if cube::fits(s, n) {
                    prop_assert!((spec.get(s) - naive_coefficient(&t, s)).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn sparse_round_trip(n in 1usize..=8, entries in proptest::collection::vec((any::<u32>(), -1.0f64..1.0), 0..8)) {
            let coeffs: BTreeMap<PointMask, f64> = entries
                .into_iter()
                .map(|(s, c)| (s & cube::full_mask(n), c))
                .filter(|(_, c)| c.abs() > ZERO_TOLERANCE)
                .collect();
            let spec = Spectrum::new(n, coeffs).unwrap();
            let back = wht(&inverse_wht(&spec).unwrap()).unwrap();
            prop_assert!(spec.distance_squared(&back) < 1e-18);
        }

        #[test]
        fn formula_spectrum_matches_dense(seed in any::<u64>(), n in 1usize..=8, k in 1usize..=3, s in 1usize..=5) {
            let f = random_formula(n, k.min(n), 3, s, seed).unwrap();
            let dense = wht(&f.to_table().unwrap().map(|&v| v as f64)).unwrap();
            prop_assert!(formula_spectrum(&f).unwrap().distance_squared(&dense) < 1e-18);
        }
    }
}
