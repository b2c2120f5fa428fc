//! Boolean-cube fundamentals.
//!
//! A point `x ∈ {0,1}^n` and a set `S ⊆ [n]` are the same thing here: bit `i`
//! of a [`PointMask`] is set iff element `i` belongs to the set (equivalently
//! `x_i = 1`). Variables are 0-based.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the cube / a subset of the ground set, as a bitmask.
pub type PointMask = u32;

/// Largest number of variables a mask can address.
pub const MAX_VARS: usize = 32;

/// Largest dimension for which dense `2^n` structures are built.
pub const MAX_DENSE_VARS: usize = 24;

/// The mask with the low `n` bits set.
pub fn full_mask(n: usize) -> PointMask {
    debug_assert!(n <= MAX_VARS);
    if n == MAX_VARS {
        PointMask::MAX
    } else {
        (1 << n) - 1
    }
}

/// Whether `x` only uses the low `n` bits.
pub fn fits(x: PointMask, n: usize) -> bool {
    x & !full_mask(n) == 0
}

pub(crate) fn check_point(x: PointMask, n: usize) -> Result<()> {
    if fits(x, n) {
        Ok(())
    } else {
        Err(Error::PointOutOfRange { point: x, n })
    }
}

pub(crate) fn check_dense(n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::DimensionTooLarge { n, max })
    } else {
        Ok(())
    }
}

/// Number of elements of the set.
pub fn cardinality(x: PointMask) -> usize {
    x.count_ones() as usize
}

/// Parity of `|x|`, i.e. `χ_S(x) = (-1)^{|S ∩ x|}` is `-1` iff
/// `parity(S & x)`.
pub fn parity(x: PointMask) -> bool {
    x.count_ones() & 1 == 1
}

/// Builds a mask from element indices.
pub fn mask_of(elements: &[usize], n: usize) -> Result<PointMask> {
    let mut mask = 0;
    for &e in elements {
        if e >= n || e >= MAX_VARS {
            return Err(Error::InvalidParameter(format!(
                "element {e} is outside the ground set of size {n}"
            )));
        }
        mask |= 1 << e;
    }
    Ok(mask)
}

/// The elements of a mask, in increasing order.
pub fn elements(mut x: PointMask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if x == 0 {
            None
        } else {
            let i = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(i)
        }
    })
}

/// Packs the bits of `x` selected by `ground` into the low bits (in order).
pub fn compress(x: PointMask, ground: PointMask) -> PointMask {
    let mut out = 0;
    for (pos, i) in elements(ground).enumerate() {
        if x >> i & 1 == 1 {
            out |= 1 << pos;
        }
    }
    out
}

/// Inverse of [`compress`]: spreads the low bits of `y` onto the positions of
/// `ground`.
pub fn expand(y: PointMask, ground: PointMask) -> PointMask {
    let mut out = 0;
    for (pos, i) in elements(ground).enumerate() {
        if y >> pos & 1 == 1 {
            out |= 1 << i;
        }
    }
    out
}

/// Iterator over all subsets of a set, in increasing numeric order.
#[derive(Debug, Clone)]
pub struct Submasks {
    set: PointMask,
    next: Option<PointMask>,
}

impl Iterator for Submasks {
    type Item = PointMask;

    fn next(&mut self) -> Option<PointMask> {
        let current = self.next?;
        self.next = if current == self.set {
            None
        } else {
            Some((current | !self.set).wrapping_add(1) & self.set)
        };
        Some(current)
    }
}

/// `↓S`: every `T ⊆ S`, each exactly once.
pub fn enumerate_downset(s: PointMask) -> Submasks {
    Submasks { set: s, next: Some(0) }
}

/// `↑S` within `[n]`: every `T` with `S ⊆ T ⊆ [n]`, each exactly once.
pub fn enumerate_upset(s: PointMask, n: usize) -> impl Iterator<Item = PointMask> {
    debug_assert!(fits(s, n));
    enumerate_downset(full_mask(n) & !s).map(move |t| t | s)
}

/// A dense table of values indexed by the `2^n` points in natural mask order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTable<V>", bound(deserialize = "V: Deserialize<'de>"))]
pub struct DenseTable<V> {
    n: usize,
    values: Vec<V>,
}

#[derive(Deserialize)]
struct RawTable<V> {
    n: usize,
    values: Vec<V>,
}

impl<V> TryFrom<RawTable<V>> for DenseTable<V> {
    type Error = Error;

    fn try_from(raw: RawTable<V>) -> Result<Self> {
        DenseTable::new(raw.n, raw.values)
    }
}

impl<V> DenseTable<V> {
    pub fn new(n: usize, values: Vec<V>) -> Result<Self> {
        check_dense(n, MAX_DENSE_VARS)?;
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(Error::TableLength {
                n,
                expected,
                actual: values.len(),
            });
        }
        Ok(DenseTable { n, values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(PointMask) -> V) -> Result<Self> {
        check_dense(n, MAX_DENSE_VARS)?;
        let values = (0..1u64 << n).map(|x| x as PointMask).map(f).collect();
        Ok(DenseTable { n, values })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn into_values(self) -> Vec<V> {
        self.values
    }

    pub fn map<W>(&self, f: impl FnMut(&V) -> W) -> DenseTable<W> {
        DenseTable {
            n: self.n,
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl<V: Copy> DenseTable<V> {
    /// `values[x]`, rejecting masks with bits above `n`.
    pub fn eval(&self, x: PointMask) -> Result<V> {
        check_point(x, self.n)?;
        Ok(self.values[x as usize])
    }
}

/// A function on the cube that can be evaluated at any in-range point.
pub trait PointFunction: Sync {
    type Value: Copy + Send;

    fn dimension(&self) -> usize;

    /// The value at `x`; callers guarantee `x` fits in `dimension()` bits.
    fn value_at(&self, x: PointMask) -> Self::Value;
}

impl<V: Copy + Send + Sync> PointFunction for DenseTable<V> {
    type Value = V;

    fn dimension(&self) -> usize {
        self.n
    }

    fn value_at(&self, x: PointMask) -> V {
        self.values[x as usize]
    }
}

impl<T: PointFunction + ?Sized> PointFunction for &T {
    type Value = T::Value;

    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn value_at(&self, x: PointMask) -> T::Value {
        (**self).value_at(x)
    }
}

/// Membership-query access to a function.
pub trait Oracle: Sync {
    type Value: Copy + Send;

    fn dimension(&self) -> usize;

    fn query(&self, x: PointMask) -> Result<Self::Value>;

    /// Answers every point of `xs` into `out` (cleared first).
    fn query_batch(&self, xs: &[PointMask], out: &mut Vec<Self::Value>) -> Result<()> {
        out.clear();
        for &x in xs {
            out.push(self.query(x)?);
        }
        Ok(())
    }
}

impl<O: Oracle + ?Sized> Oracle for &O {
    type Value = O::Value;

    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn query(&self, x: PointMask) -> Result<O::Value> {
        (**self).query(x)
    }

    fn query_batch(&self, xs: &[PointMask], out: &mut Vec<O::Value>) -> Result<()> {
        (**self).query_batch(xs, out)
    }
}

/// Wraps a function source and counts every answered query.
///
/// The counter is atomic so one oracle can serve concurrent workers. A query
/// that would exceed the budget fails with [`Error::BudgetExhausted`] and is
/// not counted.
#[derive(Debug)]
pub struct CountingOracle<F> {
    inner: F,
    used: AtomicU64,
    budget: Option<u64>,
}

impl<F: PointFunction> CountingOracle<F> {
    pub fn new(inner: F) -> Self {
        CountingOracle {
            inner,
            used: AtomicU64::new(0),
            budget: None,
        }
    }

    pub fn with_budget(inner: F, budget: u64) -> Self {
        CountingOracle {
            inner,
            used: AtomicU64::new(0),
            budget: Some(budget),
        }
    }

    pub fn queries_used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    fn reserve(&self, count: u64) -> Result<()> {
        match self.budget {
            None => {
                self.used.fetch_add(count, Ordering::Relaxed);
                Ok(())
            }
            Some(budget) => self
                .used
                .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |used| {
                    used.checked_add(count).filter(|&total| total <= budget)
                })
                .map(|_| ())
                .map_err(|_| Error::BudgetExhausted {
                    budget,
                    requested: count,
                }),
        }
    }
}

impl<F: PointFunction> Oracle for CountingOracle<F> {
    type Value = F::Value;

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn query(&self, x: PointMask) -> Result<F::Value> {
        check_point(x, self.inner.dimension())?;
        self.reserve(1)?;
        Ok(self.inner.value_at(x))
    }

    fn query_batch(&self, xs: &[PointMask], out: &mut Vec<F::Value>) -> Result<()> {
        let n = self.inner.dimension();
        for &x in xs {
            check_point(x, n)?;
        }
        self.reserve(xs.len() as u64)?;
        out.clear();
        out.extend(xs.iter().map(|&x| self.inner.value_at(x)));
        Ok(())
    }
}
