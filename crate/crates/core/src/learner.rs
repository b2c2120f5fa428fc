//! Learning pseudo-Boolean DNFs and submodular functions from membership
//! queries via heavy Fourier coefficients, proper conversion, and the
//! learn-then-check submodularity tester.
//!
//! A target `f: {0,1}^n → {0, …, r}` is mapped onto `[−1, 1]` by
//! [`RangeCodec`], its heavy low-degree coefficients are found (exactly, or by
//! Kushilevitz–Mansour bucket sampling), the resulting sparse `g` is rounded
//! pointwise back to `{0, …, r}`.

use std::collections::HashMap;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::cube::{self, check_dense, full_mask, DenseTable, Oracle, PointFunction, PointMask};
use crate::error::{Error, Result};
use crate::fourier::{inverse_wht, wht_in_place, RangeCodec, Spectrum};
use crate::seed;
use crate::stats::{wilson, Proportion, Z_99};
use crate::submodular::{self, SetFunction};

/// Largest dimension for which a hypothesis keeps a rounded table.
pub const MAX_TABLE_VARS: usize = 20;

/// Largest dimension for the exact backend, which queries every point.
pub const MAX_EXACT_VARS: usize = cube::MAX_DENSE_VARS;

/// Settings of the sampled backend. Unset sample sizes take the defaults
/// documented on [`km_find_heavy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledConfig {
    pub theta: f64,
    #[serde(default)]
    pub bucket_samples: Option<u64>,
    #[serde(default)]
    pub coefficient_samples: Option<u64>,
    #[serde(default)]
    pub max_buckets: Option<usize>,
}

impl SampledConfig {
    pub fn new(theta: f64) -> Self {
        SampledConfig {
            theta,
            bucket_samples: None,
            coefficient_samples: None,
            max_buckets: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    /// Query all `2^n` points and transform.
    Exact,
    /// Bucket sampling with an explicit threshold.
    Sampled(SampledConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Width bound of the target class.
    pub k: usize,
    /// Range bound of the target class.
    pub r: u32,
    pub backend: Backend,
    /// `ε_inner = ε / (c·r²)`.
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub agnostic: bool,
}

fn default_c() -> f64 {
    4.0
}

impl LearnerConfig {
    pub fn new(epsilon: f64, delta: f64, k: usize, r: u32, backend: Backend) -> Self {
        LearnerConfig {
            epsilon,
            delta,
            k,
            r,
            backend,
            c: default_c(),
            seed: 0,
            agnostic: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.agnostic {
            return Err(Error::AgnosticUnsupported);
        }
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(self.epsilon) || !open_unit(self.delta) {
            return Err(Error::InvalidParameter(format!(
                "epsilon and delta must lie in (0, 1) (got {}, {})",
                self.epsilon, self.delta
            )));
        }
        if self.r == 0 {
            return Err(Error::InvalidParameter("r must be at least 1".into()));
        }
        if self.c.is_nan() || self.c <= 0.0 {
            return Err(Error::InvalidParameter("c must be positive".into()));
        }
        if let Backend::Sampled(s) = &self.backend {
            if !(s.theta > 0.0 && s.theta <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "theta must lie in (0, 1] (got {})",
                    s.theta
                )));
            }
        }
        Ok(())
    }

    /// Derived sparsity parameters for dimension `n`.
    pub fn parameters(&self, n: usize) -> Parameters {
        let epsilon_inner = self.epsilon / (self.c * (self.r as f64).powi(2));
        let tau_real = 28.0 * self.k as f64 * (2.0 * self.r as f64 / epsilon_inner).log2();
        let tau = tau_real.ceil().max(0.0) as usize;
        // Every encoded coefficient is at most 1 in magnitude.
        let l_full = 4.0 * self.r as f64 * (28.0 * self.k as f64).powi(tau.min(i32::MAX as usize) as i32);
        let l_bound = l_full.min(2f64.powi(n as i32));
        let theta = epsilon_inner / (2.0 * l_bound);
        Parameters {
            epsilon_inner,
            tau,
            l_bound,
            theta,
            m_bound: 2.0 * l_bound * l_bound / epsilon_inner,
        }
    }
}

/// `ε_inner`, the degree cut `τ`, the L1 budget `L`, the exact-backend
/// threshold `θ = ε_inner / 2L`, and the sparsity bound `M = 2L²/ε_inner`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub epsilon_inner: f64,
    pub tau: usize,
    pub l_bound: f64,
    pub theta: f64,
    pub m_bound: f64,
}

/// A `{0, …, r}`-valued oracle seen through the codec.
pub struct EncodedOracle<'a, O> {
    inner: &'a O,
    codec: RangeCodec,
}

impl<'a, O: Oracle<Value = u32>> EncodedOracle<'a, O> {
    pub fn new(inner: &'a O, codec: RangeCodec) -> Self {
        EncodedOracle { inner, codec }
    }
}

impl<O: Oracle<Value = u32>> Oracle for EncodedOracle<'_, O> {
    type Value = f64;

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn query(&self, x: PointMask) -> Result<f64> {
        self.codec.encode(self.inner.query(x)?)
    }

    fn query_batch(&self, xs: &[PointMask], out: &mut Vec<f64>) -> Result<()> {
        let mut raw = Vec::with_capacity(xs.len());
        self.inner.query_batch(xs, &mut raw)?;
        out.clear();
        for v in raw {
            out.push(self.codec.encode(v)?);
        }
        Ok(())
    }
}

/// Coefficients with `|f̂(S)| ≥ θ` and `|S| ≤ τ`, from all `2^n` values.
pub fn exact_heavy<O: Oracle<Value = f64>>(oracle: &O, theta: f64, tau: usize) -> Result<Spectrum> {
    let n = oracle.dimension();
    check_dense(n, MAX_EXACT_VARS)?;
    let xs: Vec<PointMask> = (0..1u64 << n).map(|x| x as PointMask).collect();
    let mut values = Vec::with_capacity(xs.len());
    oracle.query_batch(&xs, &mut values)?;
    wht_in_place(&mut values);
    let scale = 1.0 / values.len() as f64;
    values.iter_mut().for_each(|c| *c *= scale);
    Ok(Spectrum::from_dense(n, &values).truncate(theta, tau))
}

/// Settings of one [`km_find_heavy`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmSettings {
    pub theta: f64,
    pub tau: usize,
    pub delta: f64,
    pub bucket_samples: Option<u64>,
    pub coefficient_samples: Option<u64>,
    pub max_buckets: Option<usize>,
}

/// Buckets examined at one prefix length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStat {
    pub level: usize,
    pub candidates: usize,
    pub survivors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmReport {
    pub theta: f64,
    pub tau: usize,
    pub bucket_samples: u64,
    pub coefficient_samples: u64,
    pub max_buckets: usize,
    pub mean_estimate: f64,
    pub levels: Vec<LevelStat>,
    pub queries: u64,
}

/// Default per-level bucket sample size `⌈48·ln(B/δ)/θ⁴⌉` with
/// `B = 2n·⌈4/θ²⌉` buckets visited at most.
pub fn default_bucket_samples(n: usize, theta: f64, delta: f64) -> u64 {
    let buckets = 2.0 * n.max(1) as f64 * (4.0 / (theta * theta)).ceil();
    (48.0 * (buckets / delta).ln() / theta.powi(4)).ceil() as u64
}

/// Default coefficient sample size `⌈32·ln(2G/δ)/θ²⌉` for `G` coefficients.
pub fn default_coefficient_samples(count: usize, theta: f64, delta: f64) -> u64 {
    (32.0 * (2.0 * count.max(1) as f64 / delta).ln() / (theta * theta)).ceil() as u64
}

const BATCH: usize = 8192;

/// Kushilevitz–Mansour search for the coefficients with `|f̂(S)| ≥ θ` and
/// `|S| ≤ τ` of a `[−1, 1]`-valued oracle.
///
/// A bucket is a prefix `α` of the first `m` variables and holds the sets `S`
/// with `S ∩ [m] = α`; its weight is `W(α) = Σ f̂(S)² = E[f(xz)·f(yz)·χ_α(x⊕y)]`
/// with `x, y` uniform on the first `m` variables and `z` uniform on the rest.
/// Level `m` refines the survivors of level `m − 1`, estimating all their
/// weights from one shared batch of samples accumulated as a histogram over
/// `x ⊕ y`. Buckets estimated below `θ²/2`, or of more than `τ` elements, are
/// dropped. More than `max_buckets` (default `⌈8/θ²⌉`) survivors at a level
/// aborts with [`Error::InfeasibleThreshold`].
///
/// The mean `f̂(∅)` is estimated first and subtracted, which leaves every
/// other coefficient unchanged and lowers the variance of the weight
/// estimates. Surviving sets get coefficient estimates from fresh shared
/// samples; those below `θ/2` in magnitude are discarded.
pub fn km_find_heavy<O: Oracle<Value = f64>>(
    oracle: &O,
    settings: &KmSettings,
    seed: u64,
) -> Result<(Spectrum, KmReport)> {
    let n = oracle.dimension();
    check_dense(n, cube::MAX_VARS)?;
    let theta = settings.theta;
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::InvalidParameter("theta must be positive".into()));
    }
    let bucket_samples = settings
        .bucket_samples
        .unwrap_or_else(|| default_bucket_samples(n, theta, settings.delta))
        .max(1);
    let max_buckets = settings.max_buckets.unwrap_or((8.0 / (theta * theta)).ceil() as usize);
    let mut queries = 0u64;

    let mean_samples = settings
        .coefficient_samples
        .unwrap_or_else(|| default_coefficient_samples(1, theta, settings.delta))
        .max(1);
    let mean = {
        let mut rng = seed::stream(seed, 0);
        let mut total = 0.0;
        let mut done = 0;
        let mut xs = Vec::with_capacity(BATCH);
        let mut vals = Vec::with_capacity(BATCH);
        while done < mean_samples {
            let len = (mean_samples - done).min(BATCH as u64) as usize;
            xs.clear();
            xs.extend((0..len).map(|_| rng.next_u64() as PointMask & full_mask(n)));
            oracle.query_batch(&xs, &mut vals)?;
            total += vals.iter().sum::<f64>();
            done += len as u64;
        }
        queries += mean_samples;
        total / mean_samples as f64
    };
    let centred = Centred {
        inner: oracle,
        shift: mean,
    };

    let mut levels = Vec::with_capacity(n);
    let mut survivors: Vec<PointMask> = vec![0];
    for m in 1..=n {
        let bit = 1 << (m - 1);
        let candidates: Vec<PointMask> = survivors
            .iter()
            .flat_map(|&a| [a, a | bit])
            .filter(|&a| cube::cardinality(a) <= settings.tau)
            .collect();
        if candidates.is_empty() {
            survivors.clear();
            levels.push(LevelStat {
                level: m,
                candidates: 0,
                survivors: 0,
            });
            break;
        }
        let weights = bucket_weights(
            &centred,
            m,
            &candidates,
            bucket_samples,
            &mut seed::stream(seed, m as u64),
        )?;
        queries += 2 * bucket_samples;
        survivors = candidates
            .iter()
            .zip(&weights)
            .filter(|(_, &w)| w >= theta * theta / 2.0)
            .map(|(&a, _)| a)
            .collect();
        levels.push(LevelStat {
            level: m,
            candidates: candidates.len(),
            survivors: survivors.len(),
        });
        if survivors.len() > max_buckets {
            return Err(Error::InfeasibleThreshold {
                theta,
                level: m,
                survivors: survivors.len(),
                cap: max_buckets,
            });
        }
        if survivors.is_empty() {
            break;
        }
    }
    if n == 0 {
        survivors = vec![0];
    }

    let coefficient_samples = settings
        .coefficient_samples
        .unwrap_or_else(|| default_coefficient_samples(survivors.len(), theta, settings.delta))
        .max(1);
    let mut sums = vec![0.0; survivors.len()];
    if !survivors.is_empty() {
        let mut rng = seed::stream(seed, n as u64 + 1);
        let mut done = 0;
        let mut xs = Vec::with_capacity(BATCH);
        let mut vals = Vec::with_capacity(BATCH);
        while done < coefficient_samples {
            let len = (coefficient_samples - done).min(BATCH as u64) as usize;
            xs.clear();
            xs.extend((0..len).map(|_| rng.next_u64() as PointMask & full_mask(n)));
            centred.query_batch(&xs, &mut vals)?;
            for (s, sum) in survivors.iter().zip(sums.iter_mut()) {
                *sum += xs
                    .iter()
                    .zip(&vals)
                    .map(|(&x, &v)| if cube::parity(s & x) { -v } else { v })
                    .sum::<f64>();
            }
            done += len as u64;
        }
        queries += coefficient_samples;
    }
    let mut coeffs: std::collections::BTreeMap<PointMask, f64> = survivors
        .iter()
        .zip(&sums)
        .map(|(&s, &sum)| (s, sum / coefficient_samples as f64))
        .filter(|(_, c)| c.abs() >= theta / 2.0)
        .collect();
    let empty = coeffs.get(&0).copied().unwrap_or(0.0) + mean;
    if empty.abs() >= theta / 2.0 {
        coeffs.insert(0, empty);
    } else {
        coeffs.remove(&0);
    }
    let spectrum = Spectrum::new(n, coeffs)?;
    Ok((
        spectrum,
        KmReport {
            theta,
            tau: settings.tau,
            bucket_samples,
            coefficient_samples,
            max_buckets,
            mean_estimate: mean,
            levels,
            queries,
        },
    ))
}

struct Centred<'a, O> {
    inner: &'a O,
    shift: f64,
}

impl<O: Oracle<Value = f64>> Centred<'_, O> {
    fn query_batch(&self, xs: &[PointMask], out: &mut Vec<f64>) -> Result<()> {
        self.inner.query_batch(xs, out)?;
        out.iter_mut().for_each(|v| *v -= self.shift);
        Ok(())
    }
}

/// Estimated weights of `candidates` (prefixes of length `m`) from `samples`
/// shared pairs.
fn bucket_weights<O: Oracle<Value = f64>, R: RngCore>(
    oracle: &Centred<'_, O>,
    m: usize,
    candidates: &[PointMask],
    samples: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let n = oracle.inner.dimension();
    let low = full_mask(m);
    let high = full_mask(n) & !low;
    let dense = m <= 16;
    let mut hist_dense = if dense { vec![0.0; 1 << m] } else { Vec::new() };
    let mut hist_sparse: HashMap<PointMask, f64> = HashMap::new();
    let mut xs = Vec::with_capacity(2 * BATCH);
    let mut diffs = Vec::with_capacity(BATCH);
    let mut vals = Vec::with_capacity(2 * BATCH);
    let mut done = 0;
    while done < samples {
        let len = (samples - done).min(BATCH as u64) as usize;
        xs.clear();
        diffs.clear();
        for _ in 0..len {
            let bits = rng.next_u64();
            let x = bits as PointMask & low;
            let y = (bits >> m) as PointMask & low;
            let z = ((bits >> (2 * m)) << m) as PointMask & high;
            xs.push(x | z);
            xs.push(y | z);
            diffs.push(x ^ y);
        }
        oracle.query_batch(&xs, &mut vals)?;
        for (i, &d) in diffs.iter().enumerate() {
            let v = vals[2 * i] * vals[2 * i + 1];
            if dense {
                hist_dense[d as usize] += v;
            } else {
                *hist_sparse.entry(d).or_insert(0.0) += v;
            }
        }
        done += len as u64;
    }
    let scale = 1.0 / samples as f64;
    if dense {
        wht_in_place(&mut hist_dense);
        Ok(candidates.iter().map(|&a| hist_dense[a as usize] * scale).collect())
    } else {
        Ok(candidates
            .iter()
            .map(|&a| {
                hist_sparse
                    .iter()
                    .map(|(&d, &v)| if cube::parity(a & d) { -v } else { v })
                    .sum::<f64>()
                    * scale
            })
            .collect())
    }
}

/// A real-valued sparse `g` and its rounding `h'` onto `{0, …, r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub spectrum: Spectrum,
    pub r: u32,
    /// `h'` in mask order, kept when `n ≤ 20`.
    pub table: Option<DenseTable<u32>>,
}

impl Hypothesis {
    pub fn dimension(&self) -> usize {
        self.spectrum.dimension()
    }

    /// `h'(x)`.
    pub fn value(&self, x: PointMask) -> u32 {
        match &self.table {
            Some(t) => t.values()[x as usize],
            None => RangeCodec::new(self.r)
                .expect("r >= 1")
                .decode(self.spectrum.evaluate(x)),
        }
    }
}

impl PointFunction for Hypothesis {
    type Value = u32;

    fn dimension(&self) -> usize {
        self.spectrum.dimension()
    }

    fn value_at(&self, x: PointMask) -> u32 {
        self.value(x)
    }
}

/// Rounds `g` pointwise to the nearest grid point of the `r`-codec (ties to
/// the smaller value) and decodes to `{0, …, r}`.
pub fn round_hypothesis(g: Spectrum, r: u32) -> Result<Hypothesis> {
    let codec = RangeCodec::new(r)?;
    let table = if g.dimension() <= MAX_TABLE_VARS {
        Some(inverse_wht(&g)?.map(|&y| codec.decode(y)))
    } else {
        None
    };
    Ok(Hypothesis { spectrum: g, r, table })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub backend: String,
    pub n: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub k: usize,
    pub r: u32,
    pub parameters: Parameters,
    /// Threshold actually used for the heavy-coefficient search.
    pub theta: f64,
    pub coefficients: usize,
    pub queries: u64,
    pub km: Option<KmReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnOutcome {
    pub hypothesis: Hypothesis,
    pub report: LearnReport,
}

/// Learns `f ∈ DNF^{k,r}` from membership queries.
///
/// The exact backend keeps the coefficients with `|f̂'(S)| ≥ ε_inner/2L` and
/// `|S| ≤ τ` of the encoded function, which makes `E[(f' − g)²] ≤ ε_inner`
/// and hence `Pr[h' ≠ f] ≤ ε_inner·r² ≤ ε`. The sampled backend uses its own
/// `θ` with the same `τ`.
pub fn pac_learn_pbdnf<O: Oracle<Value = u32>>(oracle: &O, config: &LearnerConfig) -> Result<LearnOutcome> {
    config.validate()?;
    let n = oracle.dimension();
    let codec = RangeCodec::new(config.r)?;
    let params = config.parameters(n);
    let encoded = EncodedOracle::new(oracle, codec);
    let (spectrum, theta, queries, km, backend) = match &config.backend {
        Backend::Exact => {
            let s = exact_heavy(&encoded, params.theta, params.tau)?;
            (s, params.theta, 1u64 << n, None, "exact")
        }
        Backend::Sampled(sc) => {
            let settings = KmSettings {
                theta: sc.theta,
                tau: params.tau,
                delta: config.delta,
                bucket_samples: sc.bucket_samples,
                coefficient_samples: sc.coefficient_samples,
                max_buckets: sc.max_buckets,
            };
            let (s, rep) = km_find_heavy(&encoded, &settings, config.seed)?;
            (s, sc.theta, rep.queries, Some(rep), "sampled")
        }
    };
    let coefficients = spectrum.len();
    Ok(LearnOutcome {
        hypothesis: round_hypothesis(spectrum, config.r)?,
        report: LearnReport {
            backend: backend.into(),
            n,
            epsilon: config.epsilon,
            delta: config.delta,
            k: config.k,
            r: config.r,
            parameters: params,
            theta,
            coefficients,
            queries,
            km,
        },
    })
}

/// Learns a submodular `f` with range `{0, …, k}` as a member of
/// `DNF^{2k, max(k,1)}`; `config.k` and `config.r` are overwritten.
pub fn learn_submodular<O: Oracle<Value = u32>>(oracle: &O, k: u32, config: &LearnerConfig) -> Result<LearnOutcome> {
    let mut inner = config.clone();
    inner.k = 2 * k as usize;
    inner.r = k.max(1);
    pac_learn_pbdnf(oracle, &inner)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ErrorMode {
    Exact,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub error: f64,
    pub samples: u64,
    /// 99% Wilson interval in sampled mode.
    pub interval: Option<(f64, f64)>,
}

/// `Pr_x[h(x) ≠ f(x)]`, exactly (n ≤ 20) or from uniform samples.
pub fn empirical_error<H, F>(h: &H, f: &F, mode: ErrorMode) -> Result<ErrorEstimate>
where
    H: PointFunction<Value = u32>,
    F: PointFunction<Value = u32>,
{
    let n = f.dimension();
    if h.dimension() != n {
        return Err(Error::InvalidParameter(format!(
            "hypothesis has {} variables, target {n}",
            h.dimension()
        )));
    }
    match mode {
        ErrorMode::Exact => {
            check_dense(n, MAX_TABLE_VARS)?;
            let wrong = (0..1u64 << n)
                .filter(|&x| h.value_at(x as PointMask) != f.value_at(x as PointMask))
                .count();
            Ok(ErrorEstimate {
                error: wrong as f64 / (1u64 << n) as f64,
                samples: 1 << n,
                interval: None,
            })
        }
        ErrorMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter("sampled error needs samples >= 1".into()));
            }
            let mut rng = seed::rng(seed);
            let wrong = (0..samples)
                .filter(|_| {
                    let x = rng.random::<u32>() & full_mask(n);
                    h.value_at(x) != f.value_at(x)
                })
                .count() as u64;
            let p: Proportion = wilson(wrong, samples, Z_99);
            Ok(ErrorEstimate {
                error: p.estimate,
                samples,
                interval: Some((p.low, p.high)),
            })
        }
    }
}

/// An enumerable family of set functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ClassSpec {
    /// All submodular functions into `{0, …, k}` (n ≤ 4).
    Submodular { k: u32 },
    /// All monotone submodular functions into `{0, …, k}` (n ≤ 4).
    MonotoneSubmodular { k: u32 },
    /// Uniform matroid ranks `min(|S|, ρ)`, `ρ = 0..=n` (n ≤ 10).
    UniformMatroid,
    /// `g(|S|)` for concave `g` into `{0, …, k}` (n ≤ 10).
    ConcaveCardinality { k: u32 },
}

pub fn class_members(class: ClassSpec, n: usize) -> Result<Vec<SetFunction>> {
    let too_large =
        |limit: usize| Error::ClassTooLarge(format!("{class:?} is enumerated only for n <= {limit} (got n={n})"));
    match class {
        ClassSpec::Submodular { k } => submodular::enumerate_submodular(n, k, false),
        ClassSpec::MonotoneSubmodular { k } => submodular::enumerate_submodular(n, k, true),
        ClassSpec::UniformMatroid => {
            if n > 10 {
                return Err(too_large(10));
            }
            (0..=n as u32)
                .map(|rank| submodular::uniform_matroid_rank(n, rank))
                .collect()
        }
        ClassSpec::ConcaveCardinality { k } => {
            if n > 10 || k > 6 {
                return Err(too_large(10));
            }
            let mut out = Vec::new();
            let mut g = Vec::with_capacity(n + 1);
            for start in 0..=k {
                g.clear();
                g.push(start);
                concave_sequences(n, k, i64::MAX, &mut g, &mut out);
            }
            out.into_iter()
                .map(|g| submodular::concave_cardinality(&g).and_then(|f| f.with_range_max(k)))
                .collect()
        }
    }
}

fn concave_sequences(n: usize, k: u32, max_step: i64, g: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if g.len() == n + 1 {
        out.push(g.clone());
        return;
    }
    let last = *g.last().unwrap() as i64;
    for next in 0..=k as i64 {
        let step = next - last;
        if step <= max_step {
            g.push(next as u32);
            concave_sequences(n, k, step, g, out);
            g.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperOutcome {
    pub member: SetFunction,
    pub index: usize,
    /// Fraction of points where the member differs from the hypothesis.
    pub distance: f64,
}

/// The class member nearest to `h'` in Hamming distance (first on ties).
pub fn properize(h: &Hypothesis, class: &[SetFunction]) -> Result<ProperOutcome> {
    let table = h
        .table
        .as_ref()
        .ok_or_else(|| Error::ClassTooLarge(format!("no rounded table kept at n = {}", h.dimension())))?;
    nearest_member(table.values(), class)
}

pub(crate) fn nearest_member(values: &[u32], class: &[SetFunction]) -> Result<ProperOutcome> {
    let mut best: Option<(usize, usize)> = None;
    for (i, member) in class.iter().enumerate() {
        if member.values().len() != values.len() {
            return Err(Error::InvalidParameter("class member has the wrong dimension".into()));
        }
        let bound = best.map_or(usize::MAX, |b| b.1);
        let mut d = 0;
        for (a, b) in member.values().iter().zip(values) {
            d += (a != b) as usize;
            if d >= bound {
                break;
            }
        }
        if d < bound {
            best = Some((i, d));
            if d == 0 {
                break;
            }
        }
    }
    let (index, d) = best.ok_or_else(|| Error::InvalidParameter("empty class".into()))?;
    Ok(ProperOutcome {
        member: class[index].clone(),
        index,
        distance: d as f64 / values.len() as f64,
    })
}

/// Normalised Hamming distance from `f` to the nearest member of `class`.
pub fn class_distance(f: &SetFunction, class: &[SetFunction]) -> Result<f64> {
    Ok(nearest_member(f.values(), class)?.distance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub accept: bool,
    /// Estimated `dist(f, h)` for the projected hypothesis `h`.
    pub estimated_distance: f64,
    pub threshold: f64,
    pub samples: u64,
    pub member: SetFunction,
    pub learn: LearnReport,
}

/// Learn-then-check tester for submodularity of a `{0, …, k}`-valued `f`.
///
/// Learns `f` to error `ε/4`, projects the hypothesis onto the class of
/// submodular functions into `{0, …, k}`, estimates the distance from `f` to
/// that member on `⌈8·ln 6/ε²⌉` fresh uniform points, and accepts iff the
/// estimate is at most `3ε/4`. A submodular `f` is accepted unless the
/// learner fails or the estimate overshoots by `ε/4`; an `ε`-far `f` is
/// accepted only if the estimate undershoots by `ε/4`, which has
/// probability at most `1/6`.
///
/// The class is enumerated exhaustively, so only `n ≤ 4` is supported.
pub fn test_submodularity<O: Oracle<Value = u32>>(
    oracle: &O,
    k: u32,
    epsilon: f64,
    config: &LearnerConfig,
) -> Result<TestOutcome> {
    let n = oracle.dimension();
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1) (got {epsilon})"
        )));
    }
    let class = class_members(ClassSpec::Submodular { k }, n)?;
    let mut learn_config = config.clone();
    learn_config.epsilon = epsilon / 4.0;
    let learned = learn_submodular(oracle, k, &learn_config)?;
    let proper = properize(&learned.hypothesis, &class)?;

    let samples = (8.0 * 6f64.ln() / (epsilon * epsilon)).ceil() as u64;
    let mut rng = seed::stream(config.seed, u64::MAX);
    let xs: Vec<PointMask> = (0..samples).map(|_| rng.random::<u32>() & full_mask(n)).collect();
    let mut values = Vec::with_capacity(xs.len());
    oracle.query_batch(&xs, &mut values)?;
    let wrong = xs
        .iter()
        .zip(&values)
        .filter(|(&x, &v)| proper.member.value(x) != v)
        .count();
    let estimated_distance = wrong as f64 / samples as f64;
    let threshold = 0.75 * epsilon;
    Ok(TestOutcome {
        accept: estimated_distance <= threshold,
        estimated_distance,
        threshold,
        samples,
        member: proper.member,
        learn: learned.report,
    })
}
