//! Random colored-part configurations under the product measure
//! `prod_j (1 - u x^j)^{-j}`, exact-size rejection, and exact draws of the
//! trace from a [`TraceTable`] row.
//!
//! The generator is ChaCha8 (`rand_chacha`). Sample `i` of a batch with base
//! seed `s` reads from `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`,
//! so batches are reproducible for any thread count.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::exact::TraceTable;

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub x: f64,
    pub u: f64,
    pub seed: u64,
    pub max_attempts: u64,
}

impl SamplerConfig {
    pub fn new(x: f64, seed: u64) -> Result<Self> {
        let cfg = SamplerConfig {
            x,
            u: 1.0,
            seed,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x > 0.0 && self.x < 1.0) {
            return Err(Error::SamplerConfig(format!(
                "x = {} not in (0, 1)",
                self.x
            )));
        }
        if !(self.u > 0.0 && self.u <= 1.0) {
            return Err(Error::SamplerConfig(format!(
                "u = {} not in (0, 1]",
                self.u
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::SamplerConfig("max_attempts must be positive".into()));
        }
        Ok(())
    }

    /// `ceil(60 / -log x)`.
    pub fn truncation(&self) -> usize {
        (60.0 / -self.x.ln()).ceil() as usize
    }
}

/// RNG for sample `index` of a batch seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on `(0, 1]`.
fn open_uniform<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColoredPartsSample {
    /// `(part size j, color c in 1..=j) -> count`, zero counts omitted.
    pub multiplicities: BTreeMap<(usize, usize), u64>,
    pub size: u64,
    pub parts: u64,
}

impl ColoredPartsSample {
    pub fn is_consistent(&self) -> bool {
        let mut size = 0u64;
        let mut parts = 0u64;
        for (&(j, c), &k) in &self.multiplicities {
            if c == 0 || c > j || k == 0 {
                return false;
            }
            size += j as u64 * k;
            parts += k;
        }
        size == self.size && parts == self.parts
    }

    fn push(&mut self, j: usize, color: usize, count: u64) {
        self.multiplicities.insert((j, color), count);
        self.size += j as u64 * count;
        self.parts += count;
    }
}

#[derive(Clone, Copy, Debug)]
struct Factor {
    /// `log(1 - q)` with `q = u x^j`.
    ln_miss: f64,
    ln_q: f64,
    /// `(1 - q)^j`: probability that every color of part `j` is absent.
    all_absent: f64,
}

/// Precomputed per-part tables for one configuration.
#[derive(Clone, Debug)]
pub struct BoltzmannSampler {
    cfg: SamplerConfig,
    factors: Vec<Factor>,
}

impl BoltzmannSampler {
    pub fn new(cfg: SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        Self::with_truncation(cfg, cfg.truncation())
    }

    /// Same as [`BoltzmannSampler::new`] with an explicit largest part.
    pub fn with_truncation(cfg: SamplerConfig, max_part: usize) -> Result<Self> {
        cfg.validate()?;
        let (ln_x, ln_u) = (cfg.x.ln(), cfg.u.ln());
        let factors = (1..=max_part)
            .map(|j| {
                let ln_q = ln_u + j as f64 * ln_x;
                let ln_miss = (-ln_q.exp()).ln_1p();
                Factor {
                    ln_miss,
                    ln_q,
                    all_absent: (j as f64 * ln_miss).exp(),
                }
            })
            .collect();
        Ok(BoltzmannSampler { cfg, factors })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn max_part(&self) -> usize {
        self.factors.len()
    }

    /// One configuration. Each of the `j` colors of part `j` carries an
    /// independent geometric count with `P(k) = q^k (1 - q)`. Colors are
    /// visited by jumping over runs of empty ones, whose length is itself
    /// geometric, so the law is unchanged.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> ColoredPartsSample {
        self.sample_bounded(rng, u64::MAX).unwrap_or_default()
    }

    /// Like [`BoltzmannSampler::sample`] but gives up once the size exceeds
    /// `limit`.
    fn sample_bounded<R: Rng>(&self, rng: &mut R, limit: u64) -> Option<ColoredPartsSample> {
        let mut out = ColoredPartsSample::default();
        for (i, f) in self.factors.iter().enumerate() {
            let j = i + 1;
            let mut v = open_uniform(rng);
            if v <= f.all_absent {
                continue;
            }
            let mut color = 0usize;
            loop {
                let skip = (v.ln() / f.ln_miss).floor();
                if skip >= (j - color) as f64 {
                    break;
                }
                color += skip as usize + 1;
                // A present color has count 1 + Geom(q).
                let extra = (open_uniform(rng).ln() / f.ln_q).floor() as u64;
                out.push(j, color, 1 + extra);
                if out.size > limit {
                    return None;
                }
                if color == j {
                    break;
                }
                v = open_uniform(rng);
            }
        }
        Some(out)
    }

    /// Rejection until the size equals `n`.
    pub fn sample_exact_n<R: Rng>(&self, rng: &mut R, n: usize) -> Result<ColoredPartsSample> {
        if n == 0 {
            return Err(Error::OutOfRange {
                n,
                lo: 1,
                hi: usize::MAX,
            });
        }
        for _ in 0..self.cfg.max_attempts {
            if let Some(s) = self.sample_bounded(rng, n as u64) {
                if s.size == n as u64 {
                    return Ok(s);
                }
            }
        }
        Err(Error::RejectionBudget {
            n,
            attempts: self.cfg.max_attempts,
        })
    }

    /// Per-part totals drawn as one negative binomial per part instead of
    /// `j` geometrics. Returns `(size, parts)`.
    pub fn sample_aggregate<R: Rng>(&self, rng: &mut R) -> (u64, u64) {
        let (mut size, mut parts) = (0u64, 0u64);
        for (i, f) in self.factors.iter().enumerate() {
            let j = i + 1;
            let v = open_uniform(rng);
            let k = negbin_inverse(v, j, f.ln_q.exp(), f.all_absent);
            size += j as u64 * k;
            parts += k;
        }
        (size, parts)
    }
}

/// Smallest `k` with `P(K <= k) >= 1 - v` for `K ~ NegBin(j, q)`,
/// `P(K = k) = C(j+k-1, k) q^k (1-q)^j`.
fn negbin_inverse(v: f64, j: usize, q: f64, p0: f64) -> u64 {
    let target = 1.0 - v;
    let (mut k, mut p, mut cdf) = (0u64, p0, p0);
    while cdf < target && p > 0.0 {
        p *= q * (j as f64 + k as f64) / (k as f64 + 1.0);
        k += 1;
        cdf += p;
    }
    k
}

/// `boltzmann_sample` with the config's own seed on stream 0.
pub fn boltzmann_sample(cfg: &SamplerConfig) -> Result<ColoredPartsSample> {
    let s = BoltzmannSampler::new(*cfg)?;
    Ok(s.sample(&mut stream_rng(cfg.seed, 0)))
}

pub fn sample_exact_n(cfg: &SamplerConfig, n: usize) -> Result<ColoredPartsSample> {
    let s = BoltzmannSampler::new(*cfg)?;
    s.sample_exact_n(&mut stream_rng(cfg.seed, 0), n)
}

/// `(size, parts)` of sample `index` for batch output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleRecord {
    pub index: u64,
    pub size: u64,
    pub parts: u64,
}

/// `count` exact-size samples; sample `i` uses stream `i`.
pub fn exact_size_batch(
    sampler: &BoltzmannSampler,
    n: usize,
    count: u64,
) -> Result<Vec<SampleRecord>> {
    let seed = sampler.cfg.seed;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let s = sampler.sample_exact_n(&mut stream_rng(seed, i), n)?;
            Ok(SampleRecord {
                index: i,
                size: s.size,
                parts: s.parts,
            })
        })
        .collect()
}

/// `count` unconditioned samples; sample `i` uses stream `i`.
pub fn boltzmann_batch(sampler: &BoltzmannSampler, count: u64) -> Vec<SampleRecord> {
    let seed = sampler.cfg.seed;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let s = sampler.sample(&mut stream_rng(seed, i));
            SampleRecord {
                index: i,
                size: s.size,
                parts: s.parts,
            }
        })
        .collect()
}

/// Uniform integer in `[0, bound)` by masked rejection.
fn uniform_below<R: Rng>(rng: &mut R, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let words = bits.div_ceil(64) as usize;
    let top_mask = if bits.is_multiple_of(64) {
        u64::MAX
    } else {
        (1u64 << (bits % 64)) - 1
    };
    loop {
        let mut w: Vec<u64> = (0..words).map(|_| rng.random()).collect();
        if let Some(last) = w.last_mut() {
            *last &= top_mask;
        }
        let digits: Vec<u32> = w
            .iter()
            .flat_map(|&x| [x as u32, (x >> 32) as u32])
            .collect();
        let v = BigUint::new(digits);
        if &v < bound {
            return v;
        }
    }
}

/// Exact inverse-CDF draws of the trace from one table row.
#[derive(Clone, Debug)]
pub struct ExactUniformSampler<'a> {
    row: &'a [BigUint],
    total: &'a BigUint,
}

impl<'a> ExactUniformSampler<'a> {
    pub fn new(table: &'a TraceTable, n: usize) -> Result<Self> {
        Ok(ExactUniformSampler {
            row: table.row(n)?,
            total: table.q(n)?,
        })
    }

    /// Returns `m` with probability `Q(m, n) / Q(n)`.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let mut v = uniform_below(rng, self.total);
        for (i, q) in self.row.iter().enumerate() {
            if &v < q {
                return i + 1;
            }
            v -= q;
        }
        unreachable!("row sums to Q(n)")
    }
}

pub fn exact_uniform_sample(table: &TraceTable, n: usize, seed: u64) -> Result<usize> {
    let s = ExactUniformSampler::new(table, n)?;
    Ok(s.draw(&mut stream_rng(seed, 0)))
}

/// Pearson statistic, degrees of freedom and upper-tail p-value of
/// `observed` against `probs`. Trailing and leading cells with expected
/// count below 5 are pooled into their neighbours.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    match ChiSquared::new(dof as f64) {
        Ok(d) => d.sf(statistic),
        Err(_) => f64::NAN,
    }
}

pub const MIN_EXPECTED: f64 = 5.0;

/// Greedily merge consecutive cells until each has expected count at
/// least [`MIN_EXPECTED`]; a short remainder joins the last group.
fn pooled_groups(expected: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let (mut start, mut acc) = (0, 0.0);
    for (i, &e) in expected.iter().enumerate() {
        acc += e;
        if acc >= MIN_EXPECTED {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < expected.len() {
        match groups.last_mut() {
            Some(last) => last.end = expected.len(),
            None => groups.push(0..expected.len()),
        }
    }
    groups
}

pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> ChiSquare {
    let total: u64 = observed.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|p| p * total as f64).collect();
    let groups = pooled_groups(&expected);
    let mut statistic = 0.0;
    for g in &groups {
        let o: u64 = observed[g.clone()].iter().sum();
        let e: f64 = expected[g.clone()].iter().sum();
        statistic += (o as f64 - e).powi(2) / e;
    }
    let dof = groups.len().saturating_sub(1);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

/// Two-sample homogeneity test between histograms over the same cells.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquare {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let pooled: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| (x + y) as f64).collect();
    let min_share = na.min(nb) / (na + nb);
    let scaled: Vec<f64> = pooled.iter().map(|p| p * min_share).collect();
    let groups = pooled_groups(&scaled);
    let mut statistic = 0.0;
    for g in &groups {
        let x: u64 = a[g.clone()].iter().sum();
        let y: u64 = b[g.clone()].iter().sum();
        let t = (x + y) as f64;
        let (ea, eb) = (t * na / (na + nb), t * nb / (na + nb));
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = groups.len().saturating_sub(1);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
    }
}

/// Histogram of `values` over `1..=max`; values outside are dropped.
pub fn histogram(values: impl IntoIterator<Item = u64>, max: usize) -> Vec<u64> {
    let mut h = vec![0u64; max];
    for v in values {
        if v >= 1 && v as usize <= max {
            h[v as usize - 1] += 1;
        }
    }
    h
}

/// CSV batch with the configuration echoed in `#` comment lines.
pub fn write_batch_csv<W: Write>(
    cfg: &SamplerConfig,
    target_n: Option<usize>,
    records: &[SampleRecord],
    mut out: W,
) -> Result<()> {
    writeln!(out, "# planepart-format: 1")?;
    writeln!(
        out,
        "# sampler: chacha8 x={:e} u={:e} seed={} max_attempts={}",
        cfg.x, cfg.u, cfg.seed, cfg.max_attempts
    )?;
    if let Some(n) = target_n {
        writeln!(out, "# conditioned_size: {n}")?;
    }
    writeln!(out, "sample_index,size,parts")?;
    for r in records {
        writeln!(out, "{},{},{}", r.index, r.size, r.parts)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::build_trace_table;

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::new(0.0, 1).is_err());
        assert!(SamplerConfig::new(1.0, 1).is_err());
        let mut c = SamplerConfig::new(0.5, 1).unwrap();
        c.u = 0.0;
        assert!(c.validate().is_err());
        c.u = 1.0;
        c.max_attempts = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn tiny_tilt_is_empty() {
        let cfg = SamplerConfig::new(1e-12, 3).unwrap();
        let s = BoltzmannSampler::new(cfg).unwrap();
        let mut rng = stream_rng(3, 0);
        let empty = (0..1000).filter(|_| s.sample(&mut rng).parts == 0).count();
        assert!(empty >= 999);
    }

    #[test]
    fn samples_are_consistent() {
        let cfg = SamplerConfig::new(0.9, 11).unwrap();
        let s = BoltzmannSampler::new(cfg).unwrap();
        let mut rng = stream_rng(11, 0);
        for _ in 0..200 {
            assert!(s.sample(&mut rng).is_consistent());
        }
    }

    #[test]
    fn size_one_has_a_single_configuration() {
        let cfg = SamplerConfig::new(0.3, 5).unwrap();
        let s = BoltzmannSampler::new(cfg).unwrap();
        let mut rng = stream_rng(5, 0);
        for _ in 0..50 {
            let x = s.sample_exact_n(&mut rng, 1).unwrap();
            assert_eq!(
                x.multiplicities.into_iter().collect::<Vec<_>>(),
                vec![((1, 1), 1)]
            );
            assert_eq!(x.parts, 1);
        }
    }

    #[test]
    fn rejection_budget_reported() {
        let mut cfg = SamplerConfig::new(0.01, 1).unwrap();
        cfg.max_attempts = 10;
        let s = BoltzmannSampler::new(cfg).unwrap();
        let err = s.sample_exact_n(&mut stream_rng(1, 0), 500).unwrap_err();
        assert!(matches!(
            err,
            Error::RejectionBudget {
                n: 500,
                attempts: 10
            }
        ));
    }

    #[test]
    fn same_seed_same_stream() {
        let cfg = SamplerConfig::new(0.8, 99).unwrap();
        let s = BoltzmannSampler::new(cfg).unwrap();
        let a = boltzmann_batch(&s, 50);
        let b = boltzmann_batch(&s, 50);
        assert_eq!(a, b);
        assert_eq!(
            boltzmann_sample(&cfg).unwrap(),
            boltzmann_sample(&cfg).unwrap()
        );
    }

    #[test]
    fn exact_uniform_trivial_row() {
        let t = build_trace_table(3);
        for seed in 0..20 {
            assert_eq!(exact_uniform_sample(&t, 1, seed).unwrap(), 1);
        }
        assert!(exact_uniform_sample(&t, 4, 0).is_err());
    }

    #[test]
    fn uniform_below_stays_in_range() {
        let bound = BigUint::from(48u32);
        let mut rng = stream_rng(0, 0);
        let mut seen = [false; 48];
        for _ in 0..5000 {
            let v = uniform_below(&mut rng, &bound);
            let i: usize = v.try_into().unwrap();
            seen[i] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn negbin_inverse_small_cases() {
        // j = 1 is geometric: P(K >= 1) = q.
        let q: f64 = 0.25;
        assert_eq!(negbin_inverse(0.5, 1, q, 1.0 - q), 0);
        assert_eq!(negbin_inverse(0.2, 1, q, 1.0 - q), 1);
    }

    #[test]
    fn pooling_keeps_every_cell() {
        let g = pooled_groups(&[1.0, 10.0, 2.0, 2.0, 7.0, 0.5]);
        assert_eq!(g, vec![0..2, 2..6]);
        assert_eq!(pooled_groups(&[1.0]), vec![0..1]);
    }

    #[test]
    fn chi_square_of_perfect_fit() {
        let c = chi_square_gof(&[50, 30, 20], &[0.5, 0.3, 0.2]);
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.dof, 2);
        assert!((c.p_value - 1.0).abs() < 1e-12);
        let t = chi_square_two_sample(&[10, 20, 30], &[10, 20, 30]);
        assert_eq!(t.statistic, 0.0);
    }
}
