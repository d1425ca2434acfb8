//! Exact enumeration of plane partitions by size and trace.
//!
//! `Q(n)` is the coefficient of `x^n` in `prod_j (1 - x^j)^{-j}` and
//! `Q(m, n)` the coefficient of `u^m x^n` in `prod_j (1 - u x^j)^{-j}`.
//! Rows of the bivariate table sum to `Q(n)`, and `Q(m, n) / Q(n)` is the
//! law of the trace of a uniform plane partition of `n`.

mod cache;
mod dp;
mod logspace;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub use cache::{
    decode_cache, encode_cache, read_trace_csv, write_log_csv, write_trace_csv, CachedTable,
    TableMode, CACHE_MAGIC,
};
pub use logspace::{build_log_table, LogTraceTable};

/// Arbitrary-precision nonnegative count.
pub type BigCount = BigUint;

/// Largest `n` served by the bignum table.
pub const EXACT_LIMIT: usize = 500;
/// Largest `n` served by the log-space table.
pub const LOGSPACE_LIMIT: usize = 3000;

/// `Q(0), ..., Q(n_max)` with `Q(0) = 1`.
pub fn count_q(n_max: usize) -> Vec<BigCount> {
    dp::univariate(n_max)
}

/// Triangular table of `Q(m, n)` for `1 <= m <= n <= n_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceTable {
    n_max: usize,
    // row n at (n-1) n / 2, entries m = 1..=n
    entries: Vec<BigCount>,
    row_sums: Vec<BigCount>,
}

fn tri_offset(n: usize) -> usize {
    (n - 1) * n / 2
}

impl TraceTable {
    /// Assemble a table from rows `1..=n_max`; row `n` must hold `n` entries.
    pub fn from_rows(rows: Vec<Vec<BigCount>>) -> Result<Self> {
        let n_max = rows.len();
        let mut entries = Vec::with_capacity(n_max * (n_max + 1) / 2);
        let mut row_sums = Vec::with_capacity(n_max + 1);
        row_sums.push(BigCount::from(1u32));
        for (i, row) in rows.into_iter().enumerate() {
            let n = i + 1;
            if row.len() != n {
                return Err(Error::parse(
                    n,
                    format!("row {n} has {} entries", row.len()),
                ));
            }
            row_sums.push(row.iter().sum());
            entries.extend(row);
        }
        Ok(TraceTable {
            n_max,
            entries,
            row_sums,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `Q(m, n)` for `1 <= m <= n <= n_max`.
    pub fn get(&self, m: usize, n: usize) -> Option<&BigCount> {
        if n == 0 || n > self.n_max || m == 0 || m > n {
            return None;
        }
        Some(&self.entries[tri_offset(n) + m - 1])
    }

    /// `Q(m, n)` with the zero conventions: `Q(m, n) = 0` for `m > n` and
    /// `Q(0, n) = 0` for `n >= 1`.
    pub fn count(&self, m: usize, n: usize) -> BigCount {
        match (m, n) {
            (0, 0) => BigCount::from(1u32),
            _ => self.get(m, n).cloned().unwrap_or_default(),
        }
    }

    /// Row `n` as `[Q(1, n), ..., Q(n, n)]`.
    pub fn row(&self, n: usize) -> Result<&[BigCount]> {
        self.check(n)?;
        Ok(&self.entries[tri_offset(n)..tri_offset(n) + n])
    }

    /// `Q(n)`.
    pub fn q(&self, n: usize) -> Result<&BigCount> {
        if n > self.n_max {
            return Err(self.out_of_range(n));
        }
        Ok(&self.row_sums[n])
    }

    pub fn row_sums(&self) -> &[BigCount] {
        &self.row_sums
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max {
            return Err(self.out_of_range(n));
        }
        Ok(())
    }

    fn out_of_range(&self, n: usize) -> Error {
        Error::OutOfRange {
            n,
            lo: 1,
            hi: self.n_max,
        }
    }
}

/// Exact `Q(m, n)` for all `1 <= m <= n <= n_max`.
///
/// The inner loop runs on fixed-width limbs sized from `Q(n_max)`, which
/// bounds every partial product since all coefficients are nonnegative.
pub fn build_trace_table(n_max: usize) -> TraceTable {
    let bound = dp::univariate(n_max).pop().unwrap_or_default();
    let limbs = dp::limbs_for(&bound);
    let data = dp::bivariate_limbs(n_max, limbs);
    let rows = (1..=n_max)
        .map(|n| {
            (1..=n)
                .map(|m| {
                    let at = (dp::row_offset(n) + m) * limbs;
                    dp::limbs_to_biguint(&data[at..at + limbs])
                })
                .collect()
        })
        .collect();
    TraceTable::from_rows(rows).expect("rows have triangular shape")
}

/// A probability `num / den`, reduced only on request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fraction {
    pub num: BigCount,
    pub den: BigCount,
}

impl Fraction {
    pub fn reduced(&self) -> Fraction {
        let g = self.num.gcd(&self.den);
        if g.is_zero() {
            return self.clone();
        }
        Fraction {
            num: &self.num / &g,
            den: &self.den / &g,
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.num, &self.den)
    }
}

/// Natural log of a positive count; `-inf` for zero.
pub fn ln_count(q: &BigCount) -> f64 {
    let bits = q.bits();
    if bits <= 1000 {
        return q.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    (q >> shift).to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * std::f64::consts::LN_2
}

/// `num / den` correctly scaled even when both overflow `f64`.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let shift = (den.bits() as i64).max(num.bits() as i64) - 1000;
    if shift <= 0 {
        return num.to_f64().unwrap_or(f64::NAN) / den.to_f64().unwrap_or(f64::NAN);
    }
    let s = shift as usize;
    let n = (num >> s).to_f64().unwrap_or(0.0);
    let d = (den >> s).to_f64().unwrap_or(f64::NAN);
    n / d
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PmfMode {
    Rational,
    Real,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PmfProbs {
    Rational(Vec<Fraction>),
    Real(Vec<f64>),
}

/// Law of the trace `tau_n`; `probs` index `m - 1` for `m = 1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePmf {
    n: usize,
    probs: PmfProbs,
}

impl TracePmf {
    pub fn from_real(n: usize, probs: Vec<f64>) -> Result<Self> {
        if n == 0 || probs.len() != n {
            return Err(Error::OutOfRange {
                n: probs.len(),
                lo: n.max(1),
                hi: n.max(1),
            });
        }
        Ok(TracePmf {
            n,
            probs: PmfProbs::Real(probs),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &PmfProbs {
        &self.probs
    }

    /// Probabilities as reals regardless of mode.
    pub fn real_probs(&self) -> Vec<f64> {
        match &self.probs {
            PmfProbs::Real(p) => p.clone(),
            PmfProbs::Rational(f) => f.iter().map(Fraction::to_f64).collect(),
        }
    }
}

/// `P(tau_n = m) = Q(m, n) / Q(n)`.
pub fn trace_pmf(table: &TraceTable, n: usize, mode: PmfMode) -> Result<TracePmf> {
    let row = table.row(n)?;
    let den = table.q(n)?;
    let probs = match mode {
        PmfMode::Rational => PmfProbs::Rational(
            row.iter()
                .map(|q| Fraction {
                    num: q.clone(),
                    den: den.clone(),
                })
                .collect(),
        ),
        PmfMode::Real => PmfProbs::Real(row.iter().map(|q| ratio_to_f64(q, den)).collect()),
    };
    Ok(TracePmf { n, probs })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of the trace. Rational pmfs are reduced exactly
/// before the final conversion.
pub fn trace_moments(pmf: &TracePmf) -> Moments {
    match &pmf.probs {
        PmfProbs::Rational(fr) => {
            // All fractions of a table row share one denominator; fall back
            // to the general path otherwise.
            let den = &fr[0].den;
            if fr.iter().all(|f| &f.den == den) {
                let mut s1 = BigInt::zero();
                let mut s2 = BigInt::zero();
                let mut s0 = BigInt::zero();
                for (i, f) in fr.iter().enumerate() {
                    let m = BigInt::from(i + 1);
                    let w = BigInt::from(f.num.clone());
                    s1 += &m * &w;
                    s2 += &m * &m * &w;
                    s0 += w;
                }
                // mean = s1/s0, var = (s0 s2 - s1^2) / s0^2
                let var_num = &s0 * &s2 - &s1 * &s1;
                let s0_sq = &s0 * &s0;
                let mean = ratio_to_f64(s1.magnitude(), s0.magnitude());
                let variance = ratio_to_f64(var_num.magnitude(), s0_sq.magnitude());
                return Moments { mean, variance };
            }
            real_moments(&pmf.real_probs())
        }
        PmfProbs::Real(p) => real_moments(p),
    }
}

fn real_moments(p: &[f64]) -> Moments {
    let mean: f64 = p.iter().enumerate().map(|(i, &w)| (i + 1) as f64 * w).sum();
    let variance: f64 = p
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let d = (i + 1) as f64 - mean;
            d * d * w
        })
        .sum();
    Moments {
        mean,
        variance: variance.max(0.0),
    }
}

/// `phi_n(e^{it}) = sum_m P(tau_n = m) e^{imt}`.
pub fn trace_cf(pmf: &TracePmf, t: f64) -> Complex64 {
    pmf.real_probs()
        .iter()
        .enumerate()
        .map(|(i, &p)| Complex64::from_polar(p, (i + 1) as f64 * t))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn big(v: u64) -> BigCount {
        BigCount::from(v)
    }

    #[test]
    fn ln_count_large_and_small() {
        assert_eq!(ln_count(&big(1)), 0.0);
        assert_eq!(ln_count(&big(0)), f64::NEG_INFINITY);
        let huge = BigCount::from(3u32).pow(2000);
        assert!((ln_count(&huge) - 2000.0 * 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn count_q_empty_product() {
        assert_eq!(count_q(0), vec![big(1)]);
    }

    #[test]
    fn first_counts() {
        let q = count_q(6);
        let want: Vec<BigCount> = [1u64, 1, 3, 6, 13, 24, 48]
            .iter()
            .map(|&v| big(v))
            .collect();
        assert_eq!(q, want);
    }

    #[test]
    fn small_rows() {
        let t = build_trace_table(3);
        assert_eq!(t.row(1).unwrap(), &[big(1)]);
        assert_eq!(t.row(2).unwrap(), &[big(2), big(1)]);
        assert_eq!(t.row(3).unwrap(), &[big(3), big(2), big(1)]);
        assert_eq!(t.q(3).unwrap(), &big(6));
        assert_eq!(t.q(0).unwrap(), &big(1));
    }

    #[test]
    fn zero_conventions() {
        let t = build_trace_table(4);
        assert_eq!(t.count(5, 4), big(0));
        assert_eq!(t.count(0, 3), big(0));
        assert_eq!(t.count(0, 0), big(1));
        assert!(t.get(2, 1).is_none());
    }

    #[test]
    fn out_of_range_rows() {
        let t = build_trace_table(4);
        assert!(matches!(t.row(5), Err(Error::OutOfRange { n: 5, .. })));
        assert!(t.row(0).is_err());
        assert!(trace_pmf(&t, 9, PmfMode::Real).is_err());
    }

    #[test]
    fn pmf_small_cases() {
        let t = build_trace_table(3);
        let p = trace_pmf(&t, 2, PmfMode::Rational).unwrap();
        let PmfProbs::Rational(fr) = p.probs() else {
            panic!("rational mode")
        };
        assert_eq!(
            fr[0].reduced(),
            Fraction {
                num: big(2),
                den: big(3)
            }
        );
        assert_eq!(
            fr[1].reduced(),
            Fraction {
                num: big(1),
                den: big(3)
            }
        );

        let p3 = trace_pmf(&t, 3, PmfMode::Rational).unwrap();
        let got: Vec<Fraction> = match p3.probs() {
            PmfProbs::Rational(f) => f.iter().map(Fraction::reduced).collect(),
            _ => unreachable!(),
        };
        assert_eq!(
            got,
            vec![
                Fraction {
                    num: big(1),
                    den: big(2)
                },
                Fraction {
                    num: big(1),
                    den: big(3)
                },
                Fraction {
                    num: big(1),
                    den: big(6)
                },
            ]
        );
        let p1 = trace_pmf(&t, 1, PmfMode::Real).unwrap();
        assert_eq!(p1.real_probs(), vec![1.0]);
    }

    #[test]
    fn moments_small_cases() {
        let t = build_trace_table(3);
        for mode in [PmfMode::Rational, PmfMode::Real] {
            let m2 = trace_moments(&trace_pmf(&t, 2, mode).unwrap());
            assert!((m2.mean - 4.0 / 3.0).abs() < 1e-15);
            assert!((m2.variance - 2.0 / 9.0).abs() < 1e-15);
            let m3 = trace_moments(&trace_pmf(&t, 3, mode).unwrap());
            assert!((m3.mean - 5.0 / 3.0).abs() < 1e-15);
            assert!((m3.variance - 5.0 / 9.0).abs() < 1e-15);
            let m1 = trace_moments(&trace_pmf(&t, 1, mode).unwrap());
            assert_eq!((m1.mean, m1.variance), (1.0, 0.0));
        }
    }

    #[test]
    fn cf_small_cases() {
        let t = build_trace_table(2);
        let p = trace_pmf(&t, 2, PmfMode::Real).unwrap();
        let at0 = trace_cf(&p, 0.0);
        assert!((at0.re - 1.0).abs() < 1e-15 && at0.im.abs() < 1e-15);
        let at_pi = trace_cf(&p, PI);
        assert!((at_pi.re + 1.0 / 3.0).abs() < 1e-15);
        assert!(at_pi.im.abs() < 1e-15);
        let a = trace_cf(&p, 0.7);
        let b = trace_cf(&p, -0.7);
        assert!((a - b.conj()).norm() < 1e-15);
    }

    #[test]
    fn ratio_to_f64_handles_huge_operands() {
        let a = BigUint::from(3u32) << 5000usize;
        let b = BigUint::from(4u32) << 5000usize;
        assert!((ratio_to_f64(&a, &b) - 0.75).abs() < 1e-15);
    }
}
