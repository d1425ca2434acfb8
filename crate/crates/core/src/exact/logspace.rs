use crate::error::{Error, Result};
use crate::special::zeta3;

use super::{dp, tri_offset, TracePmf};

/// `log Q(m, n)` as `f64` for `1 <= m <= n <= n_max`. Reaches sizes where
/// the bignum table is too slow to build; agrees with it to ~1e-13 relative.
#[derive(Clone, Debug, PartialEq)]
pub struct LogTraceTable {
    n_max: usize,
    log_q: Vec<f64>,
    log_row: Vec<f64>,
}

/// Builds the log-space table.
///
/// Row `n` is accumulated as `Q(m, n) e^{-s n}` with `s = (2 zeta(3) / n_max)^{1/3}`,
/// the leading-order saddle point, which keeps every entry inside the
/// `f64` exponent range for `n_max` up to roughly 10^4.
pub fn build_log_table(n_max: usize) -> Result<LogTraceTable> {
    if n_max == 0 {
        return Err(Error::OutOfRange {
            n: 0,
            lo: 1,
            hi: usize::MAX,
        });
    }
    let scale = (2.0 * zeta3() / n_max as f64).cbrt();
    let data = dp::bivariate_scaled(n_max, scale);
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let row = &data[dp::row_offset(n) + 1..dp::row_offset(n) + n + 1];
        let shift = scale * n as f64;
        if row.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::NonConvergent {
                what: "log-space table (exponent range)",
                budget: n,
            });
        }
        rows.push(row.iter().map(|v| v.ln() + shift).collect());
    }
    // Row sums come from the stored logs so a table reloaded from disk
    // is bit-identical to a fresh build.
    LogTraceTable::from_rows(rows)
}

impl LogTraceTable {
    /// Assemble from rows `1..=n_max` of `log Q(m, n)`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_max = rows.len();
        let mut log_q = Vec::new();
        let mut log_row = vec![0.0];
        for (i, row) in rows.into_iter().enumerate() {
            let n = i + 1;
            if row.len() != n {
                return Err(Error::parse(
                    n,
                    format!("row {n} has {} entries", row.len()),
                ));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::parse(n, "non-finite log count"));
            }
            log_row.push(log_sum_exp(&row));
            log_q.extend(row);
        }
        Ok(LogTraceTable {
            n_max,
            log_q,
            log_row,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `[log Q(1, n), ..., log Q(n, n)]`.
    pub fn row(&self, n: usize) -> Result<&[f64]> {
        if n == 0 || n > self.n_max {
            return Err(Error::OutOfRange {
                n,
                lo: 1,
                hi: self.n_max,
            });
        }
        Ok(&self.log_q[tri_offset(n)..tri_offset(n) + n])
    }

    /// `log Q(n)`.
    pub fn log_q(&self, n: usize) -> Result<f64> {
        self.log_row.get(n).copied().ok_or(Error::OutOfRange {
            n,
            lo: 0,
            hi: self.n_max,
        })
    }

    /// Real-mode trace pmf for row `n`.
    pub fn pmf(&self, n: usize) -> Result<TracePmf> {
        let row = self.row(n)?;
        let total = self.log_row[n];
        TracePmf::from_real(n, row.iter().map(|l| (l - total).exp()).collect())
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + xs.iter().map(|x| (x - hi).exp()).sum::<f64>().ln()
}
