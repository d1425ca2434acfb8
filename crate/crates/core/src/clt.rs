//! Distance between the normalized trace law and the standard normal.
//!
//! The trace is centred at `c0 n^{2/3}` and scaled by `c1 n^{1/3} sqrt(log n)`
//! (natural log throughout). Atoms of the resulting step CDF are compared
//! against the normal CDF on both sides of each jump.

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::asympt::{truncation, SaddleSolution};
use crate::error::{Error, Result};
use crate::exact::{trace_cf, trace_moments, TracePmf};
use crate::special::{zeta2, zeta3};

/// `(c0, c1) = (zeta(2) / [2 zeta(3)]^{2/3}, sqrt(1/3) / [2 zeta(3)]^{1/3})`.
pub fn constants() -> (f64, f64) {
    let a = (2.0 * zeta3()).cbrt();
    (zeta2() / (a * a), (1.0f64 / 3.0).sqrt() / a)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Centre and scale of the normalized trace at size `n`.
pub fn normalization(n: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::OutOfRange {
            n,
            lo: 2,
            hi: usize::MAX,
        });
    }
    let (c0, c1) = constants();
    let nf = n as f64;
    Ok((c0 * nf.powf(2.0 / 3.0), c1 * nf.cbrt() * nf.ln().sqrt()))
}

pub const GRID_HALF_WIDTH: f64 = 4.0;
pub const GRID_STEP: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedGrid {
    pub n: usize,
    /// Normalized positions of `m = 1..=n`.
    pub atoms: Vec<f64>,
    pub masses: Vec<f64>,
    /// The uniform grid over `[-4, 4]` merged with the atoms, sorted.
    pub z_values: Vec<f64>,
    /// Right-continuous step CDF at each `z_values` entry.
    pub cdf_exact: Vec<f64>,
    pub cdf_normal: Vec<f64>,
}

impl NormalizedGrid {
    /// Step CDF at an arbitrary point.
    pub fn cdf_at(&self, z: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= z);
        self.masses[..k].iter().sum::<f64>().min(1.0)
    }
}

pub fn normalize(pmf: &TracePmf) -> Result<NormalizedGrid> {
    let n = pmf.n();
    let (centre, scale) = normalization(n)?;
    let masses = pmf.real_probs();
    let atoms: Vec<f64> = (1..=n).map(|m| (m as f64 - centre) / scale).collect();
    let steps = (2.0 * GRID_HALF_WIDTH / GRID_STEP).round() as usize;
    let mut z_values: Vec<f64> = (0..=steps)
        .map(|i| -GRID_HALF_WIDTH + GRID_STEP * i as f64)
        .chain(atoms.iter().copied())
        .collect();
    z_values.sort_by(f64::total_cmp);
    z_values.dedup();
    let mut cdf_exact = Vec::with_capacity(z_values.len());
    let (mut k, mut acc) = (0, 0.0);
    for &z in &z_values {
        while k < atoms.len() && atoms[k] <= z {
            acc += masses[k];
            k += 1;
        }
        cdf_exact.push(acc.min(1.0));
    }
    let cdf_normal = z_values.iter().map(|&z| normal_cdf(z)).collect();
    Ok(NormalizedGrid {
        n,
        atoms,
        masses,
        z_values,
        cdf_exact,
        cdf_normal,
    })
}

/// Sup distance between the step CDF with the given atoms and a
/// continuous CDF, checked on both sides of every jump.
pub fn ks_distance_to<F: Fn(f64) -> f64>(atoms: &[f64], masses: &[f64], cdf: F) -> f64 {
    let mut left = 0.0;
    let mut worst: f64 = 0.0;
    for (&z, &p) in atoms.iter().zip(masses) {
        let right = (left + p).min(1.0);
        let c = cdf(z);
        worst = worst.max((left - c).abs()).max((right - c).abs());
        left = right;
    }
    worst
}

/// Sup distance between two step CDFs given by sorted atoms and masses.
pub fn ks_between(atoms_a: &[f64], masses_a: &[f64], atoms_b: &[f64], masses_b: &[f64]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0, 0.0);
    let mut worst: f64 = 0.0;
    while i < atoms_a.len() || j < atoms_b.len() {
        let za = atoms_a.get(i).copied().unwrap_or(f64::INFINITY);
        let zb = atoms_b.get(j).copied().unwrap_or(f64::INFINITY);
        let z = za.min(zb);
        while i < atoms_a.len() && atoms_a[i] == z {
            fa += masses_a[i];
            i += 1;
        }
        while j < atoms_b.len() && atoms_b[j] == z {
            fb += masses_b[j];
            j += 1;
        }
        worst = worst.max((fa - fb).abs());
    }
    worst
}

pub fn ks_distance(grid: &NormalizedGrid) -> f64 {
    ks_distance_to(&grid.atoms, &grid.masses, normal_cdf)
}

/// `w` from -3 to 3 in steps of 0.1.
pub fn default_w_grid() -> Vec<f64> {
    (-30..=30).map(|i| f64::from(i) / 10.0).collect()
}

/// Characteristic function of the normalized trace at `w`.
pub fn normalized_cf(pmf: &TracePmf, w: f64) -> Result<Complex64> {
    let (centre, scale) = normalization(pmf.n())?;
    let t = w / scale;
    Ok(Complex64::from_polar(1.0, -t * centre) * trace_cf(pmf, t))
}

/// `max_w |Phi_n(w) - e^{-w^2/2}|`.
pub fn cf_check(pmf: &TracePmf, w_grid: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &w in w_grid {
        if !w.is_finite() {
            return Err(Error::Domain {
                what: "cf grid point",
                value: w,
            });
        }
        let phi = normalized_cf(pmf, w)?;
        worst = worst.max((phi - (-0.5 * w * w).exp()).norm());
    }
    Ok(worst)
}

/// Mean and variance of the number of parts under the product measure
/// tilted by `x = r_n`.
pub fn moment_prediction(s: &SaddleSolution) -> (f64, f64) {
    let y = s.y_n;
    let (mut mean, mut second) = (0.0, 0.0);
    for j in (1..=truncation(y)).rev() {
        let jf = j as f64;
        let q = (-jf * y).exp();
        let one_minus = -(-jf * y).exp_m1();
        let ratio = q / one_minus;
        mean += jf * ratio;
        second += jf * ratio * ratio;
    }
    (mean, second + mean)
}

/// One row of the trend study; field order is the serialized column order.
#[derive(Clone, Debug, PartialEq)]
pub struct CltReport {
    pub n: usize,
    pub exact_mean: f64,
    pub exact_var: f64,
    pub mean_ratio: f64,
    pub var_ratio: f64,
    pub ks_distance: f64,
    pub cf_error: f64,
}

pub const REPORT_FIELDS: [&str; 7] = [
    "n",
    "exact_mean",
    "exact_var",
    "mean_ratio",
    "var_ratio",
    "ks_distance",
    "cf_error",
];

pub fn clt_report(pmf: &TracePmf, w_grid: &[f64]) -> Result<CltReport> {
    let n = pmf.n();
    let grid = normalize(pmf)?;
    let moments = trace_moments(pmf);
    let (c0, c1) = constants();
    let nf = n as f64;
    Ok(CltReport {
        n,
        exact_mean: moments.mean,
        exact_var: moments.variance,
        mean_ratio: moments.mean / (c0 * nf.powf(2.0 / 3.0)),
        var_ratio: moments.variance / (c1 * c1 * nf.powf(2.0 / 3.0) * nf.ln()),
        ks_distance: ks_distance(&grid),
        cf_error: cf_check(pmf, w_grid)?,
    })
}

pub fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Slope of `|ratio - 1|` against `1 / log n`. Positive means the gap
/// shrinks as `n` grows.
pub fn ratio_gap_slope(ns: &[usize], ratios: &[f64]) -> Option<f64> {
    let xs: Vec<f64> = ns.iter().map(|&n| 1.0 / (n as f64).ln()).collect();
    let ys: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    ls_slope(&xs, &ys)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Decreasing,
    NotDecreasing,
}

impl Trend {
    pub fn of(xs: &[f64]) -> Trend {
        if strictly_decreasing(xs) {
            Trend::Decreasing
        } else {
            Trend::NotDecreasing
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Decreasing => "decreasing",
            Trend::NotDecreasing => "not_decreasing",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrendSummary {
    pub ks_trend: Trend,
    pub cf_trend: Trend,
    pub mean_gap_slope: Option<f64>,
    pub var_gap_slope: Option<f64>,
}

pub fn summarize(reports: &[CltReport]) -> TrendSummary {
    let ns: Vec<usize> = reports.iter().map(|r| r.n).collect();
    let ks: Vec<f64> = reports.iter().map(|r| r.ks_distance).collect();
    let cf: Vec<f64> = reports.iter().map(|r| r.cf_error).collect();
    let mean: Vec<f64> = reports.iter().map(|r| r.mean_ratio).collect();
    let var: Vec<f64> = reports.iter().map(|r| r.var_ratio).collect();
    TrendSummary {
        ks_trend: Trend::of(&ks),
        cf_trend: Trend::of(&cf),
        mean_gap_slope: ratio_gap_slope(&ns, &mean),
        var_gap_slope: ratio_gap_slope(&ns, &var),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asympt::saddle_solve;
    use crate::exact::{build_trace_table, trace_pmf, PmfMode};

    #[test]
    fn constants_match_printed_decimals() {
        let (c0, c1) = constants();
        assert!((c0 - 0.916_597_104).abs() < 1e-8);
        assert!((c1 - 0.430_977_269).abs() < 1e-8);
        assert!((c0 - 3.0 * zeta2() * c1 * c1).abs() < 1e-12);
    }

    #[test]
    fn normalize_n2_atoms() {
        let table = build_trace_table(2);
        let pmf = trace_pmf(&table, 2, PmfMode::Rational).unwrap();
        let g = normalize(&pmf).unwrap();
        let (c0, c1) = constants();
        let s = c1 * 2f64.cbrt() * 2f64.ln().sqrt();
        for (m, &z) in [1.0, 2.0].iter().zip(&g.atoms) {
            assert!((z - (m - c0 * 2f64.powf(2.0 / 3.0)) / s).abs() < 1e-14);
        }
        assert!((g.masses[0] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(*g.cdf_exact.last().unwrap(), 1.0);
        assert_eq!(g.cdf_at(f64::INFINITY), 1.0);
        assert!(g.z_values.windows(2).all(|w| w[0] < w[1]));
        assert!(g.cdf_exact.windows(2).all(|w| w[0] <= w[1]));
        assert!(normalize(&trace_pmf(&table, 1, PmfMode::Real).unwrap()).is_err());
    }

    #[test]
    fn ks_point_mass_and_identity() {
        assert!(ks_distance_to(&[0.3], &[1.0], normal_cdf) >= 0.5);
        let atoms = [-1.0, 0.0, 2.0];
        let masses = [0.25, 0.5, 0.25];
        assert_eq!(ks_between(&atoms, &masses, &atoms, &masses), 0.0);
        assert_eq!(ks_between(&[0.0], &[1.0], &[1.0], &[1.0]), 1.0);
        let d = ks_between(&atoms, &masses, &[-1.0, 2.0], &[0.5, 0.5]);
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cf_zero_and_symmetry() {
        let table = build_trace_table(30);
        let pmf = trace_pmf(&table, 30, PmfMode::Real).unwrap();
        let at0 = normalized_cf(&pmf, 0.0).unwrap();
        assert!((at0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(cf_check(&pmf, &[0.0]).unwrap() < 1e-15);
        let a = normalized_cf(&pmf, 1.3).unwrap();
        let b = normalized_cf(&pmf, -1.3).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn moment_prediction_small_radius() {
        let s = SaddleSolution {
            n: 1,
            r_n: 1e-6,
            y_n: -(1e-6f64).ln(),
            b_rn: 1.0,
            source: crate::asympt::SaddleSource::NumericRoot,
        };
        let (mean, var) = moment_prediction(&s);
        assert!((mean / 1e-6 - 1.0).abs() < 1e-5);
        assert!(var > 0.0);
    }

    #[test]
    fn moment_prediction_leading_order() {
        let (c0, _) = constants();
        // The variance gap closes like 1 / log n.
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for n in [1000usize, 10_000, 100_000] {
            let s = saddle_solve(n).unwrap();
            let (mean, var) = moment_prediction(&s);
            let nf = n as f64;
            let mean_gap = (mean / (c0 * nf.powf(2.0 / 3.0)) - 1.0).abs();
            let var_lead = (nf / (2.0 * zeta3())).powf(2.0 / 3.0) * nf.ln() / 3.0;
            let var_gap = (var / var_lead - 1.0).abs();
            assert!(mean_gap < prev.0);
            assert!(var_gap < prev.1);
            prev = (mean_gap, var_gap);
        }
    }

    #[test]
    fn trend_helpers() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
        assert_eq!(ls_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]), Some(2.0));
        assert_eq!(ls_slope(&[1.0], &[1.0]), None);
        assert_eq!(Trend::of(&[0.2, 0.1]).as_str(), "decreasing");
    }
}
