//! Numerical checks of the local Gaussian approximation of
//! `G(1, r_n e^{i theta})` near `theta = 0` and of the decay of
//! `|G(e^{iT}, r_n e^{i theta})|` away from it.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{log_g, log_g_real, saddle_scale, saddle_solve, SaddleSolution};
use crate::error::{Error, Result};
use crate::special::cexpm1;

pub const LEMMA1_GRID: usize = 201;
pub const LEMMA2_SAMPLES: usize = 512;

/// One verified quantity, shaped for tabular output.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub n: usize,
    pub quantity: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `delta_n = n^{-5/9} / log n`.
pub fn delta_n(n: usize) -> f64 {
    let nf = n as f64;
    nf.powf(-5.0 / 9.0) / nf.ln()
}

fn check_delta(n: usize) -> Result<f64> {
    let d = delta_n(n);
    if n < 2 || !(d < std::f64::consts::PI) {
        return Err(Error::OutOfRange {
            n,
            lo: 2,
            hi: usize::MAX,
        });
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Report {
    pub saddle: SaddleSolution,
    pub delta_n: f64,
    pub grid_size: usize,
    /// `max |LHS / RHS - 1|` over the grid.
    pub max_rel_error: f64,
    pub argmax_theta: f64,
    /// Error at `theta = 0` when the grid contains it.
    pub error_at_zero: Option<f64>,
}

impl Lemma1Report {
    /// `max_rel_error * log^3 n`.
    pub fn scaled_error(&self) -> f64 {
        self.max_rel_error * (self.saddle.n as f64).ln().powi(3)
    }

    pub fn records(&self) -> Vec<CheckRecord> {
        let n = self.saddle.n;
        vec![
            CheckRecord {
                n,
                quantity: "max_rel_error",
                value: self.max_rel_error,
                bound: f64::NAN,
                pass: self.max_rel_error.is_finite(),
            },
            CheckRecord {
                n,
                quantity: "error_times_log3",
                value: self.scaled_error(),
                bound: f64::NAN,
                pass: self.scaled_error().is_finite(),
            },
            CheckRecord {
                n,
                quantity: "error_at_zero",
                value: self.error_at_zero.unwrap_or(f64::NAN),
                bound: 0.0,
                pass: self.error_at_zero.is_none_or(|e| e == 0.0),
            },
        ]
    }
}

/// Compares `G(1, r_n e^{i theta}) e^{-i theta n}` with
/// `G(1, r_n) e^{-theta^2 b(r_n) / 2}` on a uniform grid over
/// `[-delta_n, delta_n]`.
pub fn verify_lemma1(n: usize, grid_size: usize) -> Result<Lemma1Report> {
    let delta = check_delta(n)?;
    if grid_size == 0 {
        return Err(Error::Domain {
            what: "lemma 1 grid size",
            value: 0.0,
        });
    }
    let s = saddle_solve(n)?;
    let one = Complex64::new(1.0, 0.0);
    let base = log_g(one, Complex64::new(s.r_n, 0.0))?;
    let thetas: Vec<f64> = (0..grid_size)
        .map(|i| {
            if grid_size == 1 || 2 * i + 1 == grid_size {
                0.0
            } else {
                -delta + 2.0 * delta * i as f64 / (grid_size - 1) as f64
            }
        })
        .collect();
    let errors = thetas
        .par_iter()
        .map(|&theta| {
            let lhs = log_g(one, Complex64::from_polar(s.r_n, theta))?
                - Complex64::new(0.0, theta * n as f64);
            let rhs = base - 0.5 * theta * theta * s.b_rn;
            Ok(cexpm1(lhs - rhs).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mut max_rel_error, mut argmax_theta) = (0.0, 0.0);
    for (&theta, &e) in thetas.iter().zip(&errors) {
        if e > max_rel_error {
            max_rel_error = e;
            argmax_theta = theta;
        }
    }
    let error_at_zero = thetas.iter().position(|&t| t == 0.0).map(|i| errors[i]);
    Ok(Lemma1Report {
        saddle: s,
        delta_n: delta,
        grid_size,
        max_rel_error,
        argmax_theta,
        error_at_zero,
    })
}

/// `T = n^{-1/3} / sqrt(log n)`.
pub fn default_lemma2_t(n: usize) -> f64 {
    let nf = n as f64;
    nf.cbrt().recip() / nf.ln().sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma2Report {
    pub saddle: SaddleSolution,
    pub t: f64,
    pub delta_n: f64,
    /// `max log(|G(e^{iT}, r_n e^{i theta})| / G(1, r_n))` over the samples.
    pub max_log_ratio: f64,
    pub argmax_theta: f64,
    /// Log-ratio at `theta = delta_n` and `-delta_n`, whichever is larger.
    pub log_ratio_at_delta: f64,
    /// `-2 n^{2/9} / ([2 zeta(3)]^{4/3} log^2 n)`.
    pub bound_exponent: f64,
    /// `max_log_ratio - bound_exponent`: the smallest constant making the
    /// bound hold on the sample.
    pub fitted_constant: f64,
}

impl Lemma2Report {
    pub fn max_ratio(&self) -> f64 {
        self.max_log_ratio.exp()
    }

    pub fn boundary_is_max(&self) -> bool {
        self.log_ratio_at_delta >= self.max_log_ratio
    }

    pub fn records(&self) -> Vec<CheckRecord> {
        let n = self.saddle.n;
        vec![
            CheckRecord {
                n,
                quantity: "max_log_ratio",
                value: self.max_log_ratio,
                bound: self.bound_exponent,
                pass: self.max_log_ratio.is_finite(),
            },
            CheckRecord {
                n,
                quantity: "fitted_constant",
                value: self.fitted_constant,
                bound: f64::NAN,
                pass: self.fitted_constant.is_finite(),
            },
            CheckRecord {
                n,
                quantity: "max_at_delta_n",
                value: self.argmax_theta,
                bound: self.delta_n,
                pass: self.boundary_is_max(),
            },
        ]
    }
}

pub fn lemma2_bound_exponent(n: usize) -> f64 {
    let nf = n as f64;
    -2.0 * nf.powf(2.0 / 9.0) / (saddle_scale().powi(4) * nf.ln().powi(2))
}

/// Samples `|theta|` at `samples` log-spaced points of `[delta_n, pi]`
/// (both endpoints included) with both signs.
pub fn verify_lemma2(n: usize, t: f64, samples: usize) -> Result<Lemma2Report> {
    let delta = check_delta(n)?;
    if samples < 2 {
        return Err(Error::Domain {
            what: "lemma 2 sample count",
            value: samples as f64,
        });
    }
    if !t.is_finite() {
        return Err(Error::Domain {
            what: "lemma 2 T",
            value: t,
        });
    }
    let s = saddle_solve(n)?;
    let base = log_g_real(s.y_n)?;
    let (lo, hi) = (delta.ln(), std::f64::consts::PI.ln());
    let mut thetas: Vec<f64> = (0..samples)
        .map(|i| {
            if i == 0 {
                delta
            } else if i + 1 == samples {
                std::f64::consts::PI
            } else {
                (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp()
            }
        })
        .collect();
    let negatives: Vec<f64> = thetas.iter().map(|t| -t).collect();
    thetas.extend(negatives);
    let u = Complex64::from_polar(1.0, t);
    let logs = thetas
        .par_iter()
        .map(|&theta| Ok(log_g(u, Complex64::from_polar(s.r_n, theta))?.re - base))
        .collect::<Result<Vec<f64>>>()?;
    let (mut max_log_ratio, mut argmax_theta) = (f64::NEG_INFINITY, 0.0);
    for (&theta, &l) in thetas.iter().zip(&logs) {
        if l > max_log_ratio {
            max_log_ratio = l;
            argmax_theta = theta;
        }
    }
    let log_ratio_at_delta = logs[0].max(logs[samples]);
    let bound_exponent = lemma2_bound_exponent(n);
    Ok(Lemma2Report {
        saddle: s,
        t,
        delta_n: delta,
        max_log_ratio,
        argmax_theta,
        log_ratio_at_delta,
        bound_exponent,
        fitted_constant: max_log_ratio - bound_exponent,
    })
}
