//! Analytic side of `G(u, x) = prod_j (1 - u x^j)^{-j}`: the log-series on
//! the unit disk, the saddle point of `x^{-n} G(1, x)`, and the Wright,
//! Hayman and Meinardus approximations to `Q(n)`.

use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{cexpm1, glaisher_c, zeta3, Quadrature};

mod lemma;

pub use lemma::{
    default_lemma2_t, delta_n, verify_lemma1, verify_lemma2, CheckRecord, Lemma1Report,
    Lemma2Report, LEMMA1_GRID, LEMMA2_SAMPLES,
};

/// Hard cap on series terms for any single evaluation.
pub const TERM_BUDGET: usize = 50_000_000;

/// `[2 zeta(3)]^{1/3}`, the leading coefficient of `y_n n^{1/3}`.
pub fn saddle_scale() -> f64 {
    (2.0 * zeta3()).cbrt()
}

fn terms_exhausted(what: &'static str) -> Error {
    Error::NonConvergent {
        what,
        budget: TERM_BUDGET,
    }
}

/// `log G(u, x) = sum_l (u^l / l) x^l / (1 - x^l)^2`, principal branch
/// (real and positive at `u = 1`, `0 < x < 1`).
pub fn log_g(u: Complex64, x: Complex64) -> Result<Complex64> {
    let ax = x.norm();
    if !(ax < 1.0) {
        return Err(Error::Domain {
            what: "log_g |x|",
            value: ax,
        });
    }
    let au = u.norm();
    if !(au <= 1.0 + 1e-12) {
        return Err(Error::Domain {
            what: "log_g |u|",
            value: au,
        });
    }
    if ax == 0.0 || au == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = x.ln();
    let floor = 1e-16 * (1.0 - ax) * (1.0 - ax);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut ul = Complex64::new(1.0, 0.0);
    for l in 1..=TERM_BUDGET {
        let lf = l as f64;
        ul *= u;
        let lw = w * lf;
        let den = cexpm1(lw);
        sum += ul * lw.exp() / (den * den * lf);
        let axl = (lf * ax.ln()).exp();
        let bound = axl / (lf * (1.0 - axl) * (1.0 - axl));
        if bound < floor {
            return Ok(sum);
        }
    }
    Err(terms_exhausted("log_g series"))
}

/// `log G(1, e^{-y})` for real `y > 0`.
pub fn log_g_real(y: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain {
            what: "log_g_real y",
            value: y,
        });
    }
    let floor = 1e-16 * (-y).exp_m1().powi(2);
    let mut sum = 0.0;
    for l in 1..=TERM_BUDGET {
        let ly = l as f64 * y;
        let d = (-ly).exp_m1();
        let term = (-ly).exp() / (l as f64 * d * d);
        sum += term;
        if term < floor {
            return Ok(sum);
        }
    }
    Err(terms_exhausted("log_g_real series"))
}

/// Truncation point `ceil(60 / y)` for sums whose terms decay like `e^{-j y}`.
pub fn truncation(y: f64) -> usize {
    (60.0 / y).ceil() as usize
}

/// `r G'(1, r) / G(1, r) = sum_j j^2 r^j / (1 - r^j)` and its derivative
/// in `r`, `sum_j j^3 r^{j-1} / (1 - r^j)^2`.
pub fn saddle_objective(r: f64) -> (f64, f64) {
    let y = -r.ln();
    let mut f = 0.0;
    let mut df = 0.0;
    for j in (1..=truncation(y)).rev() {
        let jf = j as f64;
        let rj = (-jf * y).exp();
        let one_minus = -(-jf * y).exp_m1();
        let q = rj / one_minus;
        f += jf * jf * q;
        df += jf * jf * jf * q / (r * one_minus);
    }
    (f, df)
}

/// The same mean size from the `l`-indexed form
/// `2 sum_l r^{2l} / (1 - r^l)^3 + sum_l r^l / (1 - r^l)^2`.
pub fn mean_size_lseries(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain {
            what: "mean size radius",
            value: r,
        });
    }
    let y = -r.ln();
    let one_minus_r = -(-y).exp_m1();
    let mut sum = 0.0;
    for l in 1..=TERM_BUDGET {
        let ly = l as f64 * y;
        let rl = (-ly).exp();
        let d = -(-ly).exp_m1();
        let term = rl / (d * d) + 2.0 * rl * rl / (d * d * d);
        sum += term;
        // Terms eventually shrink by at least a factor r, so the tail
        // is below term / (1 - r).
        if term < 1e-17 * one_minus_r * sum {
            return Ok(sum);
        }
    }
    Err(terms_exhausted("mean size series"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaddleSource {
    NumericRoot,
    SeriesExpansion,
}

impl SaddleSource {
    pub fn as_str(self) -> &'static str {
        match self {
            SaddleSource::NumericRoot => "numeric_root",
            SaddleSource::SeriesExpansion => "series_expansion",
        }
    }
}

impl fmt::Display for SaddleSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleSolution {
    pub n: usize,
    pub r_n: f64,
    pub y_n: f64,
    /// `6 zeta(3) / (1 - r_n)^4`.
    pub b_rn: f64,
    pub source: SaddleSource,
}

impl SaddleSolution {
    fn from_radius(n: usize, r: f64, source: SaddleSource) -> Self {
        SaddleSolution {
            n,
            r_n: r,
            y_n: -r.ln(),
            b_rn: b_of(r),
            source,
        }
    }
}

/// `b(r) = 6 zeta(3) / (1 - r)^4`.
pub fn b_of(r: f64) -> f64 {
    6.0 * zeta3() / (1.0 - r).powi(4)
}

/// Smallest `n` accepted by [`saddle_series`].
pub const SERIES_MIN_N: usize = 8;

/// Four-term expansion
/// `r_n = 1 - a n^{-1/3} + a^2 / (2 n^{2/3}) - zeta(3) / (3 n)`, `a = [2 zeta(3)]^{1/3}`.
pub fn saddle_series(n: usize) -> Result<SaddleSolution> {
    if n < SERIES_MIN_N {
        return Err(Error::OutOfRange {
            n,
            lo: SERIES_MIN_N,
            hi: usize::MAX,
        });
    }
    let a = saddle_scale();
    let nf = n as f64;
    let t = nf.cbrt().recip();
    let r = 1.0 - a * t + 0.5 * a * a * t * t - zeta3() / (3.0 * nf);
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::OutOfRange {
            n,
            lo: SERIES_MIN_N,
            hi: usize::MAX,
        });
    }
    Ok(SaddleSolution::from_radius(
        n,
        r,
        SaddleSource::SeriesExpansion,
    ))
}

/// Bisection width on `r` before Newton polishing.
const BISECT_WIDTH: f64 = 1e-12;
const NEWTON_STEPS: usize = 3;
/// Required relative residual of the returned root.
pub const SADDLE_RESIDUAL: f64 = 1e-10;

/// Root of `r G'(1, r) / G(1, r) = n` on `(0, 1)`.
pub fn saddle_solve(n: usize) -> Result<SaddleSolution> {
    if n == 0 {
        return Err(Error::OutOfRange {
            n,
            lo: 1,
            hi: usize::MAX,
        });
    }
    let target = n as f64;
    let guess = saddle_scale() * target.cbrt().recip();
    // The objective is increasing in r, i.e. decreasing in y.
    let mut y_small = 0.5 * guess;
    while saddle_objective((-y_small).exp()).0 < target {
        y_small *= 0.5;
    }
    let mut y_big = 2.0 * guess;
    while saddle_objective((-y_big).exp()).0 > target {
        y_big *= 2.0;
        if y_big > 700.0 {
            return Err(Error::RootFinder(format!("no lower bracket for n = {n}")));
        }
    }
    let (mut lo, mut hi) = ((-y_big).exp(), (-y_small).exp());
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if saddle_objective(mid).0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..NEWTON_STEPS {
        let (f, df) = saddle_objective(r);
        let next = r - (f - target) / df;
        if !(next > lo - BISECT_WIDTH && next < hi + BISECT_WIDTH && next < 1.0) {
            break;
        }
        r = next;
    }
    let residual = (saddle_objective(r).0 - target).abs() / target;
    if !(residual <= SADDLE_RESIDUAL) {
        return Err(Error::RootFinder(format!(
            "residual {residual:e} at n = {n}"
        )));
    }
    Ok(SaddleSolution::from_radius(n, r, SaddleSource::NumericRoot))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formula {
    Wright,
    Hayman,
    Meinardus,
}

impl Formula {
    pub fn as_str(self) -> &'static str {
        match self {
            Formula::Wright => "wright",
            Formula::Hayman => "hayman",
            Formula::Meinardus => "meinardus",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Components {
    pub exponential_arg: f64,
    pub power_exponent: f64,
    pub constant_log: f64,
}

/// `log Q(n) ~ exponential_arg + power_exponent log n + constant_log`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticEstimate {
    pub n: usize,
    pub formula: Formula,
    pub log_value: f64,
    pub components: Components,
}

impl AsymptoticEstimate {
    fn new(n: usize, formula: Formula, components: Components) -> Self {
        let log_value = components.exponential_arg
            + components.power_exponent * (n as f64).ln()
            + components.constant_log;
        AsymptoticEstimate {
            n,
            formula,
            log_value,
            components,
        }
    }
}

static GLAISHER_C: OnceLock<f64> = OnceLock::new();

/// `c = int_0^inf y log y / (e^{2 pi y} - 1) dy` at the default tolerance.
pub fn wright_c() -> Result<f64> {
    if let Some(&c) = GLAISHER_C.get() {
        return Ok(c);
    }
    let c = glaisher_c(&Quadrature::default())?;
    Ok(*GLAISHER_C.get_or_init(|| c))
}

pub fn wright_estimate(n: usize) -> Result<AsymptoticEstimate> {
    if n == 0 {
        return Err(Error::OutOfRange {
            n,
            lo: 1,
            hi: usize::MAX,
        });
    }
    let z3 = zeta3();
    let nf = n as f64;
    let components = Components {
        exponential_arg: 3.0 * z3.cbrt() * (0.5 * nf).powf(2.0 / 3.0) + 2.0 * wright_c()?,
        power_exponent: -25.0 / 36.0,
        constant_log: (7.0 / 36.0) * z3.ln()
            - (11.0 / 36.0) * 2f64.ln()
            - 0.5 * 3f64.ln()
            - 0.5 * std::f64::consts::PI.ln(),
    };
    Ok(AsymptoticEstimate::new(n, Formula::Wright, components))
}

/// `G(1, r_n) r_n^{-n} / [2 pi b(r_n)]^{1/2}`. The whole exponent sits in
/// `exponential_arg` and `power_exponent` is 0.
pub fn hayman_estimate(n: usize, s: &SaddleSolution) -> Result<AsymptoticEstimate> {
    if s.n != n {
        return Err(Error::Domain {
            what: "hayman saddle solution size",
            value: s.n as f64,
        });
    }
    let components = Components {
        exponential_arg: log_g_real(s.y_n)? + n as f64 * s.y_n,
        power_exponent: 0.0,
        constant_log: -0.5 * (2.0 * std::f64::consts::PI * s.b_rn).ln(),
    };
    Ok(AsymptoticEstimate::new(n, Formula::Hayman, components))
}

/// Saddle-point evaluation of `Q(n)` with `log G` replaced by the
/// Meinardus expansion at `v = y_n`.
pub fn meinardus_estimate(n: usize, s: &SaddleSolution) -> Result<AsymptoticEstimate> {
    if s.n != n {
        return Err(Error::Domain {
            what: "meinardus saddle solution size",
            value: s.n as f64,
        });
    }
    let log_g = meinardus_log_g(Complex64::new(s.y_n, 0.0))?.re;
    let components = Components {
        exponential_arg: log_g + n as f64 * s.y_n,
        power_exponent: 0.0,
        constant_log: -0.5 * (2.0 * std::f64::consts::PI * s.b_rn).ln(),
    };
    Ok(AsymptoticEstimate::new(n, Formula::Meinardus, components))
}

/// `D(0)` for `D(s) = zeta(s - 1)`.
pub const D_AT_ZERO: f64 = -1.0 / 12.0;
/// Residue exponent `A` for `a_j = j`.
pub const A_RESIDUE: f64 = 1.0;

/// Grid for the extrapolation of `D'(0)`.
pub const D_PRIME_GRID: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeinardusConstant {
    /// Extrapolated constant term of `log G(1, e^{-y})`.
    pub d_prime_zero: f64,
    /// `2 c`, recorded next to it for comparison only.
    pub two_c: f64,
}

static D_PRIME: OnceLock<f64> = OnceLock::new();

fn residual_constant(y: f64) -> Result<f64> {
    Ok(log_g_real(y)? - zeta3() / (y * y) + D_AT_ZERO * y.ln())
}

/// Neville extrapolation of `log G(1, e^{-y}) - zeta(3) y^{-2} - (1/12) log y`
/// to `y = 0` as a polynomial in `y^2` (the remainder has only even powers).
pub fn d_prime_zero() -> Result<f64> {
    if let Some(&v) = D_PRIME.get() {
        return Ok(v);
    }
    let h: Vec<f64> = D_PRIME_GRID.iter().map(|y| y * y).collect();
    let mut p = D_PRIME_GRID
        .iter()
        .map(|&y| residual_constant(y))
        .collect::<Result<Vec<_>>>()?;
    for k in 1..p.len() {
        for i in (k..p.len()).rev() {
            p[i] = (h[i - k] * p[i] - h[i] * p[i - 1]) / (h[i - k] - h[i]);
        }
    }
    Ok(*D_PRIME.get_or_init(|| p[p.len() - 1]))
}

pub fn meinardus_constant() -> Result<MeinardusConstant> {
    Ok(MeinardusConstant {
        d_prime_zero: d_prime_zero()?,
        two_c: 2.0 * wright_c()?,
    })
}

/// `zeta(3) v^{-2} - D(0) log v + D'(0)` for `Re v > 0`, `|arg v| <= pi/4`.
pub fn meinardus_log_g(v: Complex64) -> Result<Complex64> {
    let sector = std::f64::consts::FRAC_PI_4 * (1.0 + 1e-12);
    if !(v.re > 0.0 && v.arg().abs() <= sector && v.im.is_finite()) {
        return Err(Error::Sector { re: v.re, im: v.im });
    }
    let lead = Complex64::new(zeta3() * A_RESIDUE, 0.0) / (v * v);
    Ok(lead - v.ln() * D_AT_ZERO + d_prime_zero()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn product_oracle(u: Complex64, x: Complex64, terms: usize) -> Complex64 {
        let mut xj = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for j in 1..=terms {
            xj *= x;
            s -= (Complex64::new(1.0, 0.0) - u * xj).ln() * j as f64;
        }
        s
    }

    #[test]
    fn log_g_trivial_points() {
        assert_eq!(log_g(c(1.0, 0.0), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(log_g(c(0.0, 0.0), c(0.7, 0.1)).unwrap(), c(0.0, 0.0));
        assert!(log_g(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(log_g(c(1.1, 0.0), c(0.5, 0.0)).is_err());
    }

    #[test]
    fn log_g_matches_product_at_half() {
        let got = log_g(c(1.0, 0.0), c(0.5, 0.0)).unwrap();
        let want = product_oracle(c(1.0, 0.0), c(0.5, 0.0), 200);
        assert!((got - want).norm() < 1e-10);
        assert!(got.im.abs() < 1e-15);
        assert!((log_g_real(2f64.ln()).unwrap() - want.re).abs() < 1e-12);
    }

    #[test]
    fn objective_forms_agree() {
        for r in [0.1, 0.5, 0.9, 0.99, 0.999] {
            let (f, _) = saddle_objective(r);
            let g = mean_size_lseries(r).unwrap();
            assert!((f - g).abs() <= 1e-12 * f, "r={r}: {f} vs {g}");
        }
    }

    #[test]
    fn objective_derivative_matches_difference_quotient() {
        for r in [0.3, 0.95] {
            let h = 1e-6;
            let fd = (saddle_objective(r + h).0 - saddle_objective(r - h).0) / (2.0 * h);
            let (_, df) = saddle_objective(r);
            assert!((fd - df).abs() < 1e-6 * df);
        }
    }

    #[test]
    fn saddle_root_residual_and_fields() {
        for n in [1, 2, 50, 1000, 123_456] {
            let s = saddle_solve(n).unwrap();
            let res = (mean_size_lseries(s.r_n).unwrap() - n as f64).abs() / n as f64;
            assert!(res <= 1e-10, "n={n} residual {res}");
            assert!(s.r_n > 0.0 && s.r_n < 1.0);
            assert!((s.y_n + s.r_n.ln()).abs() <= 1e-14);
            assert!((s.b_rn - 6.0 * zeta3() / (1.0 - s.r_n).powi(4)).abs() <= 1e-9 * s.b_rn);
            assert_eq!(s.source, SaddleSource::NumericRoot);
        }
    }

    #[test]
    fn saddle_root_increases_with_n() {
        let mut prev = 0.0;
        for n in 1..60 {
            let r = saddle_solve(n).unwrap().r_n;
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn series_rejects_small_n() {
        assert!(saddle_series(7).is_err());
        let s = saddle_series(8).unwrap();
        assert!(s.r_n > 0.0 && s.r_n < 1.0);
        assert_eq!(s.source, SaddleSource::SeriesExpansion);
    }

    #[test]
    fn series_leading_behaviour() {
        let a = saddle_scale();
        let n = 1e9 as usize;
        let s = saddle_series(n).unwrap();
        let nf = n as f64;
        assert!(((1.0 - s.r_n) * nf.cbrt() / a - 1.0).abs() < 1e-3);
        assert!((s.y_n * nf.cbrt() / a - 1.0).abs() < 1e-3);
        assert!((s.b_rn * a / (3.0 * nf.powf(4.0 / 3.0)) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn estimates_are_internally_consistent() {
        let n = 300;
        let s = saddle_solve(n).unwrap();
        for e in [
            wright_estimate(n).unwrap(),
            hayman_estimate(n, &s).unwrap(),
            meinardus_estimate(n, &s).unwrap(),
        ] {
            let c = e.components;
            let sum = c.exponential_arg + c.power_exponent * (n as f64).ln() + c.constant_log;
            assert!((e.log_value - sum).abs() <= 1e-12 * e.log_value.abs().max(1.0));
        }
        let w = wright_estimate(n).unwrap();
        assert_eq!(w.components.power_exponent, -25.0 / 36.0);
        let expected = (7.0 / 36.0) * zeta3().ln()
            - (11.0 / 36.0) * 2f64.ln()
            - 0.5 * (3.0 * std::f64::consts::PI).ln();
        assert!((w.components.constant_log - expected).abs() < 1e-15);
        assert!(hayman_estimate(n + 1, &s).is_err());
    }

    #[test]
    fn d_prime_zero_recorded_against_two_c() {
        let m = meinardus_constant().unwrap();
        // The two routes are independent; their agreement is a diagnostic.
        assert!((m.d_prime_zero - m.two_c).abs() < 1e-8, "{m:?}");
    }

    #[test]
    fn meinardus_remainder_shrinks() {
        let mut prev = f64::INFINITY;
        for y in [0.2, 0.1, 0.05, 0.02] {
            let d = (log_g_real(y).unwrap() - meinardus_log_g(c(y, 0.0)).unwrap().re).abs();
            assert!(d < prev, "y={y}: {d}");
            prev = d;
        }
        let y = 0.01;
        let ratio = log_g_real(y).unwrap() / (zeta3() / (y * y));
        assert!((ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn meinardus_sector_enforced() {
        assert!(meinardus_log_g(c(1.0, 1.0)).is_ok());
        assert!(meinardus_log_g(c(1.0, 1.01)).is_err());
        assert!(meinardus_log_g(c(-1.0, 0.0)).is_err());
        let v = meinardus_log_g(c(0.5, 0.0)).unwrap();
        assert_eq!(v.im, 0.0);
    }
}
