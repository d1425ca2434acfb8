//! Scalar special functions: real zeta values, the Debye-type integrals
//! `psi_{m,k}(z, T)` and the constant `c` appearing in Wright's formula.
//!
//! Everything here is plain `f64`. Infinite integrals are truncated at a
//! cutoff past which the integrand is below `1e-20` and then handled by
//! adaptive Simpson on a fixed number of initial panels.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Rule for truncating `[z, inf)`: integrate up to `z + base + per_power * m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpperCutoff {
    pub base: f64,
    pub per_power: f64,
}

impl Default for UpperCutoff {
    fn default() -> Self {
        UpperCutoff {
            base: 50.0,
            per_power: 10.0,
        }
    }
}

impl UpperCutoff {
    pub fn limit(&self, z: f64, power: u32) -> f64 {
        z + self.base + self.per_power * f64::from(power)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub upper_cutoff: UpperCutoff,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-12,
            max_subdivisions: 1 << 20,
            upper_cutoff: UpperCutoff::default(),
        }
    }
}

/// Initial uniform panels; keeps Simpson from accepting a coarse estimate
/// on integrands that vanish at both ends and the midpoint.
const INITIAL_PANELS: usize = 32;

impl Quadrature {
    pub fn new(abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let q = Quadrature {
            abs_tol,
            max_subdivisions,
            upper_cutoff: UpperCutoff::default(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_tolerance(abs_tol: f64) -> Result<Self> {
        Self::new(abs_tol, Quadrature::default().max_subdivisions)
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Domain {
                what: "quadrature tolerance",
                value: self.abs_tol,
            });
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain {
                what: "quadrature subdivision budget",
                value: 0.0,
            });
        }
        Ok(())
    }

    /// Adaptive Simpson for a complex-valued integrand on `[a, b]`.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        self.validate()?;
        struct Segment {
            a: f64,
            b: f64,
            fa: Complex64,
            fm: Complex64,
            fb: Complex64,
            whole: Complex64,
            eps: f64,
        }
        let simpson = |a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64| {
            (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
        };

        let width = (b - a) / INITIAL_PANELS as f64;
        let mut stack = Vec::with_capacity(64);
        for i in (0..INITIAL_PANELS).rev() {
            let pa = a + width * i as f64;
            let pb = if i + 1 == INITIAL_PANELS {
                b
            } else {
                a + width * (i + 1) as f64
            };
            let (fa, fm, fb) = (f(pa), f(0.5 * (pa + pb)), f(pb));
            stack.push(Segment {
                a: pa,
                b: pb,
                fa,
                fm,
                fb,
                whole: simpson(pa, pb, fa, fm, fb),
                eps: self.abs_tol / INITIAL_PANELS as f64,
            });
        }

        let mut total = Complex64::new(0.0, 0.0);
        let mut splits = 0usize;
        while let Some(s) = stack.pop() {
            let m = 0.5 * (s.a + s.b);
            let flm = f(0.5 * (s.a + m));
            let frm = f(0.5 * (m + s.b));
            let left = simpson(s.a, m, s.fa, flm, s.fm);
            let right = simpson(m, s.b, s.fm, frm, s.fb);
            let delta = left + right - s.whole;
            let tiny = (s.b - s.a) <= 1e-13 * (1.0 + s.a.abs());
            if delta.norm() <= 15.0 * s.eps || tiny {
                total += left + right + delta / 15.0;
                continue;
            }
            splits += 1;
            if splits > self.max_subdivisions {
                return Err(Error::QuadratureBudget {
                    budget: self.max_subdivisions,
                });
            }
            stack.push(Segment {
                a: m,
                b: s.b,
                fa: s.fm,
                fm: frm,
                fb: s.fb,
                whole: right,
                eps: 0.5 * s.eps,
            });
            stack.push(Segment {
                a: s.a,
                b: m,
                fa: s.fa,
                fm: flm,
                fb: s.fm,
                whole: left,
                eps: 0.5 * s.eps,
            });
        }
        if !(total.re.is_finite() && total.im.is_finite()) {
            return Err(Error::NonConvergent {
                what: "quadrature",
                budget: splits,
            });
        }
        Ok(total)
    }

    pub fn integrate_real<F>(&self, f: F, a: f64, b: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate(|x| Complex64::new(f(x), 0.0), a, b)
            .map(|c| c.re)
    }
}

// B_2, B_4, ..., B_20
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Head length of the Euler-Maclaurin sum.
const ZETA_HEAD: u32 = 16;

fn zeta_euler_maclaurin(s: f64) -> f64 {
    let n = f64::from(ZETA_HEAD);
    // Smallest terms first.
    let head: f64 = (1..ZETA_HEAD).rev().map(|j| f64::from(j).powf(-s)).sum();
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising = s (s+1) ... (s+2k-2), fact = (2k)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n.powf(-s - 1.0);
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        if k > 0 {
            let kk = (2 * k) as f64;
            rising *= (s + kk - 1.0) * (s + kk);
            fact *= (kk + 1.0) * (kk + 2.0);
            npow /= n * n;
        }
        let term = b / fact * rising * npow;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
    }
    head + tail
}

static ZETA_CACHE: [OnceLock<f64>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];

/// Riemann zeta for real `s > 1`. Values at 2, 3 and 4 are cached.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::Domain {
            what: "zeta",
            value: s,
        });
    }
    for (slot, at) in ZETA_CACHE.iter().zip([2.0, 3.0, 4.0]) {
        if s == at {
            return Ok(*slot.get_or_init(|| zeta_euler_maclaurin(at)));
        }
    }
    Ok(zeta_euler_maclaurin(s))
}

pub(crate) fn zeta2() -> f64 {
    *ZETA_CACHE[0].get_or_init(|| zeta_euler_maclaurin(2.0))
}

pub(crate) fn zeta3() -> f64 {
    *ZETA_CACHE[1].get_or_init(|| zeta_euler_maclaurin(3.0))
}

/// `e^w - 1` without cancellation for small `|w|`.
pub(crate) fn cexpm1(w: Complex64) -> Complex64 {
    let half = (0.5 * w.im).sin();
    Complex64::new(
        w.re.exp_m1() * w.im.cos() - 2.0 * half * half,
        w.re.exp() * w.im.sin(),
    )
}

/// The pairs `(m, k)` for which `psi` is defined.
pub const PSI_PAIRS: [(u32, u32); 4] = [(1, 0), (2, 1), (3, 1), (3, 2)];

/// `y^m / (e^{y - iT} - 1)^{m-k}`, with the removable singularity at
/// `y = 0, T = 0` replaced by its limit.
pub fn psi_integrand(m: u32, k: u32, y: f64, t: f64) -> Complex64 {
    let p = (m - k) as i32;
    if y == 0.0 && t == 0.0 {
        // y^m / y^{m-k} -> y^k
        return Complex64::new(if k == 0 { 1.0 } else { 0.0 }, 0.0);
    }
    let denom = cexpm1(Complex64::new(y, -t)).powi(p);
    Complex64::new(y.powi(m as i32), 0.0) / denom
}

/// `psi_{m,k}(z, T) = int_z^inf y^m / (e^{y-iT} - 1)^{m-k} dy`.
pub fn psi(m: u32, k: u32, z: f64, t: f64) -> Result<Complex64> {
    psi_with(m, k, z, t, &Quadrature::default())
}

pub fn psi_with(m: u32, k: u32, z: f64, t: f64, quad: &Quadrature) -> Result<Complex64> {
    if !PSI_PAIRS.contains(&(m, k)) {
        return Err(Error::UnsupportedPair { m, k });
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::Domain {
            what: "psi lower limit",
            value: z,
        });
    }
    if !t.is_finite() {
        return Err(Error::Domain {
            what: "psi phase",
            value: t,
        });
    }
    let upper = quad.upper_cutoff.limit(z, m);
    quad.integrate(|y| psi_integrand(m, k, y, t), z, upper)
}

/// `y log y / (e^{2 pi y} - 1)`. Behaves like `log(y) / (2 pi)` as
/// `y -> 0+`, so it is integrable but unbounded at the origin.
pub fn glaisher_integrand(y: f64) -> f64 {
    y * y.ln() / (2.0 * PI * y).exp_m1()
}

/// `c = int_0^inf y log y / (e^{2 pi y} - 1) dy`.
///
/// `[0, 1]` is mapped by `y = e^{-t}`, which turns the logarithmic
/// singularity into the exponentially decaying `-t e^{-2t} / (e^{2 pi e^{-t}} - 1)`.
pub fn glaisher_c(quad: &Quadrature) -> Result<f64> {
    let half = Quadrature {
        abs_tol: 0.5 * quad.abs_tol,
        ..*quad
    };
    let near = half.integrate_real(
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            -t * (-2.0 * t).exp() / (2.0 * PI * (-t).exp()).exp_m1()
        },
        0.0,
        quad.upper_cutoff.limit(0.0, 1),
    )?;
    let far = half.integrate_real(glaisher_integrand, 1.0, quad.upper_cutoff.limit(1.0, 1))?;
    Ok(near + far)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_closed_forms() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(6.0).unwrap() - PI.powi(6) / 945.0).abs() < 1e-15);
    }

    #[test]
    fn zeta_rejects_pole_and_left_half() {
        assert!(matches!(zeta(1.0), Err(Error::Domain { .. })));
        assert!(zeta(0.5).is_err());
        assert!(zeta(f64::NAN).is_err());
    }

    #[test]
    fn zeta_near_pole_behaves_like_laurent() {
        // zeta(s) = 1/(s-1) + gamma + O(s-1)
        let s = 1.0 + 1e-6;
        let gamma = 0.577_215_664_901_532_9;
        assert!((zeta(s).unwrap() - 1.0 / (s - 1.0) - gamma).abs() < 1e-6);
    }

    #[test]
    fn zeta_cache_is_stable() {
        let a = zeta(3.0).unwrap();
        let b = zeta(3.0).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(zeta3().to_bits(), a.to_bits());
    }

    #[test]
    fn integrand_limits() {
        assert_eq!(psi_integrand(1, 0, 0.0, 0.0), Complex64::new(1.0, 0.0));
        assert_eq!(psi_integrand(2, 1, 0.0, 0.0), Complex64::new(0.0, 0.0));
        // y / (e^y - 1) at tiny y stays near 1
        assert!((psi_integrand(1, 0, 1e-12, 0.0).re - 1.0).abs() < 1e-11);
        assert_eq!(glaisher_integrand(1.0), 0.0);
    }

    #[test]
    fn glaisher_integrand_is_log_singular() {
        for y in [1e-4, 1e-6, 1e-8] {
            let ratio = glaisher_integrand(y) / y.ln();
            assert!((ratio - 1.0 / (2.0 * PI)).abs() < 1e-3, "{ratio}");
        }
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        assert!(matches!(
            psi(2, 0, 0.0, 0.0),
            Err(Error::UnsupportedPair { m: 2, k: 0 })
        ));
        assert!(psi(1, 0, -1.0, 0.0).is_err());
    }

    #[test]
    fn quadrature_rejects_bad_config() {
        assert!(Quadrature::new(0.0, 10).is_err());
        assert!(Quadrature::new(1e-8, 0).is_err());
    }

    #[test]
    fn quadrature_budget_is_enforced() {
        let q = Quadrature::new(1e-14, 4).unwrap();
        let r = q.integrate_real(|x| (50.0 * x).sin(), 0.0, 10.0);
        assert!(matches!(r, Err(Error::QuadratureBudget { budget: 4 })));
    }

    #[test]
    fn quadrature_polynomial_exact() {
        let q = Quadrature::default();
        let v = q.integrate_real(|x| x * x * x - 2.0 * x, 0.0, 3.0).unwrap();
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }
}
