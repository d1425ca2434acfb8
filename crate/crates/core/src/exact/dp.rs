//! Coefficient extraction from `prod_j (1 - u x^j)^{-j}`.
//!
//! Factor `j` is folded in as the negative-binomial series
//! `sum_k C(j+k-1, k) u^k x^{jk}`, i.e. the closed form of `j` successive
//! `(1 - u x^j)^{-1}` prefix passes. Rows are updated in place from the top
//! down so every source row still holds the previous partial product.
//!
//! Small factors (`3 j^2 < n_max`) use the `j` prefix passes directly:
//! they stream through memory and cost `j n_max^2 / 2` against roughly
//! `n_max^3 / (6 j)` for the convolution.
//!
//! Row `n` of the working buffer stores `m = 0..=n` contiguously at offset
//! `n (n + 1) / 2`.

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub(crate) fn row_offset(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Rows `j..=n_max` grouped by residue mod `j`, each group descending.
/// Factor `j` only couples rows within one residue class, so a group's
/// rows stay cache-resident while it is processed.
fn class_order(j: usize, n_max: usize) -> impl Iterator<Item = usize> {
    (0..j).flat_map(move |r| {
        let top = n_max - (n_max + j - r) % j;
        (0..=top / j)
            .map(move |i| top - i * j)
            .filter(move |&n| n >= j)
    })
}

fn use_prefix_passes(j: usize, n_max: usize) -> bool {
    3 * j * j < n_max
}

/// `C(j+k-1, k)` for `k = 0..=k_max`.
pub(crate) fn negbin_coefficients(j: usize, k_max: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(k_max + 1);
    let mut c = BigUint::one();
    out.push(c.clone());
    for k in 1..=k_max {
        c = c * BigUint::from(j + k - 1) / BigUint::from(k);
        out.push(c.clone());
    }
    out
}

/// Univariate coefficients of `prod_{j<=n_max} (1 - x^j)^{-j}`.
pub(crate) fn univariate(n_max: usize) -> Vec<BigUint> {
    let mut q = vec![BigUint::zero(); n_max + 1];
    q[0] = BigUint::one();
    for j in 1..=n_max {
        let coefs = negbin_coefficients(j, n_max / j);
        for n in (j..=n_max).rev() {
            let mut acc = BigUint::zero();
            for (k, c) in coefs.iter().enumerate().take(n / j + 1).skip(1) {
                let src = &q[n - j * k];
                if !src.is_zero() {
                    acc += src * c;
                }
            }
            q[n] += acc;
        }
    }
    q
}

/// `dst += src * coef`, truncated to `dst.len()` limbs. The caller
/// guarantees the true result fits.
#[inline]
fn mul_add(dst: &mut [u64], src: &[u64], coef: &[u64]) {
    let width = dst.len();
    for (shift, &c) in coef.iter().enumerate().take(width) {
        if c == 0 {
            continue;
        }
        let c = u128::from(c);
        let mut carry = 0u128;
        for i in 0..width - shift {
            let s = if i < src.len() { src[i] } else { 0 };
            let v = u128::from(dst[i + shift]) + u128::from(s) * c + carry;
            dst[i + shift] = v as u64;
            carry = v >> 64;
        }
        debug_assert_eq!(carry, 0, "limb overflow");
    }
}

/// `dst[m] += src[m]` over whole limb vectors of width `l`.
#[inline]
fn add_shifted(dst: &mut [u64], src: &[u64], l: usize) {
    for (d, s) in dst.chunks_exact_mut(l).zip(src.chunks_exact(l)) {
        let mut carry = false;
        for (a, &b) in d.iter_mut().zip(s) {
            let (v1, c1) = a.overflowing_add(b);
            let (v2, c2) = v1.overflowing_add(u64::from(carry));
            *a = v2;
            carry = c1 || c2;
        }
        debug_assert!(!carry, "limb overflow");
    }
}

/// Exact bivariate table in fixed-width limbs. `limbs` must be large
/// enough for the largest row sum, which bounds every partial product.
pub(crate) fn bivariate_limbs(n_max: usize, limbs: usize) -> Vec<u64> {
    let l = limbs;
    let mut data = vec![0u64; row_offset(n_max + 1) * l];
    data[0] = 1;
    for j in 1..=n_max {
        if use_prefix_passes(j, n_max) {
            for _ in 0..j {
                for n in j..=n_max {
                    let (head, tail) = data.split_at_mut(row_offset(n) * l);
                    let src_n = n - j;
                    let src = &head[row_offset(src_n) * l..(row_offset(src_n) + src_n + 1) * l];
                    let dst = &mut tail[l..(src_n + 2) * l];
                    add_shifted(dst, src, l);
                }
            }
            continue;
        }
        let coefs: Vec<Vec<u64>> = negbin_coefficients(j, n_max / j)
            .iter()
            .map(|c| c.to_u64_digits())
            .collect();
        for n in class_order(j, n_max) {
            let (head, tail) = data.split_at_mut(row_offset(n) * l);
            let dst = &mut tail[..(n + 1) * l];
            for (k, coef) in coefs.iter().enumerate().take(n / j + 1).skip(1) {
                let src_n = n - j * k;
                let src = &head[row_offset(src_n) * l..(row_offset(src_n) + src_n + 1) * l];
                let first = if src_n == 0 { 0 } else { 1 };
                for m0 in first..=src_n {
                    let s = &src[m0 * l..(m0 + 1) * l];
                    if s.iter().all(|&w| w == 0) {
                        continue;
                    }
                    let d = &mut dst[(m0 + k) * l..(m0 + k + 1) * l];
                    mul_add(d, s, coef);
                }
            }
        }
    }
    data
}

pub(crate) fn limbs_to_biguint(limbs: &[u64]) -> BigUint {
    let digits: Vec<u32> = limbs
        .iter()
        .flat_map(|&w| [w as u32, (w >> 32) as u32])
        .collect();
    BigUint::new(digits)
}

/// Scaled real-valued bivariate table: entry `(n, m)` holds
/// `Q(m, n) e^{-scale n}`. All terms are positive, so accumulation in
/// linear scale loses no accuracy to cancellation.
pub(crate) fn bivariate_scaled(n_max: usize, scale: f64) -> Vec<f64> {
    let mut data = vec![0f64; row_offset(n_max + 1)];
    data[0] = 1.0;
    for j in 1..=n_max {
        if use_prefix_passes(j, n_max) {
            let c = (-scale * j as f64).exp();
            for _ in 0..j {
                for n in j..=n_max {
                    let (head, tail) = data.split_at_mut(row_offset(n));
                    let src_n = n - j;
                    let src = &head[row_offset(src_n)..row_offset(src_n) + src_n + 1];
                    for (a, &b) in tail[1..src_n + 2].iter_mut().zip(src) {
                        *a += c * b;
                    }
                }
            }
            continue;
        }
        let k_max = n_max / j;
        // ln C(j+k-1, k) - scale j k
        let mut coefs = Vec::with_capacity(k_max + 1);
        let mut ln_c = 0.0f64;
        coefs.push(1.0);
        for k in 1..=k_max {
            ln_c += ((j + k - 1) as f64).ln() - (k as f64).ln();
            coefs.push((ln_c - scale * (j * k) as f64).exp());
        }
        for n in class_order(j, n_max) {
            let (head, tail) = data.split_at_mut(row_offset(n));
            let dst = &mut tail[..n + 1];
            for (k, &c) in coefs.iter().enumerate().take(n / j + 1).skip(1) {
                let src_n = n - j * k;
                let src = &head[row_offset(src_n)..row_offset(src_n) + src_n + 1];
                let first = if src_n == 0 { 0 } else { 1 };
                let d = &mut dst[first + k..src_n + k + 1];
                for (a, &b) in d.iter_mut().zip(&src[first..]) {
                    *a += c * b;
                }
            }
        }
    }
    data
}

/// Smallest limb count holding `bound`.
pub(crate) fn limbs_for(bound: &BigUint) -> usize {
    let bits = bound.bits().max(1) as usize;
    bits.div_ceil(64)
}
