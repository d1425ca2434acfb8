use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_complex::Complex64;
use planepart::asympt::{
    hayman_estimate, log_g, meinardus_estimate, saddle_solve, wright_estimate,
};
use planepart::clt::{ks_distance, normalize, normalized_cf};
use planepart::exact::{
    build_log_table, build_trace_table, decode_cache, encode_cache, read_trace_csv, trace_cf,
    trace_pmf, write_trace_csv, CachedTable, LogTraceTable, PmfMode, TraceTable,
};
use planepart::special::psi;
use proptest::prelude::*;

const N: usize = 80;

fn table() -> &'static TraceTable {
    static T: OnceLock<TraceTable> = OnceLock::new();
    T.get_or_init(|| build_trace_table(N))
}

fn log_table() -> &'static LogTraceTable {
    static T: OnceLock<LogTraceTable> = OnceLock::new();
    T.get_or_init(|| build_log_table(N).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rows_sum_to_q_and_boundaries_hold(n in 1..=N) {
        let t = table();
        let row = t.row(n).unwrap();
        let total: BigUint = row.iter().sum();
        prop_assert_eq!(&total, t.q(n).unwrap());
        prop_assert_eq!(&row[0], &BigUint::from(n));
        prop_assert_eq!(&row[n - 1], &BigUint::from(1u32));
        prop_assert_eq!(t.count(n + 1, n), BigUint::default());
        prop_assert_eq!(t.count(0, n), BigUint::default());
    }

    #[test]
    fn pmf_is_normalized(n in 1..=N) {
        let p = trace_pmf(table(), n, PmfMode::Real).unwrap().real_probs();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        prop_assert!(p.iter().all(|&v| v > 0.0));
        let lp = log_table().pmf(n).unwrap().real_probs();
        for (a, b) in p.iter().zip(&lp) {
            prop_assert!(((a - b) / a).abs() < 1e-12);
        }
    }

    #[test]
    fn cf_is_hermitian_and_bounded(n in 1..=N, t in -10.0f64..10.0) {
        let pmf = trace_pmf(table(), n, PmfMode::Real).unwrap();
        let a = trace_cf(&pmf, t);
        let b = trace_cf(&pmf, -t);
        prop_assert!((a - b.conj()).norm() < 1e-14);
        prop_assert!(a.norm() <= 1.0 + 1e-14);
        prop_assert!((trace_cf(&pmf, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        if n >= 2 {
            let w = normalized_cf(&pmf, t / 3.0).unwrap();
            prop_assert!(w.norm() <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn ks_is_a_probability_distance(n in 2..=N) {
        let pmf = trace_pmf(table(), n, PmfMode::Rational).unwrap();
        let grid = normalize(&pmf).unwrap();
        let d = ks_distance(&grid);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(grid.cdf_exact.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn log_g_matches_product(
        u_mod in 0.0f64..1.0, u_arg in -PI..PI,
        x_mod in 0.0f64..0.9, x_arg in -PI..PI,
    ) {
        let u = Complex64::from_polar(u_mod, u_arg);
        let x = Complex64::from_polar(x_mod, x_arg);
        let mut direct = Complex64::new(0.0, 0.0);
        let mut xj = Complex64::new(1.0, 0.0);
        for j in 1..=1500 {
            xj *= x;
            direct -= (j as f64) * (Complex64::new(1.0, 0.0) - u * xj).ln();
        }
        let v = log_g(u, x).unwrap();
        prop_assert!((v - direct).norm() < 1e-11 * (1.0 + direct.norm()), "{} vs {}", v, direct);
        // conjugation symmetry
        let vc = log_g(u.conj(), x.conj()).unwrap();
        prop_assert!((vc - v.conj()).norm() < 1e-11 * (1.0 + v.norm()));
    }

    #[test]
    fn psi_is_conjugate_symmetric_and_decreasing_in_z(
        pair in 0usize..4, z in 0.0f64..3.0, t in -1.0f64..1.0,
    ) {
        let (m, k) = planepart::special::PSI_PAIRS[pair];
        let a = psi(m, k, z, t).unwrap();
        let b = psi(m, k, z, -t).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-9);
        let at_z = psi(m, k, z, 0.0).unwrap().re;
        let further = psi(m, k, z + 0.5, 0.0).unwrap().re;
        prop_assert!(further < at_z);
    }

    #[test]
    fn estimates_are_sums_of_components(n in 8usize..2_000_000) {
        let s = saddle_solve(n).unwrap();
        for e in [
            wright_estimate(n).unwrap(),
            hayman_estimate(n, &s).unwrap(),
            meinardus_estimate(n, &s).unwrap(),
        ] {
            let c = e.components;
            let sum = c.exponential_arg + c.power_exponent * (n as f64).ln() + c.constant_log;
            prop_assert!((e.log_value - sum).abs() <= 1e-12 * e.log_value.abs());
        }
        prop_assert!(s.r_n > 0.0 && s.r_n < 1.0);
    }

    #[test]
    fn saddle_is_monotone(n in 1usize..1_000_000) {
        let a = saddle_solve(n).unwrap();
        let b = saddle_solve(n + 1).unwrap();
        prop_assert!(a.r_n < b.r_n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cache_round_trips(n in 1usize..=30) {
        let exact = CachedTable::Exact(build_trace_table(n));
        prop_assert_eq!(&decode_cache(&encode_cache(&exact)).unwrap(), &exact);
        let log = CachedTable::LogSpace(build_log_table(n).unwrap());
        prop_assert_eq!(&decode_cache(&encode_cache(&log)).unwrap(), &log);

        let CachedTable::Exact(t) = exact else { unreachable!() };
        let mut csv = Vec::new();
        write_trace_csv(&t, &mut csv).unwrap();
        prop_assert_eq!(read_trace_csv(std::str::from_utf8(&csv).unwrap()).unwrap(), t);
    }

    #[test]
    fn decoder_rejects_any_single_bit_flip(pos in any::<prop::sample::Index>(), bit in 0u8..8) {
        let bytes = encode_cache(&CachedTable::Exact(build_trace_table(10)));
        let mut bad = bytes.clone();
        let i = pos.index(bad.len());
        bad[i] ^= 1 << bit;
        prop_assert!(decode_cache(&bad).is_err());
    }
}
