//! Command dispatch. Primary output goes to `out`, progress to `err`.

use std::io::Write;
use std::path::Path;

use planepart::asympt::{
    default_lemma2_t, hayman_estimate, meinardus_constant, meinardus_estimate, saddle_objective,
    saddle_series, saddle_solve, verify_lemma1, verify_lemma2, wright_estimate, AsymptoticEstimate,
    CheckRecord, SaddleSolution, LEMMA1_GRID, LEMMA2_SAMPLES, SERIES_MIN_N,
};
use planepart::clt::{
    clt_report, default_w_grid, strictly_decreasing, summarize, CltReport, REPORT_FIELDS,
};
use planepart::exact::{
    count_q, ln_count, trace_pmf, CachedTable, PmfMode, PmfProbs, TableMode, EXACT_LIMIT,
};
use planepart::sampler::{
    boltzmann_batch, exact_size_batch, write_batch_csv, BoltzmannSampler, SampleRecord,
    SamplerConfig,
};
use rayon::prelude::*;

use crate::args::{Cli, Command, Format, Lemma, ModeArg, SampleMethod};
use crate::cache::{check_range, default_cache_dir, load_or_build};
use crate::error::CliError;
use crate::output::{real, Json, CSV_MAGIC};

impl From<ModeArg> for TableMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => TableMode::Exact,
            ModeArg::Logspace => TableMode::LogSpace,
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let cache_dir = cli.cache_dir.clone().unwrap_or_else(default_cache_dir);
    let fmt = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Count(s) => count(s.n, fmt(Format::Text), out),
        Command::TracePmf { size, mode, real } => trace_pmf_cmd(
            &cache_dir,
            size.n,
            (*mode).into(),
            *real,
            fmt(Format::Csv),
            out,
            err,
        ),
        Command::Saddle(s) => saddle(s.n, fmt(Format::Json), out),
        Command::Asympt(s) => asympt(s.n, fmt(Format::Csv), out),
        Command::Clt { sizes, mode } => clt(
            &cache_dir,
            &sizes.n_list.0,
            (*mode).into(),
            fmt(Format::Csv),
            out,
            err,
        ),
        Command::LemmaCheck {
            which,
            sizes,
            points,
            t,
        } => lemma_check(*which, &sizes.n_list.0, *points, *t, fmt(Format::Csv), out),
        Command::Sample {
            size,
            samples,
            seed,
            method,
            max_attempts,
        } => sample(
            size.n,
            *samples,
            *seed,
            *method,
            *max_attempts,
            fmt(Format::Csv),
            out,
        ),
    }
}

fn count(n: usize, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    if n > EXACT_LIMIT {
        return Err(CliError::Range(format!(
            "n = {n} outside 0..={EXACT_LIMIT}"
        )));
    }
    let q = count_q(n);
    match format {
        Format::Text => {
            for (i, v) in q.iter().enumerate() {
                writeln!(out, "{i} {v}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "{CSV_MAGIC}")?;
            writeln!(out, "n,q")?;
            for (i, v) in q.iter().enumerate() {
                writeln!(out, "{i},{v}")?;
            }
        }
        Format::Json => {
            let counts = q.iter().map(|v| Json::str(v.to_string())).collect();
            let doc = Json::document(
                "count",
                vec![
                    ("n".into(), Json::uint(n)),
                    ("counts".into(), Json::Array(counts)),
                ],
            );
            writeln!(out, "{doc}")?;
        }
    }
    Ok(())
}

fn trace_pmf_cmd(
    cache_dir: &Path,
    n: usize,
    mode: TableMode,
    force_real: bool,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    check_range(mode, n)?;
    let pmf = match load_or_build(cache_dir, mode, n, err)? {
        CachedTable::Exact(t) => {
            let m = if force_real {
                PmfMode::Real
            } else {
                PmfMode::Rational
            };
            trace_pmf(&t, n, m)?
        }
        CachedTable::LogSpace(t) => t.pmf(n)?,
    };
    match (pmf.probs(), format) {
        (PmfProbs::Rational(fr), Format::Json) => {
            let rows = fr
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let f = f.reduced();
                    Json::object([
                        ("m", Json::uint(i + 1)),
                        ("prob_num", Json::str(f.num.to_string())),
                        ("prob_den", Json::str(f.den.to_string())),
                    ])
                })
                .collect();
            let doc = Json::document("trace-pmf", pmf_header(n, mode, rows));
            writeln!(out, "{doc}")?;
        }
        (PmfProbs::Rational(fr), _) => {
            writeln!(out, "{CSV_MAGIC}")?;
            writeln!(out, "m,prob_num,prob_den")?;
            for (i, f) in fr.iter().enumerate() {
                let f = f.reduced();
                writeln!(out, "{},{},{}", i + 1, f.num, f.den)?;
            }
        }
        (PmfProbs::Real(p), Format::Json) => {
            let rows = p
                .iter()
                .enumerate()
                .map(|(i, &v)| Json::object([("m", Json::uint(i + 1)), ("prob", Json::Real(v))]))
                .collect();
            let doc = Json::document("trace-pmf", pmf_header(n, mode, rows));
            writeln!(out, "{doc}")?;
        }
        (PmfProbs::Real(p), _) => {
            writeln!(out, "{CSV_MAGIC}")?;
            writeln!(out, "m,prob")?;
            for (i, &v) in p.iter().enumerate() {
                writeln!(out, "{},{}", i + 1, real(v))?;
            }
        }
    }
    Ok(())
}

fn pmf_header(n: usize, mode: TableMode, rows: Vec<Json>) -> Vec<(String, Json)> {
    vec![
        ("n".into(), Json::uint(n)),
        ("mode".into(), Json::str(mode.as_str())),
        ("pmf".into(), Json::Array(rows)),
    ]
}

fn saddle_json(s: &SaddleSolution) -> Json {
    let residual = (saddle_objective(s.r_n).0 - s.n as f64) / s.n as f64;
    Json::object([
        ("source", Json::str(s.source.as_str())),
        ("n", Json::uint(s.n)),
        ("r_n", Json::Real(s.r_n)),
        ("y_n", Json::Real(s.y_n)),
        ("b_rn", Json::Real(s.b_rn)),
        ("relative_residual", Json::Real(residual)),
    ])
}

fn saddle(n: usize, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let mut sols = vec![saddle_solve(n)?];
    if n >= SERIES_MIN_N {
        sols.push(saddle_series(n)?);
    }
    match format {
        Format::Json => {
            let doc = Json::document(
                "saddle",
                vec![
                    ("n".into(), Json::uint(n)),
                    (
                        "solutions".into(),
                        Json::Array(sols.iter().map(saddle_json).collect()),
                    ),
                ],
            );
            writeln!(out, "{doc}")?;
        }
        _ => {
            writeln!(out, "{CSV_MAGIC}")?;
            writeln!(out, "source,n,r_n,y_n,b_rn")?;
            for s in &sols {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    s.source,
                    s.n,
                    real(s.r_n),
                    real(s.y_n),
                    real(s.b_rn)
                )?;
            }
        }
    }
    Ok(())
}

fn asympt(n: usize, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Range("n must be positive".into()));
    }
    let s = saddle_solve(n)?;
    let estimates: Vec<AsymptoticEstimate> = vec![
        wright_estimate(n)?,
        hayman_estimate(n, &s)?,
        meinardus_estimate(n, &s)?,
    ];
    let exact = (n <= EXACT_LIMIT)
        .then(|| count_q(n).pop().map(|q| ln_count(&q)))
        .flatten();
    let ratio = |e: &AsymptoticEstimate| exact.map(|lq| (lq - e.log_value).exp());
    let mc = meinardus_constant()?;
    match format {
        Format::Json => {
            let rows = estimates
                .iter()
                .map(|e| {
                    Json::object([
                        ("formula", Json::str(e.formula.as_str())),
                        ("log_value", Json::Real(e.log_value)),
                        ("exponential_arg", Json::Real(e.components.exponential_arg)),
                        ("power_exponent", Json::Real(e.components.power_exponent)),
                        ("constant_log", Json::Real(e.components.constant_log)),
                        ("exact_over_estimate", Json::opt_real(ratio(e))),
                    ])
                })
                .collect();
            let doc = Json::document(
                "asympt",
                vec![
                    ("n".into(), Json::uint(n)),
                    ("log_q_exact".into(), Json::opt_real(exact)),
                    ("d_prime_zero".into(), Json::Real(mc.d_prime_zero)),
                    ("two_c".into(), Json::Real(mc.two_c)),
                    ("estimates".into(), Json::Array(rows)),
                ],
            );
            writeln!(out, "{doc}")?;
        }
        _ => {
            writeln!(out, "{CSV_MAGIC}")?;
            writeln!(
                out,
                "# d_prime_zero={} two_c={}",
                real(mc.d_prime_zero),
                real(mc.two_c)
            )?;
            writeln!(out, "formula,n,log_value,exponential_arg,power_exponent,constant_log,exact_over_estimate")?;
            for e in &estimates {
                let c = e.components;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    e.formula.as_str(),
                    n,
                    real(e.log_value),
                    real(c.exponential_arg),
                    real(c.power_exponent),
                    real(c.constant_log),
                    ratio(e).map(real).unwrap_or_default()
                )?;
            }
        }
    }
    Ok(())
}

fn report_row(r: &CltReport) -> [String; 7] {
    [
        r.n.to_string(),
        real(r.exact_mean),
        real(r.exact_var),
        real(r.mean_ratio),
        real(r.var_ratio),
        real(r.ks_distance),
        real(r.cf_error),
    ]
}

fn clt(
    cache_dir: &Path,
    ns: &[usize],
    mode: TableMode,
    format: Format,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let n_max = *ns.last().expect("n-list is nonempty");
    if ns[0] < 2 {
        return Err(CliError::Range("clt needs n >= 2".into()));
    }
    check_range(mode, n_max)?;
    let table = load_or_build(cache_dir, mode, n_max, err)?;
    let w = default_w_grid();
    let reports = ns
        .par_iter()
        .map(|&n| {
            let pmf = match &table {
                CachedTable::Exact(t) => trace_pmf(t, n, PmfMode::Rational)?,
                CachedTable::LogSpace(t) => t.pmf(n)?,
            };
            clt_report(&pmf, &w)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summarize(&reports);
    match format {
        Format::Json => {
            let rows = reports
                .iter()
                .map(|r| {
                    let values = [
                        Json::uint(r.n),
                        Json::Real(r.exact_mean),
                        Json::Real(r.exact_var),
                        Json::Real(r.mean_ratio),
                        Json::Real(r.var_ratio),
                        Json::Real(r.ks_distance),
                        Json::Real(r.cf_error),
                    ];
                    Json::object(REPORT_FIELDS.iter().copied().zip(values))
                })
                .collect();
            let doc = Json::document(
                "clt",
                vec![
                    ("mode".into(), Json::str(mode.as_str())),
                    ("reports".into(), Json::Array(rows)),
                    (
                        "summary".into(),
                        Json::object([
                            ("ks_trend", Json::str(summary.ks_trend.as_str())),
                            ("cf_trend", Json::str(summary.cf_trend.as_str())),
                            ("mean_gap_slope", Json::opt_real(summary.mean_gap_slope)),
                            ("var_gap_slope", Json::opt_real(summary.var_gap_slope)),
                        ]),
                    ),
                ],
            );
            writeln!(out, "{doc}")?;
        }
        _ => {
            writeln!(out, "{CSV_MAGIC}")?;
            writeln!(out, "# mode: {mode}")?;
            writeln!(out, "{}", REPORT_FIELDS.join(","))?;
            for r in &reports {
                writeln!(out, "{}", report_row(r).join(","))?;
            }
            writeln!(
                out,
                "# summary: ks_trend={} cf_trend={} mean_gap_slope={} var_gap_slope={}",
                summary.ks_trend.as_str(),
                summary.cf_trend.as_str(),
                summary.mean_gap_slope.map(real).unwrap_or_default(),
                summary.var_gap_slope.map(real).unwrap_or_default()
            )?;
        }
    }
    Ok(())
}

fn lemma_check(
    which: Lemma,
    ns: &[usize],
    points: Option<usize>,
    t: Option<f64>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if ns[0] < 2 {
        return Err(CliError::Range("lemma checks need n >= 2".into()));
    }
    let (records, verdict): (Vec<CheckRecord>, (&str, bool)) = match which {
        Lemma::One => {
            let grid = points.unwrap_or(LEMMA1_GRID);
            let reports = ns
                .iter()
                .map(|&n| verify_lemma1(n, grid))
                .collect::<Result<Vec<_>, _>>()?;
            let errs: Vec<f64> = reports.iter().map(|r| r.max_rel_error).collect();
            (
                reports.iter().flat_map(|r| r.records()).collect(),
                ("error_decreasing", strictly_decreasing(&errs)),
            )
        }
        Lemma::Two => {
            let samples = points.unwrap_or(LEMMA2_SAMPLES);
            let reports = ns
                .iter()
                .map(|&n| verify_lemma2(n, t.unwrap_or_else(|| default_lemma2_t(n)), samples))
                .collect::<Result<Vec<_>, _>>()?;
            let c: Vec<f64> = reports.iter().map(|r| r.fitted_constant).collect();
            (
                reports.iter().flat_map(|r| r.records()).collect(),
                (
                    "constant_non_increasing",
                    c.windows(2).all(|w| w[1] <= w[0]),
                ),
            )
        }
    };
    let which_label = match which {
        Lemma::One => 1,
        Lemma::Two => 2,
    };
    match format {
        Format::Json => {
            let rows = records
                .iter()
                .map(|r| {
                    Json::object([
                        ("n", Json::uint(r.n)),
                        ("quantity", Json::str(r.quantity)),
                        ("value", Json::Real(r.value)),
                        ("bound", Json::Real(r.bound)),
                        ("pass", Json::Bool(r.pass)),
                    ])
                })
                .collect();
            let doc = Json::document(
                "lemma-check",
                vec![
                    ("which".into(), Json::Int(which_label)),
                    ("records".into(), Json::Array(rows)),
                    (verdict.0.into(), Json::Bool(verdict.1)),
                ],
            );
            writeln!(out, "{doc}")?;
        }
        _ => {
            writeln!(out, "{CSV_MAGIC}")?;
            writeln!(out, "# lemma: {which_label}")?;
            writeln!(out, "n,quantity,value,bound,pass")?;
            for r in &records {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.n,
                    r.quantity,
                    real(r.value),
                    real(r.bound),
                    r.pass
                )?;
            }
            writeln!(out, "# {}={}", verdict.0, verdict.1)?;
        }
    }
    Ok(())
}

fn sample(
    n: usize,
    samples: u64,
    seed: u64,
    method: SampleMethod,
    max_attempts: u64,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Range("n must be positive".into()));
    }
    let s = saddle_solve(n)?;
    let mut cfg = SamplerConfig::new(s.r_n, seed)?;
    cfg.max_attempts = max_attempts;
    let sampler = BoltzmannSampler::new(cfg)?;
    let (records, target): (Vec<SampleRecord>, Option<usize>) = match method {
        SampleMethod::Rejection => (exact_size_batch(&sampler, n, samples)?, Some(n)),
        SampleMethod::Boltzmann => (boltzmann_batch(&sampler, samples), None),
    };
    match format {
        Format::Json => {
            let header = Json::document(
                "sample",
                vec![(
                    "config".into(),
                    Json::object([
                        ("generator", Json::str("chacha8")),
                        ("x", Json::Real(cfg.x)),
                        ("u", Json::Real(cfg.u)),
                        ("seed", Json::str(seed.to_string())),
                        ("max_attempts", Json::str(max_attempts.to_string())),
                        ("conditioned_size", target.map_or(Json::Null, Json::uint)),
                    ]),
                )],
            );
            writeln!(out, "{header}")?;
            for r in &records {
                writeln!(
                    out,
                    "{}",
                    Json::object([
                        ("sample_index", Json::str(r.index.to_string())),
                        ("size", Json::str(r.size.to_string())),
                        ("parts", Json::str(r.parts.to_string())),
                    ])
                )?;
            }
        }
        _ => write_batch_csv(&cfg, target, &records, out).map_err(|e| match e {
            planepart::Error::Io(io) => CliError::Output(io),
            other => CliError::Numeric(other),
        })?,
    }
    Ok(())
}
