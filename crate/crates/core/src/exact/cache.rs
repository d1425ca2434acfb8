//! On-disk forms of the trace tables.
//!
//! Cache layout (format version 1, UTF-8, `\n` line endings):
//!
//! ```text
//! PPT1 <n_max> <exact|logspace>
//! <row 1>
//! ...
//! <row n_max>
//! END <sha256 of every preceding byte, lowercase hex>
//! ```
//!
//! Row `n` lists `Q(1, n) .. Q(n, n)` separated by single spaces, as
//! decimal integers in exact mode and as shortest round-trip `f64`
//! literals of `log Q(m, n)` in log-space mode. The trailer catches
//! truncation and bit rot; nothing is trusted before it verifies.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::{LogTraceTable, TraceTable};

pub const CACHE_MAGIC: &str = "PPT1";
const CSV_HEADER_LINE: &str = "# planepart-format: 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableMode {
    Exact,
    LogSpace,
}

impl TableMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TableMode::Exact => "exact",
            TableMode::LogSpace => "logspace",
        }
    }

    /// Cache file name keyed on mode, size and format version.
    pub fn cache_file_name(self, n_max: usize) -> String {
        format!("trace-{}-{n_max}.ppt1", self.as_str())
    }
}

impl fmt::Display for TableMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TableMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(TableMode::Exact),
            "logspace" => Ok(TableMode::LogSpace),
            other => Err(Error::parse(1, format!("unknown table mode {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CachedTable {
    Exact(TraceTable),
    LogSpace(LogTraceTable),
}

impl CachedTable {
    pub fn mode(&self) -> TableMode {
        match self {
            CachedTable::Exact(_) => TableMode::Exact,
            CachedTable::LogSpace(_) => TableMode::LogSpace,
        }
    }

    pub fn n_max(&self) -> usize {
        match self {
            CachedTable::Exact(t) => t.n_max(),
            CachedTable::LogSpace(t) => t.n_max(),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode_cache(table: &CachedTable) -> Vec<u8> {
    let mut body = String::new();
    body.push_str(&format!(
        "{CACHE_MAGIC} {} {}\n",
        table.n_max(),
        table.mode()
    ));
    for n in 1..=table.n_max() {
        let line: Vec<String> = match table {
            CachedTable::Exact(t) => t
                .row(n)
                .expect("n within table")
                .iter()
                .map(|q| q.to_str_radix(10))
                .collect(),
            CachedTable::LogSpace(t) => t
                .row(n)
                .expect("n within table")
                .iter()
                .map(|v| format!("{v:e}"))
                .collect(),
        };
        body.push_str(&line.join(" "));
        body.push('\n');
    }
    let digest = Sha256::digest(body.as_bytes());
    body.push_str(&format!("END {}\n", hex(&digest)));
    body.into_bytes()
}

fn parse_decimal(tok: &str, line: usize) -> Result<BigUint> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(line, format!("not a decimal count: {tok:?}")));
    }
    BigUint::parse_bytes(tok.as_bytes(), 10)
        .ok_or_else(|| Error::parse(line, format!("not a decimal count: {tok:?}")))
}

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("not a real: {tok:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

/// Decode a cache file. Any deviation from the layout is an error.
pub fn decode_cache(bytes: &[u8]) -> Result<CachedTable> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::parse(0, "cache is not UTF-8"))?;
    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| Error::parse(0, "cache has no trailer"))?;
    let (body, trailer) = text.split_at(body_end);
    let want = trailer
        .strip_prefix("END ")
        .and_then(|t| t.strip_suffix('\n'))
        .ok_or_else(|| Error::parse(0, "missing END trailer"))?;
    if want != hex(&Sha256::digest(body.as_bytes())) {
        return Err(Error::parse(0, "checksum mismatch"));
    }

    let mut lines = body.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty cache"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let [magic, n_max, mode] = fields[..] else {
        return Err(Error::parse(1, "header must be `PPT1 <n_max> <mode>`"));
    };
    if magic != CACHE_MAGIC {
        return Err(Error::parse(1, format!("bad magic {magic:?}")));
    }
    let n_max: usize = n_max
        .parse()
        .map_err(|_| Error::parse(1, format!("bad n_max {n_max:?}")))?;
    let mode: TableMode = mode.parse()?;

    let rows: Vec<&str> = lines.collect();
    if rows.len() != n_max {
        return Err(Error::parse(
            rows.len() + 2,
            format!("expected {n_max} rows, found {}", rows.len()),
        ));
    }
    let table = match mode {
        TableMode::Exact => {
            let mut parsed = Vec::with_capacity(n_max);
            for (i, line) in rows.iter().enumerate() {
                let row = line
                    .split(' ')
                    .map(|tok| parse_decimal(tok, i + 2))
                    .collect::<Result<Vec<_>>>()?;
                parsed.push(row);
            }
            let t = TraceTable::from_rows(parsed)?;
            check_boundaries(&t)?;
            CachedTable::Exact(t)
        }
        TableMode::LogSpace => {
            let mut parsed = Vec::with_capacity(n_max);
            for (i, line) in rows.iter().enumerate() {
                let row = line
                    .split(' ')
                    .map(|tok| parse_real(tok, i + 2))
                    .collect::<Result<Vec<_>>>()?;
                parsed.push(row);
            }
            CachedTable::LogSpace(LogTraceTable::from_rows(parsed)?)
        }
    };
    Ok(table)
}

/// `Q(1, n) = n` and `Q(n, n) = 1`.
fn check_boundaries(t: &TraceTable) -> Result<()> {
    for n in 1..=t.n_max() {
        let row = t.row(n)?;
        if row[0] != BigUint::from(n) || row[n - 1] != BigUint::from(1u32) {
            return Err(Error::parse(n + 1, "boundary identity violated"));
        }
    }
    Ok(())
}

/// CSV export `n,m,Q(m,n)`.
pub fn write_trace_csv<W: Write>(table: &TraceTable, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER_LINE}")?;
    writeln!(out, "n,m,Q(m,n)")?;
    for n in 1..=table.n_max() {
        for (i, q) in table.row(n)?.iter().enumerate() {
            writeln!(out, "{n},{},{q}", i + 1)?;
        }
    }
    Ok(())
}

/// CSV export `n,m,log_q`.
pub fn write_log_csv<W: Write>(table: &LogTraceTable, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER_LINE}")?;
    writeln!(out, "n,m,log_q")?;
    for n in 1..=table.n_max() {
        for (i, v) in table.row(n)?.iter().enumerate() {
            writeln!(out, "{n},{},{v:e}", i + 1)?;
        }
    }
    Ok(())
}

/// Read back the `n,m,Q(m,n)` CSV. Rows must cover the full triangle in
/// order; `#` lines are comments.
pub fn read_trace_csv(text: &str) -> Result<TraceTable> {
    let mut rows: Vec<Vec<BigUint>> = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != "n,m,Q(m,n)" {
                return Err(Error::parse(line_no, "expected header `n,m,Q(m,n)`"));
            }
            seen_header = true;
            continue;
        }
        let mut parts = line.split(',');
        let (Some(n), Some(m), Some(q), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(Error::parse(line_no, "expected three fields"));
        };
        let n: usize = n
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad n {n:?}")))?;
        let m: usize = m
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad m {m:?}")))?;
        let q = parse_decimal(q, line_no)?;
        let expect_new_row = rows.last().is_none_or(|r| r.len() == rows.len());
        let (want_n, want_m) = if expect_new_row {
            (rows.len() + 1, 1)
        } else {
            (rows.len(), rows.last().map_or(0, Vec::len) + 1)
        };
        if (n, m) != (want_n, want_m) {
            return Err(Error::parse(
                line_no,
                format!("expected entry ({want_n},{want_m}), found ({n},{m})"),
            ));
        }
        if expect_new_row {
            rows.push(Vec::with_capacity(n));
        }
        rows.last_mut().expect("row pushed").push(q);
    }
    if !seen_header {
        return Err(Error::parse(0, "missing header"));
    }
    if rows.last().is_some_and(|r| r.len() != rows.len()) {
        return Err(Error::parse(0, "last row is incomplete"));
    }
    TraceTable::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{build_log_table, build_trace_table};

    #[test]
    fn exact_round_trip() {
        let t = build_trace_table(12);
        let bytes = encode_cache(&CachedTable::Exact(t.clone()));
        assert!(bytes.starts_with(b"PPT1 12 exact\n"));
        assert_eq!(decode_cache(&bytes).unwrap(), CachedTable::Exact(t));
    }

    #[test]
    fn log_round_trip_is_bit_exact() {
        let t = build_log_table(15).unwrap();
        let bytes = encode_cache(&CachedTable::LogSpace(t.clone()));
        let CachedTable::LogSpace(back) = decode_cache(&bytes).unwrap() else {
            panic!("mode changed")
        };
        for n in 1..=15 {
            let a = t.row(n).unwrap();
            let b = back.row(n).unwrap();
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn corruption_detected() {
        let bytes = encode_cache(&CachedTable::Exact(build_trace_table(8)));
        // truncation anywhere
        for cut in [5, bytes.len() / 2, bytes.len() - 3] {
            assert!(decode_cache(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        // bad magic
        let mut bad = bytes.clone();
        bad[3] = b'2';
        assert!(decode_cache(&bad).is_err());
        // flipped digit
        let mut bad = bytes.clone();
        let at = bytes.iter().position(|&b| b == b'3').unwrap();
        bad[at] = b'4';
        assert!(decode_cache(&bad).is_err());
    }

    #[test]
    fn resealed_but_inconsistent_table_rejected() {
        let body = "PPT1 2 exact\n1\n3 1\n";
        let digest = hex(&Sha256::digest(body.as_bytes()));
        let text = format!("{body}END {digest}\n");
        assert!(decode_cache(text.as_bytes()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = build_trace_table(9);
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# planepart-format: 1\nn,m,Q(m,n)\n1,1,1\n2,1,2\n2,2,1\n"));
        assert_eq!(read_trace_csv(&text).unwrap(), t);
    }

    #[test]
    fn csv_rejects_gaps_and_partial_rows() {
        assert!(read_trace_csv("n,m,Q(m,n)\n1,1,1\n2,2,1\n").is_err());
        assert!(read_trace_csv("n,m,Q(m,n)\n1,1,1\n2,1,2\n").is_err());
        assert!(read_trace_csv("1,1,1\n").is_err());
        assert!(read_trace_csv("n,m,Q(m,n)\n1,1,-1\n").is_err());
    }

    #[test]
    fn mode_names() {
        assert_eq!("exact".parse::<TableMode>().unwrap(), TableMode::Exact);
        assert!("binary".parse::<TableMode>().is_err());
        assert_eq!(
            TableMode::LogSpace.cache_file_name(300),
            "trace-logspace-300.ppt1"
        );
    }
}
