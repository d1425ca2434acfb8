//! On-disk table cache. One file per `(mode, n_max)`; the format version
//! lives in the file header and its checksum trailer.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use planepart::exact::{
    build_log_table, build_trace_table, decode_cache, encode_cache, CachedTable, TableMode,
    EXACT_LIMIT, LOGSPACE_LIMIT,
};

use crate::error::CliError;

pub const CACHE_ENV: &str = "PLANEPART_CACHE";

/// `$XDG_CACHE_HOME/planepart`, else `$HOME/.cache/planepart`, else
/// `.planepart-cache`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(x).join("planepart");
    }
    if let Some(h) = std::env::var_os("HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(h).join(".cache").join("planepart");
    }
    PathBuf::from(".planepart-cache")
}

pub fn mode_limit(mode: TableMode) -> usize {
    match mode {
        TableMode::Exact => EXACT_LIMIT,
        TableMode::LogSpace => LOGSPACE_LIMIT,
    }
}

pub fn check_range(mode: TableMode, n: usize) -> Result<(), CliError> {
    let hi = mode_limit(mode);
    if n == 0 || n > hi {
        return Err(CliError::Range(format!(
            "n = {n} outside 1..={hi} for {mode} mode"
        )));
    }
    Ok(())
}

fn cache_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Cache {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads the table for `(mode, n_max)` from `dir`, building and storing
/// it on a miss. A file that fails validation is reported and rebuilt.
pub fn load_or_build(
    dir: &Path,
    mode: TableMode,
    n_max: usize,
    progress: &mut dyn Write,
) -> Result<CachedTable, CliError> {
    check_range(mode, n_max)?;
    let path = dir.join(mode.cache_file_name(n_max));
    match fs::read(&path) {
        Ok(bytes) => match decode_cache(&bytes) {
            Ok(t) if t.mode() == mode && t.n_max() == n_max => return Ok(t),
            Ok(_) => {
                let _ = writeln!(
                    progress,
                    "cache {} holds a different table; rebuilding",
                    path.display()
                );
            }
            Err(e) => {
                let _ = writeln!(
                    progress,
                    "cache {} is invalid ({e}); rebuilding",
                    path.display()
                );
            }
        },
        Err(e) if e.kind() == io::ErrorKind::NotFound => {}
        Err(e) => return Err(cache_err(&path)(e)),
    }
    let _ = writeln!(progress, "building {mode} trace table to n = {n_max}");
    let table = match mode {
        TableMode::Exact => CachedTable::Exact(build_trace_table(n_max)),
        TableMode::LogSpace => CachedTable::LogSpace(build_log_table(n_max)?),
    };
    store(dir, &path, &table)?;
    Ok(table)
}

fn store(dir: &Path, path: &Path, table: &CachedTable) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(cache_err(dir))?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, encode_cache(table)).map_err(cache_err(&tmp))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        cache_err(path)(e)
    })
}
