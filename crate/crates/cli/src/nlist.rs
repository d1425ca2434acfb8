//! Comma-separated size lists such as `100,200,400`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NListError {
    #[error("empty size list")]
    Empty,
    #[error("entry {index} ({text:?}) is not a positive integer")]
    BadEntry { index: usize, text: String },
    #[error("entry {index} does not exceed the previous size")]
    NotIncreasing { index: usize },
}

/// Parses a nonempty, strictly increasing list of positive integers.
/// Entries may carry surrounding spaces and `_` digit separators.
pub fn parse_n_list(text: &str) -> Result<Vec<usize>, NListError> {
    if text.trim().is_empty() {
        return Err(NListError::Empty);
    }
    let mut out: Vec<usize> = Vec::new();
    for (index, raw) in text.split(',').enumerate() {
        let entry = raw.trim();
        let digits: String = entry.chars().filter(|&c| c != '_').collect();
        let bad = || NListError::BadEntry {
            index,
            text: entry.to_string(),
        };
        if digits.is_empty()
            || !digits.bytes().all(|b| b.is_ascii_digit())
            || entry.starts_with('_')
        {
            return Err(bad());
        }
        let n: usize = digits.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        if out.last().is_some_and(|&prev| n <= prev) {
            return Err(NListError::NotIncreasing { index });
        }
        out.push(n);
    }
    Ok(out)
}
