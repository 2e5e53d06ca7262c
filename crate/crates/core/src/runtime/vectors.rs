//! Curated test vectors: `NAME.bin` holds the raw message and `NAME.expect`
//! the expected outcome.
//!
//! ```text
//! # comment
//! expect: valid
//! field: Payload_Length expect_value: 4
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VectorError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Syntax { path: PathBuf, line: usize, message: String },
    #[error("{0}: missing `expect:` line")]
    MissingExpect(PathBuf),
    #[error("{0}: no matching .bin file")]
    MissingData(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub valid: bool,
    pub fields: Vec<(String, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestVector {
    pub name: String,
    pub data: Vec<u8>,
    pub expect: Expectation,
}

pub fn parse_expectation(text: &str, path: &Path) -> Result<Expectation, VectorError> {
    let err = |line: usize, message: String| VectorError::Syntax { path: path.to_path_buf(), line, message };
    let mut valid = None;
    let mut fields = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["expect:", "valid"] => valid = Some(true),
            ["expect:", "invalid"] => valid = Some(false),
            ["field:", name, "expect_value:", value] => {
                let value = parse_number(value).ok_or_else(|| err(n + 1, format!("bad value `{value}`")))?;
                fields.push((name.to_string(), value));
            }
            _ => return Err(err(n + 1, format!("unrecognized line `{line}`"))),
        }
    }
    let valid = valid.ok_or_else(|| VectorError::MissingExpect(path.to_path_buf()))?;
    Ok(Expectation { valid, fields })
}

fn parse_number(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

/// All vectors in `dir`, sorted by name.
pub fn load_vectors(dir: &Path) -> Result<Vec<TestVector>, VectorError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| VectorError::Io { path, source }
    };
    let mut expect_files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "expect"))
        .collect();
    expect_files.sort();
    expect_files
        .into_iter()
        .map(|expect_path| {
            let bin = expect_path.with_extension("bin");
            if !bin.exists() {
                return Err(VectorError::MissingData(expect_path));
            }
            let text = fs::read_to_string(&expect_path).map_err(io(&expect_path))?;
            let data = fs::read(&bin).map_err(io(&bin))?;
            let name = expect_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(TestVector { name, data, expect: parse_expectation(&text, &expect_path)? })
        })
        .collect()
}
