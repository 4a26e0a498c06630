//! Bundled parameter tables and the `HITGATE_DATA_DIR` override.
//!
//! All assets share one plain-text layout: UTF-8, one record per line,
//! tab-separated columns, `#` starts a comment line, blank lines ignored.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub const DATA_DIR_ENV: &str = "HITGATE_DATA_DIR";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{asset} line {line}: {message}")]
    Malformed {
        asset: String,
        line: usize,
        message: String,
    },
}

/// Splits a tabular asset into non-comment rows of trimmed fields.
pub fn parse_tsv(text: &str) -> Vec<Vec<&str>> {
    parse_tsv_numbered(text)
        .into_iter()
        .map(|(_, row)| row)
        .collect()
}

/// As [`parse_tsv`], keeping 1-based line numbers.
pub fn parse_tsv_numbered(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| (i + 1, l.split('\t').map(str::trim).collect()))
        .collect()
}

/// Where an asset's text came from.
#[derive(Debug, Clone)]
pub enum AssetSource {
    Bundled(String),
    File(PathBuf),
}

/// Resolves `name` against `HITGATE_DATA_DIR` when set and the file exists
/// there, else returns the bundled text.
pub fn load_asset(name: &str, bundled: &'static str) -> Result<(String, AssetSource), DataError> {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        let path = Path::new(&dir).join(name);
        if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|source| DataError::Io {
                path: path.clone(),
                source,
            })?;
            return Ok((text, AssetSource::File(path)));
        }
    }
    Ok((bundled.to_string(), AssetSource::Bundled(name.to_string())))
}

/// Text of `name`, honoring the data-directory override; unreadable
/// overrides are reported and the bundled text is used instead.
pub fn asset_text(name: &str, bundled: &'static str) -> String {
    match load_asset(name, bundled) {
        Ok((text, _)) => text,
        Err(e) => {
            log::warn!("{e}; using bundled {name}");
            bundled.to_string()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skips_comments_and_blanks() {
        let rows = parse_tsv("# header\n\nC\t6\n  # indented comment\nN\t7\n");
        assert_eq!(rows, vec![vec!["C", "6"], vec!["N", "7"]]);
    }

    #[test]
    fn keeps_line_numbers() {
        let rows = parse_tsv_numbered("#x\na\tb\n\nc\td\n");
        assert_eq!(rows[1].0, 4);
    }
}
