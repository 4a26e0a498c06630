//! Molecule list files: one SMILES per line, an optional tab-separated id,
//! and an optional third column with a pChEMBL activity value. Lines that
//! are blank or start with `#` are skipped. Files ending in `.gz` (or
//! starting with the gzip magic bytes) are decompressed transparently.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmilesRecord {
    /// 1-based line number in the source.
    pub line: usize,
    pub id: String,
    pub smiles: String,
    pub pchembl: Option<f64>,
}

/// Opens a possibly gzip-compressed text file.
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead + Send>, InputError> {
    let io_err = |source| InputError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::open(path).map_err(io_err)?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(io_err)?;
    let file = File::open(path).map_err(io_err)?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

pub fn read_smiles_file(path: &Path) -> Result<Vec<SmilesRecord>, InputError> {
    let reader = open_text(path)?;
    read_smiles(reader).map_err(|e| match e {
        InputError::Io { source, .. } => InputError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

pub fn read_smiles<R: BufRead>(reader: R) -> Result<Vec<SmilesRecord>, InputError> {
    smiles_records(reader).collect()
}

/// Lazily parsed records; I/O failures carry an empty path.
pub fn smiles_records<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<SmilesRecord, InputError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(source) => Some(Err(InputError::Io {
                path: PathBuf::new(),
                source,
            })),
            Ok(line) => parse_line(&line, i + 1).transpose(),
        })
}

pub fn parse_line(line: &str, line_no: usize) -> Result<Option<SmilesRecord>, InputError> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = if trimmed.contains('\t') {
        trimmed.split('\t').map(str::trim).collect()
    } else {
        trimmed.split_whitespace().collect()
    };
    let smiles = fields[0].to_string();
    let id = fields
        .get(1)
        .filter(|s| !s.is_empty())
        .map_or_else(|| format!("L{line_no}"), |s| s.to_string());
    let pchembl = match fields.get(2).filter(|s| !s.is_empty()) {
        None => None,
        Some(v) => {
            let x: f64 = v.parse().map_err(|_| InputError::Malformed {
                line: line_no,
                message: format!("activity value {v:?} is not a number"),
            })?;
            if !x.is_finite() {
                return Err(InputError::Malformed {
                    line: line_no,
                    message: format!("activity value {v:?} is not finite"),
                });
            }
            Some(x)
        }
    };
    Ok(Some(SmilesRecord {
        line: line_no,
        id,
        smiles,
        pchembl,
    }))
}
