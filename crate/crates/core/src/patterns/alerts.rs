//! Structural-alert catalogs and severity scoring.

use std::collections::HashSet;
use std::path::Path;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::matcher::{find_matches, has_match};
use super::smarts::{parse_pattern, Pattern, PatternError};
use crate::chem::Molecule;
use crate::data::{load_asset, parse_tsv_numbered, DataError};

const BUNDLED: &str = include_str!("../../data/alerts.tsv");
pub const ALERTS_ASSET: &str = "alerts.tsv";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("alert catalog line {line}: {source}")]
    Pattern {
        line: usize,
        #[source]
        source: PatternError,
    },
    #[error("alert catalog line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Counting {
    /// Each alert contributes its severity at most once per molecule.
    #[default]
    PerAlert,
    /// Each distinct match contributes its severity.
    PerMatch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Alert {
    pub pattern: Pattern,
    pub severity: u32,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AlertCatalog {
    pub entries: Vec<Alert>,
    pub counting: Counting,
}

static DEFAULT: Lazy<AlertCatalog> =
    Lazy::new(|| AlertCatalog::parse(BUNDLED).expect("bundled alert catalog is well-formed"));

impl AlertCatalog {
    /// The bundled catalog, ignoring any data-directory override.
    pub fn bundled() -> &'static AlertCatalog {
        &DEFAULT
    }

    /// The catalog from `HITGATE_DATA_DIR` when present there, else bundled.
    pub fn load_default() -> Result<AlertCatalog, CatalogError> {
        let (text, _) = load_asset(ALERTS_ASSET, BUNDLED)?;
        AlertCatalog::parse(&text)
    }

    pub fn from_file(path: &Path) -> Result<AlertCatalog, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        AlertCatalog::parse(&text)
    }

    pub fn parse(text: &str) -> Result<AlertCatalog, CatalogError> {
        let mut catalog = AlertCatalog::default();
        let mut names = HashSet::new();
        for (line, row) in parse_tsv_numbered(text) {
            let malformed = |message: String| CatalogError::Malformed { line, message };
            if row[0] == "!counting" {
                catalog.counting = match row.get(1).copied() {
                    Some("per-alert") => Counting::PerAlert,
                    Some("per-match") => Counting::PerMatch,
                    other => return Err(malformed(format!("unknown counting mode {other:?}"))),
                };
                continue;
            }
            if row.len() < 3 {
                return Err(malformed(format!(
                    "expected at least 3 columns, found {}",
                    row.len()
                )));
            }
            let mut pattern =
                parse_pattern(row[0]).map_err(|source| CatalogError::Pattern { line, source })?;
            let severity: u32 = row[1].parse().map_err(|_| {
                malformed(format!(
                    "severity {:?} is not a non-negative integer",
                    row[1]
                ))
            })?;
            let name = row[2].to_string();
            if !names.insert(name.clone()) {
                return Err(malformed(format!("duplicate alert name {name:?}")));
            }
            pattern.name = name.clone();
            let description = row.get(3).map(|s| s.to_string()).unwrap_or_default();
            catalog.entries.push(Alert {
                pattern,
                severity,
                name,
                description,
            });
        }
        Ok(catalog)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Alerts that match, with their match counts.
pub fn matched_alerts<'a>(mol: &Molecule, catalog: &'a AlertCatalog) -> Vec<(&'a Alert, usize)> {
    catalog
        .entries
        .iter()
        .filter_map(|alert| {
            let n = match catalog.counting {
                Counting::PerAlert => usize::from(has_match(mol, &alert.pattern)),
                Counting::PerMatch => find_matches(mol, &alert.pattern).len(),
            };
            (n > 0).then_some((alert, n))
        })
        .collect()
}

pub fn severity_score(mol: &Molecule, catalog: &AlertCatalog) -> u32 {
    matched_alerts(mol, catalog)
        .iter()
        .map(|(alert, n)| alert.severity * *n as u32)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn catalog(rows: &str) -> AlertCatalog {
        AlertCatalog::parse(rows).unwrap()
    }

    #[test]
    fn bundled_parses() {
        assert!(AlertCatalog::bundled().len() > 30);
    }

    #[test]
    fn empty_catalog_scores_zero() {
        let m = parse_smiles("CC(=O)Cl").unwrap();
        assert_eq!(severity_score(&m, &AlertCatalog::default()), 0);
    }

    #[test]
    fn once_per_alert() {
        let cat = catalog("[N+](=O)[O-]\t11\tnitro\t\n");
        let m = parse_smiles("[O-][N+](=O)c1ccc(cc1)[N+](=O)[O-]").unwrap();
        assert_eq!(severity_score(&m, &cat), 11);
        let cat = catalog("!counting\tper-match\n[N+](=O)[O-]\t11\tnitro\t\n");
        assert_eq!(severity_score(&m, &cat), 22);
    }

    #[test]
    fn severities_sum_across_alerts() {
        let cat = catalog("C(=O)Cl\t4\tacyl\tx\nc1ccccc1\t7\tbenzene\ty\n");
        let m = parse_smiles("ClC(=O)c1ccccc1").unwrap();
        assert_eq!(severity_score(&m, &cat), 11);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            AlertCatalog::parse("CC\t-1\tx\n"),
            Err(CatalogError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            AlertCatalog::parse("CC\t1\tx\nCO\t1\tx\n"),
            Err(CatalogError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            AlertCatalog::parse("[C,N]\t1\tx\n"),
            Err(CatalogError::Pattern { line: 1, .. })
        ));
    }
}
