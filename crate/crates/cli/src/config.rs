//! Run configuration: one TOML file with `[filter]`, `[metrics]`,
//! `[docking]` and `[triage]` tables. Command-line flags override file
//! values, which override defaults.

use std::path::Path;

use anyhow::{Context, Result};
use hitgate::docking::{KlReference, TriageConfig};
use hitgate::hitfilter::FilterConfig;
use hitgate::metrics::{DiversityPairs, HistogramSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub filter: FilterConfig,
    pub metrics: MetricsConfig,
    pub docking: DockingConfig,
    pub triage: TriageConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub diversity_pairs: DiversityPairs,
    pub builtin_featurizer: bool,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            diversity_pairs: DiversityPairs::Distinct,
            builtin_featurizer: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DockingConfig {
    pub kl_reference: KlReference,
    pub histogram: HistogramSpec,
}

/// A configuration problem; reported as a usage error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Parses a `--set` value as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn insert(table: &mut toml::Table, dotted: &str, value: toml::Value) -> Result<(), ConfigError> {
    let mut parts: Vec<&str> = dotted.split('.').collect();
    let last = parts
        .pop()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| ConfigError(format!("bad key {dotted:?}")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError(format!("{p:?} in {dotted:?} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Overrides collected from the command line, as dotted keys.
#[derive(Debug, Default)]
pub struct Overrides {
    entries: Vec<(String, toml::Value)>,
}

impl Overrides {
    pub fn set(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn parse_assignment(&mut self, text: &str) -> Result<(), ConfigError> {
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("--set expects key=value, got {text:?}")))?;
        self.entries
            .push((k.trim().to_string(), parse_value(v.trim())));
        Ok(())
    }
}

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))?;
            toml::from_str::<toml::Table>(&text)
                .map_err(|e| ConfigError(format!("config {}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for (k, v) in &overrides.entries {
        insert(&mut table, k, v.clone())?;
    }
    let config: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
    config
        .filter
        .validate()
        .map_err(|e| ConfigError(e.to_string()))?;
    if config.docking.histogram.bins == 0 {
        return Err(ConfigError("docking.histogram.bins must be positive".into()).into());
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file_beats_default() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[filter]\nmw_max = 400.0\nsas_max = 6.0\n").unwrap();
        let mut o = Overrides::default();
        o.parse_assignment("filter.mw_max=420").unwrap();
        let c = load(Some(&p), &o).unwrap();
        assert_eq!(c.filter.mw_max, 420.0);
        assert_eq!(c.filter.sas_max, 6.0);
        assert_eq!(c.filter.mw_min, 150.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut o = Overrides::default();
        o.parse_assignment("filter.nonsense=1").unwrap();
        assert!(load(None, &o).is_err());
    }

    #[test]
    fn pchembl_none_string() {
        let mut o = Overrides::default();
        o.parse_assignment("filter.pchembl_min=none").unwrap();
        assert_eq!(load(None, &o).unwrap().filter.pchembl_min, None);
    }
}
