//! Multi-stage hit-like filter with per-criterion outcomes and cohort
//! failure tables.
//!
//! Every criterion is evaluated for every molecule so failure statistics
//! are complete. The filter configuration is a TOML key/value file whose
//! keys are the [`FilterConfig`] field names; missing keys keep defaults.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::chem::{check_validity, Element, Molecule};
use crate::descriptors::{
    crippen_logp, molecular_weight, ring_stats_with, sa_score, FragmentTable, FusionRule,
    RingPolicy,
};
use crate::io::{InputError, SmilesRecord};
use crate::patterns::{severity_score, AlertCatalog};
use crate::smiles::{canonicalize, parse_smiles};

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("invalid filter configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Input(#[from] InputError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub sev_max: u32,
    pub mw_min: f64,
    pub mw_max: f64,
    pub logp_min: f64,
    pub logp_max: f64,
    pub sas_max: f64,
    pub ring_min: usize,
    pub ring_max: usize,
    pub max_ring_size: usize,
    pub max_rings_gt6: usize,
    pub ban_fused: bool,
    pub ban_small_aromatic: bool,
    pub fusion_rule: FusionRule,
    pub small_aromatic_below: usize,
    pub element_whitelist: Vec<String>,
    /// `"none"` in the config file disables the criterion.
    #[serde(deserialize_with = "optional_threshold")]
    pub pchembl_min: Option<f64>,
    pub reject_multi_fragment: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            sev_max: 10,
            mw_min: 150.0,
            mw_max: 350.0,
            logp_min: 1.0,
            logp_max: 3.0,
            sas_max: 5.0,
            ring_min: 1,
            ring_max: 4,
            max_ring_size: 8,
            max_rings_gt6: 2,
            ban_fused: true,
            ban_small_aromatic: true,
            fusion_rule: FusionRule::SharedBonds,
            small_aromatic_below: 5,
            element_whitelist: ["C", "N", "O", "F", "P", "S", "Cl", "Br", "I"]
                .map(String::from)
                .to_vec(),
            pchembl_min: Some(5.0),
            reject_multi_fragment: true,
        }
    }
}

fn optional_threshold<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Int(i64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(x) => Ok(Some(x)),
        Raw::Int(x) => Ok(Some(x as f64)),
        Raw::Text(t) if t.eq_ignore_ascii_case("none") => Ok(None),
        Raw::Text(t) => Err(serde::de::Error::custom(format!(
            "expected a number or \"none\", got {t:?}"
        ))),
    }
}

impl FilterConfig {
    pub fn from_toml(text: &str) -> Result<FilterConfig, FilterError> {
        let config: FilterConfig =
            toml::from_str(text).map_err(|e| FilterError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        let bad = |m: &str| Err(FilterError::Config(m.to_string()));
        if self.mw_min.partial_cmp(&self.mw_max) != Some(std::cmp::Ordering::Less) {
            return bad("mw_min must be below mw_max");
        }
        if self.logp_min.partial_cmp(&self.logp_max) != Some(std::cmp::Ordering::Less) {
            return bad("logp_min must be below logp_max");
        }
        if self.ring_min > self.ring_max {
            return bad("ring_min must not exceed ring_max");
        }
        for sym in &self.element_whitelist {
            if Element::from_symbol(sym).is_none() {
                return bad(&format!("unknown element {sym:?} in element_whitelist"));
            }
        }
        Ok(())
    }

    /// Threshold test for one measured value. Ring, size, aromatic and
    /// fused flags use the same units as [`CriterionRecord::value`].
    pub fn passes(&self, criterion: Criterion, value: f64) -> bool {
        match criterion {
            Criterion::Sev => value <= f64::from(self.sev_max),
            Criterion::Sas => value <= self.sas_max,
            Criterion::Mw => value >= self.mw_min && value <= self.mw_max,
            Criterion::LogP => value >= self.logp_min && value <= self.logp_max,
            Criterion::NoR => value >= self.ring_min as f64,
            Criterion::R4 => value <= self.ring_max as f64,
            Criterion::T8 => value <= self.max_ring_size as f64,
            Criterion::R6T2 => value <= self.max_rings_gt6 as f64,
            Criterion::AromR => !(self.ban_small_aromatic && value > 0.0),
            Criterion::FusedR => !(self.ban_fused && value > 0.0),
            Criterion::Elem => value == 0.0,
            Criterion::Frag => !(self.reject_multi_fragment && value > 1.0),
            Criterion::PChembl => self.pchembl_min.is_none_or(|m| value >= m),
        }
    }

    pub fn ring_policy(&self) -> RingPolicy {
        RingPolicy {
            fusion: self.fusion_rule,
            small_aromatic_below: self.small_aromatic_below,
        }
    }

    fn whitelist(&self) -> BTreeSet<Element> {
        self.element_whitelist
            .iter()
            .filter_map(|s| Element::from_symbol(s))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    Sev,
    Sas,
    Mw,
    LogP,
    NoR,
    R4,
    T8,
    R6T2,
    AromR,
    FusedR,
    Elem,
    Frag,
    PChembl,
}

impl Criterion {
    pub const ALL: [Criterion; 13] = [
        Criterion::Sev,
        Criterion::Sas,
        Criterion::Mw,
        Criterion::LogP,
        Criterion::NoR,
        Criterion::R4,
        Criterion::T8,
        Criterion::R6T2,
        Criterion::AromR,
        Criterion::FusedR,
        Criterion::Elem,
        Criterion::Frag,
        Criterion::PChembl,
    ];

    /// Columns of the published failure table, in order.
    pub const TABLE: [Criterion; 10] = [
        Criterion::Sev,
        Criterion::Sas,
        Criterion::Mw,
        Criterion::LogP,
        Criterion::NoR,
        Criterion::R4,
        Criterion::T8,
        Criterion::R6T2,
        Criterion::AromR,
        Criterion::FusedR,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Sev => "Sev.",
            Criterion::Sas => "SAS",
            Criterion::Mw => "MW",
            Criterion::LogP => "logP",
            Criterion::NoR => "NoR",
            Criterion::R4 => "<4R",
            Criterion::T8 => "<8t",
            Criterion::R6T2 => "<2R6t",
            Criterion::AromR => "AromR",
            Criterion::FusedR => "FusedR",
            Criterion::Elem => "Elem",
            Criterion::Frag => "Frag",
            Criterion::PChembl => "pChEMBL",
        }
    }
}

pub const TABLE_HEADER: &str = "Sev.,SAS,MW,logP,NoR,<4R,<8t,<2R6t,AromR,FusedR,All";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRecord {
    pub criterion: Criterion,
    /// Measured value; `None` only when the descriptor could not be computed
    /// or the criterion is not applicable.
    pub value: Option<f64>,
    pub pass: bool,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterOutcome {
    pub molecule_id: String,
    pub records: Vec<CriterionRecord>,
    pub all_pass: bool,
}

impl FilterOutcome {
    pub fn record(&self, c: Criterion) -> &CriterionRecord {
        self.records
            .iter()
            .find(|r| r.criterion == c)
            .expect("every criterion is recorded")
    }

    pub fn failed(&self) -> Vec<Criterion> {
        self.records
            .iter()
            .filter(|r| r.applicable && !r.pass)
            .map(|r| r.criterion)
            .collect()
    }
}

/// Filter configuration bound to its alert catalog and SA table.
#[derive(Debug, Clone)]
pub struct HitFilter<'a> {
    pub config: FilterConfig,
    pub catalog: &'a AlertCatalog,
    pub sa_table: &'a FragmentTable,
}

impl<'a> HitFilter<'a> {
    pub fn new(
        config: FilterConfig,
        catalog: &'a AlertCatalog,
        sa_table: &'a FragmentTable,
    ) -> Self {
        HitFilter {
            config,
            catalog,
            sa_table,
        }
    }

    pub fn with_defaults() -> HitFilter<'static> {
        HitFilter::new(
            FilterConfig::default(),
            AlertCatalog::bundled(),
            FragmentTable::bundled(),
        )
    }

    pub fn apply(&self, id: &str, mol: &Molecule, pchembl: Option<f64>) -> FilterOutcome {
        apply_filters(id, mol, self, pchembl)
    }
}

fn rec(criterion: Criterion, value: f64, pass: bool) -> CriterionRecord {
    CriterionRecord {
        criterion,
        value: Some(value),
        pass,
        applicable: true,
        error: None,
    }
}

fn failed_descriptor(criterion: Criterion, error: String) -> CriterionRecord {
    CriterionRecord {
        criterion,
        value: None,
        pass: false,
        applicable: true,
        error: Some(error),
    }
}

pub fn apply_filters(
    id: &str,
    mol: &Molecule,
    filter: &HitFilter,
    pchembl: Option<f64>,
) -> FilterOutcome {
    let c = &filter.config;
    let mut records = Vec::with_capacity(Criterion::ALL.len());

    let measured =
        |criterion: Criterion, value: f64| rec(criterion, value, c.passes(criterion, value));

    records.push(measured(
        Criterion::Sev,
        f64::from(severity_score(mol, filter.catalog)),
    ));
    records.push(match sa_score(mol, filter.sa_table) {
        Ok(s) => measured(Criterion::Sas, s),
        Err(e) => failed_descriptor(Criterion::Sas, e.to_string()),
    });
    records.push(measured(Criterion::Mw, molecular_weight(mol)));
    records.push(match crippen_logp(mol) {
        Ok(lp) => measured(Criterion::LogP, lp),
        Err(e) => failed_descriptor(Criterion::LogP, e.to_string()),
    });

    let rs = ring_stats_with(mol, &c.ring_policy());
    records.push(measured(Criterion::NoR, rs.ring_count as f64));
    records.push(measured(Criterion::R4, rs.ring_count as f64));
    records.push(measured(Criterion::T8, rs.max_ring_size as f64));
    records.push(measured(Criterion::R6T2, rs.rings_gt6 as f64));
    records.push(measured(
        Criterion::AromR,
        f64::from(u8::from(rs.has_small_aromatic)),
    ));
    records.push(measured(
        Criterion::FusedR,
        f64::from(u8::from(rs.has_fused)),
    ));

    let whitelist = c.whitelist();
    let outside = mol
        .atoms
        .iter()
        .filter(|a| a.element != Element::H && !whitelist.contains(&a.element))
        .count();
    records.push(measured(Criterion::Elem, outside as f64));
    records.push(measured(Criterion::Frag, mol.components().len() as f64));

    records.push(match (pchembl, c.pchembl_min) {
        (Some(v), Some(_)) => measured(Criterion::PChembl, v),
        (v, _) => CriterionRecord {
            criterion: Criterion::PChembl,
            value: v,
            pass: true,
            applicable: false,
            error: None,
        },
    });

    let all_pass = records.iter().all(|r| !r.applicable || r.pass);
    FilterOutcome {
        molecule_id: id.to_string(),
        records,
        all_pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRate {
    pub criterion: Criterion,
    pub label: &'static str,
    pub failed: usize,
    pub applicable: usize,
    /// `None` when no molecule in the cohort was eligible for the criterion.
    pub percent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureTable {
    pub cohort: usize,
    pub rates: Vec<CriterionRate>,
    pub all_failed: usize,
    pub all_percent: f64,
}

impl FailureTable {
    pub fn percent(&self, c: Criterion) -> Option<f64> {
        self.rates
            .iter()
            .find(|r| r.criterion == c)
            .and_then(|r| r.percent)
    }

    /// Header plus one row, two decimals, published column order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TABLE_HEADER);
        out.push('\n');
        let cells: Vec<String> = Criterion::TABLE
            .iter()
            .map(|&c| {
                self.percent(c)
                    .map_or_else(String::new, |p| format!("{p:.2}"))
            })
            .chain(std::iter::once(format!("{:.2}", self.all_percent)))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("failure table serializes")
    }
}

pub fn failure_table(outcomes: &[FilterOutcome]) -> Result<FailureTable, FilterError> {
    if outcomes.is_empty() {
        return Err(FilterError::EmptyCohort);
    }
    let rates = Criterion::ALL
        .iter()
        .map(|&c| {
            let (mut failed, mut applicable) = (0, 0);
            for o in outcomes {
                let r = o.record(c);
                if r.applicable {
                    applicable += 1;
                    failed += usize::from(!r.pass);
                }
            }
            let percent = (applicable > 0).then(|| 100.0 * failed as f64 / applicable as f64);
            CriterionRate {
                criterion: c,
                label: c.label(),
                failed,
                applicable,
                percent,
            }
        })
        .collect();
    let all_failed = outcomes.iter().filter(|o| !o.all_pass).count();
    Ok(FailureTable {
        cohort: outcomes.len(),
        rates,
        all_failed,
        all_percent: 100.0 * all_failed as f64 / outcomes.len() as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassingRecord {
    pub line: usize,
    pub id: String,
    pub smiles: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reject {
    pub line: usize,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub passing: Vec<PassingRecord>,
    pub outcomes: Vec<FilterOutcome>,
    /// `None` when no valid molecule reached the filter.
    pub table: Option<FailureTable>,
    pub invalid: Vec<Reject>,
    pub rejected: Vec<Reject>,
    pub records_read: usize,
}

impl DatasetReport {
    pub fn rejects_tsv(&self) -> String {
        let mut all: Vec<(&Reject, &str)> = self
            .invalid
            .iter()
            .map(|r| (r, "invalid"))
            .chain(self.rejected.iter().map(|r| (r, "filtered")))
            .collect();
        all.sort_by_key(|(r, _)| r.line);
        let mut out = String::from("line\tid\tstage\treason\n");
        for (r, stage) in all {
            writeln!(out, "{}\t{}\t{}\t{}", r.line, r.id, stage, r.reason).unwrap();
        }
        out
    }
}

enum Processed {
    Invalid(Reject),
    Filtered(FilterOutcome, Option<String>, SmilesRecord),
}

fn process(rec: SmilesRecord, filter: &HitFilter, largest_fragment: bool) -> Processed {
    let invalid = |rec: &SmilesRecord, reason: String| {
        Processed::Invalid(Reject {
            line: rec.line,
            id: rec.id.clone(),
            reason,
        })
    };
    let mol = match parse_smiles(&rec.smiles) {
        Ok(m) => m,
        Err(e) => return invalid(&rec, e.to_string()),
    };
    let report = check_validity(&mol);
    if !report.valid {
        let (atom, why) = &report.violations[0];
        return invalid(&rec, format!("atom {atom}: {why}"));
    }
    let mol = if largest_fragment {
        mol.largest_fragment()
    } else {
        mol
    };
    let outcome = apply_filters(&rec.id, &mol, filter, rec.pchembl);
    let canonical = outcome
        .all_pass
        .then(|| canonicalize(&mol).map(|f| f.text).ok())
        .flatten();
    Processed::Filtered(outcome, canonical, rec)
}

/// Parses, validates and filters a record stream in one pass. Records are
/// processed in parallel chunks; all outputs keep input order.
pub fn filter_dataset<I>(
    records: I,
    filter: &HitFilter,
    largest_fragment: bool,
) -> Result<DatasetReport, FilterError>
where
    I: IntoIterator<Item = Result<SmilesRecord, InputError>>,
{
    const CHUNK: usize = 4096;
    let mut report = DatasetReport {
        passing: Vec::new(),
        outcomes: Vec::new(),
        table: None,
        invalid: Vec::new(),
        rejected: Vec::new(),
        records_read: 0,
    };
    let mut iter = records.into_iter().peekable();
    while iter.peek().is_some() {
        let chunk: Vec<SmilesRecord> = iter.by_ref().take(CHUNK).collect::<Result<_, _>>()?;
        report.records_read += chunk.len();
        let done: Vec<Processed> = chunk
            .into_par_iter()
            .map(|r| process(r, filter, largest_fragment))
            .collect();
        for p in done {
            match p {
                Processed::Invalid(r) => report.invalid.push(r),
                Processed::Filtered(outcome, canonical, rec) => {
                    if let Some(smiles) = canonical {
                        report.passing.push(PassingRecord {
                            line: rec.line,
                            id: rec.id,
                            smiles,
                        });
                    } else {
                        let failed: Vec<&str> =
                            outcome.failed().iter().map(|c| c.label()).collect();
                        report.rejected.push(Reject {
                            line: rec.line,
                            id: rec.id,
                            reason: failed.join(","),
                        });
                    }
                    report.outcomes.push(outcome);
                }
            }
        }
    }
    report.table = match failure_table(&report.outcomes) {
        Ok(t) => Some(t),
        Err(FilterError::EmptyCohort) => None,
        Err(e) => return Err(e),
    };
    Ok(report)
}
