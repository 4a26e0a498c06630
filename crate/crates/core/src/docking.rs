//! Docking-score analytics: cohort comparison against reference ligand
//! sets, aggregation, and hit triage.
//!
//! Scores are energy-like (lower is better). Cohort labels name a model and
//! training set, e.g. `MolRNN (Hit-like)`; the algorithm is the text before
//! the first `" ("`. The labels `reference-full` and `reference-hitlike`
//! mark the two reference ligand sets.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptors::{tanimoto, Fingerprint};
use crate::metrics::{kl_divergence_with, HistogramSpec, MetricError};

pub const REFERENCE_FULL: &str = "reference-full";
pub const REFERENCE_HITLIKE: &str = "reference-hitlike";
pub const SCORE_COLUMNS: [&str; 4] = ["molecule_id", "target", "cohort", "score"];

#[derive(Debug, Error)]
pub enum DockingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("unexpected header {0:?}; expected molecule_id,target,cohort,score")]
    UnknownHeader(String),
    #[error("no records for target {target:?}, cohort {cohort:?}")]
    NoRecords { target: String, cohort: String },
    #[error("empty sample")]
    EmptySample,
    #[error("known-binder set is empty")]
    EmptyKnownSet,
    #[error("need at least 3 scores for mean and sd, got {0}")]
    TooFewForStats(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub molecule_id: String,
    pub target: String,
    pub cohort: String,
    pub score: f64,
}

/// Reads a score table. Duplicate (molecule, target, cohort) rows keep the
/// lowest score; output keeps first-occurrence order.
pub fn parse_scores<R: Read>(reader: R) -> Result<Vec<ScoreRecord>, DockingError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DockingError::MalformedRow {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != SCORE_COLUMNS {
        return Err(DockingError::UnknownHeader(
            headers.iter().collect::<Vec<_>>().join(","),
        ));
    }
    let mut out: Vec<ScoreRecord> = Vec::new();
    let mut index: BTreeMap<(String, String, String), usize> = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| DockingError::MalformedRow {
            line,
            message: e.to_string(),
        })?;
        if row.len() != 4 {
            return Err(DockingError::MalformedRow {
                line,
                message: format!("expected 4 fields, got {}", row.len()),
            });
        }
        let score: f64 = row[3].parse().map_err(|_| DockingError::MalformedRow {
            line,
            message: format!("score {:?} is not a number", &row[3]),
        })?;
        if !score.is_finite() {
            return Err(DockingError::MalformedRow {
                line,
                message: format!("score {:?} is not finite", &row[3]),
            });
        }
        if row[2].is_empty() {
            return Err(DockingError::MalformedRow {
                line,
                message: "empty cohort label".into(),
            });
        }
        let rec = ScoreRecord {
            molecule_id: row[0].into(),
            target: row[1].into(),
            cohort: row[2].into(),
            score,
        };
        let key = (
            rec.molecule_id.clone(),
            rec.target.clone(),
            rec.cohort.clone(),
        );
        match index.get(&key) {
            Some(&k) => {
                log::info!("line {line}: duplicate {key:?}, keeping best score");
                if score < out[k].score {
                    out[k].score = score;
                }
            }
            None => {
                index.insert(key, out.len());
                out.push(rec);
            }
        }
    }
    Ok(out)
}

pub fn load_scores(path: &Path) -> Result<Vec<ScoreRecord>, DockingError> {
    let file = std::fs::File::open(path).map_err(|source| DockingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scores(file)
}

pub fn scores_for(records: &[ScoreRecord], target: &str, cohort: &str) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.target == target && r.cohort == cohort)
        .map(|r| r.score)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSummary {
    pub target: String,
    pub cohort: String,
    pub n: usize,
    pub median: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single score.
    pub sd: f64,
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Mean and unbiased sd (0 when fewer than two values).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(
    records: &[ScoreRecord],
    target: &str,
    cohort: &str,
) -> Result<TargetSummary, DockingError> {
    let xs = scores_for(records, target, cohort);
    let median = median(&xs).ok_or_else(|| DockingError::NoRecords {
        target: target.into(),
        cohort: cohort.into(),
    })?;
    let (mean, sd) = mean_sd(&xs);
    Ok(TargetSummary {
        target: target.into(),
        cohort: cohort.into(),
        n: xs.len(),
        median,
        mean,
        sd,
    })
}

/// Percentage of generated scores strictly below the reference median.
pub fn fraction_better(generated: &[f64], ref_median: f64) -> Result<f64, DockingError> {
    if generated.is_empty() {
        return Err(DockingError::EmptySample);
    }
    Ok(
        100.0 * generated.iter().filter(|&&s| s < ref_median).count() as f64
            / generated.len() as f64,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortComparison {
    pub target: String,
    pub gen_cohort: String,
    pub ref_cohort: String,
    pub kl: f64,
    pub median_gen: f64,
    pub median_ref: f64,
    pub pct_better: f64,
    pub n_gen: usize,
    pub n_ref: usize,
}

pub fn compare_cohorts(
    records: &[ScoreRecord],
    target: &str,
    gen_cohort: &str,
    ref_cohort: &str,
    spec: &HistogramSpec,
) -> Result<CohortComparison, DockingError> {
    let g = scores_for(records, target, gen_cohort);
    let r = scores_for(records, target, ref_cohort);
    let no = |c: &str| DockingError::NoRecords {
        target: target.into(),
        cohort: c.into(),
    };
    let median_gen = median(&g).ok_or_else(|| no(gen_cohort))?;
    let median_ref = median(&r).ok_or_else(|| no(ref_cohort))?;
    Ok(CohortComparison {
        target: target.into(),
        gen_cohort: gen_cohort.into(),
        ref_cohort: ref_cohort.into(),
        kl: kl_divergence_with(&g, &r, spec)?,
        median_gen,
        median_ref,
        pct_better: fraction_better(&g, median_ref)?,
        n_gen: g.len(),
        n_ref: r.len(),
    })
}

pub fn algorithm_of(cohort: &str) -> &str {
    cohort.split(" (").next().unwrap_or(cohort).trim()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlAggregate {
    pub group: String,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

/// Unweighted mean ± sample sd of KL values grouped by `key`.
pub fn aggregate_kl<F: Fn(&CohortComparison) -> String>(
    rows: &[CohortComparison],
    key: F,
) -> Vec<KlAggregate> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry(key(r)).or_default().push(r.kl);
    }
    groups
        .into_iter()
        .map(|(group, v)| {
            let (mean, sd) = mean_sd(&v);
            KlAggregate {
                group,
                mean,
                sd,
                n: v.len(),
            }
        })
        .collect()
}

/// Which reference set supplies the KL column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KlReference {
    #[default]
    Full,
    Hitlike,
}

impl KlReference {
    pub fn cohort(self) -> &'static str {
        match self {
            KlReference::Full => REFERENCE_FULL,
            KlReference::Hitlike => REFERENCE_HITLIKE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table6Row {
    pub experiment: String,
    pub target: String,
    pub median_full: Option<f64>,
    pub median_hitlike: Option<f64>,
    pub pct_better_full: Option<f64>,
    pub pct_better_hitlike: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DockingReport {
    pub kl_reference: KlReference,
    pub comparisons: Vec<CohortComparison>,
    pub by_model: Vec<KlAggregate>,
    pub by_algorithm: Vec<KlAggregate>,
    pub by_target: Vec<KlAggregate>,
    pub table6: Vec<Table6Row>,
}

fn cell(v: Option<f64>, d: usize) -> String {
    v.map_or_else(String::new, |x| format!("{x:.d$}"))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl DockingReport {
    /// Median of the KL reference set and % better, per model and target.
    pub fn table3_csv(&self) -> String {
        let mut out = String::from("Model,Target,Median,% Better\n");
        for c in self
            .comparisons
            .iter()
            .filter(|c| c.ref_cohort == self.kl_reference.cohort())
        {
            out.push_str(&format!(
                "{},{},{:.2},{:.2}\n",
                csv_field(&c.gen_cohort),
                csv_field(&c.target),
                c.median_ref,
                c.pct_better
            ));
        }
        out
    }

    fn kl_csv(first: &str, rows: &[KlAggregate]) -> String {
        let mut out = format!("{first},KL divergence\n");
        for r in rows {
            out.push_str(&format!(
                "{},{:.3} ± {:.3}\n",
                csv_field(&r.group),
                r.mean,
                r.sd
            ));
        }
        out
    }

    pub fn table4a_csv(&self) -> String {
        Self::kl_csv("Model", &self.by_model)
    }

    pub fn table4b_csv(&self) -> String {
        Self::kl_csv("Algorithm", &self.by_algorithm)
    }

    pub fn per_target_kl_csv(&self) -> String {
        Self::kl_csv("Target", &self.by_target)
    }

    pub fn table6_csv(&self) -> String {
        let mut out = String::from("Experiment,Target,Median (Full),Median (Hit-like),% Better (Full),% Better (Hit-like)\n");
        for r in &self.table6 {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&r.experiment),
                csv_field(&r.target),
                cell(r.median_full, 2),
                cell(r.median_hitlike, 2),
                cell(r.pct_better_full, 2),
                cell(r.pct_better_hitlike, 2)
            ));
        }
        out
    }
}

pub fn is_reference(cohort: &str) -> bool {
    cohort == REFERENCE_FULL || cohort == REFERENCE_HITLIKE
}

/// Compares every generated cohort with both reference sets on every
/// target where they are present.
pub fn docking_report(
    records: &[ScoreRecord],
    spec: &HistogramSpec,
    kl_reference: KlReference,
) -> Result<DockingReport, DockingError> {
    let targets: BTreeSet<&str> = records.iter().map(|r| r.target.as_str()).collect();
    let cohorts: BTreeSet<&str> = records
        .iter()
        .map(|r| r.cohort.as_str())
        .filter(|c| !is_reference(c))
        .collect();
    let present: BTreeSet<(&str, &str)> = records
        .iter()
        .map(|r| (r.target.as_str(), r.cohort.as_str()))
        .collect();
    let jobs: Vec<(&str, &str, &str)> = cohorts
        .iter()
        .flat_map(|&c| targets.iter().map(move |&t| (c, t)))
        .filter(|&(c, t)| present.contains(&(t, c)))
        .flat_map(|(c, t)| [REFERENCE_FULL, REFERENCE_HITLIKE].map(|r| (c, t, r)))
        .filter(|&(_, t, r)| present.contains(&(t, r)))
        .collect();
    let comparisons: Vec<CohortComparison> = jobs
        .par_iter()
        .map(|&(c, t, r)| compare_cohorts(records, t, c, r, spec))
        .collect::<Result<_, _>>()?;
    let primary: Vec<CohortComparison> = comparisons
        .iter()
        .filter(|c| c.ref_cohort == kl_reference.cohort())
        .cloned()
        .collect();
    let mut table6 = Vec::new();
    for &c in &cohorts {
        for &t in &targets {
            if !present.contains(&(t, c)) {
                continue;
            }
            let find = |r: &str| {
                comparisons
                    .iter()
                    .find(|x| x.gen_cohort == c && x.target == t && x.ref_cohort == r)
            };
            let (full, hit) = (find(REFERENCE_FULL), find(REFERENCE_HITLIKE));
            table6.push(Table6Row {
                experiment: c.into(),
                target: t.into(),
                median_full: full.map(|x| x.median_ref),
                median_hitlike: hit.map(|x| x.median_ref),
                pct_better_full: full.map(|x| x.pct_better),
                pct_better_hitlike: hit.map(|x| x.pct_better),
            });
        }
    }
    Ok(DockingReport {
        kl_reference,
        by_model: aggregate_kl(&primary, |c| c.gen_cohort.clone()),
        by_algorithm: aggregate_kl(&primary, |c| algorithm_of(&c.gen_cohort).to_string()),
        by_target: aggregate_kl(&primary, |c| c.target.clone()),
        comparisons,
        table6,
    })
}

/// Which scores define the potency cutoff `mean - z·sd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriageStats {
    #[default]
    Candidates,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TriageConfig {
    pub td_min: f64,
    pub z: f64,
    pub max_candidates: Option<usize>,
    pub stats: TriageStats,
}

impl Default for TriageConfig {
    fn default() -> Self {
        TriageConfig {
            td_min: 0.5,
            z: 2.0,
            max_candidates: None,
            stats: TriageStats::Candidates,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub id: String,
    pub fingerprint: Fingerprint,
    pub score: f64,
    pub sa_score: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct KnownBinder {
    pub id: String,
    pub fingerprint: Fingerprint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriageHit {
    pub id: String,
    pub score: f64,
    /// `(cutoff - score) / sd`: how far past the potency cutoff, in sd units.
    pub z_margin: f64,
    pub nearest_binder_id: String,
    pub tanimoto_distance: f64,
    pub sa_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriageResult {
    pub mean: f64,
    pub sd: f64,
    pub cutoff: f64,
    pub hits: Vec<TriageHit>,
}

pub const TRIAGE_HEADER: &str = "id,score,z_margin,nearest_binder_id,tanimoto_distance,sa_score";

impl TriageResult {
    pub fn to_csv(&self) -> String {
        triage_csv(&self.hits)
    }
}

pub fn triage_csv(hits: &[TriageHit]) -> String {
    let mut out = format!("{TRIAGE_HEADER}\n");
    for h in hits {
        out.push_str(&format!(
            "{},{:.4},{:.4},{},{:.4},{}\n",
            csv_field(&h.id),
            h.score,
            h.z_margin,
            csv_field(&h.nearest_binder_id),
            h.tanimoto_distance,
            cell(h.sa_score, 2)
        ));
    }
    out
}

/// Keeps candidates that are both novel (Tanimoto distance to every known
/// binder at least `td_min`) and potent (score strictly below
/// `mean - z·sd`), ranked by ascending score (ties by id).
pub fn triage(
    candidates: &[Candidate],
    known: &[KnownBinder],
    reference_scores: Option<&[f64]>,
    cfg: &TriageConfig,
) -> Result<TriageResult, DockingError> {
    if known.is_empty() {
        return Err(DockingError::EmptyKnownSet);
    }
    let basis: Vec<f64> = match (cfg.stats, reference_scores) {
        (TriageStats::Reference, Some(r)) => r.to_vec(),
        _ => candidates.iter().map(|c| c.score).collect(),
    };
    if basis.len() < 3 {
        return Err(DockingError::TooFewForStats(basis.len()));
    }
    let (mean, sd) = mean_sd(&basis);
    let cutoff = mean - cfg.z * sd;
    let mut hits = Vec::new();
    for c in candidates {
        if c.score.partial_cmp(&cutoff) != Some(std::cmp::Ordering::Less) {
            continue;
        }
        let mut nearest: Option<(&KnownBinder, f64)> = None;
        for k in known {
            let d = 1.0 - tanimoto(&c.fingerprint, &k.fingerprint).map_err(MetricError::from)?;
            if nearest.is_none_or(|(_, best)| d < best) {
                nearest = Some((k, d));
            }
        }
        let (binder, distance) = nearest.expect("known set is non-empty");
        if distance >= cfg.td_min {
            hits.push(TriageHit {
                id: c.id.clone(),
                score: c.score,
                z_margin: if sd > 0.0 {
                    (cutoff - c.score) / sd
                } else {
                    0.0
                },
                nearest_binder_id: binder.id.clone(),
                tanimoto_distance: distance,
                sa_score: c.sa_score,
            });
        }
    }
    hits.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.id.cmp(&b.id)));
    if let Some(k) = cfg.max_candidates {
        hits.truncate(k);
    }
    Ok(TriageResult {
        mean,
        sd,
        cutoff,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs(rows: &[(&str, &str, &str, f64)]) -> Vec<ScoreRecord> {
        rows.iter()
            .map(|&(m, t, c, s)| ScoreRecord {
                molecule_id: m.into(),
                target: t.into(),
                cohort: c.into(),
                score: s,
            })
            .collect()
    }

    #[test]
    fn parse_rules() {
        assert!(parse_scores("molecule_id,target,cohort,score\n".as_bytes())
            .unwrap()
            .is_empty());
        let err =
            parse_scores("molecule_id,target,cohort,score\nm,t,c,NaN\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DockingError::MalformedRow { line: 2, .. }));
        let r =
            parse_scores("molecule_id,target,cohort,score\nm,t,c,-7.1\nm,t,c,-7.9\n".as_bytes())
                .unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].score, -7.9);
        assert!(matches!(
            parse_scores("id,score\n".as_bytes()),
            Err(DockingError::UnknownHeader(_))
        ));
    }

    #[test]
    fn medians_and_fraction() {
        assert_eq!(median(&[-8.0, -7.0, -6.0, -5.0]), Some(-6.5));
        assert_eq!(fraction_better(&[-8.0, -7.0], -7.27).unwrap(), 50.0);
        assert_eq!(fraction_better(&[-7.27, -7.27], -7.27).unwrap(), 0.0);
        assert!(fraction_better(&[], -7.0).is_err());
        let r = recs(&[("a", "GSK3B", REFERENCE_FULL, -7.27)]);
        assert_eq!(
            summarize(&r, "GSK3B", REFERENCE_FULL).unwrap().median,
            -7.27
        );
    }

    #[test]
    fn self_comparison_and_aggregation() {
        let mut rows = Vec::new();
        for (i, s) in [-7.0, -6.0, -8.5, -7.7].iter().enumerate() {
            let id = format!("m{i}");
            for t in ["T1", "T2"] {
                rows.push((id.clone(), t, REFERENCE_FULL, *s));
                rows.push((id.clone(), t, "A (x)", *s));
                rows.push((id.clone(), t, "A (y)", *s + 1.0));
            }
        }
        let r: Vec<ScoreRecord> = rows
            .iter()
            .map(|(m, t, c, s)| ScoreRecord {
                molecule_id: m.clone(),
                target: t.to_string(),
                cohort: c.to_string(),
                score: *s,
            })
            .collect();
        let c =
            compare_cohorts(&r, "T1", "A (x)", REFERENCE_FULL, &HistogramSpec::default()).unwrap();
        assert!(c.kl < 1e-9);
        let rep = docking_report(&r, &HistogramSpec::default(), KlReference::Full).unwrap();
        assert_eq!(rep.by_algorithm.len(), 1);
        assert_eq!(rep.by_algorithm[0].n, 4);
        assert!(rep
            .table6_csv()
            .starts_with("Experiment,Target,Median (Full),Median (Hit-like)"));
    }
}
