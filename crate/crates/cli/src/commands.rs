//! Command implementations. Each command computes all of its reports in
//! memory, then commits them together with the run manifest.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use anyhow::{bail, Context, Result};
use hitgate::chem::check_validity;
use hitgate::descriptors::{default_fingerprint, sa_score, FragmentTable};
use hitgate::docking::{
    docking_report, is_reference, load_scores, scores_for, triage, Candidate, KnownBinder,
    TriageResult, REFERENCE_FULL, REFERENCE_HITLIKE, TRIAGE_HEADER,
};
use hitgate::hitfilter::{filter_dataset, HitFilter, TABLE_HEADER};
use hitgate::io::{open_text, read_smiles_file, smiles_records, SmilesRecord};
use hitgate::metrics::{evaluate_sets, read_features, vun, MetricsInputs};
use hitgate::patterns::AlertCatalog;
use hitgate::smiles::{canonical_key, canonicalize, parse_smiles};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, Overrides, RunConfig};
use crate::output::{file_digest, InputDigest, RunManifest, Staged};
use crate::plots::{histogram_svg, violin_svg};
use crate::{Cli, Command};

/// Malformed content in an input file.
#[derive(Debug)]
pub struct ParseFailure(pub String);

impl std::fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseFailure {}

fn overrides(cli: &Cli) -> Result<Overrides> {
    let mut o = Overrides::default();
    for s in &cli.common.set {
        o.parse_assignment(s)?;
    }
    match &cli.command {
        Command::Metrics {
            no_builtin_features,
            include_self_pairs,
            ..
        } => {
            if *no_builtin_features {
                o.set("metrics.builtin_featurizer", false);
            }
            if *include_self_pairs {
                o.set("metrics.diversity_pairs", "include-self");
            }
        }
        Command::Docking {
            kl_reference, bins, ..
        } => {
            if let Some(k) = kl_reference {
                o.set(
                    "docking.kl_reference",
                    if matches!(k, crate::KlRefArg::Full) {
                        "full"
                    } else {
                        "hitlike"
                    },
                );
            }
            if let Some(b) = bins {
                o.set("docking.histogram.bins", *b as i64);
            }
        }
        Command::Triage {
            stats,
            td_min,
            z,
            max_candidates,
            ..
        } => {
            if let Some(s) = stats {
                o.set(
                    "triage.stats",
                    if matches!(s, crate::StatsArg::Reference) {
                        "reference"
                    } else {
                        "candidates"
                    },
                );
            }
            if let Some(t) = td_min {
                o.set("triage.td_min", *t);
            }
            if let Some(z) = z {
                o.set("triage.z", *z);
            }
            if let Some(m) = max_candidates {
                o.set("triage.max_candidates", *m as i64);
            }
        }
        _ => {}
    }
    Ok(o)
}

fn inputs(pairs: &[(&str, &Path)]) -> Result<Vec<InputDigest>> {
    pairs
        .iter()
        .map(|(role, p)| {
            Ok(InputDigest {
                role: role.to_string(),
                path: p.display().to_string(),
                sha256: file_digest(p)?,
            })
        })
        .collect()
}

fn snapshot(cli: &Cli, sections: serde_json::Value) -> serde_json::Value {
    json!({
        "settings": sections,
        "explain": cli.common.explain,
        "largest_fragment": cli.common.largest_fragment,
        "data_dir": std::env::var("HITGATE_DATA_DIR").ok(),
    })
}

fn with_digest<T: Serialize>(digest: &str, body: &T) -> serde_json::Value {
    json!({ "run_digest": digest, "report": body })
}

fn normalize(smiles: &str, largest_fragment: bool) -> String {
    if !largest_fragment {
        return smiles.to_string();
    }
    match parse_smiles(smiles) {
        Ok(m) => canonicalize(&m.largest_fragment())
            .map(|c| c.text)
            .unwrap_or_else(|_| smiles.to_string()),
        Err(_) => smiles.to_string(),
    }
}

fn read_records(path: &Path) -> Result<Vec<SmilesRecord>> {
    read_smiles_file(path).with_context(|| format!("reading {}", path.display()))
}

fn training_keys(path: Option<&Path>, largest_fragment: bool) -> Result<HashSet<String>> {
    let Some(path) = path else {
        return Ok(HashSet::new());
    };
    let recs = read_records(path)?;
    Ok(recs
        .par_iter()
        .filter_map(|r| canonical_key(&normalize(&r.smiles, largest_fragment)))
        .collect())
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = config::load(cli.common.config.as_deref(), &overrides(cli)?)?;
    let out = cli.common.out_dir.as_path();
    match &cli.command {
        Command::Validate { input, training } => validate(cli, input, training.as_deref(), out),
        Command::Filter { input } => filter(cli, &cfg, input, out),
        Command::Metrics {
            generated,
            reference,
            training,
            gen_features,
            ref_features,
            ..
        } => metrics(
            cli,
            &cfg,
            generated,
            reference,
            training.as_deref(),
            gen_features.as_deref().zip(ref_features.as_deref()),
            out,
        ),
        Command::Docking { scores, .. } => docking(cli, &cfg, scores, out),
        Command::Triage {
            candidates,
            binders,
            scores,
            target,
            cohort,
            reference_cohort,
            activities,
            highlight_value,
            highlight_label,
            ..
        } => triage_cmd(
            cli,
            &cfg,
            TriageArgs {
                candidates,
                binders,
                scores,
                target: target.as_deref(),
                cohort: cohort.as_deref(),
                reference_cohort,
                activities: activities.as_deref(),
                highlight: highlight_value.map(|v| (highlight_label.as_str(), v)),
            },
            out,
        ),
    }
}

#[derive(Serialize)]
struct ValidityLine<'a> {
    line: usize,
    id: &'a str,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    canonical: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

fn validate(cli: &Cli, input: &Path, training: Option<&Path>, out: &Path) -> Result<()> {
    let lf = cli.common.largest_fragment;
    let mut roles = vec![("input", input)];
    if let Some(t) = training {
        roles.push(("training", t));
    }
    let manifest = RunManifest::new("validate", snapshot(cli, json!({})), inputs(&roles)?);
    let records = read_records(input)?;
    let smiles: Vec<String> = records
        .par_iter()
        .map(|r| normalize(&r.smiles, lf))
        .collect();
    let report = vun(&smiles, &training_keys(training, lf)?);

    let checks: Vec<(Option<String>, Option<String>)> = smiles
        .par_iter()
        .map(|s| match parse_smiles(s) {
            Err(e) => (None, Some(e.to_string())),
            Ok(m) => {
                let v = check_validity(&m);
                if v.valid {
                    (canonicalize(&m).ok().map(|c| c.text), None)
                } else {
                    let (atom, why) = &v.violations[0];
                    (None, Some(format!("atom {atom}: {why}")))
                }
            }
        })
        .collect();
    let mut rejects = String::from("line\tid\treason\n");
    let mut explain = String::new();
    for (r, (canonical, reason)) in records.iter().zip(checks) {
        if let Some(why) = &reason {
            rejects.push_str(&format!("{}\t{}\t{}\n", r.line, r.id, why));
        }
        if cli.common.explain {
            let line = ValidityLine {
                line: r.line,
                id: &r.id,
                valid: reason.is_none(),
                canonical,
                reason,
            };
            explain.push_str(&serde_json::to_string(&line)?);
            explain.push('\n');
        }
    }
    let mut staged = Staged::default();
    staged.add_json("vun.json", &with_digest(&manifest.run_digest, &report));
    staged.add("rejects.tsv", rejects);
    if cli.common.explain {
        staged.add("validity.jsonl", explain);
    }
    staged.commit(out, manifest)?;
    Ok(())
}

#[derive(Serialize)]
struct OutcomeLine<'a> {
    id: &'a str,
    pass: bool,
    failed: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measured: Option<&'a [hitgate::hitfilter::CriterionRecord]>,
}

fn filter(cli: &Cli, cfg: &RunConfig, input: &Path, out: &Path) -> Result<()> {
    let manifest = RunManifest::new(
        "filter",
        snapshot(cli, json!({ "filter": cfg.filter })),
        inputs(&[("input", input)])?,
    );
    let catalog = AlertCatalog::load_default().context("loading alert catalog")?;
    let sa_table = FragmentTable::bundled();
    let hf = HitFilter::new(cfg.filter.clone(), &catalog, sa_table);
    let reader = open_text(input)?;
    let report = filter_dataset(smiles_records(reader), &hf, cli.common.largest_fragment)
        .with_context(|| format!("filtering {}", input.display()))?;

    let mut passing = String::new();
    for p in &report.passing {
        passing.push_str(&format!("{}\t{}\n", p.smiles, p.id));
    }
    let table_csv = match &report.table {
        Some(t) => t.to_csv(),
        None => {
            log::warn!("no valid molecules; failure table is empty");
            format!("{TABLE_HEADER}\n")
        }
    };
    let mut outcomes = String::new();
    for o in &report.outcomes {
        let line = OutcomeLine {
            id: &o.molecule_id,
            pass: o.all_pass,
            failed: o.failed().iter().map(|c| c.label()).collect(),
            measured: cli.common.explain.then_some(o.records.as_slice()),
        };
        outcomes.push_str(&serde_json::to_string(&line)?);
        outcomes.push('\n');
    }
    let summary = json!({
        "records_read": report.records_read,
        "invalid": report.invalid.len(),
        "evaluated": report.outcomes.len(),
        "passing": report.passing.len(),
        "failure_table": report.table,
    });
    let mut staged = Staged::default();
    staged.add("passing.smi", passing);
    staged.add("failure_table.csv", table_csv);
    staged.add_json(
        "failure_table.json",
        &with_digest(&manifest.run_digest, &summary),
    );
    staged.add("rejects.tsv", report.rejects_tsv());
    staged.add("outcomes.jsonl", outcomes);
    staged.commit(out, manifest)?;
    Ok(())
}

fn metrics(
    cli: &Cli,
    cfg: &RunConfig,
    generated: &Path,
    reference: &Path,
    training: Option<&Path>,
    features: Option<(&Path, &Path)>,
    out: &Path,
) -> Result<()> {
    let lf = cli.common.largest_fragment;
    let mut roles = vec![("generated", generated), ("reference", reference)];
    if let Some(t) = training {
        roles.push(("training", t));
    }
    if let Some((g, r)) = features {
        roles.push(("generated_features", g));
        roles.push(("reference_features", r));
    }
    let manifest = RunManifest::new(
        "metrics",
        snapshot(cli, json!({ "metrics": cfg.metrics, "filter": cfg.filter })),
        inputs(&roles)?,
    );
    let load = |p: &Path| -> Result<Vec<String>> {
        Ok(read_records(p)?
            .par_iter()
            .map(|r| normalize(&r.smiles, lf))
            .collect())
    };
    let (gen_features, ref_features) = match features {
        Some((g, r)) => (Some(read_features(g)?), Some(read_features(r)?)),
        None => (None, None),
    };
    let catalog = AlertCatalog::load_default().context("loading alert catalog")?;
    let hf = HitFilter::new(cfg.filter.clone(), &catalog, FragmentTable::bundled());
    let report = evaluate_sets(&MetricsInputs {
        generated: load(generated)?,
        reference: load(reference)?,
        training_keys: training_keys(training, lf)?,
        gen_features,
        ref_features,
        builtin_featurizer: cfg.metrics.builtin_featurizer,
        diversity: cfg.metrics.diversity_pairs,
        filter: &hf,
    })?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let mut staged = Staged::default();
    staged.add_json("metrics.json", &with_digest(&manifest.run_digest, &report));
    staged.add("metrics.csv", report.to_csv());
    staged.commit(out, manifest)?;
    Ok(())
}

fn slug(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    while out.contains("__") {
        out = out.replace("__", "_");
    }
    out.trim_matches('_').to_string()
}

fn docking(cli: &Cli, cfg: &RunConfig, scores: &Path, out: &Path) -> Result<()> {
    let manifest = RunManifest::new(
        "docking",
        snapshot(cli, json!({ "docking": cfg.docking })),
        inputs(&[("scores", scores)])?,
    );
    let records = load_scores(scores)?;
    let report = docking_report(&records, &cfg.docking.histogram, cfg.docking.kl_reference)?;
    let mut staged = Staged::default();
    staged.add("table3.csv", report.table3_csv());
    staged.add("table4a.csv", report.table4a_csv());
    staged.add("table4b.csv", report.table4b_csv());
    staged.add("per_target_kl.csv", report.per_target_kl_csv());
    staged.add("table6.csv", report.table6_csv());
    staged.add_json("docking.json", &with_digest(&manifest.run_digest, &report));

    let pairs: BTreeSet<(&str, &str)> = records
        .iter()
        .filter(|r| !is_reference(&r.cohort))
        .map(|r| (r.target.as_str(), r.cohort.as_str()))
        .collect();
    for (target, cohort) in pairs {
        let gen = scores_for(&records, target, cohort);
        let full = scores_for(&records, target, REFERENCE_FULL);
        let hit = scores_for(&records, target, REFERENCE_HITLIKE);
        let mut series: Vec<(&str, &[f64])> = vec![(cohort, &gen)];
        if !full.is_empty() {
            series.push((REFERENCE_FULL, &full));
        }
        if !hit.is_empty() {
            series.push((REFERENCE_HITLIKE, &hit));
        }
        let svg = histogram_svg(
            &format!("{target}: {cohort}"),
            "docking score",
            &series,
            cfg.docking.histogram.bins,
            &manifest.run_digest,
        );
        staged.add(
            format!("plots/hist_{}_{}.svg", slug(target), slug(cohort)),
            svg,
        );
    }
    staged.commit(out, manifest)?;
    Ok(())
}

struct TriageArgs<'a> {
    candidates: &'a Path,
    binders: &'a Path,
    scores: &'a Path,
    target: Option<&'a str>,
    cohort: Option<&'a str>,
    reference_cohort: &'a str,
    activities: Option<&'a Path>,
    highlight: Option<(&'a str, f64)>,
}

fn read_activity_values(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| ParseFailure(format!("{}: {e}", path.display())))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h == "value")
        .ok_or_else(|| ParseFailure(format!("{}: no `value` column", path.display())))?;
    let mut values = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| ParseFailure(format!("{}: {e}", path.display())))?;
        let cell = row.get(col).unwrap_or("");
        let v: f64 = cell.parse().map_err(|_| {
            ParseFailure(format!(
                "{} line {}: bad value {cell:?}",
                path.display(),
                i + 2
            ))
        })?;
        values.push(v);
    }
    Ok(values)
}

fn triage_cmd(cli: &Cli, cfg: &RunConfig, a: TriageArgs, out: &Path) -> Result<()> {
    let lf = cli.common.largest_fragment;
    let mut roles = vec![
        ("candidates", a.candidates),
        ("binders", a.binders),
        ("scores", a.scores),
    ];
    if let Some(p) = a.activities {
        roles.push(("activities", p));
    }
    let manifest = RunManifest::new(
        "triage",
        snapshot(
            cli,
            json!({
                "triage": cfg.triage,
                "target": a.target,
                "cohort": a.cohort,
                "reference_cohort": a.reference_cohort,
                "highlight": a.highlight,
            }),
        ),
        inputs(&roles)?,
    );
    let records = load_scores(a.scores)?;
    let targets: BTreeSet<&str> = records.iter().map(|r| r.target.as_str()).collect();
    let target = match a.target {
        Some(t) => t,
        None if targets.len() <= 1 => targets.iter().next().copied().unwrap_or(""),
        None => bail!(crate::config::ConfigError(format!(
            "scores cover {} targets; choose one with --target",
            targets.len()
        ))),
    };
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.target == target && !is_reference(&r.cohort))
    {
        if a.cohort.is_some_and(|c| c != r.cohort) {
            continue;
        }
        let e = best.entry(r.molecule_id.as_str()).or_insert(f64::INFINITY);
        *e = e.min(r.score);
    }

    let table = FragmentTable::bundled();
    let mut skipped: Vec<String> = Vec::new();
    let cand_recs = read_records(a.candidates)?;
    let prepared: Vec<std::result::Result<Candidate, String>> = cand_recs
        .par_iter()
        .map(|r| {
            let Some(&score) = best.get(r.id.as_str()) else {
                return Err(format!("{}: no score for target {target:?}", r.id));
            };
            let mol = parse_smiles(&r.smiles).map_err(|e| format!("{}: {e}", r.id))?;
            let mol = if lf { mol.largest_fragment() } else { mol };
            if !check_validity(&mol).valid {
                return Err(format!("{}: invalid molecule", r.id));
            }
            Ok(Candidate {
                id: r.id.clone(),
                fingerprint: default_fingerprint(&mol),
                score,
                sa_score: sa_score(&mol, table).ok(),
            })
        })
        .collect();
    let mut candidates = Vec::new();
    for p in prepared {
        match p {
            Ok(c) => candidates.push(c),
            Err(why) => skipped.push(why),
        }
    }
    let known: Vec<KnownBinder> = read_records(a.binders)?
        .iter()
        .filter_map(|r| {
            let mol = parse_smiles(&r.smiles).ok()?;
            let mol = if lf { mol.largest_fragment() } else { mol };
            check_validity(&mol).valid.then(|| KnownBinder {
                id: r.id.clone(),
                fingerprint: default_fingerprint(&mol),
            })
        })
        .collect();
    for s in &skipped {
        log::warn!("skipped candidate {s}");
    }

    let reference = scores_for(&records, target, a.reference_cohort);
    let result = if candidates.is_empty() {
        None
    } else {
        Some(triage(&candidates, &known, Some(&reference), &cfg.triage)?)
    };
    let csv = result
        .as_ref()
        .map_or_else(|| format!("{TRIAGE_HEADER}\n"), TriageResult::to_csv);

    let mut staged = Staged::default();
    staged.add("triage.csv", csv);
    staged.add_json(
        "triage.json",
        &with_digest(
            &manifest.run_digest,
            &json!({
                "target": target,
                "candidates_scored": candidates.len(),
                "known_binders": known.len(),
                "skipped": skipped,
                "result": result,
            }),
        ),
    );
    if let Some(p) = a.activities {
        let values = read_activity_values(p)?;
        let svg = violin_svg(
            "Reference activity distribution",
            "activity",
            &values,
            a.highlight,
            &manifest.run_digest,
        );
        staged.add("plots/activity.svg", svg);
    }
    staged.commit(out, manifest)?;
    Ok(())
}
