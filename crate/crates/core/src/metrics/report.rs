use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use super::{
    builtin_features, fit_gaussian, frechet_with_diagnostics, frequency_cosine,
    internal_diversity_with, snn, vun, DiversityPairs, FeatureSet, MetricError, VunReport,
};
use crate::chem::{check_validity, Molecule};
use crate::descriptors::{
    bemis_murcko_scaffold, brics_fragments, default_fingerprint, Fingerprint,
};
use crate::hitfilter::HitFilter;
use crate::smiles::parse_smiles;

pub const TABLE1_COLUMNS: [&str; 8] = [
    "Valid", "VUN", "Filters", "FCD", "Frag.", "Scaff.", "SNN", "Div.",
];

pub struct MetricsInputs<'a> {
    pub generated: Vec<String>,
    pub reference: Vec<String>,
    pub training_keys: HashSet<String>,
    /// Precomputed features; used for both sets when both are given.
    pub gen_features: Option<FeatureSet>,
    pub ref_features: Option<FeatureSet>,
    pub builtin_featurizer: bool,
    pub diversity: DiversityPairs,
    pub filter: &'a HitFilter<'a>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    #[serde(rename = "Valid")]
    pub valid: f64,
    #[serde(rename = "VUN")]
    pub vun: f64,
    #[serde(rename = "Filters")]
    pub filters: Option<f64>,
    #[serde(rename = "FCD")]
    pub fcd: Option<f64>,
    #[serde(rename = "Frag.")]
    pub frag: Option<f64>,
    #[serde(rename = "Scaff.")]
    pub scaff: Option<f64>,
    #[serde(rename = "SNN")]
    pub snn: Option<f64>,
    #[serde(rename = "Div.")]
    pub div: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub table: Table1Row,
    /// Which feature map fed the FCD column.
    pub fcd_featurizer: String,
    pub fcd_clamped_eigenvalue: Option<f64>,
    pub similarity_form: &'static str,
    pub diversity_pairs: DiversityPairs,
    pub vun: VunReport,
    pub n_reference_valid: usize,
    pub n_reference_invalid: usize,
    pub n_featurize_failed: usize,
    pub warnings: Vec<String>,
}

impl MetricsReport {
    pub fn to_csv(&self) -> String {
        let t = &self.table;
        let o = |v: Option<f64>, d: usize| v.map_or_else(String::new, |x| format!("{x:.d$}"));
        format!(
            "{}\n{:.2},{:.2},{},{},{},{},{},{}\n",
            TABLE1_COLUMNS.join(","),
            t.valid,
            t.vun,
            o(t.filters, 2),
            o(t.fcd, 3),
            o(t.frag, 3),
            o(t.scaff, 3),
            o(t.snn, 3),
            o(t.div, 3)
        )
    }
}

fn valid_molecules(smiles: &[String]) -> Vec<Option<Molecule>> {
    smiles
        .par_iter()
        .map(|s| parse_smiles(s).ok().filter(|m| check_validity(m).valid))
        .collect()
}

fn multiset<I: IntoIterator<Item = String>>(keys: I) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

fn fragment_multiset(mols: &[&Molecule]) -> BTreeMap<String, usize> {
    let per: Vec<BTreeMap<String, usize>> = mols
        .par_iter()
        .map(|m| brics_fragments(m).fragments)
        .collect();
    let mut out = BTreeMap::new();
    for f in per {
        for (k, c) in f {
            *out.entry(k).or_insert(0) += c;
        }
    }
    out
}

fn scaffold_multiset(mols: &[&Molecule]) -> BTreeMap<String, usize> {
    multiset(
        mols.par_iter()
            .map(|m| bemis_murcko_scaffold(m).canonical_key)
            .collect::<Vec<_>>(),
    )
}

pub fn evaluate_sets(inputs: &MetricsInputs) -> Result<MetricsReport, MetricError> {
    let mut warnings = Vec::new();
    let vun_report = vun(&inputs.generated, &inputs.training_keys);
    let gen_all = valid_molecules(&inputs.generated);
    let gen: Vec<&Molecule> = gen_all.iter().flatten().collect();
    let ref_all = valid_molecules(&inputs.reference);
    let reference: Vec<&Molecule> = ref_all.iter().flatten().collect();
    let n_reference_invalid = ref_all.len() - reference.len();
    if n_reference_invalid > 0 {
        warnings.push(format!(
            "{n_reference_invalid} reference molecules are invalid and were skipped"
        ));
    }

    let filters = (!gen.is_empty()).then(|| {
        let passed = gen
            .par_iter()
            .filter(|m| inputs.filter.apply("", m, None).all_pass)
            .count();
        100.0 * passed as f64 / gen.len() as f64
    });

    let gen_fps: Vec<Fingerprint> = gen.par_iter().map(|m| default_fingerprint(m)).collect();
    let ref_fps: Vec<Fingerprint> = reference
        .par_iter()
        .map(|m| default_fingerprint(m))
        .collect();
    let div = match internal_diversity_with(&gen_fps, inputs.diversity) {
        Ok(d) => Some(d),
        Err(MetricError::TooFewSamples { .. }) => None,
        Err(e) => return Err(e),
    };
    let snn_value = match snn(&gen_fps, &ref_fps) {
        Ok(v) => Some(v),
        Err(MetricError::EmptySet) => None,
        Err(e) => return Err(e),
    };
    let have_both = !gen.is_empty() && !reference.is_empty();
    let frag = have_both
        .then(|| frequency_cosine(&fragment_multiset(&gen), &fragment_multiset(&reference)));
    let scaff = have_both
        .then(|| frequency_cosine(&scaffold_multiset(&gen), &scaffold_multiset(&reference)));

    let mut n_featurize_failed = 0;
    let (features, fcd_featurizer) = match (&inputs.gen_features, &inputs.ref_features) {
        (Some(g), Some(r)) => (
            Some((g.rows.clone(), r.rows.clone())),
            "user-features".to_string(),
        ),
        _ if inputs.builtin_featurizer => {
            let table = inputs.filter.sa_table;
            let featurize = |mols: &[&Molecule]| -> (Vec<Vec<f64>>, usize) {
                let rows: Vec<Option<Vec<f64>>> = mols
                    .par_iter()
                    .map(|m| builtin_features(m, table).ok())
                    .collect();
                let failed = rows.iter().filter(|r| r.is_none()).count();
                (rows.into_iter().flatten().collect(), failed)
            };
            let (g, fg) = featurize(&gen);
            let (r, fr) = featurize(&reference);
            n_featurize_failed = fg + fr;
            (Some((g, r)), "builtin-physchem-10d".to_string())
        }
        _ => {
            warnings.push("FCD skipped: no feature files and built-in featurizer disabled".into());
            (None, "none".to_string())
        }
    };
    let (fcd, fcd_clamped_eigenvalue) = match features {
        Some((g, r)) => match (fit_gaussian(&g), fit_gaussian(&r)) {
            (Ok(gg), Ok(rr)) => {
                let res = frechet_with_diagnostics(&gg, &rr)?;
                (Some(res.distance), Some(res.clamped))
            }
            (Err(e), _) | (_, Err(e)) => {
                warnings.push(format!("FCD skipped: {e}"));
                (None, None)
            }
        },
        None => (None, None),
    };

    Ok(MetricsReport {
        table: Table1Row {
            valid: vun_report.valid_pct,
            vun: vun_report.vun_pct,
            filters,
            fcd,
            frag,
            scaff,
            snn: snn_value,
            div,
        },
        fcd_featurizer,
        fcd_clamped_eigenvalue,
        similarity_form: "cosine over fragment and scaffold counts",
        diversity_pairs: inputs.diversity,
        vun: vun_report,
        n_reference_valid: reference.len(),
        n_reference_invalid,
        n_featurize_failed,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::canonical_key;

    #[test]
    fn self_comparison() {
        let set: Vec<String> = [
            "CC(=O)Nc1ccc(O)cc1",
            "c1ccccc1CCN",
            "OC(=O)c1ccccc1O",
            "CCOC(=O)c1ccccc1",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let filter = HitFilter::with_defaults();
        let inputs = MetricsInputs {
            generated: set.clone(),
            reference: set.clone(),
            training_keys: set.iter().filter_map(|s| canonical_key(s)).collect(),
            gen_features: None,
            ref_features: None,
            builtin_featurizer: true,
            diversity: DiversityPairs::Distinct,
            filter: &filter,
        };
        let r = evaluate_sets(&inputs).unwrap();
        assert_eq!(r.table.valid, 100.0);
        assert_eq!(r.table.vun, 0.0);
        assert_eq!(r.table.snn, Some(1.0));
        assert!(r.table.fcd.unwrap() < 1e-6);
        assert!((r.table.frag.unwrap() - 1.0).abs() < 1e-12);
        assert!(r
            .to_csv()
            .starts_with("Valid,VUN,Filters,FCD,Frag.,Scaff.,SNN,Div.\n"));
    }
}
