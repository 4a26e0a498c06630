use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

use crate::smiles::canonical_key;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VunReport {
    pub n_generated: usize,
    pub n_valid: usize,
    pub n_unique: usize,
    pub n_novel: usize,
    pub valid_pct: f64,
    /// Percentage of valid molecules with distinct canonical keys.
    pub unique_pct: f64,
    /// Percentage of unique valid molecules absent from training.
    pub novel_pct: f64,
    /// Valid, unique and novel over everything generated.
    pub vun_pct: f64,
}

fn pct(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        100.0 * a as f64 / b as f64
    }
}

/// `training_keys` must hold canonical keys as produced by [`canonical_key`].
pub fn vun(generated: &[String], training_keys: &HashSet<String>) -> VunReport {
    let keys: Vec<Option<String>> = {
        use rayon::prelude::*;
        generated.par_iter().map(|s| canonical_key(s)).collect()
    };
    let valid: Vec<&String> = keys.iter().flatten().collect();
    let unique: BTreeSet<&String> = valid.iter().copied().collect();
    let novel = unique
        .iter()
        .filter(|k| !training_keys.contains(k.as_str()))
        .count();
    VunReport {
        n_generated: generated.len(),
        n_valid: valid.len(),
        n_unique: unique.len(),
        n_novel: novel,
        valid_pct: pct(valid.len(), generated.len()),
        unique_pct: pct(unique.len(), valid.len()),
        novel_pct: pct(novel, unique.len()),
        vun_pct: pct(novel, generated.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn duplicate_spellings() {
        let r = vun(&s(&["CCO", "OCC"]), &HashSet::new());
        assert_eq!(
            (r.valid_pct, r.unique_pct, r.novel_pct, r.vun_pct),
            (100.0, 50.0, 100.0, 50.0)
        );
    }

    #[test]
    fn invalid_and_known() {
        let r = vun(&s(&["C1CC", "X"]), &HashSet::new());
        assert_eq!((r.valid_pct, r.vun_pct), (0.0, 0.0));
        let train: HashSet<String> = ["CCO", "c1ccccc1"]
            .iter()
            .map(|k| canonical_key(k).unwrap())
            .collect();
        let r = vun(&s(&["OCC", "c1ccccc1"]), &train);
        assert_eq!(r.novel_pct, 0.0);
    }
}
