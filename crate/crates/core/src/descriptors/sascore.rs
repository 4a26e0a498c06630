//! Synthetic accessibility score (Ertl–Schuffenhauer form).
//!
//! ```text
//! score1 = Σ_env fragment_score(env) · count(env) / Σ count     (unknown env: -4)
//! score2 = -(n^1.005 - n) - log10(n_chiral + 1) - log10(n_spiro + 1)
//!          - log10(n_bridgehead + 1) - [any ring > 8] · log10(2)
//! score3 = 0.5 · ln(n / n_distinct_env)   if n > n_distinct_env, else 0
//! raw    = score1 + score2 + score3
//! sa     = 11 - (raw + 4 + 1) / 6.5 · 9
//! sa     = 8 + ln(sa - 8)                  if sa > 8
//! clamp to [1, 10]
//! ```
//!
//! `n` is the heavy-atom count. Environments are radius-0..2 Morgan
//! identifiers, keeping only the first environment for each distinct bond
//! set. Fragment scores come from a table of `ln(count / c80)` values where
//! `c80` is the count at which the most frequent environments cover 80% of
//! all occurrences in a reference corpus ([`build_fragment_table`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use once_cell::sync::Lazy;
use serde::Serialize;

use super::morgan::fnv1a64;
use super::ringstats::spiro_and_bridgehead_counts;
use super::DescriptorError;
use crate::chem::{BondOrder, Element, Molecule};
use crate::data::{asset_text, parse_tsv_numbered, DataError};
use crate::smiles::symmetry_classes;

const SA_TSV: &str = include_str!("../../data/sa_fragments.tsv");
pub const UNKNOWN_FRAGMENT_SCORE: f64 = -4.0;
const SA_RADIUS: usize = 2;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FragmentTable {
    pub scores: HashMap<u64, f64>,
}

static BUNDLED: Lazy<FragmentTable> = Lazy::new(|| {
    FragmentTable::parse(&asset_text("sa_fragments.tsv", SA_TSV)).unwrap_or_else(|e| {
        log::warn!("{e}; SA fragment table unavailable");
        FragmentTable::default()
    })
});

impl FragmentTable {
    pub fn bundled() -> &'static FragmentTable {
        &BUNDLED
    }

    pub fn parse(text: &str) -> Result<FragmentTable, DataError> {
        let malformed = |line, message: String| DataError::Malformed {
            asset: "sa_fragments.tsv".into(),
            line,
            message,
        };
        let mut scores = HashMap::new();
        for (line, row) in parse_tsv_numbered(text) {
            if row.len() < 2 {
                return Err(malformed(line, "expected id and score".into()));
            }
            let id = row[0]
                .parse()
                .map_err(|_| malformed(line, format!("bad id {:?}", row[0])))?;
            let score = row[1]
                .parse()
                .map_err(|_| malformed(line, format!("bad score {:?}", row[1])))?;
            scores.insert(id, score);
        }
        Ok(FragmentTable { scores })
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(&u64, &f64)> = self.scores.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        let mut out = String::from("# environment_id\tscore\n");
        for (id, s) in rows {
            writeln!(out, "{id}\t{s:.4}").unwrap();
        }
        out
    }
}

/// Environment identifier counts with duplicate bond sets removed.
pub fn sa_environments(mol: &Molecule) -> BTreeMap<u64, usize> {
    let n = mol.atom_count();
    let mut counts = BTreeMap::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let a = &mol.atoms[i];
            fnv1a64(&[
                a.element.atomic_number(),
                a.formal_charge as u8,
                mol.degree(i).min(255) as u8,
                a.total_h(),
                u8::from(mol.atom_in_ring(i)),
                u8::from(a.aromatic),
            ])
        })
        .collect();
    for &id in &ids {
        *counts.entry(id).or_insert(0) += 1;
    }
    let mut env: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut active = vec![true; n];
    for r in 1..=SA_RADIUS {
        let mut next_ids = ids.clone();
        let mut next_env = env.clone();
        for i in 0..n {
            let mut nb: Vec<(u8, u64)> = Vec::new();
            for &(j, b) in mol.neighbors(i) {
                nb.push((mol.bonds[b].order.code(), ids[j]));
                next_env[i].insert(b);
                next_env[i].extend(env[j].iter().copied());
            }
            nb.sort_unstable();
            let mut bytes = Vec::with_capacity(9 + nb.len() * 9);
            bytes.extend_from_slice(&ids[i].to_le_bytes());
            bytes.push(r as u8);
            for (code, id) in nb {
                bytes.push(code);
                bytes.extend_from_slice(&id.to_le_bytes());
            }
            next_ids[i] = fnv1a64(&bytes);
        }
        let mut candidates: Vec<(Vec<usize>, u64, usize)> = Vec::new();
        for i in 0..n {
            if !active[i] || next_env[i].is_empty() || next_env[i] == env[i] {
                active[i] = false;
                continue;
            }
            candidates.push((next_env[i].iter().copied().collect(), next_ids[i], i));
        }
        candidates.sort();
        for (bonds, id, _) in candidates {
            if seen.insert(bonds) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        ids = next_ids;
        env = next_env;
    }
    counts
}

/// Potential stereocenters: marked chiral atoms plus sp3 atoms with four
/// connections, at most one hydrogen and pairwise distinct neighbors.
pub fn chiral_center_count(mol: &Molecule) -> usize {
    let classes = symmetry_classes(mol);
    (0..mol.atom_count())
        .filter(|&i| {
            let a = &mol.atoms[i];
            if a.chirality.is_some() {
                return true;
            }
            let nb = mol.neighbors(i);
            if nb.len() + a.total_h() as usize != 4 || a.total_h() > 1 {
                return false;
            }
            if nb
                .iter()
                .any(|&(_, b)| mol.bonds[b].order != BondOrder::Single)
            {
                return false;
            }
            let distinct: BTreeSet<usize> = nb.iter().map(|&(j, _)| classes[j]).collect();
            distinct.len() == nb.len()
        })
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaBreakdown {
    pub fragment_score: f64,
    pub size_penalty: f64,
    pub stereo_penalty: f64,
    pub spiro_penalty: f64,
    pub bridge_penalty: f64,
    pub macrocycle_penalty: f64,
    pub symmetry_correction: f64,
    pub raw: f64,
    pub score: f64,
}

pub fn rescale(raw: f64) -> f64 {
    let (lo, hi) = (-4.0, 2.5);
    let mut s = 11.0 - (raw - lo + 1.0) / (hi - lo) * 9.0;
    if s > 8.0 {
        s = 8.0 + (s - 8.0).ln();
    }
    s.clamp(1.0, 10.0)
}

pub fn sa_breakdown(mol: &Molecule, table: &FragmentTable) -> Result<SaBreakdown, DescriptorError> {
    if table.is_empty() {
        return Err(DescriptorError::MissingFragmentTable);
    }
    let envs = sa_environments(mol);
    let total: usize = envs.values().sum();
    let fragment_score = if total == 0 {
        0.0
    } else {
        envs.iter()
            .map(|(id, &c)| {
                table
                    .scores
                    .get(id)
                    .copied()
                    .unwrap_or(UNKNOWN_FRAGMENT_SCORE)
                    * c as f64
            })
            .sum::<f64>()
            / total as f64
    };
    let n = mol.atoms.iter().filter(|a| a.element != Element::H).count() as f64;
    let (spiro, bridge) = spiro_and_bridgehead_counts(mol);
    let size_penalty = n.powf(1.005) - n;
    let stereo_penalty = ((chiral_center_count(mol) + 1) as f64).log10();
    let spiro_penalty = ((spiro + 1) as f64).log10();
    let bridge_penalty = ((bridge + 1) as f64).log10();
    let macrocycle_penalty = if mol.rings().rings.iter().any(|r| r.len() > 8) {
        2f64.log10()
    } else {
        0.0
    };
    let distinct = envs.len() as f64;
    let symmetry_correction = if n > distinct && distinct > 0.0 {
        0.5 * (n / distinct).ln()
    } else {
        0.0
    };
    let raw = fragment_score
        - size_penalty
        - stereo_penalty
        - spiro_penalty
        - bridge_penalty
        - macrocycle_penalty
        + symmetry_correction;
    Ok(SaBreakdown {
        fragment_score,
        size_penalty,
        stereo_penalty,
        spiro_penalty,
        bridge_penalty,
        macrocycle_penalty,
        symmetry_correction,
        raw,
        score: rescale(raw),
    })
}

pub fn sa_score(mol: &Molecule, table: &FragmentTable) -> Result<f64, DescriptorError> {
    Ok(sa_breakdown(mol, table)?.score)
}

/// Builds a fragment table from a reference corpus.
pub fn build_fragment_table<'a>(mols: impl IntoIterator<Item = &'a Molecule>) -> FragmentTable {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for mol in mols {
        for (id, c) in sa_environments(mol) {
            *counts.entry(id).or_insert(0) += c;
        }
    }
    let mut sorted: Vec<usize> = counts.values().copied().collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let total: usize = sorted.iter().sum();
    let mut acc = 0;
    let mut c80 = 1;
    for &c in &sorted {
        acc += c;
        c80 = c;
        if acc as f64 >= 0.8 * total as f64 {
            break;
        }
    }
    let scores = counts
        .into_iter()
        .map(|(id, c)| (id, (c as f64 / c80 as f64).ln()))
        .collect();
    FragmentTable { scores }
}
