//! BRICS retrosynthetic fragmentation.
//!
//! Atoms are assigned environment numbers from the rule asset
//! (`brics.tsv`); an acyclic single bond is cut when its two end atoms carry
//! an environment pair from [`BRICS_PAIRS`]. Each cut end is capped with a
//! `*` atom whose isotope label is the environment of the atom it replaces
//! the bond from, so `C(=O)N` cut as an amide yields `[1*]C=O`-style keys.

use std::collections::{BTreeMap, BTreeSet};

use once_cell::sync::Lazy;
use serde::Serialize;

use crate::chem::{Atom, Bond, BondOrder, Element, Molecule};
use crate::data::{asset_text, parse_tsv_numbered};
use crate::patterns::{matches_at, parse_pattern, Pattern};
use crate::smiles::canonicalize_unchecked;

const BRICS_TSV: &str = include_str!("../../data/brics.tsv");

/// Environment pairs that may be cleaved (unordered).
pub const BRICS_PAIRS: &[(u16, &[u16])] = &[
    (1, &[3, 5, 10]),
    (3, &[4, 13, 14, 15, 16]),
    (4, &[5, 11]),
    (5, &[12, 13, 14, 15, 16]),
    (6, &[13, 14, 15, 16]),
    (8, &[9, 10, 13, 14, 15, 16]),
    (9, &[13, 14, 15, 16]),
    (10, &[13, 14, 15, 16]),
    (11, &[13, 14, 15, 16]),
    (13, &[14, 15, 16]),
    (14, &[14, 15, 16]),
    (15, &[16]),
    (16, &[16]),
];

#[derive(Debug)]
struct EnvRule {
    env: u16,
    require: Vec<Vec<Pattern>>,
    exclude: Vec<Pattern>,
}

type GroupedRows = BTreeMap<u16, (BTreeMap<String, Vec<Pattern>>, Vec<Pattern>)>;

static RULES: Lazy<Vec<EnvRule>> = Lazy::new(|| {
    let text = asset_text("brics.tsv", BRICS_TSV);
    let mut by_env: GroupedRows = BTreeMap::new();
    for (line, row) in parse_tsv_numbered(&text) {
        let parsed = (|| {
            let env: u16 = row.first()?.parse().ok()?;
            let pattern = parse_pattern(row.get(3)?).ok()?;
            Some((env, row[1].to_string(), row[2] == "exclude", pattern))
        })();
        let Some((env, group, exclude, pattern)) = parsed else {
            log::warn!("brics.tsv line {line}: unusable row skipped");
            continue;
        };
        let entry = by_env.entry(env).or_default();
        if exclude {
            entry.1.push(pattern);
        } else {
            entry.0.entry(group).or_default().push(pattern);
        }
    }
    by_env
        .into_iter()
        .map(|(env, (groups, exclude))| EnvRule {
            env,
            require: groups.into_values().collect(),
            exclude,
        })
        .collect()
});

fn pair_allowed(x: u16, y: u16) -> bool {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    BRICS_PAIRS
        .iter()
        .any(|&(a, bs)| a == lo && bs.contains(&hi))
}

/// Environment numbers of every atom.
pub fn atom_environments(mol: &Molecule) -> Vec<BTreeSet<u16>> {
    (0..mol.atom_count())
        .map(|atom| {
            RULES
                .iter()
                .filter(|r| {
                    !r.require.is_empty()
                        && r.require
                            .iter()
                            .all(|g| g.iter().any(|p| matches_at(mol, p, atom)))
                        && !r.exclude.iter().any(|p| matches_at(mol, p, atom))
                })
                .map(|r| r.env)
                .collect()
        })
        .collect()
}

/// Bonds to cut with the environment labels of their `a` and `b` ends.
pub fn cleavable_bonds(mol: &Molecule) -> Vec<(usize, u16, u16)> {
    let envs = atom_environments(mol);
    let mut out = Vec::new();
    for (i, bond) in mol.bonds.iter().enumerate() {
        if bond.order != BondOrder::Single || bond.in_ring {
            continue;
        }
        let best = envs[bond.a]
            .iter()
            .flat_map(|&x| envs[bond.b].iter().map(move |&y| (x, y)))
            .filter(|&(x, y)| pair_allowed(x, y))
            .min_by_key(|&(x, y)| (x.min(y), x.max(y), x));
        if let Some((x, y)) = best {
            out.push((i, x, y));
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FragmentSet {
    pub fragments: BTreeMap<String, usize>,
}

impl FragmentSet {
    pub fn total(&self) -> usize {
        self.fragments.values().sum()
    }
}

pub fn brics_fragments(mol: &Molecule) -> FragmentSet {
    let cuts = cleavable_bonds(mol);
    let mut fragments = BTreeMap::new();
    if cuts.is_empty() {
        if mol.atom_count() > 0 {
            fragments.insert(canonicalize_unchecked(mol).text, 1);
        }
        return FragmentSet { fragments };
    }
    let cut: BTreeMap<usize, (u16, u16)> = cuts.iter().map(|&(b, x, y)| (b, (x, y))).collect();
    let mut atoms = mol.atoms.clone();
    let mut bonds: Vec<Bond> = Vec::new();
    for (i, bond) in mol.bonds.iter().enumerate() {
        match cut.get(&i) {
            None => bonds.push(bond.clone()),
            Some(&(ea, eb)) => {
                for (end, label) in [(bond.a, ea), (bond.b, eb)] {
                    let mut dummy = Atom::new(Element::DUMMY);
                    dummy.bracket = true;
                    dummy.isotope = Some(label);
                    atoms.push(dummy);
                    bonds.push(Bond {
                        a: end,
                        b: atoms.len() - 1,
                        order: BondOrder::Single,
                        kekule_order: 1,
                        in_ring: false,
                        direction: None,
                    });
                }
            }
        }
    }
    let split = Molecule::from_parts(atoms, bonds);
    for comp in split.components() {
        let frag = split.subgraph(&comp);
        *fragments
            .entry(canonicalize_unchecked(&frag).text)
            .or_insert(0) += 1;
    }
    FragmentSet { fragments }
}
