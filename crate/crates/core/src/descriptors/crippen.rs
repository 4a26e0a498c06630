//! Wildman–Crippen atom-contribution logP.
//!
//! Each heavy atom is assigned the first matching type of an ordered rule
//! list per element; hydrogens are typed by the atom they are attached to.
//! logP is the plain sum of the tabulated contributions.

use std::collections::HashMap;

use once_cell::sync::Lazy;
use serde::Serialize;

use super::DescriptorError;
use crate::chem::{BondOrder, Element, Molecule};
use crate::data::{asset_text, parse_tsv};

const CRIPPEN_TSV: &str = include_str!("../../data/crippen.tsv");

pub static CRIPPEN_TABLE: Lazy<HashMap<String, f64>> = Lazy::new(|| {
    parse_tsv(&asset_text("crippen.tsv", CRIPPEN_TSV))
        .into_iter()
        .map(|row| {
            (
                row[0].to_string(),
                row[1].parse().expect("crippen contribution"),
            )
        })
        .collect()
});

pub fn contribution(atom_type: &str) -> f64 {
    CRIPPEN_TABLE
        .get(atom_type)
        .copied()
        .unwrap_or_else(|| panic!("crippen type {atom_type} missing from table"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrippenAtom {
    pub atom: usize,
    pub heavy_type: &'static str,
    pub h_type: Option<&'static str>,
    pub h_count: u8,
    /// Heavy-atom contribution plus its hydrogens.
    pub contribution: f64,
}

struct Ctx<'a> {
    mol: &'a Molecule,
    atom: usize,
}

impl Ctx<'_> {
    fn nbrs(&self) -> impl Iterator<Item = (usize, BondOrder)> + '_ {
        self.mol
            .neighbors(self.atom)
            .iter()
            .map(|&(j, b)| (j, self.mol.bonds[b].order))
    }

    fn h(&self) -> u8 {
        self.mol.atoms[self.atom].total_h()
    }

    fn degree(&self) -> usize {
        self.mol.degree(self.atom)
    }

    fn connections(&self) -> usize {
        self.degree() + self.h() as usize
    }

    fn el(&self, j: usize) -> u8 {
        self.mol.atoms[j].element.atomic_number()
    }

    fn arom(&self, j: usize) -> bool {
        self.mol.atoms[j].aromatic
    }

    fn aliphatic(&self, j: usize) -> bool {
        !self.arom(j) && self.el(j) != 1
    }

    fn aliphatic_c(&self, j: usize) -> bool {
        self.aliphatic(j) && self.el(j) == 6
    }

    /// Aliphatic N, O, P, S or halogen.
    fn hetero(&self, j: usize) -> bool {
        self.aliphatic(j) && matches!(self.el(j), 7 | 8 | 15 | 16 | 9 | 17 | 35 | 53)
    }

    fn charge(&self) -> i8 {
        self.mol.atoms[self.atom].formal_charge
    }
}

fn sa(order: BondOrder) -> bool {
    matches!(order, BondOrder::Single | BondOrder::Aromatic)
}

fn carbon_aliphatic(c: &Ctx) -> &'static str {
    let h = c.h();
    let nb: Vec<(usize, BondOrder)> = c.nbrs().collect();
    let all_single_c = nb.iter().all(|&(j, o)| sa(o) && c.aliphatic_c(j));
    let deg = nb.len();
    if (h == 4 && deg == 0)
        || (h == 3 && deg == 1 && all_single_c)
        || (h == 2 && deg == 2 && all_single_c)
    {
        return "C1";
    }
    if (h == 1 && deg == 3 && all_single_c) || (h == 0 && deg == 4 && all_single_c) {
        return "C2";
    }
    let x4 = c.connections() == 4;
    let all_aliphatic = nb.iter().all(|&(j, _)| c.aliphatic(j));
    let any_het = nb.iter().any(|&(j, o)| sa(o) && c.hetero(j));
    if h == 3 && any_het {
        return "C3";
    }
    if h == 2 && x4 && deg == 2 && all_aliphatic && any_het {
        return "C3";
    }
    if (h == 1 || h == 0) && x4 && all_aliphatic && any_het {
        return "C4";
    }
    if nb
        .iter()
        .any(|&(j, o)| o == BondOrder::Double && c.aliphatic(j) && c.el(j) != 6)
    {
        return "C5";
    }
    let double_c = nb
        .iter()
        .filter(|&&(j, o)| o == BondOrder::Double && c.aliphatic_c(j))
        .count();
    let others_aliphatic = nb
        .iter()
        .filter(|&&(j, o)| o != BondOrder::Double && c.aliphatic(j))
        .count();
    if double_c >= 1 {
        let c6 = (h == 2)
            || (h == 1 && others_aliphatic >= 1)
            || (h == 0 && others_aliphatic >= 2)
            || double_c >= 2;
        if c6 {
            return "C6";
        }
    }
    if c.connections() == 2
        && nb
            .iter()
            .any(|&(j, o)| o == BondOrder::Triple && c.aliphatic(j))
    {
        return "C7";
    }
    let any_arom = nb.iter().any(|&(j, _)| c.arom(j));
    if h == 3 && nb.iter().any(|&(j, _)| c.arom(j) && c.el(j) == 6) {
        return "C8";
    }
    if h == 3 && any_arom {
        return "C9";
    }
    if x4 && any_arom {
        match h {
            2 => return "C10",
            1 => return "C11",
            0 => return "C12",
            _ => {}
        }
    }
    if (double_c >= 1 && any_arom)
        || nb
            .iter()
            .any(|&(j, o)| o == BondOrder::Double && c.arom(j) && c.el(j) == 6)
    {
        return "C26";
    }
    if x4
        && nb.iter().any(|&(j, _)| {
            c.aliphatic(j) && !matches!(c.el(j), 6 | 7 | 8 | 15 | 16 | 9 | 17 | 35 | 53)
        })
    {
        return "C27";
    }
    "CS"
}

fn carbon_aromatic(c: &Ctx) -> &'static str {
    let nb: Vec<(usize, BondOrder)> = c.nbrs().collect();
    if c.h() == 0
        && nb.iter().any(|&(j, o)| {
            o == BondOrder::Single
                && c.aliphatic(j)
                && !matches!(c.el(j), 6 | 7 | 8 | 16 | 9 | 17 | 35 | 53)
        })
    {
        return "C13";
    }
    for (z, t) in [(9, "C14"), (17, "C15"), (35, "C16"), (53, "C17")] {
        if nb.iter().any(|&(j, _)| c.el(j) == z) {
            return t;
        }
    }
    if c.h() == 1 {
        return "C18";
    }
    let arom_bonds = nb
        .iter()
        .filter(|&&(_, o)| o == BondOrder::Aromatic)
        .count();
    if arom_bonds >= 3 {
        return "C19";
    }
    if arom_bonds >= 2 {
        let exo: Vec<(usize, BondOrder)> = nb
            .iter()
            .copied()
            .filter(|&(_, o)| o != BondOrder::Aromatic)
            .collect();
        if exo
            .iter()
            .any(|&(j, o)| o == BondOrder::Single && c.arom(j))
        {
            return "C20";
        }
        for (z, t) in [(6, "C21"), (7, "C22"), (8, "C23"), (16, "C24")] {
            if exo
                .iter()
                .any(|&(j, o)| o == BondOrder::Single && c.aliphatic(j) && c.el(j) == z)
            {
                return t;
            }
        }
        if exo
            .iter()
            .any(|&(j, o)| o == BondOrder::Double && c.aliphatic(j) && matches!(c.el(j), 6..=8))
        {
            return "C25";
        }
    }
    "CS"
}

fn nitrogen(c: &Ctx) -> &'static str {
    let q = c.charge();
    let h = c.h();
    let nb: Vec<(usize, BondOrder)> = c.nbrs().collect();
    if c.mol.atoms[c.atom].aromatic {
        return match q {
            0 => "N11",
            q if q > 0 => "N12",
            _ => "NS",
        };
    }
    let single_nb = |j: usize, o: BondOrder| sa(o) && j != usize::MAX;
    if q == 0 {
        let deg = nb.len();
        let n_aliph = nb
            .iter()
            .filter(|&&(j, o)| single_nb(j, o) && c.aliphatic(j))
            .count();
        let n_arom = nb
            .iter()
            .filter(|&&(j, o)| single_nb(j, o) && c.arom(j))
            .count();
        let has_double = nb.iter().any(|&(_, o)| o == BondOrder::Double);
        let has_triple = nb.iter().any(|&(_, o)| o == BondOrder::Triple);
        if h == 2 && deg == 1 && n_aliph == 1 {
            return "N1";
        }
        if h == 1 && deg == 2 && n_aliph == 2 {
            return "N2";
        }
        if h == 2 && deg == 1 && n_arom == 1 {
            return "N3";
        }
        if h == 1 && deg == 2 && n_arom >= 1 && n_aliph + n_arom == 2 {
            return "N4";
        }
        if h == 1 && has_double {
            return "N5";
        }
        if has_double && deg >= 2 {
            return "N6";
        }
        if h == 0 && deg == 3 && n_aliph == 3 {
            return "N7";
        }
        if h == 0
            && deg == 3
            && n_arom >= 1
            && n_aliph + n_arom == 3
            && (n_aliph >= 1 || n_arom == 3)
        {
            return "N8";
        }
        if has_triple
            && nb
                .iter()
                .any(|&(j, o)| o == BondOrder::Triple && c.aliphatic(j))
        {
            return "N9";
        }
        return "NS";
    }
    if q > 0 && h >= 1 {
        return "N10";
    }
    if q > 0 && h == 0 {
        let deg = nb.len();
        let aliph = |j: usize| c.aliphatic(j);
        let doubles: Vec<usize> = nb
            .iter()
            .filter(|&&(_, o)| o == BondOrder::Double)
            .map(|&(j, _)| j)
            .collect();
        if deg == 4 && nb.iter().all(|&(j, o)| sa(o) && aliph(j)) {
            return "N13";
        }
        if deg == 3
            && doubles.len() == 1
            && aliph(doubles[0])
            && nb.iter().any(|&(j, o)| o != BondOrder::Double && aliph(j))
        {
            return "N13";
        }
        if doubles.len() == 2
            && doubles.iter().any(|&j| c.el(j) == 6)
            && doubles
                .iter()
                .any(|&j| c.el(j) == 7 && c.mol.atoms[j].formal_charge >= 0)
        {
            return "N13";
        }
        if nb.iter().any(|&(j, o)| o == BondOrder::Triple && aliph(j)) {
            return "N14";
        }
        if doubles.len() == 2
            && doubles
                .iter()
                .any(|&j| c.el(j) == 7 && c.mol.atoms[j].formal_charge < 0)
            && doubles.iter().any(|&j| c.el(j) == 7)
        {
            return "N14";
        }
        return "NS";
    }
    // negative charge
    "N14"
}

fn oxygen(c: &Ctx) -> &'static str {
    let a = &c.mol.atoms[c.atom];
    if a.aromatic {
        return "O1";
    }
    let nb: Vec<(usize, BondOrder)> = c.nbrs().collect();
    let h = c.h();
    if h >= 1 && (h == 2 || nb.len() == 1) && c.charge() == 0 {
        return "O2";
    }
    if nb.len() == 2 && nb.iter().all(|&(j, o)| sa(o) && c.aliphatic(j)) {
        return "O3";
    }
    if nb.len() == 2
        && nb.iter().any(|&(j, _)| c.arom(j))
        && nb.iter().all(|&(j, o)| sa(o) && j != usize::MAX)
    {
        return "O4";
    }
    if let [(j, order)] = nb.as_slice() {
        let (j, order) = (*j, *order);
        let zj = c.el(j);
        if order == BondOrder::Double && matches!(zj, 7 | 8) {
            return "O5";
        }
        if c.charge() == -1 && order == BondOrder::Single {
            if zj == 7 {
                return "O5";
            }
            if zj == 16 {
                return "O6";
            }
            let acid = zj == 6
                && c.mol.neighbors(j).iter().any(|&(k, b)| {
                    k != c.atom && c.mol.bonds[b].order == BondOrder::Double && c.el(k) == 8
                });
            if acid {
                return "O12";
            }
            return "O7";
        }
        if order == BondOrder::Double && zj == 6 {
            if c.arom(j) {
                return "O8";
            }
            let others: Vec<usize> = c
                .mol
                .neighbors(j)
                .iter()
                .map(|&(k, _)| k)
                .filter(|&k| k != c.atom)
                .collect();
            let jh = c.mol.atoms[j].total_h();
            let is_c = |k: usize| c.aliphatic(k) && c.el(k) == 6;
            let any_arom = others.iter().any(|&k| c.arom(k));
            if any_arom {
                return "O10";
            }
            let hetero_only =
                others.len() == 2 && others.iter().all(|&k| c.el(k) != 6 && c.el(k) != 1);
            if hetero_only {
                return "O11";
            }
            let o9 = (jh == 1 && others.len() == 1)
                || (jh == 2)
                || (others.len() == 2
                    && others.iter().any(|&k| is_c(k))
                    && others.iter().all(|&k| c.aliphatic(k)))
                || c.mol.neighbors(j).iter().any(|&(k, b)| {
                    k != c.atom && c.mol.bonds[b].order == BondOrder::Double && c.el(k) == 8
                });
            if o9 {
                return "O9";
            }
        }
    }
    "OS"
}

fn heavy_type(mol: &Molecule, atom: usize) -> Option<&'static str> {
    let c = Ctx { mol, atom };
    let a = &mol.atoms[atom];
    let q = a.formal_charge;
    Some(match a.element.atomic_number() {
        6 if a.aromatic => carbon_aromatic(&c),
        6 => carbon_aliphatic(&c),
        7 => nitrogen(&c),
        8 => oxygen(&c),
        9 if q == 0 => "F",
        17 if q == 0 => "Cl",
        35 if q == 0 => "Br",
        53 if q == 0 => "I",
        9 | 17 | 35 | 53 => "Hal",
        15 => "P",
        16 if a.aromatic => "S3",
        16 if q == 0 => "S1",
        16 => "S2",
        _ => return None,
    })
}

/// Type of a hydrogen attached to `host`.
fn hydrogen_type(mol: &Molecule, host: usize) -> &'static str {
    let c = Ctx { mol, atom: host };
    match mol.atoms[host].element.atomic_number() {
        1 | 6 => "H1",
        7 => "H3",
        8 => {
            let others: Vec<(usize, BondOrder)> = c.nbrs().filter(|&(j, _)| c.el(j) != 1).collect();
            let Some(&(y, _)) = others.first() else {
                return "HS";
            };
            let zy = c.el(y);
            let y_x4 = mol.degree(y) + mol.atoms[y].total_h() as usize == 4;
            if c.arom(y) || !matches!(zy, 6 | 7 | 8 | 16) || (zy == 6 && y_x4) {
                return "H2";
            }
            if zy == 7 {
                return "H3";
            }
            let enol_or_acid = zy == 6
                && mol.neighbors(y).iter().any(|&(k, b)| {
                    k != host
                        && mol.bonds[b].order == BondOrder::Double
                        && matches!(c.el(k), 6 | 7 | 8 | 16)
                });
            if enol_or_acid || matches!(zy, 8 | 16) {
                return "H4";
            }
            "HS"
        }
        _ => "H2",
    }
}

/// Per-atom typing and contributions. Explicit hydrogen atoms in the graph
/// are typed by their neighbor and carry only their own contribution.
pub fn crippen_contributions(mol: &Molecule) -> Result<Vec<CrippenAtom>, DescriptorError> {
    let mut out = Vec::with_capacity(mol.atom_count());
    for atom in 0..mol.atom_count() {
        let a = &mol.atoms[atom];
        if a.element == Element::H {
            let t = mol
                .neighbors(atom)
                .first()
                .map_or("HS", |&(host, _)| hydrogen_type(mol, host));
            let h_type = (a.total_h() > 0).then_some("H1");
            let value = contribution(t) + a.total_h() as f64 * h_type.map_or(0.0, contribution);
            out.push(CrippenAtom {
                atom,
                heavy_type: t,
                h_type,
                h_count: a.total_h(),
                contribution: value,
            });
            continue;
        }
        let t = heavy_type(mol, atom).ok_or(DescriptorError::UnclassifiableAtom(atom))?;
        let h_count = a.total_h();
        let h_type = (h_count > 0).then(|| hydrogen_type(mol, atom));
        let value = contribution(t) + h_count as f64 * h_type.map_or(0.0, contribution);
        out.push(CrippenAtom {
            atom,
            heavy_type: t,
            h_type,
            h_count,
            contribution: value,
        });
    }
    Ok(out)
}

pub fn crippen_logp(mol: &Molecule) -> Result<f64, DescriptorError> {
    Ok(crippen_contributions(mol)?
        .iter()
        .map(|a| a.contribution)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn logp(s: &str) -> f64 {
        crippen_logp(&parse_smiles(s).unwrap()).unwrap()
    }

    fn types(s: &str) -> Vec<&'static str> {
        crippen_contributions(&parse_smiles(s).unwrap())
            .unwrap()
            .iter()
            .map(|a| a.heavy_type)
            .collect()
    }

    #[test]
    fn table_sums() {
        assert!((logp("C") - (0.1441 + 4.0 * 0.123)).abs() < 1e-12);
        assert!((logp("c1ccccc1") - 6.0 * (0.1581 + 0.123)).abs() < 1e-12);
        // CH3 (C1) + CH2-O (C3) + alcohol O (O2) with alcohol H (H2)
        let ethanol = 0.1441 + 3.0 * 0.123 - 0.2035 + 2.0 * 0.123 - 0.2893 - 0.2677;
        assert!((logp("CCO") - ethanol).abs() < 1e-12);
    }

    #[test]
    fn representative_types() {
        assert_eq!(types("CC(=O)O"), vec!["C1", "C5", "O9", "O2"]);
        assert_eq!(types("Cc1ccccc1")[..2], ["C8", "C21"]);
        assert_eq!(types("c1ccncc1")[3], "N11");
        assert_eq!(types("C[N+](C)(C)C")[1], "N13");
        assert_eq!(types("CC(=O)[O-]")[3], "O12");
        assert_eq!(types("C[N+](=O)[O-]")[1..], ["N13", "O5", "O5"]);
        assert_eq!(types("CC#N")[1..], ["C7", "N9"]);
        assert_eq!(types("Nc1ccccc1")[0], "N3");
        assert_eq!(types("c1ccc2ccccc2c1")[3], "C19");
        assert_eq!(types("[Cl-]"), vec!["Hal"]);
    }

    #[test]
    fn hydrogen_types() {
        let m = parse_smiles("OC(=O)c1ccccc1O").unwrap();
        let c = crippen_contributions(&m).unwrap();
        assert_eq!(c[0].h_type, Some("H4"));
        assert_eq!(c[9].h_type, Some("H2"));
        let m = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(crippen_contributions(&m).unwrap()[3].h_type, Some("H3"));
    }

    #[test]
    fn silicon_unclassifiable() {
        let m = parse_smiles("C[Si](C)(C)C").unwrap();
        assert!(matches!(
            crippen_logp(&m),
            Err(DescriptorError::UnclassifiableAtom(1))
        ));
    }
}
