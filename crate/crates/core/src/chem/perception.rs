//! Kekulization, implicit hydrogens and aromaticity perception.
//!
//! Building a molecule runs, in order: ring perception (graph only),
//! demotion of acyclic aromatic bonds to single, kekulization of the
//! aromatic bonds that remain, implicit-hydrogen assignment, and finally
//! Hückel aromaticity perception over the localized structure.

use std::collections::HashMap;

use once_cell::sync::Lazy;

use super::element::Element;
use super::molecule::{BondOrder, Molecule, PerceptionIssue};
use super::rings::perceive_rings;
use crate::data::{asset_text, parse_tsv};

const PI_TSV: &str = include_str!("../../data/pi_electrons.tsv");

/// Local bonding pattern of a ring atom, keyed in the π-electron table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PiPattern {
    RingDouble,
    ExoDouble,
    LonePair,
    TwoConnected,
    CationEmpty,
}

impl PiPattern {
    fn parse(s: &str) -> PiPattern {
        match s {
            "ring_double" => PiPattern::RingDouble,
            "exo_double" => PiPattern::ExoDouble,
            "lone_pair" => PiPattern::LonePair,
            "two_connected" => PiPattern::TwoConnected,
            "cation_empty" => PiPattern::CationEmpty,
            other => panic!("unknown pi pattern {other}"),
        }
    }
}

static PI_TABLE: Lazy<HashMap<(Element, i8, PiPattern), u8>> = Lazy::new(|| {
    let text = asset_text("pi_electrons.tsv", PI_TSV);
    parse_tsv(&text)
        .into_iter()
        .map(|row| {
            let element = Element::from_symbol(row[0]).expect("pi table element");
            let charge: i8 = row[1].parse().expect("pi table charge");
            (
                (element, charge, PiPattern::parse(row[2])),
                row[3].parse().expect("pi electrons"),
            )
        })
        .collect()
});

/// Runs the full perception pipeline in place.
pub fn perceive(mol: &mut Molecule) {
    let info = perceive_rings(mol);
    mol.set_ring_info(info);
    for bond in mol.bonds.iter_mut() {
        if bond.order == BondOrder::Aromatic && !bond.in_ring {
            bond.order = BondOrder::Single;
            bond.kekule_order = 1;
        }
    }
    kekulize(mol);
    assign_implicit_hydrogens(mol);
    perceive_aromaticity(mol);
}

/// Smallest allowed valence ≥ `used`, if any.
fn fit_valence(allowed: &[u8], used: u8) -> Option<u8> {
    allowed.iter().copied().filter(|&v| v >= used).min()
}

/// Whether an atom with input aromatic bonds must take one π double bond.
fn needs_pi_bond(mol: &Molecule, atom: usize) -> bool {
    let a = &mol.atoms[atom];
    let has_multiple = mol
        .neighbors(atom)
        .iter()
        .any(|&(_, b)| matches!(mol.bonds[b].order, BondOrder::Double | BondOrder::Triple));
    if has_multiple {
        return false;
    }
    let used: u8 = mol
        .neighbors(atom)
        .iter()
        .map(|&(_, b)| mol.bonds[b].order.valence_contribution())
        .sum();
    if a.bracket {
        let used = used + a.explicit_h;
        match fit_valence(&a.element.allowed_valences(a.formal_charge), used) {
            Some(v) => v > used,
            None => false,
        }
    } else {
        // Lowercase organic atoms use their first valence only.
        match a.element.default_valences().first() {
            Some(&v) => v > used,
            None => false,
        }
    }
}

/// Localizes aromatic bonds into alternating single/double bonds. Atoms
/// that cannot be matched are recorded as perception issues and their
/// bonds stay single.
pub fn kekulize(mol: &mut Molecule) {
    let n = mol.atom_count();
    let aromatic_bonds: Vec<usize> = (0..mol.bond_count())
        .filter(|&b| mol.bonds[b].order == BondOrder::Aromatic)
        .collect();
    if aromatic_bonds.is_empty() {
        return;
    }
    let mut need = vec![false; n];
    for &b in &aromatic_bonds {
        for atom in [mol.bonds[b].a, mol.bonds[b].b] {
            need[atom] = needs_pi_bond(mol, atom);
        }
    }
    // candidate partners over aromatic bonds
    let mut options: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &b in &aromatic_bonds {
        let bond = &mol.bonds[b];
        if need[bond.a] && need[bond.b] {
            options[bond.a].push((bond.b, b));
            options[bond.b].push((bond.a, b));
        }
    }
    let mut mate: Vec<Option<usize>> = vec![None; n];
    let mut budget = 200_000usize;
    let solved = match_all(&need, &options, &mut mate, &mut budget);
    for &b in &aromatic_bonds {
        mol.bonds[b].kekule_order = 1;
    }
    if solved {
        for &b in mate.iter().flatten() {
            mol.bonds[b].kekule_order = 2;
        }
    } else {
        // Keep the best partial matching found greedily and report the rest.
        let mut mate: Vec<Option<usize>> = vec![None; n];
        for atom in 0..n {
            if !need[atom] || mate[atom].is_some() {
                continue;
            }
            if let Some(&(other, b)) = options[atom].iter().find(|(o, _)| mate[*o].is_none()) {
                mate[atom] = Some(b);
                mate[other] = Some(b);
                mol.bonds[b].kekule_order = 2;
            }
        }
        for atom in 0..n {
            if need[atom] && mate[atom].is_none() {
                mol.issues.push(PerceptionIssue {
                    atom,
                    reason: "cannot kekulize aromatic system".into(),
                });
            }
        }
    }
}

fn match_all(
    need: &[bool],
    options: &[Vec<(usize, usize)>],
    mate: &mut [Option<usize>],
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    // most constrained unmatched atom first
    let mut pick: Option<(usize, usize)> = None;
    for atom in 0..need.len() {
        if !need[atom] || mate[atom].is_some() {
            continue;
        }
        let free = options[atom]
            .iter()
            .filter(|(o, _)| mate[*o].is_none())
            .count();
        if free == 0 {
            return false;
        }
        if pick.is_none_or(|(_, f)| free < f) {
            pick = Some((atom, free));
        }
    }
    let Some((atom, _)) = pick else { return true };
    for &(other, bond) in &options[atom] {
        if mate[other].is_some() {
            continue;
        }
        mate[atom] = Some(bond);
        mate[other] = Some(bond);
        if match_all(need, options, mate, budget) {
            return true;
        }
        mate[atom] = None;
        mate[other] = None;
    }
    false
}

/// Sets `implicit_h` for every non-bracket atom from its localized bond
/// order sum: the smallest allowed valence at or above the sum, minus the
/// sum. Bracket atoms keep their explicit count. Atoms whose sum exceeds
/// every allowed valence are flagged with a `no valence fit` issue.
pub fn assign_implicit_hydrogens(mol: &mut Molecule) {
    for atom in 0..mol.atom_count() {
        let used = mol.bond_order_sum(atom);
        let a = &mol.atoms[atom];
        if a.bracket {
            continue;
        }
        let allowed = if a.input_aromatic {
            a.element
                .default_valences()
                .iter()
                .take(1)
                .copied()
                .collect::<Vec<_>>()
        } else {
            a.element.default_valences().to_vec()
        };
        if allowed.is_empty() {
            continue;
        }
        match fit_valence(&allowed, used) {
            Some(v) => mol.atoms[atom].implicit_h = v - used,
            None => {
                let input_aromatic = a.input_aromatic;
                mol.atoms[atom].implicit_h = 0;
                if !input_aromatic {
                    mol.issues.push(PerceptionIssue {
                        atom,
                        reason: format!("no valence fit for bond order sum {used}"),
                    });
                }
            }
        }
    }
}

/// π-electron contribution of a ring atom, or `None` when the atom cannot
/// be part of an aromatic ring.
pub fn pi_electrons(mol: &Molecule, atom: usize) -> Option<u8> {
    let a = &mol.atoms[atom];
    let mut ring_double = false;
    let mut exo_double = false;
    for &(_, b) in mol.neighbors(atom) {
        let bond = &mol.bonds[b];
        match bond.kekule_order {
            2 if bond.in_ring => ring_double = true,
            2 => exo_double = true,
            3 => return None,
            _ => {}
        }
    }
    let connections = mol.degree(atom) + a.total_h() as usize;
    let pattern = if ring_double {
        PiPattern::RingDouble
    } else if exo_double {
        PiPattern::ExoDouble
    } else if connections == 2
        && (!matches!(a.element.atomic_number(), 6 | 7 | 15)
            || (a.element == Element::N && a.formal_charge == -1))
    {
        PiPattern::TwoConnected
    } else if connections == 3 && (a.formal_charge > 0 || a.element == Element::B) {
        PiPattern::CationEmpty
    } else if connections == 3 {
        PiPattern::LonePair
    } else {
        return None;
    };
    PI_TABLE
        .get(&(a.element, a.formal_charge, pattern))
        .copied()
}

/// Marks atoms and bonds of Hückel-aromatic rings. Each SSSR ring is tested
/// on its own; pairs of non-aromatic fused rings sharing exactly one bond
/// are then tested as a combined envelope.
pub fn perceive_aromaticity(mol: &mut Molecule) {
    let info = mol.rings().clone();
    let n = mol.atom_count();
    let pi: Vec<Option<u8>> = (0..n).map(|a| pi_electrons(mol, a)).collect();
    let huckel = |atoms: &[usize]| -> bool {
        let mut total = 0u32;
        for &a in atoms {
            match pi[a] {
                Some(e) => total += e as u32,
                None => return false,
            }
        }
        total % 4 == 2
    };
    let mut aromatic_ring = vec![false; info.len()];
    for (i, ring) in info.rings.iter().enumerate() {
        aromatic_ring[i] = huckel(ring);
    }
    let mut envelope_bonds: Vec<usize> = Vec::new();
    let mut envelope_atoms: Vec<usize> = Vec::new();
    for i in 0..info.len() {
        for j in i + 1..info.len() {
            if aromatic_ring[i] && aromatic_ring[j] {
                continue;
            }
            let shared = info.ring_bonds[i]
                .iter()
                .filter(|b| info.ring_bonds[j].contains(b))
                .count();
            if shared != 1 {
                continue;
            }
            let mut atoms: Vec<usize> = info.rings[i]
                .iter()
                .chain(&info.rings[j])
                .copied()
                .collect();
            atoms.sort_unstable();
            atoms.dedup();
            if huckel(&atoms) {
                envelope_atoms.extend(&atoms);
                envelope_bonds.extend(info.ring_bonds[i].iter().chain(&info.ring_bonds[j]));
            }
        }
    }

    for atom in mol.atoms.iter_mut() {
        atom.aromatic = false;
    }
    for bond in mol.bonds.iter_mut() {
        bond.order = BondOrder::from_kekule(bond.kekule_order);
    }
    for (i, ring) in info.rings.iter().enumerate() {
        if aromatic_ring[i] {
            for &a in ring {
                mol.atoms[a].aromatic = true;
            }
            for &b in &info.ring_bonds[i] {
                mol.bonds[b].order = BondOrder::Aromatic;
            }
        }
    }
    for a in envelope_atoms {
        mol.atoms[a].aromatic = true;
    }
    for b in envelope_bonds {
        mol.bonds[b].order = BondOrder::Aromatic;
    }
}
