//! Attributed molecular graphs: valence model, rings, aromaticity and
//! hydrogens.

mod element;
mod molecule;
pub mod perception;
pub mod rings;
mod validity;

use std::collections::BTreeMap;

use thiserror::Error;

pub use element::{Element, ElementData};
pub use molecule::{Atom, Bond, BondDirection, BondOrder, Chirality, Molecule, PerceptionIssue};
pub use rings::{perceive_rings, RingInfo};
pub use validity::{check_validity, ValidityReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on atom {0}")]
    SelfLoop(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("atom index {0} out of range")]
    BadAtomIndex(usize),
}

/// Incremental molecule construction. [`MoleculeBuilder::build`] runs the
/// perception pipeline.
#[derive(Debug, Default, Clone)]
pub struct MoleculeBuilder {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
}

impl MoleculeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    pub fn atom_mut(&mut self, idx: usize) -> &mut Atom {
        &mut self.atoms[idx]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<usize, GraphError> {
        self.add_bond_with_direction(a, b, order, None)
    }

    pub fn add_bond_with_direction(
        &mut self,
        a: usize,
        b: usize,
        order: BondOrder,
        direction: Option<BondDirection>,
    ) -> Result<usize, GraphError> {
        if a >= self.atoms.len() {
            return Err(GraphError::BadAtomIndex(a));
        }
        if b >= self.atoms.len() {
            return Err(GraphError::BadAtomIndex(b));
        }
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        if self.bonds.iter().any(|bond| bond.connects(a, b)) {
            return Err(GraphError::DuplicateBond(a.min(b), a.max(b)));
        }
        self.bonds.push(Bond {
            a,
            b,
            order,
            kekule_order: order.valence_contribution(),
            in_ring: false,
            direction,
        });
        Ok(self.bonds.len() - 1)
    }

    pub fn build(self) -> Molecule {
        let mut mol = Molecule::from_parts(self.atoms, self.bonds);
        perception::perceive(&mut mol);
        mol
    }
}

pub fn heavy_atom_count(mol: &Molecule) -> usize {
    mol.atoms
        .iter()
        .filter(|a| a.element != Element::H && a.element != Element::DUMMY)
        .count()
}

/// Molecular formula in Hill order (C, H, then alphabetical; alphabetical
/// throughout when there is no carbon), followed by the net charge.
pub fn molecular_formula(mol: &Molecule) -> String {
    let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut h = 0usize;
    let mut charge = 0i32;
    for atom in &mol.atoms {
        charge += atom.formal_charge as i32;
        h += atom.total_h() as usize;
        if atom.element == Element::H {
            h += 1;
        } else if atom.element != Element::DUMMY {
            *counts.entry(atom.element.symbol()).or_default() += 1;
        }
    }
    let mut out = String::new();
    let mut emit = |sym: &str, n: usize| {
        if n > 0 {
            out.push_str(sym);
            if n > 1 {
                out.push_str(&n.to_string());
            }
        }
    };
    if let Some(c) = counts.remove("C") {
        emit("C", c);
        emit("H", h);
        for (sym, n) in &counts {
            emit(sym, *n);
        }
    } else {
        if h > 0 {
            counts.insert("H", h);
        }
        for (sym, n) in &counts {
            emit(sym, *n);
        }
    }
    match charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => out.push_str(&format!("+{c}")),
        c => out.push_str(&format!("-{}", -c)),
    }
    out
}
