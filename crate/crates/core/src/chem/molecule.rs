use serde::{Deserialize, Serialize};

use super::element::Element;
use super::rings::RingInfo;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Integer order used for valence sums; aromatic bonds count as 1 until
    /// they have been kekulized.
    pub fn valence_contribution(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub fn from_kekule(order: u8) -> BondOrder {
        match order {
            2 => BondOrder::Double,
            3 => BondOrder::Triple,
            _ => BondOrder::Single,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

/// Tetrahedral marker as written in the input (`@` or `@@`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chirality {
    Anticlockwise,
    Clockwise,
}

/// Directional single-bond marker (`/` or `\`), stored relative to the
/// bond's `a -> b` direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BondDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    /// Hydrogens given explicitly in a bracket atom.
    pub explicit_h: u8,
    /// Hydrogens inferred from the valence model; 0 for bracket atoms.
    pub implicit_h: u8,
    /// Perceived aromaticity.
    pub aromatic: bool,
    pub isotope: Option<u16>,
    /// Written as a bracket atom in the source text.
    pub bracket: bool,
    /// Written with a lowercase (aromatic) symbol in the source text.
    pub input_aromatic: bool,
    pub chirality: Option<Chirality>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            formal_charge: 0,
            explicit_h: 0,
            implicit_h: 0,
            aromatic: false,
            isotope: None,
            bracket: false,
            input_aromatic: false,
            chirality: None,
        }
    }

    pub fn total_h(&self) -> u8 {
        self.explicit_h + self.implicit_h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    /// Perceived order (aromatic for bonds inside aromatic rings).
    pub order: BondOrder,
    /// Localized order (1, 2 or 3) from kekulization; used for valence sums.
    pub kekule_order: u8,
    pub in_ring: bool,
    pub direction: Option<BondDirection>,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }

    pub fn connects(&self, x: usize, y: usize) -> bool {
        (self.a == x && self.b == y) || (self.a == y && self.b == x)
    }
}

/// An atom-level problem found while building a molecule (kekulization
/// failures, hydrogen assignment failures). Reported by validity checking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionIssue {
    pub atom: usize,
    pub reason: String,
}

/// Attributed molecular graph. Atoms are densely indexed from 0; the graph
/// is simple. Construct through [`MoleculeBuilder`] (or the SMILES parser),
/// which runs ring, hydrogen and aromaticity perception.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Molecule {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
    pub rings: Option<RingInfo>,
    pub source_text: Option<String>,
    pub issues: Vec<PerceptionIssue>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Molecule {
    pub(crate) fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Molecule {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, bond) in bonds.iter().enumerate() {
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        Molecule {
            atoms,
            bonds,
            rings: None,
            source_text: None,
            issues: Vec::new(),
            adjacency,
        }
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `(neighbor, bond index)` pairs in bond insertion order.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn bond_between(&self, x: usize, y: usize) -> Option<usize> {
        self.adjacency[x]
            .iter()
            .find(|&&(n, _)| n == y)
            .map(|&(_, b)| b)
    }

    /// Sum of localized bond orders at `atom`.
    pub fn bond_order_sum(&self, atom: usize) -> u8 {
        self.adjacency[atom]
            .iter()
            .map(|&(_, b)| self.bonds[b].kekule_order)
            .sum()
    }

    pub fn rings(&self) -> &RingInfo {
        self.rings.as_ref().expect("ring perception has run")
    }

    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.rings
            .as_ref()
            .is_some_and(|r| r.atom_ring_count[atom] > 0)
    }

    /// Connected components as sorted atom lists, ordered by smallest atom.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &(n, _) in self.neighbors(v) {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_multi_fragment(&self) -> bool {
        self.components().len() > 1
    }

    /// Induced subgraph on `keep` (any order). Atoms are renumbered in
    /// ascending original index order. Every bond cut at a kept atom is
    /// compensated with hydrogens so valences stay satisfied; rings are
    /// re-perceived while aromatic flags carry over.
    pub fn subgraph(&self, keep: &[usize]) -> Molecule {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut map = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut atoms: Vec<Atom> = keep.iter().map(|&i| self.atoms[i].clone()).collect();
        for (new, &old) in keep.iter().enumerate() {
            let lost: u8 = self
                .neighbors(old)
                .iter()
                .filter(|&&(n, _)| map[n] == usize::MAX)
                .map(|&(_, b)| self.bonds[b].kekule_order)
                .sum();
            if lost > 0 {
                if atoms[new].bracket {
                    atoms[new].explicit_h += lost;
                } else {
                    atoms[new].implicit_h += lost;
                }
            }
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| map[b.a] != usize::MAX && map[b.b] != usize::MAX)
            .map(|b| Bond {
                a: map[b.a],
                b: map[b.b],
                ..b.clone()
            })
            .collect();
        let mut mol = Molecule::from_parts(atoms, bonds);
        mol.issues = self
            .issues
            .iter()
            .filter(|i| map[i.atom] != usize::MAX)
            .map(|i| PerceptionIssue {
                atom: map[i.atom],
                reason: i.reason.clone(),
            })
            .collect();
        let info = super::rings::perceive_rings(&mol);
        mol.set_ring_info(info);
        mol
    }

    /// Keep only the component with the most heavy atoms (ties: first).
    pub fn largest_fragment(&self) -> Molecule {
        let comps = self.components();
        if comps.len() <= 1 {
            return self.clone();
        }
        let best = comps
            .iter()
            .enumerate()
            .max_by_key(|(i, c)| {
                (
                    c.iter()
                        .filter(|&&a| self.atoms[a].element != Element::H)
                        .count(),
                    std::cmp::Reverse(*i),
                )
            })
            .map(|(_, c)| c.clone())
            .unwrap();
        self.subgraph(&best)
    }

    pub fn set_ring_info(&mut self, info: RingInfo) {
        for (i, bond) in self.bonds.iter_mut().enumerate() {
            bond.in_ring = info.bond_ring_count[i] > 0;
        }
        self.rings = Some(info);
    }

    /// Relabel atoms: atom `i` moves to position `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Molecule {
        assert_eq!(perm.len(), self.atoms.len());
        let mut atoms = vec![Atom::new(Element::C); self.atoms.len()];
        for (old, atom) in self.atoms.iter().enumerate() {
            atoms[perm[old]] = atom.clone();
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                ..b.clone()
            })
            .collect();
        let mut mol = Molecule::from_parts(atoms, bonds);
        mol.issues = self
            .issues
            .iter()
            .map(|i| PerceptionIssue {
                atom: perm[i.atom],
                reason: i.reason.clone(),
            })
            .collect();
        mol.set_ring_info(super::rings::perceive_rings(&mol));
        mol
    }
}
