use serde::Serialize;

use crate::chem::{BondOrder, Molecule};
use crate::smiles::canonicalize_unchecked;

#[derive(Debug, Clone, Serialize)]
pub struct Scaffold {
    #[serde(skip)]
    pub molecule: Molecule,
    /// Canonical text of the frame; `""` for acyclic molecules.
    pub canonical_key: String,
}

/// Atoms of the Bemis–Murcko frame: rings, linkers between them, and atoms
/// double-bonded to either.
pub fn scaffold_atoms(mol: &Molecule) -> Vec<usize> {
    let n = mol.atom_count();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| mol.degree(i)).collect();
    let mut stack: Vec<usize> = (0..n)
        .filter(|&i| degree[i] <= 1 && !mol.atom_in_ring(i))
        .collect();
    while let Some(i) = stack.pop() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &(j, _) in mol.neighbors(i) {
            if alive[j] {
                degree[j] -= 1;
                if degree[j] <= 1 && !mol.atom_in_ring(j) {
                    stack.push(j);
                }
            }
        }
    }
    let frame = alive.clone();
    for i in 0..n {
        if !frame[i] {
            continue;
        }
        for &(j, b) in mol.neighbors(i) {
            if !frame[j] && mol.bonds[b].order == BondOrder::Double && mol.degree(j) == 1 {
                alive[j] = true;
            }
        }
    }
    (0..n).filter(|&i| alive[i]).collect()
}

pub fn bemis_murcko_scaffold(mol: &Molecule) -> Scaffold {
    let keep = scaffold_atoms(mol);
    if !keep.iter().any(|&i| mol.atom_in_ring(i)) {
        return Scaffold {
            molecule: mol.subgraph(&[]),
            canonical_key: String::new(),
        };
    }
    let molecule = mol.subgraph(&keep);
    let canonical_key = canonicalize_unchecked(&molecule).text;
    Scaffold {
        molecule,
        canonical_key,
    }
}
