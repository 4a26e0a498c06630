//! Canonical atom ranking and canonical SMILES output.
//!
//! Ranking starts from per-atom invariants (element, charge, degree,
//! hydrogen count, aromaticity, ring membership, isotope) and refines them
//! by sorted `(bond order, neighbor rank)` lists until the partition is
//! stable. Remaining ties are broken by doubling all ranks and lowering the
//! smallest-index atom of the lowest tied class by one, then refining again.
//!
//! Output is a depth-first walk from the highest-ranked atom, visiting
//! neighbors in descending rank; ring-closure digits are allocated lowest
//! first in discovery order. Stereo markers do not take part in ranking and
//! are not written, so stereoisomers share one canonical form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{check_validity, BondOrder, Element, Molecule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonError {
    #[error("molecule failed validity: {0}")]
    InvalidMolecule(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub text: String,
    /// Canonical rank per atom, 0-based and distinct.
    pub rank: Vec<usize>,
}

type Invariant = (u8, i8, usize, u8, bool, bool, u16);

fn initial_invariants(mol: &Molecule) -> Vec<Invariant> {
    (0..mol.atom_count())
        .map(|i| {
            let a = &mol.atoms[i];
            (
                a.element.atomic_number(),
                a.formal_charge,
                mol.degree(i),
                a.total_h(),
                a.aromatic,
                mol.atom_in_ring(i),
                a.isotope.unwrap_or(0),
            )
        })
        .collect()
}

/// Dense ranks (0-based) of `keys`, equal keys sharing a rank.
fn dense_rank<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&x, &y| keys[x].cmp(&keys[y]));
    let mut ranks = vec![0; keys.len()];
    let mut r = 0;
    for w in 0..order.len() {
        if w > 0 && keys[order[w]] != keys[order[w - 1]] {
            r += 1;
        }
        ranks[order[w]] = r;
    }
    ranks
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().copied().max().map_or(0, |m| m + 1)
}

/// Iterates neighborhood refinement until the number of classes is stable.
fn refine(mol: &Molecule, mut ranks: Vec<usize>) -> Vec<usize> {
    loop {
        let keys: Vec<(usize, Vec<(u8, usize)>)> = (0..mol.atom_count())
            .map(|i| {
                let mut nb: Vec<(u8, usize)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(n, b)| (mol.bonds[b].order.code(), ranks[n]))
                    .collect();
                nb.sort_unstable();
                (ranks[i], nb)
            })
            .collect();
        let next = dense_rank(&keys);
        if class_count(&next) == class_count(&ranks) {
            return next;
        }
        ranks = next;
    }
}

/// Symmetry classes: refined invariant ranks without tie breaking.
pub fn symmetry_classes(mol: &Molecule) -> Vec<usize> {
    refine(mol, dense_rank(&initial_invariants(mol)))
}

/// Distinct canonical ranks for every atom.
pub fn canonical_ranks(mol: &Molecule) -> Vec<usize> {
    let n = mol.atom_count();
    let mut ranks = symmetry_classes(mol);
    while class_count(&ranks) < n {
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..n).find(|&r| counts[r] > 1).unwrap();
        let pick = (0..n).find(|&i| ranks[i] == tied).unwrap();
        let mut doubled: Vec<usize> = ranks.iter().map(|r| r * 2 + 1).collect();
        doubled[pick] -= 1;
        ranks = refine(mol, dense_rank(&doubled));
    }
    ranks
}

pub fn canonicalize(mol: &Molecule) -> Result<CanonicalForm, CanonError> {
    let report = check_validity(mol);
    if !report.valid {
        let (atom, reason) = &report.violations[0];
        return Err(CanonError::InvalidMolecule(format!(
            "atom {atom}: {reason}"
        )));
    }
    Ok(canonicalize_unchecked(mol))
}

/// Canonical form without the validity gate; used for fragment keys where
/// attachment pseudo-atoms are present.
pub fn canonicalize_unchecked(mol: &Molecule) -> CanonicalForm {
    let rank = canonical_ranks(mol);
    let text = write_ranked(mol, &rank);
    CanonicalForm { text, rank }
}

pub fn write_smiles(mol: &Molecule) -> Result<String, CanonError> {
    canonicalize(mol).map(|c| c.text)
}

/// Hydrogen count the parser infers for a bare symbol in this context.
fn bare_hydrogens(mol: &Molecule, atom: usize) -> Option<u8> {
    let a = &mol.atoms[atom];
    let valences = a.element.default_valences();
    if a.aromatic {
        let v = *valences.first()?;
        let mut used = 0u8;
        let mut multiple = false;
        for &(_, b) in mol.neighbors(atom) {
            let bond = &mol.bonds[b];
            match bond.order {
                BondOrder::Aromatic | BondOrder::Single => used += 1,
                BondOrder::Double => {
                    used += 2;
                    multiple = true
                }
                BondOrder::Triple => {
                    used += 3;
                    multiple = true
                }
            }
        }
        let pi = u8::from(!multiple && v > used);
        Some(v.saturating_sub(used + pi))
    } else {
        let used = mol.bond_order_sum(atom);
        let v = valences.iter().copied().filter(|&v| v >= used).min()?;
        Some(v - used)
    }
}

fn atom_text(mol: &Molecule, atom: usize) -> String {
    let a = &mol.atoms[atom];
    let symbol = if a.element == Element::DUMMY {
        "*".to_string()
    } else if a.aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    let bare_ok = a.formal_charge == 0
        && a.isotope.is_none()
        && if a.element == Element::DUMMY {
            a.total_h() == 0
        } else {
            let aromatic_bare =
                !a.aromatic || matches!(a.element.atomic_number(), 5 | 6 | 7 | 8 | 15 | 16);
            a.element.is_organic_subset()
                && aromatic_bare
                && bare_hydrogens(mol, atom) == Some(a.total_h())
        };
    if bare_ok {
        return symbol;
    }
    let mut s = String::from("[");
    if let Some(iso) = a.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&symbol);
    match a.total_h() {
        0 => {}
        1 => s.push('H'),
        h => s.push_str(&format!("H{h}")),
    }
    match a.formal_charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    s.push(']');
    s
}

fn bond_text(mol: &Molecule, bond: usize) -> &'static str {
    let b = &mol.bonds[bond];
    match b.order {
        BondOrder::Single if mol.atoms[b.a].aromatic && mol.atoms[b.b].aromatic => "-",
        BondOrder::Single | BondOrder::Aromatic => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
    }
}

fn digit_text(d: usize) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d}")
    }
}

/// Writes SMILES following the given distinct ranks.
/// DFS frame: atom, its rank-ordered (neighbor, bond) list, next index.
type DfsFrame = (usize, Vec<(usize, usize)>, usize);

pub fn write_ranked(mol: &Molecule, rank: &[usize]) -> String {
    let n = mol.atom_count();
    // Pass 1: DFS order, tree children and ring-closure bonds.
    let mut visited = vec![false; n];
    let mut order_pos = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut closures: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    let mut tree_bond = vec![false; mol.bond_count()];
    let mut counter = 0;

    let sorted_neighbors = |v: usize| {
        let mut nb: Vec<(usize, usize)> = mol.neighbors(v).to_vec();
        nb.sort_by(|x, y| rank[y.0].cmp(&rank[x.0]));
        nb
    };

    while let Some(root) = (0..n).filter(|&i| !visited[i]).max_by_key(|&i| rank[i]) {
        roots.push(root);
        // iterative DFS preserving recursive visiting order
        let mut stack: Vec<DfsFrame> = Vec::new();
        visited[root] = true;
        order_pos[root] = counter;
        counter += 1;
        stack.push((root, sorted_neighbors(root), 0));
        while let Some((v, nbrs, idx)) = stack.last_mut() {
            if *idx >= nbrs.len() {
                stack.pop();
                continue;
            }
            let (w, b) = nbrs[*idx];
            *idx += 1;
            let v = *v;
            if tree_bond[b] {
                continue;
            }
            if visited[w] {
                if order_pos[w] < order_pos[v] && !closures[w].iter().any(|&(_, cb)| cb == b) {
                    closures[w].push((v, b));
                    closures[v].push((w, b));
                }
                continue;
            }
            tree_bond[b] = true;
            children[v].push((w, b));
            visited[w] = true;
            order_pos[w] = counter;
            counter += 1;
            let nb = sorted_neighbors(w);
            stack.push((w, nb, 0));
        }
    }

    // Pass 2: emit text.
    let mut out = String::new();
    let mut digit_of_bond: std::collections::HashMap<usize, usize> =
        std::collections::HashMap::new();
    let mut in_use: Vec<bool> = vec![false; 100];
    for (ci, &root) in roots.iter().enumerate() {
        if ci > 0 {
            out.push('.');
        }
        // explicit stack of pending output items
        enum Item {
            Atom(usize, Option<usize>),
            Open,
            Close,
        }
        let mut stack = vec![Item::Atom(root, None)];
        while let Some(item) = stack.pop() {
            match item {
                Item::Open => out.push('('),
                Item::Close => out.push(')'),
                Item::Atom(v, via) => {
                    if let Some(b) = via {
                        out.push_str(bond_text(mol, b));
                    }
                    out.push_str(&atom_text(mol, v));
                    // closings first (partner already written), then openings
                    let mut closing: Vec<(usize, usize)> = closures[v]
                        .iter()
                        .copied()
                        .filter(|&(p, _)| order_pos[p] < order_pos[v])
                        .collect();
                    closing.sort_by_key(|&(_, b)| digit_of_bond[&b]);
                    let opening: Vec<(usize, usize)> = closures[v]
                        .iter()
                        .copied()
                        .filter(|&(p, _)| order_pos[p] > order_pos[v])
                        .collect();
                    let mut freed = Vec::new();
                    for &(_, b) in &closing {
                        let d = digit_of_bond[&b];
                        out.push_str(bond_text(mol, b));
                        out.push_str(&digit_text(d));
                        freed.push(d);
                    }
                    for &(_, b) in &opening {
                        let d = (1..100)
                            .find(|&d| !in_use[d])
                            .expect("ring-closure digits exhausted");
                        in_use[d] = true;
                        digit_of_bond.insert(b, d);
                        out.push_str(&digit_text(d));
                    }
                    for d in freed {
                        in_use[d] = false;
                    }
                    let kids = &children[v];
                    // push in reverse so the first child is emitted first
                    for (k, &(w, b)) in kids.iter().enumerate().rev() {
                        if k + 1 < kids.len() {
                            stack.push(Item::Close);
                            stack.push(Item::Atom(w, Some(b)));
                            stack.push(Item::Open);
                        } else {
                            stack.push(Item::Atom(w, Some(b)));
                        }
                    }
                }
            }
        }
    }
    out
}
