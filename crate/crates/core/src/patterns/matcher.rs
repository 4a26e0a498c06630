//! Backtracking subgraph matcher.
//!
//! Pattern nodes are visited in breadth-first order from node 0, so every
//! node after the first is anchored to an already-mapped neighbor and only
//! that atom's neighbors are tried. Results are deduplicated by matched atom
//! set, keeping the lexicographically smallest mapping for each set.

use std::collections::BTreeMap;

use super::smarts::{AtomPredicate, BondPredicate, Pattern};
use crate::chem::{BondOrder, Molecule};

pub fn atom_matches(pred: &AtomPredicate, mol: &Molecule, atom: usize) -> bool {
    if pred.wildcard {
        return true;
    }
    let a = &mol.atoms[atom];
    if let Some(set) = &pred.element_set {
        if !set.contains(&a.element) {
            return false;
        }
    }
    if pred.aromatic.is_some_and(|x| x != a.aromatic) {
        return false;
    }
    if pred.charge.is_some_and(|c| c != a.formal_charge) {
        return false;
    }
    if pred.in_ring.is_some_and(|r| r != mol.atom_in_ring(atom)) {
        return false;
    }
    if let Some(k) = pred.ring_count {
        if mol.rings().atom_ring_count[atom] != k {
            return false;
        }
    }
    let degree = mol.degree(atom);
    if pred.degree.is_some_and(|d| d != degree) || pred.min_degree.is_some_and(|d| degree < d) {
        return false;
    }
    if pred.total_h.is_some_and(|h| h != a.total_h()) {
        return false;
    }
    true
}

pub fn bond_matches(pred: &BondPredicate, mol: &Molecule, bond: usize) -> bool {
    let b = &mol.bonds[bond];
    if pred.in_ring.is_some_and(|r| r != b.in_ring) {
        return false;
    }
    let aromatic = b.order == BondOrder::Aromatic;
    if pred.aromatic.is_some_and(|x| x != aromatic) {
        return false;
    }
    if pred.any {
        return true;
    }
    match pred.order {
        Some(order) => order == b.order,
        None => matches!(b.order, BondOrder::Single | BondOrder::Aromatic),
    }
}

struct Plan {
    order: Vec<usize>,
    /// For each position in `order` after the first: (anchor node, edge index).
    anchor: Vec<Option<(usize, usize)>>,
    /// Edges to check once both ends are mapped, indexed by the later node.
    checks: Vec<Vec<(usize, usize)>>,
}

fn plan(pattern: &Pattern) -> Plan {
    let n = pattern.nodes.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, &(i, j, _)) in pattern.edges.iter().enumerate() {
        adj[i].push((j, e));
        adj[j].push((i, e));
    }
    let mut pos = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut anchor = Vec::with_capacity(n);
    for start in 0..n {
        if pos[start] != usize::MAX {
            continue;
        }
        pos[start] = order.len();
        order.push(start);
        anchor.push(None);
        let mut head = order.len() - 1;
        while head < order.len() {
            let v = order[head];
            for &(w, e) in &adj[v] {
                if pos[w] == usize::MAX {
                    pos[w] = order.len();
                    order.push(w);
                    anchor.push(Some((v, e)));
                }
            }
            head += 1;
        }
    }
    let mut checks = vec![Vec::new(); n];
    for (e, &(i, j, _)) in pattern.edges.iter().enumerate() {
        let later = if pos[i] > pos[j] { i } else { j };
        let other = if later == i { j } else { i };
        let is_anchor = anchor[pos[later]].is_some_and(|(a, ae)| a == other && ae == e);
        if !is_anchor {
            checks[later].push((other, e));
        }
    }
    Plan {
        order,
        anchor,
        checks,
    }
}

/// Visits injective mappings until `visit` returns false.
/// With `root`, pattern node 0 is pinned to that atom.
fn search(
    pattern: &Pattern,
    mol: &Molecule,
    root: Option<usize>,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) {
    let n = pattern.nodes.len();
    if n == 0 || n > mol.atom_count() {
        return;
    }
    let plan = plan(pattern);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; mol.atom_count()];
    extend(pattern, mol, &plan, root, 0, &mut map, &mut used, visit);
}

#[allow(clippy::too_many_arguments)]
fn extend(
    pattern: &Pattern,
    mol: &Molecule,
    plan: &Plan,
    root: Option<usize>,
    depth: usize,
    map: &mut [usize],
    used: &mut [bool],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if depth == plan.order.len() {
        return visit(map);
    }
    let node = plan.order[depth];
    let candidates: Vec<(usize, Option<usize>)> = match plan.anchor[depth] {
        None if depth == 0 && root.is_some() => vec![(root.unwrap(), None)],
        None => (0..mol.atom_count()).map(|a| (a, None)).collect(),
        Some((anchor, _)) => mol
            .neighbors(map[anchor])
            .iter()
            .map(|&(a, b)| (a, Some(b)))
            .collect(),
    };
    for (atom, via) in candidates {
        if used[atom] || !atom_matches(&pattern.nodes[node], mol, atom) {
            continue;
        }
        if let (Some((_, e)), Some(b)) = (plan.anchor[depth], via) {
            if !bond_matches(&pattern.edges[e].2, mol, b) {
                continue;
            }
        }
        let closes =
            plan.checks[node]
                .iter()
                .all(|&(other, e)| match mol.bond_between(atom, map[other]) {
                    Some(b) => bond_matches(&pattern.edges[e].2, mol, b),
                    None => false,
                });
        if !closes {
            continue;
        }
        map[node] = atom;
        used[atom] = true;
        let go_on = extend(pattern, mol, plan, root, depth + 1, map, used, visit);
        used[atom] = false;
        map[node] = usize::MAX;
        if !go_on {
            return false;
        }
    }
    true
}

/// All matches, one per distinct atom set, ordered by sorted atom set.
pub fn find_matches(mol: &Molecule, pattern: &Pattern) -> Vec<Vec<usize>> {
    let mut by_set: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    search(pattern, mol, None, &mut |map| {
        let mut key = map.to_vec();
        key.sort_unstable();
        by_set
            .entry(key)
            .and_modify(|m| {
                if map < m.as_slice() {
                    *m = map.to_vec();
                }
            })
            .or_insert_with(|| map.to_vec());
        true
    });
    by_set.into_values().collect()
}

pub fn has_match(mol: &Molecule, pattern: &Pattern) -> bool {
    let mut found = false;
    search(pattern, mol, None, &mut |_| {
        found = true;
        false
    });
    found
}

/// True when some mapping sends pattern node 0 to `atom`.
pub fn matches_at(mol: &Molecule, pattern: &Pattern, atom: usize) -> bool {
    let mut found = false;
    search(pattern, mol, Some(atom), &mut |_| {
        found = true;
        false
    });
    found
}

/// Number of raw injective mappings, automorphic repeats included.
pub fn count_raw_mappings(mol: &Molecule, pattern: &Pattern) -> usize {
    let mut n = 0;
    search(pattern, mol, None, &mut |_| {
        n += 1;
        true
    });
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::parse_pattern;
    use crate::smiles::parse_smiles;

    fn count(smiles: &str, smarts: &str) -> usize {
        find_matches(
            &parse_smiles(smiles).unwrap(),
            &parse_pattern(smarts).unwrap(),
        )
        .len()
    }

    #[test]
    fn nitrobenzene_one_nitro() {
        assert_eq!(count("c1ccccc1[N+](=O)[O-]", "[N+](=O)[O-]"), 1);
        assert_eq!(count("CC", "[N+](=O)[O-]"), 0);
    }

    #[test]
    fn benzene_automorphs_collapse() {
        let mol = parse_smiles("c1ccccc1").unwrap();
        let p = parse_pattern("c1ccccc1").unwrap();
        assert_eq!(count_raw_mappings(&mol, &p), 12);
        assert_eq!(find_matches(&mol, &p).len(), 1);
    }

    #[test]
    fn default_bond_is_single_or_aromatic() {
        assert_eq!(count("C=C", "CC"), 0);
        assert_eq!(count("CC", "CC"), 1);
        assert_eq!(count("c1ccccc1", "cc"), 6);
        assert_eq!(count("C=C", "C~C"), 1);
        assert_eq!(count("c1ccccc1C", "c-C"), 1);
    }

    #[test]
    fn rooted() {
        let mol = parse_smiles("CC(=O)N").unwrap();
        let p = parse_pattern("C=O").unwrap();
        assert!(matches_at(&mol, &p, 1));
        assert!(!matches_at(&mol, &p, 0));
    }

    #[test]
    fn ring_constraints() {
        assert_eq!(count("C1CCCCC1CC", "[C;R0]"), 2);
        assert_eq!(count("C1CCCCC1CC", "C@C"), 6);
        assert_eq!(count("c1ccc2ccccc2c1", "[c;R2]"), 2);
    }
}
