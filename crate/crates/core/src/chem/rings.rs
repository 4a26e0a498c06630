//! Smallest set of smallest rings.
//!
//! Candidate cycles come from two sources: Horton cycles (shortest path
//! from a root to each end of an edge, closed by that edge) and every
//! shortest cycle through each edge. Candidates are sorted by size and then
//! by their sorted atom lists, and accepted greedily when independent over
//! GF(2) in edge space until the circuit rank is reached.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::molecule::Molecule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingInfo {
    /// Each ring as an atom cycle in path order, starting at its smallest atom.
    pub rings: Vec<Vec<usize>>,
    pub atom_ring_count: Vec<usize>,
    pub bond_ring_count: Vec<usize>,
    /// Bond indices of each ring, parallel to `rings`.
    pub ring_bonds: Vec<Vec<usize>>,
}

impl RingInfo {
    pub fn len(&self) -> usize {
        self.rings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }

    pub fn atom_rings(&self, atom: usize) -> impl Iterator<Item = usize> + '_ {
        self.rings
            .iter()
            .enumerate()
            .filter(move |(_, r)| r.contains(&atom))
            .map(|(i, _)| i)
    }
}

/// Number of independent cycles: bonds - atoms + components.
pub fn circuit_rank(mol: &Molecule) -> usize {
    (mol.bond_count() + mol.components().len()).saturating_sub(mol.atom_count())
}

pub fn perceive_rings(mol: &Molecule) -> RingInfo {
    let n = mol.atom_count();
    let rank = circuit_rank(mol);
    let mut info = RingInfo {
        rings: Vec::new(),
        atom_ring_count: vec![0; n],
        bond_ring_count: vec![0; mol.bond_count()],
        ring_bonds: Vec::new(),
    };
    if rank == 0 {
        return info;
    }

    let cyclic = cyclic_bonds(mol);
    let mut candidates: BTreeSet<(usize, Vec<usize>, Vec<usize>)> = BTreeSet::new();
    let mut push = |cycle: Vec<usize>| {
        if let Some(c) = normalize_cycle(mol, &cycle) {
            let mut key = c.clone();
            key.sort_unstable();
            candidates.insert((c.len(), key, c));
        }
    };

    let ring_atoms: Vec<usize> = (0..n)
        .filter(|&a| mol.neighbors(a).iter().any(|&(_, b)| cyclic[b]))
        .collect();

    // Horton candidates.
    for &root in &ring_atoms {
        let (dist, parent) = bfs(mol, root, &cyclic, None);
        for (bi, bond) in mol.bonds.iter().enumerate() {
            if !cyclic[bi] || dist[bond.a] == usize::MAX || dist[bond.b] == usize::MAX {
                continue;
            }
            let mut full = path_to_root(&parent, bond.a);
            let mut back = path_to_root(&parent, bond.b);
            back.reverse();
            full.extend(back.into_iter().skip(1));
            push(full);
        }
    }

    // All shortest cycles through each cyclic edge.
    for (bi, bond) in mol.bonds.iter().enumerate() {
        if !cyclic[bi] {
            continue;
        }
        for path in all_shortest_paths(mol, bond.a, bond.b, &cyclic, bi, 64) {
            push(path);
        }
    }

    let words = mol.bond_count().div_ceil(64);
    let mut basis: Vec<(usize, Vec<u64>)> = Vec::new();
    for (_, _, cycle) in candidates {
        if info.rings.len() == rank {
            break;
        }
        let bonds = cycle_bonds(mol, &cycle);
        let mut vec = vec![0u64; words];
        for &b in &bonds {
            vec[b / 64] |= 1 << (b % 64);
        }
        // Reduce against the current echelon basis.
        for (pivot, row) in &basis {
            if vec[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in vec.iter_mut().zip(row) {
                    *x ^= y;
                }
            }
        }
        let Some(pivot) = first_bit(&vec) else {
            continue;
        };
        for (_, row) in basis.iter_mut() {
            if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (x, y) in row.iter_mut().zip(&vec) {
                    *x ^= y;
                }
            }
        }
        basis.push((pivot, vec));
        for &a in &cycle {
            info.atom_ring_count[a] += 1;
        }
        for &b in &bonds {
            info.bond_ring_count[b] += 1;
        }
        info.rings.push(cycle);
        info.ring_bonds.push(bonds);
    }
    info
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Bonds that lie on some cycle (i.e. are not bridges).
pub fn cyclic_bonds(mol: &Molecule) -> Vec<bool> {
    let n = mol.atom_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; mol.bond_count()];
    let mut time = 0;
    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        // iterative DFS: (vertex, parent bond, next neighbor index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(start, usize::MAX, 0)];
        disc[start] = time;
        low[start] = time;
        time += 1;
        while let Some(&mut (v, pb, ref mut idx)) = stack.last_mut() {
            if *idx < mol.neighbors(v).len() {
                let (w, b) = mol.neighbors(v)[*idx];
                *idx += 1;
                if b == pb {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, b, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if low[v] > disc[u] {
                        is_bridge[pb] = true;
                    }
                }
            }
        }
    }
    is_bridge.into_iter().map(|b| !b).collect()
}

fn bfs(
    mol: &Molecule,
    root: usize,
    cyclic: &[bool],
    skip_bond: Option<usize>,
) -> (Vec<usize>, Vec<usize>) {
    let n = mol.atom_count();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    dist[root] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        let mut nbrs: Vec<(usize, usize)> = mol.neighbors(v).to_vec();
        nbrs.sort_unstable();
        for (w, b) in nbrs {
            if !cyclic[b] || Some(b) == skip_bond {
                continue;
            }
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    (dist, parent)
}

/// Path from `v` back to the BFS root, starting with `v`.
fn path_to_root(parent: &[usize], mut v: usize) -> Vec<usize> {
    let mut path = vec![v];
    while parent[v] != usize::MAX {
        v = parent[v];
        path.push(v);
    }
    path
}

/// All shortest paths from `a` to `b` avoiding `skip`, as atom lists.
fn all_shortest_paths(
    mol: &Molecule,
    a: usize,
    b: usize,
    cyclic: &[bool],
    skip: usize,
    cap: usize,
) -> Vec<Vec<usize>> {
    let (dist, _) = bfs(mol, a, cyclic, Some(skip));
    if dist[b] == usize::MAX {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut path = vec![b];
    fn walk(
        mol: &Molecule,
        dist: &[usize],
        cyclic: &[bool],
        skip: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        let v = *path.last().unwrap();
        if dist[v] == 0 {
            let mut p = path.clone();
            p.reverse();
            out.push(p);
            return;
        }
        let mut nbrs: Vec<(usize, usize)> = mol.neighbors(v).to_vec();
        nbrs.sort_unstable();
        for (w, bond) in nbrs {
            if bond == skip || !cyclic[bond] {
                continue;
            }
            if dist[w] != usize::MAX && dist[w] + 1 == dist[v] {
                path.push(w);
                walk(mol, dist, cyclic, skip, path, out, cap);
                path.pop();
            }
        }
    }
    walk(mol, &dist, cyclic, skip, &mut path, &mut out, cap);
    out
}

/// Checks that `cycle` is a simple closed walk and rotates it to start at
/// its smallest atom, oriented toward the smaller of the two neighbors.
fn normalize_cycle(mol: &Molecule, cycle: &[usize]) -> Option<Vec<usize>> {
    if cycle.len() < 3 {
        return None;
    }
    let mut seen = BTreeSet::new();
    if !cycle.iter().all(|a| seen.insert(*a)) {
        return None;
    }
    for i in 0..cycle.len() {
        let (x, y) = (cycle[i], cycle[(i + 1) % cycle.len()]);
        mol.bond_between(x, y)?;
    }
    let start = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
    let mut rotated: Vec<usize> = cycle[start..]
        .iter()
        .chain(&cycle[..start])
        .copied()
        .collect();
    if rotated.len() > 2 && rotated[rotated.len() - 1] < rotated[1] {
        rotated[1..].reverse();
    }
    Some(rotated)
}

fn cycle_bonds(mol: &Molecule, cycle: &[usize]) -> Vec<usize> {
    let mut bonds: Vec<usize> = (0..cycle.len())
        .map(|i| {
            mol.bond_between(cycle[i], cycle[(i + 1) % cycle.len()])
                .unwrap()
        })
        .collect();
    bonds.sort_unstable();
    bonds
}
