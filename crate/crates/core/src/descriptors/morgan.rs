//! Morgan (ECFP-style) circular fingerprints.
//!
//! Radius-0 identifiers hash the byte string
//! `[atomic number, charge as i8, degree, total H, in ring, aromatic]`.
//! At radius r each atom hashes `previous id (LE u64) ++ r` followed by its
//! neighbors' `(bond code, previous neighbor id)` pairs sorted ascending.
//! The hash is 64-bit FNV-1a, so identifiers are identical on every
//! platform. Every identifier of every radius is folded into the bitset by
//! `id % width`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::Molecule;

pub const DEFAULT_RADIUS: usize = 2;
pub const DEFAULT_WIDTH: usize = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("fingerprint widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("fingerprint width {0} is not a power of two")]
    BadWidth(usize),
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    pub bits: Vec<u64>,
    pub width: usize,
    pub radius: usize,
    pub on_count: usize,
}

impl Fingerprint {
    pub fn empty(width: usize, radius: usize) -> Fingerprint {
        Fingerprint {
            bits: vec![0; width.div_ceil(64)],
            width,
            radius,
            on_count: 0,
        }
    }

    pub fn from_bits(width: usize, on: impl IntoIterator<Item = usize>) -> Fingerprint {
        let mut fp = Fingerprint::empty(width, 0);
        for b in on {
            fp.set(b % width);
        }
        fp
    }

    pub fn set(&mut self, bit: usize) {
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        if self.bits[w] & m == 0 {
            self.bits[w] |= m;
            self.on_count += 1;
        }
    }

    pub fn get(&self, bit: usize) -> bool {
        self.bits[bit / 64] & (1u64 << (bit % 64)) != 0
    }

    pub fn on_bits(&self) -> Vec<usize> {
        (0..self.width).filter(|&b| self.get(b)).collect()
    }
}

/// Identifiers per radius: `ids[r][atom]`.
pub fn atom_environment_ids(mol: &Molecule, radius: usize) -> Vec<Vec<u64>> {
    let n = mol.atom_count();
    let mut layers = Vec::with_capacity(radius + 1);
    let initial: Vec<u64> = (0..n)
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
    layers.push(initial);
    for r in 1..=radius {
        let prev = &layers[r - 1];
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut nb: Vec<(u8, u64)> = mol
                    .neighbors(i)
                    .iter()
                    .map(|&(j, b)| (mol.bonds[b].order.code(), prev[j]))
                    .collect();
                nb.sort_unstable();
                let mut bytes = Vec::with_capacity(9 + nb.len() * 9);
                bytes.extend_from_slice(&prev[i].to_le_bytes());
                bytes.push(r as u8);
                for (code, id) in nb {
                    bytes.push(code);
                    bytes.extend_from_slice(&id.to_le_bytes());
                }
                fnv1a64(&bytes)
            })
            .collect();
        layers.push(next);
    }
    layers
}

/// Unfolded identifier counts over all atoms and radii 0..=radius.
pub fn environment_counts(mol: &Molecule, radius: usize) -> BTreeMap<u64, usize> {
    let mut counts = BTreeMap::new();
    for layer in atom_environment_ids(mol, radius) {
        for id in layer {
            *counts.entry(id).or_default() += 1;
        }
    }
    counts
}

pub fn morgan_fingerprint(
    mol: &Molecule,
    radius: usize,
    width: usize,
) -> Result<Fingerprint, FingerprintError> {
    if !width.is_power_of_two() {
        return Err(FingerprintError::BadWidth(width));
    }
    let mut fp = Fingerprint::empty(width, radius);
    for layer in atom_environment_ids(mol, radius) {
        for id in layer {
            fp.set((id % width as u64) as usize);
        }
    }
    Ok(fp)
}

pub fn default_fingerprint(mol: &Molecule) -> Fingerprint {
    morgan_fingerprint(mol, DEFAULT_RADIUS, DEFAULT_WIDTH).expect("default width is a power of two")
}

/// Jaccard similarity of two bitsets. Two empty fingerprints are identical
/// and score 1.0.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, FingerprintError> {
    if a.width != b.width {
        return Err(FingerprintError::WidthMismatch(a.width, b.width));
    }
    let (mut inter, mut union) = (0u32, 0u32);
    for (x, y) in a.bits.iter().zip(&b.bits) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        log::debug!("tanimoto of two empty fingerprints taken as 1.0");
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn fp(s: &str) -> Fingerprint {
        default_fingerprint(&parse_smiles(s).unwrap())
    }

    #[test]
    fn fnv_reference_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn spelling_independent() {
        assert_eq!(fp("OCC"), fp("CCO"));
        assert_eq!(fp("c1ccccc1O"), fp("Oc1ccccc1"));
    }

    #[test]
    fn radius_zero_ethanol() {
        let m = parse_smiles("CCO").unwrap();
        let fp0 = morgan_fingerprint(&m, 0, 2048).unwrap();
        assert!(fp0.on_count <= 3);
        assert_eq!(fp0.on_count, 3);
    }

    #[test]
    fn aromatic_flag_matters() {
        assert_ne!(fp("c1ccccc1"), fp("C1CCCCC1"));
    }

    #[test]
    fn tanimoto_hand_cases() {
        let a = Fingerprint::from_bits(64, [1, 2, 3]);
        let b = Fingerprint::from_bits(64, [2, 3, 4]);
        assert_eq!(tanimoto(&a, &b).unwrap(), 0.5);
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        let c = Fingerprint::from_bits(64, [10]);
        assert_eq!(tanimoto(&a, &c).unwrap(), 0.0);
        let e = Fingerprint::empty(64, 0);
        assert_eq!(tanimoto(&e, &e).unwrap(), 1.0);
        assert!(matches!(
            tanimoto(&a, &Fingerprint::empty(128, 0)),
            Err(FingerprintError::WidthMismatch(64, 128))
        ));
    }
}
