use serde::{Deserialize, Serialize};

use crate::chem::{BondOrder, Molecule};

/// When two SSSR rings count as a fused system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionRule {
    /// Rings sharing more than one bond (bridged systems). Ortho-fused
    /// pairs, which share exactly one bond, are allowed.
    #[default]
    SharedBonds,
    /// Any two rings sharing at least one bond.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingPolicy {
    pub fusion: FusionRule,
    /// Aromatic rings with fewer atoms than this are "small".
    pub small_aromatic_below: usize,
}

impl Default for RingPolicy {
    fn default() -> Self {
        RingPolicy {
            fusion: FusionRule::SharedBonds,
            small_aromatic_below: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingStats {
    pub ring_count: usize,
    pub max_ring_size: usize,
    pub rings_gt6: usize,
    pub has_fused: bool,
    pub has_small_aromatic: bool,
}

pub fn ring_stats(mol: &Molecule) -> RingStats {
    ring_stats_with(mol, &RingPolicy::default())
}

pub fn ring_stats_with(mol: &Molecule, policy: &RingPolicy) -> RingStats {
    let info = mol.rings();
    let sizes: Vec<usize> = info.rings.iter().map(Vec::len).collect();
    let mut has_fused = false;
    for i in 0..info.len() {
        for j in i + 1..info.len() {
            let shared = info.ring_bonds[i]
                .iter()
                .filter(|b| info.ring_bonds[j].contains(b))
                .count();
            let fused = match policy.fusion {
                FusionRule::SharedBonds => shared > 1,
                FusionRule::Strict => shared >= 1,
            };
            has_fused |= fused;
        }
    }
    let has_small_aromatic = info.ring_bonds.iter().zip(&sizes).any(|(bonds, &size)| {
        size < policy.small_aromatic_below
            && bonds
                .iter()
                .all(|&b| mol.bonds[b].order == BondOrder::Aromatic)
    });
    RingStats {
        ring_count: info.len(),
        max_ring_size: sizes.iter().copied().max().unwrap_or(0),
        rings_gt6: sizes.iter().filter(|&&s| s > 6).count(),
        has_fused,
        has_small_aromatic,
    }
}

/// Spiro atoms (shared by two rings that share only that atom) and
/// bridgehead atoms (ends of a shared path between two rings that share
/// more than one bond).
pub fn spiro_and_bridgehead_counts(mol: &Molecule) -> (usize, usize) {
    let info = mol.rings();
    let mut spiro = std::collections::BTreeSet::new();
    let mut bridge = std::collections::BTreeSet::new();
    for i in 0..info.len() {
        for j in i + 1..info.len() {
            let shared: Vec<usize> = info.rings[i]
                .iter()
                .copied()
                .filter(|a| info.rings[j].contains(a))
                .collect();
            if shared.len() == 1 {
                spiro.insert(shared[0]);
            } else if shared.len() > 2 {
                for &a in &shared {
                    let inner = mol
                        .neighbors(a)
                        .iter()
                        .filter(|(n, _)| shared.contains(n))
                        .count();
                    if inner <= 1 {
                        bridge.insert(a);
                    }
                }
            }
        }
    }
    (spiro.len(), bridge.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn stats(s: &str) -> RingStats {
        ring_stats(&parse_smiles(s).unwrap())
    }

    #[test]
    fn benzene() {
        let s = stats("c1ccccc1");
        assert_eq!(
            (
                s.ring_count,
                s.max_ring_size,
                s.rings_gt6,
                s.has_fused,
                s.has_small_aromatic
            ),
            (1, 6, 0, false, false)
        );
    }

    #[test]
    fn cyclodecane() {
        assert_eq!(stats("C1CCCCCCCCC1").max_ring_size, 10);
        assert_eq!(stats("CCO").max_ring_size, 0);
    }

    #[test]
    fn ortho_fusion_allowed_bridged_flagged() {
        assert!(!stats("c1ccc2ccccc2c1").has_fused);
        assert!(stats("C1CC2CCC1C2").has_fused);
        let strict = RingPolicy {
            fusion: FusionRule::Strict,
            ..Default::default()
        };
        assert!(ring_stats_with(&parse_smiles("c1ccc2ccccc2c1").unwrap(), &strict).has_fused);
    }

    #[test]
    fn spiro_and_bridgeheads() {
        assert_eq!(
            spiro_and_bridgehead_counts(&parse_smiles("C1CCC2(CC1)CCCC2").unwrap()),
            (1, 0)
        );
        assert_eq!(
            spiro_and_bridgehead_counts(&parse_smiles("C1CC2CCC1C2").unwrap()),
            (0, 2)
        );
        assert_eq!(
            spiro_and_bridgehead_counts(&parse_smiles("c1ccc2ccccc2c1").unwrap()),
            (0, 0)
        );
    }
}
