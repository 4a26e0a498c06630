//! Physicochemical and structural descriptors.

mod brics;
mod crippen;
mod mass;
mod morgan;
mod ringstats;
mod sascore;
mod scaffold;

use thiserror::Error;

pub use brics::{atom_environments, brics_fragments, cleavable_bonds, FragmentSet, BRICS_PAIRS};
pub use crippen::{
    contribution as crippen_contribution, crippen_contributions, crippen_logp, CrippenAtom,
};
pub use mass::molecular_weight;
pub use morgan::{
    atom_environment_ids, default_fingerprint, environment_counts, fnv1a64, morgan_fingerprint,
    tanimoto, Fingerprint, FingerprintError, DEFAULT_RADIUS, DEFAULT_WIDTH,
};
pub use ringstats::{
    ring_stats, ring_stats_with, spiro_and_bridgehead_counts, FusionRule, RingPolicy, RingStats,
};
pub use sascore::{
    build_fragment_table, chiral_center_count, rescale as sa_rescale, sa_breakdown,
    sa_environments, sa_score, FragmentTable, SaBreakdown, UNKNOWN_FRAGMENT_SCORE,
};
pub use scaffold::{bemis_murcko_scaffold, scaffold_atoms, Scaffold};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptorError {
    #[error("no logP atom type for atom {0}")]
    UnclassifiableAtom(usize),
    #[error("SA fragment table is missing or empty")]
    MissingFragmentTable,
}
