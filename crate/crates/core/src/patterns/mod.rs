//! Substructure patterns: a SMARTS subset, subgraph matching and
//! structural-alert severity scoring.

mod alerts;
mod matcher;
mod smarts;

pub use alerts::{
    matched_alerts, severity_score, Alert, AlertCatalog, CatalogError, Counting, ALERTS_ASSET,
};
pub use matcher::{
    atom_matches, bond_matches, count_raw_mappings, find_matches, has_match, matches_at,
};
pub use smarts::{parse_pattern, AtomPredicate, BondPredicate, Pattern, PatternError};
