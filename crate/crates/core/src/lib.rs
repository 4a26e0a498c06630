//! Evaluation toolkit for generated small-molecule hit candidates.
//!
//! The crate is organized bottom-up:
//!
//! - [`chem`]: molecular graphs, valence model, rings, aromaticity.
//! - [`smiles`]: SMILES reading, canonical ranking and writing.
//! - [`patterns`]: a SMARTS subset, subgraph matching, structural alerts.
//! - [`descriptors`]: mass, logP, synthetic accessibility, fingerprints,
//!   scaffolds, BRICS fragments, ring statistics.
//! - [`hitfilter`]: the hit-like filter cascade and failure tables.
//! - [`metrics`]: validity/uniqueness/novelty and distribution metrics.
//! - [`docking`]: docking-score tables, cohort comparison and hit triage.

pub mod chem;
pub mod data;
pub mod descriptors;
pub mod docking;
pub mod hitfilter;
pub mod io;
pub mod metrics;
pub mod patterns;
pub mod smiles;

pub use chem::{Atom, Bond, BondOrder, Element, Molecule};
