//! SMILES reading and canonical writing.

mod canon;
mod parser;

pub use canon::{
    canonical_ranks, canonicalize, canonicalize_unchecked, symmetry_classes, write_ranked,
    write_smiles, CanonError, CanonicalForm,
};
pub use parser::{parse_smiles, tokenize, BondSymbol, SmilesError, SmilesToken};

/// Canonical key of a SMILES string, or `None` when it does not parse or
/// fails validity.
pub fn canonical_key(text: &str) -> Option<String> {
    let mol = parse_smiles(text).ok()?;
    write_smiles(&mol).ok()
}
