use crate::chem::{Element, Molecule};

/// Average molecular weight in Da: standard atomic weights of every atom
/// plus its implicit and explicit hydrogens. Isotope labels are ignored.
pub fn molecular_weight(mol: &Molecule) -> f64 {
    let h = Element::H.standard_mass();
    mol.atoms
        .iter()
        .map(|a| a.element.standard_mass() + a.total_h() as f64 * h)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    fn mw(s: &str) -> f64 {
        molecular_weight(&parse_smiles(s).unwrap())
    }

    #[test]
    fn spot_values() {
        assert!((mw("CCO") - (2.0 * 12.011 + 6.0 * 1.008 + 15.999)).abs() < 1e-9);
        assert!((mw("c1ccccc1") - 78.114).abs() < 0.01);
        assert!((mw("[Cl-]") - 35.45).abs() < 0.01);
    }

    #[test]
    fn additive_over_fragments() {
        assert!((mw("CCO.c1ccccc1") - mw("CCO") - mw("c1ccccc1")).abs() < 1e-9);
    }
}
