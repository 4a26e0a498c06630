use serde::{Deserialize, Serialize};

use super::molecule::Molecule;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub violations: Vec<(usize, String)>,
}

/// Valence and aromaticity check. At most one violation is reported per
/// atom; violations are ordered by atom index.
pub fn check_validity(mol: &Molecule) -> ValidityReport {
    let mut violations: Vec<(usize, String)> = Vec::new();
    for (i, atom) in mol.atoms.iter().enumerate() {
        let allowed = atom.element.allowed_valences(atom.formal_charge);
        let total = mol.bond_order_sum(i) as u16 + atom.total_h() as u16;
        if !allowed.is_empty() && !allowed.iter().any(|&v| v as u16 == total) {
            violations.push((
                i,
                format!(
                    "valence {total} not allowed for {}{} (allowed {:?})",
                    atom.element,
                    charge_suffix(atom.formal_charge),
                    allowed
                ),
            ));
            continue;
        }
        if atom.input_aromatic && !atom.aromatic {
            violations.push((i, "aromatic atom outside any aromatic ring".into()));
            continue;
        }
        if let Some(issue) = mol.issues.iter().find(|issue| issue.atom == i) {
            violations.push((i, issue.reason.clone()));
        }
    }
    ValidityReport {
        valid: violations.is_empty(),
        violations,
    }
}

fn charge_suffix(charge: i8) -> String {
    match charge {
        0 => String::new(),
        1 => "+".into(),
        -1 => "-".into(),
        c if c > 0 => format!("+{c}"),
        c => format!("{c}"),
    }
}
