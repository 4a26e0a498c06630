//! Element and valence tables.
//!
//! Both tables are plain-text data assets bundled with the crate
//! (`data/elements.tsv`, `data/charge_valences.tsv`) and parsed once on
//! first use. Rows are tab separated; lines starting with `#` are comments.

use std::collections::HashMap;
use std::fmt;

use once_cell::sync::Lazy;

use crate::data::{asset_text, parse_tsv};

const ELEMENTS_TSV: &str = include_str!("../../data/elements.tsv");
const CHARGE_VALENCES_TSV: &str = include_str!("../../data/charge_valences.tsv");

/// One row of the element table.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementData {
    pub symbol: String,
    pub atomic_number: u8,
    pub standard_mass: f64,
    pub default_valences: Vec<u8>,
}

pub struct ElementTable {
    by_number: HashMap<u8, ElementData>,
    by_symbol: HashMap<String, u8>,
    charged: HashMap<(u8, i8), Vec<u8>>,
}

impl ElementTable {
    fn parse(elements: &str, charged: &str) -> Self {
        let mut by_number = HashMap::new();
        let mut by_symbol = HashMap::new();
        for row in parse_tsv(elements) {
            let [symbol, z, mass, valences] = row.as_slice() else {
                panic!("malformed element row: {row:?}");
            };
            let z: u8 = z.parse().expect("atomic number");
            let data = ElementData {
                symbol: symbol.to_string(),
                atomic_number: z,
                standard_mass: mass.parse().expect("mass"),
                default_valences: parse_valences(valences),
            };
            assert!(
                by_symbol.insert(symbol.to_string(), z).is_none(),
                "duplicate element symbol {symbol}"
            );
            by_number.insert(z, data);
        }
        let mut charged_map = HashMap::new();
        for row in parse_tsv(charged) {
            let [symbol, charge, valences] = row.as_slice() else {
                panic!("malformed charge-valence row: {row:?}");
            };
            let z = by_symbol[*symbol];
            charged_map.insert(
                (z, charge.parse().expect("charge")),
                parse_valences(valences),
            );
        }
        ElementTable {
            by_number,
            by_symbol,
            charged: charged_map,
        }
    }
}

fn parse_valences(field: &str) -> Vec<u8> {
    if field == "-" {
        return Vec::new();
    }
    field
        .split(',')
        .map(|v| v.trim().parse().expect("valence"))
        .collect()
}

static TABLE: Lazy<ElementTable> = Lazy::new(|| {
    ElementTable::parse(
        &asset_text("elements.tsv", ELEMENTS_TSV),
        &asset_text("charge_valences.tsv", CHARGE_VALENCES_TSV),
    )
});

/// A chemical element, identified by atomic number. Atomic number 0 is the
/// `*` attachment-point pseudo-atom.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub struct Element(u8);

impl Element {
    pub const DUMMY: Element = Element(0);
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const SI: Element = Element(14);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const SE: Element = Element(34);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    pub fn from_atomic_number(z: u8) -> Option<Element> {
        TABLE.by_number.contains_key(&z).then_some(Element(z))
    }

    pub fn from_symbol(symbol: &str) -> Option<Element> {
        TABLE.by_symbol.get(symbol).map(|&z| Element(z))
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn data(self) -> &'static ElementData {
        &TABLE.by_number[&self.0]
    }

    pub fn symbol(self) -> &'static str {
        &self.data().symbol
    }

    pub fn standard_mass(self) -> f64 {
        self.data().standard_mass
    }

    pub fn default_valences(self) -> &'static [u8] {
        &self.data().default_valences
    }

    /// Allowed total valences for this element carrying `charge`.
    pub fn allowed_valences(self, charge: i8) -> Vec<u8> {
        if charge == 0 {
            return self.default_valences().to_vec();
        }
        if let Some(v) = TABLE.charged.get(&(self.0, charge)) {
            return v.clone();
        }
        let group_13_14 = matches!(self.0, 5 | 6 | 13 | 14 | 32 | 50);
        self.default_valences()
            .iter()
            .filter_map(|&v| {
                let adjusted = if group_13_14 {
                    v as i16 - (charge as i16).abs()
                } else {
                    v as i16 + charge as i16
                };
                (adjusted >= 0).then_some(adjusted as u8)
            })
            .collect()
    }

    /// Member of the SMILES organic subset (writable without brackets).
    pub fn is_organic_subset(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 9 | 15 | 16 | 17 | 35 | 53)
    }

    /// Elements that may be written as lowercase aromatic symbols.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self.0, 5 | 6 | 7 | 8 | 15 | 16 | 33 | 34 | 52)
    }

    pub fn is_halogen(self) -> bool {
        matches!(self.0, 9 | 17 | 35 | 53)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_by_symbol_and_number() {
        let c = Element::from_symbol("C").unwrap();
        assert_eq!(c, Element::C);
        assert_eq!(c.atomic_number(), 6);
        assert_eq!(Element::from_atomic_number(17), Some(Element::CL));
        assert!(Element::from_symbol("Xx").is_none());
    }

    #[test]
    fn masses_positive_for_real_elements() {
        for data in TABLE.by_number.values() {
            if data.atomic_number > 0 {
                assert!(data.standard_mass > 0.0, "{}", data.symbol);
            }
        }
    }

    #[test]
    fn organic_subset_has_valences() {
        for sym in ["B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"] {
            assert!(!Element::from_symbol(sym)
                .unwrap()
                .default_valences()
                .is_empty());
        }
    }

    #[test]
    fn charge_adjusted_valences() {
        assert_eq!(Element::N.allowed_valences(1), vec![4]);
        assert_eq!(Element::O.allowed_valences(-1), vec![1]);
        assert_eq!(Element::N.allowed_valences(-1), vec![2]);
        assert_eq!(Element::C.allowed_valences(-1), vec![3]);
        // fallback rule
        assert_eq!(Element::SI.allowed_valences(-1), vec![3]);
    }
}
