use std::collections::BTreeMap;

use thiserror::Error;

use crate::chem::{
    Atom, BondDirection, BondOrder, Chirality, Element, GraphError, Molecule, MoleculeBuilder,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty SMILES")]
    Empty,
    #[error("syntax error at position {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("unclosed ring closure {0}")]
    UnclosedRing(u8),
    #[error("unclosed branch")]
    UnclosedBranch,
    #[error("unknown element '{0}'")]
    UnknownElement(String),
    #[error("invalid graph: {0}")]
    Graph(#[from] GraphError),
}

/// Lexical unit of the SMILES grammar.
#[derive(Debug, Clone, PartialEq)]
pub enum SmilesToken {
    OrganicAtom {
        element: Element,
        aromatic: bool,
    },
    BracketAtom {
        isotope: Option<u16>,
        element: Element,
        aromatic: bool,
        chirality: Option<Chirality>,
        h_count: u8,
        charge: i8,
    },
    Bond(BondSymbol),
    BranchOpen,
    BranchClose,
    RingClosure(u8),
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondSymbol {
    Single,
    Double,
    Triple,
    Aromatic,
    Up,
    Down,
}

impl BondSymbol {
    fn order(self) -> BondOrder {
        match self {
            BondSymbol::Single | BondSymbol::Up | BondSymbol::Down => BondOrder::Single,
            BondSymbol::Double => BondOrder::Double,
            BondSymbol::Triple => BondOrder::Triple,
            BondSymbol::Aromatic => BondOrder::Aromatic,
        }
    }

    fn direction(self) -> Option<BondDirection> {
        match self {
            BondSymbol::Up => Some(BondDirection::Up),
            BondSymbol::Down => Some(BondDirection::Down),
            _ => None,
        }
    }
}

/// Splits SMILES text into tokens, with the byte offset of each.
pub fn tokenize(text: &str) -> Result<Vec<(usize, SmilesToken)>, SmilesError> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < bytes.len() {
        let start = i;
        let c = bytes[i] as char;
        let token = match c {
            '(' => {
                i += 1;
                SmilesToken::BranchOpen
            }
            ')' => {
                i += 1;
                SmilesToken::BranchClose
            }
            '.' => {
                i += 1;
                SmilesToken::Dot
            }
            '-' | '=' | '#' | ':' | '/' | '\\' => {
                i += 1;
                SmilesToken::Bond(match c {
                    '-' => BondSymbol::Single,
                    '=' => BondSymbol::Double,
                    '#' => BondSymbol::Triple,
                    ':' => BondSymbol::Aromatic,
                    '/' => BondSymbol::Up,
                    _ => BondSymbol::Down,
                })
            }
            '0'..='9' => {
                i += 1;
                SmilesToken::RingClosure(c as u8 - b'0')
            }
            '%' => {
                let digits = text
                    .get(i + 1..i + 3)
                    .filter(|d| d.bytes().all(|b| b.is_ascii_digit()));
                let Some(d) = digits else {
                    return Err(SmilesError::SyntaxError {
                        position: i + 1,
                        expected: "two-digit ring closure".into(),
                    });
                };
                i += 3;
                SmilesToken::RingClosure(d.parse().unwrap())
            }
            '[' => {
                let (tok, next) = parse_bracket(text, i)?;
                i = next;
                tok
            }
            '*' => {
                i += 1;
                SmilesToken::OrganicAtom {
                    element: Element::DUMMY,
                    aromatic: false,
                }
            }
            _ => {
                let (tok, next) = parse_organic(text, i)?;
                i = next;
                tok
            }
        };
        out.push((start, token));
    }
    Ok(out)
}

fn parse_organic(text: &str, i: usize) -> Result<(SmilesToken, usize), SmilesError> {
    let rest = &text[i..];
    for (sym, elem) in [("Cl", "Cl"), ("Br", "Br")] {
        if rest.starts_with(sym) {
            return Ok((
                SmilesToken::OrganicAtom {
                    element: Element::from_symbol(elem).unwrap(),
                    aromatic: false,
                },
                i + 2,
            ));
        }
    }
    let c = rest.chars().next().unwrap();
    let (sym, aromatic) = match c {
        'B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'I' => (c.to_string(), false),
        'b' | 'c' | 'n' | 'o' | 'p' | 's' => (c.to_ascii_uppercase().to_string(), true),
        c if c.is_ascii_alphabetic() => {
            let sym: String = rest
                .chars()
                .take_while(|ch| ch.is_ascii_alphabetic())
                .take(2)
                .collect();
            return Err(SmilesError::UnknownElement(sym));
        }
        _ => {
            return Err(SmilesError::SyntaxError {
                position: i,
                expected: "atom, bond, branch or ring closure".into(),
            });
        }
    };
    let element = Element::from_symbol(&sym).ok_or(SmilesError::UnknownElement(sym))?;
    Ok((
        SmilesToken::OrganicAtom { element, aromatic },
        i + c.len_utf8(),
    ))
}

fn parse_bracket(text: &str, open: usize) -> Result<(SmilesToken, usize), SmilesError> {
    let close = text[open..]
        .find(']')
        .map(|p| open + p)
        .ok_or(SmilesError::SyntaxError {
            position: text.len(),
            expected: "']'".into(),
        })?;
    let body = &text[open + 1..close];
    let b = body.as_bytes();
    let mut j = 0;
    let pos = |j: usize| open + 1 + j;

    let iso_len = b.iter().take_while(|c| c.is_ascii_digit()).count();
    let isotope = if iso_len > 0 {
        j = iso_len;
        Some(
            body[..iso_len]
                .parse::<u16>()
                .map_err(|_| SmilesError::SyntaxError {
                    position: pos(0),
                    expected: "isotope".into(),
                })?,
        )
    } else {
        None
    };

    if j >= b.len() {
        return Err(SmilesError::SyntaxError {
            position: pos(j),
            expected: "element symbol".into(),
        });
    }
    let (element, aromatic) = if b[j] == b'*' {
        j += 1;
        (Element::DUMMY, false)
    } else if b[j] == b'#' {
        return Err(SmilesError::SyntaxError {
            position: pos(j),
            expected: "element symbol".into(),
        });
    } else {
        let first = b[j] as char;
        if !first.is_ascii_alphabetic() {
            return Err(SmilesError::SyntaxError {
                position: pos(j),
                expected: "element symbol".into(),
            });
        }
        // aromatic two-letter forms first
        let two = body.get(j..j + 2).unwrap_or("");
        if matches!(two, "se" | "as" | "te") {
            j += 2;
            let sym = format!("{}{}", two[..1].to_ascii_uppercase(), &two[1..]);
            (
                Element::from_symbol(&sym).ok_or(SmilesError::UnknownElement(sym))?,
                true,
            )
        } else if first.is_ascii_lowercase() {
            if !matches!(first, 'b' | 'c' | 'n' | 'o' | 'p' | 's') {
                return Err(SmilesError::UnknownElement(first.to_string()));
            }
            j += 1;
            (
                Element::from_symbol(&first.to_ascii_uppercase().to_string()).unwrap(),
                true,
            )
        } else {
            let second = b.get(j + 1).copied().map(char::from);
            let two_letter = second
                .filter(|c| c.is_ascii_lowercase())
                .map(|s| format!("{first}{s}"));
            if let Some(sym) = two_letter {
                // no bracket primitive starts with a lowercase letter
                let e = Element::from_symbol(&sym).ok_or(SmilesError::UnknownElement(sym))?;
                j += 2;
                (e, false)
            } else if let Some(e) = Element::from_symbol(&first.to_string()) {
                j += 1;
                (e, false)
            } else {
                return Err(SmilesError::UnknownElement(first.to_string()));
            }
        }
    };

    let mut chirality = None;
    if b.get(j) == Some(&b'@') {
        if b.get(j + 1) == Some(&b'@') {
            chirality = Some(Chirality::Clockwise);
            j += 2;
        } else {
            chirality = Some(Chirality::Anticlockwise);
            j += 1;
        }
        if b.get(j)
            .is_some_and(|c| c.is_ascii_uppercase() && *c != b'H')
        {
            return Err(SmilesError::SyntaxError {
                position: pos(j),
                expected: "'@' or '@@' (chirality classes unsupported)".into(),
            });
        }
    }

    let mut h_count = 0u8;
    if b.get(j) == Some(&b'H') {
        j += 1;
        let n = b[j..].iter().take_while(|c| c.is_ascii_digit()).count();
        h_count = if n > 0 {
            body[j..j + n].parse().unwrap_or(u8::MAX)
        } else {
            1
        };
        j += n;
    }

    let mut charge = 0i8;
    if let Some(&sign @ (b'+' | b'-')) = b.get(j) {
        let unit: i8 = if sign == b'+' { 1 } else { -1 };
        j += 1;
        let n = b[j..].iter().take_while(|c| c.is_ascii_digit()).count();
        if n > 0 {
            let mag: i8 = body[j..j + n]
                .parse()
                .map_err(|_| SmilesError::SyntaxError {
                    position: pos(j),
                    expected: "charge".into(),
                })?;
            charge = unit * mag;
            j += n;
        } else {
            charge = unit;
            while b.get(j) == Some(&sign) {
                charge += unit;
                j += 1;
            }
        }
    }

    if b.get(j) == Some(&b':') {
        // atom class: parsed and dropped
        j += 1;
        let n = b[j..].iter().take_while(|c| c.is_ascii_digit()).count();
        if n == 0 {
            return Err(SmilesError::SyntaxError {
                position: pos(j),
                expected: "atom class digits".into(),
            });
        }
        j += n;
    }

    if j != b.len() {
        return Err(SmilesError::SyntaxError {
            position: pos(j),
            expected: "']'".into(),
        });
    }
    if aromatic && !element.can_be_aromatic() {
        return Err(SmilesError::UnknownElement(body.to_string()));
    }
    Ok((
        SmilesToken::BracketAtom {
            isotope,
            element,
            aromatic,
            chirality,
            h_count,
            charge,
        },
        close + 1,
    ))
}

/// Parses SMILES into a perceived [`Molecule`] (rings, kekulization,
/// hydrogens, aromaticity). Chemistry problems such as bad valences do not
/// fail parsing; they surface through validity checking.
pub fn parse_smiles(text: &str) -> Result<Molecule, SmilesError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(SmilesError::Empty);
    }
    let tokens = tokenize(text)?;
    let mut builder = MoleculeBuilder::new();
    let mut prev: Option<usize> = None;
    let mut pending_bond: Option<(usize, BondSymbol)> = None;
    let mut branches: Vec<Option<usize>> = Vec::new();
    let mut open_rings: BTreeMap<u8, (usize, Option<BondSymbol>, usize)> = BTreeMap::new();
    let mut aromatic_input: Vec<bool> = Vec::new();
    let mut branch_empty = false;
    let syntax = |position: usize, expected: &str| SmilesError::SyntaxError {
        position,
        expected: expected.into(),
    };

    for (pos, token) in tokens {
        match token {
            SmilesToken::OrganicAtom { .. } | SmilesToken::BracketAtom { .. } => {
                let (atom, aromatic) = atom_from_token(&token);
                let idx = builder.add_atom(atom);
                aromatic_input.push(aromatic);
                if let Some(p) = prev {
                    let sym = pending_bond.take().map(|(_, s)| s);
                    let order = bond_order(sym, aromatic_input[p], aromatic);
                    builder.add_bond_with_direction(
                        p,
                        idx,
                        order,
                        sym.and_then(BondSymbol::direction),
                    )?;
                } else if let Some((bpos, _)) = pending_bond {
                    return Err(syntax(bpos, "atom before bond"));
                }
                prev = Some(idx);
                branch_empty = false;
            }
            SmilesToken::Bond(sym) => {
                if prev.is_none() || pending_bond.is_some() {
                    return Err(syntax(pos, "atom"));
                }
                pending_bond = Some((pos, sym));
            }
            SmilesToken::BranchOpen => {
                if prev.is_none() || pending_bond.is_some() || branch_empty {
                    return Err(syntax(pos, "atom"));
                }
                branches.push(prev);
                branch_empty = true;
            }
            SmilesToken::BranchClose => {
                if pending_bond.is_some() || branch_empty {
                    return Err(syntax(pos, "atom"));
                }
                prev = branches.pop().ok_or_else(|| syntax(pos, "matching '('"))?;
            }
            SmilesToken::RingClosure(digit) => {
                let Some(atom) = prev.filter(|_| !branch_empty) else {
                    return Err(syntax(pos, "atom before ring closure"));
                };
                let sym = pending_bond.take().map(|(_, s)| s);
                if let Some((other, other_sym, _)) = open_rings.remove(&digit) {
                    let sym = match (sym, other_sym) {
                        (Some(a), Some(b)) if a.order() != b.order() => {
                            return Err(syntax(pos, "matching ring-closure bond"))
                        }
                        (Some(a), _) => Some(a),
                        (None, b) => b,
                    };
                    let order = bond_order(sym, aromatic_input[other], aromatic_input[atom]);
                    builder.add_bond_with_direction(
                        other,
                        atom,
                        order,
                        sym.and_then(BondSymbol::direction),
                    )?;
                } else {
                    open_rings.insert(digit, (atom, sym, pos));
                }
            }
            SmilesToken::Dot => {
                if pending_bond.is_some() || prev.is_none() {
                    return Err(syntax(pos, "atom"));
                }
                prev = None;
            }
        }
    }
    if let Some((bpos, _)) = pending_bond {
        return Err(syntax(bpos + 1, "atom after bond"));
    }
    if !branches.is_empty() {
        return Err(SmilesError::UnclosedBranch);
    }
    if let Some((&digit, _)) = open_rings.iter().next() {
        return Err(SmilesError::UnclosedRing(digit));
    }
    let mut mol = strip_hydrogen_atoms(builder.build());
    mol.source_text = Some(text.to_string());
    Ok(mol)
}

/// Folds plain `[H]` atoms bonded to a heavy atom into hydrogen counts.
fn strip_hydrogen_atoms(mol: Molecule) -> Molecule {
    let removable = |i: usize| {
        let a = &mol.atoms[i];
        a.element == Element::H
            && a.isotope.is_none()
            && a.formal_charge == 0
            && a.explicit_h == 0
            && mol.degree(i) == 1
            && mol.atoms[mol.neighbors(i)[0].0].element != Element::H
    };
    if !(0..mol.atom_count()).any(removable) {
        return mol;
    }
    let keep: Vec<usize> = (0..mol.atom_count()).filter(|&i| !removable(i)).collect();
    mol.subgraph(&keep)
}

fn bond_order(sym: Option<BondSymbol>, a_aromatic: bool, b_aromatic: bool) -> BondOrder {
    match sym {
        Some(s) => s.order(),
        None if a_aromatic && b_aromatic => BondOrder::Aromatic,
        None => BondOrder::Single,
    }
}

fn atom_from_token(token: &SmilesToken) -> (Atom, bool) {
    match *token {
        SmilesToken::OrganicAtom { element, aromatic } => {
            let mut atom = Atom::new(element);
            atom.input_aromatic = aromatic;
            atom.aromatic = aromatic;
            (atom, aromatic)
        }
        SmilesToken::BracketAtom {
            isotope,
            element,
            aromatic,
            chirality,
            h_count,
            charge,
        } => {
            let mut atom = Atom::new(element);
            atom.isotope = isotope;
            atom.chirality = chirality;
            atom.explicit_h = h_count;
            atom.formal_charge = charge;
            atom.bracket = true;
            atom.input_aromatic = aromatic;
            atom.aromatic = aromatic;
            (atom, aromatic)
        }
        _ => unreachable!("not an atom token"),
    }
}
