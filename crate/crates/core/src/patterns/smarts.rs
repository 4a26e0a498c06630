//! Parser for the supported SMARTS subset.
//!
//! Atoms: organic symbols (`C`, `c`, `Cl`, ...), `*`, `a`, `A`, and bracket
//! expressions built from element symbols, `#n`, `a`/`A`, `*`, `H<n>`,
//! `D<n>`, `R`/`R0`/`R<n>`, `+`/`-` charges, joined by `&` or `;` or simple
//! juxtaposition. Bonds: `-` `=` `#` `:` `~` `@`, also juxtaposed (`-@`).
//! An omitted bond means single-or-aromatic. Recursion, disjunction and
//! negation are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::{BondOrder, Element};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern syntax error at position {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("unsupported pattern feature: {0}")]
    UnsupportedFeature(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomPredicate {
    pub element_set: Option<Vec<Element>>,
    pub aromatic: Option<bool>,
    pub charge: Option<i8>,
    pub in_ring: Option<bool>,
    /// Exact number of SSSR rings containing the atom.
    pub ring_count: Option<usize>,
    /// Exact explicit-neighbor count (`D`).
    pub degree: Option<usize>,
    pub min_degree: Option<usize>,
    pub total_h: Option<u8>,
    pub wildcard: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondPredicate {
    pub order: Option<BondOrder>,
    pub aromatic: Option<bool>,
    pub in_ring: Option<bool>,
    pub any: bool,
}

impl BondPredicate {
    /// The implicit bond between two pattern atoms.
    pub fn single_or_aromatic() -> Self {
        BondPredicate::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub nodes: Vec<AtomPredicate>,
    pub edges: Vec<(usize, usize, BondPredicate)>,
    pub name: String,
}

impl Pattern {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

pub fn parse_pattern(text: &str) -> Result<Pattern, PatternError> {
    let text = text.trim();
    let syntax = |position: usize, expected: &str| PatternError::SyntaxError {
        position,
        expected: expected.into(),
    };
    if text.is_empty() {
        return Err(syntax(0, "atom"));
    }
    if text.contains("$(") {
        return Err(PatternError::UnsupportedFeature("recursive SMARTS".into()));
    }
    let bytes = text.as_bytes();
    let mut nodes: Vec<AtomPredicate> = Vec::new();
    let mut edges: Vec<(usize, usize, BondPredicate)> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(usize, BondPredicate)> = None;
    let mut branches: Vec<usize> = Vec::new();
    let mut branch_empty = false;
    let mut rings: BTreeMap<u8, (usize, Option<BondPredicate>)> = BTreeMap::new();
    let mut i = 0;

    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '(' => {
                let Some(p) = prev.filter(|_| pending.is_none() && !branch_empty) else {
                    return Err(syntax(i, "atom"));
                };
                branches.push(p);
                branch_empty = true;
                i += 1;
            }
            ')' => {
                if pending.is_some() || branch_empty {
                    return Err(syntax(i, "atom"));
                }
                prev = Some(branches.pop().ok_or_else(|| syntax(i, "matching '('"))?);
                i += 1;
            }
            '.' => {
                return Err(PatternError::UnsupportedFeature(
                    "disconnected pattern".into(),
                ))
            }
            ',' => return Err(PatternError::UnsupportedFeature("disjunction ','".into())),
            '!' => return Err(PatternError::UnsupportedFeature("negation '!'".into())),
            '-' | '=' | '#' | ':' | '~' | '@' => {
                if prev.is_none() {
                    return Err(syntax(i, "atom before bond"));
                }
                let start = i;
                let mut bond = BondPredicate::default();
                let mut explicit = false;
                while i < bytes.len() {
                    match bytes[i] as char {
                        '-' => bond.order = Some(BondOrder::Single),
                        '=' => bond.order = Some(BondOrder::Double),
                        '#' => bond.order = Some(BondOrder::Triple),
                        ':' => bond.order = Some(BondOrder::Aromatic),
                        '~' => bond.any = true,
                        '@' => bond.in_ring = Some(true),
                        '&' | ';' => {}
                        ',' => {
                            return Err(PatternError::UnsupportedFeature("disjunction ','".into()))
                        }
                        '!' => return Err(PatternError::UnsupportedFeature("negation '!'".into())),
                        _ => break,
                    }
                    if bytes[i] != b'&' && bytes[i] != b';' && bytes[i] != b'@' {
                        explicit = true;
                    }
                    i += 1;
                }
                if !explicit {
                    // `@` alone: any bond that is in a ring
                    bond.any = true;
                }
                if bond.any && bond.order.is_some() {
                    bond.any = false;
                }
                if let Some(BondOrder::Aromatic) = bond.order {
                    bond.aromatic = Some(true);
                }
                if pending.is_some() {
                    return Err(syntax(start, "atom"));
                }
                pending = Some((start, bond));
            }
            '0'..='9' | '%' => {
                let (digit, next) = if c == '%' {
                    let d = text
                        .get(i + 1..i + 3)
                        .filter(|d| d.bytes().all(|b| b.is_ascii_digit()))
                        .ok_or_else(|| syntax(i + 1, "two-digit ring closure"))?;
                    (d.parse::<u8>().unwrap(), i + 3)
                } else {
                    (c as u8 - b'0', i + 1)
                };
                let Some(atom) = prev.filter(|_| !branch_empty) else {
                    return Err(syntax(i, "atom before ring closure"));
                };
                let bond = pending.take().map(|(_, b)| b);
                if let Some((other, other_bond)) = rings.remove(&digit) {
                    let bond = bond
                        .or(other_bond)
                        .unwrap_or_else(BondPredicate::single_or_aromatic);
                    edges.push((other, atom, bond));
                } else {
                    rings.insert(digit, (atom, bond));
                }
                i = next;
            }
            '[' => {
                let close = text[i..]
                    .find(']')
                    .map(|k| i + k)
                    .ok_or_else(|| syntax(text.len(), "']'"))?;
                let node = parse_bracket(&text[i + 1..close], i + 1)?;
                add_node(node, &mut nodes, &mut edges, &mut prev, &mut pending);
                branch_empty = false;
                i = close + 1;
            }
            _ => {
                let (node, next) = parse_bare(text, i)?;
                add_node(node, &mut nodes, &mut edges, &mut prev, &mut pending);
                branch_empty = false;
                i = next;
            }
        }
    }
    if let Some((pos, _)) = pending {
        return Err(syntax(pos + 1, "atom after bond"));
    }
    if !branches.is_empty() {
        return Err(syntax(text.len(), "')'"));
    }
    if let Some((&digit, _)) = rings.iter().next() {
        return Err(syntax(text.len(), &format!("closure of ring {digit}")));
    }
    Ok(Pattern {
        nodes,
        edges,
        name: text.to_string(),
    })
}

fn add_node(
    node: AtomPredicate,
    nodes: &mut Vec<AtomPredicate>,
    edges: &mut Vec<(usize, usize, BondPredicate)>,
    prev: &mut Option<usize>,
    pending: &mut Option<(usize, BondPredicate)>,
) {
    nodes.push(node);
    let idx = nodes.len() - 1;
    if let Some(p) = *prev {
        let bond = pending
            .take()
            .map(|(_, b)| b)
            .unwrap_or_else(BondPredicate::single_or_aromatic);
        edges.push((p, idx, bond));
    }
    *prev = Some(idx);
}

fn element_node(element: Element, aromatic: Option<bool>) -> AtomPredicate {
    AtomPredicate {
        element_set: Some(vec![element]),
        aromatic,
        ..Default::default()
    }
}

fn parse_bare(text: &str, i: usize) -> Result<(AtomPredicate, usize), PatternError> {
    let rest = &text[i..];
    let syntax = |expected: &str| PatternError::SyntaxError {
        position: i,
        expected: expected.into(),
    };
    if rest.starts_with('*') {
        return Ok((
            AtomPredicate {
                wildcard: true,
                ..Default::default()
            },
            i + 1,
        ));
    }
    for two in ["Cl", "Br"] {
        if rest.starts_with(two) {
            return Ok((
                element_node(Element::from_symbol(two).unwrap(), Some(false)),
                i + 2,
            ));
        }
    }
    let c = rest.chars().next().unwrap();
    match c {
        'a' => Ok((
            AtomPredicate {
                aromatic: Some(true),
                ..Default::default()
            },
            i + 1,
        )),
        'A' => Ok((
            AtomPredicate {
                aromatic: Some(false),
                ..Default::default()
            },
            i + 1,
        )),
        'B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'I' => Ok((
            element_node(Element::from_symbol(&c.to_string()).unwrap(), Some(false)),
            i + 1,
        )),
        'b' | 'c' | 'n' | 'o' | 'p' | 's' => Ok((
            element_node(
                Element::from_symbol(&c.to_ascii_uppercase().to_string()).unwrap(),
                Some(true),
            ),
            i + 1,
        )),
        _ => Err(syntax("atom")),
    }
}

fn read_number(bytes: &[u8], mut i: usize) -> (Option<u32>, usize) {
    let start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i == start {
        (None, i)
    } else {
        (
            std::str::from_utf8(&bytes[start..i]).unwrap().parse().ok(),
            i,
        )
    }
}

fn parse_bracket(body: &str, offset: usize) -> Result<AtomPredicate, PatternError> {
    let syntax = |position: usize, expected: &str| PatternError::SyntaxError {
        position: offset + position,
        expected: expected.into(),
    };
    if body.is_empty() {
        return Err(syntax(0, "atom primitive"));
    }
    let bytes = body.as_bytes();
    let mut p = AtomPredicate::default();
    let mut i = 0;
    let mut seen_element = false;
    let set_element = |p: &mut AtomPredicate, e: Element, aromatic: Option<bool>| {
        p.element_set = Some(vec![e]);
        if aromatic.is_some() {
            p.aromatic = aromatic;
        }
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            '&' | ';' => i += 1,
            ',' => return Err(PatternError::UnsupportedFeature("disjunction ','".into())),
            '!' => return Err(PatternError::UnsupportedFeature("negation '!'".into())),
            '$' => return Err(PatternError::UnsupportedFeature("recursive SMARTS".into())),
            '*' => {
                p.wildcard = true;
                i += 1;
            }
            '#' => {
                let (n, next) = read_number(bytes, i + 1);
                let z = n.ok_or_else(|| syntax(i + 1, "atomic number"))?;
                let e = u8::try_from(z)
                    .ok()
                    .and_then(Element::from_atomic_number)
                    .ok_or_else(|| syntax(i + 1, "known atomic number"))?;
                set_element(&mut p, e, None);
                seen_element = true;
                i = next;
            }
            'H' if seen_element || p.wildcard || i > 0 => {
                let (n, next) = read_number(bytes, i + 1);
                p.total_h = Some(n.unwrap_or(1) as u8);
                i = next;
            }
            'D' => {
                let (n, next) = read_number(bytes, i + 1);
                p.degree = Some(n.unwrap_or(1) as usize);
                i = next;
            }
            'R' => {
                let (n, next) = read_number(bytes, i + 1);
                match n {
                    None => p.in_ring = Some(true),
                    Some(0) => p.in_ring = Some(false),
                    Some(k) => {
                        p.in_ring = Some(true);
                        p.ring_count = Some(k as usize);
                    }
                }
                i = next;
            }
            '+' | '-' => {
                let sign: i8 = if c == '+' { 1 } else { -1 };
                let (n, next) = read_number(bytes, i + 1);
                if let Some(n) = n {
                    p.charge = Some(sign * n as i8);
                    i = next;
                } else {
                    let mut k = i;
                    while k < bytes.len() && bytes[k] as char == c {
                        k += 1;
                    }
                    p.charge = Some(sign * (k - i) as i8);
                    i = k;
                }
            }
            'a' if !body[i..].starts_with("as") => {
                p.aromatic = Some(true);
                i += 1;
            }
            'A' if !body[i..].starts_with("Al") && !body[i..].starts_with("As") => {
                p.aromatic = Some(false);
                i += 1;
            }
            'X' | 'x' | 'v' | 'r' | '@' => {
                return Err(PatternError::UnsupportedFeature(format!(
                    "atom primitive '{c}'"
                )));
            }
            _ if c.is_ascii_alphabetic() => {
                let aromatic = c.is_ascii_lowercase();
                let two = body
                    .get(i..i + 2)
                    .filter(|s| s.as_bytes()[1].is_ascii_lowercase());
                let (sym, len) = match two {
                    Some(t) if !aromatic && Element::from_symbol(t).is_some() => (t.to_string(), 2),
                    Some(t) if aromatic && matches!(t, "se" | "as" | "te") => (capitalize(t), 2),
                    _ => (c.to_ascii_uppercase().to_string(), 1),
                };
                let e = Element::from_symbol(&sym).ok_or_else(|| syntax(i, "element symbol"))?;
                set_element(&mut p, e, Some(aromatic));
                seen_element = true;
                i += len;
            }
            _ => return Err(syntax(i, "atom primitive")),
        }
    }
    if p.wildcard
        && p != (AtomPredicate {
            wildcard: true,
            ..Default::default()
        })
    {
        p.wildcard = false;
    }
    Ok(p)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_ascii_uppercase().to_string() + c.as_str(),
        None => String::new(),
    }
}
