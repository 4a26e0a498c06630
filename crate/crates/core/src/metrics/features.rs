//! Feature vectors for the Fréchet distance.
//!
//! CSV layout: `id,f1,...,fd`, one row per molecule, optional header row
//! (recognized when any feature cell of the first row is not a number).
//!
//! Binary layout, little-endian: 8-byte magic `HGFEAT01`, `u32` dimension,
//! `u64` row count, then `count × dim` `f64` values in row-major order.

use std::io::Read;
use std::path::Path;

use super::MetricError;
use crate::chem::{Element, Molecule};
use crate::descriptors::{
    crippen_logp, default_fingerprint, molecular_weight, ring_stats, sa_score, DescriptorError,
    FragmentTable,
};

pub const FEATURE_MAGIC: &[u8; 8] = b"HGFEAT01";

pub const BUILTIN_FEATURE_NAMES: [&str; 10] = [
    "mw",
    "logp",
    "sas",
    "ring_count",
    "max_ring_size",
    "rings_gt6",
    "heavy_atoms",
    "aromatic_fraction",
    "hetero_fraction",
    "fingerprint_density",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureSet {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// The built-in 10-dimensional physicochemical feature map.
pub fn builtin_features(
    mol: &Molecule,
    table: &FragmentTable,
) -> Result<Vec<f64>, DescriptorError> {
    let heavy: Vec<_> = mol
        .atoms
        .iter()
        .filter(|a| a.element != Element::H)
        .collect();
    let n = heavy.len().max(1) as f64;
    let rs = ring_stats(mol);
    let fp = default_fingerprint(mol);
    Ok(vec![
        molecular_weight(mol),
        crippen_logp(mol)?,
        sa_score(mol, table)?,
        rs.ring_count as f64,
        rs.max_ring_size as f64,
        rs.rings_gt6 as f64,
        heavy.len() as f64,
        heavy.iter().filter(|a| a.aromatic).count() as f64 / n,
        heavy.iter().filter(|a| a.element != Element::C).count() as f64 / n,
        fp.on_count as f64 / fp.width as f64,
    ])
}

pub fn read_feature_csv(text: &str) -> Result<FeatureSet, MetricError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut set = FeatureSet::default();
    let mut dim = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| MetricError::FeatureFile(e.to_string()))?;
        if rec.len() < 2 {
            return Err(MetricError::FeatureFile(format!(
                "row {}: expected id and at least one value",
                i + 1
            )));
        }
        let parsed: Result<Vec<f64>, _> = rec
            .iter()
            .skip(1)
            .map(|c| c.trim().parse::<f64>())
            .collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(MetricError::FeatureFile(format!(
                    "row {}: non-numeric value",
                    i + 1
                )))
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MetricError::FeatureFile(format!(
                "row {}: non-finite value",
                i + 1
            )));
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(MetricError::DimensionMismatch(d, values.len()))
            }
            _ => {}
        }
        set.ids.push(rec[0].to_string());
        set.rows.push(values);
    }
    Ok(set)
}

pub fn read_feature_binary(bytes: &[u8]) -> Result<FeatureSet, MetricError> {
    let bad = |m: &str| MetricError::FeatureFile(m.to_string());
    if bytes.len() < 20 || &bytes[..8] != FEATURE_MAGIC {
        return Err(bad("missing HGFEAT01 header"));
    }
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let body = &bytes[20..];
    if dim.checked_mul(count).and_then(|v| v.checked_mul(8)) != Some(body.len()) {
        return Err(bad("payload length does not match dimension × count"));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let rows: Vec<Vec<f64>> = if dim == 0 {
        vec![Vec::new(); count]
    } else {
        values.chunks(dim).map(<[f64]>::to_vec).collect()
    };
    Ok(FeatureSet {
        ids: (1..=count).map(|i| format!("R{i}")).collect(),
        rows,
    })
}

pub fn write_feature_binary(rows: &[Vec<f64>]) -> Vec<u8> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(20 + rows.len() * dim * 8);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(rows.len() as u64).to_le_bytes());
    for r in rows {
        for v in r {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Reads either layout, choosing by the magic bytes.
pub fn read_features(path: &Path) -> Result<FeatureSet, MetricError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| MetricError::FeatureFile(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(FEATURE_MAGIC) {
        read_feature_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| MetricError::FeatureFile("not UTF-8 text".into()))?;
        read_feature_csv(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse_smiles;

    #[test]
    fn csv_with_and_without_header() {
        let a = read_feature_csv("id,f1,f2\nm1,1.0,2.0\nm2,3,4\n").unwrap();
        let b = read_feature_csv("m1,1.0,2.0\nm2,3,4\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows[1], vec![3.0, 4.0]);
        assert!(read_feature_csv("m1,1\nm2,1,2\n").is_err());
    }

    #[test]
    fn binary_round_trip() {
        let rows = vec![vec![1.0, -2.5], vec![0.125, 9.0]];
        let set = read_feature_binary(&write_feature_binary(&rows)).unwrap();
        assert_eq!(set.rows, rows);
        assert!(read_feature_binary(b"HGFEAT01\x02\0\0\0\x05\0\0\0\0\0\0\0").is_err());
    }

    #[test]
    fn builtin_dimension() {
        let f = builtin_features(
            &parse_smiles("c1ccccc1O").unwrap(),
            FragmentTable::bundled(),
        )
        .unwrap();
        assert_eq!(f.len(), BUILTIN_FEATURE_NAMES.len());
        assert!((f[7] - 6.0 / 7.0).abs() < 1e-12);
    }
}
