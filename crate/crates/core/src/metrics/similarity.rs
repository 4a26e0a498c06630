use std::collections::BTreeMap;

use rayon::prelude::*;

use super::MetricError;
use crate::descriptors::{tanimoto, Fingerprint};

/// Which pairs enter the internal-diversity mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiversityPairs {
    /// Ordered pairs i != j.
    #[default]
    Distinct,
    /// All n² ordered pairs, self-pairs included.
    IncludeSelf,
}

/// 1 - mean pairwise Tanimoto over distinct pairs.
pub fn internal_diversity(fps: &[Fingerprint]) -> Result<f64, MetricError> {
    internal_diversity_with(fps, DiversityPairs::Distinct)
}

pub fn internal_diversity_with(
    fps: &[Fingerprint],
    pairs: DiversityPairs,
) -> Result<f64, MetricError> {
    let n = fps.len();
    if n < 2 {
        return Err(MetricError::TooFewSamples { needed: 2, got: n });
    }
    // Row sums are computed in parallel, then added in index order.
    let rows: Vec<Result<f64, MetricError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for j in i + 1..n {
                s += tanimoto(&fps[i], &fps[j])?;
            }
            Ok(s)
        })
        .collect();
    let mut upper = 0.0;
    for r in rows {
        upper += r?;
    }
    let mean = match pairs {
        DiversityPairs::Distinct => 2.0 * upper / (n * (n - 1)) as f64,
        DiversityPairs::IncludeSelf => {
            let diag: f64 = fps.iter().map(|f| tanimoto(f, f)).sum::<Result<f64, _>>()?;
            (2.0 * upper + diag) / (n * n) as f64
        }
    };
    Ok(1.0 - mean)
}

/// Mean over generated fingerprints of the best Tanimoto to any reference.
pub fn snn(generated: &[Fingerprint], reference: &[Fingerprint]) -> Result<f64, MetricError> {
    if generated.is_empty() || reference.is_empty() {
        return Err(MetricError::EmptySet);
    }
    let best: Vec<Result<f64, MetricError>> = generated
        .par_iter()
        .map(|g| {
            let mut m = 0.0f64;
            for r in reference {
                m = m.max(tanimoto(g, r)?);
            }
            Ok(m)
        })
        .collect();
    let mut sum = 0.0;
    for b in best {
        sum += b?;
    }
    Ok(sum / generated.len() as f64)
}

/// Cosine similarity of two count vectors over the union of keys. Two
/// empty multisets are identical (1.0); one empty gives 0.0.
pub fn frequency_cosine(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let dot: f64 = a
        .iter()
        .filter_map(|(k, &x)| b.get(k).map(|&y| x as f64 * y as f64))
        .sum();
    let na: f64 = a.values().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.values().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(0.0, 1.0)
}
