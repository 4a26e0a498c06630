//! KL(P‖Q) between two score samples on shared bins. P is the generated
//! sample and Q the reference; natural log.

use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HistogramSpec {
    pub bins: usize,
    /// Fraction of the pooled range added on each side.
    pub padding: f64,
    /// Mass added to every bin before renormalizing.
    pub smoothing_eps: f64,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            bins: 50,
            padding: 0.05,
            smoothing_eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
    pub smoothing_eps: f64,
}

/// Equal-width edges spanning the pooled range of the samples.
pub fn shared_edges(samples: &[&[f64]], spec: &HistogramSpec) -> Vec<f64> {
    let all = samples.iter().flat_map(|s| s.iter().copied());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    let span = hi - lo;
    let pad = if span > 0.0 { span * spec.padding } else { 0.5 };
    let (lo, hi) = (lo - pad, hi + pad);
    let bins = spec.bins.max(1);
    (0..=bins)
        .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
        .collect()
}

pub fn histogram(sample: &[f64], edges: &[f64], eps: f64) -> Histogram {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut counts = vec![0usize; bins];
    for &x in sample {
        let k = (((x - lo) / (hi - lo)) * bins as f64).floor();
        counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
    }
    let n = sample.len().max(1) as f64;
    let total = 1.0 + eps * bins as f64;
    let masses = counts
        .iter()
        .map(|&c| (c as f64 / n + eps) / total)
        .collect();
    Histogram {
        edges: edges.to_vec(),
        masses,
        smoothing_eps: eps,
    }
}

/// Σ p·ln(p/q) over bins with p > 0.
pub fn kl_from_masses(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum::<f64>()
        .max(0.0)
}

pub fn kl_divergence_with(p: &[f64], q: &[f64], spec: &HistogramSpec) -> Result<f64, MetricError> {
    if p.is_empty() || q.is_empty() {
        return Err(MetricError::EmptySample);
    }
    let edges = shared_edges(&[p, q], spec);
    let hp = histogram(p, &edges, spec.smoothing_eps);
    let hq = histogram(q, &edges, spec.smoothing_eps);
    Ok(kl_from_masses(&hp.masses, &hq.masses))
}

pub fn kl_divergence(generated: &[f64], reference: &[f64]) -> Result<f64, MetricError> {
    kl_divergence_with(generated, reference, &HistogramSpec::default())
}
