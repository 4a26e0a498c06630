use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::MetricError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianSummary {
    pub mean: Vec<f64>,
    /// Row-major `dim × dim`.
    pub covariance: Vec<f64>,
    pub n: usize,
}

impl GaussianSummary {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn from_parts(mean: Vec<f64>, covariance: DMatrix<f64>, n: usize) -> GaussianSummary {
        let d = mean.len();
        let covariance = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| covariance[(i, j)])
            .collect();
        GaussianSummary {
            mean,
            covariance,
            n,
        }
    }

    pub fn cov_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.covariance)
    }
}

/// Sample mean and unbiased, symmetrized covariance.
pub fn fit_gaussian(features: &[Vec<f64>]) -> Result<GaussianSummary, MetricError> {
    let n = features.len();
    if n < 2 {
        return Err(MetricError::TooFewSamples { needed: 2, got: n });
    }
    let d = features[0].len();
    if let Some(bad) = features.iter().find(|f| f.len() != d) {
        return Err(MetricError::DimensionMismatch(d, bad.len()));
    }
    let mut mean = vec![0.0; d];
    for f in features {
        for (m, x) in mean.iter_mut().zip(f) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for f in features {
        let c = DVector::from_iterator(d, f.iter().zip(&mean).map(|(x, m)| x - m));
        cov += &c * c.transpose();
    }
    cov /= (n - 1) as f64;
    let sym = (&cov + cov.transpose()) * 0.5;
    Ok(GaussianSummary::from_parts(mean, sym, n))
}

/// Principal square root of a symmetric PSD matrix by eigendecomposition.
/// Returns the root and the magnitude of the most negative eigenvalue
/// clamped to zero (0 when none).
pub fn matrix_sqrt(a: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let worst = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |w, &l| if l < 0.0 { w.max(-l) } else { w });
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
    (root, worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrechetResult {
    pub distance: f64,
    /// Largest negative eigenvalue magnitude clamped in any square root.
    pub clamped: f64,
}

const PSD_TOL: f64 = 1e-6;

fn check_psd(which: &'static str, m: &DMatrix<f64>) -> Result<(), MetricError> {
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let worst = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let trace = m.trace().abs().max(f64::MIN_POSITIVE);
    if worst < 0.0 && -worst > PSD_TOL * trace {
        return Err(MetricError::NonPsd { which, worst });
    }
    Ok(())
}

/// ‖μ₁−μ₂‖² + Tr(Σ₁ + Σ₂ − 2(Σ₁^½ Σ₂ Σ₁^½)^½), clamped at 0.
pub fn frechet_with_diagnostics(
    g1: &GaussianSummary,
    g2: &GaussianSummary,
) -> Result<FrechetResult, MetricError> {
    if g1.dim() != g2.dim() {
        return Err(MetricError::DimensionMismatch(g1.dim(), g2.dim()));
    }
    let (s1, s2) = (g1.cov_matrix(), g2.cov_matrix());
    check_psd("first", &s1)?;
    check_psd("second", &s2)?;
    let diff: f64 = g1
        .mean
        .iter()
        .zip(&g2.mean)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let (r1, c1) = matrix_sqrt(&s1);
    let inner = &r1 * &s2 * &r1;
    let (root, c2) = matrix_sqrt(&inner);
    let trace = s1.trace() + s2.trace() - 2.0 * root.trace();
    let clamped = c1.max(c2);
    if clamped > 0.0 {
        log::debug!("frechet: clamped negative eigenvalue of magnitude {clamped:e}");
    }
    Ok(FrechetResult {
        distance: (diff + trace).max(0.0),
        clamped,
    })
}

pub fn frechet_distance(g1: &GaussianSummary, g2: &GaussianSummary) -> Result<f64, MetricError> {
    Ok(frechet_with_diagnostics(g1, g2)?.distance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_hand_values() {
        let g = fit_gaussian(&[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(g.mean, vec![1.0]);
        assert_eq!(g.covariance, vec![2.0]);
        let z = fit_gaussian(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert!(z.covariance.iter().all(|&c| c == 0.0));
        assert!(fit_gaussian(&[vec![1.0]]).is_err());
        assert!(matches!(
            fit_gaussian(&[vec![1.0], vec![1.0, 2.0]]),
            Err(MetricError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn one_dimensional() {
        let a = GaussianSummary {
            mean: vec![0.0],
            covariance: vec![1.0],
            n: 2,
        };
        let b = GaussianSummary {
            mean: vec![1.0],
            covariance: vec![1.0],
            n: 2,
        };
        assert!((frechet_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!(frechet_distance(&a, &a).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite() {
        let a = GaussianSummary {
            mean: vec![0.0, 0.0],
            covariance: vec![1.0, 0.0, 0.0, -1.0],
            n: 2,
        };
        assert!(matches!(
            frechet_distance(&a, &a),
            Err(MetricError::NonPsd { .. })
        ));
    }
}
