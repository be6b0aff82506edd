use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::PohozaevError;

/// Relative tolerance `τ` in `λ_min ≥ -τ(1 + ‖M‖₂)`.
pub const DEFAULT_PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PsdVerdict {
    Psd,
    /// `witness` is a unit eigenvector for the minimum eigenvalue and
    /// `quadratic_value = witnessᵀ M witness`.
    Indefinite {
        witness: Vec<f64>,
        quadratic_value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdCertificate {
    pub label: String,
    pub method: String,
    pub min_eigenvalue: f64,
    pub spectral_norm: f64,
    pub tolerance: f64,
    /// `-tolerance · (1 + spectral_norm)`.
    pub threshold: f64,
    #[serde(flatten)]
    pub verdict: PsdVerdict,
}

impl PsdCertificate {
    pub fn is_psd(&self) -> bool {
        self.verdict == PsdVerdict::Psd
    }

    /// Margin `λ_min / (1 + ‖M‖₂)`; the verdict is PSD iff this is `≥ -tolerance`.
    pub fn relative_margin(&self) -> f64 {
        self.min_eigenvalue / (1.0 + self.spectral_norm)
    }
}

/// Full symmetric spectrum of `m`; PSD iff `λ_min ≥ -tol·(1 + ‖m‖₂)`.
pub fn psd_certify(
    label: &str,
    m: &DMatrix<f64>,
    tol: f64,
) -> Result<PsdCertificate, PohozaevError> {
    if !m.is_square() {
        return Err(PohozaevError::SizeMismatch(m.nrows(), m.ncols()));
    }
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 * (1.0 + m.amax()) {
        return Err(PohozaevError::NotSymmetric(asym));
    }
    let eig =
        SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or(PohozaevError::EigenSolver)?;
    let (imin, min_eigenvalue) = eig.eigenvalues.argmin();
    let spectral_norm = eig.eigenvalues.amax();
    let threshold = -tol * (1.0 + spectral_norm);
    let verdict = if min_eigenvalue >= threshold {
        PsdVerdict::Psd
    } else {
        let w: DVector<f64> = eig.eigenvectors.column(imin).into_owned();
        let quadratic_value = w.dot(&(m * &w));
        PsdVerdict::Indefinite {
            witness: w.iter().copied().collect(),
            quadratic_value,
        }
    };
    Ok(PsdCertificate {
        label: label.to_owned(),
        method: "full spectrum".into(),
        min_eigenvalue,
        spectral_norm,
        tolerance: tol,
        threshold,
        verdict,
    })
}
