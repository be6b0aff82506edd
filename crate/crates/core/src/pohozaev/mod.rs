//! Truncated Pohozaev matrices: the classical form `Q⁽¹⁾`, the transition
//! matrix `P⁽ˢ⁾` of divided differences, their Schur product `Q⁽ˢ⁾`, and
//! positivity certificates for all of them.

mod bochner;
mod psd;
mod q1;
mod transition;

use thiserror::Error;

use crate::eigenbasis::BasisError;
use crate::sfl::SflError;

pub use bochner::{
    bochner_closed_form, bochner_kernel, bochner_transform_check, transition_factorization_check,
    BochnerCheck, BochnerSample,
};
pub use psd::{psd_certify, PsdCertificate, PsdVerdict, DEFAULT_PSD_TOLERANCE};
pub use q1::{q1_matrix, PohozaevQ1, Q1Route};
pub use transition::{
    qs_direct, qs_raw, qs_schur, symmetrize, transition_entry, PohozaevMatrices, TransitionP,
};

#[derive(Debug, Error)]
pub enum PohozaevError {
    #[error("matrix size mismatch: {0}x{0} against {1}x{1}")]
    SizeMismatch(usize, usize),
    #[error("boundary and volume routes to Q1 disagree by {discrepancy:e} (tolerance {tolerance:e}) at ({row}, {col})")]
    CrossCheck {
        discrepancy: f64,
        tolerance: f64,
        row: usize,
        col: usize,
    },
    #[error("matrix is not symmetric: asymmetry {0:e}")]
    NotSymmetric(f64),
    #[error("symmetric eigensolver did not converge")]
    EigenSolver,
    #[error("Bochner quadrature truncation estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Truncation { estimate: f64, tolerance: f64 },
    #[error("the Bochner kernel needs s in (0,1)")]
    ClassicalBochner,
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Sfl(#[from] SflError),
}
