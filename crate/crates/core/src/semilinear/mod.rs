//! Semilinear problems `(-Δ)^s u = f(x, u)`: Galerkin–Newton solutions, the
//! Pohozaev functional and non-existence probes.

mod criticality;
mod newton;
mod nonlinearity;
mod probe;

use thiserror::Error;

use crate::eigenbasis::{BasisError, Point};
use crate::sfl::SflError;

pub use criticality::{criticality, power_coefficient, Criticality};
pub use newton::{
    galerkin_residual, newton_solve, pohozaev_functional, FunctionalParts, GalerkinSystem,
    NewtonOptions, SolveReport, SolveStatus,
};
pub use nonlinearity::{Nonlinearity, NonlinearityKind, Polynomial, PowerLaw, SpatialSource};
pub use probe::{
    nonexistence_probe, sign_condition, Initializer, ProbeOptions, ProbeOutcome, ProbeReport,
    ProbeRun, ProbeVerdict, SignCheck,
};

#[derive(Debug, Error)]
pub enum SemilinearError {
    #[error("power exponent must exceed 1, got {0}")]
    ExponentOutOfRange(f64),
    #[error("non-finite nonlinearity value {value} at ({}, {}) with u = {u}", .node[0], .node[1])]
    NonFinite { node: Point, u: f64, value: f64 },
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Sfl(#[from] SflError),
}
