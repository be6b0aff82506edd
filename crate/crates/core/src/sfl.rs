//! Spectral representation of functions and the spectral fractional Laplacian.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigenbasis::{BasisError, Point, SpectralBasis};
use crate::quadrature::{composite_with, GaussLegendre};
use crate::special::gamma_neg;

#[derive(Debug, Error)]
pub enum SflError {
    #[error("s must lie in (0,1), got {0}")]
    InvalidOrder(f64),
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("function belongs to basis {found}, not {expected}")]
    BasisMismatch { expected: String, found: String },
    #[error("non-finite value {value} at quadrature node ({}, {})", .node[0], .node[1])]
    NonFinite { node: Point, value: f64 },
    #[error("eigenvalue must be positive and finite, got {0}")]
    InvalidEigenvalue(f64),
    #[error("subordination quadrature did not converge: error estimate {estimate:e} exceeds {tolerance:e}")]
    SubordinationNotConverged { estimate: f64, tolerance: f64 },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Fractional order `s ∈ (0,1)`, or exactly `1` through [`FractionalOrder::classical`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self, SflError> {
        if s > 0.0 && s < 1.0 {
            Ok(Self(s))
        } else {
            Err(SflError::InvalidOrder(s))
        }
    }

    /// `s = 1`, accepted only by operations that document the classical limit.
    pub fn classical() -> Self {
        Self(1.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = SflError;

    fn try_from(s: f64) -> Result<Self, SflError> {
        if s == 1.0 {
            Ok(Self::classical())
        } else {
            Self::new(s)
        }
    }
}

impl From<FractionalOrder> for f64 {
    fn from(s: FractionalOrder) -> f64 {
        s.0
    }
}

/// `λ^s`. With `s = 1` this is exactly `λ`.
pub fn eigen_power(lambda: f64, s: f64) -> f64 {
    lambda.powf(s)
}

/// Coefficients `û_k = ⟨u, φ_k⟩` in a particular basis, identified by fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunction {
    pub basis: String,
    pub coeffs: Vec<f64>,
}

impl SpectralFunction {
    pub fn new(basis: &SpectralBasis, coeffs: Vec<f64>) -> Result<Self, SflError> {
        if coeffs.len() != basis.len() {
            return Err(SflError::LengthMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            basis: basis.fingerprint().to_owned(),
            coeffs,
        })
    }

    pub fn zero(basis: &SpectralBasis) -> Self {
        Self {
            basis: basis.fingerprint().to_owned(),
            coeffs: vec![0.0; basis.len()],
        }
    }

    /// The basis function `φ_k` (1-based `k`).
    pub fn unit(basis: &SpectralBasis, k: usize) -> Self {
        let mut u = Self::zero(basis);
        u.coeffs[k - 1] = 1.0;
        u
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coeffs)
    }

    /// `Σ û_k²`, the squared L² norm at truncation.
    pub fn norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    }

    fn check(&self, basis: &SpectralBasis) -> Result<(), SflError> {
        if self.basis != basis.fingerprint() {
            return Err(SflError::BasisMismatch {
                expected: basis.fingerprint().to_owned(),
                found: self.basis.clone(),
            });
        }
        if self.coeffs.len() != basis.len() {
            return Err(SflError::LengthMismatch {
                expected: basis.len(),
                got: self.coeffs.len(),
            });
        }
        Ok(())
    }
}

/// Projects `f` onto the basis by volume quadrature.
pub fn analyze<F: Fn(Point) -> f64>(
    basis: &SpectralBasis,
    f: F,
) -> Result<SpectralFunction, SflError> {
    let vol = basis.volume();
    let mut samples = DVector::zeros(vol.len());
    for (q, node) in vol.nodes.iter().enumerate() {
        let value = f(*node);
        if !value.is_finite() {
            return Err(SflError::NonFinite { node: *node, value });
        }
        samples[q] = value * vol.weights[q];
    }
    let coeffs = vol.values.transpose() * samples;
    SpectralFunction::new(basis, coeffs.iter().copied().collect())
}

/// `Σ û_k φ_k(x)` at each point.
pub fn synthesize(
    basis: &SpectralBasis,
    u: &SpectralFunction,
    points: &[Point],
) -> Result<Vec<f64>, SflError> {
    u.check(basis)?;
    let c = u.as_vector();
    points
        .iter()
        .map(|p| Ok(basis.evaluate(*p)?.values.dot(&c)))
        .collect()
}

fn scale_by_powers(
    basis: &SpectralBasis,
    u: &SpectralFunction,
    exponent: f64,
) -> Result<SpectralFunction, SflError> {
    u.check(basis)?;
    let coeffs = basis
        .pairs()
        .iter()
        .zip(&u.coeffs)
        .map(|(p, c)| eigen_power(p.eigenvalue, exponent) * c)
        .collect();
    Ok(SpectralFunction {
        basis: u.basis.clone(),
        coeffs,
    })
}

/// `û_k ↦ λ_k^s û_k`.
pub fn apply_sfl(
    basis: &SpectralBasis,
    u: &SpectralFunction,
    s: FractionalOrder,
) -> Result<SpectralFunction, SflError> {
    scale_by_powers(basis, u, s.value())
}

/// `ĝ_k ↦ λ_k^{-s} ĝ_k`.
pub fn solve_linear(
    basis: &SpectralBasis,
    rhs: &SpectralFunction,
    s: FractionalOrder,
) -> Result<SpectralFunction, SflError> {
    scale_by_powers(basis, rhs, -s.value())
}

/// Integration controls for [`subordination_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubordinationControls {
    /// Split point `t* = split_factor / λ`.
    pub split_factor: f64,
    /// The series handles `(0, series_fraction · t*)`.
    pub series_fraction: f64,
    /// The numerical part stops at `tail_factor / λ`; beyond it `e^{-λt}` is negligible.
    pub tail_factor: f64,
    pub panels: usize,
    pub points: usize,
    /// Required agreement between the rule and its panel-doubled refinement.
    pub tolerance: f64,
}

impl Default for SubordinationControls {
    fn default() -> Self {
        Self {
            split_factor: 1.0,
            series_fraction: 1e-3,
            tail_factor: 40.0,
            panels: 16,
            points: 20,
            tolerance: 1e-11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubordinationResult {
    pub value: f64,
    pub error_estimate: f64,
}

/// `(1/Γ(-s)) ∫₀^∞ (e^{-λt} - 1) t^{-1-s} dt`, which equals `λ^s`.
///
/// On `(0, ε)` the integrand is expanded in its Taylor series and integrated
/// termwise; the `-1` part is integrated analytically on `(ε, ∞)`; the
/// remaining `e^{-λt} t^{-1-s}` is integrated in `u = ln t` by composite
/// Gauss–Legendre up to the tail cut-off.
pub fn subordination_check(
    lambda: f64,
    s: FractionalOrder,
    controls: &SubordinationControls,
) -> Result<SubordinationResult, SflError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SflError::InvalidEigenvalue(lambda));
    }
    if s.is_classical() {
        return Err(SflError::InvalidOrder(1.0));
    }
    let s = s.value();
    let split = controls.split_factor / lambda;
    let eps = controls.series_fraction * split;

    let mut series = 0.0;
    let mut power = 1.0;
    for m in 1..60 {
        power *= -lambda * eps / m as f64;
        let term = power * eps.powf(-s) / (m as f64 - s);
        series += term;
        if term.abs() < 1e-18 * series.abs() {
            break;
        }
    }
    let constant_part = -eps.powf(-s) / s;

    let rule = GaussLegendre::new(controls.points);
    let (u_lo, u_hi) = (eps.ln(), (controls.tail_factor / lambda).ln());
    let exponential_part = |panels: usize| {
        let (us, ws) = composite_with(&rule, u_lo, u_hi, panels);
        us.iter()
            .zip(&ws)
            .map(|(u, w)| w * (-lambda * u.exp() - s * u).exp())
            .sum::<f64>()
    };
    let coarse = exponential_part(controls.panels);
    let fine = exponential_part(2 * controls.panels);
    let tail_bound =
        (-controls.tail_factor).exp() / (lambda * (controls.tail_factor / lambda).powf(1.0 + s));
    let gamma = gamma_neg(s);
    let value = (series + constant_part + fine) / gamma;
    let error_estimate = ((coarse - fine).abs() + tail_bound) / gamma.abs();
    if error_estimate > controls.tolerance * value.abs().max(1.0) {
        return Err(SflError::SubordinationNotConverged {
            estimate: error_estimate,
            tolerance: controls.tolerance,
        });
    }
    Ok(SubordinationResult {
        value,
        error_estimate,
    })
}
