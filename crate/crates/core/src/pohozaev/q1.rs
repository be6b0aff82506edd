use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::PohozaevError;
use crate::eigenbasis::{radial_moment_matrix, same_group, SpectralBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Q1Route {
    /// Boundary quadrature of `½∫(∇φ_j·∇φ_k)(x-c)·ν dS`.
    Boundary,
    /// Grid bases: the commutator form `A + ½(KA - AK)` of the discrete
    /// Laplacian `A` with the skew radial operator `K`.
    DiscreteOperator,
}

#[derive(Debug, Clone)]
pub struct PohozaevQ1 {
    pub basis: String,
    pub entries: DMatrix<f64>,
    pub route: Q1Route,
    /// Largest deviation from the volume route: `λ_k` on the diagonal and
    /// `½(λ_j-λ_k) M_jk` on non-degenerate pairs.
    pub cross_check: f64,
    /// Grid bases only: relative deviation of the one-sided boundary-trace
    /// form from the discrete operator form. First order in `h`.
    pub trace_discrepancy: Option<f64>,
}

impl PohozaevQ1 {
    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `Q⁽¹⁾_jk = ½∫_{∂Ω}(∇φ_j·∇φ_k)(x-c)·ν dS`, symmetrised, checked against the
/// volume route within `tolerance`.
pub fn q1_matrix(basis: &SpectralBasis, tolerance: f64) -> Result<PohozaevQ1, PohozaevError> {
    let half_trace = basis.boundary_gradient_form() * 0.5;
    let (raw, route, trace_discrepancy) = match basis.discrete_pohozaev_form() {
        Some(form) => {
            let scale = form.amax().max(f64::MIN_POSITIVE);
            let rel = (&half_trace - &form).amax() / scale;
            (form, Q1Route::DiscreteOperator, Some(rel))
        }
        None => (half_trace, Q1Route::Boundary, None),
    };
    let entries = (&raw + raw.transpose()) * 0.5;

    let moments = radial_moment_matrix(basis)?;
    let lam = basis.eigenvalues();
    let n = lam.len();
    let mut worst = (0.0, 0, 0);
    for j in 0..n {
        for k in 0..n {
            let expected = if j == k {
                lam[j]
            } else if same_group(lam[j], lam[k]) {
                continue;
            } else {
                0.5 * (lam[j] - lam[k]) * moments.matrix[(j, k)]
            };
            let d = (entries[(j, k)] - expected).abs();
            if d > worst.0 {
                worst = (d, j, k);
            }
        }
    }
    if worst.0 > tolerance {
        return Err(PohozaevError::CrossCheck {
            discrepancy: worst.0,
            tolerance,
            row: worst.1,
            col: worst.2,
        });
    }
    Ok(PohozaevQ1 {
        basis: basis.fingerprint().to_owned(),
        entries,
        route,
        cross_check: worst.0,
        trace_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::eigenbasis::{disk_basis, interval_basis, rectangle_basis, Domain, GridMask};

    #[test]
    fn interval_closed_form() {
        let q = q1_matrix(&interval_basis(0.0, PI, 64).unwrap(), 1e-8).unwrap();
        for j in 0..64 {
            for k in 0..64 {
                let (jj, kk) = ((j + 1) as f64, (k + 1) as f64);
                let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((q.entries[(j, k)] - sign * jj * kk).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn routes_agree_on_closed_forms() {
        for basis in [
            rectangle_basis(0.0, PI, 0.0, PI, 64).unwrap(),
            disk_basis(1.0, 32).unwrap(),
        ] {
            let q = q1_matrix(&basis, 1e-8).unwrap();
            assert!(q.cross_check < 1e-8, "{}", q.cross_check);
            assert_eq!(q.route, Q1Route::Boundary);
        }
    }

    #[test]
    fn degenerate_pairs_vanish() {
        let q = q1_matrix(&rectangle_basis(0.0, PI, 0.0, PI, 3).unwrap(), 1e-8).unwrap();
        assert!(q.entries[(1, 2)].abs() < 1e-12);
        let q = q1_matrix(&disk_basis(1.0, 3).unwrap(), 1e-8).unwrap();
        assert!(q.entries[(1, 2)].abs() < 1e-12);
    }

    #[test]
    fn grid_uses_the_discrete_operator() {
        let domain = Domain::grid(GridMask::unit_square(32).unwrap()).with_star_center([0.5, 0.5]);
        let basis = crate::eigenbasis::SpectralBasis::new(&domain, 8).unwrap();
        let q = q1_matrix(&basis, 1e-8).unwrap();
        assert_eq!(q.route, Q1Route::DiscreteOperator);
        assert!(q.trace_discrepancy.unwrap() < 0.5);
    }
}
