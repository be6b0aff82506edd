//! Radial moments `∫(x-c)·∇φ_j φ_k` and the star-shape margin.

use nalgebra::DMatrix;

use super::domain::{Domain, DomainKind};
use super::{BasisError, SpectralBasis};

#[derive(Debug, Clone)]
pub struct RadialMoments {
    /// `matrix[(j, k)] = ∫_Ω ((x-c)·∇φ_j) φ_k dx`.
    pub matrix: DMatrix<f64>,
    /// `max_k |M_kk + N/2|`.
    pub diagonal_deviation: f64,
    /// `max_{j≠k} |M_jk + M_kj|`.
    pub antisymmetry_defect: f64,
}

pub fn radial_moment_matrix(basis: &SpectralBasis) -> Result<RadialMoments, BasisError> {
    let vol = basis.volume();
    let matrix = vol.radial.transpose() * vol.weighted_values();
    let half_n = basis.dimension() as f64 / 2.0;
    let n = matrix.nrows();
    let diagonal_deviation = (0..n)
        .map(|k| (matrix[(k, k)] + half_n).abs())
        .fold(0.0, f64::max);
    let mut antisymmetry_defect: f64 = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            antisymmetry_defect = antisymmetry_defect.max((matrix[(j, k)] + matrix[(k, j)]).abs());
        }
    }
    let tolerance = basis.quadrature_tolerance();
    if diagonal_deviation > tolerance {
        return Err(BasisError::UnderResolved {
            deviation: diagonal_deviation,
            tolerance,
        });
    }
    Ok(RadialMoments {
        matrix,
        diagonal_deviation,
        antisymmetry_defect,
    })
}

/// `min (x-c)·ν` over the boundary, `c` the star centre. Closed forms are
/// evaluated exactly; grids use their boundary nodes.
pub fn star_shape_margin(domain: &Domain) -> f64 {
    let c = domain.star_center;
    match &domain.kind {
        DomainKind::Interval { a, b } => (c[0] - a).min(b - c[0]),
        DomainKind::Rectangle { a, b, c: lo, d } => {
            (c[0] - a).min(b - c[0]).min(c[1] - lo).min(d - c[1])
        }
        DomainKind::Disk { radius, center } => radius - (center[0] - c[0]).hypot(center[1] - c[1]),
        DomainKind::Grid(mask) => {
            let mut margin = f64::INFINITY;
            for r in 0..mask.rows as isize {
                for col in 0..mask.cols as isize {
                    if !mask.is_interior_signed(r, col) {
                        continue;
                    }
                    for (dr, dc) in [(0isize, 1isize), (0, -1), (-1, 0), (1, 0)] {
                        if !mask.is_interior_signed(r + dr, col + dc) {
                            let p = mask.position_signed(r + dr, col + dc);
                            let nu = [dc as f64, -dr as f64];
                            margin = margin.min((p[0] - c[0]) * nu[0] + (p[1] - c[1]) * nu[1]);
                        }
                    }
                }
            }
            margin
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::eigenbasis::{interval_basis, GridMask};

    #[test]
    fn interval_moments() {
        let basis = interval_basis(0.0, PI, 8).unwrap();
        let m = radial_moment_matrix(&basis).unwrap();
        assert!(m.diagonal_deviation < 1e-12);
        assert!((m.matrix[(0, 0)] + 0.5).abs() < 1e-12);
        assert!((m.matrix[(0, 1)] - 4.0 / 3.0).abs() < 1e-12);
        assert!(m.antisymmetry_defect < 1e-12);
    }

    #[test]
    fn margins() {
        assert_eq!(star_shape_margin(&Domain::interval(0.0, PI).unwrap()), 0.0);
        let disk = Domain::disk(1.0, [0.0, 0.0]).unwrap();
        assert!((star_shape_margin(&disk) - 1.0).abs() < 1e-15);
        let square = Domain::rectangle(0.0, PI, 0.0, PI)
            .unwrap()
            .with_star_center([PI / 2.0, PI / 2.0]);
        assert!((star_shape_margin(&square) - PI / 2.0).abs() < 1e-15);
        let off = Domain::interval(0.0, 1.0)
            .unwrap()
            .with_star_center([2.0, 0.0]);
        assert!(star_shape_margin(&off) < 0.0);
        let l = Domain::grid(GridMask::l_shape(8).unwrap()).with_star_center([0.25, 0.25]);
        assert!(star_shape_margin(&l) >= 0.0);
        let l_bad = Domain::grid(GridMask::l_shape(8).unwrap()).with_star_center([0.9, 0.9]);
        assert!(star_shape_margin(&l_bad) < 0.0);
    }
}
