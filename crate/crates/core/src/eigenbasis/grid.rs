//! Five-point finite-difference Dirichlet Laplacian on a nodal mask.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::domain::{grid_cell_of, Domain, DomainKind, GridMask, Point};
use super::{
    label_pairs, BasisError, BoundaryQuadrature, Mode, PointEval, SpectralBasis, VolumeTable,
};

/// Interior-node indices of the four lattice neighbours.
type Stencil = [Option<usize>; 4];

/// Largest system handed to the dense symmetric eigensolver under [`GridSolver::Auto`].
const DENSE_LIMIT: usize = 1200;
const SUBSPACE_TOL: f64 = 1e-11;
const SUBSPACE_MAX_ITER: usize = 2000;
const START_SEED: u64 = 0x5f1_e16e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridSolver {
    /// Dense for small grids, subspace iteration otherwise.
    #[default]
    Auto,
    Dense,
    /// Block shift-invert subspace iteration on a banded Cholesky factor.
    Subspace,
}

/// Neighbour slots: east, west, north, south.
const DIRECTIONS: [(isize, isize); 4] = [(0, 1), (0, -1), (-1, 0), (1, 0)];

#[derive(Debug)]
pub(super) struct GridData {
    pub(super) mask: GridMask,
    nodes: Vec<(usize, usize)>,
    neighbors: Vec<Stencil>,
    /// Nodal eigenvector values, normalised so that `h² Σ φ² = 1`.
    vectors: DMatrix<f64>,
}

pub fn grid_basis(mask: GridMask, n: usize) -> Result<SpectralBasis, BasisError> {
    build(&Domain::grid(mask), n, GridSolver::Auto)
}

/// Grid basis for a grid `domain` (keeping its star centre) with an explicit solver.
pub fn grid_basis_with(
    domain: &Domain,
    n: usize,
    solver: GridSolver,
) -> Result<SpectralBasis, BasisError> {
    build(domain, n, solver)
}

pub(super) fn build(
    domain: &Domain,
    n: usize,
    solver: GridSolver,
) -> Result<SpectralBasis, BasisError> {
    let DomainKind::Grid(mask) = &domain.kind else {
        return Err(BasisError::InvalidDomain(
            "grid solver needs a grid domain".into(),
        ));
    };
    if n == 0 {
        return Err(BasisError::EmptyTruncation);
    }
    let (nodes, neighbors) = lattice(mask);
    let total = nodes.len();
    if n > total {
        return Err(BasisError::TooManyModes {
            requested: n,
            available: total,
        });
    }
    let inv_h2 = 1.0 / (mask.h * mask.h);
    let use_dense = match solver {
        GridSolver::Dense => true,
        GridSolver::Subspace => false,
        GridSolver::Auto => total <= DENSE_LIMIT,
    };
    let (values, unit) = if use_dense {
        dense_eigen(&neighbors, inv_h2, n)?
    } else {
        subspace_eigen(&neighbors, inv_h2, n)?
    };
    let vectors = unit / mask.h;
    let data = GridData {
        mask: mask.clone(),
        nodes,
        neighbors,
        vectors,
    };

    let pairs = label_pairs(
        values
            .iter()
            .enumerate()
            .map(|(k, &l)| (l, Mode::Grid { column: k }))
            .collect(),
    );
    let volume = data.volume_table(domain.star_center);
    let boundary = data.boundary_traces(domain.star_center);
    Ok(SpectralBasis::assemble(
        domain.clone(),
        pairs,
        volume,
        boundary,
        Some(Arc::new(data)),
    ))
}

fn lattice(mask: &GridMask) -> (Vec<(usize, usize)>, Vec<Stencil>) {
    let mut index = vec![None; mask.rows * mask.cols];
    let mut nodes = Vec::new();
    for r in 0..mask.rows {
        for c in 0..mask.cols {
            if mask.is_interior(r, c) {
                index[r * mask.cols + c] = Some(nodes.len());
                nodes.push((r, c));
            }
        }
    }
    let neighbors = nodes
        .iter()
        .map(|&(r, c)| {
            DIRECTIONS.map(|(dr, dc)| {
                let (rr, cc) = (r as isize + dr, c as isize + dc);
                if mask.is_interior_signed(rr, cc) {
                    index[rr as usize * mask.cols + cc as usize]
                } else {
                    None
                }
            })
        })
        .collect();
    (nodes, neighbors)
}

fn apply_laplacian(neighbors: &[Stencil], inv_h2: f64, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x * (4.0 * inv_h2);
    for (i, nb) in neighbors.iter().enumerate() {
        for j in nb.iter().flatten() {
            for col in 0..x.ncols() {
                out[(i, col)] -= inv_h2 * x[(*j, col)];
            }
        }
    }
    out
}

fn dense_eigen(
    neighbors: &[Stencil],
    inv_h2: f64,
    n: usize,
) -> Result<(Vec<f64>, DMatrix<f64>), BasisError> {
    let total = neighbors.len();
    let mut a = DMatrix::zeros(total, total);
    for (i, nb) in neighbors.iter().enumerate() {
        a[(i, i)] = 4.0 * inv_h2;
        for j in nb.iter().flatten() {
            a[(i, *j)] = -inv_h2;
        }
    }
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 0).ok_or_else(|| {
        BasisError::EigenSolver("dense symmetric eigensolver did not converge".into())
    })?;
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.truncate(n);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(total, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Lower band of a Cholesky factor: `band[i][k] = L[i][i-k]`.
struct BandCholesky {
    width: usize,
    band: Vec<f64>,
    n: usize,
}

impl BandCholesky {
    fn factor(neighbors: &[Stencil], inv_h2: f64) -> Result<Self, BasisError> {
        let n = neighbors.len();
        let width = neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, nb)| nb.iter().flatten().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0);
        let stride = width + 1;
        let mut band = vec![0.0; n * stride];
        for (i, nb) in neighbors.iter().enumerate() {
            band[i * stride] = 4.0 * inv_h2;
            for &j in nb.iter().flatten() {
                if j < i {
                    band[i * stride + (i - j)] = -inv_h2;
                }
            }
        }
        for i in 0..n {
            let lo_i = i.saturating_sub(width);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(width));
                let mut sum = band[i * stride + (i - j)];
                for k in lo..j {
                    sum -= band[i * stride + (i - k)] * band[j * stride + (j - k)];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(BasisError::EigenSolver(
                            "Laplacian factorisation lost positivity".into(),
                        ));
                    }
                    band[i * stride] = sum.sqrt();
                } else {
                    band[i * stride + (i - j)] = sum / band[j * stride];
                }
            }
        }
        Ok(Self { width, band, n })
    }

    fn solve_in_place(&self, x: &mut DVector<f64>) {
        let stride = self.width + 1;
        for i in 0..self.n {
            let mut sum = x[i];
            for k in i.saturating_sub(self.width)..i {
                sum -= self.band[i * stride + (i - k)] * x[k];
            }
            x[i] = sum / self.band[i * stride];
        }
        for i in (0..self.n).rev() {
            let mut sum = x[i];
            for k in i + 1..(i + stride).min(self.n) {
                sum -= self.band[k * stride + (k - i)] * x[k];
            }
            x[i] = sum / self.band[i * stride];
        }
    }
}

fn subspace_eigen(
    neighbors: &[Stencil],
    inv_h2: f64,
    n: usize,
) -> Result<(Vec<f64>, DMatrix<f64>), BasisError> {
    let total = neighbors.len();
    let block = total.min((2 * n).max(n + 16));
    let chol = BandCholesky::factor(neighbors, inv_h2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut x = DMatrix::from_fn(total, block, |_, _| rng.random::<f64>() - 0.5);
    let mut worst = f64::INFINITY;
    for _ in 0..SUBSPACE_MAX_ITER {
        let q = x.qr().q();
        let aq = apply_laplacian(neighbors, inv_h2, &q);
        let h = q.transpose() * &aq;
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let rot = DMatrix::from_fn(block, block, |r, c| eig.eigenvectors[(r, order[c])]);
        let ritz = &q * &rot;
        let a_ritz = aq * &rot;
        worst = (0..n)
            .map(|k| {
                let theta = eig.eigenvalues[order[k]];
                (a_ritz.column(k) - ritz.column(k) * theta).norm() / theta
            })
            .fold(0.0, f64::max);
        if worst <= SUBSPACE_TOL {
            let values = (0..n).map(|k| eig.eigenvalues[order[k]]).collect();
            return Ok((values, ritz.columns(0, n).into_owned()));
        }
        x = ritz;
        for mut col in x.column_iter_mut() {
            let mut v = col.clone_owned();
            chol.solve_in_place(&mut v);
            col.copy_from(&v);
        }
    }
    Err(BasisError::EigenSolver(format!(
        "subspace iteration stalled at relative residual {worst:e} after {SUBSPACE_MAX_ITER} sweeps"
    )))
}

impl GridData {
    fn apply_laplacian(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        apply_laplacian(&self.neighbors, 1.0 / (self.mask.h * self.mask.h), x)
    }

    /// Skew-symmetric discretisation of `(x-c)·∇ + N/2`.
    fn apply_skew_radial(&self, c: Point, x: &DMatrix<f64>) -> DMatrix<f64> {
        let h = self.mask.h;
        let mut out = DMatrix::zeros(x.nrows(), x.ncols());
        for (i, nb) in self.neighbors.iter().enumerate() {
            let p = self.mask.position(self.nodes[i].0, self.nodes[i].1);
            let coef = [
                (p[0] + 0.5 * h - c[0]) / (2.0 * h),
                -(p[0] - 0.5 * h - c[0]) / (2.0 * h),
                (p[1] + 0.5 * h - c[1]) / (2.0 * h),
                -(p[1] - 0.5 * h - c[1]) / (2.0 * h),
            ];
            for (slot, j) in nb.iter().enumerate() {
                if let Some(j) = j {
                    for col in 0..x.ncols() {
                        out[(i, col)] += coef[slot] * x[(*j, col)];
                    }
                }
            }
        }
        out
    }

    fn volume_table(&self, c: Point) -> VolumeTable {
        let h2 = self.mask.h * self.mask.h;
        let nodes: Vec<Point> = self
            .nodes
            .iter()
            .map(|&(r, col)| self.mask.position(r, col))
            .collect();
        let radial = self.apply_skew_radial(c, &self.vectors) - &self.vectors;
        VolumeTable {
            weights: vec![h2; nodes.len()],
            nodes,
            values: self.vectors.clone(),
            radial,
        }
    }

    /// One-sided traces: every interior node with an exterior neighbour
    /// contributes a boundary node at that neighbour, normal pointing to it,
    /// and `∇φ ≈ -(φ_i/h) ν`.
    fn boundary_traces(&self, c: Point) -> BoundaryQuadrature {
        let h = self.mask.h;
        let mut nodes = Vec::new();
        let mut normals = Vec::new();
        let mut rows = Vec::new();
        for (i, nb) in self.neighbors.iter().enumerate() {
            let (r, col) = self.nodes[i];
            for (slot, (dr, dc)) in DIRECTIONS.iter().enumerate() {
                if nb[slot].is_none() {
                    nodes.push(
                        self.mask
                            .position_signed(r as isize + dr, col as isize + dc),
                    );
                    normals.push([*dc as f64, -*dr as f64]);
                    rows.push(i);
                }
            }
        }
        let n = self.vectors.ncols();
        let mut grad_x = DMatrix::zeros(nodes.len(), n);
        let mut grad_y = DMatrix::zeros(nodes.len(), n);
        for (b, &i) in rows.iter().enumerate() {
            for k in 0..n {
                let d = -self.vectors[(i, k)] / h;
                grad_x[(b, k)] = d * normals[b][0];
                grad_y[(b, k)] = d * normals[b][1];
            }
        }
        let support = nodes
            .iter()
            .zip(&normals)
            .map(|(p, nu): (&Point, &[f64; 2])| (p[0] - c[0]) * nu[0] + (p[1] - c[1]) * nu[1])
            .collect();
        BoundaryQuadrature {
            weights: vec![h; nodes.len()],
            nodes,
            normals,
            support,
            grad_x,
            grad_y,
            exact_degree: None,
        }
    }

    /// `Φᵀ h² (A + ½(K A − A K)) Φ`, symmetrised, with `K` the skew radial operator.
    pub(super) fn pohozaev_form_raw(&self, domain: &Domain) -> DMatrix<f64> {
        let c = domain.star_center;
        let a_phi = self.apply_laplacian(&self.vectors);
        let ka_phi = self.apply_skew_radial(c, &a_phi);
        let ak_phi = self.apply_laplacian(&self.apply_skew_radial(c, &self.vectors));
        let op = &a_phi + (ka_phi - ak_phi) * 0.5;
        let h2 = self.mask.h * self.mask.h;
        let f = self.vectors.transpose() * op * h2;
        (&f + f.transpose()) * 0.5
    }

    /// Bilinear interpolation of nodal values on the lattice cell containing `p`.
    pub(super) fn evaluate_raw(&self, p: Point) -> Result<PointEval, BasisError> {
        let (row, col, tx, ty) = grid_cell_of(&self.mask, p).ok_or(BasisError::PointOutside(p))?;
        let n = self.vectors.ncols();
        let node = |r: isize, c: isize| -> Option<usize> {
            if !self.mask.is_interior_signed(r, c) {
                return None;
            }
            self.nodes.binary_search(&(r as usize, c as usize)).ok()
        };
        let value = |idx: Option<usize>, k: usize| idx.map_or(0.0, |i| self.vectors[(i, k)]);
        let (ll, lr, ul, ur) = (
            node(row, col),
            node(row, col + 1),
            node(row - 1, col),
            node(row - 1, col + 1),
        );
        let h = self.mask.h;
        let mut out = PointEval {
            values: DVector::zeros(n),
            grad_x: DVector::zeros(n),
            grad_y: DVector::zeros(n),
        };
        for k in 0..n {
            let (a, b, c, d) = (value(ll, k), value(lr, k), value(ul, k), value(ur, k));
            out.values[k] = (1.0 - tx) * (1.0 - ty) * a
                + tx * (1.0 - ty) * b
                + (1.0 - tx) * ty * c
                + tx * ty * d;
            out.grad_x[k] = ((1.0 - ty) * (b - a) + ty * (d - c)) / h;
            out.grad_y[k] = ((1.0 - tx) * (c - a) + tx * (d - b)) / h;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::eigenbasis::radial_moment_matrix;

    fn gram_defect(basis: &SpectralBasis) -> f64 {
        let n = basis.len();
        (basis.volume().gram() - DMatrix::<f64>::identity(n, n)).amax()
    }

    #[test]
    fn unit_square_first_eigenvalue() {
        let basis = grid_basis(GridMask::unit_square(64).unwrap(), 1).unwrap();
        let rel = (basis.eigenvalues()[0] - 2.0 * PI * PI).abs() / (2.0 * PI * PI);
        assert!(rel < 0.005, "relative error {rel}");
    }

    #[test]
    fn second_order_convergence() {
        let exact = 2.0 * PI * PI;
        let coarse = grid_basis(GridMask::unit_square(16).unwrap(), 1)
            .unwrap()
            .eigenvalues()[0];
        let fine = grid_basis(GridMask::unit_square(32).unwrap(), 1)
            .unwrap()
            .eigenvalues()[0];
        let ratio = (coarse - exact).abs() / (fine - exact).abs();
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn l_shape_is_orthonormal() {
        let domain = Domain::grid(GridMask::l_shape(32).unwrap()).with_star_center([0.25, 0.25]);
        let basis = SpectralBasis::new(&domain, 32).unwrap();
        assert!(gram_defect(&basis) < 1e-10);
    }

    #[test]
    fn dense_and_subspace_solvers_agree() {
        let domain = Domain::grid(GridMask::l_shape(24).unwrap()).with_star_center([0.25, 0.25]);
        let dense = grid_basis_with(&domain, 12, GridSolver::Dense).unwrap();
        let sub = grid_basis_with(&domain, 12, GridSolver::Subspace).unwrap();
        for (a, b) in dense.eigenvalues().iter().zip(sub.eigenvalues()) {
            assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
        }
        assert!(gram_defect(&sub) < 1e-10);
        // Projectors onto each eigengroup coincide.
        let cross = dense.volume().values.transpose() * sub.volume().weighted_values();
        for group in dense.groups() {
            let block = cross.select_rows(&group).select_columns(&group);
            let proj = &block * block.transpose();
            let defect = (proj - DMatrix::<f64>::identity(group.len(), group.len())).amax();
            assert!(defect < 1e-8, "group {group:?}: {defect:e}");
        }
    }

    #[test]
    fn discrete_moments_are_exactly_structured() {
        let domain = Domain::grid(GridMask::unit_square(20).unwrap()).with_star_center([0.5, 0.5]);
        let basis = SpectralBasis::new(&domain, 16).unwrap();
        let m = radial_moment_matrix(&basis).unwrap().matrix;
        for j in 0..16 {
            assert!((m[(j, j)] + 1.0).abs() < 1e-12);
            for k in 0..16 {
                if j != k {
                    assert!((m[(j, k)] + m[(k, j)]).abs() < 1e-12);
                }
            }
        }
        let form = basis.discrete_pohozaev_form().unwrap();
        let lam = basis.eigenvalues();
        for j in 0..16 {
            assert!((form[(j, j)] - lam[j]).abs() < 1e-9 * lam[j]);
            for k in 0..16 {
                if j != k {
                    let volume_route = 0.5 * (lam[j] - lam[k]) * m[(j, k)];
                    assert!((form[(j, k)] - volume_route).abs() < 1e-9 * lam[15]);
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_nodes_and_vanishes_outside_mask() {
        let basis = grid_basis(GridMask::unit_square(8).unwrap(), 3).unwrap();
        let vol = basis.volume();
        let at = basis.evaluate(vol.nodes[10]).unwrap();
        for k in 0..3 {
            assert!((at.values[k] - vol.values[(10, k)]).abs() < 1e-13);
        }
        let edge = basis.evaluate([0.0, 0.3]).unwrap();
        assert!(edge.values.amax() < 1e-13);
        assert!(matches!(
            basis.evaluate([1.5, 0.5]),
            Err(BasisError::PointOutside(_))
        ));
    }

    #[test]
    fn too_many_modes_is_rejected() {
        let mask = GridMask::unit_square(4).unwrap();
        assert!(matches!(
            grid_basis(mask, 10),
            Err(BasisError::TooManyModes {
                requested: 10,
                available: 9
            })
        ));
    }
}
