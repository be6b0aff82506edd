//! Dirichlet-Laplacian eigenpairs on canonical and finite-difference domains.
//!
//! A [`SpectralBasis`] is an ordered, truncated family of eigenpairs together
//! with everything the Pohozaev machinery needs: a volume quadrature with the
//! eigenfunctions and their radial derivatives `(x-c)·∇φ` tabulated on it, and
//! a boundary quadrature carrying the outward normal, the support factor
//! `(x-c)·ν` and the gradient traces.

mod closed;
mod domain;
mod grid;
mod moments;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use closed::{disk_basis, interval_basis, rectangle_basis};
pub use domain::{Domain, DomainKind, GridMask, Point};
pub use grid::{grid_basis, grid_basis_with, GridSolver};
pub use moments::{radial_moment_matrix, star_shape_margin, RadialMoments};

use grid::GridData;

/// Relative threshold for grouping equal eigenvalues.
pub const GROUP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("truncation size must be at least 1")]
    EmptyTruncation,
    #[error("requested {requested} eigenpairs but only {available} are available")]
    TooManyModes { requested: usize, available: usize },
    #[error("grid mask is not connected: reached {reached} of {total} interior nodes")]
    DisconnectedMask { reached: usize, total: usize },
    #[error("cannot parse grid raster: {0}")]
    MaskParse(String),
    #[error("eigensolver did not converge: {0}")]
    EigenSolver(String),
    #[error("point ({}, {}) lies outside the closed domain", .0[0], .0[1])]
    PointOutside(Point),
    #[error("volume quadrature under-resolved: diagonal moments deviate from -N/2 by {deviation:e} (tolerance {tolerance:e})")]
    UnderResolved { deviation: f64, tolerance: f64 },
    #[error("basis transform must be orthogonal and act within eigenvalue groups: {0}")]
    InvalidTransform(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Angular {
    Radial,
    Cos,
    Sin,
}

/// Which closed-form (or discrete) eigenfunction a pair refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// `sin(kπ(x-a)/(b-a))`.
    Sine { k: usize },
    /// `sin(jπ(x-a)/(b-a)) · sin(kπ(y-c)/(d-c))`.
    ProductSine { j: usize, k: usize },
    /// `J_m(z r/R)` times `1`, `cos(mθ)` or `sin(mθ)`, `z` the `l`-th zero of `J_m`.
    Bessel {
        order: usize,
        zero_index: usize,
        zero: f64,
        angular: Angular,
    },
    /// Column of the finite-difference eigenvector matrix.
    Grid { column: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    /// 1-based position in the sorted spectrum.
    pub index: usize,
    pub eigenvalue: f64,
    /// Pairs sharing a group have equal eigenvalues (within [`GROUP_TOLERANCE`]).
    pub group: usize,
    pub mode: Mode,
}

/// Eigenfunctions tabulated on a volume quadrature.
#[derive(Debug, Clone)]
pub struct VolumeTable {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    /// `values[(q, k)] = φ_k(x_q)`.
    pub values: DMatrix<f64>,
    /// `radial[(q, k)] = (x_q - c)·∇φ_k(x_q)`; for grid bases the
    /// skew-symmetric discrete operator is used instead of a pointwise gradient.
    pub radial: DMatrix<f64>,
}

impl VolumeTable {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.weights.len());
        self.weights.iter().zip(samples).map(|(w, f)| w * f).sum()
    }

    /// Gram matrix `Φᵀ W Φ`.
    pub fn gram(&self) -> DMatrix<f64> {
        let weighted = self.weighted_values();
        self.values.transpose() * weighted
    }

    /// `W Φ`.
    pub fn weighted_values(&self) -> DMatrix<f64> {
        let mut weighted = self.values.clone();
        for (mut row, w) in weighted.row_iter_mut().zip(&self.weights) {
            row *= *w;
        }
        weighted
    }

    /// Synthesises `Σ û_k φ_k` at every node.
    pub fn synthesize(&self, coeffs: &[f64]) -> DVector<f64> {
        &self.values * DVector::from_column_slice(coeffs)
    }

    fn transformed(&self, t: &DMatrix<f64>) -> Self {
        Self {
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
            values: &self.values * t.transpose(),
            radial: &self.radial * t.transpose(),
        }
    }
}

/// Boundary quadrature with gradient traces of every eigenfunction.
#[derive(Debug, Clone)]
pub struct BoundaryQuadrature {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
    pub normals: Vec<[f64; 2]>,
    /// `(x - c)·ν` at each node.
    pub support: Vec<f64>,
    pub grad_x: DMatrix<f64>,
    pub grad_y: DMatrix<f64>,
    /// Polynomial degree integrated exactly on each panel, when the rule has one.
    pub exact_degree: Option<usize>,
}

impl BoundaryQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `B_jk = ∫_{∂Ω} (∇φ_j·∇φ_k)(x-c)·ν dS`.
    pub fn gradient_form(&self) -> DMatrix<f64> {
        let mut wx = self.grad_x.clone();
        let mut wy = self.grad_y.clone();
        for (b, (w, s)) in self.weights.iter().zip(&self.support).enumerate() {
            let f = w * s;
            wx.row_mut(b).scale_mut(f);
            wy.row_mut(b).scale_mut(f);
        }
        self.grad_x.transpose() * wx + self.grad_y.transpose() * wy
    }

    fn transformed(&self, t: &DMatrix<f64>) -> Self {
        Self {
            grad_x: &self.grad_x * t.transpose(),
            grad_y: &self.grad_y * t.transpose(),
            ..self.clone()
        }
    }
}

/// Values and gradients of every basis function at a single point.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub values: DVector<f64>,
    pub grad_x: DVector<f64>,
    pub grad_y: DVector<f64>,
}

/// An ordered truncated Dirichlet eigenbasis. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    domain: Domain,
    pairs: Vec<EigenPair>,
    /// Maps raw eigenfunctions to the basis functions: `φ = T φ_raw`.
    transform: DMatrix<f64>,
    volume: VolumeTable,
    boundary: BoundaryQuadrature,
    grid: Option<Arc<GridData>>,
    fingerprint: String,
}

impl SpectralBasis {
    /// Builds the basis appropriate for `domain`, honouring its star centre.
    pub fn new(domain: &Domain, n: usize) -> Result<Self, BasisError> {
        match &domain.kind {
            DomainKind::Grid(_) => grid::build(domain, n, GridSolver::Auto),
            _ => closed::build(domain, n),
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.eigenvalue).collect()
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn volume(&self) -> &VolumeTable {
        &self.volume
    }

    pub fn boundary(&self) -> &BoundaryQuadrature {
        &self.boundary
    }

    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    pub fn is_grid(&self) -> bool {
        self.grid.is_some()
    }

    /// Grid spacing for finite-difference bases.
    pub fn grid_spacing(&self) -> Option<f64> {
        self.grid.as_ref().map(|g| g.mask.h)
    }

    /// Indices (0-based) of every eigenvalue group, in spectral order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (i, p) in self.pairs.iter().enumerate() {
            match out.last_mut() {
                Some(last) if self.pairs[last[0]].group == p.group => last.push(i),
                _ => out.push(vec![i]),
            }
        }
        out
    }

    /// Tolerance on `|M_kk + N/2|` for this basis' volume quadrature.
    pub fn quadrature_tolerance(&self) -> f64 {
        1e-9
    }

    /// Values and gradients of all basis functions at `p`.
    pub fn evaluate(&self, p: Point) -> Result<PointEval, BasisError> {
        if !self.domain.contains(p) {
            return Err(BasisError::PointOutside(p));
        }
        let raw = match &self.grid {
            Some(g) => g.evaluate_raw(p)?,
            None => closed::evaluate_raw(&self.domain, &self.pairs, p),
        };
        Ok(PointEval {
            values: &self.transform * raw.values,
            grad_x: &self.transform * raw.grad_x,
            grad_y: &self.transform * raw.grad_y,
        })
    }

    /// Volume table on a quadrature refined by `refine` (panel multiplier).
    /// Grid bases only have their nodal rule and ignore the factor.
    pub fn volume_table(&self, refine: usize) -> VolumeTable {
        if refine <= 1 || self.grid.is_some() {
            return self.volume.clone();
        }
        closed::raw_volume_table(&self.domain, &self.pairs, refine).transformed(&self.transform)
    }

    /// `B_jk = ∫_{∂Ω}(∇φ_j·∇φ_k)(x-c)·ν dS` from the boundary quadrature.
    pub fn boundary_gradient_form(&self) -> DMatrix<f64> {
        self.boundary.gradient_form()
    }

    /// Discrete Pohozaev form of a finite-difference basis (`None` for closed forms).
    pub fn discrete_pohozaev_form(&self) -> Option<DMatrix<f64>> {
        self.grid.as_ref().map(|g| {
            &self.transform * g.pohozaev_form_raw(&self.domain) * self.transform.transpose()
        })
    }

    /// A basis whose functions are `φ'_i = Σ_j Q_ij φ_j` for an orthogonal `Q`
    /// that only mixes functions inside one eigenvalue group (sign flips and
    /// rotations of degenerate eigenspaces).
    pub fn transformed(&self, q: &DMatrix<f64>) -> Result<Self, BasisError> {
        let n = self.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(BasisError::InvalidTransform(format!(
                "expected {n}x{n}, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        let defect = (q.transpose() * q - DMatrix::<f64>::identity(n, n)).amax();
        if defect > 1e-12 {
            return Err(BasisError::InvalidTransform(format!(
                "QᵀQ deviates from identity by {defect:e}"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if q[(i, j)] != 0.0 && self.pairs[i].group != self.pairs[j].group {
                    return Err(BasisError::InvalidTransform(format!(
                        "entry ({i}, {j}) couples different eigenvalues"
                    )));
                }
            }
        }
        let mut out = self.clone();
        out.transform = q * &self.transform;
        out.volume = self.volume.transformed(q);
        out.boundary = self.boundary.transformed(q);
        out.fingerprint = fingerprint(&out.domain, &out.pairs, &out.transform);
        Ok(out)
    }

    fn assemble(
        domain: Domain,
        pairs: Vec<EigenPair>,
        raw_volume: VolumeTable,
        raw_boundary: BoundaryQuadrature,
        grid: Option<Arc<GridData>>,
    ) -> Self {
        let n = pairs.len();
        // Sign convention: first node with |φ| > 1e-8 carries a positive value.
        let signs: Vec<f64> = (0..n)
            .map(|k| {
                raw_volume
                    .values
                    .column(k)
                    .iter()
                    .find(|v| v.abs() > 1e-8)
                    .map_or(1.0, |v| v.signum())
            })
            .collect();
        let transform = DMatrix::from_diagonal(&DVector::from_vec(signs));
        let volume = raw_volume.transformed(&transform);
        let boundary = raw_boundary.transformed(&transform);
        let fingerprint = fingerprint(&domain, &pairs, &transform);
        Self {
            domain,
            pairs,
            transform,
            volume,
            boundary,
            grid,
            fingerprint,
        }
    }
}

/// Assigns 1-based indices and eigenvalue groups to a sorted spectrum.
fn label_pairs(sorted: Vec<(f64, Mode)>) -> Vec<EigenPair> {
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(sorted.len());
    let mut group = 0;
    for (i, (lambda, mode)) in sorted.into_iter().enumerate() {
        if let Some(prev) = pairs.last() {
            if !same_group(prev.eigenvalue, lambda) {
                group += 1;
            }
        }
        pairs.push(EigenPair {
            index: i + 1,
            eigenvalue: lambda,
            group,
            mode,
        });
    }
    pairs
}

pub fn same_group(a: f64, b: f64) -> bool {
    (a - b).abs() <= GROUP_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

fn fingerprint(domain: &Domain, pairs: &[EigenPair], transform: &DMatrix<f64>) -> String {
    let mut hasher = Sha256::new();
    hasher.update(domain.describe().as_bytes());
    hasher.update((pairs.len() as u64).to_le_bytes());
    for p in pairs {
        hasher.update(p.eigenvalue.to_bits().to_le_bytes());
    }
    for v in transform.iter() {
        hasher.update(v.to_bits().to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
