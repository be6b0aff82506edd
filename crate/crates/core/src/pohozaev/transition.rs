use nalgebra::DMatrix;
use rayon::prelude::*;

use super::q1::{q1_matrix, PohozaevQ1};
use super::PohozaevError;
use crate::eigenbasis::{radial_moment_matrix, RadialMoments, SpectralBasis};
use crate::quadrature::GaussLegendre;
use crate::sfl::{eigen_power, FractionalOrder, SpectralFunction};

/// Relative gap below which the divided difference switches to its integral form.
const NEAR_DEGENERATE: f64 = 1e-6;

/// Divided difference of `t ↦ t^s` at `(λ_j, λ_k)`, `s·λ^{s-1}` when they coincide.
///
/// Close pairs use `s∫₀¹(λ_k + τ(λ_j-λ_k))^{s-1} dτ` with an 8-point Gauss rule.
pub fn transition_entry(lambda_j: f64, lambda_k: f64, s: FractionalOrder) -> f64 {
    let s = s.value();
    let delta = lambda_j - lambda_k;
    if delta == 0.0 {
        return s * eigen_power(lambda_j, s - 1.0);
    }
    if delta.abs() <= NEAR_DEGENERATE * lambda_j.max(lambda_k) {
        let rule = GaussLegendre::new(8);
        return s * rule.integrate(0.0, 1.0, |t| eigen_power(lambda_k + t * delta, s - 1.0));
    }
    (eigen_power(lambda_j, s) - eigen_power(lambda_k, s)) / delta
}

#[derive(Debug, Clone)]
pub struct TransitionP {
    pub s: FractionalOrder,
    pub entries: DMatrix<f64>,
    /// `μ_k = ½ log λ_k`.
    pub log_eigen: Vec<f64>,
}

impl TransitionP {
    pub fn new(eigenvalues: &[f64], s: FractionalOrder) -> Self {
        let n = eigenvalues.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                (0..n)
                    .map(|k| transition_entry(eigenvalues[j], eigenvalues[k], s))
                    .collect()
            })
            .collect();
        let entries = DMatrix::from_fn(n, n, |j, k| rows[j][k]);
        let entries = symmetrize(&entries);
        Self {
            s,
            entries,
            log_eigen: eigenvalues.iter().map(|l| 0.5 * l.ln()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `Q⁽ˢ⁾ = P⁽ˢ⁾ ∘ Q⁽¹⁾`.
pub fn qs_schur(q1: &PohozaevQ1, p: &TransitionP) -> Result<DMatrix<f64>, PohozaevError> {
    if q1.len() != p.len() {
        return Err(PohozaevError::SizeMismatch(q1.len(), p.len()));
    }
    Ok(p.entries.component_mul(&q1.entries))
}

/// Unsymmetrised coefficient matrix of `Q⁽ˢ⁾[u]` from the radial moments:
/// `R_jk = ((2s-N)/2) λ_j^s δ_jk - λ_k^s M_jk`.
pub fn qs_raw(
    eigenvalues: &[f64],
    moments: &RadialMoments,
    dimension: usize,
    s: FractionalOrder,
) -> DMatrix<f64> {
    let s = s.value();
    let n = eigenvalues.len();
    let lead = (2.0 * s - dimension as f64) / 2.0;
    let pow: Vec<f64> = eigenvalues.iter().map(|l| eigen_power(*l, s)).collect();
    DMatrix::from_fn(n, n, |j, k| {
        let diag = if j == k { lead * pow[j] } else { 0.0 };
        diag - pow[k] * moments.matrix[(j, k)]
    })
}

/// `((2s-N)/2) Σ λ_j^s û_j² - Σ_{j,k} û_j û_k λ_k^s M_jk`.
pub fn qs_direct(
    basis: &SpectralBasis,
    moments: &RadialMoments,
    u: &SpectralFunction,
    s: FractionalOrder,
) -> f64 {
    let lam = basis.eigenvalues();
    let s_val = s.value();
    let lead = (2.0 * s_val - basis.dimension() as f64) / 2.0;
    let pow: Vec<f64> = lam.iter().map(|l| eigen_power(*l, s_val)).collect();
    let c = &u.coeffs;
    let mut diagonal = 0.0;
    let mut cross = 0.0;
    for j in 0..c.len() {
        diagonal += pow[j] * c[j] * c[j];
        let mut row = 0.0;
        for k in 0..c.len() {
            row += c[k] * pow[k] * moments.matrix[(j, k)];
        }
        cross += c[j] * row;
    }
    lead * diagonal - cross
}

/// Every matrix of the identity for one basis and one order.
#[derive(Debug, Clone)]
pub struct PohozaevMatrices {
    pub q1: PohozaevQ1,
    pub moments: RadialMoments,
    pub transition: TransitionP,
    pub qs: DMatrix<f64>,
}

impl PohozaevMatrices {
    pub fn assemble(
        basis: &SpectralBasis,
        s: FractionalOrder,
        cross_check_tolerance: f64,
    ) -> Result<Self, PohozaevError> {
        let q1 = q1_matrix(basis, cross_check_tolerance)?;
        Self::from_q1(basis, q1, s)
    }

    /// Reuses a `Q⁽¹⁾` already built for `basis`.
    pub fn from_q1(
        basis: &SpectralBasis,
        q1: PohozaevQ1,
        s: FractionalOrder,
    ) -> Result<Self, PohozaevError> {
        let moments = radial_moment_matrix(basis)?;
        let transition = TransitionP::new(&basis.eigenvalues(), s);
        let qs = qs_schur(&q1, &transition)?;
        Ok(Self {
            q1,
            moments,
            transition,
            qs,
        })
    }

    /// `ûᵀ Q⁽ˢ⁾ û`.
    pub fn qs_form(&self, u: &SpectralFunction) -> f64 {
        let v = u.as_vector();
        v.dot(&(&self.qs * &v))
    }

    /// `|qs_direct - ûᵀQ⁽ˢ⁾û| / (1 + |qs_direct|)`.
    pub fn identity_residual(&self, basis: &SpectralBasis, u: &SpectralFunction) -> f64 {
        let direct = qs_direct(basis, &self.moments, u, self.transition.s);
        (direct - self.qs_form(u)).abs() / (1.0 + direct.abs())
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::eigenbasis::interval_basis;

    fn order(s: f64) -> FractionalOrder {
        FractionalOrder::new(s).unwrap()
    }

    #[test]
    fn entries() {
        assert!((transition_entry(4.0, 1.0, order(0.5)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((transition_entry(4.0, 4.0, order(0.5)) - 0.25).abs() < 1e-15);
        assert_eq!(
            transition_entry(4.0, 1.0, FractionalOrder::classical()),
            1.0
        );
        assert_eq!(
            transition_entry(4.0, 4.0, FractionalOrder::classical()),
            1.0
        );
    }

    #[test]
    fn near_degenerate_entries_are_stable() {
        for s in [0.1, 0.5, 0.9] {
            for lambda in [0.3, 7.0, 1e4] {
                let got = transition_entry(lambda, lambda * (1.0 + 1e-13), order(s));
                let want = s * lambda.powf(s - 1.0);
                assert!((got / want - 1.0).abs() < 1e-6);
            }
        }
        // Continuity across the branch switch.
        let (a, b) = (
            transition_entry(5.0, 5.0 * (1.0 + 0.99e-6), order(0.3)),
            transition_entry(5.0, 5.0 * (1.0 + 1.01e-6), order(0.3)),
        );
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn schur_values_on_the_interval() {
        let basis = interval_basis(0.0, PI, 4).unwrap();
        let m = PohozaevMatrices::assemble(&basis, order(0.5), 1e-8).unwrap();
        assert!((m.qs[(0, 1)] + 2.0 / 3.0).abs() < 1e-12);
        assert!((m.qs[(1, 1)] - 1.0).abs() < 1e-12);
        let e2 = SpectralFunction::unit(&basis, 2);
        assert!((qs_direct(&basis, &m.moments, &e2, order(0.5)) - 1.0).abs() < 1e-12);
        let e1 = SpectralFunction::unit(&basis, 1);
        let classical =
            PohozaevMatrices::assemble(&basis, FractionalOrder::classical(), 1e-8).unwrap();
        assert!(
            (qs_direct(
                &basis,
                &classical.moments,
                &e1,
                FractionalOrder::classical()
            ) - 1.0)
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn symmetrised_raw_form_is_the_schur_product() {
        let basis = interval_basis(0.0, PI, 12).unwrap();
        let s = order(0.7);
        let m = PohozaevMatrices::assemble(&basis, s, 1e-8).unwrap();
        let tilde = symmetrize(&qs_raw(&basis.eigenvalues(), &m.moments, 1, s));
        assert!((tilde - &m.qs).amax() < 1e-9);
    }
}
