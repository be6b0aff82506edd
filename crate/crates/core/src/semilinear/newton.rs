use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::criticality::{criticality, Criticality};
use super::nonlinearity::{Nonlinearity, NonlinearityKind};
use super::SemilinearError;
use crate::eigenbasis::{SpectralBasis, VolumeTable};
use crate::sfl::{eigen_power, FractionalOrder, SpectralFunction};

/// Panel multiplier of the volume rule used for `f(x, u)`.
const NONLINEAR_REFINE: usize = 2;

/// The Galerkin system `λ_k^s û_k = ⟨f(·, u), φ_k⟩` on a refined volume rule.
#[derive(Debug, Clone)]
pub struct GalerkinSystem<'a> {
    basis: &'a SpectralBasis,
    table: VolumeTable,
    powers: DVector<f64>,
    s: FractionalOrder,
}

/// Integrals entering the Pohozaev functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalParts {
    pub value: f64,
    /// `∫|u f(x,u)|`.
    pub abs_uf: f64,
    /// `max |u|` over the quadrature nodes.
    pub sup_norm: f64,
}

impl<'a> GalerkinSystem<'a> {
    pub fn new(basis: &'a SpectralBasis, s: FractionalOrder) -> Self {
        let powers = DVector::from_iterator(
            basis.len(),
            basis
                .eigenvalues()
                .iter()
                .map(|l| eigen_power(*l, s.value())),
        );
        Self {
            basis,
            table: basis.volume_table(NONLINEAR_REFINE),
            powers,
            s,
        }
    }

    pub fn basis(&self) -> &SpectralBasis {
        self.basis
    }

    pub fn order(&self) -> FractionalOrder {
        self.s
    }

    fn samples<F: Fn([f64; 2], f64) -> f64>(
        &self,
        u: &DVector<f64>,
        g: F,
    ) -> Result<DVector<f64>, SemilinearError> {
        let values = &self.table.values * u;
        let mut out = DVector::zeros(values.len());
        for (q, (node, v)) in self.table.nodes.iter().zip(values.iter()).enumerate() {
            let value = g(*node, *v);
            if !value.is_finite() {
                return Err(SemilinearError::NonFinite {
                    node: *node,
                    u: *v,
                    value,
                });
            }
            out[q] = value;
        }
        Ok(out)
    }

    pub fn residual(
        &self,
        nl: &dyn Nonlinearity,
        u: &DVector<f64>,
    ) -> Result<DVector<f64>, SemilinearError> {
        let mut f = self.samples(u, |x, t| nl.f(x, t))?;
        f.component_mul_assign(&DVector::from_column_slice(&self.table.weights));
        Ok(self.powers.component_mul(u) - self.table.values.transpose() * f)
    }

    /// `diag(λ^s) - Φᵀ W diag(f_t(x, u)) Φ`.
    pub fn jacobian(
        &self,
        nl: &dyn Nonlinearity,
        u: &DVector<f64>,
    ) -> Result<DMatrix<f64>, SemilinearError> {
        let ft = self.samples(u, |x, t| nl.f_t(x, t))?;
        let mut weighted = self.table.values.clone();
        for (q, mut row) in weighted.row_iter_mut().enumerate() {
            row *= self.table.weights[q] * ft[q];
        }
        let mut jac = -(self.table.values.transpose() * weighted);
        for k in 0..u.len() {
            jac[(k, k)] += self.powers[k];
        }
        Ok(jac)
    }

    /// `((2s-N)/2)∫u f + N∫F + ∫(x-c)·F_x`.
    pub fn functional(
        &self,
        nl: &dyn Nonlinearity,
        u: &DVector<f64>,
    ) -> Result<FunctionalParts, SemilinearError> {
        let s = self.s.value();
        let n = self.basis.dimension() as f64;
        let c = self.basis.domain().star_center;
        let values = &self.table.values * u;
        let (mut value, mut abs_uf, mut sup_norm) = (0.0, 0.0, 0.0_f64);
        for ((x, w), t) in self
            .table
            .nodes
            .iter()
            .zip(&self.table.weights)
            .zip(values.iter())
        {
            let f = nl.f(*x, *t);
            let fx = nl.primitive_x(*x, *t);
            let local = (2.0 * s - n) / 2.0 * t * f
                + n * nl.primitive(*x, *t)
                + (x[0] - c[0]) * fx[0]
                + (x[1] - c[1]) * fx[1];
            if !local.is_finite() {
                return Err(SemilinearError::NonFinite {
                    node: *x,
                    u: *t,
                    value: local,
                });
            }
            value += w * local;
            abs_uf += w * (t * f).abs();
            sup_norm = sup_norm.max(t.abs());
        }
        Ok(FunctionalParts {
            value,
            abs_uf,
            sup_norm,
        })
    }
}

impl GalerkinSystem<'_> {
    /// Constrained descent for `scale·|t|^{p-1}t`: minimises
    /// `R(v) = Σλ^s v² / (∫|v|^{p+1})^{2/(p+1)}` on the unit sphere from the
    /// direction of `start`, then rescales the minimiser onto the solution set.
    /// Returns `None` when the quotient does not settle within `max_iter` steps.
    pub fn power_descent(
        &self,
        p: f64,
        scale: f64,
        start: &DVector<f64>,
        max_iter: usize,
    ) -> Option<DVector<f64>> {
        let q = 2.0 / (p + 1.0);
        let weights = DVector::from_column_slice(&self.table.weights);
        let parts = |v: &DVector<f64>| {
            let u = &self.table.values * v;
            let b: f64 = u
                .iter()
                .zip(weights.iter())
                .map(|(t, w)| w * t.abs().powf(p + 1.0))
                .sum();
            let a = self.powers.component_mul(v).dot(v);
            (a, b, u)
        };
        let quotient = |v: &DVector<f64>| {
            let (a, b, _) = parts(v);
            a / b.powf(q)
        };
        let mut v = if start.norm() > 0.0 {
            start.normalize()
        } else {
            DVector::from_fn(start.len(), |k, _| if k == 0 { 1.0 } else { 0.0 })
        };
        for _ in 0..max_iter {
            let (a, b, u) = parts(&v);
            if !(b > 0.0) {
                return None;
            }
            let pulled = u.zip_map(&weights, |t, w| w * t.abs().powf(p - 1.0) * t);
            let g = self.table.values.transpose() * pulled;
            let r = a / b.powf(q);
            let grad = (self.powers.component_mul(&v) - g * (a / b)) * (2.0 / b.powf(q));
            let mut d = -grad.component_div(&self.powers);
            d -= &v * d.dot(&v);
            let slope = grad.dot(&d);
            if -slope <= 1e-16 * r * r {
                let mu = (a / (scale * b)).powf(1.0 / (p - 1.0));
                return Some(v * mu);
            }
            let mut t = 1.0;
            loop {
                let trial = (&v + &d * t).normalize();
                if quotient(&trial) <= r + 1e-4 * t * slope {
                    v = trial;
                    break;
                }
                t *= 0.5;
                if t < 1e-12 {
                    let mu = (a / (scale * b)).powf(1.0 / (p - 1.0));
                    return Some(v * mu);
                }
            }
        }
        None
    }
}

/// `r_k = λ_k^s û_k - ⟨f(·, u), φ_k⟩`.
pub fn galerkin_residual(
    basis: &SpectralBasis,
    u: &SpectralFunction,
    s: FractionalOrder,
    nl: &dyn Nonlinearity,
) -> Result<DVector<f64>, SemilinearError> {
    check(basis, u)?;
    GalerkinSystem::new(basis, s).residual(nl, &u.as_vector())
}

pub fn pohozaev_functional(
    basis: &SpectralBasis,
    u: &SpectralFunction,
    s: FractionalOrder,
    nl: &dyn Nonlinearity,
) -> Result<f64, SemilinearError> {
    check(basis, u)?;
    Ok(GalerkinSystem::new(basis, s)
        .functional(nl, &u.as_vector())?
        .value)
}

fn check(basis: &SpectralBasis, u: &SpectralFunction) -> Result<(), SemilinearError> {
    SpectralFunction::new(basis, u.coeffs.clone())?;
    if u.basis != basis.fingerprint() {
        return Err(crate::sfl::SflError::BasisMismatch {
            expected: basis.fingerprint().into(),
            found: u.basis.clone(),
        }
        .into());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// No damped step reduced the residual.
    Stalled,
    SingularJacobian,
    EvaluationFailure(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: SpectralFunction,
    /// `‖r‖₂`, recomputed from the final iterate.
    pub residual_norm: f64,
    pub newton_iters: usize,
    pub converged: bool,
    pub status: SolveStatus,
    pub pohozaev_value: f64,
    pub abs_uf: f64,
    pub sup_norm: f64,
    pub classification: Option<Criticality>,
}

/// Damped Newton iteration on the Galerkin residual. Failures are reported
/// through [`SolveReport::status`].
pub fn newton_solve(
    system: &GalerkinSystem<'_>,
    guess: &SpectralFunction,
    nl: &dyn Nonlinearity,
    options: &NewtonOptions,
) -> Result<SolveReport, SemilinearError> {
    let basis = system.basis();
    check(basis, guess)?;
    let mut u = guess.as_vector();
    let mut status = SolveStatus::MaxIterations;
    let mut iters = 0;
    let mut r = match system.residual(nl, &u) {
        Ok(r) => r,
        Err(e) => {
            return finish(
                system,
                nl,
                u,
                0,
                SolveStatus::EvaluationFailure(e.to_string()),
            )
        }
    };
    let mut norm = r.norm();
    while iters < options.max_iter {
        if norm <= options.tol {
            status = SolveStatus::Converged;
            break;
        }
        iters += 1;
        let jac = match system.jacobian(nl, &u) {
            Ok(j) => j,
            Err(e) => {
                status = SolveStatus::EvaluationFailure(e.to_string());
                break;
            }
        };
        let Some(step) = jac
            .lu()
            .solve(&(-&r))
            .filter(|d| d.iter().all(|v| v.is_finite()))
        else {
            status = SolveStatus::SingularJacobian;
            break;
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let trial = &u + &step * alpha;
            if let Ok(rt) = system.residual(nl, &trial) {
                let nt = rt.norm();
                if nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, rt, nt)) = accepted else {
            status = SolveStatus::Stalled;
            break;
        };
        u = trial;
        r = rt;
        norm = nt;
    }
    if status == SolveStatus::MaxIterations && norm <= options.tol {
        status = SolveStatus::Converged;
    }
    finish(system, nl, u, iters, status)
}

fn finish(
    system: &GalerkinSystem<'_>,
    nl: &dyn Nonlinearity,
    u: DVector<f64>,
    iters: usize,
    mut status: SolveStatus,
) -> Result<SolveReport, SemilinearError> {
    let basis = system.basis();
    let solution = SpectralFunction::new(basis, u.iter().copied().collect())?;
    let residual_norm = system.residual(nl, &u).map_or(f64::INFINITY, |r| r.norm());
    let parts = match system.functional(nl, &u) {
        Ok(p) => p,
        Err(e) => {
            status = SolveStatus::EvaluationFailure(e.to_string());
            FunctionalParts {
                value: f64::NAN,
                abs_uf: f64::NAN,
                sup_norm: f64::NAN,
            }
        }
    };
    let classification = match nl.kind() {
        NonlinearityKind::Power { p, .. } => criticality(basis.dimension(), system.order(), p).ok(),
        _ => None,
    };
    Ok(SolveReport {
        solution,
        residual_norm,
        newton_iters: iters,
        converged: status == SolveStatus::Converged,
        status,
        pohozaev_value: parts.value,
        abs_uf: parts.abs_uf,
        sup_norm: parts.sup_norm,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::eigenbasis::{interval_basis, rectangle_basis};
    use crate::semilinear::{power_coefficient, Polynomial, PowerLaw, SpatialSource};
    use crate::sfl::{solve_linear, SpectralFunction};

    fn half() -> FractionalOrder {
        FractionalOrder::new(0.5).unwrap()
    }

    #[test]
    fn trivial_and_linear_residuals_vanish() {
        let basis = rectangle_basis(0.0, PI, 0.0, PI, 8).unwrap();
        let zero = SpectralFunction::zero(&basis);
        assert_eq!(
            galerkin_residual(&basis, &zero, half(), &PowerLaw::new(3.0))
                .unwrap()
                .amax(),
            0.0
        );

        let lam1s = basis.eigenvalues()[0].powf(0.5);
        let linear = Polynomial::new(vec![0.0, lam1s]);
        for c in [0.3, 1.0, -4.0] {
            let mut u = SpectralFunction::unit(&basis, 1);
            u.coeffs[0] = c;
            assert!(
                galerkin_residual(&basis, &u, half(), &linear)
                    .unwrap()
                    .amax()
                    < 1e-13
            );
        }
    }

    #[test]
    fn linear_source_closes_exactly() {
        let basis = interval_basis(0.0, PI, 8).unwrap();
        let amp = (2.0 / PI).sqrt();
        let source =
            SpatialSource::new(move |p| amp * p[0].sin(), move |p| [amp * p[0].cos(), 0.0]);
        let u = solve_linear(&basis, &SpectralFunction::unit(&basis, 1), half()).unwrap();
        assert!(
            galerkin_residual(&basis, &u, half(), &source)
                .unwrap()
                .amax()
                < 1e-12
        );
    }

    #[test]
    fn newton_from_zero_stays_at_zero() {
        let basis = interval_basis(0.0, PI, 8).unwrap();
        let system = GalerkinSystem::new(&basis, half());
        let report = newton_solve(
            &system,
            &SpectralFunction::zero(&basis),
            &PowerLaw::new(3.0),
            &NewtonOptions::default(),
        )
        .unwrap();
        assert!(report.converged);
        assert_eq!(report.newton_iters, 0);
        assert_eq!(report.pohozaev_value, 0.0);
    }

    #[test]
    fn subcritical_interval_solution() {
        let basis = interval_basis(0.0, PI, 16).unwrap();
        let system = GalerkinSystem::new(&basis, half());
        let nl = PowerLaw::new(2.0);
        let mut guess = SpectralFunction::unit(&basis, 1);
        guess.coeffs[0] = 2.0;
        let report = newton_solve(&system, &guess, &nl, &NewtonOptions::default()).unwrap();
        assert!(report.converged, "{:?}", report.status);
        assert!(report.residual_norm <= 1e-8);
        assert!(report.sup_norm > 0.1);
        assert_eq!(report.classification, Some(Criticality::Subcritical));
        let integral = report.abs_uf;
        let closed = power_coefficient(1, 0.5, 2.0) * integral;
        assert!((report.pohozaev_value - closed).abs() < 1e-10 * (1.0 + closed.abs()));
    }
}
