use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use super::transition::TransitionP;
use super::PohozaevError;
use crate::quadrature::{composite_with, GaussLegendre};
use crate::sfl::FractionalOrder;

/// `H_s(t) = sinh(st)/sinh(t)`, `H_s(0) = s`.
pub fn bochner_kernel(t: f64, s: FractionalOrder) -> f64 {
    let s = s.value();
    let a = t.abs();
    if a < 1e-6 {
        return s * (1.0 + (s * s - 1.0) * a * a / 6.0);
    }
    // e^{(s-1)a} (1 - e^{-2sa}) / (1 - e^{-2a}) avoids overflow for large |t|.
    ((s - 1.0) * a).exp() * (-2.0 * s * a).exp_m1() / (-2.0 * a).exp_m1()
}

/// `π sin(sπ) / (cos(sπ) + cosh(2π²ξ))`, the inverse Fourier transform of `H_s`.
pub fn bochner_closed_form(xi: f64, s: FractionalOrder) -> f64 {
    let s = s.value();
    PI * (s * PI).sin() / ((s * PI).cos() + (2.0 * PI * PI * xi).cosh())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BochnerSample {
    pub xi: f64,
    pub quadrature: f64,
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BochnerCheck {
    pub s: f64,
    /// Integration range `|t| ≤ cutoff`.
    pub cutoff: f64,
    /// Bound on the neglected tails.
    pub truncation_estimate: f64,
    pub max_error: f64,
    pub min_closed_form: f64,
    pub samples: Vec<BochnerSample>,
}

/// Computes `∫ cos(2πξt) H_s(t) dt` on `|t| ≤ T`, `e^{-(1-s)T} = 1e-14`, by
/// composite 20-point Gauss panels and compares with the closed form.
pub fn bochner_transform_check(
    s: FractionalOrder,
    xis: &[f64],
    tolerance: f64,
) -> Result<BochnerCheck, PohozaevError> {
    if s.is_classical() {
        return Err(PohozaevError::ClassicalBochner);
    }
    let decay = 1.0 - s.value();
    let cutoff = 14.0 * LN_10 / decay;
    // H_s(t) ≤ e^{-(1-s)t} / (1 - e^{-2T}) beyond T; both tails together.
    let truncation_estimate =
        2.0 * (-decay * cutoff).exp() / (decay * (1.0 - (-2.0 * cutoff).exp()));
    if truncation_estimate > tolerance {
        return Err(PohozaevError::Truncation {
            estimate: truncation_estimate,
            tolerance,
        });
    }
    let xi_max = xis.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let per_unit = (2.0 * xi_max).ceil().max(1.0) as usize;
    let panels = cutoff.ceil() as usize * per_unit;
    let rule = GaussLegendre::new(20);
    let (ts, ws) = composite_with(&rule, 0.0, panels as f64 / per_unit as f64, panels);
    let kernel: Vec<f64> = ts.iter().map(|t| bochner_kernel(*t, s)).collect();
    let samples: Vec<BochnerSample> = xis
        .iter()
        .map(|&xi| {
            let quadrature = 2.0
                * ts.iter()
                    .zip(&ws)
                    .zip(&kernel)
                    .map(|((t, w), h)| w * h * (2.0 * PI * xi * t).cos())
                    .sum::<f64>();
            BochnerSample {
                xi,
                quadrature,
                closed_form: bochner_closed_form(xi, s),
            }
        })
        .collect();
    let max_error = samples
        .iter()
        .map(|p| (p.quadrature - p.closed_form).abs())
        .fold(0.0, f64::max);
    let min_closed_form = samples
        .iter()
        .map(|p| p.closed_form)
        .fold(f64::INFINITY, f64::min);
    Ok(BochnerCheck {
        s: s.value(),
        cutoff,
        truncation_estimate,
        max_error,
        min_closed_form,
        samples,
    })
}

/// `max_jk |P_jk - e^{(s-1)(μ_j+μ_k)} H_s(μ_j-μ_k)|`.
pub fn transition_factorization_check(p: &TransitionP) -> f64 {
    let s = p.s;
    let mu = &p.log_eigen;
    let mut worst: f64 = 0.0;
    for j in 0..mu.len() {
        for k in 0..mu.len() {
            let kernel = if s.is_classical() {
                1.0
            } else {
                bochner_kernel(mu[j] - mu[k], s)
            };
            let factored = ((s.value() - 1.0) * (mu[j] + mu[k])).exp() * kernel;
            worst = worst.max((p.entries[(j, k)] - factored).abs());
        }
    }
    worst
}
