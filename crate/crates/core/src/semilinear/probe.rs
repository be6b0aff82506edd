use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::criticality::{criticality, Criticality};
use super::newton::{newton_solve, GalerkinSystem, NewtonOptions};
use super::nonlinearity::{Nonlinearity, NonlinearityKind};
use super::SemilinearError;
use crate::eigenbasis::{star_shape_margin, SpectralBasis};
use crate::sfl::{FractionalOrder, SpectralFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeOptions {
    /// Guesses `a·φ_1` for each amplitude `a`.
    pub amplitudes: Vec<f64>,
    /// Additional guesses with coefficients `z_k / k²`, `z_k` standard normal.
    pub random_guesses: usize,
    pub seed: u64,
    pub newton: NewtonOptions,
    /// Converged runs with `‖û‖₂` below this are the trivial solution.
    pub trivial_tol: f64,
    /// Nontrivial runs are flagged when the functional is below `-tol·(1 + ∫|uf|)`.
    pub pohozaev_tol: f64,
    /// Step budget of the constrained-descent fallback for power laws.
    pub descent_max_iter: usize,
    /// Sample counts per axis in `x` and in `t` for the sign condition.
    pub sign_samples_x: usize,
    pub sign_samples_t: usize,
    /// Sampled `t` range is `[-t_max, t_max]`.
    pub sign_t_max: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            amplitudes: vec![0.1, 1.0, 10.0],
            random_guesses: 5,
            seed: 0,
            newton: NewtonOptions::default(),
            trivial_tol: 1e-6,
            pohozaev_tol: 1e-6,
            descent_max_iter: 2000,
            sign_samples_x: 9,
            sign_samples_t: 41,
            sign_t_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    Trivial,
    /// Nontrivial Galerkin solution violating the Pohozaev inequality: a truncation artifact.
    FlaggedSpurious,
    NotConverged,
    /// Nontrivial solution that satisfies the inequality.
    Contradiction,
}

/// Where the Newton run that produced the outcome started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initializer {
    Guess,
    /// Newton from the guess failed; it was restarted from the constrained-descent minimiser.
    Descent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRun {
    pub guess_id: String,
    pub outcome: ProbeOutcome,
    pub initializer: Initializer,
    pub residual: f64,
    pub newton_iters: usize,
    pub pohozaev_value: f64,
    pub abs_uf: f64,
    pub sup_norm: f64,
    pub coefficient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum ProbeVerdict {
    /// Every run ended trivial or flagged.
    Clean,
    /// No contradiction, but some runs did not converge.
    Inconclusive,
    Contradiction,
    /// The hypotheses do not hold; no runs were made.
    Refused(String),
    /// Critical exponent: runs are reported without a verdict.
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    /// Largest sampled `((2s-N)/2) t f + N F + (x-c)·F_x` over `t ≠ 0`.
    pub max_value: f64,
    pub samples: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub verdict: ProbeVerdict,
    pub star_margin: f64,
    pub sign_condition: SignCheck,
    pub criticality: Option<Criticality>,
    pub runs: Vec<ProbeRun>,
    /// Indices into `runs`.
    pub contradictions: Vec<usize>,
}

/// Evaluates the strict pointwise condition on a sample grid of the
/// domain's bounding box (points outside the domain are skipped).
pub fn sign_condition(
    basis: &SpectralBasis,
    s: FractionalOrder,
    nl: &dyn Nonlinearity,
    options: &ProbeOptions,
) -> SignCheck {
    let domain = basis.domain();
    let vol = basis.volume();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &vol.nodes {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let nx = options.sign_samples_x.max(1);
    let ny = if basis.dimension() == 1 { 1 } else { nx };
    let nt = options.sign_samples_t.max(2);
    let n = basis.dimension() as f64;
    let c = domain.star_center;
    let s = s.value();
    let lerp = |a: f64, b: f64, i: usize, m: usize| {
        if m == 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * i as f64 / (m - 1) as f64
        }
    };
    let mut max_value = f64::NEG_INFINITY;
    let mut samples = 0;
    for i in 0..nx {
        for j in 0..ny {
            let x = [
                lerp(lo[0], hi[0], i, nx),
                if ny == 1 {
                    0.0
                } else {
                    lerp(lo[1], hi[1], j, ny)
                },
            ];
            if !domain.contains(x) {
                continue;
            }
            for k in 0..nt {
                let t = lerp(-options.sign_t_max, options.sign_t_max, k, nt);
                if t == 0.0 {
                    continue;
                }
                let fx = nl.primitive_x(x, t);
                let v = (2.0 * s - n) / 2.0 * t * nl.f(x, t)
                    + n * nl.primitive(x, t)
                    + (x[0] - c[0]) * fx[0]
                    + (x[1] - c[1]) * fx[1];
                max_value = max_value.max(v);
                samples += 1;
            }
        }
    }
    SignCheck {
        max_value,
        samples,
        holds: samples > 0 && max_value < 0.0,
    }
}

fn guesses(basis: &SpectralBasis, options: &ProbeOptions) -> Vec<(String, SpectralFunction)> {
    let mut out = Vec::new();
    for a in &options.amplitudes {
        let mut g = SpectralFunction::unit(basis, 1);
        g.coeffs[0] = *a;
        out.push((format!("phi1x{a}"), g));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for r in 0..options.random_guesses {
        let coeffs = (1..=basis.len())
            .map(|k| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z / (k * k) as f64
            })
            .collect();
        out.push((
            format!("random{r}"),
            SpectralFunction {
                basis: basis.fingerprint().to_owned(),
                coeffs,
            },
        ));
    }
    out
}

/// Runs Newton from each guess and classifies the outcomes.
pub fn nonexistence_probe(
    basis: &SpectralBasis,
    s: FractionalOrder,
    nl: &dyn Nonlinearity,
    options: &ProbeOptions,
) -> Result<ProbeReport, SemilinearError> {
    let star_margin = star_shape_margin(basis.domain());
    let sign = sign_condition(basis, s, nl, options);
    let crit = match nl.kind() {
        NonlinearityKind::Power { p, .. } => Some(criticality(basis.dimension(), s, p)?),
        _ => None,
    };
    let refuse = |reason: String| ProbeReport {
        verdict: ProbeVerdict::Refused(reason),
        star_margin,
        sign_condition: sign.clone(),
        criticality: crit,
        runs: Vec::new(),
        contradictions: Vec::new(),
    };
    if star_margin < 0.0 {
        return Ok(refuse(format!(
            "domain is not star-shaped about its centre (margin {star_margin:e})"
        )));
    }
    let critical = crit == Some(Criticality::Critical);
    if !critical && !sign.holds {
        return Ok(refuse(format!(
            "sign condition fails: sampled maximum {:e} is not negative",
            sign.max_value
        )));
    }

    let system = GalerkinSystem::new(basis, s);
    let runs: Vec<ProbeRun> = guesses(basis, options)
        .par_iter()
        .map(|(id, guess)| {
            let mut report = newton_solve(&system, guess, nl, &options.newton)?;
            let mut initializer = Initializer::Guess;
            if !report.converged {
                if let NonlinearityKind::Power { p, scale } = nl.kind() {
                    if let Some(start) =
                        system.power_descent(p, scale, &guess.as_vector(), options.descent_max_iter)
                    {
                        let restart = SpectralFunction {
                            basis: guess.basis.clone(),
                            coeffs: start.iter().copied().collect(),
                        };
                        report = newton_solve(&system, &restart, nl, &options.newton)?;
                        initializer = Initializer::Descent;
                    }
                }
            }
            let coefficient_norm = report.solution.norm_squared().sqrt();
            let outcome = if !report.converged {
                ProbeOutcome::NotConverged
            } else if coefficient_norm <= options.trivial_tol {
                ProbeOutcome::Trivial
            } else if report.pohozaev_value < -options.pohozaev_tol * (1.0 + report.abs_uf) {
                ProbeOutcome::FlaggedSpurious
            } else {
                ProbeOutcome::Contradiction
            };
            Ok(ProbeRun {
                guess_id: id.clone(),
                outcome,
                initializer,
                residual: report.residual_norm,
                newton_iters: report.newton_iters,
                pohozaev_value: report.pohozaev_value,
                abs_uf: report.abs_uf,
                sup_norm: report.sup_norm,
                coefficient_norm,
            })
        })
        .collect::<Result<_, SemilinearError>>()?;
    let contradictions: Vec<usize> = runs
        .iter()
        .enumerate()
        .filter(|(_, r)| r.outcome == ProbeOutcome::Contradiction)
        .map(|(i, _)| i)
        .collect();
    let verdict = if critical {
        ProbeVerdict::OutOfScope
    } else if !contradictions.is_empty() {
        ProbeVerdict::Contradiction
    } else if runs.iter().any(|r| r.outcome == ProbeOutcome::NotConverged) {
        ProbeVerdict::Inconclusive
    } else {
        ProbeVerdict::Clean
    };
    Ok(ProbeReport {
        verdict,
        star_margin,
        sign_condition: sign,
        criticality: crit,
        runs,
        contradictions,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::eigenbasis::{rectangle_basis, Domain};
    use crate::semilinear::{Polynomial, PowerLaw};

    fn half() -> FractionalOrder {
        FractionalOrder::new(0.5).unwrap()
    }

    #[test]
    fn refuses_when_the_sign_condition_fails() {
        let basis = rectangle_basis(0.0, PI, 0.0, PI, 4).unwrap();
        let opts = ProbeOptions::default();
        let report = nonexistence_probe(&basis, half(), &PowerLaw::new(2.0), &opts).unwrap();
        assert!(matches!(report.verdict, ProbeVerdict::Refused(_)));
        let report = nonexistence_probe(
            &basis,
            half(),
            &Polynomial::new(vec![0.0, 1.0, 0.0, 1.0]),
            &opts,
        )
        .unwrap();
        assert!(matches!(report.verdict, ProbeVerdict::Refused(_)));
        assert!(report.sign_condition.max_value > 0.0);
    }

    #[test]
    fn refuses_off_centre() {
        let domain = Domain::rectangle(0.0, 1.0, 0.0, 1.0)
            .unwrap()
            .with_star_center([2.0, 0.5]);
        let basis = SpectralBasis::new(&domain, 4).unwrap();
        let report = nonexistence_probe(
            &basis,
            half(),
            &PowerLaw::new(5.0),
            &ProbeOptions::default(),
        )
        .unwrap();
        assert!(matches!(report.verdict, ProbeVerdict::Refused(_)));
    }

    #[test]
    fn guesses_are_seeded() {
        let basis = rectangle_basis(0.0, PI, 0.0, PI, 6).unwrap();
        let a = guesses(&basis, &ProbeOptions::default());
        let b = guesses(&basis, &ProbeOptions::default());
        assert_eq!(a.len(), 8);
        assert_eq!(a, b);
        let c = guesses(
            &basis,
            &ProbeOptions {
                seed: 1,
                ..Default::default()
            },
        );
        assert_ne!(a[4].1, c[4].1);
    }
}
