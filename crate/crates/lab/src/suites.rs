//! Verification suites. Each suite reads the shared per-domain context and
//! produces a [`SuiteResult`]; nothing here holds a tolerance of its own.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::json;
use sfl_core::eigenbasis::{
    radial_moment_matrix, star_shape_margin, DomainKind, RadialMoments, SpectralBasis,
};
use sfl_core::pohozaev::{
    bochner_transform_check, psd_certify, q1_matrix, qs_direct, transition_factorization_check,
    PohozaevMatrices, PohozaevQ1,
};
use sfl_core::semilinear::{
    criticality, galerkin_residual, newton_solve, nonexistence_probe, power_coefficient,
    GalerkinSystem, NewtonOptions, PowerLaw, ProbeOptions, ProbeOutcome, ProbeVerdict,
};
use sfl_core::sfl::{eigen_power, subordination_check, FractionalOrder, SpectralFunction};

use crate::config::{DomainConfig, ExperimentConfig, NewtonConfig, Suite};
use crate::report::{Check, DomainSummary, SuiteResult};

/// Everything the suites share for one configured domain.
pub struct DomainContext {
    pub config: DomainConfig,
    pub basis: SpectralBasis,
    pub star_margin: f64,
    pub q1: PohozaevQ1,
    pub moments: RadialMoments,
    /// One entry per configured `s`, in order.
    pub matrices: Vec<PohozaevMatrices>,
}

impl DomainContext {
    pub fn build(
        config: &DomainConfig,
        orders: &[FractionalOrder],
        base_dir: &Path,
    ) -> anyhow::Result<Self> {
        let domain = config.build(base_dir)?;
        let basis = SpectralBasis::new(&domain, config.truncation())?;
        // The cross-check is reported and judged by the identity suite.
        let q1 = q1_matrix(&basis, f64::INFINITY)?;
        let moments = radial_moment_matrix(&basis)?;
        let matrices = orders
            .iter()
            .map(|&s| PohozaevMatrices::from_q1(&basis, q1.clone(), s))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            config: config.clone(),
            star_margin: star_shape_margin(&domain),
            basis,
            q1,
            moments,
            matrices,
        })
    }

    pub fn name(&self) -> &str {
        &self.config.name
    }

    pub fn summary(&self) -> DomainSummary {
        let lam = self.basis.eigenvalues();
        DomainSummary {
            name: self.config.name.clone(),
            description: self.basis.domain().describe(),
            n: self.basis.len(),
            fingerprint: self.basis.fingerprint().to_owned(),
            star_margin: self.star_margin,
            smallest_eigenvalue: lam[0],
            largest_eigenvalue: lam[lam.len() - 1],
        }
    }
}

pub type Contexts = Vec<Result<Arc<DomainContext>, String>>;

/// Independent random stream per (suite, domain, s) so results do not depend
/// on scheduling or on which other suites are selected.
fn stream(seed: u64, suite: Suite, domain: usize, s: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = Suite::ALL.iter().position(|x| *x == suite).unwrap_or(0) as u64;
    rng.set_stream((tag << 48) | ((domain as u64) << 24) | s as u64);
    rng
}

/// Coefficients `z_k / k²` with standard normal `z_k`.
fn decaying_coefficients(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let z: f64 = StandardNormal.sample(rng);
            z / (k * k) as f64
        })
        .collect()
}

fn order_label(s: FractionalOrder) -> String {
    format!("s={}", s.value())
}

fn newton_options(c: &NewtonConfig) -> NewtonOptions {
    NewtonOptions {
        tol: c.tol,
        max_iter: c.max_iter,
        max_halvings: c.max_halvings,
    }
}

/// Runs the domain-wise body for every successfully built context, recording
/// construction failures.
fn per_domain<F>(suite: Suite, contexts: &Contexts, body: F) -> SuiteResult
where
    F: Fn(usize, &DomainContext) -> SuiteResult + Sync,
{
    let parts: Vec<SuiteResult> = contexts
        .par_iter()
        .enumerate()
        .map(|(i, ctx)| match ctx {
            Ok(ctx) => body(i, ctx),
            Err(e) => {
                let mut r = SuiteResult::new(suite);
                r.error(e.clone());
                r
            }
        })
        .collect();
    let mut out = SuiteResult::new(suite);
    let mut details = Vec::new();
    for mut part in parts {
        out.checks.append(&mut part.checks);
        out.failures.append(&mut part.failures);
        out.notes.append(&mut part.notes);
        out.certificates.append(&mut part.certificates);
        if !part.details.is_null() {
            details.push(part.details);
        }
    }
    out.details = json!(details);
    out.finish()
}

pub fn run_suite(
    suite: Suite,
    config: &ExperimentConfig,
    seed: u64,
    contexts: &Contexts,
    base_dir: &Path,
) -> SuiteResult {
    match suite {
        Suite::Identity => identity(config, seed, contexts),
        Suite::Psd => psd(config, contexts),
        Suite::Bochner => bochner(config, contexts),
        Suite::Degenerate => degenerate(config, seed, contexts),
        Suite::Subordination => subordination(config, contexts),
        Suite::Semilinear => semilinear(config, base_dir),
        Suite::Probe => probe(config, seed, base_dir),
    }
}

/// Interval `Q⁽¹⁾_jk = (π²/L³) jk [(b−c)(−1)^{j+k} − (a−c)]`.
fn interval_q1_closed_form(a: f64, b: f64, c: f64, n: usize) -> DMatrix<f64> {
    let l = b - a;
    let scale = std::f64::consts::PI.powi(2) / l.powi(3);
    DMatrix::from_fn(n, n, |j, k| {
        let (j1, k1) = ((j + 1) as f64, (k + 1) as f64);
        let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
        scale * j1 * k1 * ((b - c) * sign - (a - c))
    })
}

fn identity(config: &ExperimentConfig, seed: u64, contexts: &Contexts) -> SuiteResult {
    let tol = &config.tolerances;
    let orders = config.orders();
    per_domain(Suite::Identity, contexts, |d, ctx| {
        let mut r = SuiteResult::new(Suite::Identity);
        let name = ctx.name();
        let basis = &ctx.basis;
        let n = basis.len();
        let lam = basis.eigenvalues();

        r.push(Check::at_most(
            format!("{name}/moment diagonal"),
            ctx.moments.diagonal_deviation,
            tol.moments,
        ));
        r.push(Check::at_most(
            format!("{name}/moment antisymmetry"),
            ctx.moments.antisymmetry_defect,
            tol.moments,
        ));
        r.push(Check::at_most(
            format!("{name}/Q1 cross-check"),
            ctx.q1.cross_check,
            tol.cross_check,
        ));
        let diag = (0..n)
            .map(|k| (ctx.q1.entries[(k, k)] - lam[k]).abs() / lam[k])
            .fold(0.0, f64::max);
        r.push(Check::at_most(
            format!("{name}/Q1 diagonal"),
            diag,
            tol.q1_diagonal,
        ));
        if let DomainKind::Interval { a, b } = basis.domain().kind {
            let exact = interval_q1_closed_form(a, b, basis.domain().star_center[0], n);
            r.push(Check::at_most(
                format!("{name}/Q1 closed form"),
                (&ctx.q1.entries - exact).amax(),
                tol.closed_form,
            ));
        }
        if let Some(t) = ctx.q1.trace_discrepancy {
            r.note(format!(
                "{name}: one-sided boundary traces deviate from the discrete operator form by {t:e} (relative, first order in h); Q1 uses the operator form"
            ));
        }

        let limit = if basis.is_grid() {
            tol.identity_grid
        } else {
            tol.identity
        };
        let mut rows = Vec::new();
        for (i, m) in ctx.matrices.iter().enumerate() {
            let mut rng = stream(seed, Suite::Identity, d, i);
            let worst = (0..config.identity.samples)
                .map(|_| {
                    let u = SpectralFunction::new(basis, decaying_coefficients(&mut rng, n))
                        .expect("sized to the basis");
                    m.identity_residual(basis, &u)
                })
                .fold(0.0, f64::max);
            let label = order_label(orders[i]);
            r.push(Check::at_most(
                format!("{name}/{label}/identity"),
                worst,
                limit,
            ));
            rows.push(json!({"s": orders[i].value(), "max_residual": worst}));
        }

        if config.classical_limit {
            let classical = FractionalOrder::classical();
            match PohozaevMatrices::from_q1(basis, ctx.q1.clone(), classical) {
                Ok(m) => {
                    r.push(Check::at_most(
                        format!("{name}/s=1/Qs equals Q1"),
                        (&m.qs - &ctx.q1.entries).amax(),
                        tol.classical,
                    ));
                    let worst = (1..=n)
                        .map(|k| {
                            let phi = SpectralFunction::unit(basis, k);
                            let v = qs_direct(basis, &ctx.moments, &phi, classical);
                            (v - lam[k - 1]).abs() / (1.0 + lam[k - 1])
                        })
                        .fold(0.0, f64::max);
                    r.push(Check::at_most(
                        format!("{name}/s=1/classical value"),
                        worst,
                        tol.classical,
                    ));
                }
                Err(e) => r.error(format!("{name}/s=1: {e}")),
            }
        }
        r.details = json!({
            "domain": name,
            "cross_check": ctx.q1.cross_check,
            "q1_route": ctx.q1.route,
            "trace_discrepancy": ctx.q1.trace_discrepancy,
            "moment_diagonal_deviation": ctx.moments.diagonal_deviation,
            "moment_antisymmetry_defect": ctx.moments.antisymmetry_defect,
            "q1_diagonal_relative": diag,
            "residuals": rows,
        });
        r
    })
}

fn psd(config: &ExperimentConfig, contexts: &Contexts) -> SuiteResult {
    let tol = config.tolerances.psd;
    let orders = config.orders();
    per_domain(Suite::Psd, contexts, |_, ctx| {
        let mut r = SuiteResult::new(Suite::Psd);
        let name = ctx.name();
        let star = ctx.star_margin >= 0.0;
        if !star {
            r.note(format!(
                "{name}: star-shape margin {:e} < 0; Q^(s) positivity is reported, not required",
                ctx.star_margin
            ));
        }
        let available = ctx.basis.len();
        let mut rows = Vec::new();
        for &n in &config.psd.truncations {
            if n > available {
                r.note(format!(
                    "{name}: truncation {n} skipped (basis has {available} functions)"
                ));
                continue;
            }
            let lead = |m: &DMatrix<f64>| m.view((0, 0), (n, n)).into_owned();
            let certify = |label: String, m: &DMatrix<f64>| psd_certify(&label, &lead(m), tol);
            let q1 = match certify(format!("{name}/n={n}/Q1"), &ctx.q1.entries) {
                Ok(c) => c,
                Err(e) => {
                    r.error(format!("{name}/n={n}/Q1: {e}"));
                    continue;
                }
            };
            for (i, m) in ctx.matrices.iter().enumerate() {
                let prefix = format!("{name}/n={n}/{}", order_label(orders[i]));
                let (p, qs) = match (
                    certify(format!("{prefix}/P"), &m.transition.entries),
                    certify(format!("{prefix}/Qs"), &m.qs),
                ) {
                    (Ok(p), Ok(qs)) => (p, qs),
                    (Err(e), _) | (_, Err(e)) => {
                        r.error(format!("{prefix}: {e}"));
                        continue;
                    }
                };
                r.push(Check::at_most(
                    format!("{prefix}/P psd"),
                    -p.relative_margin(),
                    tol,
                ));
                if star {
                    r.push(Check::at_most(
                        format!("{prefix}/Qs psd"),
                        -qs.relative_margin(),
                        tol,
                    ));
                }
                r.push(Check::holds(
                    format!("{prefix}/transfer"),
                    !q1.is_psd() || qs.is_psd(),
                ));
                rows.push(json!({
                    "n": n,
                    "s": orders[i].value(),
                    "q1_margin": q1.relative_margin(),
                    "p_margin": p.relative_margin(),
                    "qs_margin": qs.relative_margin(),
                }));
                r.certificates.push(p);
                r.certificates.push(qs);
            }
            r.certificates.push(q1);
        }
        r.details = json!({"domain": name, "star_margin": ctx.star_margin, "margins": rows});
        r
    })
}

fn bochner(config: &ExperimentConfig, contexts: &Contexts) -> SuiteResult {
    let tol = &config.tolerances;
    let b = &config.bochner;
    let count = b.xi_count.max(1);
    let xis: Vec<f64> = (0..count)
        .map(|i| {
            if count == 1 {
                0.0
            } else {
                b.xi_max * i as f64 / (count - 1) as f64
            }
        })
        .collect();
    let mut r = SuiteResult::new(Suite::Bochner);
    let mut transforms = Vec::new();
    for &s in &b.s_values {
        let order = FractionalOrder::new(s).expect("validated");
        match bochner_transform_check(order, &xis, tol.bochner) {
            Ok(c) => {
                r.push(Check::at_most(
                    format!("s={s}/transform"),
                    c.max_error,
                    tol.bochner,
                ));
                r.push(Check::holds(
                    format!("s={s}/transform positive"),
                    c.min_closed_form > 0.0,
                ));
                transforms.push(c);
            }
            Err(e) => r.error(format!("s={s}/transform: {e}")),
        }
    }
    let half = FractionalOrder::new(0.5).expect("in range");
    match bochner_transform_check(half, &[0.0], tol.bochner) {
        Ok(c) => r.push(Check::at_most(
            "s=0.5/xi=0 equals pi",
            (c.samples[0].quadrature - std::f64::consts::PI).abs(),
            tol.bochner_spot,
        )),
        Err(e) => r.error(format!("spot value: {e}")),
    }
    let orders = config.orders();
    let mut factorization = Vec::new();
    for ctx in contexts.iter().flatten() {
        for (i, m) in ctx.matrices.iter().enumerate() {
            let err = transition_factorization_check(&m.transition);
            let label = order_label(orders[i]);
            r.push(Check::at_most(
                format!("{}/{label}/P factorization", ctx.name()),
                err,
                tol.factorization,
            ));
            factorization
                .push(json!({"domain": ctx.name(), "s": orders[i].value(), "max_error": err}));
        }
    }
    r.details = json!({"transforms": transforms, "factorization": factorization});
    r.finish()
}

/// Block-diagonal orthogonal matrix, Haar-distributed inside each eigenvalue group.
fn random_group_rotation(basis: &SpectralBasis, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = basis.len();
    let mut q = DMatrix::<f64>::identity(n, n);
    for group in basis.groups().into_iter().filter(|g| g.len() > 1) {
        let m = group.len();
        let g = DMatrix::from_fn(m, m, |_, _| StandardNormal.sample(rng));
        let qr = g.qr();
        let (mut block, r) = (qr.q(), qr.r());
        for c in 0..m {
            if r[(c, c)] < 0.0 {
                block.column_mut(c).neg_mut();
            }
        }
        for (a, &i) in group.iter().enumerate() {
            for (b, &j) in group.iter().enumerate() {
                q[(i, j)] = block[(a, b)];
            }
        }
    }
    q
}

fn degenerate(config: &ExperimentConfig, seed: u64, contexts: &Contexts) -> SuiteResult {
    let tol = &config.tolerances;
    let orders = config.orders();
    per_domain(Suite::Degenerate, contexts, |d, ctx| {
        let mut r = SuiteResult::new(Suite::Degenerate);
        let name = ctx.name();
        let basis = &ctx.basis;
        let groups: Vec<Vec<usize>> = basis.groups().into_iter().filter(|g| g.len() > 1).collect();
        if groups.is_empty() {
            r.note(format!("{name}: no repeated eigenvalues in the truncation"));
            return r;
        }
        let cross = |m: &DMatrix<f64>| {
            groups
                .iter()
                .flat_map(|g| g.iter().flat_map(move |&j| g.iter().map(move |&k| (j, k))))
                .filter(|(j, k)| j != k)
                .map(|(j, k)| m[(j, k)].abs())
                .fold(0.0, f64::max)
        };
        r.push(Check::at_most(
            format!("{name}/Q1 group cross entries"),
            cross(&ctx.q1.entries),
            tol.degenerate,
        ));
        for (i, m) in ctx.matrices.iter().enumerate() {
            r.push(Check::at_most(
                format!("{name}/{}/Qs group cross entries", order_label(orders[i])),
                cross(&m.qs),
                tol.degenerate,
            ));
        }

        let n = basis.len();
        let mut rng = stream(seed, Suite::Degenerate, d, 0);
        let mut worst_rotation: f64 = 0.0;
        let mut worst_cross: f64 = 0.0;
        let mut worst_gram: f64 = 0.0;
        for t in 0..config.degenerate.rotations {
            let q = random_group_rotation(basis, &mut rng);
            let rotated = match basis.transformed(&q) {
                Ok(b) => b,
                Err(e) => {
                    r.error(format!("{name}/rotation {t}: {e}"));
                    continue;
                }
            };
            worst_gram =
                worst_gram.max((rotated.volume().gram() - DMatrix::<f64>::identity(n, n)).amax());
            let coeffs = decaying_coefficients(&mut rng, n);
            let u = SpectralFunction::new(basis, coeffs).expect("sized to the basis");
            let u_rot = SpectralFunction::new(&rotated, (&q * u.as_vector()).as_slice().to_vec())
                .expect("sized to the basis");
            let q1_rot = match q1_matrix(&rotated, f64::INFINITY) {
                Ok(q1) => q1,
                Err(e) => {
                    r.error(format!("{name}/rotation {t}: {e}"));
                    continue;
                }
            };
            worst_cross = worst_cross.max(cross(&q1_rot.entries));
            for (i, m) in ctx.matrices.iter().enumerate() {
                match PohozaevMatrices::from_q1(&rotated, q1_rot.clone(), orders[i]) {
                    Ok(m_rot) => {
                        let before = m.qs_form(&u);
                        let after = m_rot.qs_form(&u_rot);
                        worst_rotation =
                            worst_rotation.max((before - after).abs() / (1.0 + before.abs()));
                        worst_cross = worst_cross.max(cross(&m_rot.qs));
                    }
                    Err(e) => r.error(format!("{name}/rotation {t}: {e}")),
                }
            }
        }
        if config.degenerate.rotations > 0 {
            r.push(Check::at_most(
                format!("{name}/rotation invariance"),
                worst_rotation,
                tol.rotation,
            ));
            r.push(Check::at_most(
                format!("{name}/rotated cross entries"),
                worst_cross,
                tol.degenerate,
            ));
            r.push(Check::at_most(
                format!("{name}/rotated orthonormality"),
                worst_gram,
                tol.degenerate,
            ));
        }
        r.details = json!({
            "domain": name,
            "groups": groups.iter().map(|g| g.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "rotation_invariance": worst_rotation,
            "rotated_cross_entries": worst_cross,
        });
        r
    })
}

fn subordination(config: &ExperimentConfig, contexts: &Contexts) -> SuiteResult {
    let tol = config.tolerances.subordination;
    let sub = &config.subordination;
    per_domain(Suite::Subordination, contexts, |_, ctx| {
        let mut r = SuiteResult::new(Suite::Subordination);
        let name = ctx.name();
        let lam = ctx.basis.eigenvalues();
        let modes = sub.modes.min(lam.len());
        let mut rows = Vec::new();
        for &s in &sub.s_values {
            let order = FractionalOrder::new(s).expect("validated");
            let mut worst: f64 = 0.0;
            for (k, &l) in lam.iter().take(modes).enumerate() {
                match subordination_check(l, order, &sub.controls) {
                    Ok(res) => {
                        let exact = eigen_power(l, s);
                        let err = (res.value - exact).abs();
                        worst = worst.max(err);
                        rows.push(json!({
                            "k": k + 1, "lambda": l, "s": s, "value": res.value,
                            "exact": exact, "error": err, "error_estimate": res.error_estimate,
                        }));
                    }
                    Err(e) => {
                        worst = f64::INFINITY;
                        r.error(format!("{name}/s={s}/k={}: {e}", k + 1));
                    }
                }
            }
            r.push(Check::at_most(
                format!("{name}/s={s}/subordination"),
                worst,
                tol,
            ));
        }
        r.details = json!({"domain": name, "values": rows});
        r
    })
}

fn solver_basis(
    config: &ExperimentConfig,
    domain: &str,
    n: usize,
    base_dir: &Path,
) -> anyhow::Result<SpectralBasis> {
    let dc = config
        .domain(domain)
        .ok_or_else(|| anyhow::anyhow!("unknown domain `{domain}`"))?;
    Ok(SpectralBasis::new(&dc.build(base_dir)?, n)?)
}

fn semilinear(config: &ExperimentConfig, base_dir: &Path) -> SuiteResult {
    let mut r = SuiteResult::new(Suite::Semilinear);
    let c = &config.semilinear;
    let tol = &config.tolerances;
    let basis = match solver_basis(config, &c.domain, c.n, base_dir) {
        Ok(b) => b,
        Err(e) => {
            r.error(format!("{}: {e}", c.domain));
            return r.finish();
        }
    };
    let s = FractionalOrder::new(c.s).expect("validated");
    let nl = PowerLaw::new(c.p);
    let prefix = format!("{}/s={}/p={}", c.domain, c.s, c.p);
    let class = match criticality(basis.dimension(), s, c.p) {
        Ok(class) => class,
        Err(e) => {
            r.error(format!("{prefix}: {e}"));
            return r.finish();
        }
    };
    r.note(format!("{prefix}: exponent is {class:?}"));
    let mut guess = SpectralFunction::zero(&basis);
    guess.coeffs[0] = c.amplitude;
    let system = GalerkinSystem::new(&basis, s);
    let report = match newton_solve(&system, &guess, &nl, &newton_options(&c.newton)) {
        Ok(rep) => rep,
        Err(e) => {
            r.error(format!("{prefix}: {e}"));
            return r.finish();
        }
    };
    r.push(Check::holds(
        format!("{prefix}/converged"),
        report.converged,
    ));
    let residual = galerkin_residual(&basis, &report.solution, s, &nl)
        .map(|v| v.norm())
        .unwrap_or(f64::INFINITY);
    r.push(Check::at_most(
        format!("{prefix}/residual"),
        residual,
        tol.semilinear_residual,
    ));
    let norm = report.solution.norm_squared().sqrt();
    r.push(Check::holds(
        format!("{prefix}/nontrivial"),
        norm > config.probe.trivial_tol,
    ));
    r.push(Check::at_most(
        format!("{prefix}/pohozaev inequality"),
        -report.pohozaev_value / (1.0 + report.abs_uf),
        tol.pohozaev,
    ));
    // Power law: the functional is `(2s−N)/2 + N/(p+1)` times `∫|u|^{p+1}`,
    // integrated here on the basis' own refined volume rule.
    let table = basis.volume_table(2);
    let u = table.synthesize(&report.solution.coeffs);
    let samples: Vec<f64> = u.iter().map(|v| v.abs().powf(c.p + 1.0)).collect();
    let lp = table.integrate(&samples);
    let coeff = power_coefficient(basis.dimension(), c.s, c.p);
    r.push(Check::at_most(
        format!("{prefix}/power reduction"),
        (report.pohozaev_value - coeff * lp).abs() / lp.max(f64::MIN_POSITIVE),
        tol.power_identity,
    ));
    r.details = json!({
        "domain": c.domain, "n": basis.len(), "fingerprint": basis.fingerprint(),
        "s": c.s, "p": c.p, "criticality": class, "power_coefficient": coeff,
        "integral_u_p_plus_1": lp, "recomputed_residual": residual,
        "coefficient_norm": norm, "report": report,
    });
    r.finish()
}

fn probe(config: &ExperimentConfig, seed: u64, base_dir: &Path) -> SuiteResult {
    let mut r = SuiteResult::new(Suite::Probe);
    let c = &config.probe;
    let basis = match solver_basis(config, &c.domain, c.n, base_dir) {
        Ok(b) => b,
        Err(e) => {
            r.error(format!("{}: {e}", c.domain));
            return r.finish();
        }
    };
    let s = FractionalOrder::new(c.s).expect("validated");
    let options = ProbeOptions {
        amplitudes: c.amplitudes.clone(),
        random_guesses: c.random_guesses,
        seed,
        newton: newton_options(&c.newton),
        trivial_tol: c.trivial_tol,
        pohozaev_tol: config.tolerances.pohozaev,
        descent_max_iter: c.descent_max_iter,
        sign_samples_x: c.sign_samples_x,
        sign_samples_t: c.sign_samples_t,
        sign_t_max: c.sign_t_max,
    };
    let prefix = format!("{}/s={}/p={}", c.domain, c.s, c.p);
    let report = match nonexistence_probe(&basis, s, &PowerLaw::new(c.p), &options) {
        Ok(rep) => rep,
        Err(e) => {
            r.error(format!("{prefix}: {e}"));
            return r.finish();
        }
    };
    match &report.verdict {
        ProbeVerdict::OutOfScope => {
            r.note(format!(
                "{prefix}: critical exponent, functional reported without a verdict"
            ));
        }
        verdict => {
            r.push(Check::holds(
                format!("{prefix}/verdict clean"),
                *verdict == ProbeVerdict::Clean,
            ));
            if let ProbeVerdict::Refused(reason) = verdict {
                r.note(format!("{prefix}: refused: {reason}"));
            }
        }
    }
    for run in &report.runs {
        let id = format!("{prefix}/{}", run.guess_id);
        r.note(format!(
            "{id}: {:?} via {:?}, residual {:e}, functional {:e}, sup norm {:e}",
            run.outcome, run.initializer, run.residual, run.pohozaev_value, run.sup_norm
        ));
        if run.outcome == ProbeOutcome::Contradiction {
            r.error(format!("{id}: contradiction finding"));
        }
    }
    r.details = json!({
        "domain": c.domain, "n": basis.len(), "fingerprint": basis.fingerprint(),
        "s": c.s, "p": c.p, "report": report,
    });
    r.finish()
}
