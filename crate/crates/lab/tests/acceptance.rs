//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sfl_core::eigenbasis::{
    disk_basis, interval_basis, radial_moment_matrix, rectangle_basis, same_group, Domain,
    GridMask, SpectralBasis,
};
use sfl_core::pohozaev::{
    bochner_transform_check, psd_certify, q1_matrix, qs_direct, PohozaevMatrices,
};
use sfl_core::semilinear::{
    criticality, galerkin_residual, newton_solve, nonexistence_probe, power_coefficient,
    Criticality, GalerkinSystem, NewtonOptions, PowerLaw, ProbeOptions, ProbeOutcome, ProbeVerdict,
};
use sfl_core::sfl::{
    subordination_check, FractionalOrder, SpectralFunction, SubordinationControls,
};

const S_VALUES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const SEED: u64 = 20240611;
/// Quadrature tolerance of the closed-form volume rules.
const QUADRATURE_TOL: f64 = 1e-9;
/// Cross-check tolerance passed to the `Q⁽¹⁾` builder; criteria judge their own limits.
const NO_CROSS_CHECK: f64 = f64::INFINITY;

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            summary: String::new(),
        }
    }

    /// Records `value ≤ limit` under `label`; keeps the worst usage for the summary.
    fn at_most(&mut self, label: &str, value: f64, limit: f64) {
        let ok = value <= limit;
        if !ok {
            self.passed = false;
            self.summary
                .push_str(&format!(" [{label}: {value:e} > {limit:e}]"));
        }
    }

    fn holds(&mut self, label: &str, ok: bool) {
        if !ok {
            self.passed = false;
            self.summary.push_str(&format!(" [{label} fails]"));
        }
    }

    fn info(&mut self, text: String) {
        self.summary.push_str(&format!(" {text};"));
    }
}

fn order(s: f64) -> FractionalOrder {
    FractionalOrder::new(s).unwrap()
}

fn square(n: usize) -> SpectralBasis {
    rectangle_basis(0.0, PI, 0.0, PI, n).unwrap()
}

fn grid_square(n: usize) -> SpectralBasis {
    let domain = Domain::grid(GridMask::unit_square(64).unwrap()).with_star_center([0.5, 0.5]);
    SpectralBasis::new(&domain, n).unwrap()
}

fn grid_l_shape(n: usize) -> SpectralBasis {
    let domain = Domain::grid(GridMask::l_shape(32).unwrap()).with_star_center([0.25, 0.25]);
    SpectralBasis::new(&domain, n).unwrap()
}

fn decaying(rng: &mut ChaCha8Rng, basis: &SpectralBasis) -> SpectralFunction {
    let coeffs = (1..=basis.len())
        .map(|k| {
            let z: f64 = StandardNormal.sample(rng);
            z / (k * k) as f64
        })
        .collect();
    SpectralFunction::new(basis, coeffs).unwrap()
}

fn quadratic(m: &DMatrix<f64>, u: &SpectralFunction) -> f64 {
    let v = u.as_vector();
    v.dot(&(m * &v))
}

struct Bases {
    interval: SpectralBasis,
    square: SpectralBasis,
    disk: SpectralBasis,
    grid: SpectralBasis,
}

impl Bases {
    fn all(&self) -> [(&'static str, &SpectralBasis); 4] {
        [
            ("interval", &self.interval),
            ("square", &self.square),
            ("disk", &self.disk),
            ("grid", &self.grid),
        ]
    }
}

fn main_identity(b: &Bases) -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (name, basis) in b.all() {
        let limit = if basis.is_grid() { 1e-5 } else { 1e-8 };
        let q1 = q1_matrix(basis, NO_CROSS_CHECK).unwrap();
        let moments = radial_moment_matrix(basis).unwrap();
        let mut worst: f64 = 0.0;
        for s in S_VALUES {
            let m = PohozaevMatrices::from_q1(basis, q1.clone(), order(s)).unwrap();
            for _ in 0..20 {
                let u = decaying(&mut rng, basis);
                let direct = qs_direct(basis, &moments, &u, order(s));
                let rel = (direct - quadratic(&m.qs, &u)).abs() / (1.0 + direct.abs());
                worst = worst.max(rel);
            }
        }
        out.at_most(name, worst, limit);
        out.info(format!("{name} {worst:.1e}"));
    }
    out
}

fn interval_closed_form(b: &Bases) -> Outcome {
    let mut out = Outcome::new();
    let q1 = q1_matrix(&b.interval, NO_CROSS_CHECK).unwrap().entries;
    let mut worst: f64 = 0.0;
    for j in 1..=q1.nrows() {
        for k in 1..=q1.ncols() {
            let exact = (j * k) as f64 * if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            worst = worst.max((q1[(j - 1, k - 1)] - exact).abs());
        }
    }
    out.at_most("interval jk(-1)^(j+k)", worst, 1e-10);
    out.info(format!("closed form {worst:.1e}"));
    for (name, basis) in b.all() {
        let q1 = q1_matrix(basis, NO_CROSS_CHECK).unwrap().entries;
        let lam = basis.eigenvalues();
        let diag = (0..lam.len())
            .map(|k| (q1[(k, k)] - lam[k]).abs() / lam[k])
            .fold(0.0, f64::max);
        out.at_most(&format!("{name} diagonal"), diag, QUADRATURE_TOL);
        out.info(format!("{name} diagonal {diag:.1e}"));
    }
    out
}

fn positivity_transfer() -> Outcome {
    let mut out = Outcome::new();
    type Builder = fn(usize) -> SpectralBasis;
    let builders: [(&str, Builder); 5] = [
        ("interval", |n| interval_basis(0.0, PI, n).unwrap()),
        ("square", square),
        ("disk", |n| disk_basis(1.0, n).unwrap()),
        ("grid square", grid_square),
        ("grid L-shape", grid_l_shape),
    ];
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for (name, build) in builders {
        for n in [8, 16, 32, 64] {
            let basis = build(n);
            let q1 = q1_matrix(&basis, NO_CROSS_CHECK).unwrap();
            for s in S_VALUES {
                let m = PohozaevMatrices::from_q1(&basis, q1.clone(), order(s)).unwrap();
                for (label, mat) in [("Qs", &m.qs), ("P", &m.transition.entries)] {
                    let cert = psd_certify(label, mat, 1e-10).unwrap();
                    count += 1;
                    worst = worst.max(-cert.relative_margin());
                    out.holds(&format!("{name} n={n} s={s} {label}"), cert.is_psd());
                }
            }
        }
    }
    out.info(format!(
        "{count} certificates, worst -λmin/(1+‖M‖) = {worst:.1e}"
    ));
    out
}

fn bochner() -> Outcome {
    let mut out = Outcome::new();
    let xis: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    for s in [0.25, 0.5, 0.75] {
        let check = bochner_transform_check(order(s), &xis, 1e-6).unwrap();
        let worst = check
            .samples
            .iter()
            .map(|p| {
                let exact = PI * (s * PI).sin() / ((s * PI).cos() + (2.0 * PI * PI * p.xi).cosh());
                (p.quadrature - exact).abs()
            })
            .fold(0.0, f64::max);
        out.at_most(&format!("s={s}"), worst, 1e-6);
        out.info(format!("s={s} {worst:.1e}"));
    }
    let spot = bochner_transform_check(order(0.5), &[0.0], 1e-6)
        .unwrap()
        .samples[0]
        .quadrature;
    out.at_most("xi=0 s=1/2 equals pi", (spot - PI).abs(), 1e-8);
    out.info(format!("spot {:.1e}", (spot - PI).abs()));
    out
}

/// Orthogonal rotation by `theta` in the plane of basis functions `j`, `k`.
fn plane_rotation(n: usize, j: usize, k: usize, theta: f64) -> DMatrix<f64> {
    let mut q = DMatrix::<f64>::identity(n, n);
    q[(j, j)] = theta.cos();
    q[(j, k)] = -theta.sin();
    q[(k, j)] = theta.sin();
    q[(k, k)] = theta.cos();
    q
}

fn repeated_eigenvalues(b: &Bases) -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    for (name, basis) in [("square", &b.square), ("disk", &b.disk)] {
        let lam = basis.eigenvalues();
        // The first repeated eigenvalue: square λ = 5 from (1,2)/(2,1), disk's first J_1 pair.
        let j = (0..lam.len() - 1)
            .find(|&i| same_group(lam[i], lam[i + 1]))
            .unwrap();
        let k = j + 1;
        let q1 = q1_matrix(basis, NO_CROSS_CHECK).unwrap();
        out.at_most(&format!("{name} Q1"), q1.entries[(j, k)].abs(), 1e-8);
        let mut worst_entry: f64 = q1.entries[(j, k)].abs();
        let mut worst_rotation: f64 = 0.0;
        for s in S_VALUES {
            let m = PohozaevMatrices::from_q1(basis, q1.clone(), order(s)).unwrap();
            worst_entry = worst_entry.max(m.qs[(j, k)].abs());
            out.at_most(&format!("{name} Qs s={s}"), m.qs[(j, k)].abs(), 1e-8);
            for _ in 0..10 {
                let theta = 2.0 * PI * rand::Rng::random::<f64>(&mut rng);
                let q = plane_rotation(basis.len(), j, k, theta);
                let rotated = basis.transformed(&q).unwrap();
                let u = decaying(&mut rng, basis);
                let u_rot =
                    SpectralFunction::new(&rotated, (&q * u.as_vector()).as_slice().to_vec())
                        .unwrap();
                let m_rot = PohozaevMatrices::assemble(&rotated, order(s), NO_CROSS_CHECK).unwrap();
                let before = quadratic(&m.qs, &u);
                let change = (before - quadratic(&m_rot.qs, &u_rot)).abs() / (1.0 + before.abs());
                worst_rotation = worst_rotation.max(change);
                worst_entry = worst_entry.max(m_rot.qs[(j, k)].abs());
                out.at_most(
                    &format!("{name} rotated entry"),
                    m_rot.qs[(j, k)].abs(),
                    1e-8,
                );
            }
        }
        out.at_most(&format!("{name} rotation"), worst_rotation, 1e-8);
        out.info(format!(
            "{name} pair ({},{}) entries {worst_entry:.1e}, rotation {worst_rotation:.1e}",
            j + 1,
            k + 1
        ));
    }
    out
}

fn radial_moments(b: &Bases) -> Outcome {
    let mut out = Outcome::new();
    for (name, basis) in b.all() {
        let m = radial_moment_matrix(basis).unwrap().matrix;
        let half_n = basis.dimension() as f64 / 2.0;
        let diag = (0..m.nrows())
            .map(|k| (m[(k, k)] + half_n).abs())
            .fold(0.0, f64::max);
        out.at_most(&format!("{name} M_kk"), diag, QUADRATURE_TOL);

        let q1 = q1_matrix(basis, NO_CROSS_CHECK).unwrap().entries;
        let lam = basis.eigenvalues();
        let mut cross: f64 = 0.0;
        for j in 0..lam.len() {
            for k in 0..lam.len() {
                if j != k && !same_group(lam[j], lam[k]) {
                    cross = cross.max((q1[(j, k)] - 0.5 * (lam[j] - lam[k]) * m[(j, k)]).abs());
                }
            }
        }
        out.at_most(&format!("{name} boundary vs volume"), cross, 1e-8);
        out.info(format!("{name} M_kk {diag:.1e}, cross-check {cross:.1e}"));
    }
    let m = radial_moment_matrix(&b.interval).unwrap().matrix;
    out.at_most("interval M_12 = 4/3", (m[(0, 1)] - 4.0 / 3.0).abs(), 1e-8);
    out
}

fn subordination(b: &Bases) -> Outcome {
    let mut out = Outcome::new();
    let controls = SubordinationControls::default();
    for (name, basis) in b.all() {
        let mut worst: f64 = 0.0;
        for s in [0.3, 0.5, 0.7] {
            for &l in basis.eigenvalues().iter().take(10) {
                let v = subordination_check(l, order(s), &controls).unwrap().value;
                worst = worst.max((v - l.powf(s)).abs());
            }
        }
        out.at_most(name, worst, 1e-8);
        out.info(format!("{name} {worst:.1e}"));
    }
    out
}

fn classical_limit(b: &Bases) -> Outcome {
    let mut out = Outcome::new();
    let one = FractionalOrder::classical();
    for (name, basis) in b.all() {
        let m = PohozaevMatrices::assemble(basis, one, NO_CROSS_CHECK).unwrap();
        let entry = (&m.qs - &m.q1.entries).amax();
        out.at_most(&format!("{name} Qs = Q1"), entry, 1e-12);
        let lam = basis.eigenvalues();
        let value = (1..=basis.len())
            .map(|k| {
                let v = qs_direct(basis, &m.moments, &SpectralFunction::unit(basis, k), one);
                (v - lam[k - 1]).abs() / lam[k - 1]
            })
            .fold(0.0, f64::max);
        out.at_most(
            &format!("{name} qs_direct(φ_k) = λ_k"),
            value,
            QUADRATURE_TOL,
        );
        out.info(format!("{name} entries {entry:.1e}, values {value:.1e}"));
    }
    out
}

fn semilinear() -> Outcome {
    let mut out = Outcome::new();
    let half = order(0.5);
    let basis = square(32);

    let nl = PowerLaw::new(2.0);
    let mut guess = SpectralFunction::zero(&basis);
    guess.coeffs[0] = 3.0;
    let system = GalerkinSystem::new(&basis, half);
    let rep = newton_solve(&system, &guess, &nl, &NewtonOptions::default()).unwrap();
    let residual = galerkin_residual(&basis, &rep.solution, half, &nl)
        .unwrap()
        .norm();
    out.holds("(a) converged", rep.converged);
    out.holds("(a) nontrivial", rep.solution.norm_squared().sqrt() > 1e-6);
    out.at_most("(a) residual", residual, 1e-8);
    out.at_most("(a) functional", -rep.pohozaev_value, 1e-6);
    out.info(format!(
        "(a) residual {residual:.1e}, functional {:.4}",
        rep.pohozaev_value
    ));

    let probe =
        nonexistence_probe(&basis, half, &PowerLaw::new(5.0), &ProbeOptions::default()).unwrap();
    out.holds("(b) eight guesses", probe.runs.len() == 8);
    out.holds("(b) clean verdict", probe.verdict == ProbeVerdict::Clean);
    for run in &probe.runs {
        out.holds(
            &format!("(b) {} trivial or flagged", run.guess_id),
            matches!(
                run.outcome,
                ProbeOutcome::Trivial | ProbeOutcome::FlaggedSpurious
            ),
        );
    }
    let flagged = probe
        .runs
        .iter()
        .filter(|r| r.outcome == ProbeOutcome::FlaggedSpurious)
        .count();
    out.info(format!(
        "(b) {:?}, {flagged} flagged, {} trivial",
        probe.verdict,
        probe.runs.len() - flagged
    ));
    out.at_most(
        "(b) coefficient -1/6",
        (power_coefficient(2, 0.5, 5.0) + 1.0 / 6.0).abs(),
        1e-14,
    );
    out.holds(
        "(c) critical exponent",
        criticality(2, half, 3.0).unwrap() == Criticality::Critical,
    );
    out
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn determinism() -> Outcome {
    let mut out = Outcome::new();
    let config = workspace_root().join("configs/acceptance.toml");
    let mut payloads = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let args = [
            "sfl-lab".to_owned(),
            "run".into(),
            config.display().to_string(),
            "--seed".into(),
            SEED.to_string(),
            "--output-dir".into(),
            dir.path().display().to_string(),
        ];
        let (mut so, mut se) = (Vec::new(), Vec::new());
        let code = sfl_lab::cli::execute(args, &mut so, &mut se);
        out.holds("acceptance config exits 0", code == 0);
        if code != 0 {
            out.info(String::from_utf8_lossy(&so).into_owned());
            out.info(String::from_utf8_lossy(&se).into_owned());
        }
        let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        payloads.push(sfl_lab::report::numeric_payload(&json));
    }
    out.holds("identical report.json payloads", payloads[0] == payloads[1]);
    let suites = payloads[0]["suites"].as_array().map_or(0, Vec::len);
    out.info(format!(
        "{suites} suites, payloads identical: {}",
        payloads[0] == payloads[1]
    ));
    out
}

fn main() {
    let start = Instant::now();
    let bases = Bases {
        interval: interval_basis(0.0, PI, 64).unwrap(),
        square: square(64),
        disk: disk_basis(1.0, 32).unwrap(),
        grid: grid_square(32),
    };
    let criteria: [(&str, &dyn Fn() -> Outcome); 10] = [
        ("main identity", &|| main_identity(&bases)),
        ("interval closed form and Q1 diagonal", &|| {
            interval_closed_form(&bases)
        }),
        ("positivity transfer", &positivity_transfer),
        ("Bochner closed form", &bochner),
        ("repeated eigenvalues", &|| repeated_eigenvalues(&bases)),
        ("radial moments", &|| radial_moments(&bases)),
        ("subordination", &|| subordination(&bases)),
        ("classical limit", &|| classical_limit(&bases)),
        ("semilinear suite", &semilinear),
        ("determinism", &determinism),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = criterion();
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {name} ({:.1}s):{}",
            i + 1,
            t.elapsed().as_secs_f64(),
            outcome.summary
        );
    }
    println!(
        "acceptance: {} of 10 criteria passed in {:.1}s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
