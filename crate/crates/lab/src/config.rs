//! Declarative experiment configuration (TOML).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sfl_core::eigenbasis::{BasisError, Domain, GridMask};
use sfl_core::sfl::{FractionalOrder, SubordinationControls};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("domain `{name}`: {source}")]
    Domain { name: String, source: BasisError },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Identity,
    Psd,
    Bochner,
    Degenerate,
    Subordination,
    Semilinear,
    Probe,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Identity,
        Suite::Psd,
        Suite::Bochner,
        Suite::Degenerate,
        Suite::Subordination,
        Suite::Semilinear,
        Suite::Probe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Psd => "psd",
            Suite::Bochner => "bochner",
            Suite::Degenerate => "degenerate",
            Suite::Subordination => "subordination",
            Suite::Semilinear => "semilinear",
            Suite::Probe => "probe",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, Suite::Identity | Suite::Degenerate | Suite::Probe)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A length written either as a number or as `[k*]pi[/d]`, e.g. `"pi"`, `"2*pi"`, `"pi/2"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LengthRepr", into = "f64")]
pub struct Length(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum LengthRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<LengthRepr> for Length {
    type Error = String;

    fn try_from(repr: LengthRepr) -> Result<Self, String> {
        match repr {
            LengthRepr::Number(v) => Ok(Length(v)),
            LengthRepr::Text(t) => t.parse(),
        }
    }
}

impl From<Length> for f64 {
    fn from(l: Length) -> f64 {
        l.0
    }
}

impl FromStr for Length {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let bad = || format!("cannot read `{text}` as a length (use a number or e.g. \"pi/2\")");
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
            None => (t.as_str(), 1.0),
        };
        let factor = match num.strip_suffix("pi") {
            Some("") => 1.0,
            Some("-") => -1.0,
            Some(k) => k
                .strip_suffix('*')
                .unwrap_or(k)
                .parse::<f64>()
                .map_err(|_| bad())?,
            None => {
                return num
                    .parse::<f64>()
                    .map(|v| Length(v / den))
                    .map_err(|_| bad())
            }
        };
        Ok(Length(factor * std::f64::consts::PI / den))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPreset {
    UnitSquare,
    LShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Interval {
        a: Length,
        b: Length,
    },
    Rectangle {
        a: Length,
        b: Length,
        c: Length,
        d: Length,
    },
    Disk {
        radius: Length,
        #[serde(default)]
        center: [Length; 2],
    },
    /// Either a raster file (relative to the config file) or a preset with
    /// `cells` lattice cells per unit length.
    Grid {
        #[serde(default)]
        raster: Option<PathBuf>,
        #[serde(default)]
        preset: Option<GridPreset>,
        #[serde(default)]
        cells: Option<usize>,
    },
}

impl Default for Length {
    fn default() -> Self {
        Length(0.0)
    }
}

/// Unknown keys are rejected by the shape variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    pub name: String,
    #[serde(flatten)]
    pub shape: Shape,
    /// Truncation size; defaults to 64 for intervals and rectangles, 32 otherwise.
    #[serde(default)]
    pub n: Option<usize>,
    /// Point about which `x·ν` is measured; defaults to the origin.
    #[serde(default)]
    pub star_center: Option<[Length; 2]>,
}

impl DomainConfig {
    pub fn truncation(&self) -> usize {
        self.n.unwrap_or(match self.shape {
            Shape::Interval { .. } | Shape::Rectangle { .. } => 64,
            _ => 32,
        })
    }

    pub fn build(&self, base_dir: &Path) -> Result<Domain, ConfigError> {
        let wrap = |source| ConfigError::Domain {
            name: self.name.clone(),
            source,
        };
        let domain = match &self.shape {
            Shape::Interval { a, b } => Domain::interval(a.0, b.0).map_err(wrap)?,
            Shape::Rectangle { a, b, c, d } => {
                Domain::rectangle(a.0, b.0, c.0, d.0).map_err(wrap)?
            }
            Shape::Disk { radius, center } => {
                Domain::disk(radius.0, [center[0].0, center[1].0]).map_err(wrap)?
            }
            Shape::Grid {
                raster,
                preset,
                cells,
            } => {
                let mask = match (raster, preset) {
                    (Some(path), None) => {
                        let path = base_dir.join(path);
                        let text = std::fs::read_to_string(&path)
                            .map_err(|source| ConfigError::Io { path, source })?;
                        GridMask::from_raster(&text).map_err(wrap)?
                    }
                    (None, Some(preset)) => {
                        let cells = cells.ok_or_else(|| {
                            invalid(format!("domain `{}`: grid preset needs `cells`", self.name))
                        })?;
                        match preset {
                            GridPreset::UnitSquare => GridMask::unit_square(cells),
                            GridPreset::LShape => GridMask::l_shape(cells),
                        }
                        .map_err(wrap)?
                    }
                    _ => {
                        return Err(invalid(format!(
                            "domain `{}`: grid needs exactly one of `raster` or `preset`",
                            self.name
                        )))
                    }
                };
                Domain::grid(mask)
            }
        };
        Ok(match self.star_center {
            Some([x, y]) => domain.with_star_center([x.0, y.0]),
            None => domain,
        })
    }
}

/// Tolerances that decide pass/fail. Every threshold used by a suite lives here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|qs_direct − ûᵀQ⁽ˢ⁾û| / (1 + |qs_direct|)` on closed-form bases.
    pub identity: f64,
    /// The same residual on finite-difference bases.
    pub identity_grid: f64,
    /// Boundary route of `Q⁽¹⁾` against the volume route (absolute).
    pub cross_check: f64,
    /// `|M_kk + N/2|` and `|M_jk + M_kj|`.
    pub moments: f64,
    /// `max |Q⁽¹⁾_kk − λ_k| / λ_k`.
    pub q1_diagonal: f64,
    /// Interval `Q⁽¹⁾` against its closed form (absolute).
    pub closed_form: f64,
    /// `τ` in `λ_min ≥ −τ(1 + ‖M‖₂)`.
    pub psd: f64,
    /// Bochner transform quadrature against its closed form.
    pub bochner: f64,
    /// Bochner transform at `ξ = 0, s = 1/2` against `π`.
    pub bochner_spot: f64,
    /// `P⁽ˢ⁾` against its kernel factorisation.
    pub factorization: f64,
    /// Cross entries of `Q⁽¹⁾`, `Q⁽ˢ⁾` inside an eigenvalue group (absolute).
    pub degenerate: f64,
    /// Change of `Q⁽ˢ⁾[u]` under group rotations, relative to `1 + |Q⁽ˢ⁾[u]|`.
    pub rotation: f64,
    /// `|subordination integral − λ^s|`.
    pub subordination: f64,
    /// `Q⁽ˢ⁾` against `Q⁽¹⁾` at `s = 1` and `qs_direct(φ_k, 1)` against `λ_k`.
    pub classical: f64,
    /// Galerkin residual of an accepted semilinear solution.
    pub semilinear_residual: f64,
    /// Relative slack `ε` in `functional ≥ −ε(1 + ∫|uf|)`.
    pub pohozaev: f64,
    /// Power-law reduction of the functional, relative to `∫|uf|`.
    pub power_identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-8,
            identity_grid: 1e-5,
            cross_check: 1e-8,
            moments: 1e-9,
            q1_diagonal: 1e-9,
            closed_form: 1e-10,
            psd: 1e-10,
            bochner: 1e-6,
            bochner_spot: 1e-8,
            factorization: 1e-12,
            degenerate: 1e-8,
            rotation: 1e-8,
            subordination: 1e-8,
            classical: 1e-12,
            semilinear_residual: 1e-8,
            pohozaev: 1e-6,
            power_identity: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityConfig {
    /// Random coefficient vectors per (domain, s), coefficients `z_k / k²`.
    pub samples: usize,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        Self { samples: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdConfig {
    /// Leading truncations certified; sizes above a domain's `n` are skipped.
    pub truncations: Vec<usize>,
}

impl Default for PsdConfig {
    fn default() -> Self {
        Self {
            truncations: vec![8, 16, 32, 64],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BochnerConfig {
    pub s_values: Vec<f64>,
    /// `ξ` grid: `xi_count` equispaced points on `[0, xi_max]`.
    pub xi_max: f64,
    pub xi_count: usize,
}

impl Default for BochnerConfig {
    fn default() -> Self {
        Self {
            s_values: vec![0.25, 0.5, 0.75],
            xi_max: 2.0,
            xi_count: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegenerateConfig {
    pub rotations: usize,
}

impl Default for DegenerateConfig {
    fn default() -> Self {
        Self { rotations: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubordinationConfig {
    pub s_values: Vec<f64>,
    /// Leading eigenvalues checked per domain.
    pub modes: usize,
    pub controls: SubordinationControls,
}

impl Default for SubordinationConfig {
    fn default() -> Self {
        Self {
            s_values: vec![0.3, 0.5, 0.7],
            modes: 10,
            controls: SubordinationControls::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemilinearConfig {
    /// Name of a `[[domain]]` entry; its basis is rebuilt with truncation `n`.
    pub domain: String,
    pub n: usize,
    pub s: f64,
    /// Exponent of `f(t) = |t|^{p−1} t`.
    pub p: f64,
    /// Newton starts from `amplitude · φ_1`.
    pub amplitude: f64,
    pub newton: NewtonConfig,
}

impl Default for SemilinearConfig {
    fn default() -> Self {
        Self {
            domain: "square".into(),
            n: 32,
            s: 0.5,
            p: 2.0,
            amplitude: 3.0,
            newton: NewtonConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub domain: String,
    pub n: usize,
    pub s: f64,
    pub p: f64,
    /// Guesses `a·φ_1`.
    pub amplitudes: Vec<f64>,
    /// Seeded random guesses with coefficients `z_k / k²`.
    pub random_guesses: usize,
    /// Converged runs with coefficient norm below this are trivial.
    pub trivial_tol: f64,
    /// Step budget of the constrained-descent restart for failed Newton runs.
    pub descent_max_iter: usize,
    pub sign_samples_x: usize,
    pub sign_samples_t: usize,
    pub sign_t_max: f64,
    pub newton: NewtonConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            domain: "square".into(),
            n: 32,
            s: 0.5,
            p: 5.0,
            amplitudes: vec![0.1, 1.0, 10.0],
            random_guesses: 5,
            trivial_tol: 1e-6,
            descent_max_iter: 2000,
            sign_samples_x: 9,
            sign_samples_t: 41,
            sign_t_max: 10.0,
            newton: NewtonConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write `Q⁽¹⁾`, `P⁽ˢ⁾`, `Q⁽ˢ⁾` CSVs during `run`.
    pub matrices: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("sfl-lab-output"),
            matrices: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Required whenever a randomized suite is selected.
    #[serde(default)]
    pub seed: Option<u64>,
    pub s_values: Vec<f64>,
    /// Adds `s = 1` comparisons to the identity suite.
    #[serde(default)]
    pub classical_limit: bool,
    pub suites: Vec<Suite>,
    #[serde(rename = "domain", default)]
    pub domains: Vec<DomainConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub identity: IdentityConfig,
    #[serde(default)]
    pub psd: PsdConfig,
    #[serde(default)]
    pub bochner: BochnerConfig,
    #[serde(default)]
    pub degenerate: DegenerateConfig,
    #[serde(default)]
    pub subordination: SubordinationConfig,
    #[serde(default)]
    pub semilinear: SemilinearConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn orders(&self) -> Vec<FractionalOrder> {
        self.s_values
            .iter()
            .map(|&s| FractionalOrder::new(s).expect("validated"))
            .collect()
    }

    pub fn domain(&self, name: &str) -> Option<&DomainConfig> {
        self.domains.iter().find(|d| d.name == name)
    }

    pub fn selects(&self, suite: Suite) -> bool {
        self.suites.contains(&suite)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let order = |s: f64| FractionalOrder::new(s).map_err(|e| invalid(e.to_string()));
        for &s in &self.s_values {
            order(s)?;
        }
        for &s in self
            .bochner
            .s_values
            .iter()
            .chain(&self.subordination.s_values)
        {
            order(s)?;
        }
        for (i, suite) in self.suites.iter().enumerate() {
            if self.suites[..i].contains(suite) {
                return Err(invalid(format!("suite `{suite}` is listed twice")));
            }
        }
        for (i, d) in self.domains.iter().enumerate() {
            if self.domains[..i].iter().any(|o| o.name == d.name) {
                return Err(invalid(format!("domain name `{}` is used twice", d.name)));
            }
            if d.truncation() == 0 {
                return Err(invalid(format!(
                    "domain `{}`: n must be at least 1",
                    d.name
                )));
            }
        }
        let per_domain = [
            Suite::Identity,
            Suite::Psd,
            Suite::Degenerate,
            Suite::Subordination,
        ];
        if self.domains.is_empty() && per_domain.iter().any(|s| self.selects(*s)) {
            return Err(invalid("selected suites need at least one [[domain]]"));
        }
        if self.s_values.is_empty()
            && [Suite::Identity, Suite::Psd, Suite::Degenerate]
                .iter()
                .any(|s| self.selects(*s))
        {
            return Err(invalid("s_values must not be empty"));
        }
        if self.selects(Suite::Semilinear) {
            order(self.semilinear.s)?;
            self.check_solver_domain("semilinear", &self.semilinear.domain, self.semilinear.n)?;
            if self.semilinear.p <= 1.0 {
                return Err(invalid("semilinear: p must exceed 1"));
            }
        }
        if self.selects(Suite::Probe) {
            order(self.probe.s)?;
            self.check_solver_domain("probe", &self.probe.domain, self.probe.n)?;
            if self.probe.p <= 1.0 {
                return Err(invalid("probe: p must exceed 1"));
            }
        }
        Ok(())
    }

    fn check_solver_domain(&self, suite: &str, name: &str, n: usize) -> Result<(), ConfigError> {
        if self.domain(name).is_none() {
            return Err(invalid(format!("{suite}: unknown domain `{name}`")));
        }
        if n == 0 {
            return Err(invalid(format!("{suite}: n must be at least 1")));
        }
        Ok(())
    }

    /// Seed for randomized suites; `None` when no randomized suite is selected.
    pub fn require_seed(&self) -> Result<Option<u64>, ConfigError> {
        match (self.seed, self.suites.iter().any(|s| s.is_randomized())) {
            (None, true) => Err(invalid(
                "a seed is required for the identity, degenerate and probe suites",
            )),
            (seed, _) => Ok(seed),
        }
    }
}
