//! The `run` and `matrices` verbs: build contexts, execute suites, write artefacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use sfl_core::sfl::FractionalOrder;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, Suite};
use crate::report::{markdown, ExperimentReport, SuiteTiming, Timing, ToolInfo, NO_SUITES_WARNING};
use crate::suites::{run_suite, Contexts, DomainContext};

/// Overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "SFL_LAB_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read report {path}: {message}")]
    Report { path: PathBuf, message: String },
    #[error("cannot write CSV {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("matrix construction failed: {0}")]
    Construction(String),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    pub json_path: PathBuf,
    pub markdown_path: PathBuf,
    pub matrix_files: Vec<PathBuf>,
}

struct Loaded {
    config: ExperimentConfig,
    base_dir: PathBuf,
    output_dir: PathBuf,
}

fn load(config_path: &Path, options: &RunOptions) -> Result<Loaded, LabError> {
    let config = ExperimentConfig::load(config_path)?;
    let base_dir = config_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let output_dir = options
        .output_dir
        .clone()
        .unwrap_or_else(|| base_dir.join(&config.output.dir));
    Ok(Loaded {
        config,
        base_dir,
        output_dir,
    })
}

fn build_contexts(config: &ExperimentConfig, base_dir: &Path) -> Contexts {
    let orders = config.orders();
    config
        .domains
        .par_iter()
        .map(|d| {
            DomainContext::build(d, &orders, base_dir)
                .map(Arc::new)
                .map_err(|e| format!("{}: construction failed: {e:#}", d.name))
        })
        .collect()
}

fn create_dir(dir: &Path) -> Result<(), LabError> {
    fs::create_dir_all(dir).map_err(|source| LabError::Io {
        path: dir.to_owned(),
        source,
    })
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, LabError> {
    fs::write(&path, contents).map_err(|source| LabError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// `basis, s, n, row, c1..cn`, one record per matrix row, 17 significant digits.
fn write_matrix_csv(
    path: &Path,
    fingerprint: &str,
    s: &str,
    m: &nalgebra::DMatrix<f64>,
) -> Result<(), LabError> {
    let csv_err = |source| LabError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let n = m.ncols();
    let mut header = vec!["basis".to_owned(), "s".into(), "n".into(), "row".into()];
    header.extend((1..=n).map(|c| format!("c{c}")));
    w.write_record(&header).map_err(csv_err)?;
    for i in 0..m.nrows() {
        let mut record = vec![
            fingerprint.to_owned(),
            s.to_owned(),
            n.to_string(),
            (i + 1).to_string(),
        ];
        record.extend(m.row(i).iter().map(|v| format!("{v:.16e}")));
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| LabError::Io {
        path: path.to_owned(),
        source: e,
    })
}

fn write_matrices(
    dir: &Path,
    contexts: &Contexts,
    orders: &[FractionalOrder],
) -> Result<Vec<PathBuf>, LabError> {
    let dir = dir.join("matrices");
    create_dir(&dir)?;
    let mut files = Vec::new();
    for ctx in contexts {
        let ctx = ctx
            .as_ref()
            .map_err(|e| LabError::Construction(e.clone()))?;
        let fp = ctx.basis.fingerprint();
        let path = dir.join(format!("{}_q1.csv", ctx.name()));
        write_matrix_csv(&path, fp, "1", &ctx.q1.entries)?;
        files.push(path);
        for (m, s) in ctx.matrices.iter().zip(orders) {
            let s = s.value().to_string();
            let p = dir.join(format!("{}_p_s{s}.csv", ctx.name()));
            write_matrix_csv(&p, fp, &s, &m.transition.entries)?;
            let q = dir.join(format!("{}_qs_s{s}.csv", ctx.name()));
            write_matrix_csv(&q, fp, &s, &m.qs)?;
            files.push(p);
            files.push(q);
        }
    }
    Ok(files)
}

fn tool() -> ToolInfo {
    ToolInfo {
        name: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

/// Executes every selected suite and writes `report.json` and `report.md`.
pub fn run(config_path: &Path, options: &RunOptions) -> Result<RunOutcome, LabError> {
    let start = Instant::now();
    let Loaded {
        config,
        base_dir,
        output_dir,
    } = load(config_path, options)?;
    let seed = match options.seed {
        Some(s) => Some(s),
        None => config.require_seed()?,
    };
    create_dir(&output_dir)?;

    let needs_domains = config.suites.iter().any(|s| {
        matches!(
            s,
            Suite::Identity
                | Suite::Psd
                | Suite::Bochner
                | Suite::Degenerate
                | Suite::Subordination
        )
    }) || config.output.matrices;
    let contexts = if needs_domains {
        build_contexts(&config, &base_dir)
    } else {
        Vec::new()
    };
    let setup_seconds = start.elapsed().as_secs_f64();

    let results: Vec<_> = config
        .suites
        .par_iter()
        .map(|&suite| {
            let t = Instant::now();
            let result = run_suite(suite, &config, seed.unwrap_or(0), &contexts, &base_dir);
            (
                result,
                SuiteTiming {
                    suite,
                    seconds: t.elapsed().as_secs_f64(),
                },
            )
        })
        .collect();
    let (suites, timings): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let matrix_files = if config.output.matrices {
        write_matrices(&output_dir, &contexts, &config.orders())?
    } else {
        Vec::new()
    };

    let mut warnings = Vec::new();
    if suites.is_empty() {
        warnings.push(NO_SUITES_WARNING.to_owned());
    }
    let passed = suites.iter().all(|s| s.passed);
    let report = ExperimentReport {
        tool: tool(),
        seed,
        domains: contexts.iter().flatten().map(|c| c.summary()).collect(),
        config,
        suites,
        passed,
        warnings,
        timing: Timing {
            setup_seconds,
            suites: timings,
            total_seconds: start.elapsed().as_secs_f64(),
        },
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| LabError::Report {
        path: output_dir.join("report.json"),
        message: e.to_string(),
    })?;
    let json_path = write_file(output_dir.join("report.json"), &json)?;
    let markdown_path = write_file(output_dir.join("report.md"), &markdown(&report))?;
    Ok(RunOutcome {
        report,
        json_path,
        markdown_path,
        matrix_files,
    })
}

/// Writes the `Q⁽¹⁾`, `P⁽ˢ⁾` and `Q⁽ˢ⁾` CSVs for every configured domain and order.
pub fn matrices(config_path: &Path, options: &RunOptions) -> Result<Vec<PathBuf>, LabError> {
    let Loaded {
        config,
        base_dir,
        output_dir,
    } = load(config_path, options)?;
    let contexts = build_contexts(&config, &base_dir);
    write_matrices(&output_dir, &contexts, &config.orders())
}

pub fn read_report(path: &Path) -> Result<ExperimentReport, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::Report {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| LabError::Report {
        path: path.to_owned(),
        message: e.to_string(),
    })
}
