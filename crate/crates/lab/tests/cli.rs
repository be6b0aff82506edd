use std::fs;
use std::path::{Path, PathBuf};

use sfl_lab::cli::{execute, EXIT_ERROR, EXIT_FAIL, EXIT_PASS};
use tempfile::TempDir;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn lab(args: &[&str]) -> Output {
    let mut argv = vec!["sfl-lab"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &TempDir, text: &str) -> String {
    let path = dir.path().join("config.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_INTERVAL: &str = r#"
seed = 7
s_values = [0.5]
suites = ["identity", "psd"]

[identity]
samples = 3

[psd]
truncations = [8]

[[domain]]
name = "interval"
shape = "interval"
a = 0
b = "pi"
n = 8
"#;

#[test]
fn verify_interval_passes() {
    let out_dir = TempDir::new().unwrap();
    let config = configs().join("verify-interval.toml");
    let r = lab(&[
        "run",
        path_str(&config),
        "--output-dir",
        path_str(out_dir.path()),
    ]);
    assert_eq!(r.code, EXIT_PASS, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("overall: PASS (seed 1)"));
    let report = read_json(&out_dir.path().join("report.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["suites"].as_array().unwrap().len(), 2);
    let md = fs::read_to_string(out_dir.path().join("report.md")).unwrap();
    assert!(md.contains("Overall verdict: **PASS**"));
}

#[test]
fn order_out_of_range_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, &SMALL_INTERVAL.replace("[0.5]", "[1.5]"));
    let r = lab(&["run", &config, "--output-dir", path_str(dir.path())]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("s must lie in (0,1)"), "{}", r.stderr);
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn missing_config_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.toml");
    assert_eq!(lab(&["run", path_str(&missing)]).code, EXIT_ERROR);
}

#[test]
fn empty_suite_selection_warns_and_passes() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, "s_values = [0.5]\nsuites = []\n");
    let out = dir.path().join("out");
    let r = lab(&["run", &config, "--output-dir", path_str(&out)]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    assert!(r.stderr.contains("no suites selected"));

    let e = lab(&["explain", path_str(&out.join("report.json"))]);
    assert_eq!(e.code, EXIT_PASS);
    assert!(e.stdout.contains("no suites selected"));
    assert!(e.stdout.contains("overall: PASS"));
}

#[test]
fn explain_tabulates_every_suite() {
    let dir = TempDir::new().unwrap();
    let text = SMALL_INTERVAL
        .replace(
            r#"suites = ["identity", "psd"]"#,
            r#"suites = ["identity", "psd", "bochner", "degenerate", "subordination", "semilinear", "probe"]"#,
        )
        + r#"
[[domain]]
name = "square"
shape = "rectangle"
a = 0
b = "pi"
c = 0
d = "pi"
n = 16

[degenerate]
rotations = 2

[semilinear]
domain = "square"
n = 16

[probe]
domain = "square"
n = 16
p = 5
random_guesses = 1
"#;
    let config = write_config(&dir, &text);
    let out = dir.path().join("out");
    let r = lab(&["run", &config, "--output-dir", path_str(&out)]);
    let e = lab(&["explain", path_str(&out.join("report.json"))]);
    assert_eq!(e.code, EXIT_PASS);
    let rows: Vec<&str> = e
        .stdout
        .lines()
        .filter(|l| l.starts_with("| ") && !l.starts_with("| suite"))
        .collect();
    assert_eq!(rows.len(), 7, "{}", e.stdout);
    for (row, suite) in rows.iter().zip([
        "identity",
        "psd",
        "bochner",
        "degenerate",
        "subordination",
        "semilinear",
        "probe",
    ]) {
        assert!(row.starts_with(&format!("| {suite} |")), "{row}");
    }
    let report = read_json(&out.join("report.json"));
    let passed = report["passed"].as_bool().unwrap();
    assert_eq!(r.code, if passed { EXIT_PASS } else { EXIT_FAIL });
}

#[test]
fn failing_psd_report_prints_the_witness() {
    let dir = TempDir::new().unwrap();
    let off_centre = SMALL_INTERVAL
        .replace(r#"suites = ["identity", "psd"]"#, r#"suites = ["psd"]"#)
        + "star_center = [\"2*pi\", 0]\n";
    let config = write_config(&dir, &off_centre);
    let out = dir.path().join("out");
    let r = lab(&["run", &config, "--output-dir", path_str(&out)]);
    assert_eq!(r.code, EXIT_PASS, "{}{}", r.stdout, r.stderr);

    let path = out.join("report.json");
    let mut report = read_json(&path);
    let psd = &mut report["suites"][0];
    let cert = psd["certificates"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["label"].as_str().unwrap().ends_with("/Qs"))
        .unwrap()
        .clone();
    assert_eq!(cert["verdict"], "indefinite", "{cert}");
    let label = cert["label"].as_str().unwrap().to_owned();
    psd["passed"] = false.into();
    psd["failures"] = serde_json::json!([format!("{label} psd")]);
    report["passed"] = false.into();
    fs::write(&path, serde_json::to_string(&report).unwrap()).unwrap();

    let e = lab(&["explain", path_str(&path)]);
    assert_eq!(e.code, EXIT_PASS);
    assert!(e.stdout.contains("overall: FAIL"));
    assert!(e.stdout.contains("| psd | FAIL |"));
    assert!(e.stdout.contains(&format!("{label}: min eigenvalue")));
    assert!(e.stdout.contains("witness quadratic value vᵀMv = -"));
    let witness = e
        .stdout
        .lines()
        .find(|l| l.trim_start().starts_with("witness v = ["))
        .unwrap();
    assert_eq!(witness.matches(',').count(), 7);
}

#[test]
fn tolerance_breach_fails_the_run() {
    let dir = TempDir::new().unwrap();
    let text = SMALL_INTERVAL.replace(
        r#"suites = ["identity", "psd"]"#,
        "suites = [\"identity\"]\n\n[tolerances]\nclosed_form = 1e-300",
    );
    let config = write_config(&dir, &text);
    let out = dir.path().join("out");
    let r = lab(&["run", &config, "--output-dir", path_str(&out)]);
    assert_eq!(r.code, EXIT_FAIL, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("identity failed:"));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["passed"], false);
    assert!(!report["suites"][0]["failures"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn malformed_report_is_an_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("report.json");
    fs::write(&path, "{\"suites\": 3}").unwrap();
    let r = lab(&["explain", path_str(&path)]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("cannot read report"));
    assert_eq!(
        lab(&["explain", path_str(&dir.path().join("none.json"))]).code,
        EXIT_ERROR
    );
}

#[test]
fn matrices_are_written_at_full_precision() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, &SMALL_INTERVAL.replace("[0.5]", "[0.25, 0.5]"));
    let out = dir.path().join("out");
    let r = lab(&["matrices", &config, "--output-dir", path_str(&out)]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
    let m = out.join("matrices");
    let mut names: Vec<String> = fs::read_dir(&m)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "interval_p_s0.25.csv",
            "interval_p_s0.5.csv",
            "interval_q1.csv",
            "interval_qs_s0.25.csv",
            "interval_qs_s0.5.csv",
        ]
    );
    assert!(!out.join("report.json").exists());

    let mut reader = csv::Reader::from_path(m.join("interval_q1.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&header[..5], ["basis", "s", "n", "row", "c1"]);
    assert_eq!(header.len(), 12);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    for (j, row) in rows.iter().enumerate() {
        assert_eq!(&row[2], "8");
        assert_eq!(row[3].parse::<usize>().unwrap(), j + 1);
        for (k, cell) in row.iter().skip(4).enumerate() {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            let exact = sign * ((j + 1) * (k + 1)) as f64;
            assert!(
                (cell.parse::<f64>().unwrap() - exact).abs() < 1e-10,
                "{cell}"
            );
        }
    }
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, &SMALL_INTERVAL.replace(r#", "psd"]"#, "]"));
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["run", config.as_str(), "--output-dir", path_str(&out)];
        if !seed.is_empty() {
            args.extend(["--seed", seed]);
        }
        let r = lab(&args);
        assert_eq!(r.code, EXIT_PASS, "{}", r.stderr);
        sfl_lab::report::numeric_payload(&read_json(&out.join("report.json")))
    };
    let config_seed = run("", "a");
    let same = run("7", "b");
    let other = run("8", "c");
    assert_eq!(config_seed["seed"], 7);
    assert_eq!(other["seed"], 8);
    assert_eq!(config_seed["suites"], same["suites"]);
    assert_ne!(config_seed["suites"], other["suites"]);
}

#[test]
fn randomized_suite_without_seed_is_rejected() {
    let dir = TempDir::new().unwrap();
    let config = write_config(&dir, &SMALL_INTERVAL.replace("seed = 7\n", ""));
    let r = lab(&["run", &config, "--output-dir", path_str(dir.path())]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("seed"), "{}", r.stderr);
}
