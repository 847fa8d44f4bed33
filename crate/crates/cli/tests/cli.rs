use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use spectral_fields::verification::verify_bernoulli_stub;
use spectral_fields::Verdict;
use spectral_fields_cli::{exit_status, parse_config};

fn run(config: &str, out: &Path, extra: &[&str]) -> Output {
    let path = out.with_extension("toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_spectral-fields"))
        .arg("--config")
        .arg(&path)
        .arg("--output")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn summary(out: &Path) -> Vec<(String, String)> {
    fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn value<'a>(pairs: &'a [(String, String)], key: &str) -> &'a str {
    &pairs.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no `{key}`")).1
}

fn example_configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut files: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
}

#[test]
fn every_example_config_parses() {
    let files = example_configs();
    assert_eq!(files.len(), 7);
    for file in files {
        let text = fs::read_to_string(&file).unwrap();
        if let Err(e) = parse_config(&text) {
            panic!("{}: {e:?}", file.display());
        }
    }
}

#[test]
fn simulate_writes_reproducible_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "command = \"simulate\"\nseed = 42\nsamples = 3\n[density]\nfamily = \"brownian\"\n[spatial_grid]\nn = 17\n";
    let a = run(config, &tmp.path().join("a"), &["--threads", "1"]);
    let b = run(config, &tmp.path().join("b"), &["--threads", "2"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    for k in 0..3 {
        let name = format!("sample_{k:04}.csv");
        let first = fs::read(tmp.path().join("a").join(&name)).unwrap();
        assert_eq!(first, fs::read(tmp.path().join("b").join(&name)).unwrap());
        let text = String::from_utf8(first).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x1,value"));
        assert_eq!(lines.next(), Some("0,0"));
        assert_eq!(lines.count(), 16);
        let meta = fs::read_to_string(tmp.path().join("a").join(format!("{name}.meta"))).unwrap();
        assert!(meta.contains("seed=42\n") && meta.contains("config_sha256="));
    }
    let s0 = fs::read(tmp.path().join("a/sample_0000.csv")).unwrap();
    let s1 = fs::read(tmp.path().join("a/sample_0001.csv")).unwrap();
    assert_ne!(s0, s1);
}

#[test]
fn adding_a_zero_field_leaves_ball_probabilities_unchanged() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("zero");
    let config = "command = \"verify-anderson\"\nseed = 3\n[density]\nfamily = \"fbm\"\nhurst = 0.5\n\
                  [density_2]\nfamily = \"zero\"\n[monte_carlo]\nreplicas = 500\n";
    let result = run(config, &out, &[]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));
    let s = summary(&out);
    assert_eq!(value(&s, "verdict"), "consistent");
    for i in 0..3 {
        assert_eq!(value(&s, &format!("p_lhs_{i}")), value(&s, &format!("p_rhs_{i}")));
    }
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 4);
}

#[test]
fn coupling_check_passes_and_reports_every_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("coupling");
    let config = "command = \"verify-coupling\"\nseed = 7\nconstant = 1.0\n[f_x]\nfamily = \"perturbed\"\n\
                  base = { family = \"fbm\", hurst = 0.5 }\n[f_y]\nfamily = \"fbm\"\nhurst = 0.5\n\
                  [monte_carlo]\nreplicas = 2000\n";
    let result = run(config, &out, &[]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));
    let s = summary(&out);
    assert_eq!(value(&s, "covariance_check"), "pass");
    assert_eq!(value(&s, "orthogonality_check"), "pass");
    let pairs = fs::read_to_string(out.join("coupling_pairs.csv")).unwrap();
    // Seven non-origin points: unordered pairs for the symmetric covariance,
    // ordered pairs for the cross moments.
    assert_eq!(pairs.lines().filter(|l| l.starts_with("covariance,")).count(), 28);
    assert_eq!(pairs.lines().filter(|l| l.starts_with("cross,")).count(), 49);
}

#[test]
fn domination_failure_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("check");
    let config = "command = \"density-check\"\nseed = 1\nconstant = 0.5\n[density]\nfamily = \"fbm\"\nhurst = 0.5\n\
                  [density_2]\nfamily = \"perturbed\"\nbase = { family = \"fbm\", hurst = 0.5 }\n";
    let result = run(config, &out, &[]);
    assert_eq!(result.status.code(), Some(1));
    assert_eq!(value(&summary(&out), "domination"), "violated");
}

#[test]
fn configuration_errors_exit_with_status_three_and_a_location() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let config = "command = \"simulate\"\nseed = 1\n[density]\nfamily = \"fbm\"\nhurst = 1.5\n";
    let result = run(config, &out, &[]);
    assert_eq!(result.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains(":5:9:"), "{stderr}");
    assert!(!out.exists());

    let missing = Command::new(env!("CARGO_BIN_EXE_spectral-fields"))
        .args(["--config", "/nonexistent/run.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn exit_status_follows_the_worst_verdict() {
    let verdict = |p, q| verify_bernoulli_stub(p, q, 10_000, 1, 0.99).unwrap().verdict();
    let violated = verdict(0.6, 0.4);
    let consistent = verdict(0.4, 0.6);
    assert_eq!(violated, Verdict::Violated);
    assert_eq!(consistent, Verdict::Consistent);
    assert_eq!(exit_status([consistent]), 0);
    assert_eq!(exit_status([consistent, violated]), 1);
    assert_eq!(exit_status([consistent, Verdict::Underpowered]), 2);
    assert_eq!(exit_status([Verdict::Underpowered, violated]), 1);
    assert_eq!(exit_status([]), 0);
}
