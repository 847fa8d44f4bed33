//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p spectral-fields-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use spectral_fields::rng::stream_rng;
use spectral_fields::spectral::check_domination;
use spectral_fields::verification::{
    estimate_holder_exponent, pilot_radii, verify_anderson_shift, verify_anderson_sum, verify_bernoulli_stub,
    verify_comparison, verify_coupling_law,
};
use spectral_fields::{
    covariance_matrix, increment_covariance, CovarianceMatrix, DominationCertificate, ExactSampler, FrequencyGrid,
    MCConfig, Modulation, NormFunctional, SpatialGrid, SpectralDensity, SpectralSynthesizer, Verdict,
};

type Outcome = Result<String, String>;
type Files = Vec<(PathBuf, Vec<u8>)>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn line_config(replicas: usize, seed: u64, radii: Vec<f64>, points: usize) -> MCConfig {
    MCConfig::new(
        replicas,
        seed,
        radii,
        NormFunctional::Sup,
        FrequencyGrid::with_defaults(1).unwrap(),
        Arc::new(SpatialGrid::uniform(1, points).unwrap()),
    )
    .unwrap()
}

fn fbm_half() -> SpectralDensity {
    SpectralDensity::fbm(1, 0.5).unwrap()
}

fn perturbed(h: f64) -> SpectralDensity {
    SpectralDensity::perturbed(SpectralDensity::fbm(1, h).unwrap(), Modulation::two_plus_sine_over_three()).unwrap()
}

/// `f_X ≤ C f_Y` with `f_Y = fbm(1/2)` and `f_X = C f_Y (2 + sin|ξ|)/3`.
fn coupling_pair(c: f64, fgrid: &FrequencyGrid) -> DominationCertificate {
    let f_x = if c == 1.0 { perturbed(0.5) } else { SpectralDensity::scaled(c, perturbed(0.5)).unwrap() };
    check_domination(&f_x, &fbm_half(), c, fgrid).unwrap()
}

fn fbm_covariance(h: f64, x: f64, y: f64) -> f64 {
    0.5 * (x.abs().powf(2.0 * h) + y.abs().powf(2.0 * h) - (x - y).abs().powf(2.0 * h))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn brownian_covariance() -> Outcome {
    let fgrid = FrequencyGrid::with_defaults(1).unwrap();
    let f = SpectralDensity::brownian();
    let xs = [0.25, 0.5, 0.75, 1.0];
    let (worst, elapsed) = timed(|| {
        let mut worst = 0.0f64;
        for &x in &xs {
            for &y in &xs {
                let k = increment_covariance(&f, &[x], &[y], &fgrid).unwrap();
                worst = worst.max((k - x.min(y)).abs() / x.min(y));
            }
        }
        worst
    });
    check(
        worst <= 0.01 && elapsed < Duration::from_secs(5),
        format!("max relative error {worst:.2e} (limit 1e-2), {:.2} s (limit 5 s)", elapsed.as_secs_f64()),
    )
}

fn fbm_covariance_entries() -> Outcome {
    let fgrid = FrequencyGrid::with_defaults(1).unwrap();
    let points = vec![vec![0.5], vec![1.0]];
    let mut worst = 0.0f64;
    for h in [0.3, 0.7] {
        let m = covariance_matrix(&SpectralDensity::fbm(1, h).unwrap(), &points, &fgrid).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let exact = fbm_covariance(h, points[i][0], points[j][0]);
                worst = worst.max((m.get(i, j) - exact).abs() / exact);
            }
        }
    }
    check(worst <= 0.02, format!("max relative error {worst:.2e} (limit 2e-2)"))
}

/// Largest `|Ê[u_i u_j] - K_ij| / SE` over all entries.
fn max_z(samples: &[Vec<f64>], target: &CovarianceMatrix) -> f64 {
    let p = target.len();
    let n = samples.len() as f64;
    let mut worst = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            let (mut s, mut s2) = (0.0, 0.0);
            for v in samples {
                let q = v[i] * v[j];
                s += q;
                s2 += q * q;
            }
            let mean = s / n;
            let se = ((s2 / n - mean * mean).max(0.0) / (n - 1.0)).sqrt();
            let dev = (mean - target.get(i, j)).abs();
            if se > 0.0 {
                worst = worst.max(dev / se);
            } else if dev > 0.0 {
                return f64::INFINITY;
            }
        }
    }
    worst
}

fn synthesizer_equivalence() -> Outcome {
    let fgrid = FrequencyGrid::with_defaults(1).unwrap();
    let grid = Arc::new(SpatialGrid::uniform(1, 8).unwrap());
    let f = perturbed(0.35);
    let ((zs, ze), elapsed) = timed(|| {
        let cov = covariance_matrix(&f, &grid.points(), &fgrid).unwrap();
        let synth = SpectralSynthesizer::new(&f, &fgrid, grid.clone()).unwrap();
        let exact = ExactSampler::new(&cov).unwrap();
        let a: Vec<Vec<f64>> = (0..20_000).map(|r| synth.sample(0, r).values).collect();
        let b: Vec<Vec<f64>> = (0..20_000).map(|r| exact.sample(0, r).values).collect();
        (max_z(&a, &cov), max_z(&b, &cov))
    });
    check(
        zs <= 3.0 && ze <= 3.0 && elapsed < Duration::from_secs(60),
        format!("max z spectral {zs:.2}, exact {ze:.2} (limit 3), {:.1} s (limit 60 s)", elapsed.as_secs_f64()),
    )
}

fn coupling_law() -> Outcome {
    let cfg = line_config(5_000, 12, vec![1.0], 8);
    let mut parts = Vec::new();
    let mut ok = true;
    for c in [1.0, 3.0] {
        let report = verify_coupling_law(&coupling_pair(c, &cfg.frequency_grid), &cfg).unwrap();
        let cross_max = report.cross_pairs.iter().map(|p| p.z).fold(0.0, f64::max);
        ok &= report.passes() && cross_max <= 3.0;
        parts.push(format!("C={c}: match {:.2} (limit 1), cross {:.2} (limit 3)", report.covariance_match, cross_max));
    }
    check(ok, parts.join("; "))
}

const RADII: [f64; 3] = [0.25, 0.5, 1.0];

fn anderson_sum() -> Outcome {
    let fgrid = FrequencyGrid::with_defaults(1).unwrap();
    let cert = coupling_pair(1.0, &fgrid);
    let difference = spectral_fields::difference_density(cert.f_y(), cert.f_x(), 1.0, &cert).unwrap();
    let (mut violated, mut not_consistent) = (0, 0);
    for seed in 0..20 {
        let cfg = line_config(10_000, seed, RADII.to_vec(), 65);
        let report = verify_anderson_sum(cert.f_x(), &difference, &cfg).unwrap();
        violated += report.rows.iter().filter(|r| r.verdict == Verdict::Violated).count();
        not_consistent += report.rows.iter().filter(|r| r.verdict != Verdict::Consistent).count();
    }
    check(
        violated == 0 && not_consistent == 0,
        format!("20 seeds x 3 radii: {violated} violated, {not_consistent} not consistent"),
    )
}

fn anderson_shift() -> Outcome {
    let (mut violated, mut not_consistent) = (0, 0);
    for seed in 0..20 {
        let cfg = line_config(10_000, seed, RADII.to_vec(), 65);
        let grid = cfg.spatial_grid.clone();
        let shift: Vec<f64> = (0..grid.len()).map(|i| 0.5 * grid.point(i)[0]).collect();
        let report = verify_anderson_shift(&SpectralDensity::brownian(), &shift, &cfg).unwrap();
        violated += report.rows.iter().filter(|r| r.verdict == Verdict::Violated).count();
        not_consistent += report.rows.iter().filter(|r| r.verdict != Verdict::Consistent).count();
    }
    check(
        violated == 0 && not_consistent == 0,
        format!("20 seeds x 3 radii: {violated} violated, {not_consistent} not consistent"),
    )
}

fn comparison() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for c in [1.0, 3.0] {
        let base = line_config(10_000, 8, Vec::new(), 65);
        let cert = coupling_pair(c, &base.frequency_grid);
        let radii = pilot_radii(&cert, &base, &[0.05, 0.275, 0.5, 0.725, 0.95]).unwrap();
        let cfg = MCConfig { radii: radii.clone(), ..base };
        let report = verify_comparison(&cert, &cfg).unwrap();
        ok &= report.rows.len() == 5 && report.verdict() == Verdict::Consistent;
        let radii: Vec<String> = radii.iter().map(|r| format!("{r:.3}")).collect();
        parts.push(format!("C={c}: {} at r = [{}]", report.verdict(), radii.join(", ")));
    }
    check(ok, parts.join("; "))
}

fn hurst() -> Outcome {
    let cfg = line_config(100, 5, vec![1.0], 4096);
    let cases = [
        ("fbm(0.3)", SpectralDensity::fbm(1, 0.3).unwrap(), 0.3),
        ("fbm(0.5)", fbm_half(), 0.5),
        ("fbm(0.7)", SpectralDensity::fbm(1, 0.7).unwrap(), 0.7),
        ("perturbed fbm(0.7)", perturbed(0.7), 0.7),
    ];
    let (results, elapsed) = timed(|| {
        cases.iter().map(|(name, f, h)| (*name, *h, estimate_holder_exponent(f, &cfg).unwrap().estimate)).collect::<Vec<_>>()
    });
    let ok = results.iter().all(|(_, h, est)| (est - h).abs() <= 0.05) && elapsed < Duration::from_secs(300);
    let parts: Vec<String> = results.iter().map(|(name, _, est)| format!("{name} {est:.4}")).collect();
    check(ok, format!("{} (tolerance 0.05), {:.1} s (limit 300 s)", parts.join(", "), elapsed.as_secs_f64()))
}

fn norm_axioms() -> Outcome {
    const SLACK: f64 = 1e-12;
    let fgrid = FrequencyGrid::with_defaults(1).unwrap();
    let grid = Arc::new(SpatialGrid::uniform(1, 65).unwrap());
    let rough = SpectralSynthesizer::new(&SpectralDensity::fbm(1, 0.3).unwrap(), &fgrid, grid.clone()).unwrap();
    let smooth = SpectralSynthesizer::new(&SpectralDensity::fbm(1, 0.8).unwrap(), &fgrid, grid.clone()).unwrap();
    let kinds = [
        NormFunctional::Sup,
        NormFunctional::holder(0.5).unwrap(),
        NormFunctional::holder_with_budget(0.25, 64).unwrap(),
    ];
    let mut failures = Vec::new();
    for (k, norm) in kinds.iter().enumerate() {
        let mut rng = stream_rng(9, k as u64);
        let mut bad = 0;
        for r in 0..1_000u64 {
            let a = rough.sample(k as u64, r).values;
            let b = smooth.sample(k as u64, r).values;
            let lambda: f64 = rng.random_range(-10.0..10.0);
            let t: f64 = rng.random();
            let ev = |v: &[f64]| norm.evaluate(&grid, v);
            let (na, nb) = (ev(&a), ev(&b));
            let scaled: Vec<f64> = a.iter().map(|v| lambda * v).collect();
            let neg: Vec<f64> = a.iter().map(|v| -v).collect();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
            let holds = (ev(&scaled) - lambda.abs() * na).abs() <= SLACK * lambda.abs().max(1.0) * na.max(1.0)
                && (ev(&neg) - na).abs() <= SLACK * na.max(1.0)
                && ev(&sum) <= na + nb + SLACK * (na + nb).max(1.0)
                && ev(&mix) <= na.max(nb) + SLACK * na.max(nb).max(1.0)
                && NormFunctional::Sup.evaluate(&grid, &a) <= na + SLACK * na.max(1.0);
            if !holds {
                bad += 1;
            }
        }
        if bad > 0 {
            failures.push(format!("{norm}: {bad} pairs"));
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("1000 pairs for each of {} norm kinds", kinds.len())
        } else {
            format!("failing {}", failures.join(", "))
        },
    )
}

fn calibration() -> Outcome {
    let count = |p: f64, q: f64| {
        (0..100).filter(|&s| verify_bernoulli_stub(p, q, 10_000, s, 0.99).unwrap().verdict() == Verdict::Violated).count()
    };
    let separated = count(0.6, 0.4);
    let equal = count(0.5, 0.5);
    check(
        separated >= 99 && equal <= 2,
        format!("(0.6, 0.4) violated {separated}/100 (need >= 99); (0.5, 0.5) violated {equal}/100 (need <= 2)"),
    )
}

const DETERMINISM_CONFIGS: [(&str, &str); 7] = [
    (
        "density-check",
        "command = \"density-check\"\nseed = 1\nconstant = \"auto\"\n[density]\nfamily = \"perturbed\"\nbase = { family = \"fbm\", hurst = 0.5 }\n[density_2]\nfamily = \"fbm\"\nhurst = 0.5\n",
    ),
    (
        "simulate",
        "command = \"simulate\"\nseed = 42\nsamples = 3\n[density]\nfamily = \"fbm\"\nhurst = 0.4\ndim = 2\n[spatial_grid]\nn = 9\n",
    ),
    (
        "covariance",
        "command = \"covariance\"\nseed = 3\n[density]\nfamily = \"brownian\"\n[spatial_grid]\nn = 6\n",
    ),
    (
        "verify-anderson",
        "command = \"verify-anderson\"\nseed = 2024\n[density]\nfamily = \"brownian\"\n[density_2]\nfamily = \"scalar-multiple\"\nfactor = 0.25\nbase = { family = \"fbm\", hurst = 0.5 }\n[monte_carlo]\nreplicas = 1500\n[norm]\nkind = \"holder\"\nalpha = 0.3\n",
    ),
    (
        "verify-coupling",
        "command = \"verify-coupling\"\nseed = 7\nconstant = \"auto\"\n[f_x]\nfamily = \"perturbed\"\nbase = { family = \"fbm\", hurst = 0.5 }\n[f_y]\nfamily = \"fbm\"\nhurst = 0.5\n[monte_carlo]\nreplicas = 700\n",
    ),
    (
        "verify-comparison",
        "command = \"verify-comparison\"\nseed = 11\nconstant = 1.0\n[f_x]\nfamily = \"perturbed\"\nbase = { family = \"fbm\", hurst = 0.5 }\n[f_y]\nfamily = \"fbm\"\nhurst = 0.5\n[monte_carlo]\nreplicas = 1500\n",
    ),
    (
        "estimate-hurst",
        "command = \"estimate-hurst\"\nseed = 5\n[density]\nfamily = \"fbm\"\nhurst = 0.6\n[spatial_grid]\nn = 512\n[monte_carlo]\nreplicas = 300\n",
    ),
];

fn run_cli(config: &Path, out: &Path, threads: usize) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_spectral-fields"))
        .arg("--config")
        .arg(config)
        .arg("--output")
        .arg(out)
        .arg("--threads")
        .arg(threads.to_string())
        .status()
        .map_err(|e| e.to_string())?;
    status.code().ok_or_else(|| "terminated by signal".to_string())
}

fn directory_contents(dir: &Path) -> Files {
    let mut files: Files = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (PathBuf::from(p.file_name().unwrap()), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut mismatched = Vec::new();
    let mut files = 0;
    for (name, text) in DETERMINISM_CONFIGS {
        let config = tmp.path().join(format!("{name}.toml"));
        std::fs::write(&config, text).map_err(|e| e.to_string())?;
        let runs: Vec<(i32, Files)> = [(1, "a"), (1, "b"), (4, "c")]
            .iter()
            .map(|(threads, tag)| {
                let out = tmp.path().join(format!("{name}-{tag}"));
                let code = run_cli(&config, &out, *threads)?;
                Ok((code, directory_contents(&out)))
            })
            .collect::<Result<_, String>>()?;
        if runs[0].0 == 3 {
            return Err(format!("{name} exited with a runtime error"));
        }
        files += runs[0].1.len();
        if runs.iter().any(|r| r != &runs[0]) || runs[0].1.is_empty() {
            mismatched.push(name);
        }
    }
    check(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{} commands, {files} files identical across reruns and --threads 1/4", DETERMINISM_CONFIGS.len())
        } else {
            format!("differing output for {}", mismatched.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("Brownian covariance oracle", brownian_covariance),
        ("fBm covariance oracle", fbm_covariance_entries),
        ("synthesizer and exact sampler match quadrature covariance", synthesizer_equivalence),
        ("coupling law", coupling_law),
        ("ball probability under independent sums", anderson_sum),
        ("ball probability under deterministic shifts", anderson_shift),
        ("comparison of ball probabilities", comparison),
        ("Hurst exponent transfer", hurst),
        ("norm axioms", norm_axioms),
        ("verdict engine calibration", calibration),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = criterion();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
