//! Command execution.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use spectral_fields::spectral::{annulus_contributions, equivalence_constants};
use spectral_fields::verification::{
    pilot_radii, verify_anderson_shift, verify_anderson_sum, verify_comparison, verify_coupling_law, InequalityReport,
};
use spectral_fields::{
    check_admissible, check_domination, covariance_matrix, estimate_min_c, Admissibility, DominationCertificate,
    DominationVerdict, ExactSampler, FieldSample, MCConfig, SpectralDensity, SpectralSynthesizer, Verdict,
};

use crate::config::{Command, ConstantSpec, RadiiSpec, RunConfig, SampleMethod};
use crate::output::{kv, num, Artifacts};

pub const EXIT_RUNTIME_ERROR: i32 = 3;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
}

/// Exit status of a run from its verdicts: 1 if any is violated, else 2 if
/// any is underpowered, else 0.
pub fn exit_status(verdicts: impl IntoIterator<Item = Verdict>) -> i32 {
    Verdict::worst(verdicts).exit_code()
}

fn settings(cfg: &RunConfig) -> Vec<(String, String)> {
    let fg = &cfg.frequency_grid;
    let mut s = vec![
        kv("frequency_grid", fg),
        kv("frequency_grid.j_lo", fg.j_lo()),
        kv("frequency_grid.j_hi", fg.j_hi()),
        kv("frequency_grid.nodes", fg.nodes_per_annulus()),
        kv("spatial_grid", &cfg.spatial_grid),
        kv("spatial_grid.points", cfg.spatial_grid.len()),
    ];
    for (i, d) in cfg.command.densities().iter().enumerate() {
        s.push(kv(format!("density.{}", i + 1), d));
    }
    let uses_mc = !matches!(
        cfg.command,
        Command::DensityCheck { .. } | Command::Simulate { .. } | Command::Covariance { .. }
    );
    if uses_mc {
        s.push(kv("monte_carlo.replicas", cfg.replicas));
        s.push(kv("monte_carlo.confidence", num(cfg.confidence)));
        match &cfg.radii {
            RadiiSpec::Fixed(r) => s.push(kv("monte_carlo.radii", join(r))),
            RadiiSpec::Quantiles(q) => s.push(kv("monte_carlo.quantiles", join(q))),
        }
        s.push(kv("norm", cfg.norm));
    }
    s
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

fn mc_config(cfg: &RunConfig, radii: Vec<f64>) -> Result<MCConfig> {
    Ok(MCConfig::new(
        cfg.replicas,
        cfg.seed,
        radii,
        cfg.norm,
        cfg.frequency_grid.clone(),
        cfg.spatial_grid.clone(),
    )?
    .with_confidence(cfg.confidence)?)
}

fn fixed_radii(cfg: &RunConfig) -> Result<Vec<f64>> {
    match &cfg.radii {
        RadiiSpec::Fixed(r) => Ok(r.clone()),
        RadiiSpec::Quantiles(_) => bail!("quantile radii are only available for verify-comparison"),
    }
}

/// Runs one configured command, writing every artifact into `out`.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    let mut art = Artifacts::create(out, cfg.kind.name(), cfg.seed, &cfg.source)?;
    art.metadata(&settings(cfg), &cfg.source)?;
    let exit_code = match &cfg.command {
        Command::DensityCheck { density, other, constant } => density_check(cfg, &mut art, density, other.as_ref(), *constant)?,
        Command::Simulate { density, samples, method } => simulate(cfg, &mut art, density, *samples, *method)?,
        Command::Covariance { density } => covariance(cfg, &mut art, density)?,
        Command::VerifyAndersonSum { first, second } => {
            let report = verify_anderson_sum(first, second, &mc_config(cfg, fixed_radii(cfg)?)?)?;
            inequality(&mut art, &report, &[])?
        }
        Command::VerifyAndersonShift { density, shift } => {
            let values = shift.values(&cfg.spatial_grid);
            let report = verify_anderson_shift(density, &values, &mc_config(cfg, fixed_radii(cfg)?)?)?;
            inequality(&mut art, &report, &[kv("shift", shift)])?
        }
        Command::VerifyCoupling { f_x, f_y, constant } => coupling(cfg, &mut art, f_x, f_y, *constant)?,
        Command::VerifyComparison { f_x, f_y, constant } => comparison(cfg, &mut art, f_x, f_y, *constant)?,
        Command::EstimateHurst { density } => hurst(cfg, &mut art, density)?,
    };
    info!("{} finished in {:.2?} with exit status {exit_code}", cfg.kind, started.elapsed());
    Ok(RunOutcome { exit_code, files: art.into_files() })
}

fn admissibility_label(a: Admissibility) -> &'static str {
    match a {
        Admissibility::Admissible(_) => "admissible",
        Admissibility::Inadmissible => "inadmissible",
        Admissibility::Inconclusive => "inconclusive",
    }
}

fn resolve_constant(cfg: &RunConfig, f_x: &SpectralDensity, f_y: &SpectralDensity, spec: ConstantSpec) -> Result<f64> {
    match spec {
        ConstantSpec::Value(c) => Ok(c),
        ConstantSpec::Auto => {
            let c = estimate_min_c(f_x, f_y, &cfg.frequency_grid)?;
            if !c.is_finite() || c <= 0.0 {
                bail!("no finite positive constant C with f_X ≤ C f_Y on {} (estimate {c})", cfg.frequency_grid);
            }
            info!("estimated domination constant C = {c}");
            Ok(c)
        }
    }
}

fn certificate(cfg: &RunConfig, f_x: &SpectralDensity, f_y: &SpectralDensity, spec: ConstantSpec) -> Result<DominationCertificate> {
    let c = resolve_constant(cfg, f_x, f_y, spec)?;
    let cert = check_domination(f_x, f_y, c, &cfg.frequency_grid)?;
    if let DominationVerdict::ViolatedAt { xi, f_x: fx, c_f_y } = cert.verdict() {
        bail!("f_X ≤ C f_Y fails for C = {c} at xi = {xi:?}: f_X = {fx}, C f_Y = {c_f_y}");
    }
    Ok(cert)
}

fn density_check(
    cfg: &RunConfig,
    art: &mut Artifacts,
    density: &SpectralDensity,
    other: Option<&SpectralDensity>,
    constant: Option<ConstantSpec>,
) -> Result<i32> {
    let grid = &cfg.frequency_grid;
    let densities: Vec<&SpectralDensity> = std::iter::once(density).chain(other).collect();
    let contributions: Vec<Vec<f64>> = densities.iter().map(|d| annulus_contributions(d, grid)).collect();
    let mut header = vec!["annulus", "j", "lo", "hi", "density_1"];
    if other.is_some() {
        header.push("density_2");
    }
    let rows: Vec<Vec<String>> = (0..grid.annuli().len())
        .map(|a| {
            let j = grid.annulus_exponent(a);
            let mut row = vec![a.to_string(), j.to_string(), num(2f64.powi(j)), num(2f64.powi(j + 1))];
            row.extend(contributions.iter().map(|c| num(c[a])));
            row
        })
        .collect();
    art.csv("annuli.csv", &header, &rows, &[kv("frequency_grid", grid)])?;

    let mut failed = false;
    let mut summary = Vec::new();
    for (i, d) in densities.iter().enumerate() {
        let a = check_admissible(d, grid);
        failed |= a == Admissibility::Inadmissible;
        summary.push(kv(format!("density_{}", i + 1), d));
        summary.push(kv(format!("admissibility_{}", i + 1), admissibility_label(a)));
        if let Admissibility::Admissible(total) = a {
            summary.push(kv(format!("weighted_integral_{}", i + 1), num(total)));
        }
    }
    if let Some(other) = other {
        let (forward, backward) = equivalence_constants(density, other, grid)?;
        summary.push(kv("min_constant", num(forward)));
        summary.push(kv("reverse_constant", num(backward)));
        summary.push(kv("equivalent", forward.is_finite() && backward.is_finite()));
        if let Some(spec) = constant {
            let c = match spec {
                ConstantSpec::Value(c) => Some(c),
                ConstantSpec::Auto => forward.is_finite().then_some(forward),
            };
            match c {
                Some(c) if c > 0.0 => {
                    let cert = check_domination(density, other, c, grid)?;
                    summary.push(kv("constant", num(c)));
                    summary.push(kv("domination", if cert.holds() { "holds" } else { "violated" }));
                    if let DominationVerdict::ViolatedAt { xi, f_x, c_f_y } = cert.verdict() {
                        summary.push(kv("violated_at", join(xi)));
                        summary.push(kv("violated_f_x", num(*f_x)));
                        summary.push(kv("violated_c_f_y", num(*c_f_y)));
                        failed = true;
                    }
                }
                _ => {
                    summary.push(kv("constant", "none"));
                    summary.push(kv("domination", "violated"));
                    failed = true;
                }
            }
        }
    }
    let exit = if failed { 1 } else { 0 };
    summary.push(kv("exit_status", exit));
    art.summary(&summary)?;
    Ok(exit)
}

fn sample_rows(sample: &FieldSample) -> Vec<Vec<String>> {
    (0..sample.grid.len())
        .map(|i| {
            let mut row: Vec<String> = sample.grid.point(i).iter().map(|x| num(*x)).collect();
            row.push(num(sample.values[i]));
            row
        })
        .collect()
}

fn coordinate_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|a| format!("x{a}")).collect()
}

fn simulate(cfg: &RunConfig, art: &mut Artifacts, density: &SpectralDensity, samples: usize, method: SampleMethod) -> Result<i32> {
    let grid = cfg.spatial_grid.clone();
    let draw: Box<dyn Fn(u64) -> FieldSample> = match method {
        SampleMethod::Spectral => {
            if grid.per_axis().is_none() {
                bail!("spectral simulation needs a uniform spatial grid (`n`), not a point list");
            }
            let synth = SpectralSynthesizer::new(density, &cfg.frequency_grid, grid.clone())?;
            Box::new(move |s| synth.sample(cfg.seed, s))
        }
        SampleMethod::Exact => {
            let m = covariance_matrix(density, &grid.points(), &cfg.frequency_grid)?;
            let sampler = ExactSampler::new(&m)?;
            Box::new(move |s| sampler.sample(cfg.seed, s))
        }
    };
    let mut header = coordinate_header(grid.dim());
    header.push("value".to_string());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    for s in 0..samples as u64 {
        let sample = draw(s);
        if sample.values.iter().any(|v| !v.is_finite()) {
            bail!("sample {s} contains non-finite values");
        }
        let extra = [
            kv("stream", s),
            kv("method", sample.method),
            kv("density", &sample.density),
            kv("frequency_grid", &cfg.frequency_grid),
            kv("spatial_grid", &grid),
        ];
        art.csv(&format!("sample_{s:04}.csv"), &header, &sample_rows(&sample), &extra)?;
    }
    let method_name = match method {
        SampleMethod::Spectral => "spectral",
        SampleMethod::Exact => "exact",
    };
    art.summary(&[kv("samples", samples), kv("method", method_name), kv("density", density), kv("exit_status", 0)])?;
    Ok(0)
}

fn covariance(cfg: &RunConfig, art: &mut Artifacts, density: &SpectralDensity) -> Result<i32> {
    let points = cfg.spatial_grid.points();
    let m = covariance_matrix(density, &points, &cfg.frequency_grid)?;
    let dim = m.dim();
    let mut header = vec!["i".to_string(), "j".to_string()];
    header.extend((1..=dim).map(|a| format!("x{a}")));
    header.extend((1..=dim).map(|a| format!("y{a}")));
    header.push("covariance".to_string());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(m.len() * m.len());
    for i in 0..m.len() {
        for j in 0..m.len() {
            let mut row = vec![i.to_string(), j.to_string()];
            row.extend(points[i].iter().map(|v| num(*v)));
            row.extend(points[j].iter().map(|v| num(*v)));
            row.push(num(m.get(i, j)));
            rows.push(row);
        }
    }
    art.csv("covariance.csv", &header, &rows, &[kv("density", density), kv("frequency_grid", &cfg.frequency_grid)])?;
    let psd = m.is_psd_within_tolerance();
    if !psd {
        warn!("covariance matrix is not positive semidefinite within tolerance");
    }
    art.summary(&[
        kv("density", density),
        kv("points", m.len()),
        kv("max_diagonal", num(m.max_diagonal())),
        kv("min_eigenvalue", num(m.min_eigenvalue())),
        kv("psd_within_tolerance", psd),
        kv("exit_status", 0),
    ])?;
    Ok(0)
}

const REPORT_HEADER: [&str; 12] = [
    "radius", "lhs_count", "rhs_count", "p_lhs", "p_rhs", "lhs_lower", "lhs_upper", "rhs_lower", "rhs_upper", "margin",
    "verdict", "replicas",
];

fn inequality(art: &mut Artifacts, report: &InequalityReport, extra: &[(String, String)]) -> Result<i32> {
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.radius),
                r.lhs_count.to_string(),
                r.rhs_count.to_string(),
                num(r.p_lhs),
                num(r.p_rhs),
                num(r.lhs_lower),
                num(r.lhs_upper),
                num(r.rhs_lower),
                num(r.rhs_upper),
                num(r.margin),
                r.verdict.to_string(),
                report.replicas.to_string(),
            ]
        })
        .collect();
    let mut meta = vec![kv("inequality", &report.inequality), kv("confidence", num(report.confidence))];
    meta.extend_from_slice(extra);
    art.csv("report.csv", &REPORT_HEADER, &rows, &meta)?;
    info!("{}: {} in {:.2?}", report.inequality, report.verdict(), report.runtime);
    let exit = exit_status(report.rows.iter().map(|r| r.verdict));
    let mut summary = vec![kv("inequality", &report.inequality), kv("replicas", report.replicas), kv("verdict", report.verdict())];
    summary.extend_from_slice(extra);
    for (i, r) in report.rows.iter().enumerate() {
        summary.push(kv(format!("radius_{i}"), num(r.radius)));
        summary.push(kv(format!("p_lhs_{i}"), num(r.p_lhs)));
        summary.push(kv(format!("p_rhs_{i}"), num(r.p_rhs)));
        summary.push(kv(format!("margin_{i}"), num(r.margin)));
        summary.push(kv(format!("verdict_{i}"), r.verdict));
    }
    summary.push(kv("exit_status", exit));
    art.summary(&summary)?;
    Ok(exit)
}

fn coupling(cfg: &RunConfig, art: &mut Artifacts, f_x: &SpectralDensity, f_y: &SpectralDensity, spec: ConstantSpec) -> Result<i32> {
    let cert = certificate(cfg, f_x, f_y, spec)?;
    let report = verify_coupling_law(&cert, &mc_config(cfg, Vec::new())?)?;
    let rows: Vec<Vec<String>> = [("covariance", &report.covariance_pairs), ("cross", &report.cross_pairs)]
        .iter()
        .flat_map(|(name, pairs)| {
            pairs.iter().map(move |p| {
                vec![
                    name.to_string(),
                    p.i.to_string(),
                    p.j.to_string(),
                    num(p.empirical),
                    num(p.reference),
                    num(p.standard_error),
                    num(p.z),
                ]
            })
        })
        .collect();
    art.csv(
        "coupling_pairs.csv",
        &["statistic", "i", "j", "empirical", "reference", "standard_error", "z"],
        &rows,
        &[kv("f_x", f_x), kv("f_y", f_y), kv("constant", num(cert.constant())), kv("replicas", report.replicas)],
    )?;
    info!(
        "coupling law: covariance match {:.3}, cross orthogonality {:.3} in {:.2?}",
        report.covariance_match, report.cross_orthogonality, report.runtime
    );
    let exit = if report.passes() { 0 } else { 1 };
    let pass = |ok: bool| if ok { "pass" } else { "fail" };
    art.summary(&[
        kv("f_x", f_x),
        kv("f_y", f_y),
        kv("constant", num(cert.constant())),
        kv("replicas", report.replicas),
        kv("covariance_match", num(report.covariance_match)),
        kv("covariance_check", pass(report.covariance_passes())),
        kv("cross_orthogonality", num(report.cross_orthogonality)),
        kv("orthogonality_check", pass(report.orthogonality_passes())),
        kv("exit_status", exit),
    ])?;
    Ok(exit)
}

fn comparison(cfg: &RunConfig, art: &mut Artifacts, f_x: &SpectralDensity, f_y: &SpectralDensity, spec: ConstantSpec) -> Result<i32> {
    let cert = certificate(cfg, f_x, f_y, spec)?;
    let radii = match &cfg.radii {
        RadiiSpec::Fixed(r) => r.clone(),
        RadiiSpec::Quantiles(q) => {
            let r = pilot_radii(&cert, &mc_config(cfg, Vec::new())?, q).context("pilot run for radii")?;
            info!("pilot radii {r:?}");
            r
        }
    };
    let report = verify_comparison(&cert, &mc_config(cfg, radii)?)?;
    inequality(art, &report, &[kv("constant", num(cert.constant()))])
}

fn hurst(cfg: &RunConfig, art: &mut Artifacts, density: &SpectralDensity) -> Result<i32> {
    let est = spectral_fields::verification::estimate_holder_exponent(density, &mc_config(cfg, Vec::new())?)?;
    let rows: Vec<Vec<String>> = est.per_replica.iter().enumerate().map(|(r, h)| vec![r.to_string(), num(*h)]).collect();
    art.csv("hurst.csv", &["replica", "estimate"], &rows, &[kv("density", density), kv("spatial_grid", &cfg.spatial_grid)])?;
    info!("Hurst estimate {:.4} in {:.2?}", est.estimate, est.runtime);
    let mut summary = vec![
        kv("density", density),
        kv("replicas", est.per_replica.len()),
        kv("estimate", num(est.estimate)),
        kv("lower", num(est.lower)),
        kv("upper", num(est.upper)),
        kv("standard_error", num(est.standard_error)),
    ];
    if let Some(h) = density.hurst() {
        summary.push(kv("nominal_hurst", num(h)));
    }
    summary.push(kv("exit_status", 0));
    art.summary(&summary)?;
    Ok(0)
}
