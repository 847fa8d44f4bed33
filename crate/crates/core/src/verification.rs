//! Monte Carlo ball probabilities and statistical checks of the Anderson-type
//! inequalities, the coupling law and the comparison inequality.
//!
//! Every inequality is of the form `P(lhs ≤ r) ≤ P(rhs ≤ r)`. For each radius
//! the verdict uses one-sided Clopper–Pearson bounds at level `α / m`, with
//! `α = 1 - confidence` and `m` the number of radii:
//!
//! * violated: `lower(lhs) > upper(rhs)`;
//! * consistent: `p̂_lhs ≤ upper(rhs)`;
//! * underpowered: anything else.
//!
//! Replica `r` draws its first field from stream `2r` and its second from
//! `2r + 1`. Replicas run in parallel and are collected in index order, so
//! reports depend only on the configuration and the seed.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::banach_norms::NormFunctional;
use crate::covariance::covariance_matrix;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::rng::{first_stream, second_stream, stream_rng};
use crate::spectral::{DominationCertificate, SpectralDensity};
use crate::stats::{clopper_pearson_interval, clopper_pearson_lower, clopper_pearson_upper, normal_quantile};
use crate::synthesis::{CouplingSampler, SpatialGrid, SpectralSynthesizer};

pub const DEFAULT_CONFIDENCE: f64 = 0.99;
pub const MIN_REPLICAS: usize = 100;

/// Lags, in grid steps, of the quadratic-variation Hurst estimator.
pub const HURST_LAGS: [usize; 4] = [4, 8, 16, 32];
pub const HURST_MIN_POINTS: usize = 256;

/// Replicas handled per accumulation block in moment reductions.
const BLOCK: usize = 256;

#[derive(Debug, Clone)]
pub struct MCConfig {
    pub replicas: usize,
    pub seed: u64,
    pub confidence: f64,
    pub radii: Vec<f64>,
    pub norm: NormFunctional,
    pub frequency_grid: FrequencyGrid,
    pub spatial_grid: Arc<SpatialGrid>,
}

impl MCConfig {
    pub fn new(
        replicas: usize,
        seed: u64,
        radii: Vec<f64>,
        norm: NormFunctional,
        frequency_grid: FrequencyGrid,
        spatial_grid: Arc<SpatialGrid>,
    ) -> Result<Self> {
        let cfg = MCConfig {
            replicas,
            seed,
            confidence: DEFAULT_CONFIDENCE,
            radii,
            norm,
            frequency_grid,
            spatial_grid,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_confidence(mut self, confidence: f64) -> Result<Self> {
        self.confidence = confidence;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas < MIN_REPLICAS {
            return Err(Error::invalid("replicas", format!("need at least {MIN_REPLICAS}, got {}", self.replicas)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::invalid("confidence", format!("must lie in (0,1), got {}", self.confidence)));
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("radii", "radii must be positive and finite"));
        }
        if self.radii.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("radii", "radii must be sorted increasingly"));
        }
        if self.frequency_grid.dim() != self.spatial_grid.dim() {
            return Err(Error::DimensionMismatch { left: self.frequency_grid.dim(), right: self.spatial_grid.dim() });
        }
        Ok(())
    }

    /// Level of each one-sided bound after the Bonferroni split over radii.
    pub fn per_bound_alpha(&self) -> f64 {
        (1.0 - self.confidence) / self.radii.len().max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Consistent,
    Underpowered,
    Violated,
}

impl Verdict {
    /// Process exit status for a run whose worst verdict is `self`.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Consistent => 0,
            Verdict::Violated => 1,
            Verdict::Underpowered => 2,
        }
    }

    pub fn worst(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        verdicts.into_iter().max().unwrap_or(Verdict::Consistent)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Underpowered => "underpowered",
            Verdict::Violated => "violated",
        })
    }
}

/// `P(‖X‖ ≤ r)` estimate with a two-sided exact interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BallEstimate {
    pub radius: f64,
    pub successes: u64,
    pub replicas: u64,
    pub p_hat: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BallEstimate {
    fn from_count(radius: f64, successes: u64, replicas: u64, confidence: f64) -> Self {
        let (lower, upper) = clopper_pearson_interval(successes, replicas, confidence);
        BallEstimate { radius, successes, replicas, p_hat: successes as f64 / replicas as f64, lower, upper }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusRow {
    pub radius: f64,
    pub lhs_count: u64,
    pub rhs_count: u64,
    pub p_lhs: f64,
    pub p_rhs: f64,
    pub lhs_lower: f64,
    pub lhs_upper: f64,
    pub rhs_lower: f64,
    pub rhs_upper: f64,
    /// `upper(lhs) - lower(rhs)`.
    pub margin: f64,
    pub verdict: Verdict,
}

impl RadiusRow {
    /// Compares `P(lhs ≤ r) ≤ P(rhs ≤ r)` from success counts.
    pub fn judge(radius: f64, lhs_count: u64, rhs_count: u64, replicas: u64, alpha: f64) -> Self {
        let n = replicas;
        let (p_lhs, p_rhs) = (lhs_count as f64 / n as f64, rhs_count as f64 / n as f64);
        let lhs_lower = clopper_pearson_lower(lhs_count, n, alpha);
        let lhs_upper = clopper_pearson_upper(lhs_count, n, alpha);
        let rhs_lower = clopper_pearson_lower(rhs_count, n, alpha);
        let rhs_upper = clopper_pearson_upper(rhs_count, n, alpha);
        let verdict = if lhs_lower > rhs_upper {
            Verdict::Violated
        } else if p_lhs <= rhs_upper {
            Verdict::Consistent
        } else {
            Verdict::Underpowered
        };
        RadiusRow {
            radius,
            lhs_count,
            rhs_count,
            p_lhs,
            p_rhs,
            lhs_lower,
            lhs_upper,
            rhs_lower,
            rhs_upper,
            margin: lhs_upper - rhs_lower,
            verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub inequality: String,
    pub rows: Vec<RadiusRow>,
    pub replicas: u64,
    pub seed: u64,
    pub confidence: f64,
    pub runtime: Duration,
}

impl InequalityReport {
    pub fn verdict(&self) -> Verdict {
        Verdict::worst(self.rows.iter().map(|r| r.verdict))
    }

    fn from_pairs(inequality: String, pairs: &[(f64, f64)], cfg: &MCConfig, alpha: f64, started: Instant) -> Self {
        let n = pairs.len() as u64;
        let rows = cfg
            .radii
            .iter()
            .map(|&r| {
                let lhs = pairs.iter().filter(|p| p.0 <= r).count() as u64;
                let rhs = pairs.iter().filter(|p| p.1 <= r).count() as u64;
                RadiusRow::judge(r, lhs, rhs, n, alpha)
            })
            .collect();
        InequalityReport {
            inequality,
            rows,
            replicas: n,
            seed: cfg.seed,
            confidence: cfg.confidence,
            runtime: started.elapsed(),
        }
    }
}

/// Per-replica values, computed in parallel and returned in replica order.
fn per_replica<T, S, I, F>(replicas: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    S: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> T + Sync + Send,
{
    (0..replicas as u64).into_par_iter().map_init(init, f).collect()
}

struct Buffers {
    noise: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl Buffers {
    fn new(points: usize) -> Self {
        Buffers { noise: Vec::new(), a: vec![0.0; points], b: vec![0.0; points], c: vec![0.0; points] }
    }
}

/// Norms of `replicas` independent samples of the field with density `f`.
pub fn replica_norms(f: &SpectralDensity, cfg: &MCConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let synth = SpectralSynthesizer::new(f, &cfg.frequency_grid, cfg.spatial_grid.clone())?;
    let grid = cfg.spatial_grid.clone();
    Ok(per_replica(
        cfg.replicas,
        || Buffers::new(grid.len()),
        |buf, r| {
            synth.sample_into(cfg.seed, first_stream(r), &mut buf.noise, &mut buf.a);
            cfg.norm.evaluate(&grid, &buf.a)
        },
    ))
}

/// `P(‖X‖ ≤ r)` at every configured radius from one set of replicas, so the
/// estimates are nondecreasing in `r`.
pub fn ball_probability_curve(f: &SpectralDensity, cfg: &MCConfig) -> Result<Vec<BallEstimate>> {
    let norms = replica_norms(f, cfg)?;
    let n = norms.len() as u64;
    Ok(cfg
        .radii
        .iter()
        .map(|&r| BallEstimate::from_count(r, norms.iter().filter(|v| **v <= r).count() as u64, n, cfg.confidence))
        .collect())
}

pub fn estimate_ball_probability(f: &SpectralDensity, r: f64, cfg: &MCConfig) -> Result<BallEstimate> {
    let cfg = MCConfig { radii: vec![r], ..cfg.clone() };
    Ok(ball_probability_curve(f, &cfg)?.remove(0))
}

/// `P(‖X + g‖ ≤ r) ≤ P(‖X‖ ≤ r)` for a deterministic `g` given on the
/// configured grid, with both sides evaluated on the same replicas.
pub fn verify_anderson_shift(f: &SpectralDensity, shift: &[f64], cfg: &MCConfig) -> Result<InequalityReport> {
    cfg.validate()?;
    let grid = cfg.spatial_grid.clone();
    if shift.len() != grid.len() {
        return Err(Error::GridMismatch { expected: grid.len(), actual: shift.len() });
    }
    let started = Instant::now();
    let synth = SpectralSynthesizer::new(f, &cfg.frequency_grid, grid.clone())?;
    let pairs = per_replica(
        cfg.replicas,
        || Buffers::new(grid.len()),
        |buf, r| {
            synth.sample_into(cfg.seed, first_stream(r), &mut buf.noise, &mut buf.a);
            for p in 0..buf.a.len() {
                buf.b[p] = buf.a[p] + shift[p];
            }
            (cfg.norm.evaluate(&grid, &buf.b), cfg.norm.evaluate(&grid, &buf.a))
        },
    );
    Ok(InequalityReport::from_pairs(
        format!("P(|X+g| <= r) <= P(|X| <= r), X ~ {f}"),
        &pairs,
        cfg,
        cfg.per_bound_alpha(),
        started,
    ))
}

/// `P(‖X₁ + X₂‖ ≤ r) ≤ P(‖X₁‖ ≤ r)` for independent `X₁ ~ f₁`, `X₂ ~ f₂`.
pub fn verify_anderson_sum(f1: &SpectralDensity, f2: &SpectralDensity, cfg: &MCConfig) -> Result<InequalityReport> {
    cfg.validate()?;
    let grid = cfg.spatial_grid.clone();
    let started = Instant::now();
    let s1 = SpectralSynthesizer::new(f1, &cfg.frequency_grid, grid.clone())?;
    let s2 = SpectralSynthesizer::new(f2, &cfg.frequency_grid, grid.clone())?;
    let pairs = per_replica(
        cfg.replicas,
        || Buffers::new(grid.len()),
        |buf, r| {
            s1.sample_into(cfg.seed, first_stream(r), &mut buf.noise, &mut buf.a);
            s2.sample_into(cfg.seed, second_stream(r), &mut buf.noise, &mut buf.b);
            for p in 0..buf.a.len() {
                buf.c[p] = buf.a[p] + buf.b[p];
            }
            (cfg.norm.evaluate(&grid, &buf.c), cfg.norm.evaluate(&grid, &buf.a))
        },
    );
    Ok(InequalityReport::from_pairs(
        format!("P(|X1+X2| <= r) <= P(|X1| <= r), X1 ~ {f1}, X2 ~ {f2}"),
        &pairs,
        cfg,
        cfg.per_bound_alpha(),
        started,
    ))
}

/// `P(‖Y‖ ≤ r) ≤ P(‖C^{-1/2} X‖ ≤ r)` with `Y` realised through the coupling
/// `C^{-1/2} X₁ + X₂`.
pub fn verify_comparison(certificate: &DominationCertificate, cfg: &MCConfig) -> Result<InequalityReport> {
    cfg.validate()?;
    let grid = cfg.spatial_grid.clone();
    let started = Instant::now();
    let sampler = CouplingSampler::new(certificate, &cfg.frequency_grid, grid.clone())?;
    let pairs = per_replica(
        cfg.replicas,
        || Buffers::new(grid.len()),
        |buf, r| {
            sampler.sample_into(cfg.seed, r, &mut buf.noise, &mut buf.a, &mut buf.b, &mut buf.c);
            (cfg.norm.evaluate(&grid, &buf.c), sampler.scale() * cfg.norm.evaluate(&grid, &buf.a))
        },
    );
    Ok(InequalityReport::from_pairs(
        format!(
            "P(|Y| <= r) <= P(|X|/sqrt(C) <= r), X ~ {}, Y ~ {}, C = {}",
            certificate.f_x(),
            certificate.f_y(),
            certificate.constant()
        ),
        &pairs,
        cfg,
        cfg.per_bound_alpha(),
        started,
    ))
}

/// Nearest-rank quantiles of `‖Y‖` under the coupling, from replicas
/// `n .. 2n` so that they are independent of the replicas used by
/// [`verify_comparison`] with the same configuration.
pub fn pilot_radii(certificate: &DominationCertificate, cfg: &MCConfig, probabilities: &[f64]) -> Result<Vec<f64>> {
    cfg.validate()?;
    if probabilities.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
        return Err(Error::invalid("probabilities", "quantile levels must lie in (0,1]"));
    }
    let grid = cfg.spatial_grid.clone();
    let sampler = CouplingSampler::new(certificate, &cfg.frequency_grid, grid.clone())?;
    let offset = cfg.replicas as u64;
    let mut norms = per_replica(
        cfg.replicas,
        || Buffers::new(grid.len()),
        |buf, r| {
            sampler.sample_into(cfg.seed, offset + r, &mut buf.noise, &mut buf.a, &mut buf.b, &mut buf.c);
            cfg.norm.evaluate(&grid, &buf.c)
        },
    );
    norms.sort_by(f64::total_cmp);
    let n = norms.len();
    let mut radii: Vec<f64> = probabilities
        .iter()
        .map(|p| norms[((p * n as f64).ceil() as usize).clamp(1, n) - 1])
        .collect();
    radii.sort_by(f64::total_cmp);
    Ok(radii)
}

/// Standardised deviation at one pair of grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStatistic {
    pub i: usize,
    pub j: usize,
    pub empirical: f64,
    pub reference: f64,
    pub standard_error: f64,
    /// `|empirical - reference| / standard_error`; pairs with zero standard
    /// error and zero deviation are excluded.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingLawReport {
    /// `max |cov̂(Y) - K_{f_Y}| / (3 SE)`; passes when ≤ 1.
    pub covariance_match: f64,
    /// `max |Ê[X₁(x) X₂(x')]| / SE`; passes when ≤ 3.
    pub cross_orthogonality: f64,
    pub covariance_pairs: Vec<PairStatistic>,
    pub cross_pairs: Vec<PairStatistic>,
    pub replicas: u64,
    pub seed: u64,
    pub constant: f64,
    pub runtime: Duration,
}

impl CouplingLawReport {
    pub fn covariance_passes(&self) -> bool {
        self.covariance_match <= 1.0
    }

    pub fn orthogonality_passes(&self) -> bool {
        self.cross_orthogonality <= 3.0
    }

    pub fn passes(&self) -> bool {
        self.covariance_passes() && self.orthogonality_passes()
    }
}

/// First and second moments of the products `u_i v_j` over replicas.
#[derive(Debug, Clone)]
struct ProductMoments {
    points: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl ProductMoments {
    fn new(points: usize) -> Self {
        ProductMoments { points, sum: vec![0.0; points * points], sum_sq: vec![0.0; points * points] }
    }

    fn add(&mut self, u: &[f64], v: &[f64]) {
        for i in 0..self.points {
            for j in 0..self.points {
                let prod = u[i] * v[j];
                self.sum[i * self.points + j] += prod;
                self.sum_sq[i * self.points + j] += prod * prod;
            }
        }
    }

    fn merge(&mut self, other: &ProductMoments) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }

    /// Mean and standard error of the mean at `(i, j)`.
    fn mean_and_se(&self, i: usize, j: usize, n: f64) -> (f64, f64) {
        let mean = self.sum[i * self.points + j] / n;
        let var = (self.sum_sq[i * self.points + j] / n - mean * mean).max(0.0);
        (mean, (var * n / (n - 1.0) / n).sqrt())
    }
}

fn standardised(i: usize, j: usize, empirical: f64, reference: f64, standard_error: f64) -> Option<PairStatistic> {
    let dev = (empirical - reference).abs();
    let z = if standard_error > 0.0 {
        dev / standard_error
    } else if dev == 0.0 {
        return None;
    } else {
        f64::INFINITY
    };
    Some(PairStatistic { i, j, empirical, reference, standard_error, z })
}

/// Empirical law check of the coupling: `C^{-1/2} X₁ + X₂` has the covariance
/// of `Y`, and `X₁`, `X₂` are uncorrelated at every pair of points.
pub fn verify_coupling_law(certificate: &DominationCertificate, cfg: &MCConfig) -> Result<CouplingLawReport> {
    cfg.validate()?;
    let started = Instant::now();
    let grid = cfg.spatial_grid.clone();
    let points = grid.len();
    let sampler = CouplingSampler::new(certificate, &cfg.frequency_grid, grid.clone())?;
    let reference = covariance_matrix(certificate.f_y(), &grid.points(), &cfg.frequency_grid)?;

    let blocks = cfg.replicas.div_ceil(BLOCK);
    let partial: Vec<(ProductMoments, ProductMoments)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut buf = Buffers::new(points);
            let mut cov = ProductMoments::new(points);
            let mut cross = ProductMoments::new(points);
            for r in b * BLOCK..((b + 1) * BLOCK).min(cfg.replicas) {
                sampler.sample_into(cfg.seed, r as u64, &mut buf.noise, &mut buf.a, &mut buf.b, &mut buf.c);
                cov.add(&buf.c, &buf.c);
                cross.add(&buf.a, &buf.b);
            }
            (cov, cross)
        })
        .collect();
    let mut cov = ProductMoments::new(points);
    let mut cross = ProductMoments::new(points);
    for (c, x) in &partial {
        cov.merge(c);
        cross.merge(x);
    }

    let n = cfg.replicas as f64;
    let mut covariance_pairs = Vec::new();
    let mut cross_pairs = Vec::new();
    for i in 0..points {
        for j in 0..points {
            if j >= i {
                let (mean, se) = cov.mean_and_se(i, j, n);
                covariance_pairs.extend(standardised(i, j, mean, reference.get(i, j), se));
            }
            let (mean, se) = cross.mean_and_se(i, j, n);
            cross_pairs.extend(standardised(i, j, mean, 0.0, se));
        }
    }
    let covariance_match = covariance_pairs.iter().fold(0.0f64, |m, p| m.max(p.z)) / 3.0;
    let cross_orthogonality = cross_pairs.iter().fold(0.0f64, |m, p| m.max(p.z));
    Ok(CouplingLawReport {
        covariance_match,
        cross_orthogonality,
        covariance_pairs,
        cross_pairs,
        replicas: cfg.replicas as u64,
        seed: cfg.seed,
        constant: certificate.constant(),
        runtime: started.elapsed(),
    })
}

/// Hurst exponent of a 1-d path on a uniform grid: half the slope of the log
/// mean squared increment against the log lag, over [`HURST_LAGS`].
pub fn quadratic_variation_hurst(values: &[f64]) -> Result<f64> {
    if values.len() < HURST_MIN_POINTS {
        return Err(Error::GridTooCoarse { points: values.len(), required: HURST_MIN_POINTS });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = HURST_LAGS
        .iter()
        .map(|&lag| {
            let count = values.len() - lag;
            let qv = (0..count).map(|i| (values[i + lag] - values[i]).powi(2)).sum::<f64>() / count as f64;
            ((lag as f64).ln(), qv.ln())
        })
        .unzip();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(0.5 * sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HurstEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub standard_error: f64,
    pub per_replica: Vec<f64>,
    pub runtime: Duration,
}

/// Averages [`quadratic_variation_hurst`] over replicas; the interval is a
/// normal interval from the replica spread at the configured confidence.
pub fn estimate_holder_exponent(f: &SpectralDensity, cfg: &MCConfig) -> Result<HurstEstimate> {
    cfg.validate()?;
    let grid = cfg.spatial_grid.clone();
    if grid.dim() != 1 || grid.per_axis().is_none() {
        return Err(Error::invalid("grid", "the Hurst estimator needs a uniform 1-d grid"));
    }
    if grid.len() < HURST_MIN_POINTS {
        return Err(Error::GridTooCoarse { points: grid.len(), required: HURST_MIN_POINTS });
    }
    let started = Instant::now();
    let synth = SpectralSynthesizer::new(f, &cfg.frequency_grid, grid.clone())?;
    let per_replica: Vec<f64> = per_replica(
        cfg.replicas,
        || Buffers::new(grid.len()),
        |buf, r| {
            synth.sample_into(cfg.seed, first_stream(r), &mut buf.noise, &mut buf.a);
            quadratic_variation_hurst(&buf.a)
        },
    )
    .into_iter()
    .collect::<Result<_>>()?;
    let n = per_replica.len() as f64;
    let mean = per_replica.iter().sum::<f64>() / n;
    let var = per_replica.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let z = normal_quantile(0.5 + 0.5 * cfg.confidence);
    Ok(HurstEstimate {
        estimate: mean,
        lower: mean - z * se,
        upper: mean + z * se,
        standard_error: se,
        per_replica,
        runtime: started.elapsed(),
    })
}

/// Verdict engine on synthetic independent Bernoulli indicators with known
/// success probabilities, one radius. Used to calibrate the verdict rules.
pub fn verify_bernoulli_stub(p_lhs: f64, p_rhs: f64, replicas: usize, seed: u64, confidence: f64) -> Result<InequalityReport> {
    for (name, p) in [("p_lhs", p_lhs), ("p_rhs", p_rhs)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(name, format!("must lie in [0,1], got {p}")));
        }
    }
    if replicas == 0 {
        return Err(Error::invalid("replicas", "need at least one replica"));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid("confidence", format!("must lie in (0,1), got {confidence}")));
    }
    let started = Instant::now();
    let mut lhs_rng = stream_rng(seed, 0);
    let mut rhs_rng = stream_rng(seed, 1);
    let lhs = (0..replicas).filter(|_| lhs_rng.random::<f64>() < p_lhs).count() as u64;
    let rhs = (0..replicas).filter(|_| rhs_rng.random::<f64>() < p_rhs).count() as u64;
    let n = replicas as u64;
    Ok(InequalityReport {
        inequality: format!("bernoulli({p_lhs}) <= bernoulli({p_rhs})"),
        rows: vec![RadiusRow::judge(1.0, lhs, rhs, n, 1.0 - confidence)],
        replicas: n,
        seed,
        confidence,
        runtime: started.elapsed(),
    })
}
