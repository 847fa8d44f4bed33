//! Spectral densities, admissibility and pointwise domination.
//!
//! Every built-in family is radial, `f(ξ) = φ(|ξ|)`, which makes evenness
//! `f(ξ) = f(-ξ)` exact in floating point.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;

/// Relative roundoff slack used by domination checks and clamping.
pub const ROUNDOFF_SLACK: f64 = 1e-12;

/// Bounded, even, nonnegative multiplier `(offset + amplitude·sin(frequency·|ξ|)) / divisor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulation {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub divisor: f64,
}

impl Modulation {
    pub fn new(offset: f64, amplitude: f64, frequency: f64, divisor: f64) -> Result<Self> {
        let all_finite = [offset, amplitude, frequency, divisor].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("modulation", "parameters must be finite"));
        }
        if divisor <= 0.0 {
            return Err(Error::invalid("divisor", format!("must be > 0, got {divisor}")));
        }
        if offset < amplitude.abs() {
            return Err(Error::invalid(
                "offset",
                format!("must be ≥ |amplitude| so the modulation stays nonnegative, got {offset} < {}", amplitude.abs()),
            ));
        }
        Ok(Modulation { offset, amplitude, frequency, divisor })
    }

    /// The `(2 + sin|ξ|)/3` multiplier: bounded between 1/3 and 1.
    pub fn two_plus_sine_over_three() -> Self {
        Modulation { offset: 2.0, amplitude: 1.0, frequency: 1.0, divisor: 3.0 }
    }

    pub fn at_radius(&self, r: f64) -> f64 {
        (self.offset + self.amplitude * (self.frequency * r).sin()) / self.divisor
    }

    pub fn upper_bound(&self) -> f64 {
        (self.offset + self.amplitude.abs()) / self.divisor
    }

    pub fn lower_bound(&self) -> f64 {
        (self.offset - self.amplitude.abs()) / self.divisor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    PowerLaw,
    Perturbed,
    BandLimited,
    Sum,
    ScalarMultiple,
    Zero,
    Difference,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Zero,
    PowerLaw {
        coeff: f64,
        /// `f(ξ) = coeff · |ξ|^{-decay}`.
        decay: f64,
        hurst: Option<f64>,
        normalized: bool,
    },
    Perturbed {
        base: Arc<SpectralDensity>,
        modulation: Modulation,
    },
    BandLimited {
        lo: f64,
        hi: f64,
        level: f64,
    },
    Sum(Vec<SpectralDensity>),
    Scaled {
        factor: f64,
        base: Arc<SpectralDensity>,
    },
    Difference {
        minuend: Arc<SpectralDensity>,
        subtrahend: Arc<SpectralDensity>,
        divisor: f64,
    },
}

/// Nonnegative even function on ℝ^d.
///
/// Parameters are validated at construction; evaluation never fails.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    dim: usize,
    kind: Kind,
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

fn check_hurst(hurst: f64) -> Result<()> {
    if hurst.is_finite() && hurst > 0.0 && hurst < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("H", format!("H must lie in (0,1), got {hurst}")))
    }
}

impl SpectralDensity {
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(SpectralDensity { dim, kind: Kind::Zero })
    }

    /// `c · |ξ|^{-2H-d}` with an explicit constant.
    pub fn power_law(dim: usize, hurst: f64, coeff: f64) -> Result<Self> {
        check_dim(dim)?;
        check_hurst(hurst)?;
        if !(coeff.is_finite() && coeff > 0.0) {
            return Err(Error::invalid("c", format!("must be finite and > 0, got {coeff}")));
        }
        Ok(SpectralDensity {
            dim,
            kind: Kind::PowerLaw {
                coeff,
                decay: 2.0 * hurst + dim as f64,
                hurst: Some(hurst),
                normalized: false,
            },
        })
    }

    /// `c · |ξ|^{-decay}` for an arbitrary real decay. Not every decay gives
    /// an admissible density; see [`check_admissible`].
    pub fn power_law_with_decay(dim: usize, decay: f64, coeff: f64) -> Result<Self> {
        check_dim(dim)?;
        if !decay.is_finite() {
            return Err(Error::invalid("decay", "must be finite"));
        }
        if !(coeff.is_finite() && coeff > 0.0) {
            return Err(Error::invalid("c", format!("must be finite and > 0, got {coeff}")));
        }
        Ok(SpectralDensity {
            dim,
            kind: Kind::PowerLaw { coeff, decay, hurst: None, normalized: false },
        })
    }

    /// Fractional Brownian density normalised so that `Var X(e₁) = 1`.
    pub fn fbm(dim: usize, hurst: f64) -> Result<Self> {
        check_dim(dim)?;
        check_hurst(hurst)?;
        Ok(SpectralDensity {
            dim,
            kind: Kind::PowerLaw {
                coeff: fbm_normalization(hurst, dim),
                decay: 2.0 * hurst + dim as f64,
                hurst: Some(hurst),
                normalized: true,
            },
        })
    }

    /// `1 / (2π ξ²)` on the line, the spectral density of Brownian motion.
    pub fn brownian() -> Self {
        SpectralDensity {
            dim: 1,
            kind: Kind::PowerLaw {
                coeff: 1.0 / (2.0 * PI),
                decay: 2.0,
                hurst: Some(0.5),
                normalized: false,
            },
        }
    }

    pub fn perturbed(base: SpectralDensity, modulation: Modulation) -> Result<Self> {
        Ok(SpectralDensity {
            dim: base.dim,
            kind: Kind::Perturbed { base: Arc::new(base), modulation },
        })
    }

    /// `level` on the annulus `lo ≤ |ξ| < hi`, zero elsewhere.
    pub fn band_limited(dim: usize, lo: f64, hi: f64, level: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::invalid("band", format!("need 0 ≤ lo < hi < ∞, got [{lo}, {hi})")));
        }
        if !(level.is_finite() && level >= 0.0) {
            return Err(Error::invalid("level", format!("must be finite and ≥ 0, got {level}")));
        }
        Ok(SpectralDensity { dim, kind: Kind::BandLimited { lo, hi, level } })
    }

    pub fn sum(terms: Vec<SpectralDensity>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::invalid("sum", "needs at least one term"))?;
        let dim = first.dim;
        if let Some(bad) = terms.iter().find(|t| t.dim != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: bad.dim });
        }
        Ok(SpectralDensity { dim, kind: Kind::Sum(terms) })
    }

    pub fn scaled(factor: f64, base: SpectralDensity) -> Result<Self> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(Error::invalid("factor", format!("must be finite and ≥ 0, got {factor}")));
        }
        Ok(SpectralDensity {
            dim: base.dim,
            kind: Kind::Scaled { factor, base: Arc::new(base) },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Zero => Family::Zero,
            Kind::PowerLaw { .. } => Family::PowerLaw,
            Kind::Perturbed { .. } => Family::Perturbed,
            Kind::BandLimited { .. } => Family::BandLimited,
            Kind::Sum(_) => Family::Sum,
            Kind::Scaled { .. } => Family::ScalarMultiple,
            Kind::Difference { .. } => Family::Difference,
        }
    }

    /// Hurst index of a power-law family, if it was built from one.
    pub fn hurst(&self) -> Option<f64> {
        match &self.kind {
            Kind::PowerLaw { hurst, .. } => *hurst,
            Kind::Perturbed { base, .. } | Kind::Scaled { base, .. } => base.hurst(),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            Kind::Zero => true,
            Kind::Scaled { factor, base } => *factor == 0.0 || base.is_zero(),
            Kind::BandLimited { level, .. } => *level == 0.0,
            Kind::Sum(terms) => terms.iter().all(|t| t.is_zero()),
            _ => false,
        }
    }

    /// `f(ξ)`; `ξ` must have `dim` coordinates.
    pub fn evaluate(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim);
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.at_radius(r)
    }

    /// `φ(r)` where `f(ξ) = φ(|ξ|)`.
    pub fn at_radius(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::PowerLaw { coeff, decay, .. } => {
                if r == 0.0 {
                    if *decay > 0.0 {
                        f64::INFINITY
                    } else if *decay == 0.0 {
                        *coeff
                    } else {
                        0.0
                    }
                } else {
                    coeff * r.powf(-decay)
                }
            }
            Kind::Perturbed { base, modulation } => {
                let b = base.at_radius(r);
                if b == 0.0 {
                    0.0
                } else {
                    b * modulation.at_radius(r)
                }
            }
            Kind::BandLimited { lo, hi, level } => {
                if r >= *lo && r < *hi {
                    *level
                } else {
                    0.0
                }
            }
            Kind::Sum(terms) => terms.iter().map(|t| t.at_radius(r)).sum(),
            Kind::Scaled { factor, base } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * base.at_radius(r)
                }
            }
            Kind::Difference { minuend, subtrahend, divisor } => {
                let raw = minuend.at_radius(r) - subtrahend.at_radius(r) / divisor;
                // Negative values only occur within the certified roundoff
                // slack on checked nodes; clamp everywhere to keep f ≥ 0.
                raw.max(0.0)
            }
        }
    }
}

impl fmt::Display for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Zero => write!(f, "zero(d={})", self.dim),
            Kind::PowerLaw { coeff, decay, hurst, normalized } => match (hurst, normalized) {
                (Some(h), true) => write!(f, "fbm(H={h},d={})", self.dim),
                (Some(h), false) => write!(f, "power-law(H={h},c={coeff},d={})", self.dim),
                (None, _) => write!(f, "power-law(decay={decay},c={coeff},d={})", self.dim),
            },
            Kind::Perturbed { base, modulation: m } => write!(
                f,
                "perturbed({base},({}+{}*sin({}|xi|))/{})",
                m.offset, m.amplitude, m.frequency, m.divisor
            ),
            Kind::BandLimited { lo, hi, level } => {
                write!(f, "band-limited(lo={lo},hi={hi},level={level},d={})", self.dim)
            }
            Kind::Sum(terms) => {
                write!(f, "sum(")?;
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Kind::Scaled { factor, base } => write!(f, "scaled({factor},{base})"),
            Kind::Difference { minuend, subtrahend, divisor } => {
                write!(f, "difference({minuend},{subtrahend}/{divisor})")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// fBm normalisation
// ---------------------------------------------------------------------------

fn normalization_cache() -> &'static Mutex<HashMap<(u64, usize), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Constant `c(H, d)` with `∫ |e^{i ξ₁} - 1|² c |ξ|^{-2H-d} dξ = 1`.
///
/// Computed once per `(H, d)` by a radial integral and cached.
pub fn fbm_normalization(hurst: f64, dim: usize) -> f64 {
    let key = (hurst.to_bits(), dim);
    if let Some(c) = normalization_cache().lock().unwrap().get(&key) {
        return *c;
    }
    let c = 1.0 / unit_increment_integral(hurst, dim);
    normalization_cache().lock().unwrap().insert(key, c);
    c
}

fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Mean of `cos(r ω₁)` over the unit sphere `ω ∈ S^{d-1}`.
fn spherical_mean_cos(r: f64, dim: usize) -> f64 {
    match dim {
        1 => r.cos(),
        2 => bessel_j0(r),
        _ => {
            if r.abs() < 1e-4 {
                1.0 - r * r / 6.0
            } else {
                r.sin() / r
            }
        }
    }
}

/// `J₀(r) = (1/2π) ∫₀^{2π} cos(r sin t) dt`, by the trapezoid rule on the
/// periodic integrand (exponentially convergent once the node count exceeds `r`).
fn bessel_j0(r: f64) -> f64 {
    let n = (1.5 * r.abs()).ceil() as usize + 48;
    let h = 2.0 * PI / n as f64;
    (0..n).map(|k| (r * (k as f64 * h).sin()).cos()).sum::<f64>() / n as f64
}

/// `1 - mean cos`, computed without cancellation near zero.
fn one_minus_mean_cos(r: f64, dim: usize) -> f64 {
    if r < 1e-3 {
        // Taylor: r²/(2d) - r⁴/(8 d (d+2))
        let d = dim as f64;
        r * r / (2.0 * d) - r.powi(4) / (8.0 * d * (d + 2.0))
    } else if dim == 1 {
        2.0 * (0.5 * r).sin().powi(2)
    } else {
        1.0 - spherical_mean_cos(r, dim)
    }
}

/// `∫_{ℝ^d} 2(1 - cos ξ₁) |ξ|^{-2H-d} dξ` reduced to a radial integral.
fn unit_increment_integral(hurst: f64, dim: usize) -> f64 {
    let area = sphere_area(dim);
    let d = dim as f64;
    let two_h = 2.0 * hurst;
    let integrand = |r: f64| 2.0 * one_minus_mean_cos(r, dim) * r.powf(-two_h - 1.0);

    const J_HEAD: i32 = -30;
    const J_TAIL: i32 = 10;
    // [0, 2^J_HEAD]: 1 - mean cos ≈ r²/(2d).
    let eps = 2f64.powi(J_HEAD);
    let head = 2.0 / (2.0 * d) * eps.powf(2.0 - two_h) / (2.0 - two_h);
    // [2^J_TAIL, ∞): the non-oscillatory part exactly, plus the leading
    // asymptotic term of ∫ cos(r) r^{-p} on the line. For d ≥ 2 the spherical
    // mean already decays like r^{-1/2} or faster and is dropped.
    let big = 2f64.powi(J_TAIL);
    let p = two_h + 1.0;
    let mut tail = 2.0 * big.powf(-two_h) / two_h;
    if dim == 1 {
        let oscillatory = -big.sin() * big.powf(-p) + p * big.cos() * big.powf(-p - 1.0);
        tail -= 2.0 * oscillatory;
    }

    let mut middle = 0.0;
    for j in J_HEAD..J_TAIL {
        let a = 2f64.powi(j);
        let b = 2f64.powi(j + 1);
        // Simpson with enough panels to resolve cos(r) across the band.
        let m = (64usize).max(2usize.pow((j + 5).max(0) as u32));
        let h = (b - a) / m as f64;
        let mut s = integrand(a) + integrand(b);
        for k in 1..m {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * integrand(a + k as f64 * h);
        }
        middle += s * h / 3.0;
    }
    area * (head + middle + tail)
}

// ---------------------------------------------------------------------------
// Admissibility
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    /// Quadrature value of `∫(1 ∧ |ξ|²) f(ξ) dξ`.
    Admissible(f64),
    Inadmissible,
    Inconclusive,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible(_))
    }
}

/// Outermost annuli inspected at each end of the grid.
const EDGE_ANNULI: usize = 5;
const DECAY_RATIO: f64 = 0.95;
const PLATEAU_RATIO: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    Decaying,
    NotDecaying,
    Unclear,
}

/// Contribution of each annulus (innermost first) to `∫(1 ∧ |ξ|²) f(ξ) dξ`.
pub fn annulus_contributions(f: &SpectralDensity, grid: &FrequencyGrid) -> Vec<f64> {
    grid.annuli()
        .iter()
        .map(|range| {
            range
                .clone()
                .map(|k| {
                    let r = grid.radius(k);
                    2.0 * grid.weight(k) * (r * r).min(1.0) * f.at_radius(r)
                })
                .sum()
        })
        .collect()
}

/// `outward` lists contributions moving towards the grid edge.
fn classify_edge(outward: &[f64]) -> Edge {
    if outward.iter().any(|c| !c.is_finite()) {
        return Edge::NotDecaying;
    }
    let mut decaying = 0;
    let mut flat = 0;
    for pair in outward.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b == 0.0 || b <= DECAY_RATIO * a {
            decaying += 1;
        } else if a == 0.0 || b >= PLATEAU_RATIO * a {
            flat += 1;
        }
    }
    let steps = outward.len().saturating_sub(1);
    if decaying == steps {
        Edge::Decaying
    } else if flat == steps {
        Edge::NotDecaying
    } else {
        Edge::Unclear
    }
}

/// Quadrature check that `∫(1 ∧ |ξ|²) f(ξ) dξ < ∞`.
///
/// Admissible when the per-annulus contributions shrink geometrically
/// towards both ends of the grid; inadmissible when they fail to shrink at
/// all at one end; inconclusive otherwise.
pub fn check_admissible(f: &SpectralDensity, grid: &FrequencyGrid) -> Admissibility {
    let contributions = annulus_contributions(f, grid);
    let k = EDGE_ANNULI.min(contributions.len());
    let high: Vec<f64> = contributions[contributions.len() - k..].to_vec();
    let low: Vec<f64> = contributions[..k].iter().rev().copied().collect();
    let edges = [classify_edge(&low), classify_edge(&high)];
    if edges.contains(&Edge::NotDecaying) {
        Admissibility::Inadmissible
    } else if edges.iter().all(|e| *e == Edge::Decaying) {
        Admissibility::Admissible(contributions.iter().sum())
    } else {
        Admissibility::Inconclusive
    }
}

// ---------------------------------------------------------------------------
// Domination
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum DominationVerdict {
    Holds,
    ViolatedAt {
        xi: Vec<f64>,
        f_x: f64,
        c_f_y: f64,
    },
}

/// Outcome of checking `f_X(ξ) ≤ C f_Y(ξ)` on every node of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationCertificate {
    f_x: SpectralDensity,
    f_y: SpectralDensity,
    constant: f64,
    grid: String,
    max_ratio: f64,
    verdict: DominationVerdict,
}

impl DominationCertificate {
    pub fn f_x(&self) -> &SpectralDensity {
        &self.f_x
    }

    pub fn f_y(&self) -> &SpectralDensity {
        &self.f_y
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Identifier of the grid the check ran on.
    pub fn grid(&self) -> &str {
        &self.grid
    }

    /// `max f_X/f_Y` over the checked nodes, with `0/0 = 0`.
    pub fn max_ratio(&self) -> f64 {
        self.max_ratio
    }

    pub fn verdict(&self) -> &DominationVerdict {
        &self.verdict
    }

    pub fn holds(&self) -> bool {
        self.verdict == DominationVerdict::Holds
    }

    pub(crate) fn require(&self) -> Result<()> {
        if self.holds() {
            Ok(())
        } else {
            Err(Error::NotCertified(format!(
                "{} ≤ {}·{} (verdict: violated)",
                self.f_x, self.constant, self.f_y
            )))
        }
    }
}

fn check_same_dim(a: &SpectralDensity, b: &SpectralDensity) -> Result<()> {
    if a.dim == b.dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: a.dim, right: b.dim })
    }
}

fn ratio(fx: f64, fy: f64) -> f64 {
    if fx == 0.0 {
        0.0
    } else if fy == 0.0 {
        f64::INFINITY
    } else {
        fx / fy
    }
}

/// Grid certificate for `f_X ≤ C f_Y`.
///
/// The verdict holds iff `f_X(ξ) ≤ C f_Y(ξ) + ε` at every node, where
/// `ε = 1e-12 · max(f_X(ξ), C f_Y(ξ))`. Nodes are visited innermost first and
/// the first offending node is reported. Densities are even, so checking the
/// stored half of the grid covers every node.
pub fn check_domination(
    f_x: &SpectralDensity,
    f_y: &SpectralDensity,
    c: f64,
    grid: &FrequencyGrid,
) -> Result<DominationCertificate> {
    check_same_dim(f_x, f_y)?;
    if grid.dim() != f_x.dim {
        return Err(Error::DimensionMismatch { left: f_x.dim, right: grid.dim() });
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::invalid("C", format!("must be finite and > 0, got {c}")));
    }
    let mut max_ratio: f64 = 0.0;
    let mut verdict = DominationVerdict::Holds;
    for k in 0..grid.half_len() {
        let r = grid.radius(k);
        let fx = f_x.at_radius(r);
        let cfy = c * f_y.at_radius(r);
        max_ratio = max_ratio.max(ratio(fx, f_y.at_radius(r)));
        let slack = ROUNDOFF_SLACK * fx.max(cfy);
        if verdict == DominationVerdict::Holds && fx.partial_cmp(&(cfy + slack)).is_none_or(|o| o.is_gt()) {
            verdict = DominationVerdict::ViolatedAt { xi: grid.node(k).to_vec(), f_x: fx, c_f_y: cfy };
        }
    }
    Ok(DominationCertificate {
        f_x: f_x.clone(),
        f_y: f_y.clone(),
        constant: c,
        grid: grid.to_string(),
        max_ratio,
        verdict,
    })
}

/// Smallest `C` with `f_X ≤ C f_Y` on the grid: `sup f_X/f_Y` with `0/0 = 0`,
/// `+∞` when `f_Y` vanishes where `f_X` does not.
pub fn estimate_min_c(f_x: &SpectralDensity, f_y: &SpectralDensity, grid: &FrequencyGrid) -> Result<f64> {
    check_same_dim(f_x, f_y)?;
    Ok((0..grid.half_len())
        .map(|k| {
            let r = grid.radius(k);
            ratio(f_x.at_radius(r), f_y.at_radius(r))
        })
        .fold(0.0, f64::max))
}

/// Two-sided constants `(sup f_X/f_Y, sup f_Y/f_X)`; both finite means the
/// densities are equivalent on the grid.
pub fn equivalence_constants(
    f_x: &SpectralDensity,
    f_y: &SpectralDensity,
    grid: &FrequencyGrid,
) -> Result<(f64, f64)> {
    Ok((estimate_min_c(f_x, f_y, grid)?, estimate_min_c(f_y, f_x, grid)?))
}

/// `g = f_Y - f_X / C`, the density of the independent remainder field.
///
/// Requires a holding certificate for exactly `(f_X, f_Y, C)`, so the
/// result is nonnegative on the checked grid up to roundoff.
pub fn difference_density(
    f_y: &SpectralDensity,
    f_x: &SpectralDensity,
    c: f64,
    certificate: &DominationCertificate,
) -> Result<SpectralDensity> {
    check_same_dim(f_x, f_y)?;
    certificate.require()?;
    if certificate.f_x != *f_x || certificate.f_y != *f_y || certificate.constant != c {
        return Err(Error::NotCertified(format!(
            "{f_x} ≤ {c}·{f_y} (certificate covers {} ≤ {}·{})",
            certificate.f_x, certificate.constant, certificate.f_y
        )));
    }
    if f_x.is_zero() {
        return Ok(f_y.clone());
    }
    Ok(SpectralDensity {
        dim: f_y.dim,
        kind: Kind::Difference {
            minuend: Arc::new(f_y.clone()),
            subtrahend: Arc::new(f_x.clone()),
            divisor: c,
        },
    })
}
