//! Increment covariance kernels by dyadic quadrature.
//!
//! For a density `f` the kernel is
//! `K(x, x') = ∫ (e^{i x·ξ} - 1)(e^{-i x'·ξ} - 1) f(ξ) dξ`. On a symmetric grid
//! the pair `{ξ, -ξ}` contributes `2 m [(cos θ - 1)(cos θ' - 1) + sin θ sin θ']`
//! with `m = f(ξ) w`, `θ = x·ξ` and `θ' = x'·ξ`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::spectral::{check_admissible, difference_density, Admissibility, DominationCertificate, SpectralDensity};

/// Relative PSD tolerance: eigenvalues down to `-EPS_PSD · max diag` are
/// attributed to quadrature noise.
pub const EPS_PSD: f64 = 1e-8;

const IMAG_REL_TOL: f64 = 1e-10;
const IMAG_ABS_TOL: f64 = 1e-14;

/// Density masses `f(ξ_k) w_k` on the stored half of a grid.
#[derive(Debug, Clone)]
pub struct DiscreteSpectrum<'g> {
    grid: &'g FrequencyGrid,
    masses: Vec<f64>,
    label: String,
}

impl<'g> DiscreteSpectrum<'g> {
    /// Discretises `f`, rejecting densities the grid shows to be inadmissible.
    ///
    /// Inconclusive admissibility is accepted with a warning: the grid cannot
    /// tell slow decay from divergence, and the caller chose the density.
    pub fn new(f: &SpectralDensity, grid: &'g FrequencyGrid) -> Result<Self> {
        if f.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { left: f.dim(), right: grid.dim() });
        }
        match check_admissible(f, grid) {
            Admissibility::Inadmissible => return Err(Error::Inadmissible(f.to_string())),
            Admissibility::Inconclusive => {
                log::warn!("admissibility of {f} is inconclusive on {grid}");
            }
            Admissibility::Admissible(_) => {}
        }
        let masses = (0..grid.half_len())
            .map(|k| f.at_radius(grid.radius(k)) * grid.weight(k))
            .collect();
        Ok(DiscreteSpectrum { grid, masses, label: f.to_string() })
    }

    pub fn grid(&self) -> &'g FrequencyGrid {
        self.grid
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.masses.iter().all(|m| *m == 0.0)
    }
}

fn dot(x: &[f64], xi: &[f64]) -> f64 {
    x.iter().zip(xi).map(|(a, b)| a * b).sum()
}

/// `(cos θ - 1, sin θ)` with the first entry free of cancellation.
#[inline]
pub(crate) fn phase_minus_one(theta: f64) -> (f64, f64) {
    let s = (0.5 * theta).sin();
    (-2.0 * s * s, theta.sin())
}

/// Per-node `(cos θ - 1, sin θ)` tables for one spatial point.
struct PointPhases {
    cm1: Vec<f64>,
    sin: Vec<f64>,
}

impl PointPhases {
    fn new(x: &[f64], grid: &FrequencyGrid) -> Self {
        let n = grid.half_len();
        let mut cm1 = Vec::with_capacity(n);
        let mut sin = Vec::with_capacity(n);
        for k in 0..n {
            let (c, s) = phase_minus_one(dot(x, grid.node(k)));
            cm1.push(c);
            sin.push(s);
        }
        PointPhases { cm1, sin }
    }
}

fn kernel_real(masses: &[f64], a: &PointPhases, b: &PointPhases) -> f64 {
    let mut acc = 0.0;
    for k in 0..masses.len() {
        acc += 2.0 * masses[k] * (a.cm1[k] * b.cm1[k] + a.sin[k] * b.sin[k]);
    }
    acc
}

/// Imaginary part summed over the full node set, `ξ` and `-ξ` separately.
fn kernel_imag(spectrum: &DiscreteSpectrum<'_>, x: &[f64], x2: &[f64]) -> f64 {
    let grid = spectrum.grid;
    let mut acc = 0.0;
    for k in 0..grid.half_len() {
        let m = spectrum.masses[k];
        if m == 0.0 {
            continue;
        }
        let xi = grid.node(k);
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        for node in [xi, neg.as_slice()] {
            let (c, s) = phase_minus_one(dot(x, node));
            let (c2, s2) = phase_minus_one(dot(x2, node));
            // Im[(c - 1 + i s)(c' - 1 - i s')]
            acc += m * (s * c2 - s2 * c);
        }
    }
    acc
}

pub(crate) fn kernel(spectrum: &DiscreteSpectrum<'_>, x: &[f64], x2: &[f64]) -> Result<f64> {
    let a = PointPhases::new(x, spectrum.grid);
    let b = PointPhases::new(x2, spectrum.grid);
    let real = kernel_real(&spectrum.masses, &a, &b);
    let imag = kernel_imag(spectrum, x, x2);
    if imag.abs() > IMAG_REL_TOL * real.abs() + IMAG_ABS_TOL {
        return Err(Error::ImaginaryResidual { real, imag });
    }
    Ok(real)
}

fn check_point(dim: usize, x: &[f64]) -> Result<()> {
    if x.len() == dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: dim, right: x.len() })
    }
}

/// `E[X(x) X(x')]` for the field with density `f`.
pub fn increment_covariance(f: &SpectralDensity, x: &[f64], x2: &[f64], grid: &FrequencyGrid) -> Result<f64> {
    check_point(f.dim(), x)?;
    check_point(f.dim(), x2)?;
    let spectrum = DiscreteSpectrum::new(f, grid)?;
    kernel(&spectrum, x, x2)
}

/// Dense symmetric covariance on a finite point set.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    points: Vec<Vec<f64>>,
    entries: Vec<f64>,
    source: String,
    grid: String,
}

impl CovarianceMatrix {
    /// Wraps an explicit symmetric matrix, e.g. a closed-form covariance.
    pub fn from_entries(points: Vec<Vec<f64>>, entries: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        let n = points.len();
        if entries.len() != n * n {
            return Err(Error::GridMismatch { expected: n * n, actual: entries.len() });
        }
        let dim = points.first().map_or(1, |p| p.len());
        for p in &points {
            check_point(dim, p)?;
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::invalid("entries", format!("not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(CovarianceMatrix { dim, points, entries, source: source.into(), grid: "explicit".into() })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.len() + j]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Identifier of the density the matrix was computed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn grid(&self) -> &str {
        &self.grid
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.len()).map(|i| self.get(i, i)).fold(0.0, f64::max)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.len(), &self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        SymmetricEigen::new(self.to_dmatrix()).eigenvalues.min()
    }

    /// Smallest eigenvalue is at least `-EPS_PSD · max diag`.
    pub fn is_psd_within_tolerance(&self) -> bool {
        self.min_eigenvalue() >= -EPS_PSD * self.max_diagonal()
    }
}

/// Covariance of the field with density `f` at distinct points.
///
/// Entry `(i, j)` is bit-identical to `increment_covariance(f, x_i, x_j)`;
/// entries are computed for `i ≤ j` and mirrored.
pub fn covariance_matrix(f: &SpectralDensity, points: &[Vec<f64>], grid: &FrequencyGrid) -> Result<CovarianceMatrix> {
    for p in points {
        check_point(f.dim(), p)?;
    }
    for i in 0..points.len() {
        for j in 0..i {
            if points[i] == points[j] {
                return Err(Error::DuplicatePoint { first: j, second: i });
            }
        }
    }
    let spectrum = DiscreteSpectrum::new(f, grid)?;
    let phases: Vec<PointPhases> = points.par_iter().map(|p| PointPhases::new(p, grid)).collect();
    let n = points.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| kernel_real(&spectrum.masses, &phases[i], &phases[j]))
        .collect();
    let mut entries = vec![0.0; n * n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        entries[i * n + j] = v;
        entries[j * n + i] = v;
    }
    Ok(CovarianceMatrix {
        dim: f.dim(),
        points: points.to_vec(),
        entries,
        source: f.to_string(),
        grid: grid.to_string(),
    })
}

/// Point `(x; y₁, y₂)` of the extended coupling field.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPoint {
    pub x: Vec<f64>,
    pub y1: f64,
    pub y2: f64,
}

impl ExtendedPoint {
    pub fn new(x: Vec<f64>, y1: f64, y2: f64) -> Self {
        ExtendedPoint { x, y1, y2 }
    }
}

/// Covariance of the extended field
/// `Z(x; y₁, y₂) = y₁ C^{-1/2} X₁(x) + y₂ X₂(x)` whose first block has density
/// `f_X` and second block density `f_Y - f_X / C`, with `C` taken from the
/// certificate (`C = 1` recovers the plain decomposition).
///
/// The remainder kernel is one quadrature over the difference density.
pub fn coupling_covariance(
    certificate: &DominationCertificate,
    p: &ExtendedPoint,
    p2: &ExtendedPoint,
    grid: &FrequencyGrid,
) -> Result<f64> {
    certificate.require()?;
    let f_x = certificate.f_x();
    let f_y = certificate.f_y();
    let c = certificate.constant();
    let rest = difference_density(f_y, f_x, c, certificate)?;
    let mut total = 0.0;
    if p.y1 * p2.y1 != 0.0 {
        total += p.y1 * p2.y1 * increment_covariance(f_x, &p.x, &p2.x, grid)? / c;
    }
    if p.y2 * p2.y2 != 0.0 {
        total += p.y2 * p2.y2 * increment_covariance(&rest, &p.x, &p2.x, grid)?;
    }
    Ok(total)
}
