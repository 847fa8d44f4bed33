//! Field sampling: spectral synthesis, an exact factorised sampler used as an
//! oracle, and the coupling sampler `Y = C^{-1/2} X₁ + X₂`.
//!
//! Spectral synthesis evaluates
//!
//! ```text
//! X(x) = Σ_k (e^{i x·ξ_k} - 1) √(f(ξ_k) w_k) ζ_k,   ζ_{-k} = conj(ζ_k)
//! ```
//!
//! over the full symmetric grid. Pairing `ξ_k` with `-ξ_k` turns each pair
//! into `√(2 m_k) [(cos θ - 1) g₁ - sin θ g₂]` with `g₁, g₂` independent
//! standard normals, so samples are real by construction. The discretised
//! field is Gaussian with covariance exactly the quadrature kernel of
//! [`crate::covariance`].

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::covariance::{phase_minus_one, CovarianceMatrix, DiscreteSpectrum, EPS_PSD};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::rng::{first_stream, second_stream, stream_rng};
use crate::spectral::{difference_density, DominationCertificate, SpectralDensity};

/// Largest `points × active nodes` coefficient table kept in memory; larger
/// problems recompute coefficients for every sample.
const TABLE_BUDGET: usize = 1 << 22;

const JITTER_DOUBLINGS: u32 = 3;

/// Points in `K = [0,1]^d`, either a uniform lattice containing the origin or
/// an arbitrary list.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    dim: usize,
    /// Points per axis when the grid is a uniform lattice.
    per_axis: Option<usize>,
    coords: Vec<f64>,
}

impl SpatialGrid {
    /// `n` evenly spaced points per axis on `[0,1]^d`, lexicographic order
    /// with the first axis slowest. The origin is point 0.
    pub fn uniform(dim: usize, n: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 points per axis, got {n}")));
        }
        let total = n.pow(dim as u32);
        let h = 1.0 / (n - 1) as f64;
        let mut coords = Vec::with_capacity(total * dim);
        for idx in 0..total {
            let mut rem = idx;
            let mut point = vec![0.0; dim];
            for a in (0..dim).rev() {
                point[a] = (rem % n) as f64 * h;
                rem /= n;
            }
            coords.extend(point);
        }
        Ok(SpatialGrid { dim, per_axis: Some(n), coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(1, |p| p.len());
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { left: dim, right: p.len() });
            }
            coords.extend_from_slice(p);
        }
        Ok(SpatialGrid { dim, per_axis: None, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn per_axis(&self) -> Option<usize> {
        self.per_axis
    }

    pub fn spacing(&self) -> Option<f64> {
        self.per_axis.map(|n| 1.0 / (n - 1) as f64)
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i).to_vec()).collect()
    }

    pub fn is_origin(&self, i: usize) -> bool {
        self.point(i).iter().all(|v| *v == 0.0)
    }

    /// Every other point along each axis; `None` unless the lattice has an
    /// odd number of points per axis.
    pub fn coarsened(&self) -> Option<SpatialGrid> {
        let n = self.per_axis?;
        if n < 3 || n % 2 == 0 {
            return None;
        }
        SpatialGrid::uniform(self.dim, n.div_ceil(2)).ok()
    }

    /// Indices into `self` of the points of [`Self::coarsened`].
    pub fn coarse_indices(&self) -> Option<Vec<usize>> {
        let n = self.per_axis?;
        let coarse = self.coarsened()?;
        let m = coarse.per_axis?;
        Some(
            (0..coarse.len())
                .map(|idx| {
                    let mut rem = idx;
                    let mut fine = 0;
                    let mut stride = 1;
                    for _ in 0..self.dim {
                        fine += 2 * (rem % m) * stride;
                        rem /= m;
                        stride *= n;
                    }
                    fine
                })
                .collect(),
        )
    }
}

impl fmt::Display for SpatialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.per_axis {
            Some(n) => write!(f, "uniform(d={},n={})", self.dim, n),
            None => write!(f, "points(d={},count={})", self.dim, self.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Exact,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Spectral => "spectral",
            Method::Exact => "exact",
        })
    }
}

/// One realisation on a spatial grid with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub grid: Arc<SpatialGrid>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
    pub method: Method,
    pub density: Arc<str>,
}

impl FieldSample {
    pub fn zeros(grid: Arc<SpatialGrid>, density: Arc<str>, method: Method, seed: u64, stream: u64) -> Self {
        let values = vec![0.0; grid.len()];
        FieldSample { grid, values, seed, stream, method, density }
    }
}

// ---------------------------------------------------------------------------
// Spectral synthesis
// ---------------------------------------------------------------------------

/// Spectral sampler for one density on one lattice.
#[derive(Debug, Clone)]
pub struct SpectralSynthesizer {
    grid: Arc<SpatialGrid>,
    label: Arc<str>,
    /// `ξ` of every active node (nonzero mass), flattened.
    nodes: Vec<f64>,
    /// Index of each active node in the stored half-grid.
    active: Vec<usize>,
    /// `√(2 m_k)` per active node.
    amplitudes: Vec<f64>,
    /// Number of noise pairs drawn per sample.
    noise_pairs: usize,
    /// Node-major coefficient rows `(A, B)`, when within budget.
    table: Option<(Vec<f64>, Vec<f64>)>,
}

impl SpectralSynthesizer {
    pub fn new(f: &SpectralDensity, fgrid: &FrequencyGrid, grid: Arc<SpatialGrid>) -> Result<Self> {
        if grid.per_axis().is_none() {
            return Err(Error::invalid("grid", "spectral synthesis needs a uniform lattice"));
        }
        if grid.dim() != f.dim() {
            return Err(Error::DimensionMismatch { left: f.dim(), right: grid.dim() });
        }
        let spectrum = DiscreteSpectrum::new(f, fgrid)?;
        let mut nodes = Vec::new();
        let mut active = Vec::new();
        let mut amplitudes = Vec::new();
        for (k, &m) in spectrum.masses().iter().enumerate() {
            if m > 0.0 {
                nodes.extend_from_slice(fgrid.node(k));
                active.push(k);
                amplitudes.push((2.0 * m).sqrt());
            }
        }
        let mut synth = SpectralSynthesizer {
            grid,
            label: Arc::from(f.to_string()),
            nodes,
            active,
            amplitudes,
            noise_pairs: fgrid.half_len(),
            table: None,
        };
        let points = synth.grid.len();
        let entries = points * synth.active.len();
        if entries <= TABLE_BUDGET {
            let mut a = vec![0.0; entries];
            let mut b = vec![0.0; entries];
            let mut scratch = PhaseScratch::new(synth.grid.dim(), synth.grid.per_axis().unwrap());
            for j in 0..synth.active.len() {
                synth.coefficient_row(j, &mut scratch, &mut a[j * points..(j + 1) * points], &mut b[j * points..(j + 1) * points]);
            }
            synth.table = Some((a, b));
        }
        Ok(synth)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn density_label(&self) -> &Arc<str> {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.active.is_empty()
    }

    /// Coefficients `A_p = √(2m) (cos θ_p - 1)`, `B_p = √(2m) sin θ_p` of one
    /// active node over all lattice points.
    fn coefficient_row(&self, j: usize, scratch: &mut PhaseScratch, a: &mut [f64], b: &mut [f64]) {
        let dim = self.grid.dim();
        let h = self.grid.spacing().unwrap();
        let xi = &self.nodes[j * dim..(j + 1) * dim];
        scratch.fill(xi, h);
        let amp = self.amplitudes[j];
        let n = scratch.n;
        match dim {
            1 => {
                for p in 0..n {
                    a[p] = amp * scratch.re[p];
                    b[p] = amp * scratch.im[p];
                }
            }
            _ => {
                for (p, (ap, bp)) in a.iter_mut().zip(b.iter_mut()).enumerate() {
                    // e^{i x·ξ} - 1 = Π(1 + D_a) - 1, accumulated axis by axis.
                    let mut rem = p;
                    let mut idx = vec![0usize; dim];
                    for axis in (0..dim).rev() {
                        idx[axis] = rem % n;
                        rem /= n;
                    }
                    let (mut er, mut ei) = (0.0, 0.0);
                    for (axis, &m) in idx.iter().enumerate() {
                        let dr = scratch.re[axis * n + m];
                        let di = scratch.im[axis * n + m];
                        let (pr, pi) = (er * dr - ei * di, er * di + ei * dr);
                        er += dr + pr;
                        ei += di + pi;
                    }
                    *ap = amp * er;
                    *bp = amp * ei;
                }
            }
        }
    }

    /// Draws one realisation into `out` (length = grid size).
    pub fn sample_into(&self, seed: u64, stream: u64, noise: &mut Vec<f64>, out: &mut [f64]) {
        assert_eq!(out.len(), self.grid.len());
        out.fill(0.0);
        if self.is_zero() {
            return;
        }
        let mut rng = stream_rng(seed, stream);
        noise.clear();
        noise.extend((0..2 * self.noise_pairs).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let points = out.len();
        match &self.table {
            Some((a, b)) => {
                for (j, &k) in self.active.iter().enumerate() {
                    let (g1, g2) = (noise[2 * k], noise[2 * k + 1]);
                    let (ra, rb) = (&a[j * points..(j + 1) * points], &b[j * points..(j + 1) * points]);
                    for p in 0..points {
                        out[p] += ra[p] * g1 - rb[p] * g2;
                    }
                }
            }
            None => {
                let mut scratch = PhaseScratch::new(self.grid.dim(), self.grid.per_axis().unwrap());
                let mut ra = vec![0.0; points];
                let mut rb = vec![0.0; points];
                for (j, &k) in self.active.iter().enumerate() {
                    self.coefficient_row(j, &mut scratch, &mut ra, &mut rb);
                    let (g1, g2) = (noise[2 * k], noise[2 * k + 1]);
                    for p in 0..points {
                        out[p] += ra[p] * g1 - rb[p] * g2;
                    }
                }
            }
        }
        // Origin is exactly zero; normalise a possible -0.0.
        out[0] = 0.0;
    }

    pub fn sample(&self, seed: u64, stream: u64) -> FieldSample {
        let mut sample = FieldSample::zeros(self.grid.clone(), self.label.clone(), Method::Spectral, seed, stream);
        let mut noise = Vec::new();
        self.sample_into(seed, stream, &mut noise, &mut sample.values);
        sample
    }
}

/// Per-axis tables `D[m] = e^{i m h ξ_a} - 1`, built by the recurrence
/// `D[m+1] = D[m] + (e^{i h ξ_a} - 1)(1 + D[m])`.
struct PhaseScratch {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl PhaseScratch {
    fn new(dim: usize, n: usize) -> Self {
        PhaseScratch { n, re: vec![0.0; dim * n], im: vec![0.0; dim * n] }
    }

    fn fill(&mut self, xi: &[f64], h: f64) {
        let n = self.n;
        for (axis, &component) in xi.iter().enumerate() {
            let (sr, si) = phase_minus_one(h * component);
            let re = &mut self.re[axis * n..(axis + 1) * n];
            let im = &mut self.im[axis * n..(axis + 1) * n];
            re[0] = 0.0;
            im[0] = 0.0;
            for m in 1..n {
                let (dr, di) = (re[m - 1], im[m - 1]);
                let (ur, ui) = (1.0 + dr, di);
                re[m] = dr + (sr * ur - si * ui);
                im[m] = di + (sr * ui + si * ur);
            }
        }
    }
}

/// One spectral realisation of the field with density `f` on `sgrid`.
pub fn synthesize(
    f: &SpectralDensity,
    fgrid: &FrequencyGrid,
    sgrid: Arc<SpatialGrid>,
    seed: u64,
    stream: u64,
) -> Result<FieldSample> {
    Ok(SpectralSynthesizer::new(f, fgrid, sgrid)?.sample(seed, stream))
}

// ---------------------------------------------------------------------------
// Exact sampling
// ---------------------------------------------------------------------------

/// Gaussian sampler `L g` from a factorised covariance matrix.
#[derive(Debug, Clone)]
pub struct ExactSampler {
    grid: Arc<SpatialGrid>,
    label: Arc<str>,
    factor: Option<DMatrix<f64>>,
    jitter: f64,
}

impl ExactSampler {
    /// Cholesky factor of `M + jitter·I`, starting at `jitter = 1e-8 · max diag`
    /// and doubling up to three times before giving up.
    pub fn new(matrix: &CovarianceMatrix) -> Result<Self> {
        let grid = Arc::new(SpatialGrid::from_points(matrix.points())?);
        let label: Arc<str> = Arc::from(matrix.source());
        let scale = matrix.max_diagonal();
        if scale == 0.0 {
            return Ok(ExactSampler { grid, label, factor: None, jitter: 0.0 });
        }
        let base = matrix.to_dmatrix();
        let n = matrix.len();
        let mut jitter = EPS_PSD * scale;
        for attempt in 0..=JITTER_DOUBLINGS {
            let shifted = &base + DMatrix::<f64>::identity(n, n) * jitter;
            if let Some(chol) = shifted.cholesky() {
                return Ok(ExactSampler { grid, label, factor: Some(chol.l()), jitter });
            }
            if attempt < JITTER_DOUBLINGS {
                jitter *= 2.0;
            }
        }
        Err(Error::Indefinite { jitter })
    }

    /// Jitter the factorisation succeeded with.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn sample_into(&self, seed: u64, stream: u64, out: &mut [f64]) {
        out.fill(0.0);
        let Some(l) = &self.factor else {
            return;
        };
        let mut rng = stream_rng(seed, stream);
        let g = DVector::from_iterator(out.len(), (0..out.len()).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let v = l * g;
        for (i, o) in out.iter_mut().enumerate() {
            *o = if self.grid.is_origin(i) { 0.0 } else { v[i] };
        }
    }

    pub fn sample(&self, seed: u64, stream: u64) -> FieldSample {
        let mut sample = FieldSample::zeros(self.grid.clone(), self.label.clone(), Method::Exact, seed, stream);
        self.sample_into(seed, stream, &mut sample.values);
        sample
    }
}

pub fn sample_exact(matrix: &CovarianceMatrix, seed: u64, stream: u64) -> Result<FieldSample> {
    Ok(ExactSampler::new(matrix)?.sample(seed, stream))
}

// ---------------------------------------------------------------------------
// Coupling
// ---------------------------------------------------------------------------

/// Independent pair `(X₁, X₂)` and `Y = C^{-1/2} X₁ + X₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSample {
    pub x1: FieldSample,
    pub x2: FieldSample,
    pub y_rep: FieldSample,
    pub constant: f64,
}

/// Samples the decomposition of `Y` (density `f_Y`) into `C^{-1/2} X₁`
/// (density `f_X / C`) and an independent remainder with density
/// `f_Y - f_X / C`. Replica `r` uses stream `2r` for `X₁` and `2r + 1` for `X₂`.
#[derive(Debug, Clone)]
pub struct CouplingSampler {
    first: SpectralSynthesizer,
    rest: SpectralSynthesizer,
    constant: f64,
    scale: f64,
    y_label: Arc<str>,
}

impl CouplingSampler {
    pub fn new(certificate: &DominationCertificate, fgrid: &FrequencyGrid, sgrid: Arc<SpatialGrid>) -> Result<Self> {
        certificate.require()?;
        let c = certificate.constant();
        let rest = difference_density(certificate.f_y(), certificate.f_x(), c, certificate)?;
        Ok(CouplingSampler {
            first: SpectralSynthesizer::new(certificate.f_x(), fgrid, sgrid.clone())?,
            rest: SpectralSynthesizer::new(&rest, fgrid, sgrid)?,
            constant: c,
            scale: 1.0 / c.sqrt(),
            y_label: Arc::from(format!("coupled({})", certificate.f_y())),
        })
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `C^{-1/2}`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        self.first.grid()
    }

    /// Fills `x1`, `x2` and `y = C^{-1/2} x1 + x2` for one replica.
    pub fn sample_into(&self, seed: u64, replicate: u64, noise: &mut Vec<f64>, x1: &mut [f64], x2: &mut [f64], y: &mut [f64]) {
        self.first.sample_into(seed, first_stream(replicate), noise, x1);
        self.rest.sample_into(seed, second_stream(replicate), noise, x2);
        for p in 0..y.len() {
            y[p] = self.scale * x1[p] + x2[p];
        }
    }

    pub fn sample(&self, seed: u64, replicate: u64) -> CouplingSample {
        let x1 = self.first.sample(seed, first_stream(replicate));
        let x2 = self.rest.sample(seed, second_stream(replicate));
        let values = x1.values.iter().zip(&x2.values).map(|(a, b)| self.scale * a + b).collect();
        let y_rep = FieldSample {
            grid: x1.grid.clone(),
            values,
            seed,
            stream: replicate,
            method: Method::Spectral,
            density: self.y_label.clone(),
        };
        CouplingSample { x1, x2, y_rep, constant: self.constant }
    }
}

pub fn sample_coupling(
    certificate: &DominationCertificate,
    fgrid: &FrequencyGrid,
    sgrid: Arc<SpatialGrid>,
    seed: u64,
    replicate: u64,
) -> Result<CouplingSample> {
    Ok(CouplingSampler::new(certificate, fgrid, sgrid)?.sample(seed, replicate))
}
