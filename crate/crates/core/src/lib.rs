//! Gaussian random fields with stationary increments, built from spectral
//! densities.
//!
//! A field is represented harmonically as
//!
//! ```text
//! X(x) = ∫ (e^{i x·ξ} - 1) f(ξ)^{1/2} dŴ(ξ)
//! ```
//!
//! and everything here works on a dyadic-annulus discretisation of that
//! integral:
//!
//! * [`spectral`]: density catalog, admissibility, pointwise domination.
//! * [`grid`] and [`covariance`]: frequency quadrature and increment kernels.
//! * [`synthesis`]: spectral sampler, exact factorised sampler, coupling sampler.
//! * [`banach_norms`]: discrete sup and Hölder norms on sampled paths.
//! * [`verification`]: Monte Carlo ball probabilities with exact binomial
//!   bounds and verdicts for Anderson-type inequalities.

#![allow(clippy::needless_range_loop)]

pub mod banach_norms;
pub mod covariance;
pub mod error;
pub mod grid;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod synthesis;
pub mod verification;

pub use banach_norms::NormFunctional;
pub use covariance::{covariance_matrix, coupling_covariance, increment_covariance, CovarianceMatrix};
pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use spectral::{
    check_admissible, check_domination, difference_density, estimate_min_c, Admissibility,
    DominationCertificate, DominationVerdict, Modulation, SpectralDensity,
};
pub use synthesis::{
    sample_coupling, sample_exact, synthesize, CouplingSample, CouplingSampler, ExactSampler,
    FieldSample, Method, SpatialGrid, SpectralSynthesizer,
};
pub use verification::{BallEstimate, CouplingLawReport, HurstEstimate, InequalityReport, MCConfig, RadiusRow, Verdict};
