//! Laplace-Beltrami eigenvalues, polyharmonic-spline interpolation, and
//! spectral zeta functions on compact model manifolds.

pub mod dd;
pub mod diagnostics;
pub mod error;
pub mod legendre;
pub mod linalg;
pub mod manifold;
pub mod parallel;
pub mod pointset;
pub mod ritz;
pub mod scalar;
pub mod spectral;
pub mod spline;
pub mod zeta;

pub use dd::Dd;
pub use error::{Error, Result};
pub use scalar::Scalar;

/// Spline space in plain double precision: adequate for the torus and the
/// sphere at tested orders, and for small circle spaces.
pub type SplineSpace64 = spline::SplineSpace<f64>;
/// Spline space in double-double precision: required on the circle once
/// the kernel conditioning (N/2)^{4k} overwhelms f64.
pub type SplineSpaceDd = spline::SplineSpace<Dd>;
pub type RitzResult64 = ritz::RitzResult<f64>;
pub type RitzResultDd = ritz::RitzResult<Dd>;
pub type SpectralVector64 = spectral::SpectralVector<f64>;
pub type SpectralVectorDd = spectral::SpectralVector<Dd>;
