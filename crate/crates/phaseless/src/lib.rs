//! Reconstruction of sound-soft obstacles from phaseless far-field data.
//!
//! The library covers the full pipeline:
//!
//! * [`specfun`] — cylindrical Bessel/Hankel functions of integer order;
//! * [`geometry`] — parametric obstacle boundaries and validity checks;
//! * [`forward`] — boundary-integral (Nyström) solver for the exterior
//!   Helmholtz Dirichlet problem and the phaseless forward map;
//! * [`observe`] — synthetic noisy observations and noise covariances;
//! * [`bayes`] — prior, data misfit and acceptance ratios;
//! * [`mcmc`] — Gibbs/pCN samplers with random proposal variance,
//!   multi-candidate and surrogate-screened variants;
//! * [`gpc`] — Hermite polynomial-chaos surrogate of the forward map;
//! * [`metrics`] — Hausdorff distances, ensemble statistics, cost models.
//!
//! All numerical kernels are generic over the scalar type through the
//! [`Real`] trait; `f64` is the working precision used by the samplers and
//! the command-line driver, and concrete aliases for it are exported at the
//! crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub mod bayes;
pub mod forward;
pub mod geometry;
pub mod gpc;
pub mod mcmc;
pub mod metrics;
pub mod observe;
pub mod specfun;
pub mod stream;

pub mod reference;

mod error;

pub use error::{Error, Result};
pub use num_complex::Complex;

/// Scalar type the numerical core is generic over.
///
/// Implemented for `f32` and `f64`. The bound collects everything the
/// kernels need: IEEE arithmetic, math constants, conversions from literal
/// constants, and thread safety for the parallel drivers.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::ops::DivAssign
    + std::ops::RemAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lossy conversion of a `usize` count.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }

    /// Conversion back to `f64` for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite value")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + std::ops::AddAssign
        + std::ops::SubAssign
        + std::ops::MulAssign
        + std::ops::DivAssign
        + std::ops::RemAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Complex value in working precision.
pub type C64 = Complex<f64>;

/// Obstacle parameter vector in working precision.
pub type ObstacleParams64 = geometry::ObstacleParams<f64>;
/// Boundary curve in working precision.
pub type BoundaryCurve64 = geometry::BoundaryCurve<f64>;
/// Scattering setup in working precision.
pub type ScatteringSetup64 = forward::ScatteringSetup<f64>;
/// Observation matrix in working precision.
pub type ObservationMatrix64 = observe::ObservationMatrix<f64>;
/// Chaos surrogate in working precision.
pub type GpcSurrogate64 = gpc::GpcSurrogate<f64>;
