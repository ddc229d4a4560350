//! Scalar abstraction: the numeric kernel is generic over the real type.
//!
//! Everything spectral works over `Complex<R>` with `R: Real`. The trait adds
//! the conversion traits the numerics need plus per-type tolerance levels, so
//! f32 runs carry looser (but still meaningful) acceptance thresholds than
//! f64 runs.

use num_traits::{FromPrimitive, NumCast};

/// Real scalar usable throughout the numeric layer.
///
/// The three tolerance levels are used consistently:
///
/// * [`Real::tol_construction`]: exactness of constructed objects (unitarity,
///   normalization, Hermiticity) — dominated by rounding, not by algorithms.
/// * [`Real::tol_analytic`]: agreement between an analytic formula and a
///   numerical linear-algebra result.
/// * [`Real::tol_physics`]: agreement between two independently computed
///   physical quantities (pipelines, closed forms).
pub trait Real: nalgebra::RealField + FromPrimitive + NumCast + Copy {
    fn tol_construction() -> Self;
    fn tol_analytic() -> Self;
    fn tol_physics() -> Self;

    /// Shorthand for lossy conversion from f64 (used for literal constants).
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("constant out of range for scalar type")
    }

    /// Lossy conversion from usize.
    fn of_usize(n: usize) -> Self {
        <Self as NumCast>::from(n).expect("count out of range for scalar type")
    }

    fn to_f64(self) -> f64 {
        <f64 as NumCast>::from(self).expect("scalar not representable as f64")
    }
}

impl Real for f64 {
    fn tol_construction() -> Self {
        1e-12
    }
    fn tol_analytic() -> Self {
        1e-10
    }
    fn tol_physics() -> Self {
        1e-8
    }
}

impl Real for f32 {
    fn tol_construction() -> Self {
        1e-5
    }
    fn tol_analytic() -> Self {
        1e-4
    }
    fn tol_physics() -> Self {
        1e-3
    }
}
