//! Fourier ratio of compactly supported measures.
//!
//! The crate computes the regularized Fourier norms
//! `X_p = (R^{-d} ∫ |(fμ)^ ψ̂(ξ/R)|^p dξ)^{1/p}` of weighted atomic measures,
//! their ratio `FR = X_1 / X_2`, the geometric comparators that bound it,
//! random trigonometric approximation driven by `|ĝ|`, the discrete theory on
//! `Z_N`, and basis-pursuit recovery from incomplete Fourier data.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases at the crate root fix the scalar to `f64`.

pub mod discrete;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod recovery;
pub mod scalar;
pub mod spectral;
pub mod stats;
pub mod trig;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use num_complex::Complex;

pub type Complex64 = Complex<f64>;
pub type AtomicMeasure64 = measure::AtomicMeasure<f64>;
pub type ConvexBody64 = measure::ConvexBody2D<f64>;
pub type Mollifier64 = measure::Mollifier<f64>;
pub type FrequencyGrid64 = spectral::FrequencyGrid<f64>;
pub type SpectralField64 = spectral::SpectralField<f64>;
pub type RatioReport64 = spectral::RatioReport<f64>;
pub type GridPolicy64 = spectral::GridPolicy<f64>;
pub type FrequencySet64 = geometry::FrequencySet;
pub type TrigPolynomial64 = trig::TrigPolynomial<f64>;
pub type SpatialDomain64 = trig::SpatialDomain<f64>;
pub type SamplingDistribution64 = trig::SamplingDistribution<f64>;
pub type DiscreteSignal64 = discrete::DiscreteSignal<f64>;
pub type RecoveryInstance64 = recovery::RecoveryInstance<f64>;
