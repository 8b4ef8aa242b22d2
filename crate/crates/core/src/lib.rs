//! Resonance theory for two coupled asymmetric oscillators
//!
//! ```text
//! x₁'' + a₁x₁⁺ - b₁x₁⁻ + φ₁(x₂) = p₁(t)
//! x₂'' + a₂x₂⁺ - b₂x₂⁻ + φ₂(x₁) = p₂(t)
//! ```
//!
//! with both `(aᵢ, bᵢ)` on the same Fučík curve `1/√a + 1/√b = 2/n`.
//!
//! * [`special`]: asymmetric cosine/sine, action-angle coordinates.
//! * [`resonance`]: the torus map `L`, its Jacobian and its zeros.
//! * [`spectral`]: D± matrices and the cone contraction estimate.
//! * [`dynamics`]: integration, Poincaré map, invariant sets, orbits.
//! * [`scenarios`]: end-to-end pipelines for three coupling regimes.
//!
//! Batch work runs through [`Execution`]; the `parallel` feature (on by
//! default) backs it with rayon.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod quadrature;
pub mod resonance;
pub mod scenarios;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
pub use resonance::{CouplingFunction, ForcingSignal, ResonanceEval, SystemConfig, TorusZero};
pub use special::{CartesianState, FucikPair, PolarState, TorusPoint};
pub use spectral::{DpmClass, Matrix2};
