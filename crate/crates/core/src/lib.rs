//! Conservative ODE integration by minimal-norm discrete multipliers.
//!
//! A consistent one-step scheme `f^τ` is corrected to
//! `f^τ − (Λ^τ)⁺(Λ^τ f^τ + ∂_t^τψ)`, the smallest ℓ² change that makes the
//! discrete multiplier conditions hold, so the conserved quantities `ψ` are
//! preserved up to the fixed-point tolerance.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod multiplier;
pub mod ode;
pub mod steppers;
pub mod systems;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use multiplier::{telescoping_multiplier, MultiplierMatrix};
pub use ode::SystemSpec;
pub use steppers::{BaseScheme, Method, StepDiagnostics, StepperConfig};
pub use harness::{integrate, summarize, ExperimentReport, Trajectory};
