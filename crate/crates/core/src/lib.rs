//! Resolvent splittings for monotone inclusions `0 in A x + B x (+ C x)`.
//!
//! The crate provides the operators and their resolvents, the fixed-point /
//! solution mapping pairs of several splitting methods, a generic iteration
//! engine, exact rational certificates that a scalar system encodes the
//! intended inclusion, a divergence construction for the two-step family, and
//! three seeded benchmark problems.

pub mod error;
pub mod operators;
pub mod certificate;
pub mod counterexamples;
pub mod engine;
pub mod experiments;
pub mod splittings;

pub use error::{Error, Result};
pub use operators::{MonotoneOp, Vector};
pub use splittings::{LiftedPoint, Method, Splitting, StepOutput};
