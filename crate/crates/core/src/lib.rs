//! Exactly conservative one-step integrators for polynomial ODEs.
//!
//! Given `ẋ = f(x)` with polynomial conserved quantities `ψ`, the
//! [`multiplier`] module builds the discrete multiplier `Λ^τ` whose product
//! with the state increment telescopes to `ψ(x') - ψ(x)`. The
//! [`integrators`] module turns it into an implicit one-step scheme that keeps
//! `ψ` constant to Newton tolerance, next to four classical baselines.
//! [`analysis`] measures drift, fits its growth `C_a N^s`, and computes the
//! elliptic-curve geometry used in the long-time stability experiment run by
//! [`experiment`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod experiment;
pub mod integrators;
pub mod linalg;
pub mod multiplier;
pub mod polynomial;
pub mod solver;

pub use error::{Error, Result};
pub use integrators::{integrate, FhatForm, StepInfo, Stepper, StepperKind, StepperSpec, Termination, Trajectory};
pub use multiplier::{continuous_multiplier, verify_multiplier, ConservedSystem, DiscreteMultiplier};
pub use polynomial::{MultiIndex, Polynomial};
pub use solver::{newton_solve, NewtonConfig, SolveResult};
