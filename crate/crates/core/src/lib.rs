//! Multigrid-reduction-in-time for a PWM-driven nonlinear eddy-current
//! cable model.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: radial finite-element model of a coaxial cable with a
//!   saturable conducting shield, coupled to a voltage-driven winding.
//! * [`stepper`]: backward Euler with a Newton solve per step.
//! * [`mgrit`]: temporal hierarchy, FCF-relaxation, FAS coarse problems and
//!   V-/F-cycles.
//! * [`parallel`]: block partition over time and a threaded executor that
//!   exchanges boundary states between neighbours.
//! * [`harness`]: configuration files, run orchestration and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod linalg;
pub mod mgrit;
pub mod model;
pub mod parallel;
pub mod stepper;

pub use error::{Error, Result};
