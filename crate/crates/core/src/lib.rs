//! Finite stochastic machines and their Bayesian readings.
//!
//! This crate decides, exactly, whether a finite-state stochastic machine
//! can be interpreted as a Bayesian reasoner: whether some assignment of
//! beliefs to its states updates by Bayes' rule along every possible
//! transition. Everything runs on exact rational arithmetic — the
//! consistency conditions are equalities, and verdicts depend only on
//! which transitions are possible, so there are no tolerances to tune.
//!
//! The pieces:
//!
//! - [`finstoch`]: finite spaces and Markov kernels with the structural
//!   copy/delete/swap operations, disintegration, and Bayesian inversion.
//! - [`machine`]: machines `γ : Y⊗S → Y`, their iteration and support
//!   graph, and coupled simulation against a true environment.
//! - [`interpretation`]: belief maps, inference and filtering models, the
//!   consistency checkers, and belief-propagation synthesis of maps.
//! - [`filtering_verify`]: n-step semantics — iterated models, joint
//!   beliefs over input sequences, and the conditional-of-joint check for
//!   deterministic machines.
//! - [`parametric`]: the counting and difference machines in closed form,
//!   their conjugate-style belief updates, and the map that transports the
//!   interpretation between them.
//! - [`spec_format`] and [`report`]: the spec file format and the stable
//!   report documents used by the CLI.

pub mod filtering_verify;
pub mod finstoch;
pub mod fixtures;
pub mod interpretation;
pub mod machine;
pub mod parametric;
pub mod rational;
pub mod report;
pub mod spec_format;
