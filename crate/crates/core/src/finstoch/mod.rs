//! Exact-arithmetic engine for finite probability: spaces, Markov kernels,
//! the structural copy/delete/swap kernels, disintegration, and Bayesian
//! inversion. All operations are pure functions over immutable values and
//! all arithmetic is exact.

mod axioms;
mod kernel;
mod space;

pub use axioms::{
    random_deterministic_kernel, random_dist, random_kernel, random_positive_dist,
    random_positive_kernel, random_space, run_axiom_suite, AxiomFamily, AxiomReport,
};
pub use kernel::{Dist, Kernel};
pub use space::{Factor, FinSpace};

use thiserror::Error;

/// Errors from constructing or combining spaces and kernels.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FinStochError {
    #[error("space `{space}` has no elements")]
    EmptySpace { space: String },
    #[error("space `{space}` declares label `{label}` more than once")]
    DuplicateLabel { space: String, label: String },
    #[error("cannot compose: left destination `{left_dst}` differs from right source `{right_src}`")]
    ComposeMismatch { left_dst: String, right_src: String },
    #[error("kernel spaces differ: `{a}` vs `{b}`")]
    SpaceMismatch { a: String, b: String },
    #[error("entry table shape does not match spaces `{src}` → `{dst}`")]
    ShapeMismatch { src: String, dst: String },
    #[error("row `{row}` sums to {sum}, expected exactly 1")]
    NonStochasticRow { row: String, sum: String },
    #[error("negative probability {value} at ({row}, {col})")]
    NegativeEntry {
        row: String,
        col: String,
        value: String,
    },
    #[error("destination `{space}` is not a product space")]
    NotAProduct { space: String },
    #[error("factor index {index} out of range for `{space}`")]
    FactorOutOfRange { index: usize, space: String },
    #[error("factor index {index} listed twice")]
    RepeatedFactor { index: usize },
    #[error("unknown label `{label}` in space `{space}`")]
    UnknownLabel { label: String, space: String },
    #[error("kernel out of `{src}` is not a distribution (source must be the unit space)")]
    NotADistribution { src: String },
}
