//! Weighted multi-class Tsetlin Machines and teacher/student knowledge
//! distillation between them.
//!
//! - [`machine`]: literals, clauses, class sums, Type I/II feedback training
//! - [`distill`]: clause transfer, soft labels from class sums, soft-label fitting
//! - [`ckd`]: teacher clause-output features and frequency-based column pruning
//! - [`data`]: IDX images, threshold binarization, text booleanization, synthetic data
//! - [`persist`]: the binary model file format
//! - [`experiment`]: the teacher/student/distilled protocol, reports and activation maps

pub mod ckd;
pub mod data;
pub mod distill;
pub mod error;
pub mod experiment;
pub mod machine;
pub mod persist;
pub mod rng;

pub use error::{Error, Result};
pub use machine::{
    build_literals, feedback_probability, BitSample, Clause, ClauseBank, EvalMode,
    LiteralVector, NegativeSampling, Polarity, StateSnapshot, TMParams, Target, TrainingReport,
    TsetlinMachine,
};
