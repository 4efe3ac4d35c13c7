//! Dempster-Shafer primitives.
//!
//! Subsets of a frame of discernment are bitmasks ([`Subset`]) over the
//! frame's ordered labels, and mass functions store one mass per subset in a
//! dense `2^n` array. Every operation here is a pure function over immutable
//! values.

mod frame;
mod mass;
mod rules;
mod transform;

use thiserror::Error;

pub use frame::{FrameOfDiscernment, Subset, MAX_FRAME_SIZE};
pub use mass::MassFunction;
pub use rules::{
    combine_conjunctive, combine_dempster, combine_disjunctive, combine_yager, conflict_degree,
};
pub use transform::{discount, pignistic, refine, specialize, Pignistic, Refining, Specialization};

/// Tolerance used for every normalization check.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Dempster's rule treats `K >= 1 - TOTAL_CONFLICT_EPS` as total conflict.
pub const TOTAL_CONFLICT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DstError {
    #[error("frame must have between 1 and {MAX_FRAME_SIZE} hypotheses, got {0}")]
    FrameSize(usize),
    #[error("invalid hypothesis label {0:?}")]
    InvalidLabel(String),
    #[error("duplicate hypothesis label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown hypothesis label {0:?}")]
    UnknownLabel(String),
    #[error("subset {0:#b} is not part of the frame")]
    SubsetOutOfFrame(u32),
    #[error("expected {expected} masses, got {actual}")]
    MassCount { expected: usize, actual: usize },
    #[error("mass {value} on subset {subset:#b} is outside [0, 1]")]
    MassOutOfRange { subset: u32, value: f64 },
    #[error("masses sum to {0}, expected 1")]
    MassSum(f64),
    #[error("mass function is not normal: m(∅) = {0}")]
    NotNormal(f64),
    #[error("mass functions are defined on different frames")]
    FrameMismatch,
    #[error("total conflict, combination undefined")]
    TotalConflict,
    #[error("discount factor {0} is outside [0, 1]")]
    InvalidDiscount(f64),
    #[error("invalid refining: {0}")]
    InvalidRefining(String),
    #[error("invalid specialization: {0}")]
    InvalidSpecialization(String),
}
