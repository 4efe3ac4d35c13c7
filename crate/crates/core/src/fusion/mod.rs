//! Temporal fusion of sensor evidence and map priors into the perception
//! grid.
//!
//! Each epoch, per cell:
//!
//! 1. the sensor cell on `{F, O}` is refined onto `{F, I, U, S, M}`;
//! 2. it is combined with the map prior by Dempster's rule;
//! 3. mass of the previous perception cell on sets containing `M` is partly
//!    moved to the same set without `M`, in proportion to its `ζ`, and the
//!    result is discounted;
//! 4. the two are fused with a conjunctive rule that routes the conflict of
//!    an appearing object to `{M}` and that of a disappearing object to `Ω`;
//! 5. the occupancy accumulator `ζ` is updated from the fused mass and the
//!    conflict.
//!
//! The stored grid is the fused mass of step 4 with its `ζ`; decisions and
//! renders are taken on it.

mod decision;
mod ops;
mod params;
mod pipeline;

use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::dst::{DstError, FrameOfDiscernment, Refining, Subset};
use crate::grid::GridError;

pub use decision::{decide, Decision};
pub use ops::{
    accumulator_specialization, apply_accumulator_specialization, combine_prior, conflict_masses,
    fuse_pg, occupied_mass, refine_sg, update_accumulator, ConflictPair,
};
pub use params::{ContextAlpha, FusionParams, MapContext};
pub use pipeline::{
    decide_grid, step, step_cell, ConflictTotals, EpochStats, Pipeline, StepOutcome,
};

/// Free space.
pub const F: Subset = Subset::singleton(0);
/// Mapped infrastructure (buildings).
pub const I: Subset = Subset::singleton(1);
/// Unmapped infrastructure.
pub const U: Subset = Subset::singleton(2);
/// Temporarily stopped objects.
pub const S: Subset = Subset::singleton(3);
/// Moving objects.
pub const M: Subset = Subset::singleton(4);
/// `{I, U, S, M}`, every occupied class.
pub const OCCUPIED: Subset = Subset::from_bits(0b11110);
/// Map prior support inside buildings, `{I}`.
pub const BUILDING: Subset = I;
/// Map prior support on roads, `{F, S, M}`.
pub const ROAD: Subset = Subset::from_bits(0b11001);
/// Map prior support in the intermediate space, `{F, U, S, M}`.
pub const INTERMEDIATE: Subset = Subset::from_bits(0b11101);
/// `Ω` of the perception frame.
pub const OMEGA_PG: Subset = Subset::full(5);

/// Sensor-grid free space `{F}`.
pub const SG_FREE: Subset = Subset::singleton(0);
/// Sensor-grid occupied space `{O}`.
pub const SG_OCCUPIED: Subset = Subset::singleton(1);

/// The perception frame `{F, I, U, S, M}`, in that bit order.
pub fn omega_pg() -> &'static Arc<FrameOfDiscernment> {
    static FRAME: OnceLock<Arc<FrameOfDiscernment>> = OnceLock::new();
    FRAME.get_or_init(|| {
        Arc::new(FrameOfDiscernment::new(["F", "I", "U", "S", "M"]).expect("valid frame"))
    })
}

/// The sensor frame `{F, O}`.
pub fn omega_sg() -> &'static Arc<FrameOfDiscernment> {
    static FRAME: OnceLock<Arc<FrameOfDiscernment>> = OnceLock::new();
    FRAME.get_or_init(|| Arc::new(FrameOfDiscernment::new(["F", "O"]).expect("valid frame")))
}

/// `F -> {F}`, `O -> {I, U, S, M}`.
pub fn sg_refining() -> &'static Refining {
    static REFINING: OnceLock<Refining> = OnceLock::new();
    REFINING.get_or_init(|| {
        Refining::new(omega_sg().clone(), omega_pg().clone(), vec![F, OCCUPIED])
            .expect("valid refining")
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FusionError {
    #[error(transparent)]
    Dst(#[from] DstError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Sensor(#[from] crate::sensor::SensorError),
    #[error("fusion parameter {name} = {value} is outside [0, 1]")]
    InvalidParam { name: &'static str, value: f64 },
    #[error("cell ({i},{j}): {source}")]
    Cell {
        i: usize,
        j: usize,
        #[source]
        source: Box<FusionError>,
    },
}
