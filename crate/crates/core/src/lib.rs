//! Map-aided evidential occupancy grids.
//!
//! A lidar scan becomes a sensor grid on `{F, O}`, is refined onto the
//! perception frame `{F, I, U, S, M}`, combined with a prior rasterized from
//! building and road polygons, and fused into a temporal perception grid whose
//! conflict and occupancy accumulator separate moving objects from stopped
//! ones and from infrastructure.

pub mod dst;
pub mod export;
pub mod fusion;
pub mod grid;
pub mod map;
mod par;
pub mod render;
pub mod scanlog;
pub mod sensor;
pub mod sim;

use thiserror::Error;

pub use dst::{DstError, FrameOfDiscernment, MassFunction, Subset};
pub use fusion::{Decision, FusionError, FusionParams, Pipeline};
pub use grid::{CellIndex, EvidentialGrid, GridError, GridSpec, PerceptionCell, PerceptionGrid};
pub use map::{MapConfidence, MapError, VectorMap};
pub use sensor::{Beam, LidarScan, Pose, SensorGridParams};
pub use sim::{ScenarioConfig, ScenarioError};

/// Crate-wide error, wrapping the per-module errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Dst(#[from] DstError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    ScanLog(#[from] scanlog::ScanLogError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
