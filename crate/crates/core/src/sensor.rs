//! Lidar scans and the sensor grid on `{F, O}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dst::{combine_dempster, DstError, MassFunction};
use crate::fusion::{omega_sg, SG_FREE, SG_OCCUPIED};
use crate::grid::{CellIndex, EvidentialGrid, GridSpec};
use crate::par;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensorError {
    #[error("beam {index}: range {range} is outside (0, {max_range}]")]
    BadRange {
        index: usize,
        range: f64,
        max_range: f64,
    },
    #[error("beam {index}: non-finite bearing")]
    BadBearing { index: usize },
    #[error("maximum range must be positive, got {0}")]
    BadMaxRange(f64),
    #[error("sensor parameter {name} = {value} is outside [0, 1]")]
    BadParam { name: &'static str, value: f64 },
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    } else if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Vehicle pose in the global frame. Heading is counter-clockwise from east.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }
}

/// One lidar return; `bearing` is relative to the vehicle heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam {
    pub bearing: f64,
    pub range: f64,
    pub hit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub beams: Vec<Beam>,
    pub max_range: f64,
}

impl LidarScan {
    pub fn new(beams: Vec<Beam>, max_range: f64) -> Result<Self, SensorError> {
        let scan = Self { beams, max_range };
        scan.validate()?;
        Ok(scan)
    }

    pub fn empty(max_range: f64) -> Self {
        Self {
            beams: Vec::new(),
            max_range,
        }
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(SensorError::BadMaxRange(self.max_range));
        }
        for (index, b) in self.beams.iter().enumerate() {
            if !b.bearing.is_finite() {
                return Err(SensorError::BadBearing { index });
            }
            if !(b.range > 0.0 && b.range <= self.max_range) {
                return Err(SensorError::BadRange {
                    index,
                    range: b.range,
                    max_range: self.max_range,
                });
            }
        }
        Ok(())
    }
}

/// Masses given to free and occupied cells by one beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorGridParams {
    #[serde(default = "SensorGridParams::default_mu_f")]
    pub mu_f: f64,
    #[serde(default = "SensorGridParams::default_mu_o")]
    pub mu_o: f64,
}

impl SensorGridParams {
    fn default_mu_f() -> f64 {
        0.7
    }
    fn default_mu_o() -> f64 {
        0.8
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        for (name, value) in [("mu_f", self.mu_f), ("mu_o", self.mu_o)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SensorError::BadParam { name, value });
            }
        }
        Ok(())
    }
}

impl Default for SensorGridParams {
    fn default() -> Self {
        Self {
            mu_f: Self::default_mu_f(),
            mu_o: Self::default_mu_o(),
        }
    }
}

/// A hit point exactly on a cell boundary belongs to the cell beyond it
/// along the beam; the end of a beam without a hit belongs to the cell
/// before it.
const END_NUDGE: f64 = 1e-9;

/// Cells crossed by the segment `from -> to`, in order, on the unbounded
/// lattice of `spec` (indices may be negative or past the grid). The last
/// cell is the one containing `end_cell_point`, which must lie on the
/// segment's extension within a negligible distance of `to`.
fn walk(
    spec: &GridSpec,
    from: (f64, f64),
    to: (f64, f64),
    end_cell_point: (f64, f64),
) -> Vec<(i64, i64)> {
    let (gx0, gy0) = spec.to_grid_coords(from.0, from.1);
    let (gx1, gy1) = spec.to_grid_coords(to.0, to.1);
    let (ex, ey) = spec.to_grid_coords(end_cell_point.0, end_cell_point.1);
    let (mut i, mut j) = (gx0.floor() as i64, gy0.floor() as i64);
    let (i_end, j_end) = (ex.floor() as i64, ey.floor() as i64);
    let (dx, dy) = (gx1 - gx0, gy1 - gy0);

    let step_i: i64 = if i_end > i { 1 } else { -1 };
    let step_j: i64 = if j_end > j { 1 } else { -1 };
    let boundary_t = |g: f64, k: i64, d: f64| -> f64 {
        if d > 0.0 {
            ((k + 1) as f64 - g) / d
        } else if d < 0.0 {
            (g - k as f64) / -d
        } else {
            f64::INFINITY
        }
    };
    let mut t_max_x = boundary_t(gx0, i, dx);
    let mut t_max_y = boundary_t(gy0, j, dy);
    let t_delta_x = if dx != 0.0 {
        1.0 / dx.abs()
    } else {
        f64::INFINITY
    };
    let t_delta_y = if dy != 0.0 {
        1.0 / dy.abs()
    } else {
        f64::INFINITY
    };

    let steps = (i_end - i).unsigned_abs() + (j_end - j).unsigned_abs();
    let mut cells = Vec::with_capacity(steps as usize + 1);
    cells.push((i, j));
    for _ in 0..steps {
        let move_x = if i == i_end {
            false
        } else if j == j_end {
            true
        } else {
            t_max_x < t_max_y
        };
        if move_x {
            i += step_i;
            t_max_x += t_delta_x;
        } else {
            j += step_j;
            t_max_y += t_delta_y;
        }
        cells.push((i, j));
    }
    cells
}

/// Cells a beam marks free and the cell it marks occupied (if any), clipped
/// to the grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeamTrace {
    pub free: Vec<CellIndex>,
    pub occupied: Option<CellIndex>,
}

pub fn trace_beam(beam: &Beam, pose: &Pose, spec: &GridSpec) -> BeamTrace {
    let angle = pose.heading + beam.bearing;
    let (ux, uy) = (angle.cos(), angle.sin());
    let from = (pose.x, pose.y);
    let to = (pose.x + beam.range * ux, pose.y + beam.range * uy);
    let r = if beam.hit {
        beam.range + END_NUDGE
    } else {
        (beam.range - END_NUDGE).max(0.0)
    };
    let end_point = (pose.x + r * ux, pose.y + r * uy);
    let cells = walk(spec, from, to, end_point);
    let in_grid = |&(i, j): &(i64, i64)| {
        (i >= 0 && j >= 0 && (i as usize) < spec.width && (j as usize) < spec.height)
            .then(|| CellIndex::new(i as usize, j as usize))
    };
    if beam.hit {
        let (last, before) = cells.split_last().expect("walk yields at least one cell");
        BeamTrace {
            free: before.iter().filter_map(in_grid).collect(),
            occupied: in_grid(last),
        }
    } else {
        BeamTrace {
            free: cells.iter().filter_map(in_grid).collect(),
            occupied: None,
        }
    }
}

/// Evidence on one cell from `count` beams that each give the simple
/// support `weight`: their Dempster combination, in closed form.
fn repeated_support(count: u32, weight: f64) -> f64 {
    1.0 - (1.0 - weight).powi(count as i32)
}

/// Builds the sensor grid on `{F, O}`. Each beam marks the cells it crosses
/// before the hit as free (`μ_F`) and the hit cell as occupied (`μ_O`);
/// contributions of several beams to one cell are combined with Dempster's
/// rule. A cell where free and occupied evidence are both certain is left
/// vacuous.
pub fn build_sg(
    scan: &LidarScan,
    pose: &Pose,
    spec: &GridSpec,
    params: &SensorGridParams,
) -> EvidentialGrid {
    let frame = omega_sg().clone();
    let traces = par::map_indexed(&scan.beams, |_, beam| trace_beam(beam, pose, spec));
    let mut free_hits = vec![0u32; spec.cell_count()];
    let mut occupied_hits = vec![0u32; spec.cell_count()];
    for trace in &traces {
        for &c in &trace.free {
            free_hits[spec.linear(c)] += 1;
        }
        if let Some(c) = trace.occupied {
            occupied_hits[spec.linear(c)] += 1;
        }
    }

    let omega = frame.omega();
    let cells = free_hits
        .iter()
        .zip(&occupied_hits)
        .map(|(&nf, &no)| {
            if nf == 0 && no == 0 {
                return MassFunction::vacuous(frame.clone());
            }
            let free_w = repeated_support(nf, params.mu_f);
            let occ_w = repeated_support(no, params.mu_o);
            let free = MassFunction::from_focal(
                frame.clone(),
                &[(SG_FREE, free_w), (omega, 1.0 - free_w)],
            )
            .expect("free support is a valid mass function");
            let occupied = MassFunction::from_focal(
                frame.clone(),
                &[(SG_OCCUPIED, occ_w), (omega, 1.0 - occ_w)],
            )
            .expect("occupied support is a valid mass function");
            match combine_dempster(&free, &occupied) {
                Ok(m) => m,
                Err(DstError::TotalConflict) => {
                    log::warn!("certain free and occupied evidence on one cell; left vacuous");
                    MassFunction::vacuous(frame.clone())
                }
                Err(e) => unreachable!("sensor cell combination failed: {e}"),
            }
        })
        .collect();
    EvidentialGrid::from_cells(*spec, frame, cells).expect("sensor cells are valid")
}
