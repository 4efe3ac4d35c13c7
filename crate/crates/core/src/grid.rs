//! World-fixed lattices of evidential cells.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dst::{DstError, FrameOfDiscernment, MassFunction};
use crate::fusion::omega_pg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    #[error("cell ({i}, {j}) is outside the {width}x{height} grid")]
    OutOfBounds {
        i: usize,
        j: usize,
        width: usize,
        height: usize,
    },
    #[error("grids do not share the same spec")]
    SpecMismatch,
    #[error("expected {expected} cells, got {actual}")]
    CellCount { expected: usize, actual: usize },
    #[error("cell mass function is not on the grid frame")]
    FrameMismatch,
    #[error("accumulator {0} is outside [0, 1]")]
    InvalidAccumulator(f64),
    #[error(transparent)]
    Dst(#[from] DstError),
}

/// Integer cell coordinates; `i` runs east, `j` runs north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellIndex {
    pub i: usize,
    pub j: usize,
}

impl CellIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

/// Placement of a grid in the global frame. Cell `(i, j)` covers
/// `[east + i·size, east + (i+1)·size] × [north + j·size, north + (j+1)·size]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_east: f64,
    pub origin_north: f64,
    #[serde(default = "GridSpec::default_cell_size")]
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub const DEFAULT_CELL_SIZE: f64 = 0.5;

    fn default_cell_size() -> f64 {
        Self::DEFAULT_CELL_SIZE
    }

    pub fn new(
        origin_east: f64,
        origin_north: f64,
        cell_size: f64,
        width: usize,
        height: usize,
    ) -> Result<Self, GridError> {
        let spec = Self {
            origin_east,
            origin_north,
            cell_size,
            width,
            height,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(GridError::InvalidSpec(format!(
                "cell size must be positive, got {}",
                self.cell_size
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GridError::InvalidSpec(format!(
                "grid must be at least 1x1, got {}x{}",
                self.width, self.height
            )));
        }
        if !self.origin_east.is_finite() || !self.origin_north.is_finite() {
            return Err(GridError::InvalidSpec("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, cell: CellIndex) -> bool {
        cell.i < self.width && cell.j < self.height
    }

    /// Row-major position of a cell, `j * width + i`.
    pub fn linear(&self, cell: CellIndex) -> usize {
        cell.j * self.width + cell.i
    }

    pub fn cell_at(&self, linear: usize) -> CellIndex {
        CellIndex::new(linear % self.width, linear / self.width)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.cell_count()).map(move |k| self.cell_at(k))
    }

    /// Fractional cell coordinates of a world point (not bounds-checked).
    pub fn to_grid_coords(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin_east) / self.cell_size,
            (y - self.origin_north) / self.cell_size,
        )
    }

    /// The cell containing `(x, y)`. Points on an interior cell boundary go
    /// to the higher-index cell; the grid's upper outer edge belongs to the
    /// last cell.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<CellIndex> {
        let (gx, gy) = self.to_grid_coords(x, y);
        let i = Self::axis_index(gx, self.width)?;
        let j = Self::axis_index(gy, self.height)?;
        Some(CellIndex::new(i, j))
    }

    fn axis_index(g: f64, count: usize) -> Option<usize> {
        if g.is_nan() || g < 0.0 {
            return None;
        }
        let k = g.floor();
        if k < count as f64 {
            Some(k as usize)
        } else if g == count as f64 {
            Some(count - 1)
        } else {
            None
        }
    }

    /// Midpoint of a cell's box.
    pub fn cell_center(&self, cell: CellIndex) -> Result<(f64, f64), GridError> {
        if !self.contains(cell) {
            return Err(self.out_of_bounds(cell));
        }
        Ok(self.center_unchecked(cell))
    }

    pub(crate) fn center_unchecked(&self, cell: CellIndex) -> (f64, f64) {
        let lower_x = self.origin_east + cell.i as f64 * self.cell_size;
        let upper_x = self.origin_east + (cell.i + 1) as f64 * self.cell_size;
        let lower_y = self.origin_north + cell.j as f64 * self.cell_size;
        let upper_y = self.origin_north + (cell.j + 1) as f64 * self.cell_size;
        ((lower_x + upper_x) / 2.0, (lower_y + upper_y) / 2.0)
    }

    fn out_of_bounds(&self, cell: CellIndex) -> GridError {
        GridError::OutOfBounds {
            i: cell.i,
            j: cell.j,
            width: self.width,
            height: self.height,
        }
    }

    pub(crate) fn check(&self, cell: CellIndex) -> Result<usize, GridError> {
        if self.contains(cell) {
            Ok(self.linear(cell))
        } else {
            Err(self.out_of_bounds(cell))
        }
    }
}

/// A grid whose cells carry normal mass functions on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidentialGrid {
    spec: GridSpec,
    frame: Arc<FrameOfDiscernment>,
    cells: Vec<MassFunction>,
}

impl EvidentialGrid {
    /// All cells vacuous.
    pub fn new(spec: GridSpec, frame: Arc<FrameOfDiscernment>) -> Self {
        let cells = vec![MassFunction::vacuous(frame.clone()); spec.cell_count()];
        Self { spec, frame, cells }
    }

    /// Cells in row-major order (see [`GridSpec::linear`]).
    pub fn from_cells(
        spec: GridSpec,
        frame: Arc<FrameOfDiscernment>,
        cells: Vec<MassFunction>,
    ) -> Result<Self, GridError> {
        if cells.len() != spec.cell_count() {
            return Err(GridError::CellCount {
                expected: spec.cell_count(),
                actual: cells.len(),
            });
        }
        for m in &cells {
            if !m.is_on_frame(&frame) {
                return Err(GridError::FrameMismatch);
            }
            if !m.is_normal() {
                return Err(DstError::NotNormal(m.conflict()).into());
            }
        }
        Ok(Self { spec, frame, cells })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn frame(&self) -> &Arc<FrameOfDiscernment> {
        &self.frame
    }

    pub fn cells(&self) -> &[MassFunction] {
        &self.cells
    }

    pub fn get(&self, cell: CellIndex) -> Result<&MassFunction, GridError> {
        Ok(&self.cells[self.spec.check(cell)?])
    }

    pub fn set(&mut self, cell: CellIndex, m: MassFunction) -> Result<(), GridError> {
        let k = self.spec.check(cell)?;
        if !m.is_on_frame(&self.frame) {
            return Err(GridError::FrameMismatch);
        }
        if !m.is_normal() {
            return Err(DstError::NotNormal(m.conflict()).into());
        }
        self.cells[k] = m;
        Ok(())
    }
}

/// A perception-grid cell: a mass function on `{F, I, U, S, M}` and the
/// occupancy accumulator `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionCell {
    pub mass: MassFunction,
    pub zeta: f64,
}

impl PerceptionCell {
    pub fn new(mass: MassFunction, zeta: f64) -> Result<Self, GridError> {
        if !(0.0..=1.0).contains(&zeta) {
            return Err(GridError::InvalidAccumulator(zeta));
        }
        if !mass.is_on_frame(omega_pg()) {
            return Err(GridError::FrameMismatch);
        }
        Ok(Self { mass, zeta })
    }

    /// Vacuous mass, `ζ = 0`.
    pub fn fresh() -> Self {
        Self {
            mass: MassFunction::vacuous(omega_pg().clone()),
            zeta: 0.0,
        }
    }
}

/// The temporal fusion product.
#[derive(Debug, Clone, PartialEq)]
pub struct PerceptionGrid {
    spec: GridSpec,
    cells: Vec<PerceptionCell>,
}

impl PerceptionGrid {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            spec,
            cells: vec![PerceptionCell::fresh(); spec.cell_count()],
        }
    }

    pub fn from_cells(spec: GridSpec, cells: Vec<PerceptionCell>) -> Result<Self, GridError> {
        if cells.len() != spec.cell_count() {
            return Err(GridError::CellCount {
                expected: spec.cell_count(),
                actual: cells.len(),
            });
        }
        Ok(Self { spec, cells })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[PerceptionCell] {
        &self.cells
    }

    pub fn get(&self, cell: CellIndex) -> Result<&PerceptionCell, GridError> {
        Ok(&self.cells[self.spec.check(cell)?])
    }

    pub fn set(&mut self, cell: CellIndex, value: PerceptionCell) -> Result<(), GridError> {
        let k = self.spec.check(cell)?;
        self.cells[k] = value;
        Ok(())
    }
}
