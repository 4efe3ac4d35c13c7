use serde::{Deserialize, Serialize};

use crate::dst::{discount, MassFunction};
use crate::grid::{EvidentialGrid, GridError, GridSpec, PerceptionCell, PerceptionGrid};
use crate::par;
use crate::sensor::{build_sg, LidarScan, Pose, SensorGridParams};

use super::{
    apply_accumulator_specialization, combine_prior, decide, fuse_pg, omega_pg, omega_sg,
    refine_sg, update_accumulator, ConflictPair, Decision, FusionError, FusionParams,
};

/// One cell of one epoch. `prev` holds the fused mass and accumulator of
/// the previous epoch; it is specialized with its own `ζ` and discounted
/// before being fused with the new evidence. The result is the new fused
/// mass with its accumulator, and the conflict split of the fusion.
pub fn step_cell(
    prev: &PerceptionCell,
    sg: &MassFunction,
    gg: &MassFunction,
    params: &FusionParams,
) -> Result<(PerceptionCell, ConflictPair), FusionError> {
    let sg_pg = refine_sg(sg)?;
    let sg_prior = combine_prior(&sg_pg, gg)?;
    let specialized = apply_accumulator_specialization(&prev.mass, prev.zeta)?;
    let aged = discount(&specialized, params.alpha_for(gg))?;
    let (mass, conflicts) = fuse_pg(&aged, &sg_prior)?;
    let zeta = update_accumulator(prev.zeta, &mass, &conflicts, params);
    Ok((PerceptionCell { mass, zeta }, conflicts))
}

/// Summed conflict over a grid for one epoch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConflictTotals {
    pub fo: f64,
    pub of: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub grid: PerceptionGrid,
    pub conflicts: ConflictTotals,
}

/// Advances the perception grid by one epoch.
pub fn step(
    pg: &PerceptionGrid,
    sg: &EvidentialGrid,
    gg: &EvidentialGrid,
    params: &FusionParams,
) -> Result<StepOutcome, FusionError> {
    let spec = pg.spec();
    if sg.spec() != spec || gg.spec() != spec {
        return Err(GridError::SpecMismatch.into());
    }
    if sg.frame().as_ref() != omega_sg().as_ref() || gg.frame().as_ref() != omega_pg().as_ref() {
        return Err(GridError::FrameMismatch.into());
    }
    params.validate()?;
    let results = par::map_indexed(pg.cells(), |k, prev| {
        step_cell(prev, &sg.cells()[k], &gg.cells()[k], params).map_err(|e| {
            let c = spec.cell_at(k);
            FusionError::Cell {
                i: c.i,
                j: c.j,
                source: Box::new(e),
            }
        })
    });
    let mut cells = Vec::with_capacity(results.len());
    let mut totals = ConflictTotals::default();
    for r in results {
        let (cell, c) = r?;
        totals.fo += c.fo;
        totals.of += c.of;
        totals.residual += c.residual;
        cells.push(cell);
    }
    Ok(StepOutcome {
        grid: PerceptionGrid::from_cells(*spec, cells)?,
        conflicts: totals,
    })
}

/// Per-epoch statistics record, one NDJSON line per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub t: f64,
    #[serde(rename = "cells_F")]
    pub cells_f: usize,
    #[serde(rename = "cells_I")]
    pub cells_i: usize,
    #[serde(rename = "cells_U")]
    pub cells_u: usize,
    #[serde(rename = "cells_S")]
    pub cells_s: usize,
    #[serde(rename = "cells_M")]
    pub cells_m: usize,
    pub cells_unknown: usize,
    pub total_conflict_fo: f64,
    pub total_conflict_of: f64,
    pub total_residual: f64,
}

impl EpochStats {
    pub fn new(t: f64, decisions: &[Decision], conflicts: &ConflictTotals) -> Self {
        let count = |d: Decision| decisions.iter().filter(|&&x| x == d).count();
        Self {
            t,
            cells_f: count(Decision::Free),
            cells_i: count(Decision::Infrastructure),
            cells_u: count(Decision::Unmapped),
            cells_s: count(Decision::Stopped),
            cells_m: count(Decision::Moving),
            cells_unknown: count(Decision::Unknown),
            total_conflict_fo: conflicts.fo,
            total_conflict_of: conflicts.of,
            total_residual: conflicts.residual,
        }
    }
}

/// Decision for every cell of a perception grid, row-major.
pub fn decide_grid(
    pg: &PerceptionGrid,
    unknown_threshold: f64,
) -> Result<Vec<Decision>, FusionError> {
    par::map_indexed(pg.cells(), |_, c| decide(&c.mass, unknown_threshold))
        .into_iter()
        .collect()
}

/// Owns the map prior and the perception grid and runs one epoch per scan.
#[derive(Debug, Clone)]
pub struct Pipeline {
    gg: EvidentialGrid,
    pg: PerceptionGrid,
    params: FusionParams,
    sensor: SensorGridParams,
    decisions: Vec<Decision>,
    epochs: usize,
}

impl Pipeline {
    pub fn new(
        gg: EvidentialGrid,
        params: FusionParams,
        sensor: SensorGridParams,
    ) -> Result<Self, FusionError> {
        params.validate()?;
        sensor.validate()?;
        if gg.frame().as_ref() != omega_pg().as_ref() {
            return Err(GridError::FrameMismatch.into());
        }
        let pg = PerceptionGrid::new(*gg.spec());
        let decisions = decide_grid(&pg, params.unknown_threshold)?;
        Ok(Self {
            gg,
            pg,
            params,
            sensor,
            decisions,
            epochs: 0,
        })
    }

    /// A pipeline whose map prior is vacuous everywhere.
    pub fn without_map(
        spec: GridSpec,
        params: FusionParams,
        sensor: SensorGridParams,
    ) -> Result<Self, FusionError> {
        Self::new(
            EvidentialGrid::new(spec, omega_pg().clone()),
            params,
            sensor,
        )
    }

    pub fn spec(&self) -> &GridSpec {
        self.pg.spec()
    }

    pub fn params(&self) -> &FusionParams {
        &self.params
    }

    pub fn prior(&self) -> &EvidentialGrid {
        &self.gg
    }

    pub fn perception(&self) -> &PerceptionGrid {
        &self.pg
    }

    /// Decisions of the current perception grid, row-major.
    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn process_scan(
        &mut self,
        t: f64,
        scan: &LidarScan,
        pose: &Pose,
    ) -> Result<EpochStats, FusionError> {
        let sg = build_sg(scan, pose, self.pg.spec(), &self.sensor);
        self.process_sensor_grid(t, &sg)
    }

    pub fn process_sensor_grid(
        &mut self,
        t: f64,
        sg: &EvidentialGrid,
    ) -> Result<EpochStats, FusionError> {
        let outcome = step(&self.pg, sg, &self.gg, &self.params)?;
        self.pg = outcome.grid;
        self.decisions = decide_grid(&self.pg, self.params.unknown_threshold)?;
        self.epochs += 1;
        Ok(EpochStats::new(t, &self.decisions, &outcome.conflicts))
    }
}
