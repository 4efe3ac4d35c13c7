use std::path::Path;

use anyhow::{bail, Context};
use evigrid::map::{MapConfidence, Point, VectorMap};
use evigrid::sim::SensorSpec;
use evigrid::{FusionParams, GridSpec};
use serde::Deserialize;

/// Overrides read from `--params`. Unknown top-level keys are ignored, so a
/// scenario file can be passed to `replay` to reuse its settings.
#[derive(Debug, Default, Deserialize)]
pub struct ParamsFile {
    pub grid: Option<GridSpec>,
    pub sensor: Option<SensorSpec>,
    pub map_confidence: Option<MapConfidence>,
    pub fusion: Option<FusionParams>,
}

impl ParamsFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read params file {}", path.display()))?;
        let params: Self = toml::from_str(&text)
            .with_context(|| format!("invalid params file {}", path.display()))?;
        if let Some(grid) = &params.grid {
            grid.validate()?;
        }
        if let Some(sensor) = &params.sensor {
            sensor.validate()?;
        }
        if let Some(conf) = &params.map_confidence {
            conf.validate()?;
        }
        if let Some(fusion) = &params.fusion {
            fusion.validate()?;
        }
        Ok(params)
    }

    pub fn load_optional(path: Option<&Path>) -> anyhow::Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

/// A grid of default-size cells covering every polygon of the map.
pub fn grid_around(map: &VectorMap) -> anyhow::Result<GridSpec> {
    let mut polys = map.buildings.iter().chain(&map.roads);
    let Some(first) = polys.next() else {
        bail!("the map is empty; pass a grid with --params");
    };
    let (mut lo, mut hi) = first.bounds();
    for p in polys {
        let (a, b) = p.bounds();
        lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    let size = GridSpec::DEFAULT_CELL_SIZE;
    let east = (lo.x / size).floor() * size;
    let north = (lo.y / size).floor() * size;
    let width = (((hi.x - east) / size).ceil() as usize).max(1);
    let height = (((hi.y - north) / size).ceil() as usize).max(1);
    Ok(GridSpec::new(east, north, size, width, height)?)
}
