use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};
use evigrid::map::{load_map, rasterize_gg};
use evigrid::scanlog::{write_record, ScanLogReader, ScanRecord};
use evigrid::sim::{ScenarioConfig, ScenarioError, Simulation};
use evigrid::Pipeline;

use crate::output::{Output, OutputOptions};
use crate::params::{grid_around, ParamsFile};
use crate::Failure;

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

pub fn run(
    scenario: &Path,
    opts: &OutputOptions,
    record: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let params = ParamsFile::load_optional(opts.params.as_deref()).map_err(config)?;
    let mut cfg = ScenarioConfig::load(scenario).map_err(|e| match e {
        ScenarioError::Io { .. } => config(e),
        e => config(anyhow!(e).context(format!("scenario {}", scenario.display()))),
    })?;
    if let Some(grid) = params.grid {
        cfg.grid = grid;
    }
    if let Some(sensor) = params.sensor {
        cfg.sensor = sensor;
    }
    if let Some(conf) = params.map_confidence {
        cfg.map_confidence = conf;
    }
    if let Some(fusion) = params.fusion {
        cfg.fusion = fusion;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let map = load_map(&cfg.map).map_err(config)?;
    let mut sim = Simulation::new(cfg, &map).map_err(config)?;
    let mut out = Output::create(opts.clone()).map_err(config)?;
    let mut log = match record {
        Some(path) => Some(BufWriter::new(
            File::create(path)
                .with_context(|| format!("cannot create scan log {}", path.display()))
                .map_err(config)?,
        )),
        None => None,
    };
    log::info!(
        "running {} for {} epochs",
        scenario.display(),
        sim.config().epochs
    );

    while let Some(epoch) = sim.step().map_err(runtime)? {
        if let Some(w) = log.as_mut() {
            let rec = ScanRecord {
                t: epoch.t,
                pose: epoch.pose,
                scan: epoch.scan.clone(),
            };
            write_record(&mut *w, &rec)
                .context("cannot write scan log")
                .map_err(runtime)?;
        }
        out.epoch(epoch.epoch, &epoch.stats, sim.pipeline())
            .map_err(runtime)?;
    }
    if let Some(mut w) = log {
        w.flush()
            .context("cannot write scan log")
            .map_err(runtime)?;
    }
    out.finish(sim.epoch(), sim.pipeline()).map_err(runtime)
}

pub fn replay(log: &Path, map_path: &Path, opts: &OutputOptions) -> Result<(), Failure> {
    let params = ParamsFile::load_optional(opts.params.as_deref()).map_err(config)?;
    let map = load_map(map_path).map_err(config)?;
    let spec = match params.grid {
        Some(grid) => grid,
        None => grid_around(&map).map_err(config)?,
    };
    let sensor = params.sensor.unwrap_or_default();
    let gg =
        rasterize_gg(&map, &params.map_confidence.unwrap_or_default(), &spec).map_err(config)?;
    let mut pipeline = Pipeline::new(gg, params.fusion.unwrap_or_default(), sensor.grid_params())
        .map_err(config)?;
    let file = File::open(log)
        .with_context(|| format!("cannot read scan log {}", log.display()))
        .map_err(config)?;
    let mut out = Output::create(opts.clone()).map_err(config)?;

    let mut epochs = 0;
    for record in ScanLogReader::new(BufReader::new(file)) {
        let rec = record
            .with_context(|| format!("in {}", log.display()))
            .map_err(runtime)?;
        let stats = pipeline
            .process_scan(rec.t, &rec.scan, &rec.pose)
            .map_err(|e| runtime(anyhow!(e).context(format!("epoch {epochs} (t = {})", rec.t))))?;
        out.epoch(epochs, &stats, &pipeline).map_err(runtime)?;
        epochs += 1;
    }
    log::info!("replayed {epochs} epochs from {}", log.display());
    out.finish(epochs, &pipeline).map_err(runtime)
}
