//! Synthetic worlds: a vector map, moving and parked objects, an ego
//! trajectory and a 2D lidar, driving the fusion pipeline epoch by epoch.
//!
//! Scenario files are TOML:
//!
//! ```toml
//! name = "crossing_car"
//! map = "../maps/street.geojson"   # relative to the scenario file
//! epochs = 50
//! rate_hz = 10.0                   # optional, default 10
//! seed = 1                         # optional, only used with range_jitter
//!
//! [grid]
//! origin_east = 0.0
//! origin_north = 0.0
//! cell_size = 0.5
//! width = 60
//! height = 60
//!
//! [sensor]        # every key optional
//! beams = 720
//! fov_deg = 360.0
//! max_range = 30.0
//! range_jitter = 0.0
//! mu_f = 0.7
//! mu_o = 0.8
//!
//! [map_confidence]   # beta_b, beta_r, beta_t; optional
//! [fusion]           # alpha, delta_inc, ...; optional
//!
//! [[trajectory]]
//! t = 0.0
//! x = 15.0
//! y = 13.0
//! heading_deg = 0.0
//!
//! [[objects]]
//! length = 4.5
//! width = 1.8
//! waypoints = [ { t = 0.0, x = -3.0, y = 16.0, heading_deg = 0.0 },
//!               { t = 5.0, x = 47.0, y = 16.0, heading_deg = 0.0 } ]
//!
//! [[objects]]
//! length = 4.5
//! width = 1.8
//! static = { x = 20.0, y = 11.5, heading_deg = 0.0, disappear_t = 2.5 }
//! ```

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::fusion::{EpochStats, FusionError, FusionParams, Pipeline};
use crate::grid::{GridError, GridSpec};
use crate::map::{load_map, rasterize_gg, MapConfidence, MapError, Point, Polygon, VectorMap};
use crate::par;
use crate::sensor::{normalize_angle, Beam, LidarScan, Pose, SensorError, SensorGridParams};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error("invalid scenario: {0}")]
    Fusion(FusionError),
    #[error("epoch {epoch}: {source}")]
    Epoch {
        epoch: usize,
        #[source]
        source: FusionError,
    },
}

impl ScenarioError {
    /// Everything but failures while running epochs.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, ScenarioError::Epoch { .. })
    }
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

/// A pose at a point in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedPose {
    pub t: f64,
    pub pose: Pose,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimedPose {
    t: f64,
    x: f64,
    y: f64,
    #[serde(default)]
    heading_deg: f64,
}

impl From<RawTimedPose> for TimedPose {
    fn from(r: RawTimedPose) -> Self {
        TimedPose {
            t: r.t,
            pose: Pose::new(r.x, r.y, r.heading_deg.to_radians()),
        }
    }
}

fn check_times(poses: &[TimedPose], what: &str) -> Result<(), ScenarioError> {
    if poses.is_empty() {
        return Err(invalid(format!("{what} needs at least one pose")));
    }
    for p in poses {
        if ![p.t, p.pose.x, p.pose.y, p.pose.heading]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(invalid(format!("{what} has a non-finite pose")));
        }
    }
    if let Some(w) = poses.windows(2).find(|w| w[1].t <= w[0].t) {
        return Err(invalid(format!(
            "{what} timestamps must strictly increase ({} then {})",
            w[0].t, w[1].t
        )));
    }
    Ok(())
}

/// Piecewise-linear pose; clamped to the first and last pose outside their
/// time span. Headings turn the short way round.
pub fn interpolate(poses: &[TimedPose], t: f64) -> Pose {
    let first = poses[0];
    if t <= first.t {
        return first.pose;
    }
    let last = poses[poses.len() - 1];
    if t >= last.t {
        return last.pose;
    }
    let k = poses.partition_point(|p| p.t <= t);
    let (a, b) = (poses[k - 1], poses[k]);
    let f = (t - a.t) / (b.t - a.t);
    Pose::new(
        a.pose.x + f * (b.pose.x - a.pose.x),
        a.pose.y + f * (b.pose.y - a.pose.y),
        a.pose.heading + f * normalize_angle(b.pose.heading - a.pose.heading),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Motion {
    /// Present from the first to the last waypoint, moving linearly between them.
    Waypoints(Vec<TimedPose>),
    /// Present at a fixed pose on `[appear_t, disappear_t)`.
    Static {
        pose: Pose,
        appear_t: Option<f64>,
        disappear_t: Option<f64>,
    },
}

/// A rectangular object, `length` along its heading.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawObject")]
pub struct ObjectTrack {
    pub length: f64,
    pub width: f64,
    pub motion: Motion,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStatic {
    x: f64,
    y: f64,
    #[serde(default)]
    heading_deg: f64,
    appear_t: Option<f64>,
    disappear_t: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    length: f64,
    width: f64,
    waypoints: Option<Vec<RawTimedPose>>,
    #[serde(rename = "static")]
    fixed: Option<RawStatic>,
}

impl TryFrom<RawObject> for ObjectTrack {
    type Error = String;

    fn try_from(r: RawObject) -> Result<Self, String> {
        let motion = match (r.waypoints, r.fixed) {
            (Some(w), None) => Motion::Waypoints(w.into_iter().map(TimedPose::from).collect()),
            (None, Some(s)) => Motion::Static {
                pose: Pose::new(s.x, s.y, s.heading_deg.to_radians()),
                appear_t: s.appear_t,
                disappear_t: s.disappear_t,
            },
            _ => return Err("object needs exactly one of `waypoints` or `static`".into()),
        };
        Ok(ObjectTrack {
            length: r.length,
            width: r.width,
            motion,
        })
    }
}

impl ObjectTrack {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.length > 0.0
            && self.width > 0.0
            && self.length.is_finite()
            && self.width.is_finite())
        {
            return Err(invalid(format!(
                "object footprint {} x {} must be positive",
                self.length, self.width
            )));
        }
        match &self.motion {
            Motion::Waypoints(w) => check_times(w, "object waypoints"),
            Motion::Static {
                appear_t: Some(a),
                disappear_t: Some(d),
                ..
            } if d <= a => Err(invalid("object disappears before it appears")),
            Motion::Static { .. } => Ok(()),
        }
    }

    pub fn pose_at(&self, t: f64) -> Option<Pose> {
        match &self.motion {
            Motion::Waypoints(w) => {
                (t >= w[0].t && t <= w[w.len() - 1].t).then(|| interpolate(w, t))
            }
            Motion::Static {
                pose,
                appear_t,
                disappear_t,
            } => {
                let shown = appear_t.is_none_or(|a| t >= a) && disappear_t.is_none_or(|d| t < d);
                shown.then_some(*pose)
            }
        }
    }

    /// The object's rectangle at time `t`, if it exists then.
    pub fn footprint_at(&self, t: f64) -> Option<Polygon> {
        let p = self.pose_at(t)?;
        let (c, s) = (p.heading.cos(), p.heading.sin());
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        let corners = [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .into_iter()
            .map(|(a, b)| Point::new(p.x + a * c - b * s, p.y + a * s + b * c))
            .collect();
        Some(Polygon::new(corners).expect("rectangle is a simple polygon"))
    }
}

/// Lidar geometry and the sensor-grid masses.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    #[serde(default = "SensorSpec::default_beams")]
    pub beams: usize,
    #[serde(default = "SensorSpec::default_fov")]
    pub fov_deg: f64,
    #[serde(default = "SensorSpec::default_max_range")]
    pub max_range: f64,
    /// Half-width of a uniform range perturbation of hits, metres.
    #[serde(default)]
    pub range_jitter: f64,
    #[serde(default = "SensorSpec::default_mu_f")]
    pub mu_f: f64,
    #[serde(default = "SensorSpec::default_mu_o")]
    pub mu_o: f64,
}

impl SensorSpec {
    fn default_beams() -> usize {
        720
    }
    fn default_fov() -> f64 {
        360.0
    }
    fn default_max_range() -> f64 {
        30.0
    }
    fn default_mu_f() -> f64 {
        0.7
    }
    fn default_mu_o() -> f64 {
        0.8
    }

    pub fn grid_params(&self) -> SensorGridParams {
        SensorGridParams {
            mu_f: self.mu_f,
            mu_o: self.mu_o,
        }
    }

    /// Beam bearings relative to the heading, evenly spaced over the field
    /// of view and centred on it.
    pub fn bearings(&self) -> Vec<f64> {
        let fov = self.fov_deg.to_radians();
        let step = fov / self.beams as f64;
        (0..self.beams)
            .map(|k| -fov / 2.0 + (k as f64 + 0.5) * step)
            .collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.beams == 0 {
            return Err(invalid("sensor needs at least one beam"));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg <= 360.0) {
            return Err(invalid(format!(
                "sensor fov_deg {} is outside (0, 360]",
                self.fov_deg
            )));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(SensorError::BadMaxRange(self.max_range).into());
        }
        if !(self.range_jitter >= 0.0 && self.range_jitter.is_finite()) {
            return Err(invalid(format!(
                "range_jitter {} must be >= 0",
                self.range_jitter
            )));
        }
        self.grid_params().validate()?;
        Ok(())
    }
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            beams: Self::default_beams(),
            fov_deg: Self::default_fov(),
            max_range: Self::default_max_range(),
            range_jitter: 0.0,
            mu_f: Self::default_mu_f(),
            mu_o: Self::default_mu_o(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    /// Map file; relative paths are resolved against the scenario file by
    /// [`ScenarioConfig::load`].
    pub map: PathBuf,
    pub epochs: usize,
    #[serde(default = "ScenarioConfig::default_rate")]
    pub rate_hz: f64,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default)]
    pub sensor: SensorSpec,
    #[serde(default)]
    pub map_confidence: MapConfidence,
    #[serde(default)]
    pub fusion: FusionParams,
    #[serde(deserialize_with = "de_poses")]
    pub trajectory: Vec<TimedPose>,
    #[serde(default)]
    pub objects: Vec<ObjectTrack>,
}

fn de_poses<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<TimedPose>, D::Error> {
    let raw = Vec::<RawTimedPose>::deserialize(d)?;
    Ok(raw.into_iter().map(TimedPose::from).collect())
}

impl ScenarioConfig {
    fn default_rate() -> f64 {
        10.0
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a scenario file and resolves its map path.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        if cfg.map.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.map = dir.join(&cfg.map);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.epochs == 0 {
            return Err(invalid("epochs must be at least 1"));
        }
        if !(self.rate_hz > 0.0 && self.rate_hz.is_finite()) {
            return Err(invalid(format!(
                "rate_hz {} must be positive",
                self.rate_hz
            )));
        }
        self.grid.validate()?;
        self.sensor.validate()?;
        self.map_confidence.validate()?;
        self.fusion.validate().map_err(ScenarioError::Fusion)?;
        check_times(&self.trajectory, "trajectory")?;
        for obj in &self.objects {
            obj.validate()?;
        }
        Ok(())
    }

    /// Time of epoch `k`.
    pub fn time(&self, epoch: usize) -> f64 {
        epoch as f64 / self.rate_hz
    }

    pub fn ego_pose(&self, t: f64) -> Pose {
        interpolate(&self.trajectory, t)
    }

    /// Footprints of the objects present at time `t`.
    pub fn footprints_at(&self, t: f64) -> Vec<Polygon> {
        self.objects
            .iter()
            .filter_map(|o| o.footprint_at(t))
            .collect()
    }
}

pub type Segment = (Point, Point);

/// Distance along the unit direction `(dx, dy)` from `origin` to the segment,
/// if the ray meets it at a positive distance.
pub fn ray_segment(origin: Point, dx: f64, dy: f64, seg: Segment) -> Option<f64> {
    let (a, b) = seg;
    let (ex, ey) = (b.x - a.x, b.y - a.y);
    let (wx, wy) = (a.x - origin.x, a.y - origin.y);
    let denom = dx * ey - dy * ex;
    if denom == 0.0 {
        // Parallel; a collinear segment is met at its nearer end.
        if wx * dy - wy * dx != 0.0 {
            return None;
        }
        let sa = wx * dx + wy * dy;
        let sb = (b.x - origin.x) * dx + (b.y - origin.y) * dy;
        return [sa, sb]
            .into_iter()
            .filter(|s| *s > 0.0)
            .min_by(f64::total_cmp);
    }
    let s = (wx * ey - wy * ex) / denom;
    let u = (wx * dy - wy * dx) / denom;
    (s > 0.0 && (0.0..=1.0).contains(&u)).then_some(s)
}

/// Obstacle edges seen by the lidar.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct World {
    segments: Vec<Segment>,
}

impl World {
    pub fn new() -> Self {
        Self::default()
    }

    /// Building outlines of a map; roads do not reflect.
    pub fn from_map(map: &VectorMap) -> Self {
        let mut w = Self::new();
        for b in &map.buildings {
            w.add_polygon(b);
        }
        w
    }

    pub fn add_polygon(&mut self, poly: &Polygon) {
        self.segments.extend(poly.edges());
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Nearest obstacle along a ray, within `max_range`.
    pub fn cast(&self, origin: Point, angle: f64, max_range: f64) -> Option<f64> {
        let (dx, dy) = (angle.cos(), angle.sin());
        self.segments
            .iter()
            .filter_map(|&seg| ray_segment(origin, dx, dy, seg))
            .filter(|&s| s <= max_range)
            .min_by(f64::total_cmp)
    }
}

/// Noise-free scan of `world` from `pose`.
pub fn simulate_scan(world: &World, pose: &Pose, sensor: &SensorSpec) -> LidarScan {
    let origin = Point::new(pose.x, pose.y);
    let bearings = sensor.bearings();
    let beams = par::map_indexed(&bearings, |_, &bearing| {
        match world.cast(origin, pose.heading + bearing, sensor.max_range) {
            Some(range) => Beam {
                bearing,
                range,
                hit: true,
            },
            None => Beam {
                bearing,
                range: sensor.max_range,
                hit: false,
            },
        }
    });
    LidarScan {
        beams,
        max_range: sensor.max_range,
    }
}

/// Perturbs hit ranges uniformly by up to `amount`, staying in range.
pub fn jitter_scan<R: Rng>(scan: &mut LidarScan, amount: f64, rng: &mut R) {
    if amount <= 0.0 {
        return;
    }
    let floor = 1e-3_f64.min(scan.max_range);
    for b in scan.beams.iter_mut().filter(|b| b.hit) {
        let r = b.range + rng.gen_range(-amount..=amount);
        b.range = r.clamp(floor, scan.max_range);
    }
}

/// What one epoch of a simulation produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochOutput {
    pub epoch: usize,
    pub t: f64,
    pub pose: Pose,
    pub scan: LidarScan,
    pub stats: EpochStats,
}

/// A scenario being run, one epoch per [`Simulation::step`].
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: ScenarioConfig,
    walls: World,
    pipeline: Pipeline,
    rng: ChaCha8Rng,
    epoch: usize,
}

impl Simulation {
    /// Rasterizes the map prior and sets up an empty perception grid.
    pub fn new(cfg: ScenarioConfig, map: &VectorMap) -> Result<Self, ScenarioError> {
        cfg.validate()?;
        let gg = rasterize_gg(map, &cfg.map_confidence, &cfg.grid)?;
        let pipeline = Pipeline::new(gg, cfg.fusion, cfg.sensor.grid_params())
            .map_err(ScenarioError::Fusion)?;
        Ok(Self {
            walls: World::from_map(map),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            pipeline,
            epoch: 0,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    /// Number of epochs run so far.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn is_done(&self) -> bool {
        self.epoch >= self.cfg.epochs
    }

    /// Buildings plus the objects present at `t`.
    pub fn world_at(&self, t: f64) -> World {
        let mut w = self.walls.clone();
        for poly in self.cfg.footprints_at(t) {
            w.add_polygon(&poly);
        }
        w
    }

    /// Runs the next epoch; `None` once the scenario is over.
    pub fn step(&mut self) -> Result<Option<EpochOutput>, ScenarioError> {
        if self.is_done() {
            return Ok(None);
        }
        let epoch = self.epoch;
        let t = self.cfg.time(epoch);
        let pose = self.cfg.ego_pose(t);
        let mut scan = simulate_scan(&self.world_at(t), &pose, &self.cfg.sensor);
        jitter_scan(&mut scan, self.cfg.sensor.range_jitter, &mut self.rng);
        let stats = self
            .pipeline
            .process_scan(t, &scan, &pose)
            .map_err(|source| ScenarioError::Epoch { epoch, source })?;
        self.epoch += 1;
        Ok(Some(EpochOutput {
            epoch,
            t,
            pose,
            scan,
            stats,
        }))
    }
}

/// Loads the scenario's map and runs every epoch, handing each to
/// `on_epoch` together with the pipeline state after it.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    mut on_epoch: impl FnMut(&EpochOutput, &Pipeline),
) -> Result<Vec<EpochStats>, ScenarioError> {
    let map = load_map(&cfg.map)?;
    let mut sim = Simulation::new(cfg.clone(), &map)?;
    let mut stats = Vec::with_capacity(cfg.epochs);
    while let Some(out) = sim.step()? {
        on_epoch(&out, sim.pipeline());
        stats.push(out.stats);
    }
    Ok(stats)
}
