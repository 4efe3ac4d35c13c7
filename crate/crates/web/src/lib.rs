//! Browser demo: a calculator for the combination rules on a two-element
//! frame, and a player for the bundled scenarios with a cell inspector.
//!
//! Everything exported to JavaScript is a thin wrapper over a plain Rust
//! function so the logic can be tested natively.

use std::path::Path;

use evigrid::dst::{
    combine_conjunctive, combine_dempster, combine_disjunctive, combine_yager, discount, pignistic,
    DstError, FrameOfDiscernment, MassFunction,
};
use evigrid::fusion::{Decision, EpochStats};
use evigrid::map::MapConfidence;
use evigrid::render::{decision_image, pignistic_image, MovingTrace};
use evigrid::sim::{ScenarioConfig, Simulation};
use evigrid::{CellIndex, VectorMap};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Scenarios bundled into the module, with the maps they refer to.
const SCENARIOS: [(&str, &str); 3] = [
    (
        "crossing_car",
        include_str!("../../../scenarios/crossing_car.scn"),
    ),
    (
        "parked_then_leaves",
        include_str!("../../../scenarios/parked_then_leaves.scn"),
    ),
    (
        "street_canyon",
        include_str!("../../../scenarios/street_canyon.scn"),
    ),
];

const MAPS: [(&str, &str); 2] = [
    (
        "street.geojson",
        include_str!("../../../maps/street.geojson"),
    ),
    (
        "canyon.geojson",
        include_str!("../../../maps/canyon.geojson"),
    ),
];

/// Masses in subset order `∅, {a}, {b}, Ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Combinations {
    pub conjunctive: Vec<f64>,
    pub disjunctive: Vec<f64>,
    /// `None` under total conflict.
    pub dempster: Option<Vec<f64>>,
    pub yager: Vec<f64>,
    pub discounted: Vec<f64>,
    /// Pignistic probabilities of `a` and `b` under `m1`.
    pub betp: Vec<f64>,
}

fn two_element(a: f64, b: f64) -> Result<MassFunction, DstError> {
    let frame = FrameOfDiscernment::new(["a", "b"])?.into();
    MassFunction::new(frame, vec![0.0, a, b, 1.0 - a - b])
}

/// Combines `m1 = {a: a1, b: b1, Ω: rest}` with `m2` likewise, and discounts
/// `m1` by `alpha`.
pub fn combinations(
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    alpha: f64,
) -> Result<Combinations, DstError> {
    let m1 = two_element(a1, b1)?;
    let m2 = two_element(a2, b2)?;
    let dempster = match combine_dempster(&m1, &m2) {
        Ok(m) => Some(m.masses().to_vec()),
        Err(DstError::TotalConflict) => None,
        Err(e) => return Err(e),
    };
    Ok(Combinations {
        conjunctive: combine_conjunctive(&m1, &m2)?.masses().to_vec(),
        disjunctive: combine_disjunctive(&m1, &m2)?.masses().to_vec(),
        dempster,
        yager: combine_yager(&m1, &m2)?.masses().to_vec(),
        discounted: discount(&m1, alpha)?.masses().to_vec(),
        betp: pignistic(&m1)?.probabilities().to_vec(),
    })
}

/// JSON of [`Combinations`]; throws on masses that do not form a mass
/// function.
#[wasm_bindgen]
pub fn combine(a1: f64, b1: f64, a2: f64, b2: f64, alpha: f64) -> Result<String, JsError> {
    let c = combinations(a1, b1, a2, b2, alpha).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(serde_json::to_string(&c).expect("plain data serializes"))
}

/// Names of the bundled scenarios, comma separated.
#[wasm_bindgen]
pub fn scenario_names() -> String {
    SCENARIOS.map(|(name, _)| name).join(",")
}

/// Knobs exposed by the page.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub alpha: f64,
    pub delta_inc: f64,
    pub use_map: bool,
}

/// Masses, pignistic probabilities and decision of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub i: usize,
    pub j: usize,
    pub decision: &'static str,
    pub zeta: f64,
    /// Pignistic probability per class, `F, I, U, S, M`.
    pub betp: Vec<(&'static str, f64)>,
    /// Focal sets and their masses.
    pub focal: Vec<(String, f64)>,
}

/// A bundled scenario advanced one epoch at a time.
#[wasm_bindgen]
pub struct Player {
    sim: Simulation,
    trace: MovingTrace,
    last: Option<EpochStats>,
}

impl Player {
    pub fn open(name: &str, settings: Settings) -> Result<Self, String> {
        let (_, text) = SCENARIOS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| format!("unknown scenario {name:?}"))?;
        let mut cfg = ScenarioConfig::from_toml_str(text).map_err(|e| e.to_string())?;
        let map_name = Path::new(&cfg.map)
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default()
            .to_owned();
        let (_, map_text) = MAPS
            .iter()
            .find(|(n, _)| *n == map_name)
            .ok_or_else(|| format!("map {map_name} is not bundled"))?;
        let map = VectorMap::from_geojson_str(map_text).map_err(|e| e.to_string())?;
        cfg.fusion.alpha = settings.alpha;
        cfg.fusion.delta_inc = settings.delta_inc;
        if !settings.use_map {
            cfg.map_confidence = MapConfidence::none();
        }
        let trace = MovingTrace::new(cfg.grid);
        let sim = Simulation::new(cfg, &map).map_err(|e| e.to_string())?;
        Ok(Self {
            sim,
            trace,
            last: None,
        })
    }

    /// Runs one epoch; `false` once the scenario is over.
    pub fn advance(&mut self) -> Result<bool, String> {
        match self.sim.step().map_err(|e| e.to_string())? {
            Some(out) => {
                self.trace.accumulate(self.sim.pipeline().decisions());
                self.last = Some(out.stats);
                Ok(true)
            }
            None => Ok(false),
        }
    }

    /// RGBA pixels of `view`: `decision`, `pignistic` or `trace`, north up.
    pub fn pixels(&self, view: &str) -> Result<Vec<u8>, String> {
        let pipeline = self.sim.pipeline();
        let decisions = decision_image(pipeline.spec(), pipeline.decisions());
        let img = match view {
            "decision" => decisions,
            "pignistic" => pignistic_image(pipeline.perception()).map_err(|e| e.to_string())?,
            "trace" => self.trace.overlay(&decisions),
            other => return Err(format!("unknown view {other:?}")),
        };
        Ok(img.to_rgba())
    }

    /// The cell drawn at image pixel `(x, y)`.
    pub fn report(&self, x: usize, y: usize) -> Result<CellReport, String> {
        let pipeline = self.sim.pipeline();
        let spec = pipeline.spec();
        if x >= spec.width || y >= spec.height {
            return Err(format!("pixel ({x}, {y}) is outside the grid"));
        }
        let cell = CellIndex::new(x, spec.height - 1 - y);
        let pc = pipeline.perception().get(cell).map_err(|e| e.to_string())?;
        let p = pignistic(&pc.mass).map_err(|e| e.to_string())?;
        let frame = pc.mass.frame().clone();
        Ok(CellReport {
            i: cell.i,
            j: cell.j,
            decision: pipeline.decisions()[spec.linear(cell)].label(),
            zeta: pc.zeta,
            betp: Decision::CLASSES
                .iter()
                .enumerate()
                .map(|(k, d)| (d.label(), p.prob(k)))
                .collect(),
            focal: pc
                .mass
                .focal_elements()
                .map(|(s, m)| (frame.describe(s), m))
                .collect(),
        })
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
impl Player {
    #[wasm_bindgen(constructor)]
    pub fn new(name: &str, alpha: f64, delta_inc: f64, use_map: bool) -> Result<Player, JsError> {
        Self::open(
            name,
            Settings {
                alpha,
                delta_inc,
                use_map,
            },
        )
        .map_err(js)
    }

    pub fn step(&mut self) -> Result<bool, JsError> {
        self.advance().map_err(js)
    }

    pub fn rgba(&self, view: &str) -> Result<Vec<u8>, JsError> {
        self.pixels(view).map_err(js)
    }

    /// JSON of the cell at image pixel `(x, y)`.
    pub fn cell(&self, x: usize, y: usize) -> Result<String, JsError> {
        let r = self.report(x, y).map_err(js)?;
        Ok(serde_json::to_string(&r).expect("plain data serializes"))
    }

    /// JSON of the last epoch's statistics, `null` before the first epoch.
    pub fn stats(&self) -> String {
        serde_json::to_string(&self.last).expect("plain data serializes")
    }

    pub fn epoch(&self) -> usize {
        self.sim.epoch()
    }

    pub fn epochs(&self) -> usize {
        self.sim.config().epochs
    }

    pub fn width(&self) -> usize {
        self.sim.pipeline().spec().width
    }

    pub fn height(&self) -> usize {
        self.sim.pipeline().spec().height
    }
}
