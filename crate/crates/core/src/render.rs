//! Raster views of grids. Image row 0 is the northernmost grid row.

use serde::{Deserialize, Serialize};

use crate::dst::pignistic;
use crate::fusion::{Decision, FusionError, F, I, M, S, U};
use crate::grid::{GridSpec, PerceptionGrid};

/// Which per-epoch colour renders to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderStyle {
    /// Colour channels proportional to the pignistic probabilities.
    Pignistic,
    /// Fixed palette per decided class.
    Decision,
    Both,
}

impl RenderStyle {
    pub fn pignistic(self) -> bool {
        matches!(self, RenderStyle::Pignistic | RenderStyle::Both)
    }

    pub fn decision(self) -> bool {
        matches!(self, RenderStyle::Decision | RenderStyle::Both)
    }
}

pub type Rgb = [u8; 3];

pub const GREEN: Rgb = [0, 255, 0];
pub const RED: Rgb = [255, 0, 0];
pub const BLUE: Rgb = [0, 0, 255];
pub const BLACK: Rgb = [0, 0, 0];

/// Palette of the decision render.
pub fn decision_color(d: Decision) -> Rgb {
    match d {
        Decision::Free => GREEN,
        Decision::Moving => RED,
        Decision::Infrastructure | Decision::Unmapped | Decision::Stopped => BLUE,
        Decision::Unknown => BLACK,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![BLACK; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Pixels in row-major order, top row first.
    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn put(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    /// Opaque RGBA bytes, as used by an HTML canvas.
    pub fn to_rgba(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .flat_map(|&[r, g, b]| [r, g, b, 255])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn put(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }
}

fn channel(p: f64) -> u8 {
    (255.0 * p).round().clamp(0.0, 255.0) as u8
}

/// Paints one pixel per cell; `color` gets the row-major cell index.
fn paint(spec: &GridSpec, mut color: impl FnMut(usize) -> Rgb) -> RgbImage {
    let mut img = RgbImage::new(spec.width, spec.height);
    for (k, cell) in spec.cells().enumerate() {
        img.put(cell.i, spec.height - 1 - cell.j, color(k));
    }
    img
}

/// Red for moving, green for free, blue for the three static occupied
/// classes, each scaled by its pignistic probability.
pub fn pignistic_image(pg: &PerceptionGrid) -> Result<RgbImage, FusionError> {
    let colors = pg
        .cells()
        .iter()
        .map(|c| {
            let p = pignistic(&c.mass)?;
            Ok([
                channel(p.prob_of(M)),
                channel(p.prob_of(F)),
                channel(p.prob_of(I) + p.prob_of(U) + p.prob_of(S)),
            ])
        })
        .collect::<Result<Vec<_>, FusionError>>()?;
    Ok(paint(pg.spec(), |k| colors[k]))
}

pub fn decision_image(spec: &GridSpec, decisions: &[Decision]) -> RgbImage {
    assert_eq!(decisions.len(), spec.cell_count(), "one decision per cell");
    paint(spec, |k| decision_color(decisions[k]))
}

/// The occupancy accumulator as grey levels, `ζ = 1` white.
pub fn zeta_image(pg: &PerceptionGrid) -> GrayImage {
    let spec = pg.spec();
    let mut img = GrayImage::new(spec.width, spec.height);
    for (cell, c) in spec.cells().zip(pg.cells()) {
        img.put(cell.i, spec.height - 1 - cell.j, channel(c.zeta));
    }
    img
}

/// Cells that were decided moving in at least one epoch so far.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingTrace {
    spec: GridSpec,
    seen: Vec<bool>,
}

impl MovingTrace {
    pub fn new(spec: GridSpec) -> Self {
        Self {
            spec,
            seen: vec![false; spec.cell_count()],
        }
    }

    pub fn accumulate(&mut self, decisions: &[Decision]) {
        for (s, d) in self.seen.iter_mut().zip(decisions) {
            *s |= *d == Decision::Moving;
        }
    }

    pub fn count(&self) -> usize {
        self.seen.iter().filter(|&&s| s).count()
    }

    pub fn contains(&self, linear: usize) -> bool {
        self.seen[linear]
    }

    /// Red trace over a black background.
    pub fn image(&self) -> RgbImage {
        paint(&self.spec, |k| if self.seen[k] { RED } else { BLACK })
    }

    /// Red trace drawn over another render of the same grid.
    pub fn overlay(&self, base: &RgbImage) -> RgbImage {
        let mut img = base.clone();
        for (k, cell) in self.spec.cells().enumerate() {
            if self.seen[k] {
                img.put(cell.i, self.spec.height - 1 - cell.j, RED);
            }
        }
        img
    }
}
