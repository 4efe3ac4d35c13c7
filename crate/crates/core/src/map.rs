//! Vector maps and their rasterization into the map-prior grid.
//!
//! Maps are a GeoJSON subset: a `FeatureCollection` of `Polygon` features in
//! planar metres, each tagged with a `kind` property of `"building"` or
//! `"road"`. Only the exterior ring of each polygon is used; holes are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::dst::{DstError, MassFunction, Subset};
use crate::fusion::{omega_pg, BUILDING, INTERMEDIATE, ROAD};
use crate::grid::{CellIndex, EvidentialGrid, GridSpec};
use crate::par;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("cannot read map file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("map is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected a FeatureCollection, got {0:?}")]
    NotFeatureCollection(String),
    #[error("feature {feature}: missing `kind` property")]
    MissingKind { feature: usize },
    #[error("feature {feature}: unknown feature kind {kind:?}")]
    UnknownKind { feature: usize, kind: String },
    #[error("feature {feature}: unsupported geometry {kind:?}, expected Polygon")]
    UnsupportedGeometry { feature: usize, kind: String },
    #[error("feature {feature}: malformed coordinates: {reason}")]
    BadCoordinates { feature: usize, reason: String },
    #[error("feature {feature}: polygon holes are not supported")]
    Holes { feature: usize },
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has non-finite coordinates")]
    NonFinite,
    #[error("polygon is self-intersecting")]
    SelfIntersecting,
    #[error("feature {feature}: {source}")]
    Feature {
        feature: usize,
        #[source]
        source: Box<MapError>,
    },
    #[error("map overlap at cell ({i},{j}): cell centre lies in both a building and a road")]
    Overlap { i: usize, j: usize },
    #[error("map confidence {name} = {value} is outside [0, 1]")]
    InvalidConfidence { name: &'static str, value: f64 },
    #[error(transparent)]
    Dst(#[from] DstError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Signed area of the parallelogram spanned by `b - a` and `c - a`.
fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
    let eps = 1e-12 * len.max(1.0);
    if cross(a, b, p).abs() > eps * len.max(1.0) {
        return false;
    }
    p.x >= a.x.min(b.x) - eps
        && p.x <= a.x.max(b.x) + eps
        && p.y >= a.y.min(b.y) - eps
        && p.y <= a.y.max(b.y) + eps
}

/// Two edges leaving `shared` towards `x` and `y` run along each other.
fn folds_back(shared: Point, x: Point, y: Point) -> bool {
    let dot = (x.x - shared.x) * (y.x - shared.x) + (x.y - shared.y) * (y.y - shared.y);
    cross(shared, x, y) == 0.0 && dot > 0.0
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// A simple polygon given by its vertex ring (not repeated at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    min: Point,
    max: Point,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, MapError> {
        let mut ring: Vec<Point> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if ring.last() != Some(&v) {
                ring.push(v);
            }
        }
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(MapError::TooFewVertices(ring.len()));
        }
        if ring.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(MapError::NonFinite);
        }
        let polygon = Self::with_bounds(ring);
        if !polygon.is_simple() {
            return Err(MapError::SelfIntersecting);
        }
        Ok(polygon)
    }

    /// Axis-aligned rectangle with the given corners.
    pub fn rectangle(min: Point, max: Point) -> Result<Self, MapError> {
        Self::new(vec![
            min,
            Point::new(max.x, min.y),
            max,
            Point::new(min.x, max.y),
        ])
    }

    fn with_bounds(vertices: Vec<Point>) -> Self {
        let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&Point) -> f64| {
            vertices.iter().map(pick).fold(init, f)
        };
        let min = Point::new(
            fold(f64::min, f64::INFINITY, |p| p.x),
            fold(f64::min, f64::INFINITY, |p| p.y),
        );
        let max = Point::new(
            fold(f64::max, f64::NEG_INFINITY, |p| p.x),
            fold(f64::max, f64::NEG_INFINITY, |p| p.y),
        );
        Self { vertices, min, max }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn bounds(&self) -> (Point, Point) {
        (self.min, self.max)
    }

    /// Closed edges `(v_k, v_{k+1})`, wrapping around.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }

    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let edges: Vec<(Point, Point)> = self.edges().collect();
        for a in 0..n {
            for b in (a + 1)..n {
                let (p, q) = edges[a];
                let (r, s) = edges[b];
                let overlaps = if b == a + 1 {
                    folds_back(q, p, s)
                } else if a == 0 && b == n - 1 {
                    folds_back(p, q, r)
                } else {
                    segments_intersect(p, q, r, s)
                };
                if overlaps {
                    return false;
                }
            }
        }
        true
    }

    /// Boundary-inclusive membership test (see [`point_in_polygon`]).
    pub fn contains(&self, p: Point) -> bool {
        if p.x < self.min.x || p.x > self.max.x || p.y < self.min.y || p.y > self.max.y {
            return false;
        }
        point_in_polygon(p, self)
    }
}

/// Even-odd ray crossing test; points on an edge or vertex count as inside.
pub fn point_in_polygon(p: Point, poly: &Polygon) -> bool {
    if poly.edges().any(|(a, b)| on_segment(p, a, b)) {
        return true;
    }
    let mut inside = false;
    for (a, b) in poly.edges() {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Building,
    Road,
}

/// Building and road polygons in the global frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VectorMap {
    pub buildings: Vec<Polygon>,
    pub roads: Vec<Polygon>,
}

#[derive(Deserialize)]
struct RawCollection {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    features: Vec<RawFeature>,
}

#[derive(Deserialize)]
struct RawFeature {
    #[serde(default)]
    properties: Option<serde_json::Map<String, Value>>,
    geometry: RawGeometry,
}

#[derive(Deserialize)]
struct RawGeometry {
    #[serde(rename = "type")]
    kind: String,
    coordinates: Value,
}

impl VectorMap {
    pub fn from_geojson_str(text: &str) -> Result<Self, MapError> {
        let raw: RawCollection = serde_json::from_str(text)?;
        if raw.kind != "FeatureCollection" {
            return Err(MapError::NotFeatureCollection(raw.kind));
        }
        let mut map = VectorMap::default();
        for (feature, f) in raw.features.into_iter().enumerate() {
            let kind = f
                .properties
                .as_ref()
                .and_then(|p| p.get("kind"))
                .ok_or(MapError::MissingKind { feature })?;
            let kind = match kind.as_str() {
                Some("building") => FeatureKind::Building,
                Some("road") => FeatureKind::Road,
                Some(other) => {
                    return Err(MapError::UnknownKind {
                        feature,
                        kind: other.to_string(),
                    })
                }
                None => {
                    return Err(MapError::UnknownKind {
                        feature,
                        kind: kind.to_string(),
                    })
                }
            };
            if f.geometry.kind != "Polygon" {
                return Err(MapError::UnsupportedGeometry {
                    feature,
                    kind: f.geometry.kind,
                });
            }
            let rings: Vec<Vec<Vec<f64>>> = serde_json::from_value(f.geometry.coordinates)
                .map_err(|e| MapError::BadCoordinates {
                    feature,
                    reason: e.to_string(),
                })?;
            let exterior = match rings.as_slice() {
                [] => {
                    return Err(MapError::BadCoordinates {
                        feature,
                        reason: "polygon has no rings".into(),
                    })
                }
                [exterior] => exterior,
                _ => return Err(MapError::Holes { feature }),
            };
            let vertices = exterior
                .iter()
                .map(|c| match c.as_slice() {
                    [x, y, ..] => Ok(Point::new(*x, *y)),
                    _ => Err(MapError::BadCoordinates {
                        feature,
                        reason: "position needs two numbers".into(),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let polygon = Polygon::new(vertices).map_err(|e| MapError::Feature {
                feature,
                source: Box::new(e),
            })?;
            match kind {
                FeatureKind::Building => map.buildings.push(polygon),
                FeatureKind::Road => map.roads.push(polygon),
            }
        }
        Ok(map)
    }

    pub fn to_geojson_string(&self) -> String {
        let feature = |kind: &str, poly: &Polygon| {
            let mut ring: Vec<[f64; 2]> = poly.vertices.iter().map(|p| [p.x, p.y]).collect();
            ring.push(ring[0]);
            serde_json::json!({
                "type": "Feature",
                "properties": { "kind": kind },
                "geometry": { "type": "Polygon", "coordinates": [ring] },
            })
        };
        let features: Vec<Value> = self
            .buildings
            .iter()
            .map(|p| feature("building", p))
            .chain(self.roads.iter().map(|p| feature("road", p)))
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "type": "FeatureCollection",
            "features": features,
        }))
        .expect("map serializes")
    }

    pub fn is_empty(&self) -> bool {
        self.buildings.is_empty() && self.roads.is_empty()
    }
}

/// Reads a GeoJSON-subset map file.
pub fn load_map(path: impl AsRef<Path>) -> Result<VectorMap, MapError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MapError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    VectorMap::from_geojson_str(&text)
}

/// Confidence in the map for buildings, roads and the intermediate space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfidence {
    #[serde(default = "MapConfidence::default_building")]
    pub beta_b: f64,
    #[serde(default = "MapConfidence::default_road")]
    pub beta_r: f64,
    #[serde(default = "MapConfidence::default_intermediate")]
    pub beta_t: f64,
}

impl MapConfidence {
    fn default_building() -> f64 {
        0.9
    }
    fn default_road() -> f64 {
        0.8
    }
    fn default_intermediate() -> f64 {
        0.6
    }

    pub fn new(beta_b: f64, beta_r: f64, beta_t: f64) -> Result<Self, MapError> {
        let conf = Self {
            beta_b,
            beta_r,
            beta_t,
        };
        conf.validate()?;
        Ok(conf)
    }

    /// All confidences zero: the prior grid carries no information.
    pub fn none() -> Self {
        Self {
            beta_b: 0.0,
            beta_r: 0.0,
            beta_t: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), MapError> {
        for (name, value) in [
            ("beta_b", self.beta_b),
            ("beta_r", self.beta_r),
            ("beta_t", self.beta_t),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(MapError::InvalidConfidence { name, value });
            }
        }
        Ok(())
    }
}

impl Default for MapConfidence {
    fn default() -> Self {
        Self {
            beta_b: Self::default_building(),
            beta_r: Self::default_road(),
            beta_t: Self::default_intermediate(),
        }
    }
}

/// Which map region a point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Building,
    Road,
    Intermediate,
}

impl VectorMap {
    /// Classifies a point; a point in both a building and a road is `None`.
    pub fn region_at(&self, p: Point) -> Option<Region> {
        let building = self.buildings.iter().any(|b| b.contains(p));
        let road = self.roads.iter().any(|r| r.contains(p));
        match (building, road) {
            (true, true) => None,
            (true, false) => Some(Region::Building),
            (false, true) => Some(Region::Road),
            (false, false) => Some(Region::Intermediate),
        }
    }
}

/// Builds the map-prior grid on `{F, I, U, S, M}` from cell centres:
/// buildings support `{I}`, roads `{F, S, M}`, everything else `{F, U, S, M}`,
/// each with the matching confidence and the remainder on `Ω`.
pub fn rasterize_gg(
    map: &VectorMap,
    conf: &MapConfidence,
    spec: &GridSpec,
) -> Result<EvidentialGrid, MapError> {
    conf.validate()?;
    let frame = omega_pg().clone();
    let omega = frame.omega();
    let support = |subset: Subset, beta: f64| {
        MassFunction::from_focal(frame.clone(), &[(subset, beta), (omega, 1.0 - beta)])
    };
    let building = support(BUILDING, conf.beta_b)?;
    let road = support(ROAD, conf.beta_r)?;
    let intermediate = support(INTERMEDIATE, conf.beta_t)?;

    let indices: Vec<CellIndex> = spec.cells().collect();
    let cells = par::map_indexed(&indices, |_, &cell| {
        let (x, y) = spec.center_unchecked(cell);
        match map.region_at(Point::new(x, y)) {
            Some(Region::Building) => Ok(building.clone()),
            Some(Region::Road) => Ok(road.clone()),
            Some(Region::Intermediate) => Ok(intermediate.clone()),
            None => Err(MapError::Overlap {
                i: cell.i,
                j: cell.j,
            }),
        }
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(EvidentialGrid::from_cells(*spec, frame, cells).expect("rasterized cells are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap()
    }

    #[test]
    fn point_in_polygon_examples() {
        let sq = unit_square();
        assert!(point_in_polygon(Point::new(0.5, 0.5), &sq));
        assert!(!point_in_polygon(Point::new(2.0, 2.0), &sq));
        assert!(point_in_polygon(Point::new(0.0, 0.0), &sq));
        assert!(point_in_polygon(Point::new(1.0, 0.5), &sq));
        assert!(point_in_polygon(Point::new(0.5, 1.0), &sq));
        assert!(!point_in_polygon(Point::new(1.0 + 1e-6, 0.5), &sq));
    }

    #[test]
    fn concave_polygon() {
        // U shape, notch between x in (1,2) above y=1
        let u = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 3.0),
            Point::new(2.0, 3.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 3.0),
            Point::new(0.0, 3.0),
        ])
        .unwrap();
        assert!(u.contains(Point::new(0.5, 2.0)));
        assert!(!u.contains(Point::new(1.5, 2.0)));
        assert!(u.contains(Point::new(1.5, 1.0)));
        assert!(u.contains(Point::new(2.5, 2.9)));
    }

    #[test]
    fn polygon_validation() {
        assert!(matches!(
            Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]),
            Err(MapError::TooFewVertices(2))
        ));
        // closing vertex repeated is fine
        let closed = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(closed.vertices().len(), 3);
        let bowtie = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(matches!(bowtie, Err(MapError::SelfIntersecting)));
        let spike = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
        ]);
        assert!(matches!(spike, Err(MapError::SelfIntersecting)));
    }

    const ONE_BUILDING: &str = r#"{"type":"FeatureCollection","features":[
        {"type":"Feature","properties":{"kind":"building"},
         "geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4],[0,0]]]}}]}"#;

    #[test]
    fn parses_one_building() {
        let map = VectorMap::from_geojson_str(ONE_BUILDING).unwrap();
        assert_eq!(map.buildings.len(), 1);
        assert_eq!(map.roads.len(), 0);
        let again = VectorMap::from_geojson_str(&map.to_geojson_string()).unwrap();
        assert_eq!(again, map);
    }

    #[test]
    fn rejects_unknown_kind_and_bad_features() {
        let river = ONE_BUILDING.replace("building", "river");
        let err = VectorMap::from_geojson_str(&river).unwrap_err();
        assert!(err.to_string().contains("unknown feature kind"));
        let missing = ONE_BUILDING.replace(r#""kind":"building""#, r#""name":"x""#);
        assert!(matches!(
            VectorMap::from_geojson_str(&missing),
            Err(MapError::MissingKind { feature: 0 })
        ));
        let line = ONE_BUILDING.replace("\"Polygon\"", "\"LineString\"");
        assert!(matches!(
            VectorMap::from_geojson_str(&line),
            Err(MapError::UnsupportedGeometry { .. })
        ));
        let two = ONE_BUILDING.replace("[[0,0],[4,0],[4,4],[0,4],[0,0]]", "[[0,0],[4,0],[0,0]]");
        let err = VectorMap::from_geojson_str(&two).unwrap_err();
        assert!(err.to_string().contains("at least 3"));
        assert!(matches!(
            VectorMap::from_geojson_str("{not json"),
            Err(MapError::Json(_))
        ));
    }

    #[test]
    fn empty_collection_is_an_empty_map() {
        let map =
            VectorMap::from_geojson_str(r#"{"type":"FeatureCollection","features":[]}"#).unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = load_map("/nonexistent/streets.geojson").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/streets.geojson"));
    }

    #[test]
    fn confidence_validation() {
        assert!(MapConfidence::new(0.9, 0.8, 0.6).is_ok());
        assert!(matches!(
            MapConfidence::new(1.1, 0.8, 0.6),
            Err(MapError::InvalidConfidence { name: "beta_b", .. })
        ));
    }
}
