//! Named TX/RX points on a site map and checks of reported separations
//! against map geometry.
//!
//! Site-map document (TOML):
//!
//! ```toml
//! map_id = "nyu-inh-370-jay"
//! environment = "InH"
//! image = "floorplan.png"      # optional
//! meters_per_pixel = 0.05      # optional
//!
//! [[points]]
//! name = "TX1"
//! x_m = 0.0
//! y_m = 0.0
//! z_m = 2.5                    # optional
//!
//! [[points]]
//! name = "RX1"                 # coordinates may be omitted entirely
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metadata::Environment;
use crate::record::PointRecord;

/// Separations are reported to 0.1 m; 0.5 m absorbs map digitization error.
pub const DEFAULT_TOLERANCE_M: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SiteMapError {
    #[error("site map: {0}")]
    Parse(String),
    #[error("point `{0}` is defined more than once")]
    DuplicatePoint(String),
    #[error("point `{0}` has a non-finite coordinate")]
    NonFiniteCoordinate(String),
    #[error("point `{0}` needs both x_m and y_m")]
    PartialCoordinates(String),
    #[error("meters_per_pixel must be > 0")]
    InvalidScale,
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("point `{0}` has no coordinates")]
    UnplacedPoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Position {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: Option<f64>,
}

impl Position {
    /// Euclidean distance; planar when either point lacks a height.
    pub fn distance(&self, other: &Position) -> f64 {
        let dx = self.x_m - other.x_m;
        let dy = self.y_m - other.y_m;
        let dz = match (self.z_m, other.z_m) {
            (Some(a), Some(b)) => a - b,
            _ => 0.0,
        };
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SitePoint {
    pub name: String,
    pub position: Option<Position>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteMap {
    pub map_id: String,
    pub environment: Environment,
    pub image: Option<String>,
    pub meters_per_pixel: Option<f64>,
    points: Vec<SitePoint>,
    index: HashMap<String, usize>,
}

impl SiteMap {
    pub fn new(
        map_id: impl Into<String>,
        environment: Environment,
        points: Vec<SitePoint>,
    ) -> Result<Self, SiteMapError> {
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if let Some(pos) = p.position {
                let finite = pos.x_m.is_finite()
                    && pos.y_m.is_finite()
                    && pos.z_m.is_none_or(f64::is_finite);
                if !finite {
                    return Err(SiteMapError::NonFiniteCoordinate(p.name.clone()));
                }
            }
            if index.insert(p.name.clone(), i).is_some() {
                return Err(SiteMapError::DuplicatePoint(p.name.clone()));
            }
        }
        Ok(Self {
            map_id: map_id.into(),
            environment,
            image: None,
            meters_per_pixel: None,
            points,
            index,
        })
    }

    pub fn points(&self) -> &[SitePoint] {
        &self.points
    }

    pub fn point(&self, name: &str) -> Option<&SitePoint> {
        self.index.get(name).map(|&i| &self.points[i])
    }

    fn position(&self, name: &str) -> Result<Position, SiteMapError> {
        let p = self
            .point(name)
            .ok_or_else(|| SiteMapError::UnknownPoint(name.to_string()))?;
        p.position
            .ok_or_else(|| SiteMapError::UnplacedPoint(name.to_string()))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    map_id: String,
    environment: String,
    image: Option<String>,
    meters_per_pixel: Option<f64>,
    #[serde(default)]
    points: Vec<RawPoint>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    name: String,
    x_m: Option<f64>,
    y_m: Option<f64>,
    z_m: Option<f64>,
}

pub fn parse_sitemap(text: &str) -> Result<SiteMap, SiteMapError> {
    let raw: RawMap =
        toml::from_str(text).map_err(|e| SiteMapError::Parse(e.message().to_string()))?;
    let environment = raw
        .environment
        .parse()
        .map_err(|e: crate::metadata::MetadataError| SiteMapError::Parse(e.to_string()))?;
    let points = raw
        .points
        .into_iter()
        .map(|p| {
            let position = match (p.x_m, p.y_m, p.z_m) {
                (Some(x_m), Some(y_m), z_m) => Some(Position { x_m, y_m, z_m }),
                (None, None, None) => None,
                _ => return Err(SiteMapError::PartialCoordinates(p.name)),
            };
            Ok(SitePoint {
                name: p.name,
                position,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if raw
        .meters_per_pixel
        .is_some_and(|s| !(s.is_finite() && s > 0.0))
    {
        return Err(SiteMapError::InvalidScale);
    }
    let mut map = SiteMap::new(raw.map_id, environment, points)?;
    map.image = raw.image;
    map.meters_per_pixel = raw.meters_per_pixel;
    Ok(map)
}

/// Straight-line distance between two named points, in meters.
pub fn point_distance(map: &SiteMap, a: &str, b: &str) -> Result<f64, SiteMapError> {
    Ok(map.position(a)?.distance(&map.position(b)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationMismatch {
    pub frequency_ghz: f64,
    pub tx_id: String,
    pub rx_id: String,
    pub reported_m: f64,
    pub map_m: f64,
    pub difference_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnresolvedLink {
    pub frequency_ghz: f64,
    pub tx_id: String,
    pub rx_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SeparationReport {
    pub checked: usize,
    pub mismatches: Vec<SeparationMismatch>,
    pub unresolved: Vec<UnresolvedLink>,
}

/// Compares each record's `tr_separation_m` with the map distance between its
/// TX and RX. Records whose points are missing or unplaced are listed as
/// unresolved rather than failing the check.
pub fn check_separations(
    records: &[PointRecord],
    map: &SiteMap,
    tolerance_m: f64,
) -> SeparationReport {
    let mut report = SeparationReport::default();
    for r in records {
        match point_distance(map, &r.tx_id, &r.rx_id) {
            Ok(map_m) => {
                report.checked += 1;
                let difference_m = (map_m - r.tr_separation_m).abs();
                if difference_m > tolerance_m {
                    report.mismatches.push(SeparationMismatch {
                        frequency_ghz: r.frequency_ghz,
                        tx_id: r.tx_id.clone(),
                        rx_id: r.rx_id.clone(),
                        reported_m: r.tr_separation_m,
                        map_m,
                        difference_m,
                    });
                }
            }
            Err(e) => report.unresolved.push(UnresolvedLink {
                frequency_ghz: r.frequency_ghz,
                tx_id: r.tx_id.clone(),
                rx_id: r.rx_id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::record::LinkState;
    use proptest::prelude::*;

    fn at(name: &str, x: f64, y: f64, z: Option<f64>) -> SitePoint {
        SitePoint {
            name: name.into(),
            position: Some(Position {
                x_m: x,
                y_m: y,
                z_m: z,
            }),
        }
    }

    fn map(points: Vec<SitePoint>) -> SiteMap {
        SiteMap::new("m", Environment::InH, points).unwrap()
    }

    #[test]
    fn distances() {
        let m = map(vec![
            at("A", 0.0, 0.0, None),
            at("B", 3.0, 4.0, None),
            at("C", 0.0, 0.0, Some(0.0)),
            at("D", 1.0, 2.0, Some(2.0)),
        ]);
        assert_eq!(point_distance(&m, "A", "B").unwrap(), 5.0);
        assert_eq!(point_distance(&m, "B", "B").unwrap(), 0.0);
        assert_eq!(point_distance(&m, "C", "D").unwrap(), 3.0);
        // a missing height drops to the plane
        assert_eq!(point_distance(&m, "A", "D").unwrap(), 5f64.sqrt());
        assert_eq!(
            point_distance(&m, "A", "Z"),
            Err(SiteMapError::UnknownPoint("Z".into()))
        );
    }

    fn table_row() -> PointRecord {
        PointRecord::bare("NYU WIRELESS", 6.75, "TX1", "RX1", LinkState::Los, 24.6)
    }

    #[test]
    fn consistent_and_displaced_maps() {
        let good = map(vec![at("TX1", 0.0, 0.0, None), at("RX1", 24.6, 0.0, None)]);
        let report = check_separations(&[table_row()], &good, DEFAULT_TOLERANCE_M);
        assert_eq!(report.checked, 1);
        assert!(report.mismatches.is_empty());

        let moved = map(vec![at("TX1", 0.0, 0.0, None), at("RX1", 30.0, 0.0, None)]);
        let report = check_separations(&[table_row()], &moved, DEFAULT_TOLERANCE_M);
        assert_eq!(report.mismatches.len(), 1);
        assert!((report.mismatches[0].difference_m - 5.4).abs() < 1e-9);

        let report = check_separations(&[table_row()], &moved, f64::INFINITY);
        assert!(report.mismatches.is_empty());
    }

    #[test]
    fn missing_point_is_unresolved() {
        let m = map(vec![at("TX1", 0.0, 0.0, None)]);
        let report = check_separations(&[table_row()], &m, DEFAULT_TOLERANCE_M);
        assert_eq!(report.checked, 0);
        assert!(report.mismatches.is_empty());
        assert_eq!(report.unresolved.len(), 1);
        assert_eq!(report.unresolved[0].reason, "unknown point `RX1`");
    }

    #[test]
    fn placeholder_map_resolves_nothing() {
        let m = fixture::inh_sitemap();
        assert_eq!(m.points().len(), 10);
        assert!(m.points().iter().all(|p| p.position.is_none()));
        let ds = fixture::table_i();
        let report = check_separations(ds.records(), &m, DEFAULT_TOLERANCE_M);
        assert_eq!(report.unresolved.len(), 40);
        assert!(report.mismatches.is_empty());
    }

    #[test]
    fn parse_errors() {
        let dup = "map_id='m'\nenvironment='InH'\n[[points]]\nname='A'\n[[points]]\nname='A'\n";
        assert_eq!(
            parse_sitemap(dup),
            Err(SiteMapError::DuplicatePoint("A".into()))
        );
        let partial = "map_id='m'\nenvironment='InH'\n[[points]]\nname='A'\nx_m=1.0\n";
        assert_eq!(
            parse_sitemap(partial),
            Err(SiteMapError::PartialCoordinates("A".into()))
        );
        let scale = "map_id='m'\nenvironment='InH'\nmeters_per_pixel=0.0\n";
        assert_eq!(parse_sitemap(scale), Err(SiteMapError::InvalidScale));
        let nan = "map_id='m'\nenvironment='InH'\n[[points]]\nname='A'\nx_m=nan\ny_m=0.0\n";
        assert_eq!(
            parse_sitemap(nan),
            Err(SiteMapError::NonFiniteCoordinate("A".into()))
        );
        assert!(matches!(
            parse_sitemap("map_id = 3"),
            Err(SiteMapError::Parse(_))
        ));
    }

    #[test]
    fn parse_with_coordinates() {
        let text = "map_id='m'\nenvironment='UMi'\nimage='a.png'\nmeters_per_pixel=0.1\n\
                    [[points]]\nname='TX1'\nx_m=0.0\ny_m=0.0\nz_m=4.0\n\
                    [[points]]\nname='RX1'\nx_m=3.0\ny_m=4.0\nz_m=4.0\n";
        let m = parse_sitemap(text).unwrap();
        assert_eq!(m.environment, Environment::UMi);
        assert_eq!(m.image.as_deref(), Some("a.png"));
        assert_eq!(point_distance(&m, "TX1", "RX1").unwrap(), 5.0);
    }

    fn coord() -> impl Strategy<Value = (f64, f64, Option<f64>)> {
        (-1e3f64..1e3, -1e3f64..1e3, prop::option::of(-50.0f64..50.0))
    }

    proptest! {
        #[test]
        fn symmetric_with_triangle_inequality(a in coord(), b in coord(), c in coord()) {
            let m = map(vec![at("A", a.0, a.1, a.2), at("B", b.0, b.1, b.2), at("C", c.0, c.1, c.2)]);
            let d = |x: &str, y: &str| point_distance(&m, x, y).unwrap();
            prop_assert_eq!(d("A", "B"), d("B", "A"));
            // mixed 2-D/3-D pairs need a consistent metric for the triangle inequality
            if a.2.is_some() == b.2.is_some() && b.2.is_some() == c.2.is_some() {
                prop_assert!(d("A", "C") <= d("A", "B") + d("B", "C") + 1e-9);
            }
        }
    }
}
