//! Runway-end calibration from nadir imagery.
//!
//! A camera hovers above the database threshold center looking straight down
//! with the image up axis along the runway. The two piano bottom corners are
//! clicked in the image and back-projected onto the ground plane, which
//! replaces the database threshold corners.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::camera::{backproject_to_ground, nadir_calibration_pose, project, CameraModel, CameraPose, PixelPoint};
use crate::error::{Error, Result};
use crate::geodesy::{build_runway_frame, GeodeticPoint, RunwayGeometry};
use crate::scenario::RunwayDatabase;

pub const DEFAULT_CALIBRATION_AGL_M: f64 = 400.0;

pub const CALIBRATED_SOURCE: &str = "calibrated";

/// One clicked corner. `image_id` is `ICAO/RUNWAY`; `corner` is 0 for the
/// threshold-left and 1 for the threshold-right piano corner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerObservation {
    pub image_id: String,
    pub corner: u8,
    pub u: f64,
    pub v: f64,
    pub ground_altitude: f64,
}

impl CornerObservation {
    fn runway_key(&self) -> Result<(String, String)> {
        match self.image_id.split_once('/') {
            Some((a, r)) if !a.is_empty() && !r.is_empty() => Ok((a.to_string(), r.to_string())),
            _ => Err(Error::validation(format!(
                "image_id `{}` is not of the form ICAO/RUNWAY",
                self.image_id
            ))),
        }
    }
}

pub fn parse_observations(csv_doc: &str) -> Result<Vec<CornerObservation>> {
    let mut rd = csv::Reader::from_reader(csv_doc.as_bytes());
    let headers = rd.headers()?.clone();
    for col in ["image_id", "corner", "u", "v", "ground_altitude"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::parse(format!("calibration CSV lacks the `{col}` column")));
        }
    }
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let o: CornerObservation = row?;
        if o.corner > 1 {
            return Err(Error::validation(format!(
                "{}: corner index {} must be 0 or 1",
                o.image_id, o.corner
            )));
        }
        out.push(o);
    }
    Ok(out)
}

pub fn observations_to_csv(obs: &[CornerObservation]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for o in obs {
        w.serialize(o).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Nadir acquisition pose used for `rw`: above its threshold center, image up along its true heading.
pub fn acquisition_pose(rw: &RunwayGeometry, altitude_agl: f64) -> Result<CameraPose> {
    let frame = build_runway_frame(rw)?;
    nadir_calibration_pose(&rw.threshold_center(), frame.true_heading, altitude_agl)
}

/// Pixel positions of the true threshold corners as seen from the acquisition
/// pose planned from `database_rw`. Used to build synthetic calibration runs.
pub fn synthesize_observations(
    true_rw: &RunwayGeometry,
    database_rw: &RunwayGeometry,
    cam: &CameraModel,
    altitude_agl: f64,
) -> Result<Vec<CornerObservation>> {
    let pose = acquisition_pose(database_rw, altitude_agl)?;
    let id = format!("{}/{}", database_rw.airport_icao, database_rw.runway_id);
    (0..2u8)
        .map(|k| {
            let c = &true_rw.corners[k as usize];
            let p = project(c, cam, &pose)?;
            Ok(CornerObservation {
                image_id: id.clone(),
                corner: k,
                u: p.pixel.u,
                v: p.pixel.v,
                ground_altitude: c.altitude,
            })
        })
        .collect()
}

/// "14R" -> "32L", "09" -> "27", "18C" -> "36C".
pub fn reciprocal_designator(id: &str) -> Option<String> {
    let digits: String = id.chars().take_while(char::is_ascii_digit).collect();
    let n: u32 = digits.parse().ok()?;
    if !(1..=36).contains(&n) {
        return None;
    }
    let side = match &id[digits.len()..] {
        "" => "",
        "L" => "R",
        "R" => "L",
        "C" => "C",
        _ => return None,
    };
    let m = (n + 17) % 36 + 1;
    Some(format!("{m:02}{side}"))
}

/// Back-project every observation and return the corrected runway ends.
///
/// Each runway needs both threshold corners. Far corners come from the
/// calibrated reciprocal end when it is present, otherwise they are kept
/// from the database.
pub fn calibrate(
    db: &RunwayDatabase,
    observations: &[CornerObservation],
    cam: &CameraModel,
    altitude_agl: f64,
) -> Result<RunwayDatabase> {
    cam.validate()?;
    let mut seen: BTreeMap<(String, String), [Option<GeodeticPoint>; 2]> = BTreeMap::new();
    for o in observations {
        let key = o.runway_key()?;
        let rw = db
            .get(&key.0, &key.1)
            .ok_or_else(|| Error::validation(format!("runway {} not in the database", o.image_id)))?;
        let pose = acquisition_pose(rw, altitude_agl)?;
        let p = backproject_to_ground(&PixelPoint { u: o.u, v: o.v }, cam, &pose, o.ground_altitude)?;
        let slot = &mut seen.entry(key).or_default()[o.corner as usize];
        if slot.is_some() {
            return Err(Error::validation(format!(
                "{}: corner {} observed twice",
                o.image_id, o.corner
            )));
        }
        *slot = Some(p);
    }

    let mut thresholds = BTreeMap::new();
    for ((airport, runway), corners) in seen {
        match corners {
            [Some(a), Some(b)] => {
                thresholds.insert((airport, runway), [a, b]);
            }
            _ => {
                return Err(Error::validation(format!(
                    "{airport}/{runway}: both threshold corners are required"
                )))
            }
        }
    }

    let mut out = RunwayDatabase::new();
    for ((airport, runway), [c0, c1]) in &thresholds {
        let old = db.get(airport, runway).expect("checked above");
        let far = reciprocal_designator(runway)
            .and_then(|r| thresholds.get(&(airport.clone(), r)))
            .map(|[r0, r1]| [*r0, *r1])
            .unwrap_or([old.corners[2], old.corners[3]]);
        let rw = RunwayGeometry::new(airport.clone(), runway.clone(), [*c0, *c1, far[0], far[1]], old.has_piano)?;
        out.insert(rw, CALIBRATED_SOURCE);
    }
    Ok(out)
}
