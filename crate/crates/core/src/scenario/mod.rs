//! `.yaml` scenario documents: image geometry header plus timestamped 6-DoF
//! poses, each aimed at one airport runway.
//!
//! The six pose numbers are `[longitude, latitude, altitude, heading, tilt,
//! roll]` in degrees and meters, where tilt is 0 for a camera looking straight
//! down and 90 for a level camera. [`decode_pose`] and [`encode_pose`] are the
//! only places that interpret them.

mod runway_db;
mod sampling;
mod split;

pub use runway_db::{parse_runway_db, RunwayDatabase, RunwayEntry};
pub use sampling::{pose_from_parameters, sample_scenario, Distribution, SamplingSpec};
pub use split::{split_airports, AirportSplit};

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::camera::{CameraModel, CameraPose};
use crate::error::{Error, Result};
use crate::geodesy::{GeodeticPoint, LocalFrame, Orientation};

pub type Extra = IndexMap<String, serde_yaml::Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(deserialize_with = "airport_runway_map")]
    pub airports_runways: IndexMap<String, Vec<String>>,
    pub image: ImageSpec,
    #[serde(default)]
    pub poses: Vec<ScenarioPose>,
    pub runways_database: String,
    pub trajectory: Trajectory,
    /// Keys this crate does not interpret, kept for round-tripping.
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageSpec {
    pub height: u32,
    pub width: u32,
    pub fov_x: f64,
    pub fov_y: f64,
    #[serde(flatten)]
    pub extra: Extra,
}

impl ImageSpec {
    pub fn camera(&self) -> Result<CameraModel> {
        CameraModel::new(self.width, self.height, self.fov_x, self.fov_y)
    }

    pub fn from_camera(cam: &CameraModel) -> Self {
        Self {
            height: cam.height,
            width: cam.width,
            fov_x: cam.fov_x,
            fov_y: cam.fov_y,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub sample_number: u32,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Default for Trajectory {
    fn default() -> Self {
        Self {
            sample_number: 1,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPose {
    #[serde(deserialize_with = "scalar_string")]
    pub uuid: String,
    #[serde(deserialize_with = "scalar_string")]
    pub airport: String,
    #[serde(deserialize_with = "scalar_string")]
    pub runway: String,
    pub pose: PoseVector,
    pub time: ScenarioTime,
    #[serde(flatten)]
    pub extra: Extra,
}

/// The six pose numbers, in file order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseVector {
    pub longitude: f64,
    pub latitude: f64,
    pub altitude: f64,
    pub heading: f64,
    pub tilt: f64,
    pub roll: f64,
}

impl PoseVector {
    pub fn to_array(&self) -> [f64; 6] {
        [self.longitude, self.latitude, self.altitude, self.heading, self.tilt, self.roll]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            longitude: a[0],
            latitude: a[1],
            altitude: a[2],
            heading: a[3],
            tilt: a[4],
            roll: a[5],
        }
    }
}

impl Serialize for PoseVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PoseVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = PoseVector;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a sequence of six numbers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<PoseVector, A::Error> {
                let mut out = [0.0; 6];
                let mut n = 0;
                while let Some(LenientNumber(x)) = seq.next_element()? {
                    if n < 6 {
                        out[n] = x;
                    }
                    n += 1;
                }
                if n != 6 {
                    return Err(de::Error::invalid_length(n, &self));
                }
                Ok(PoseVector::from_array(out))
            }
        }
        d.deserialize_seq(V)
    }
}

/// A number, also accepted as a string with a trailing comma (`- 1.3271,`),
/// which is how flow-style lists pasted into block sequences read.
struct LenientNumber(f64);

impl<'de> Deserialize<'de> for LenientNumber {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = LenientNumber;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<LenientNumber, E> {
                Ok(LenientNumber(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<LenientNumber, E> {
                Ok(LenientNumber(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<LenientNumber, E> {
                Ok(LenientNumber(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<LenientNumber, E> {
                let t = v.trim().trim_end_matches(',').trim();
                t.parse::<f64>()
                    .map(LenientNumber)
                    .map_err(|_| E::custom(format!("`{v}` is not a number")))
            }
        }
        d.deserialize_any(V)
    }
}

/// Plain scalar read as text: `14`, `09` and `14R` are all runway ids.
fn scalar_string<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    Ok(ScalarString::deserialize(d)?.0)
}

struct ScalarString(String);

impl<'de> Deserialize<'de> for ScalarString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ScalarString;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a scalar")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ScalarString, E> {
                Ok(ScalarString(v.to_owned()))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ScalarString, E> {
                Ok(ScalarString(v.to_string()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ScalarString, E> {
                Ok(ScalarString(v.to_string()))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ScalarString, E> {
                Ok(ScalarString(v.to_string()))
            }
            fn visit_bool<E: de::Error>(self, v: bool) -> std::result::Result<ScalarString, E> {
                Ok(ScalarString(v.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

fn airport_runway_map<'de, D: Deserializer<'de>>(
    d: D,
) -> std::result::Result<IndexMap<String, Vec<String>>, D::Error> {
    let raw: IndexMap<String, Vec<ScalarString>> = IndexMap::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|(k, v)| (k, v.into_iter().map(|s| s.0).collect()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioTime {
    pub second: u32,
    pub minute: u32,
    pub hour: u32,
    pub day: u32,
    pub month: u32,
    pub year: i32,
}

impl Default for ScenarioTime {
    fn default() -> Self {
        Self {
            second: 1,
            minute: 0,
            hour: 10,
            day: 1,
            month: 6,
            year: 2020,
        }
    }
}

impl ScenarioTime {
    pub fn validate(&self) -> Result<()> {
        let leap = (self.year % 4 == 0 && self.year % 100 != 0) || self.year % 400 == 0;
        let days = match self.month {
            1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
            4 | 6 | 9 | 11 => 30,
            2 if leap => 29,
            2 => 28,
            m => return Err(Error::validation(format!("month {m} outside 1..=12"))),
        };
        if self.day < 1 || self.day > days {
            return Err(Error::validation(format!(
                "day {} outside 1..={days} for {}-{:02}",
                self.day, self.year, self.month
            )));
        }
        if self.hour > 23 || self.minute > 59 || self.second > 59 {
            return Err(Error::validation(format!(
                "time {:02}:{:02}:{:02} out of range",
                self.hour, self.minute, self.second
            )));
        }
        Ok(())
    }
}

/// Position and body orientation encoded by a pose vector. Heading, tilt and
/// roll are measured in the tangent frame at the pose's own position.
pub fn decode_pose(v: &PoseVector) -> Result<(GeodeticPoint, Orientation)> {
    if !(0.0..=180.0).contains(&v.tilt) {
        return Err(Error::validation(format!("tilt {} outside [0, 180]", v.tilt)));
    }
    let position = GeodeticPoint::new(v.latitude, v.longitude, v.altitude)?;
    let body = Orientation::from_local_euler(&LocalFrame::at(position), v.heading, v.tilt - 90.0, v.roll);
    Ok((position, body))
}

/// Inverse of [`decode_pose`].
pub fn encode_pose(position: &GeodeticPoint, body: &Orientation) -> Result<PoseVector> {
    let att = body.to_local_euler(&LocalFrame::at(*position))?;
    Ok(PoseVector {
        longitude: position.longitude,
        latitude: position.latitude,
        altitude: position.altitude,
        heading: att.heading,
        tilt: att.pitch + 90.0,
        roll: att.roll,
    })
}

impl ScenarioPose {
    pub fn decode(&self) -> Result<(GeodeticPoint, Orientation)> {
        decode_pose(&self.pose)
    }

    pub fn camera_pose(&self) -> Result<CameraPose> {
        let (position, body) = self.decode()?;
        Ok(CameraPose::from_body(position, &body))
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.image.width == 0 || self.image.height == 0 {
            return Err(Error::validation("image width and height must be positive"));
        }
        self.image.camera().map_err(|e| Error::validation(e.to_string()))?;
        if self.trajectory.sample_number < 1 {
            return Err(Error::validation("trajectory.sample_number must be >= 1"));
        }
        let mut seen = HashSet::new();
        for p in &self.poses {
            if !seen.insert(p.uuid.as_str()) {
                return Err(Error::validation(format!("duplicate pose uuid {}", p.uuid)));
            }
            let listed = self
                .airports_runways
                .get(&p.airport)
                .is_some_and(|rws| rws.iter().any(|r| r == &p.runway));
            if !listed {
                return Err(Error::validation(format!(
                    "pose {} targets {}/{} which is not listed in airports_runways",
                    p.uuid, p.airport, p.runway
                )));
            }
            p.time
                .validate()
                .map_err(|e| Error::validation(format!("pose {}: {e}", p.uuid)))?;
            decode_pose(&p.pose).map_err(|e| Error::validation(format!("pose {}: {e}", p.uuid)))?;
        }
        Ok(())
    }

    pub fn camera(&self) -> Result<CameraModel> {
        self.image.camera()
    }
}

pub fn parse_scenario(document: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_yaml::from_str(document)?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn emit_scenario(scenario: &Scenario) -> String {
    serde_yaml::to_string(scenario).expect("scenario serializes")
}
