//! Forward construction of approach poses from ODD parameters and seeded
//! scenario sampling.

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use serde::{Deserialize, Serialize};

use super::{encode_pose, Extra, ImageSpec, Scenario, ScenarioPose, ScenarioTime, Trajectory};
use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::geodesy::{build_runway_frame, compose_attitude, wrap_360, Attitude, GeodeticPoint, RunwayFrame, RunwayGeometry, VRP_OFFSET_M};
use crate::odd::{Interval, OddConfig, Parameter, PoseParameters};

const MAX_REJECTIONS: usize = 100_000;

/// Position and attitude realizing `p` relative to the runway of `frame`.
/// The attitude is expressed in the tangent frame at the LTP.
pub fn pose_from_parameters(p: &PoseParameters, frame: &RunwayFrame) -> Result<(GeodeticPoint, Attitude)> {
    if !p.is_finite() {
        return Err(Error::invalid("pose parameters must be finite"));
    }
    if !(p.along_track < 0.0) {
        return Err(Error::invalid(format!(
            "along-track distance {} must be negative (approach side)",
            p.along_track
        )));
    }
    if p.lateral_path_angle.abs() >= 90.0 || p.vertical_path_angle.abs() >= 90.0 {
        return Err(Error::invalid("path angles must lie strictly inside (-90, 90)"));
    }
    let distance = -p.along_track;
    let cross = p.lateral_path_angle.to_radians().tan() * distance;
    let height = (-p.vertical_path_angle).to_radians().tan() * (distance + VRP_OFFSET_M);
    let position = frame.point_at(p.along_track, cross, height)?;
    let attitude = Attitude::new(wrap_360(frame.true_heading + p.relative_yaw), p.pitch, p.roll)?;
    Ok((position, attitude))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Uniform { lo: f64, hi: f64 },
    /// Truncated by rejection to the parameter's nominal interval.
    Normal { mean: f64, std: f64 },
}

/// Per-parameter draws. A parameter without a distribution is drawn
/// uniformly over its nominal interval (per segment for along-track, yaw and roll).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSpec {
    pub along_track: Option<Distribution>,
    pub lateral_path_angle: Option<Distribution>,
    pub vertical_path_angle: Option<Distribution>,
    pub relative_yaw: Option<Distribution>,
    pub pitch: Option<Distribution>,
    pub roll: Option<Distribution>,
    pub poses_per_segment: usize,
    pub seed: u64,
    pub time: ScenarioTime,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            along_track: None,
            lateral_path_angle: None,
            vertical_path_angle: None,
            relative_yaw: None,
            pitch: None,
            roll: None,
            poses_per_segment: 10,
            seed: 0,
            time: ScenarioTime::default(),
        }
    }
}

impl SamplingSpec {
    pub fn distribution(&self, p: Parameter) -> Option<&Distribution> {
        match p {
            Parameter::AlongTrack => self.along_track.as_ref(),
            Parameter::LateralPathAngle => self.lateral_path_angle.as_ref(),
            Parameter::VerticalPathAngle => self.vertical_path_angle.as_ref(),
            Parameter::RelativeYaw => self.relative_yaw.as_ref(),
            Parameter::Pitch => self.pitch.as_ref(),
            Parameter::Roll => self.roll.as_ref(),
        }
    }

    pub fn validate(&self, cfg: &OddConfig) -> Result<()> {
        if self.poses_per_segment == 0 {
            return Err(Error::invalid("poses_per_segment must be >= 1"));
        }
        self.time.validate()?;
        let nseg = cfg.segment_table.len();
        for param in Parameter::ALL {
            let Some(dist) = self.distribution(param) else { continue };
            let per_segment: Vec<Interval> = (0..nseg).map(|s| cfg.nominal_interval(param, s)).collect();
            let hull = per_segment
                .iter()
                .fold(per_segment[0], |a, b| Interval { lo: a.lo.min(b.lo), hi: a.hi.max(b.hi) });
            match *dist {
                Distribution::Uniform { lo, hi } => {
                    let u = Interval::new(lo, hi)?;
                    if u.lo < hull.lo || u.hi > hull.hi {
                        return Err(Error::invalid(format!(
                            "{param}: uniform bounds {u} exceed the nominal interval {hull}"
                        )));
                    }
                    if per_segment.iter().any(|i| i.intersect(&u).is_none()) {
                        return Err(Error::invalid(format!(
                            "{param}: uniform bounds {u} miss at least one segment's nominal interval"
                        )));
                    }
                }
                Distribution::Normal { mean, std } => {
                    if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
                        return Err(Error::invalid(format!("{param}: normal std must be positive")));
                    }
                }
            }
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, dist: Option<&Distribution>, nominal: Interval, param: Parameter) -> Result<f64> {
    let uniform = |rng: &mut ChaCha8Rng, i: Interval| {
        if i.lo == i.hi {
            i.lo
        } else {
            rng.random_range(i.lo..=i.hi)
        }
    };
    match dist {
        None => Ok(uniform(rng, nominal)),
        Some(Distribution::Uniform { lo, hi }) => {
            let i = Interval { lo: *lo, hi: *hi }
                .intersect(&nominal)
                .ok_or_else(|| Error::invalid(format!("{param}: uniform bounds miss {nominal}")))?;
            Ok(uniform(rng, i))
        }
        Some(Distribution::Normal { mean, std }) => {
            let normal = Normal::new(*mean, *std).map_err(|e| Error::invalid(format!("{param}: {e}")))?;
            for _ in 0..MAX_REJECTIONS {
                let x = normal.sample(rng);
                if nominal.contains(x) {
                    return Ok(x);
                }
            }
            Err(Error::invalid(format!(
                "{param}: normal({mean}, {std}) has negligible mass inside {nominal}"
            )))
        }
    }
}

/// Draw `poses_per_segment` poses per runway and per along-track segment.
///
/// Every (runway, segment) pair owns its own ChaCha stream derived from the
/// seed, so the output does not depend on evaluation order.
pub fn sample_scenario(
    runways: &[RunwayGeometry],
    spec: &SamplingSpec,
    cfg: &OddConfig,
    camera: &CameraModel,
    runways_database: &str,
) -> Result<Scenario> {
    if runways.is_empty() {
        return Err(Error::invalid("no runways to sample"));
    }
    cfg.validate()?;
    camera.validate()?;
    spec.validate(cfg)?;

    let nseg = cfg.segment_table.len();
    let mut airports_runways: IndexMap<String, Vec<String>> = IndexMap::new();
    let mut poses = Vec::with_capacity(runways.len() * nseg * spec.poses_per_segment);
    for (ri, rw) in runways.iter().enumerate() {
        let listed = airports_runways.entry(rw.airport_icao.clone()).or_default();
        if !listed.contains(&rw.runway_id) {
            listed.push(rw.runway_id.clone());
        }
        let frame = build_runway_frame(rw)?;
        for seg in 0..nseg {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream((ri * nseg + seg) as u64);
            for _ in 0..spec.poses_per_segment {
                let mut params = PoseParameters {
                    along_track: 0.0,
                    lateral_path_angle: 0.0,
                    vertical_path_angle: 0.0,
                    relative_yaw: 0.0,
                    pitch: 0.0,
                    roll: 0.0,
                };
                for param in Parameter::ALL {
                    let nominal = match param {
                        Parameter::AlongTrack => cfg.segment_table.segments()[seg].along_track,
                        _ => cfg.nominal_interval(param, seg),
                    };
                    params.set(param, draw(&mut rng, spec.distribution(param), nominal, param)?);
                }
                let mut uuid_bytes = [0u8; 16];
                rng.fill(&mut uuid_bytes);
                let (position, _) = pose_from_parameters(&params, &frame)?;
                let body = compose_attitude(params.relative_yaw, params.pitch, params.roll, &frame);
                poses.push(ScenarioPose {
                    uuid: uuid::Builder::from_random_bytes(uuid_bytes).into_uuid().to_string(),
                    airport: rw.airport_icao.clone(),
                    runway: rw.runway_id.clone(),
                    pose: encode_pose(&position, &body)?,
                    time: spec.time,
                    extra: Extra::new(),
                });
            }
        }
    }
    Ok(Scenario {
        airports_runways,
        image: ImageSpec::from_camera(camera),
        poses,
        runways_database: runways_database.to_owned(),
        trajectory: Trajectory::default(),
        extra: Extra::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesy::pose_parameters;
    use crate::odd::{classify, OddClassKind};
    use crate::scenario::emit_scenario;

    fn runway() -> RunwayGeometry {
        let ltp = GeodeticPoint::new(43.63, 1.37, 150.0).unwrap();
        RunwayGeometry::from_centerline("LFBO", "14R", ltp, 143.0, 3500.0, 45.0, true).unwrap()
    }

    fn params(along: f64, lat: f64, vert: f64) -> PoseParameters {
        PoseParameters {
            along_track: along,
            lateral_path_angle: lat,
            vertical_path_angle: vert,
            relative_yaw: 0.0,
            pitch: 0.0,
            roll: 0.0,
        }
    }

    #[test]
    fn three_degree_glide_on_centerline() {
        let frame = build_runway_frame(&runway()).unwrap();
        let (pos, att) = pose_from_parameters(&params(-3000.0, 0.0, -3.0), &frame).unwrap();
        let rc = frame.runway_coordinates(&pos);
        let expected_h = 3f64.to_radians().tan() * 3305.0;
        assert!((expected_h - 173.2).abs() < 0.05);
        assert!((rc.z - expected_h).abs() < 1e-6, "{}", rc.z);
        assert!(rc.y.abs() < 1e-6);
        assert!((att.heading - frame.true_heading).abs() < 1e-12);
        let back = pose_parameters(&pos, &att, &frame).unwrap();
        assert!((back.along_track + 3000.0).abs() < 1e-3);
        assert!(back.lateral_path_angle.abs() < 1e-6);
        assert!((back.vertical_path_angle + 3.0).abs() < 1e-6);
    }

    #[test]
    fn lateral_offset_at_6000() {
        let frame = build_runway_frame(&runway()).unwrap();
        let (pos, _) = pose_from_parameters(&params(-6000.0, 3.0, -3.0), &frame).unwrap();
        let rc = frame.runway_coordinates(&pos);
        let expected = 3f64.to_radians().tan() * 6000.0;
        assert!((expected - 314.5).abs() < 0.06);
        assert!((rc.y - expected).abs() < 1e-6);
    }

    #[test]
    fn non_negative_along_track_rejected() {
        let frame = build_runway_frame(&runway()).unwrap();
        assert!(pose_from_parameters(&params(0.0, 0.0, -3.0), &frame).is_err());
        assert!(pose_from_parameters(&params(100.0, 0.0, -3.0), &frame).is_err());
    }

    #[test]
    fn defaults_give_thirty_in_odd_poses() {
        let rw = runway();
        let cfg = OddConfig::default();
        let s = sample_scenario(std::slice::from_ref(&rw), &SamplingSpec::default(), &cfg, &CameraModel::default(), "db.json").unwrap();
        assert_eq!(s.poses.len(), 30);
        let frame = build_runway_frame(&rw).unwrap();
        for p in &s.poses {
            let (pos, body) = p.decode().unwrap();
            let params = crate::geodesy::pose_parameters_for_orientation(&pos, &body, &frame).unwrap();
            assert_eq!(classify(&params, &cfg).kind, OddClassKind::InOdd, "{params:?}");
        }
        s.validate().unwrap();
    }

    #[test]
    fn same_seed_same_document() {
        let cfg = OddConfig::default();
        let spec = SamplingSpec {
            seed: 42,
            ..SamplingSpec::default()
        };
        let a = sample_scenario(&[runway()], &spec, &cfg, &CameraModel::default(), "db.json").unwrap();
        let b = sample_scenario(&[runway()], &spec, &cfg, &CameraModel::default(), "db.json").unwrap();
        assert_eq!(emit_scenario(&a), emit_scenario(&b));
        let c = sample_scenario(&[runway()], &SamplingSpec { seed: 43, ..spec }, &cfg, &CameraModel::default(), "db.json").unwrap();
        assert_ne!(emit_scenario(&a), emit_scenario(&c));
    }

    #[test]
    fn normal_draws_stay_nominal() {
        let cfg = OddConfig::default();
        let spec = SamplingSpec {
            vertical_path_angle: Some(Distribution::Normal { mean: -3.0, std: 2.0 }),
            relative_yaw: Some(Distribution::Normal { mean: 0.0, std: 30.0 }),
            ..SamplingSpec::default()
        };
        let rw = runway();
        let frame = build_runway_frame(&rw).unwrap();
        let s = sample_scenario(&[rw], &spec, &cfg, &CameraModel::default(), "db.json").unwrap();
        for p in &s.poses {
            let (pos, body) = p.decode().unwrap();
            let params = crate::geodesy::pose_parameters_for_orientation(&pos, &body, &frame).unwrap();
            assert_eq!(classify(&params, &cfg).kind, OddClassKind::InOdd);
        }
    }

    #[test]
    fn spec_validation() {
        let cfg = OddConfig::default();
        let rw = [runway()];
        let cam = CameraModel::default();
        let bad = SamplingSpec {
            lateral_path_angle: Some(Distribution::Uniform { lo: -5.0, hi: 0.0 }),
            ..SamplingSpec::default()
        };
        assert!(sample_scenario(&rw, &bad, &cfg, &cam, "").is_err());
        let bad = SamplingSpec {
            pitch: Some(Distribution::Normal { mean: 0.0, std: 0.0 }),
            ..SamplingSpec::default()
        };
        assert!(sample_scenario(&rw, &bad, &cfg, &cam, "").is_err());
        // only reaches the far segment
        let bad = SamplingSpec {
            along_track: Some(Distribution::Uniform { lo: -6000.0, hi: -5000.0 }),
            ..SamplingSpec::default()
        };
        assert!(sample_scenario(&rw, &bad, &cfg, &cam, "").is_err());
        assert!(sample_scenario(&[], &SamplingSpec::default(), &cfg, &cam, "").is_err());
        let narrow = SamplingSpec {
            roll: Some(Distribution::Uniform { lo: -5.0, hi: 5.0 }),
            ..SamplingSpec::default()
        };
        assert!(sample_scenario(&rw, &narrow, &cfg, &cam, "").is_ok());
    }

    #[test]
    fn spec_yaml() {
        let spec: SamplingSpec = serde_yaml::from_str("seed: 3\npitch: {kind: normal, mean: -5.0, std: 2.0}\nroll: {kind: uniform, lo: -5.0, hi: 5.0}\n").unwrap();
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.poses_per_segment, 10);
        assert_eq!(spec.pitch, Some(Distribution::Normal { mean: -5.0, std: 2.0 }));
    }
}
