//! WGS84 conversions, local tangent planes, runway-anchored frames and the
//! extraction of approach parameters from a 6-DoF pose.
//!
//! Altitudes are heights above the WGS84 ellipsoid throughout the crate. All
//! approach angles are evaluated in the flat ENU tangent plane anchored at the
//! runway's landing threshold point (LTP); at approach ranges (< 10 km) the
//! curvature error is far below the meter-level accuracy of runway corners.
//!
//! Rotation conventions: body axes are x forward, y right, z down. Euler
//! angles use the intrinsic Z-Y'-X'' (yaw, pitch, roll) sequence. Pitch is
//! positive nose-up and roll positive right-wing-down.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odd::PoseParameters;

/// WGS84 semi-major axis (m).
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// WGS84 semi-minor axis (m).
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);
/// First eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

/// Distance from the LTP to the vertical reference point along the centerline.
pub const VRP_OFFSET_M: f64 = 305.0;

/// Inside this horizontal radius around the VRP path angles are not evaluated.
pub const VRP_EXCLUSION_RADIUS_M: f64 = 1.0;

/// Pitch values closer than this to +/-90 deg are rejected by Euler extraction.
pub const GIMBAL_LOCK_MARGIN_DEG: f64 = 0.1;

const ECEF_MIN_NORM_M: f64 = 1e-3;
// lateral path angle is defined as zero this close to the LTP
const LTP_COINCIDENCE_M: f64 = 1e-6;

/// Wrap an angle in degrees to (-180, 180].
pub fn wrap_180(deg: f64) -> f64 {
    let mut x = deg % 360.0;
    if x <= -180.0 {
        x += 360.0;
    } else if x > 180.0 {
        x -= 360.0;
    }
    x
}

/// Wrap an angle in degrees to [0, 360).
pub fn wrap_360(deg: f64) -> f64 {
    let x = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if x >= 360.0 {
        0.0
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPoint {
    /// Degrees, [-90, 90].
    pub latitude: f64,
    /// Degrees, (-180, 180].
    pub longitude: f64,
    /// Meters above the WGS84 ellipsoid.
    pub altitude: f64,
}

impl GeodeticPoint {
    /// Validates latitude and normalizes longitude to (-180, 180].
    pub fn new(latitude: f64, longitude: f64, altitude: f64) -> Result<Self> {
        if !(latitude.is_finite() && longitude.is_finite() && altitude.is_finite()) {
            return Err(Error::invalid("geodetic coordinates must be finite"));
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(Error::invalid(format!(
                "latitude {latitude} outside [-90, 90]"
            )));
        }
        Ok(Self {
            latitude,
            longitude: wrap_180(longitude),
            altitude,
        })
    }

    pub fn to_ecef(&self) -> EcefVector {
        geodetic_to_ecef(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcefVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EcefVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }
}

pub fn geodetic_to_ecef(p: &GeodeticPoint) -> EcefVector {
    let lat = p.latitude.to_radians();
    let lon = p.longitude.to_radians();
    let (sin_lat, cos_lat) = lat.sin_cos();
    let (sin_lon, cos_lon) = lon.sin_cos();
    let n = WGS84_A / (1.0 - WGS84_E2 * sin_lat * sin_lat).sqrt();
    EcefVector {
        x: (n + p.altitude) * cos_lat * cos_lon,
        y: (n + p.altitude) * cos_lat * sin_lon,
        z: (n * (1.0 - WGS84_E2) + p.altitude) * sin_lat,
    }
}

/// Inverse of [`geodetic_to_ecef`].
///
/// Fixed-point iteration on latitude, `lat = atan2(z + e^2 N sin(lat), p)`,
/// started from the spherical guess corrected by `1 - e^2`. The iteration is
/// a contraction with factor about e^2 (0.0067), so it reaches machine
/// precision in 4 to 5 steps anywhere outside the Earth's core; it is capped
/// at 16 steps. Height uses `p cos(lat) + z sin(lat) - a sqrt(1 - e^2 sin^2(lat))`,
/// which stays well conditioned at the poles.
pub fn ecef_to_geodetic(v: &EcefVector) -> Result<GeodeticPoint> {
    let norm = v.as_vector().norm();
    if !norm.is_finite() || norm < ECEF_MIN_NORM_M {
        return Err(Error::Degenerate(format!(
            "ECEF vector norm {norm} is too close to the Earth's center"
        )));
    }
    let p = v.x.hypot(v.y);
    let lon = v.y.atan2(v.x);
    let mut lat = v.z.atan2(p * (1.0 - WGS84_E2));
    for _ in 0..16 {
        let sin_lat = lat.sin();
        let n = WGS84_A / (1.0 - WGS84_E2 * sin_lat * sin_lat).sqrt();
        let next = (v.z + WGS84_E2 * n * sin_lat).atan2(p);
        let done = (next - lat).abs() < 1e-15;
        lat = next;
        if done {
            break;
        }
    }
    let (sin_lat, cos_lat) = lat.sin_cos();
    let alt = p * cos_lat + v.z * sin_lat - WGS84_A * (1.0 - WGS84_E2 * sin_lat * sin_lat).sqrt();
    GeodeticPoint::new(lat.to_degrees(), lon.to_degrees(), alt)
}

/// Rotation taking ECEF vectors to the local East-North-Up frame at `p`.
pub fn ecef_to_enu_rotation(p: &GeodeticPoint) -> Matrix3<f64> {
    let (sin_lat, cos_lat) = p.latitude.to_radians().sin_cos();
    let (sin_lon, cos_lon) = p.longitude.to_radians().sin_cos();
    Matrix3::new(
        -sin_lon,
        cos_lon,
        0.0,
        -sin_lat * cos_lon,
        -sin_lat * sin_lon,
        cos_lat,
        cos_lat * cos_lon,
        cos_lat * sin_lon,
        sin_lat,
    )
}

/// Flat East-North-Up tangent plane anchored at a geodetic origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: GeodeticPoint,
    pub origin_ecef: Vector3<f64>,
    /// ECEF to ENU.
    pub ecef_to_enu: Matrix3<f64>,
}

impl LocalFrame {
    pub fn at(origin: GeodeticPoint) -> Self {
        Self {
            origin,
            origin_ecef: origin.to_ecef().as_vector(),
            ecef_to_enu: ecef_to_enu_rotation(&origin),
        }
    }

    pub fn to_enu(&self, p: &GeodeticPoint) -> Vector3<f64> {
        self.ecef_to_enu * (p.to_ecef().as_vector() - self.origin_ecef)
    }

    pub fn to_geodetic(&self, enu: &Vector3<f64>) -> Result<GeodeticPoint> {
        let ecef = self.origin_ecef + self.ecef_to_enu.transpose() * enu;
        ecef_to_geodetic(&EcefVector::from_vector(&ecef))
    }

    /// Rotation from this frame's local NED axes to ECEF.
    pub fn ned_to_ecef(&self) -> Matrix3<f64> {
        self.ecef_to_enu.transpose() * ned_to_enu()
    }
}

fn ned_to_enu() -> Matrix3<f64> {
    Matrix3::new(0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0)
}

/// Z-Y-X Euler matrix (body to reference), angles in degrees.
pub fn euler_zyx_matrix(yaw: f64, pitch: f64, roll: f64) -> Matrix3<f64> {
    let (sy, cy) = yaw.to_radians().sin_cos();
    let (sp, cp) = pitch.to_radians().sin_cos();
    let (sr, cr) = roll.to_radians().sin_cos();
    let rz = Matrix3::new(cy, -sy, 0.0, sy, cy, 0.0, 0.0, 0.0, 1.0);
    let ry = Matrix3::new(cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp);
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, cr, -sr, 0.0, sr, cr);
    rz * ry * rx
}

/// Decompose a body-to-reference rotation into Z-Y-X Euler angles (degrees).
/// Yaw is wrapped to (-180, 180].
pub fn euler_zyx_angles(m: &Matrix3<f64>) -> Result<(f64, f64, f64)> {
    let pitch = (-m[(2, 0)]).clamp(-1.0, 1.0).asin().to_degrees();
    if 90.0 - pitch.abs() < GIMBAL_LOCK_MARGIN_DEG {
        return Err(Error::GimbalLock { pitch });
    }
    let yaw = m[(1, 0)].atan2(m[(0, 0)]).to_degrees();
    let roll = m[(2, 1)].atan2(m[(2, 2)]).to_degrees();
    Ok((wrap_180(yaw), pitch, wrap_180(roll)))
}

/// Orientation of an aircraft body in the world, stored as the body-to-ECEF rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    pub body_to_ecef: Matrix3<f64>,
}

impl Orientation {
    /// Heading (true), pitch and roll measured in the NED axes of `frame`.
    pub fn from_local_euler(frame: &LocalFrame, heading: f64, pitch: f64, roll: f64) -> Self {
        Self {
            body_to_ecef: frame.ned_to_ecef() * euler_zyx_matrix(heading, pitch, roll),
        }
    }

    /// Heading in [0, 360), pitch, roll in the NED axes of `frame`.
    pub fn to_local_euler(&self, frame: &LocalFrame) -> Result<Attitude> {
        let local = frame.ned_to_ecef().transpose() * self.body_to_ecef;
        let (yaw, pitch, roll) = euler_zyx_angles(&local)?;
        Ok(Attitude {
            heading: wrap_360(yaw),
            pitch,
            roll,
        })
    }
}

/// Aircraft attitude. Heading is true, in degrees [0, 360); pitch nose-up
/// positive in [-90, 90]; roll right-wing-down positive in (-180, 180].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Attitude {
    pub heading: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Attitude {
    pub fn new(heading: f64, pitch: f64, roll: f64) -> Result<Self> {
        if !(heading.is_finite() && pitch.is_finite() && roll.is_finite()) {
            return Err(Error::invalid("attitude angles must be finite"));
        }
        if !(-90.0..=90.0).contains(&pitch) {
            return Err(Error::invalid(format!("pitch {pitch} outside [-90, 90]")));
        }
        Ok(Self {
            heading: wrap_360(heading),
            pitch,
            roll: wrap_180(roll),
        })
    }
}

/// Runway end as stored in a runway database. Corner order is
/// threshold-left, threshold-right, far-right, far-left as seen by a pilot
/// on approach to this end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunwayGeometry {
    pub airport_icao: String,
    pub runway_id: String,
    pub corners: [GeodeticPoint; 4],
    pub has_piano: bool,
}

impl RunwayGeometry {
    pub fn new(
        airport_icao: impl Into<String>,
        runway_id: impl Into<String>,
        corners: [GeodeticPoint; 4],
        has_piano: bool,
    ) -> Result<Self> {
        let rw = Self {
            airport_icao: airport_icao.into(),
            runway_id: runway_id.into(),
            corners,
            has_piano,
        };
        rw.validate()?;
        Ok(rw)
    }

    /// Rectangle built from the threshold center, true heading, length and width.
    /// All corners share the threshold altitude.
    pub fn from_centerline(
        airport_icao: impl Into<String>,
        runway_id: impl Into<String>,
        threshold_center: GeodeticPoint,
        heading: f64,
        length: f64,
        width: f64,
        has_piano: bool,
    ) -> Result<Self> {
        let frame = LocalFrame::at(threshold_center);
        let (s, c) = heading.to_radians().sin_cos();
        let along = Vector3::new(s, c, 0.0);
        let right = Vector3::new(c, -s, 0.0);
        let half = 0.5 * width;
        let offsets = [
            -half * right,
            half * right,
            length * along + half * right,
            length * along - half * right,
        ];
        let mut corners = [threshold_center; 4];
        for (corner, off) in corners.iter_mut().zip(offsets.iter()) {
            let mut p = frame.to_geodetic(off)?;
            p.altitude = threshold_center.altitude;
            *corner = p;
        }
        Self::new(airport_icao, runway_id, corners, has_piano)
    }

    /// Same runway seen from the opposite threshold.
    pub fn reciprocal(&self, runway_id: impl Into<String>) -> Self {
        let c = &self.corners;
        Self {
            airport_icao: self.airport_icao.clone(),
            runway_id: runway_id.into(),
            corners: [c[2], c[3], c[0], c[1]],
            has_piano: self.has_piano,
        }
    }

    pub fn threshold_center(&self) -> GeodeticPoint {
        midpoint(&self.corners[0], &self.corners[1])
    }

    pub fn validate(&self) -> Result<()> {
        let name = format!("{}/{}", self.airport_icao, self.runway_id);
        let frame = LocalFrame::at(self.threshold_center());
        let pts: Vec<(f64, f64)> = self
            .corners
            .iter()
            .map(|c| {
                let e = frame.to_enu(c);
                (e.x, e.y)
            })
            .collect();
        let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
        let width = dist(pts[0], pts[1]);
        if !(width > 0.0) {
            return Err(Error::validation(format!("{name}: threshold edge has zero length")));
        }
        let far_mid = ((pts[2].0 + pts[3].0) / 2.0, (pts[2].1 + pts[3].1) / 2.0);
        let length = dist((0.0, 0.0), far_mid);
        if !(length > width) {
            return Err(Error::validation(format!(
                "{name}: centerline length {length:.2} m does not exceed width {width:.2} m"
            )));
        }
        if segments_cross(pts[0], pts[1], pts[2], pts[3]) || segments_cross(pts[1], pts[2], pts[3], pts[0]) {
            return Err(Error::validation(format!("{name}: corner quadrilateral self-intersects")));
        }
        Ok(())
    }
}

fn midpoint(a: &GeodeticPoint, b: &GeodeticPoint) -> GeodeticPoint {
    let m = (a.to_ecef().as_vector() + b.to_ecef().as_vector()) * 0.5;
    // the chord midpoint sits a hair below the surface; keep the mean altitude
    let mut p = ecef_to_geodetic(&EcefVector::from_vector(&m)).expect("midpoint of surface points");
    p.altitude = 0.5 * (a.altitude + b.altitude);
    p
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Runway-anchored frame. Origin at the LTP, ENU tangent plane at the LTP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunwayFrame {
    pub ltp: GeodeticPoint,
    pub vrp: GeodeticPoint,
    /// Degrees [0, 360).
    pub true_heading: f64,
    pub local: LocalFrame,
    /// Unit along-track axis in ENU, toward the far end.
    pub along: Vector3<f64>,
    /// Unit cross-track axis in ENU, to the right when facing `along`.
    pub cross: Vector3<f64>,
    /// Local up in ENU.
    pub up: Vector3<f64>,
}

impl RunwayFrame {
    pub fn enu_basis(&self) -> &Matrix3<f64> {
        &self.local.ecef_to_enu
    }

    /// Columns are the along, cross and up axes in ENU.
    pub fn runway_axes(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.along, self.cross, self.up])
    }

    /// (along-track, cross-track, height) of a point relative to the LTP.
    pub fn runway_coordinates(&self, p: &GeodeticPoint) -> Vector3<f64> {
        let enu = self.local.to_enu(p);
        Vector3::new(enu.dot(&self.along), enu.dot(&self.cross), enu.dot(&self.up))
    }

    /// Inverse of [`RunwayFrame::runway_coordinates`].
    pub fn point_at(&self, along: f64, cross: f64, height: f64) -> Result<GeodeticPoint> {
        let enu = along * self.along + cross * self.cross + height * self.up;
        self.local.to_geodetic(&enu)
    }

    /// Rotation from the runway-aligned level frame (x along, y right, z down) to ECEF.
    fn level_to_ecef(&self) -> Matrix3<f64> {
        let level_to_enu = Matrix3::from_columns(&[self.along, self.cross, -self.up]);
        self.local.ecef_to_enu.transpose() * level_to_enu
    }
}

pub fn build_runway_frame(rw: &RunwayGeometry) -> Result<RunwayFrame> {
    let ltp = rw.threshold_center();
    let local = LocalFrame::at(ltp);
    let far = local.to_enu(&rw.corners[2]) + local.to_enu(&rw.corners[3]);
    let horizontal = Vector3::new(far.x, far.y, 0.0) * 0.5;
    let len = horizontal.norm();
    if !(len > 1e-6) {
        return Err(Error::Degenerate(format!(
            "{}/{}: runway has zero length",
            rw.airport_icao, rw.runway_id
        )));
    }
    let along = horizontal / len;
    let up = Vector3::new(0.0, 0.0, 1.0);
    let cross = along.cross(&up);
    let true_heading = wrap_360(along.x.atan2(along.y).to_degrees());
    let mut vrp = local.to_geodetic(&(VRP_OFFSET_M * along))?;
    vrp.altitude = ltp.altitude;
    Ok(RunwayFrame {
        ltp,
        vrp,
        true_heading,
        local,
        along,
        cross,
        up,
    })
}

/// Approach parameters of a pose relative to a runway. `attitude` is expressed
/// in the tangent frame at the runway's LTP.
pub fn pose_parameters(
    position: &GeodeticPoint,
    attitude: &Attitude,
    frame: &RunwayFrame,
) -> Result<PoseParameters> {
    let (along_track, lateral, vertical) = path_geometry(position, frame)?;
    Ok(PoseParameters {
        along_track,
        lateral_path_angle: lateral,
        vertical_path_angle: vertical,
        relative_yaw: wrap_180(attitude.heading - frame.true_heading),
        pitch: attitude.pitch,
        roll: attitude.roll,
    })
}

/// Like [`pose_parameters`] but for a world orientation, re-expressed in the runway frame.
pub fn pose_parameters_for_orientation(
    position: &GeodeticPoint,
    orientation: &Orientation,
    frame: &RunwayFrame,
) -> Result<PoseParameters> {
    let (along_track, lateral, vertical) = path_geometry(position, frame)?;
    let (relative_yaw, pitch, roll) = extract_attitude(orientation, frame)?;
    Ok(PoseParameters {
        along_track,
        lateral_path_angle: lateral,
        vertical_path_angle: vertical,
        relative_yaw,
        pitch,
        roll,
    })
}

fn path_geometry(position: &GeodeticPoint, frame: &RunwayFrame) -> Result<(f64, f64, f64)> {
    let rc = frame.runway_coordinates(position);
    let (d_along, d_cross, h) = (rc.x, rc.y, rc.z);
    let to_vrp = (d_along - VRP_OFFSET_M).hypot(d_cross);
    if to_vrp < VRP_EXCLUSION_RADIUS_M {
        return Err(Error::UndefinedAngle { distance: to_vrp });
    }
    let lateral = if d_along.hypot(d_cross) < LTP_COINCIDENCE_M {
        0.0
    } else {
        d_cross.atan2(-d_along).to_degrees()
    };
    // the VRP shares the LTP altitude, so its height in the frame is zero
    let vertical = -h.atan2(VRP_OFFSET_M - d_along).to_degrees();
    Ok((d_along, lateral, vertical))
}

/// World orientation for a yaw relative to the runway heading, then pitch and
/// roll, applied intrinsically (Z-Y'-X'') from the runway-aligned level frame.
pub fn compose_attitude(relative_yaw: f64, pitch: f64, roll: f64, frame: &RunwayFrame) -> Orientation {
    Orientation {
        body_to_ecef: frame.level_to_ecef() * euler_zyx_matrix(relative_yaw, pitch, roll),
    }
}

/// Inverse of [`compose_attitude`]: (relative_yaw, pitch, roll) in degrees.
pub fn extract_attitude(orientation: &Orientation, frame: &RunwayFrame) -> Result<(f64, f64, f64)> {
    let level = frame.level_to_ecef().transpose() * orientation.body_to_ecef;
    euler_zyx_angles(&level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gp(lat: f64, lon: f64, alt: f64) -> GeodeticPoint {
        GeodeticPoint::new(lat, lon, alt).unwrap()
    }

    #[test]
    fn equator_prime_meridian() {
        let v = geodetic_to_ecef(&gp(0.0, 0.0, 0.0));
        assert_abs_diff_eq!(v.x, 6_378_137.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v.z, 0.0, epsilon = 1e-9);
        let p = ecef_to_geodetic(&v).unwrap();
        assert_abs_diff_eq!(p.latitude, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.longitude, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.altitude, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn north_pole() {
        let v = geodetic_to_ecef(&gp(90.0, 0.0, 0.0));
        assert_abs_diff_eq!(v.x, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(v.z, 6_356_752.314_2, epsilon = 1e-4);
        let p = ecef_to_geodetic(&EcefVector::new(0.0, 0.0, 6_356_752.314_2)).unwrap();
        assert_abs_diff_eq!(p.latitude, 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.altitude, 0.0, epsilon = 1e-4);
    }

    #[test]
    fn toulouse_round_trip() {
        let p = gp(43.6604, 1.3271, 286.18);
        let q = ecef_to_geodetic(&geodetic_to_ecef(&p)).unwrap();
        assert_abs_diff_eq!(p.latitude, q.latitude, epsilon = 1e-9);
        assert_abs_diff_eq!(p.longitude, q.longitude, epsilon = 1e-9);
        assert_abs_diff_eq!(p.altitude, q.altitude, epsilon = 1e-6);
    }

    #[test]
    fn earth_center_is_degenerate() {
        assert!(matches!(
            ecef_to_geodetic(&EcefVector::new(0.0, 0.0, 0.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn longitude_is_normalized() {
        assert_eq!(gp(0.0, 190.0, 0.0).longitude, -170.0);
        assert_eq!(gp(0.0, -180.0, 0.0).longitude, 180.0);
        assert!(GeodeticPoint::new(91.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn east_west_runway() {
        let rw = RunwayGeometry::from_centerline("TEST", "09", gp(0.0, 0.0, 0.0), 90.0, 3000.0, 45.0, true).unwrap();
        let f = build_runway_frame(&rw).unwrap();
        assert_abs_diff_eq!(f.true_heading, 90.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.vrp.latitude, 0.0, epsilon = 1e-9);
        // 305 m of longitude on the equator
        let expected_lon = (305.0 / WGS84_A).to_degrees();
        assert_abs_diff_eq!(f.vrp.longitude, expected_lon, epsilon = 1e-9);
        let horizontal = f.local.to_enu(&f.vrp);
        assert_abs_diff_eq!(horizontal.x.hypot(horizontal.y), 305.0, epsilon = 0.01);
    }

    #[test]
    fn reciprocal_heading_differs_by_180() {
        let rw = RunwayGeometry::from_centerline("X", "05", gp(5.0, 20.0, 10.0), 50.0, 3000.0, 45.0, true).unwrap();
        let f = build_runway_frame(&rw).unwrap();
        let g = build_runway_frame(&rw.reciprocal("23")).unwrap();
        assert_abs_diff_eq!(wrap_180(g.true_heading - f.true_heading).abs(), 180.0, epsilon = 0.01);
    }

    #[test]
    fn reciprocal_heading_includes_meridian_convergence() {
        // each threshold uses its own north; the difference is dlon * sin(lat)
        let rw = RunwayGeometry::from_centerline("LFBO", "14R", gp(43.64, 1.35, 150.0), 143.0, 3500.0, 45.0, true).unwrap();
        let f = build_runway_frame(&rw).unwrap();
        let g = build_runway_frame(&rw.reciprocal("32L")).unwrap();
        let dlon = g.ltp.longitude - f.ltp.longitude;
        let mean_lat = 0.5 * (f.ltp.latitude + g.ltp.latitude);
        let convergence = dlon * mean_lat.to_radians().sin();
        let diff = wrap_360(g.true_heading - f.true_heading);
        assert_abs_diff_eq!(diff, 180.0 + convergence, epsilon = 1e-3);
    }

    #[test]
    fn frame_axes_orthonormal() {
        let rw = RunwayGeometry::from_centerline("X", "1", gp(-33.9, 151.2, 6.0), 347.3, 3962.0, 45.0, true).unwrap();
        let f = build_runway_frame(&rw).unwrap();
        let r = f.runway_axes();
        let e = r.transpose() * r - Matrix3::identity();
        assert!(e.iter().all(|x| x.abs() < 1e-12));
        let b = f.enu_basis();
        let e = b.transpose() * b - Matrix3::identity();
        assert!(e.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn degenerate_runways_rejected() {
        let p = gp(10.0, 10.0, 0.0);
        assert!(RunwayGeometry::new("X", "1", [p; 4], true).is_err());
        // width larger than length
        assert!(RunwayGeometry::from_centerline("X", "1", p, 0.0, 40.0, 45.0, true).is_err());
        // bow-tie
        let rw = RunwayGeometry::from_centerline("X", "1", p, 0.0, 3000.0, 45.0, true).unwrap();
        let c = rw.corners;
        assert!(RunwayGeometry::new("X", "1", [c[0], c[1], c[3], c[2]], true).is_err());
    }

    #[test]
    fn pose_at_ltp_and_yaw_offset() {
        let rw = RunwayGeometry::from_centerline("X", "1", gp(45.0, 5.0, 200.0), 30.0, 3000.0, 45.0, true).unwrap();
        let f = build_runway_frame(&rw).unwrap();
        let att = Attitude::new(f.true_heading + 20.0, 0.0, 0.0).unwrap();
        let p = pose_parameters(&f.ltp, &att, &f).unwrap();
        assert_abs_diff_eq!(p.along_track, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(p.lateral_path_angle, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.relative_yaw, 20.0, epsilon = 1e-9);
    }

    #[test]
    fn near_vrp_is_undefined() {
        let rw = RunwayGeometry::from_centerline("X", "1", gp(45.0, 5.0, 200.0), 30.0, 3000.0, 45.0, true).unwrap();
        let f = build_runway_frame(&rw).unwrap();
        let above_vrp = f.point_at(305.3, 0.2, 50.0).unwrap();
        let att = Attitude::new(0.0, 0.0, 0.0).unwrap();
        assert!(matches!(pose_parameters(&above_vrp, &att, &f), Err(Error::UndefinedAngle { .. })));
    }

    #[test]
    fn lateral_antisymmetry() {
        let rw = RunwayGeometry::from_centerline("X", "1", gp(45.0, 5.0, 200.0), 30.0, 3000.0, 45.0, true).unwrap();
        let f = build_runway_frame(&rw).unwrap();
        let att = Attitude::new(0.0, 0.0, 0.0).unwrap();
        let right = pose_parameters(&f.point_at(-2000.0, 80.0, 100.0).unwrap(), &att, &f).unwrap();
        let left = pose_parameters(&f.point_at(-2000.0, -80.0, 100.0).unwrap(), &att, &f).unwrap();
        assert!(right.lateral_path_angle > 0.0);
        assert_abs_diff_eq!(right.lateral_path_angle, -left.lateral_path_angle, epsilon = 1e-9);
    }

    #[test]
    fn identity_attitude() {
        let rw = RunwayGeometry::from_centerline("X", "1", gp(45.0, 5.0, 200.0), 123.0, 3000.0, 45.0, true).unwrap();
        let f = build_runway_frame(&rw).unwrap();
        let (y, p, r) = extract_attitude(&compose_attitude(0.0, 0.0, 0.0, &f), &f).unwrap();
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-9);
        // nose points along the runway, level
        let nose = f.local.ecef_to_enu * compose_attitude(0.0, 0.0, 0.0, &f).body_to_ecef * Vector3::x();
        assert_abs_diff_eq!((nose - f.along).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gimbal_lock_rejected() {
        let m = euler_zyx_matrix(10.0, 89.95, 3.0);
        assert!(matches!(euler_zyx_angles(&m), Err(Error::GimbalLock { .. })));
    }

    #[test]
    fn roll_then_pitch_couples_into_yaw() {
        // independent construction: body-fixed successive rotations multiply on the right
        let body_roll = euler_zyx_matrix(0.0, 0.0, 30.0);
        let body_pitch = euler_zyx_matrix(0.0, -5.0, 0.0);
        let (yaw, pitch, roll) = euler_zyx_angles(&(body_roll * body_pitch)).unwrap();
        assert!(yaw.abs() > 1.0, "yaw {yaw}");
        assert!((pitch + 5.0).abs() > 0.1 || (roll - 30.0).abs() > 0.1);
    }

    #[test]
    fn wrap_helpers() {
        assert_eq!(wrap_180(180.0), 180.0);
        assert_eq!(wrap_180(-180.0), 180.0);
        assert_eq!(wrap_180(190.0), -170.0);
        assert_eq!(wrap_360(-10.0), 350.0);
        assert_eq!(wrap_360(360.0), 0.0);
    }
}
