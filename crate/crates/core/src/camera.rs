//! Distortion-free pinhole camera: projection of geodetic points, runway
//! bounding boxes, ground back-projection and the nadir calibration pose.
//!
//! Camera axes follow the usual vision convention: x right, y down, z along
//! the optical axis. The camera looks along the aircraft's body x axis, with
//! image right on body y and image down on body z.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{GeodeticPoint, LocalFrame, Orientation};

const DEPTH_EPS_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    /// Horizontal field of view, degrees.
    pub fov_x: f64,
    /// Vertical field of view, degrees.
    pub fov_y: f64,
}

impl CameraModel {
    pub fn new(width: u32, height: u32, fov_x: f64, fov_y: f64) -> Result<Self> {
        let cam = Self {
            width,
            height,
            fov_x,
            fov_y,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 1 || self.height < 1 {
            return Err(Error::invalid("image dimensions must be at least 1 pixel"));
        }
        for fov in [self.fov_x, self.fov_y] {
            if !(fov > 0.0 && fov < 180.0) {
                return Err(Error::invalid(format!("field of view {fov} outside (0, 180)")));
            }
        }
        Ok(())
    }

    pub fn fx(&self) -> f64 {
        0.5 * self.width as f64 / (0.5 * self.fov_x).to_radians().tan()
    }

    pub fn fy(&self) -> f64 {
        0.5 * self.height as f64 / (0.5 * self.fov_y).to_radians().tan()
    }

    pub fn cx(&self) -> f64 {
        0.5 * self.width as f64
    }

    pub fn cy(&self) -> f64 {
        0.5 * self.height as f64
    }
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 1024,
            height: 1024,
            fov_x: 60.0,
            fov_y: 60.0,
        }
    }
}

// rows are camera axes expressed in body axes
fn body_to_camera() -> Matrix3<f64> {
    Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub position: GeodeticPoint,
    position_ecef: Vector3<f64>,
    /// World (ECEF) to camera rotation.
    pub orientation: Matrix3<f64>,
}

impl CameraPose {
    /// Camera rigidly aligned with the aircraft body.
    pub fn from_body(position: GeodeticPoint, body: &Orientation) -> Self {
        Self {
            position,
            position_ecef: position.to_ecef().as_vector(),
            orientation: body_to_camera() * body.body_to_ecef.transpose(),
        }
    }

    /// Heading (true), tilt (0 = looking straight down, 90 = level) and roll
    /// about the optical axis, all in the local tangent frame at `position`.
    pub fn from_heading_tilt_roll(position: GeodeticPoint, heading: f64, tilt: f64, roll: f64) -> Self {
        let body = Orientation::from_local_euler(&LocalFrame::at(position), heading, tilt - 90.0, roll);
        Self::from_body(position, &body)
    }

    pub fn world_to_camera(&self, p: &GeodeticPoint) -> Vector3<f64> {
        self.orientation * (p.to_ecef().as_vector() - self.position_ecef)
    }

    /// Optical axis in ECEF.
    pub fn optical_axis(&self) -> Vector3<f64> {
        self.orientation.transpose() * Vector3::z()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub pixel: PixelPoint,
    pub in_front: bool,
}

/// Axis-aligned box in center format (pixels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct PixelBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl PixelBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        if !(cx.is_finite() && cy.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::invalid("box coordinates must be finite"));
        }
        if !(w > 0.0 && h > 0.0) {
            return Err(Error::invalid(format!("box size {w}x{h} must be positive")));
        }
        Ok(Self { cx, cy, w, h })
    }

    pub fn from_corners(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        Self::new(0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1)
    }

    /// (x1, y1, x2, y2)
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - 0.5 * self.w,
            self.cy - 0.5 * self.h,
            self.cx + 0.5 * self.w,
            self.cy + 0.5 * self.h,
        )
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

impl TryFrom<[f64; 4]> for PixelBox {
    type Error = Error;
    fn try_from(b: [f64; 4]) -> Result<Self> {
        PixelBox::new(b[0], b[1], b[2], b[3])
    }
}

impl From<PixelBox> for [f64; 4] {
    fn from(b: PixelBox) -> Self {
        [b.cx, b.cy, b.w, b.h]
    }
}

pub fn project(p: &GeodeticPoint, cam: &CameraModel, pose: &CameraPose) -> Result<Projection> {
    let c = pose.world_to_camera(p);
    if c.z.abs() < DEPTH_EPS_M {
        return Err(Error::ProjectionSingular { depth: c.z });
    }
    Ok(Projection {
        pixel: PixelPoint {
            u: cam.cx() + cam.fx() * c.x / c.z,
            v: cam.cy() + cam.fy() * c.y / c.z,
        },
        in_front: c.z > 0.0,
    })
}

/// Intersect the pixel's viewing ray with the horizontal plane at
/// `ground_altitude` in the tangent frame under the camera.
pub fn backproject_to_ground(
    px: &PixelPoint,
    cam: &CameraModel,
    pose: &CameraPose,
    ground_altitude: f64,
) -> Result<GeodeticPoint> {
    let ray_cam = Vector3::new((px.u - cam.cx()) / cam.fx(), (px.v - cam.cy()) / cam.fy(), 1.0);
    let ground_origin = GeodeticPoint {
        altitude: ground_altitude,
        ..pose.position
    };
    let local = LocalFrame::at(ground_origin);
    let ray = local.ecef_to_enu * (pose.orientation.transpose() * ray_cam);
    let height = pose.position.altitude - ground_altitude;
    if ray.z.abs() < 1e-12 {
        return Err(Error::NoIntersection);
    }
    let t = -height / ray.z;
    if !(t > 0.0) {
        return Err(Error::NoIntersection);
    }
    let hit = Vector3::new(0.0, 0.0, height) + t * ray;
    let mut p = local.to_geodetic(&Vector3::new(hit.x, hit.y, 0.0))?;
    p.altitude = ground_altitude;
    Ok(p)
}

/// Camera `altitude_agl` above `threshold_center`, looking straight down with
/// image up along `runway_heading`.
pub fn nadir_calibration_pose(
    threshold_center: &GeodeticPoint,
    runway_heading: f64,
    altitude_agl: f64,
) -> Result<CameraPose> {
    if !(altitude_agl > 0.0) {
        return Err(Error::invalid(format!("altitude_agl {altitude_agl} must be positive")));
    }
    let position = GeodeticPoint {
        altitude: threshold_center.altitude + altitude_agl,
        ..*threshold_center
    };
    Ok(CameraPose::from_heading_tilt_roll(position, runway_heading, 0.0, 0.0))
}

fn polygon_area(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let (x1, y1) = poly[i];
        let (x2, y2) = poly[(i + 1) % n];
        s += x1 * y2 - x2 * y1;
    }
    0.5 * s.abs()
}

/// Sutherland-Hodgman clipping against one half-plane `keep(p)`.
fn clip_edge(
    poly: &[(f64, f64)],
    inside: impl Fn((f64, f64)) -> bool,
    cut: impl Fn((f64, f64), (f64, f64)) -> (f64, f64),
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        match (inside(prev), inside(cur)) {
            (true, true) => out.push(cur),
            (true, false) => out.push(cut(prev, cur)),
            (false, true) => {
                out.push(cut(prev, cur));
                out.push(cur);
            }
            (false, false) => {}
        }
    }
    out
}

fn clip_to_rect(poly: &[(f64, f64)], w: f64, h: f64) -> Vec<(f64, f64)> {
    let at_x = |x: f64| {
        move |a: (f64, f64), b: (f64, f64)| {
            let t = (x - a.0) / (b.0 - a.0);
            (x, a.1 + t * (b.1 - a.1))
        }
    };
    let at_y = |y: f64| {
        move |a: (f64, f64), b: (f64, f64)| {
            let t = (y - a.1) / (b.1 - a.1);
            (a.0 + t * (b.0 - a.0), y)
        }
    };
    let mut p = poly.to_vec();
    p = clip_edge(&p, |q| q.0 >= 0.0, at_x(0.0));
    if p.is_empty() {
        return p;
    }
    p = clip_edge(&p, |q| q.0 <= w, at_x(w));
    if p.is_empty() {
        return p;
    }
    p = clip_edge(&p, |q| q.1 >= 0.0, at_y(0.0));
    if p.is_empty() {
        return p;
    }
    clip_edge(&p, |q| q.1 <= h, at_y(h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedBox {
    pub bbox: PixelBox,
    /// Clipped quad area over full quad area.
    pub visible_fraction: f64,
}

/// Bounding box of a projected runway quad clipped to the image. Returns
/// `None` when any corner is behind the camera or nothing is visible.
pub fn quad_to_bbox(corners: &[Projection; 4], cam: &CameraModel) -> Option<ClippedBox> {
    if corners.iter().any(|c| !c.in_front) {
        return None;
    }
    let quad: Vec<(f64, f64)> = corners.iter().map(|c| (c.pixel.u, c.pixel.v)).collect();
    let full = polygon_area(&quad);
    if !(full > 0.0) {
        return None;
    }
    let (w, h) = (cam.width as f64, cam.height as f64);
    let clipped = clip_to_rect(&quad, w, h);
    if clipped.len() < 3 {
        return None;
    }
    let area = polygon_area(&clipped);
    if !(area > 0.0) {
        return None;
    }
    let (mut x1, mut y1, mut x2, mut y2) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &clipped {
        x1 = x1.min(x);
        y1 = y1.min(y);
        x2 = x2.max(x);
        y2 = y2.max(y);
    }
    let (x1, y1, x2, y2) = (x1.clamp(0.0, w), y1.clamp(0.0, h), x2.clamp(0.0, w), y2.clamp(0.0, h));
    let bbox = PixelBox::from_corners(x1, y1, x2, y2).ok()?;
    Some(ClippedBox {
        bbox,
        visible_fraction: (area / full).clamp(0.0, 1.0),
    })
}
