#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use runway_odd::camera::PixelBox;
use runway_odd::geodesy::{GeodeticPoint, RunwayGeometry};
use runway_odd::labeler::OddFlag;
use runway_odd::metrics::{Detection, GroundTruthSet};
use runway_odd::odd::PoseParameters;

/// Default approach segments: (along-track lo, hi, yaw half-width, roll half-width).
pub const SEGMENTS: [(f64, f64, f64, f64); 3] = [
    (-6000.0, -4500.0, 24.0, 30.0),
    (-4500.0, -2500.0, 24.0, 15.0),
    (-2500.0, -280.0, 18.5, 10.0),
];
pub const LATERAL: (f64, f64) = (-3.0, 3.0);
pub const VERTICAL: (f64, f64) = (-5.2, -1.8);
pub const PITCH: (f64, f64) = (-15.0, 5.0);

pub fn doubled((lo, hi): (f64, f64)) -> (f64, f64) {
    let mid = 0.5 * (lo + hi);
    let half = hi - lo;
    (mid - half, mid + half)
}

pub fn within((lo, hi): (f64, f64), x: f64) -> bool {
    lo <= x && x <= hi
}

pub fn pose(along: f64, lat: f64, vert: f64, yaw: f64, pitch: f64, roll: f64) -> PoseParameters {
    PoseParameters {
        along_track: along,
        lateral_path_angle: lat,
        vertical_path_angle: vert,
        relative_yaw: yaw,
        pitch,
        roll,
    }
}

pub fn random_runway(rng: &mut ChaCha8Rng, icao: &str, id: &str) -> RunwayGeometry {
    let ltp = GeodeticPoint::new(
        rng.random_range(-60.0..60.0),
        rng.random_range(-180.0..180.0),
        rng.random_range(-50.0..2500.0),
    )
    .unwrap();
    RunwayGeometry::from_centerline(
        icao,
        id,
        ltp,
        rng.random_range(0.0..360.0),
        rng.random_range(1500.0..4000.0),
        rng.random_range(25.0..60.0),
        true,
    )
    .unwrap()
}

/// Uniform draw inside one nominal approach segment.
pub fn random_in_odd(rng: &mut ChaCha8Rng) -> PoseParameters {
    let (lo, hi, yaw, roll) = SEGMENTS[rng.random_range(0..3)];
    pose(
        rng.random_range(lo..=hi),
        rng.random_range(LATERAL.0..=LATERAL.1),
        rng.random_range(VERTICAL.0..=VERTICAL.1),
        rng.random_range(-yaw..=yaw),
        rng.random_range(PITCH.0..=PITCH.1),
        rng.random_range(-roll..=roll),
    )
}

pub fn bx(cx: f64, cy: f64, w: f64, h: f64) -> PixelBox {
    PixelBox::new(cx, cy, w, h).unwrap()
}

/// Box near `b`, sometimes good enough for IoU 0.5, sometimes not.
pub fn jitter(rng: &mut ChaCha8Rng, b: &PixelBox, amount: f64) -> PixelBox {
    let dx = rng.random_range(-amount..=amount) * b.w;
    let dy = rng.random_range(-amount..=amount) * b.h;
    let sw = 1.0 + rng.random_range(-amount..=amount);
    let sh = 1.0 + rng.random_range(-amount..=amount);
    bx(b.cx + dx, b.cy + dy, b.w * sw, b.h * sh)
}

pub struct MetricInstance {
    pub gt: GroundTruthSet,
    pub dets: Vec<Detection>,
    pub n_in: usize,
    pub n_ext: usize,
}

/// Small random detection problem with at least one In-ODD box.
///
/// With `disjoint` every box sits in its own 100 px grid cell so no two
/// ground-truth boxes overlap. Scores are drawn on a coarse grid so that
/// ties happen.
pub fn random_instance(rng: &mut ChaCha8Rng, max_in: usize, max_ext: usize, disjoint: bool) -> MetricInstance {
    let n_images = rng.random_range(1..=3);
    let mut gt = GroundTruthSet::new();
    let mut dets = Vec::new();
    let mut n_in = 0;
    let mut n_ext = 0;
    let mut cell = 0usize;
    for im in 0..n_images {
        let id = format!("img{im}");
        gt.add_image(id.clone());
        let k_in = rng.random_range(0..=max_in);
        let k_ext = rng.random_range(0..=max_ext.saturating_sub(n_ext).min(4));
        let mut boxes = Vec::new();
        for k in 0..(k_in + k_ext) {
            let flag = if k < k_in { OddFlag::In } else { OddFlag::Extended };
            let b = if disjoint {
                cell += 1;
                bx(100.0 * cell as f64 + 50.0, 50.0, rng.random_range(20.0..60.0), rng.random_range(20.0..60.0))
            } else {
                bx(
                    rng.random_range(30.0..200.0),
                    rng.random_range(30.0..200.0),
                    rng.random_range(15.0..80.0),
                    rng.random_range(15.0..80.0),
                )
            };
            boxes.push((b, flag));
        }
        // shuffle flags into the insertion order
        for i in (1..boxes.len()).rev() {
            let j = rng.random_range(0..=i);
            boxes.swap(i, j);
        }
        for (b, flag) in &boxes {
            gt.push(id.clone(), *b, *flag);
            match flag {
                OddFlag::In => n_in += 1,
                OddFlag::Extended => n_ext += 1,
            }
            let copies = rng.random_range(0..=2);
            for _ in 0..copies {
                let d = jitter(rng, b, 0.25);
                dets.push(Detection::new(id.clone(), d, score(rng)).unwrap());
            }
        }
        for _ in 0..rng.random_range(0..=2) {
            let d = bx(rng.random_range(0.0..1000.0), rng.random_range(200.0..400.0), 30.0, 30.0);
            dets.push(Detection::new(id.clone(), d, score(rng)).unwrap());
        }
    }
    if n_in == 0 {
        let b = if disjoint { bx(50.0, 250.0, 40.0, 40.0) } else { bx(100.0, 100.0, 40.0, 40.0) };
        gt.push("img0", b, OddFlag::In);
        n_in = 1;
        if rng.random_bool(0.7) {
            dets.push(Detection::new("img0", jitter(rng, &b, 0.2), score(rng)).unwrap());
        }
    }
    MetricInstance { gt, dets, n_in, n_ext }
}

pub fn score(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(1..=32) as f64 / 32.0
}
