//! Runway frame, path angles and the attitude round trip for one pose.

use runway_odd::geodesy::{
    build_runway_frame, compose_attitude, ecef_to_geodetic, extract_attitude, geodetic_to_ecef, GeodeticPoint,
    RunwayGeometry,
};
use runway_odd::scenario::pose_from_parameters;
use runway_odd::odd::PoseParameters;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ltp = GeodeticPoint::new(43.6291, 1.3638, 151.0)?;
    let ecef = geodetic_to_ecef(&ltp);
    println!("LTP ECEF: ({:.3}, {:.3}, {:.3})", ecef.x, ecef.y, ecef.z);
    println!("back to geodetic: {:?}", ecef_to_geodetic(&ecef)?);

    let rw = RunwayGeometry::from_centerline("LFBO", "14R", ltp, 143.0, 3500.0, 45.0, true)?;
    let frame = build_runway_frame(&rw)?;
    println!("true heading {:.4} deg, VRP {:?}", frame.true_heading, frame.vrp);

    // 3 km out on a 3 deg glide path with a small crab
    let p = PoseParameters {
        along_track: -3000.0,
        lateral_path_angle: 0.5,
        vertical_path_angle: -3.0,
        relative_yaw: 4.0,
        pitch: -2.5,
        roll: 1.0,
    };
    let (pos, _) = pose_from_parameters(&p, &frame)?;
    let body = compose_attitude(p.relative_yaw, p.pitch, p.roll, &frame);
    println!("aircraft at {pos:?}");
    println!("attitude back in the runway frame: {:?}", extract_attitude(&body, &frame)?);
    Ok(())
}
