//! Correct a runway database that is a few meters off using synthetic nadir clicks.

use nalgebra::Vector3;
use runway_odd::calibration::{calibrate, observations_to_csv, synthesize_observations, DEFAULT_CALIBRATION_AGL_M};
use runway_odd::camera::CameraModel;
use runway_odd::geodesy::{LocalFrame, RunwayGeometry};
use runway_odd::scenario::{parse_runway_db, RunwayDatabase};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth_db = parse_runway_db(include_str!("../tests/data/lfbo_runways.json"))?;
    let cam = CameraModel::default();
    let mut stale_db = RunwayDatabase::new();
    let mut observations = Vec::new();
    for truth in truth_db.iter() {
        let f = LocalFrame::at(truth.threshold_center());
        let corners = truth.corners.map(|c| {
            let mut p = f.to_geodetic(&(f.to_enu(&c) + Vector3::new(6.0, -3.5, 0.0))).unwrap();
            p.altitude = c.altitude;
            p
        });
        let stale = RunwayGeometry::new(truth.airport_icao.clone(), truth.runway_id.clone(), corners, true)?;
        observations.extend(synthesize_observations(truth, &stale, &cam, DEFAULT_CALIBRATION_AGL_M)?);
        stale_db.insert(stale, "survey-2010");
    }
    print!("{}", observations_to_csv(&observations));
    let fixed = calibrate(&stale_db, &observations, &cam, DEFAULT_CALIBRATION_AGL_M)?;
    for rw in fixed.iter() {
        let truth = truth_db.get(&rw.airport_icao, &rw.runway_id).unwrap();
        let worst = (0..4)
            .map(|k| LocalFrame::at(truth.corners[k]).to_enu(&rw.corners[k]).norm())
            .fold(0.0, f64::max);
        println!("{}/{}: worst corner error {:.2e} m", rw.airport_icao, rw.runway_id, worst);
    }
    Ok(())
}
