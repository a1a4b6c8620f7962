//! Sample ten poses per approach segment for both ends of LFBO 14R/32L.

use runway_odd::camera::CameraModel;
use runway_odd::odd::OddConfig;
use runway_odd::scenario::{emit_scenario, parse_runway_db, sample_scenario, SamplingSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let db = parse_runway_db(include_str!("../tests/data/lfbo_runways.json"))?;
    let runways = vec![db.get("LFBO", "14R").unwrap().clone(), db.get("LFBO", "32L").unwrap().clone()];
    let spec = SamplingSpec {
        seed: 2024,
        ..SamplingSpec::default()
    };
    let scenario = sample_scenario(&runways, &spec, &OddConfig::default(), &CameraModel::default(), "lfbo_runways.json")?;
    println!("{} poses", scenario.poses.len());
    let doc = emit_scenario(&scenario);
    for line in doc.lines().take(30) {
        println!("{line}");
    }
    Ok(())
}
