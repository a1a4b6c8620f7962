//! Label a generated scenario and print the per-image annotations.

use runway_odd::camera::CameraModel;
use runway_odd::labeler::{label_scenario, LabelConfig};
use runway_odd::odd::OddConfig;
use runway_odd::scenario::{parse_runway_db, sample_scenario, SamplingSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let db = parse_runway_db(include_str!("../tests/data/lfbo_runways.json"))?;
    let target = db.get("LFBO", "14L").unwrap().clone();
    let spec = SamplingSpec {
        poses_per_segment: 3,
        seed: 7,
        ..SamplingSpec::default()
    };
    let cfg = OddConfig::default();
    let scenario = sample_scenario(&[target], &spec, &cfg, &CameraModel::default(), "lfbo_runways.json")?;
    let lc = LabelConfig {
        source_tag: "GES".into(),
        ..LabelConfig::default()
    };
    let manifest = label_scenario(&scenario, &db, &cfg, &lc)?;
    for img in &manifest.images {
        let labels: Vec<String> = img
            .annotations
            .iter()
            .map(|a| format!("{}:{:?} [{:.0} {:.0} {:.0} {:.0}]", a.runway, a.odd, a.bbox.cx, a.bbox.cy, a.bbox.w, a.bbox.h))
            .collect();
        println!("{}  {}", img.image_id, labels.join("  "));
    }
    println!("{} annotations, config {}", manifest.annotation_count(), &manifest.meta.odd_config_hash[..12]);
    Ok(())
}
