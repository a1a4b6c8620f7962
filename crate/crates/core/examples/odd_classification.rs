//! Classify a few poses against the default approach cone.

use runway_odd::odd::{classify, OddConfig, OddStatus, PoseParameters};

fn main() {
    let cfg = OddConfig::default();
    let poses = [
        ("long final, crabbing", [-5000.0, 0.0, -3.0, 20.0, -5.0, 25.0]),
        ("short final, yawed", [-1000.0, 0.0, -3.0, 20.0, -5.0, 0.0]),
        ("short final, way off", [-1000.0, 0.0, -3.0, 40.0, -5.0, 0.0]),
    ];
    for (name, v) in poses {
        let p = PoseParameters {
            along_track: v[0],
            lateral_path_angle: v[1],
            vertical_path_angle: v[2],
            relative_yaw: v[3],
            pitch: v[4],
            roll: v[5],
        };
        let c = classify(&p, &cfg);
        println!("{name}: {:?} (segment {})", c.kind, c.segment);
        for chk in c.per_parameter.iter().filter(|c| c.status != OddStatus::Nominal) {
            println!("  {} = {} outside {} (extended {})", chk.parameter, chk.value, chk.nominal, chk.extended);
        }
    }
    print!("{}", cfg.to_yaml());
}
