//! Three-row evaluation report and a crossbar matrix for a toy detector.

use runway_odd::camera::PixelBox;
use runway_odd::labeler::OddFlag;
use runway_odd::metrics::{
    build_report, crossbar, CrossbarCell, Detection, EvalConfig, GroundTruthSet, MetricFamily, MetricName,
};

fn dataset(miss_every: usize) -> (GroundTruthSet, Vec<Detection>) {
    let mut gt = GroundTruthSet::new();
    let mut dets = Vec::new();
    for i in 0..40 {
        let id = format!("img{i:02}");
        let main = PixelBox::new(512.0, 600.0, 90.0, 140.0).unwrap();
        gt.push(id.clone(), main, OddFlag::In);
        if i % miss_every != 0 {
            let nudged = PixelBox::new(515.0, 604.0, 88.0, 136.0).unwrap();
            dets.push(Detection::new(id.clone(), nudged, 0.6 + 0.01 * i as f64 % 0.4).unwrap());
        }
        if i % 4 == 0 {
            let side = PixelBox::new(250.0, 560.0, 30.0, 120.0).unwrap();
            gt.push(id.clone(), side, OddFlag::Extended);
            if i % 8 == 0 {
                dets.push(Detection::new(id.clone(), side, 0.7).unwrap());
            }
        }
    }
    (gt, dets)
}

fn main() {
    let cfg = EvalConfig::default();
    let mut cells = Vec::new();
    for (model, miss) in [("clean", 10), ("noisy", 3)] {
        for source in ["GES", "XPlane"] {
            let (gt, dets) = dataset(if source == "GES" { miss } else { miss - 1 });
            let report = build_report(&gt, &dets, &cfg).expect("non-empty ground truth");
            cells.push(CrossbarCell {
                row: model.into(),
                column: source.into(),
                report,
            });
        }
    }
    let r = &cells[0].report;
    println!("{:<18}{:>6}{:>8}{:>8}{:>8}", "row", "GT", "mAP", "mAP50", "mAP75");
    for (name, row) in [("IN_ODD", &r.in_odd), ("IN+EXTENDED", &r.in_plus_extended), ("e-mAP", &r.e_map)] {
        println!("{name:<18}{:>6}{:>8.3}{:>8.3}{:>8.3}", row.gt_count_used, row.map, row.map50, row.map75);
    }
    for fam in MetricFamily::ALL {
        println!("\n{}:", fam.name());
        print!("{}", crossbar(&cells, fam, MetricName::Map).to_csv());
    }
}
