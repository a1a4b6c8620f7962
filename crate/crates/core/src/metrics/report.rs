use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EMapResult, EvalConfig, Evaluator, GroundTruthSet, Detection};
use crate::error::{Error, Result};

/// Written into every report so readers know which averaging convention produced the numbers.
pub const CONVENTION: &str = "single class; AP = all-point interpolated precision envelope; \
mAP = mean AP over the configured IoU thresholds (default 0.50:0.05:0.95); \
e-mAP = best subset of extended boxes chosen independently per IoU threshold, then averaged";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EMapMethod {
    /// Exhaustive when the extended pool fits under the limit, greedy otherwise.
    Auto,
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub gt_count_used: usize,
    pub map: f64,
    pub map50: f64,
    pub map75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSummary {
    pub iou: f64,
    pub value: f64,
    pub gt_count_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub convention: String,
    pub score_threshold: f64,
    pub iou_thresholds: Vec<f64>,
    /// Detections kept after the score filter.
    pub detection_count: usize,
    pub detections_total: usize,
    pub in_odd: MetricRow,
    pub in_plus_extended: MetricRow,
    /// `gt_count_used` is taken from the subset chosen at IoU 0.50.
    pub e_map: MetricRow,
    pub e_map_method: EMapMethod,
    pub e_map_per_threshold: Vec<SubsetSummary>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(doc: &str) -> Result<Self> {
        Ok(serde_json::from_str(doc)?)
    }
}

struct PerThreshold {
    tau: f64,
    in_ap: f64,
    all_ap: f64,
    e: EMapResult,
}

/// Computes the three row families: In-ODD, In+Extended and e-mAP.
pub fn build_report(gt: &GroundTruthSet, dets: &[Detection], cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let kept = cfg.filter(dets);
    let ev = Evaluator::new(gt, &kept)?;
    let n_pool = ev.pool().len();
    let method = match cfg.e_map_method {
        EMapMethod::Auto if n_pool <= cfg.exhaustive_limit => EMapMethod::Exact,
        EMapMethod::Auto => EMapMethod::Greedy,
        m => m,
    };

    let mut taus = cfg.iou_thresholds.clone();
    for named in [0.5, 0.75] {
        if !taus.contains(&named) {
            taus.push(named);
        }
    }
    let none = vec![false; n_pool];
    let all = vec![true; n_pool];
    let rows: Vec<PerThreshold> = taus
        .par_iter()
        .map(|&tau| {
            let in_ap = ev.run(tau, &none).ap.ok_or(Error::NoGroundTruth)?;
            let all_ap = ev.run(tau, &all).ap.ok_or(Error::NoGroundTruth)?;
            let e = match method {
                EMapMethod::Exact => ev.e_map_exact(tau, cfg.exhaustive_limit)?,
                _ => ev.e_map_greedy(tau)?,
            };
            Ok(PerThreshold { tau, in_ap, all_ap, e })
        })
        .collect::<Result<_>>()?;

    let find = |t: f64| rows.iter().find(|r| r.tau == t).expect("named threshold evaluated");
    let mean = |f: &dyn Fn(&PerThreshold) -> f64| {
        cfg.iou_thresholds.iter().map(|&t| f(find(t))).sum::<f64>() / cfg.iou_thresholds.len() as f64
    };
    let row = |count: usize, f: &dyn Fn(&PerThreshold) -> f64| MetricRow {
        gt_count_used: count,
        map: mean(f),
        map50: f(find(0.5)),
        map75: f(find(0.75)),
    };
    let n_in = ev.n_in();
    Ok(EvalReport {
        convention: CONVENTION.to_string(),
        score_threshold: cfg.score_threshold,
        iou_thresholds: cfg.iou_thresholds.clone(),
        detection_count: kept.len(),
        detections_total: dets.len(),
        in_odd: row(n_in, &|r| r.in_ap),
        in_plus_extended: row(n_in + n_pool, &|r| r.all_ap),
        e_map: row(n_in + find(0.5).e.subset.len(), &|r| r.e.value),
        e_map_method: method,
        e_map_per_threshold: rows
            .iter()
            .map(|r| SubsetSummary {
                iou: r.tau,
                value: r.e.value,
                gt_count_used: n_in + r.e.subset.len(),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::PixelBox;
    use crate::labeler::OddFlag;

    fn dataset() -> (GroundTruthSet, Vec<Detection>) {
        let mut gt = GroundTruthSet::new();
        let mut dets = Vec::new();
        for i in 0..6 {
            let id = format!("im{i}");
            let a = PixelBox::new(100.0, 100.0, 40.0, 30.0).unwrap();
            let e = PixelBox::new(400.0, 100.0, 40.0, 30.0).unwrap();
            gt.push(id.clone(), a, OddFlag::In);
            gt.push(id.clone(), e, OddFlag::Extended);
            dets.push(Detection::new(id.clone(), a, 0.9).unwrap());
            if i % 2 == 0 {
                dets.push(Detection::new(id, e, 0.8).unwrap());
            }
        }
        (gt, dets)
    }

    #[test]
    fn row_counts_and_bounds() {
        let (gt, dets) = dataset();
        let r = build_report(&gt, &dets, &EvalConfig::default()).unwrap();
        assert_eq!(r.in_odd.gt_count_used, 6);
        assert_eq!(r.in_plus_extended.gt_count_used, 12);
        assert_eq!(r.e_map.gt_count_used, 9);
        assert_eq!(r.e_map_method, EMapMethod::Exact);
        assert_eq!(r.e_map.map, 1.0);
        assert!(r.e_map.map >= r.in_odd.map);
        assert!(r.in_plus_extended.map < r.in_odd.map);
        assert_eq!(r.detection_count, 9);
    }

    #[test]
    fn greedy_and_exact_reports_agree_here() {
        let (gt, dets) = dataset();
        let cfg = EvalConfig {
            e_map_method: EMapMethod::Greedy,
            ..EvalConfig::default()
        };
        let g = build_report(&gt, &dets, &cfg).unwrap();
        let e = build_report(&gt, &dets, &EvalConfig::default()).unwrap();
        assert_eq!(g.e_map, e.e_map);
    }

    #[test]
    fn invariant_to_detection_order() {
        let (gt, mut dets) = dataset();
        let a = build_report(&gt, &dets, &EvalConfig::default()).unwrap();
        dets.reverse();
        let b = build_report(&gt, &dets, &EvalConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(EvalReport::from_json(&a.to_json()).unwrap(), a);
    }
}
