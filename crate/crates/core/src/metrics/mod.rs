//! IoU matching, average precision and the extended (ODD-aware) mAP.
//!
//! Everything here is single class. AP is the area under the precision
//! envelope with all-point interpolation, and mAP averages AP over the
//! configured IoU thresholds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::camera::PixelBox;
use crate::error::{Error, Result};
use crate::labeler::{DatasetManifest, OddFlag};

mod crossbar;
mod report;

pub use crossbar::{crossbar, CrossbarCell, CrossbarMatrix, MetricFamily, MetricName};
pub use report::{build_report, EMapMethod, EvalReport, MetricRow, SubsetSummary, CONVENTION};

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20;

pub fn iou(a: &PixelBox, b: &PixelBox) -> f64 {
    let (ax1, ay1, ax2, ay2) = a.corners();
    let (bx1, by1, bx2, by2) = b.corners();
    let iw = (ax2.min(bx2) - ax1.max(bx1)).max(0.0);
    let ih = (ay2.min(by2) - ay1.max(by1)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub bbox: PixelBox,
    pub score: f64,
}

impl Detection {
    pub fn new(image_id: impl Into<String>, bbox: PixelBox, score: f64) -> Result<Self> {
        let d = Self {
            image_id: image_id.into(),
            bbox,
            score,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.score) {
            return Err(Error::validation(format!(
                "detection on `{}` has score {} outside [0, 1]",
                self.image_id, self.score
            )));
        }
        Ok(())
    }
}

pub fn parse_predictions(doc: &str) -> Result<Vec<Detection>> {
    let dets: Vec<Detection> = serde_json::from_str(doc)?;
    for d in &dets {
        d.validate()?;
    }
    Ok(dets)
}

pub fn predictions_to_json(dets: &[Detection]) -> String {
    serde_json::to_string_pretty(dets).expect("predictions serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub bbox: PixelBox,
    pub flag: OddFlag,
}

/// Reference to one ground-truth box: image plus position in that image's list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GtRef {
    pub image_id: String,
    pub index: usize,
}

/// Ground truth per image. Box order within an image is insertion order and
/// is what breaks IoU ties during matching.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruthSet {
    images: BTreeMap<String, Vec<GroundTruth>>,
}

impl GroundTruthSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an image even if it has no boxes, so that detections on it count as false positives.
    pub fn add_image(&mut self, image_id: impl Into<String>) {
        self.images.entry(image_id.into()).or_default();
    }

    pub fn push(&mut self, image_id: impl Into<String>, bbox: PixelBox, flag: OddFlag) {
        self.images
            .entry(image_id.into())
            .or_default()
            .push(GroundTruth { bbox, flag });
    }

    pub fn from_manifest(m: &DatasetManifest) -> Self {
        let mut gt = Self::new();
        for img in &m.images {
            gt.add_image(img.image_id.clone());
            for a in &img.annotations {
                gt.push(img.image_id.clone(), a.bbox, a.odd);
            }
        }
        gt
    }

    pub fn images(&self) -> impl Iterator<Item = (&str, &[GroundTruth])> {
        self.images.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn contains_image(&self, image_id: &str) -> bool {
        self.images.contains_key(image_id)
    }

    pub fn count(&self, flag: OddFlag) -> usize {
        self.images
            .values()
            .flat_map(|v| v.iter())
            .filter(|g| g.flag == flag)
            .count()
    }

    /// Extended-ODD boxes in (image_id, index) order.
    pub fn extended_pool(&self) -> Vec<GtRef> {
        let mut out = Vec::new();
        for (id, gts) in &self.images {
            for (i, g) in gts.iter().enumerate() {
                if g.flag == OddFlag::Extended {
                    out.push(GtRef {
                        image_id: id.clone(),
                        index: i,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Detections are kept when `score > score_threshold`.
    pub score_threshold: f64,
    pub iou_thresholds: Vec<f64>,
    pub exhaustive_limit: usize,
    pub e_map_method: EMapMethod,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            score_threshold: 0.5,
            iou_thresholds: coco_thresholds(),
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            e_map_method: EMapMethod::Auto,
        }
    }
}

/// 0.50, 0.55, ..., 0.95
pub fn coco_thresholds() -> Vec<f64> {
    (0..10).map(|i| (50 + 5 * i) as f64 / 100.0).collect()
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.score_threshold) {
            return Err(Error::validation(format!(
                "score_threshold {} outside [0, 1]",
                self.score_threshold
            )));
        }
        if self.iou_thresholds.is_empty() {
            return Err(Error::validation("iou_thresholds is empty"));
        }
        for &t in &self.iou_thresholds {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::validation(format!("IoU threshold {t} outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn filter(&self, dets: &[Detection]) -> Vec<Detection> {
        dets.iter()
            .filter(|d| d.score > self.score_threshold)
            .cloned()
            .collect()
    }
}

/// Greedy one-to-one matching inside one image.
///
/// Detections are visited by descending score (ties by position in `dets`);
/// each takes the unmatched box with the highest IoU at or above `tau`, ties
/// going to the earlier box. Returns the matched box index per detection.
pub fn match_image(gts: &[PixelBox], dets: &[(PixelBox, f64)], tau: f64) -> Vec<Option<usize>> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].1.total_cmp(&dets[a].1).then(a.cmp(&b)));
    let mut taken = vec![false; gts.len()];
    let mut out = vec![None; dets.len()];
    for d in order {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] {
                continue;
            }
            let v = iou(&dets[d].0, gt);
            if v >= tau && best.is_none_or(|(_, b)| v > b) {
                best = Some((g, v));
            }
        }
        if let Some((g, _)) = best {
            taken[g] = true;
            out[d] = Some(g);
        }
    }
    out
}

/// One ranked detection outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub score: f64,
    pub tp: bool,
}

/// All-point interpolated AP. Outcomes are ranked by descending score; equal
/// scores keep their input order.
pub fn average_precision(outcomes: &[Outcome], n_gt: usize) -> Result<f64> {
    if n_gt == 0 {
        return Err(Error::NoGroundTruth);
    }
    let mut ranked = outcomes.to_vec();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(ap_of_ranked(ranked.iter().map(|o| o.tp), n_gt))
}

fn ap_of_ranked(tps: impl Iterator<Item = bool>, n_gt: usize) -> f64 {
    // Recall rises by exactly 1/n_gt at each true positive, so the area under
    // the precision envelope is the mean envelope value over TP ranks.
    let mut tp = 0usize;
    let mut precision = Vec::new();
    let mut is_tp = Vec::new();
    for (rank, hit) in tps.enumerate() {
        tp += hit as usize;
        precision.push(tp as f64 / (rank + 1) as f64);
        is_tp.push(hit);
    }
    let mut envelope = 0.0_f64;
    let mut sum = 0.0;
    for (p, hit) in precision.iter().zip(&is_tp).rev() {
        envelope = envelope.max(*p);
        if *hit {
            sum += envelope;
        }
    }
    sum / n_gt as f64
}

/// Pre-grouped detections and ground truth, reused across thresholds and subsets.
pub(crate) struct Evaluator<'a> {
    images: Vec<EvalImage<'a>>,
    n_in: usize,
    pool: Vec<GtRef>,
}

struct EvalImage<'a> {
    gts: Vec<PixelBox>,
    /// Extended pool position for extended boxes, `None` for In-ODD ones.
    pool_slot: Vec<Option<usize>>,
    dets: Vec<(PixelBox, f64)>,
    _id: &'a str,
}

pub(crate) struct Run {
    pub ap: Option<f64>,
    /// (pool slot, pooled rank) of every extended box that got matched.
    pub ext_matches: Vec<(usize, usize)>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(gt: &'a GroundTruthSet, dets: &'a [Detection]) -> Result<Self> {
        let mut by_image: BTreeMap<&str, Vec<(PixelBox, f64)>> = BTreeMap::new();
        for d in dets {
            if !gt.contains_image(&d.image_id) {
                return Err(Error::validation(format!(
                    "prediction for unknown image `{}`",
                    d.image_id
                )));
            }
            by_image.entry(d.image_id.as_str()).or_default().push((d.bbox, d.score));
        }
        let mut images = Vec::new();
        let mut pool = Vec::new();
        let mut n_in = 0;
        for (id, boxes) in gt.images() {
            let mut pool_slot = Vec::with_capacity(boxes.len());
            for (i, g) in boxes.iter().enumerate() {
                match g.flag {
                    OddFlag::In => {
                        n_in += 1;
                        pool_slot.push(None);
                    }
                    OddFlag::Extended => {
                        pool_slot.push(Some(pool.len()));
                        pool.push(GtRef {
                            image_id: id.to_string(),
                            index: i,
                        });
                    }
                }
            }
            images.push(EvalImage {
                gts: boxes.iter().map(|g| g.bbox).collect(),
                pool_slot,
                dets: by_image.remove(id).unwrap_or_default(),
                _id: id,
            });
        }
        Ok(Self { images, n_in, pool })
    }

    pub(crate) fn pool(&self) -> &[GtRef] {
        &self.pool
    }

    pub(crate) fn n_in(&self) -> usize {
        self.n_in
    }

    /// AP at `tau` on In-ODD boxes plus the extended boxes whose slot is set in `include`.
    pub(crate) fn run(&self, tau: f64, include: &[bool]) -> Run {
        // (score, image position, detection position, matched pool slot or In flag)
        let mut pooled: Vec<(f64, usize, usize, bool, Option<usize>)> = Vec::new();
        let mut n_gt = 0;
        for (ii, img) in self.images.iter().enumerate() {
            let mut kept = Vec::with_capacity(img.gts.len());
            let mut slot = Vec::with_capacity(img.gts.len());
            for (g, s) in img.gts.iter().zip(&img.pool_slot) {
                if s.is_none_or(|k| include[k]) {
                    kept.push(*g);
                    slot.push(*s);
                }
            }
            n_gt += kept.len();
            let m = match_image(&kept, &img.dets, tau);
            for (di, hit) in m.into_iter().enumerate() {
                pooled.push((img.dets[di].1, ii, di, hit.is_some(), hit.and_then(|g| slot[g])));
            }
        }
        pooled.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let ext_matches = pooled
            .iter()
            .enumerate()
            .filter_map(|(rank, p)| p.4.map(|k| (k, rank)))
            .collect();
        let ap = (n_gt > 0).then(|| ap_of_ranked(pooled.iter().map(|p| p.3), n_gt));
        Run { ap, ext_matches }
    }
}

/// AP at one threshold on In-ODD boxes, optionally with every extended box.
pub fn ap_at(gt: &GroundTruthSet, dets: &[Detection], tau: f64, with_extended: bool) -> Result<f64> {
    let ev = Evaluator::new(gt, dets)?;
    let include = vec![with_extended; ev.pool().len()];
    ev.run(tau, &include).ap.ok_or(Error::NoGroundTruth)
}

/// (mAP, mAP50, mAP75)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapTriple {
    pub map: f64,
    pub map50: f64,
    pub map75: f64,
}

/// mAP suite after applying the score filter of `cfg`.
pub fn map_suite(gt: &GroundTruthSet, dets: &[Detection], with_extended: bool, cfg: &EvalConfig) -> Result<MapTriple> {
    cfg.validate()?;
    let kept = cfg.filter(dets);
    let ev = Evaluator::new(gt, &kept)?;
    let include = vec![with_extended; ev.pool().len()];
    let at = |t: f64| ev.run(t, &include).ap.ok_or(Error::NoGroundTruth);
    let mut sum = 0.0;
    for &t in &cfg.iou_thresholds {
        sum += at(t)?;
    }
    Ok(MapTriple {
        map: sum / cfg.iou_thresholds.len() as f64,
        map50: at(0.5)?,
        map75: at(0.75)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EMapResult {
    pub value: f64,
    pub subset: Vec<GtRef>,
}

impl<'a> Evaluator<'a> {
    fn subset_of(&self, include: &[bool]) -> Vec<GtRef> {
        include
            .iter()
            .zip(&self.pool)
            .filter(|(on, _)| **on)
            .map(|(_, r)| r.clone())
            .collect()
    }

    /// Exhaustive search. Exact ties on AP prefer more matched extended boxes, then a smaller subset.
    pub(crate) fn e_map_exact(&self, tau: f64, limit: usize) -> Result<EMapResult> {
        let n = self.pool.len();
        if n > limit || n >= 63 {
            return Err(Error::ExhaustiveLimit { size: n, limit });
        }
        let mut best: Option<(f64, usize, usize, u64)> = None;
        let mut include = vec![false; n];
        for mask in 0..(1u64 << n) {
            for (k, on) in include.iter_mut().enumerate() {
                *on = mask >> k & 1 == 1;
            }
            let run = self.run(tau, &include);
            let Some(ap) = run.ap else { continue };
            let size = mask.count_ones() as usize;
            let hits = run.ext_matches.len();
            let better = match best {
                None => true,
                Some((b_ap, b_hits, b_size, _)) => {
                    ap > b_ap || (ap == b_ap && (hits > b_hits || (hits == b_hits && size < b_size)))
                }
            };
            if better {
                best = Some((ap, hits, size, mask));
            }
        }
        let (value, _, _, mask) = best.ok_or(Error::NoGroundTruth)?;
        let include: Vec<bool> = (0..n).map(|k| mask >> k & 1 == 1).collect();
        Ok(EMapResult {
            value,
            subset: self.subset_of(&include),
        })
    }

    /// Match against the full pool, then keep the best score-ordered prefix
    /// of the matched extended boxes (the longest one on ties). The empty
    /// prefix is always a candidate, so the result never drops below mAP on
    /// In-ODD boxes alone.
    pub(crate) fn e_map_greedy(&self, tau: f64) -> Result<EMapResult> {
        let n = self.pool.len();
        let full = self.run(tau, &vec![true; n]);
        let mut matched = full.ext_matches;
        matched.sort_by_key(|&(_, rank)| rank);
        let mut include = vec![false; n];
        let mut best: Option<(f64, usize)> = self.run(tau, &include).ap.map(|ap| (ap, 0));
        for (k, &(slot, _)) in matched.iter().enumerate() {
            include[slot] = true;
            if let Some(ap) = self.run(tau, &include).ap {
                if best.is_none_or(|(b, _)| ap >= b) {
                    best = Some((ap, k + 1));
                }
            }
        }
        let (value, k) = best.ok_or(Error::NoGroundTruth)?;
        let mut include = vec![false; n];
        for &(slot, _) in &matched[..k] {
            include[slot] = true;
        }
        Ok(EMapResult {
            value,
            subset: self.subset_of(&include),
        })
    }
}

/// Best AP at `tau` over every subset of the extended pool added to the In-ODD boxes.
/// Detections are used as given (no score filter).
pub fn e_map_exact(gt: &GroundTruthSet, dets: &[Detection], tau: f64, limit: usize) -> Result<EMapResult> {
    Evaluator::new(gt, dets)?.e_map_exact(tau, limit)
}

/// Polynomial-time e-mAP at `tau`; see [`Evaluator::e_map_greedy`] for the subset rule.
pub fn e_map_greedy(gt: &GroundTruthSet, dets: &[Detection], tau: f64) -> Result<EMapResult> {
    Evaluator::new(gt, dets)?.e_map_greedy(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(cx: f64, cy: f64, w: f64, h: f64) -> PixelBox {
        PixelBox::new(cx, cy, w, h).unwrap()
    }

    fn o(score: f64, tp: bool) -> Outcome {
        Outcome { score, tp }
    }

    #[test]
    fn iou_examples() {
        let a = b(5.0, 5.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &b(50.0, 5.0, 10.0, 10.0)), 0.0);
        assert!((iou(&a, &b(10.0, 5.0, 10.0, 10.0)) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matching_is_one_to_one() {
        let g = [b(5.0, 5.0, 10.0, 10.0)];
        assert_eq!(match_image(&g, &[(g[0], 0.9)], 0.5), vec![Some(0)]);
        let m = match_image(&g, &[(g[0], 0.6), (g[0], 0.9)], 0.5);
        assert_eq!(m, vec![None, Some(0)]);
    }

    #[test]
    fn iou_tie_goes_to_first_box() {
        let g = [b(0.0, 0.0, 10.0, 10.0), b(0.0, 0.0, 10.0, 10.0)];
        assert_eq!(match_image(&g, &[(g[0], 0.9)], 0.5), vec![Some(0)]);
    }

    #[test]
    fn ap_fixtures() {
        assert_eq!(average_precision(&[o(0.9, true), o(0.8, true)], 2).unwrap(), 1.0);
        assert_eq!(average_precision(&[o(0.9, true)], 2).unwrap(), 0.5);
        let v = average_precision(&[o(0.7, true), o(0.9, true), o(0.8, false)], 2).unwrap();
        assert!((v - 5.0 / 6.0).abs() < 1e-12, "{v}");
        assert!(matches!(average_precision(&[], 0), Err(Error::NoGroundTruth)));
        assert_eq!(average_precision(&[], 3).unwrap(), 0.0);
    }

    fn one_image(in_boxes: &[PixelBox], ext: &[PixelBox]) -> GroundTruthSet {
        let mut gt = GroundTruthSet::new();
        gt.add_image("img");
        for x in in_boxes {
            gt.push("img", *x, OddFlag::In);
        }
        for x in ext {
            gt.push("img", *x, OddFlag::Extended);
        }
        gt
    }

    fn det(bb: PixelBox, s: f64) -> Detection {
        Detection::new("img", bb, s).unwrap()
    }

    #[test]
    fn e_map_without_extended_is_map() {
        let a = b(50.0, 50.0, 20.0, 20.0);
        let gt = one_image(&[a], &[]);
        let dets = [det(a, 0.9), det(b(300.0, 50.0, 20.0, 20.0), 0.95)];
        let base = ap_at(&gt, &dets, 0.5, false).unwrap();
        let ex = e_map_exact(&gt, &dets, 0.5, 20).unwrap();
        assert_eq!(ex.value, base);
        assert!(ex.subset.is_empty());
        assert_eq!(e_map_greedy(&gt, &dets, 0.5).unwrap().value, base);
    }

    #[test]
    fn covered_extended_box_is_included() {
        let a = b(50.0, 50.0, 20.0, 20.0);
        let e = b(300.0, 50.0, 20.0, 20.0);
        let gt = one_image(&[a], &[e]);
        let dets = [det(a, 0.9), det(e, 0.95)];
        let base = ap_at(&gt, &dets, 0.5, false).unwrap();
        let ex = e_map_exact(&gt, &dets, 0.5, 20).unwrap();
        assert!(ex.value > base);
        assert_eq!(ex.value, 1.0);
        assert_eq!(ex.subset, vec![GtRef { image_id: "img".into(), index: 1 }]);
    }

    #[test]
    fn uncovered_extended_box_is_excluded() {
        let a = b(50.0, 50.0, 20.0, 20.0);
        let gt = one_image(&[a], &[b(300.0, 50.0, 20.0, 20.0)]);
        let dets = [det(a, 0.9)];
        let ex = e_map_exact(&gt, &dets, 0.5, 20).unwrap();
        assert_eq!(ex.value, 1.0);
        assert!(ex.subset.is_empty());
    }

    #[test]
    fn exhaustive_limit_enforced() {
        let ext: Vec<PixelBox> = (0..5).map(|i| b(30.0 * i as f64 + 10.0, 10.0, 10.0, 10.0)).collect();
        let gt = one_image(&[], &ext);
        assert!(matches!(
            e_map_exact(&gt, &[], 0.5, 4),
            Err(Error::ExhaustiveLimit { size: 5, limit: 4 })
        ));
    }

    #[test]
    fn unknown_image_rejected() {
        let gt = one_image(&[b(5.0, 5.0, 4.0, 4.0)], &[]);
        let d = Detection::new("other", b(5.0, 5.0, 4.0, 4.0), 0.9).unwrap();
        assert!(ap_at(&gt, &[d], 0.5, false).is_err());
    }

    #[test]
    fn predictions_round_trip() {
        let dets = vec![det(b(1.5, 2.25, 3.0, 4.0), 0.875), det(b(10.0, 20.0, 1.0, 1.0), 0.1)];
        assert_eq!(parse_predictions(&predictions_to_json(&dets)).unwrap(), dets);
        assert!(parse_predictions(r#"[{"image_id":"a","bbox":[1,1,1,1],"score":1.5}]"#).is_err());
    }

    #[test]
    fn score_filter_is_strict() {
        let a = b(50.0, 50.0, 20.0, 20.0);
        let gt = one_image(&[a], &[]);
        let cfg = EvalConfig::default();
        let at_threshold = map_suite(&gt, &[det(a, 0.5)], false, &cfg).unwrap();
        assert_eq!(at_threshold.map, 0.0);
        let above = map_suite(&gt, &[det(a, 0.51)], false, &cfg).unwrap();
        assert_eq!((above.map, above.map50, above.map75), (1.0, 1.0, 1.0));
    }
}
