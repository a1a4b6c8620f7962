//! Automatic multi-runway labelling of scenario poses.
//!
//! For every pose, each runway end in the database whose projected outline is
//! sufficiently visible becomes a candidate; the pose is then classified
//! against that runway's approach cone. In-ODD and Extended-ODD candidates
//! are labelled, Out-of-ODD ones are left as background.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::camera::{project, quad_to_bbox, CameraModel, CameraPose, ClippedBox, PixelBox, Projection};
use crate::error::{Error, Result};
use crate::geodesy::{build_runway_frame, pose_parameters_for_orientation, RunwayGeometry};
use crate::odd::{classify, OddClass, OddClassKind, OddConfig};
use crate::scenario::{RunwayDatabase, Scenario, ScenarioPose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    pub min_visible_fraction: f64,
    pub min_bbox_area_px: f64,
    pub require_piano: bool,
    pub source_tag: String,
    /// Runways whose threshold is farther than this from the camera are skipped.
    pub max_range_m: f64,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            min_visible_fraction: 0.25,
            min_bbox_area_px: 16.0,
            require_piano: true,
            source_tag: String::new(),
            max_range_m: 50_000.0,
        }
    }
}

impl LabelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_visible_fraction >= 0.0 && self.min_bbox_area_px >= 0.0 && self.max_range_m > 0.0) {
            return Err(Error::invalid("label thresholds must be non-negative"));
        }
        Ok(())
    }

    pub fn image_id(&self, uuid: &str) -> String {
        if self.source_tag.is_empty() {
            uuid.to_owned()
        } else {
            format!("{uuid}_{}", self.source_tag)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OddFlag {
    In,
    Extended,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub image_id: String,
    pub airport: String,
    pub runway: String,
    pub bbox: PixelBox,
    pub odd_flag: OddFlag,
    pub visible_fraction: f64,
    pub report: OddClass,
}

#[derive(Debug, Clone)]
pub struct Candidate<'a> {
    pub runway: &'a RunwayGeometry,
    pub projected: ClippedBox,
}

/// Project a runway outline; `None` when it is not usefully visible.
pub fn runway_box(rw: &RunwayGeometry, cam: &CameraModel, pose: &CameraPose) -> Option<ClippedBox> {
    let mut corners = [Projection {
        pixel: crate::camera::PixelPoint { u: 0.0, v: 0.0 },
        in_front: false,
    }; 4];
    for (dst, c) in corners.iter_mut().zip(rw.corners.iter()) {
        *dst = project(c, cam, pose).ok()?;
    }
    quad_to_bbox(&corners, cam)
}

pub fn candidate_runways<'a>(
    pose: &CameraPose,
    cam: &CameraModel,
    db: &'a RunwayDatabase,
    lc: &LabelConfig,
) -> Vec<Candidate<'a>> {
    let camera_ecef = pose.position.to_ecef().as_vector();
    db.iter()
        .filter(|rw| !lc.require_piano || rw.has_piano)
        .filter(|rw| (rw.corners[0].to_ecef().as_vector() - camera_ecef).norm() <= lc.max_range_m)
        .filter_map(|rw| {
            let projected = runway_box(rw, cam, pose)?;
            (projected.visible_fraction >= lc.min_visible_fraction && projected.bbox.area() >= lc.min_bbox_area_px)
                .then_some(Candidate { runway: rw, projected })
        })
        .collect()
}

pub fn label_image(
    pose: &ScenarioPose,
    cam: &CameraModel,
    db: &RunwayDatabase,
    cfg: &OddConfig,
    lc: &LabelConfig,
) -> Result<Vec<Annotation>> {
    let (position, body) = pose.decode()?;
    let camera = CameraPose::from_body(position, &body);
    let image_id = lc.image_id(&pose.uuid);
    let mut out = Vec::new();
    for cand in candidate_runways(&camera, cam, db, lc) {
        let frame = build_runway_frame(cand.runway)?;
        // angles undefined (over the VRP) or gimbal lock: not a usable approach
        let Ok(params) = pose_parameters_for_orientation(&position, &body, &frame) else {
            continue;
        };
        let report = classify(&params, cfg);
        let odd_flag = match report.kind {
            OddClassKind::InOdd => OddFlag::In,
            OddClassKind::ExtendedOdd => OddFlag::Extended,
            OddClassKind::OutOfOdd => continue,
        };
        out.push(Annotation {
            image_id: image_id.clone(),
            airport: cand.runway.airport_icao.clone(),
            runway: cand.runway.runway_id.clone(),
            bbox: cand.projected.bbox,
            odd_flag,
            visible_fraction: cand.projected.visible_fraction,
            report,
        });
    }
    out.sort_by(|a, b| (&a.airport, &a.runway).cmp(&(&b.airport, &b.runway)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestImageGeometry {
    pub w: u32,
    pub h: u32,
    pub fov_x: f64,
    pub fov_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestMeta {
    pub source_tag: String,
    pub image: ManifestImageGeometry,
    pub odd_config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestAnnotation {
    pub airport: String,
    pub runway: String,
    /// `[cx, cy, w, h]` in pixels.
    pub bbox: PixelBox,
    pub odd: OddFlag,
    pub visible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestImage {
    pub image_id: String,
    pub pose: ScenarioPose,
    pub annotations: Vec<ManifestAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub meta: ManifestMeta,
    pub images: Vec<ManifestImage>,
}

impl DatasetManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(doc: &str) -> Result<Self> {
        Ok(serde_json::from_str(doc)?)
    }

    pub fn annotation_count(&self) -> usize {
        self.images.iter().map(|i| i.annotations.len()).sum()
    }
}

/// Hex SHA-256 of the canonical JSON form of an ODD configuration.
pub fn odd_config_hash(cfg: &OddConfig) -> String {
    let canonical = serde_json::to_string(cfg).expect("OddConfig serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Assemble a manifest from per-image results arriving in any order. Output
/// is sorted by image id, then airport, then runway.
pub fn write_annotations(
    results: Vec<(ScenarioPose, Vec<Annotation>)>,
    cam: &CameraModel,
    cfg: &OddConfig,
    lc: &LabelConfig,
) -> DatasetManifest {
    let mut images: Vec<ManifestImage> = results
        .into_iter()
        .map(|(pose, anns)| {
            let mut annotations: Vec<ManifestAnnotation> = anns
                .into_iter()
                .map(|a| ManifestAnnotation {
                    airport: a.airport,
                    runway: a.runway,
                    bbox: a.bbox,
                    odd: a.odd_flag,
                    visible_fraction: a.visible_fraction,
                })
                .collect();
            annotations.sort_by(|a, b| (&a.airport, &a.runway).cmp(&(&b.airport, &b.runway)));
            ManifestImage {
                image_id: lc.image_id(&pose.uuid),
                pose,
                annotations,
            }
        })
        .collect();
    images.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    DatasetManifest {
        meta: ManifestMeta {
            source_tag: lc.source_tag.clone(),
            image: ManifestImageGeometry {
                w: cam.width,
                h: cam.height,
                fov_x: cam.fov_x,
                fov_y: cam.fov_y,
            },
            odd_config_hash: odd_config_hash(cfg),
        },
        images,
    }
}

/// Label every pose of a scenario (in parallel) and build the manifest.
pub fn label_scenario(
    scenario: &Scenario,
    db: &RunwayDatabase,
    cfg: &OddConfig,
    lc: &LabelConfig,
) -> Result<DatasetManifest> {
    cfg.validate()?;
    lc.validate()?;
    let cam = scenario.camera()?;
    let results = scenario
        .poses
        .par_iter()
        .map(|pose| Ok((pose.clone(), label_image(pose, &cam, db, cfg, lc)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(write_annotations(results, &cam, cfg, lc))
}
