//! Approach-cone operational design domain and the In / Extended / Out
//! classification of a pose relative to one runway.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six approach parameters of a pose relative to one runway.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseParameters {
    /// Meters from the LTP along the runway axis, negative on approach.
    pub along_track: f64,
    pub lateral_path_angle: f64,
    pub vertical_path_angle: f64,
    pub relative_yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl PoseParameters {
    pub fn get(&self, p: Parameter) -> f64 {
        match p {
            Parameter::AlongTrack => self.along_track,
            Parameter::LateralPathAngle => self.lateral_path_angle,
            Parameter::VerticalPathAngle => self.vertical_path_angle,
            Parameter::RelativeYaw => self.relative_yaw,
            Parameter::Pitch => self.pitch,
            Parameter::Roll => self.roll,
        }
    }

    pub fn set(&mut self, p: Parameter, value: f64) {
        match p {
            Parameter::AlongTrack => self.along_track = value,
            Parameter::LateralPathAngle => self.lateral_path_angle = value,
            Parameter::VerticalPathAngle => self.vertical_path_angle = value,
            Parameter::RelativeYaw => self.relative_yaw = value,
            Parameter::Pitch => self.pitch = value,
            Parameter::Roll => self.roll = value,
        }
    }

    pub fn is_finite(&self) -> bool {
        Parameter::ALL.iter().all(|p| self.get(*p).is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    AlongTrack,
    LateralPathAngle,
    VerticalPathAngle,
    RelativeYaw,
    Pitch,
    Roll,
}

impl Parameter {
    pub const ALL: [Parameter; 6] = [
        Parameter::AlongTrack,
        Parameter::LateralPathAngle,
        Parameter::VerticalPathAngle,
        Parameter::RelativeYaw,
        Parameter::Pitch,
        Parameter::Roll,
    ];
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Parameter::AlongTrack => "along_track",
            Parameter::LateralPathAngle => "lateral_path_angle",
            Parameter::VerticalPathAngle => "vertical_path_angle",
            Parameter::RelativeYaw => "relative_yaw",
            Parameter::Pitch => "pitch",
            Parameter::Roll => "roll",
        };
        f.write_str(s)
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::invalid(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn symmetric(half_width: f64) -> Self {
        Self {
            lo: -half_width,
            hi: half_width,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    /// Distance from `x` to the interval, zero inside.
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Scale `i` about its midpoint so that its half-width is multiplied by `factor`.
pub fn extended_interval(i: &Interval, factor: f64) -> Interval {
    // same as midpoint -/+ factor * half-width, but exact for factor 1
    let grow = i.half_width() * (factor - 1.0);
    Interval {
        lo: i.lo - grow,
        hi: i.hi + grow,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub along_track: Interval,
    pub yaw: Interval,
    pub roll: Interval,
}

/// Along-track segments ordered far to near, contiguous and non-overlapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct SegmentTable {
    segments: Vec<Segment>,
}

impl SegmentTable {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::invalid("segment table is empty"));
        }
        for pair in segments.windows(2) {
            if pair[0].along_track.hi != pair[1].along_track.lo {
                return Err(Error::invalid(format!(
                    "segments {} and {} are not contiguous",
                    pair[0].along_track, pair[1].along_track
                )));
            }
        }
        if segments.iter().any(|s| s.along_track.lo >= s.along_track.hi) {
            return Err(Error::invalid("segment along-track intervals must have positive length"));
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Union of all segment along-track intervals.
    pub fn span(&self) -> Interval {
        Interval {
            lo: self.segments[0].along_track.lo,
            hi: self.segments[self.segments.len() - 1].along_track.hi,
        }
    }
}

impl Default for SegmentTable {
    fn default() -> Self {
        let seg = |lo: f64, hi: f64, yaw: f64, roll: f64| Segment {
            along_track: Interval { lo, hi },
            yaw: Interval::symmetric(yaw),
            roll: Interval::symmetric(roll),
        };
        Self {
            segments: vec![
                seg(-6000.0, -4500.0, 24.0, 30.0),
                seg(-4500.0, -2500.0, 24.0, 15.0),
                seg(-2500.0, -280.0, 18.5, 10.0),
            ],
        }
    }
}

impl TryFrom<Vec<Segment>> for SegmentTable {
    type Error = Error;
    fn try_from(v: Vec<Segment>) -> Result<Self> {
        SegmentTable::new(v)
    }
}

impl From<SegmentTable> for Vec<Segment> {
    fn from(t: SegmentTable) -> Self {
        t.segments
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OddConfig {
    pub segment_table: SegmentTable,
    pub lateral: Interval,
    pub vertical: Interval,
    pub pitch: Interval,
    pub extension_factor: f64,
    pub clamp_along_track_hi_to_zero: bool,
}

impl Default for OddConfig {
    fn default() -> Self {
        Self {
            segment_table: SegmentTable::default(),
            lateral: Interval::symmetric(3.0),
            vertical: Interval { lo: -5.2, hi: -1.8 },
            pitch: Interval { lo: -15.0, hi: 5.0 },
            extension_factor: 2.0,
            clamp_along_track_hi_to_zero: true,
        }
    }
}

impl OddConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.extension_factor >= 1.0) || !self.extension_factor.is_finite() {
            return Err(Error::invalid(format!(
                "extension_factor {} must be >= 1",
                self.extension_factor
            )));
        }
        for i in [self.lateral, self.vertical, self.pitch] {
            Interval::new(i.lo, i.hi)?;
        }
        Ok(())
    }

    pub fn from_yaml(doc: &str) -> Result<Self> {
        let cfg: OddConfig = serde_yaml::from_str(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("OddConfig serializes")
    }

    /// Nominal along-track interval (the whole approach).
    pub fn along_track_nominal(&self) -> Interval {
        self.segment_table.span()
    }

    /// Extended along-track envelope, optionally clamped so it never passes the LTP.
    pub fn along_track_extended(&self) -> Interval {
        let mut ext = extended_interval(&self.along_track_nominal(), self.extension_factor);
        if self.clamp_along_track_hi_to_zero {
            ext.hi = ext.hi.min(0.0);
        }
        ext
    }

    fn fixed_interval(&self, p: Parameter) -> Option<Interval> {
        match p {
            Parameter::LateralPathAngle => Some(self.lateral),
            Parameter::VerticalPathAngle => Some(self.vertical),
            Parameter::Pitch => Some(self.pitch),
            _ => None,
        }
    }

    /// Nominal interval of `p` for a given segment.
    pub fn nominal_interval(&self, p: Parameter, segment: usize) -> Interval {
        let seg = &self.segment_table.segments()[segment];
        match p {
            Parameter::AlongTrack => self.along_track_nominal(),
            Parameter::RelativeYaw => seg.yaw,
            Parameter::Roll => seg.roll,
            _ => self.fixed_interval(p).expect("fixed parameter"),
        }
    }

    pub fn extended_interval(&self, p: Parameter, segment: usize) -> Interval {
        match p {
            Parameter::AlongTrack => self.along_track_extended(),
            _ => extended_interval(&self.nominal_interval(p, segment), self.extension_factor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentMatch {
    pub index: usize,
    /// True when the position lies only in the extended along-track envelope.
    pub extended: bool,
}

/// Segment containing `along_track`. Bounds are closed; at a shared bound the
/// farther segment wins. Positions only inside the extended envelope map to
/// the nearest segment, flagged extended.
pub fn segment_for(along_track: f64, cfg: &OddConfig) -> Option<SegmentMatch> {
    let segments = cfg.segment_table.segments();
    if let Some(index) = segments.iter().position(|s| s.along_track.contains(along_track)) {
        return Some(SegmentMatch { index, extended: false });
    }
    if !cfg.along_track_extended().contains(along_track) {
        return None;
    }
    Some(SegmentMatch {
        index: nearest_segment(along_track, cfg),
        extended: true,
    })
}

fn nearest_segment(along_track: f64, cfg: &OddConfig) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, s) in cfg.segment_table.segments().iter().enumerate() {
        let d = s.along_track.distance(along_track);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OddStatus {
    Nominal,
    Extended,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OddClassKind {
    InOdd,
    ExtendedOdd,
    OutOfOdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterCheck {
    pub parameter: Parameter,
    pub value: f64,
    pub nominal: Interval,
    pub extended: Interval,
    pub status: OddStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OddClass {
    pub kind: OddClassKind,
    /// Segment whose yaw and roll ranges were applied.
    pub segment: usize,
    pub per_parameter: Vec<ParameterCheck>,
}

impl OddClass {
    pub fn check(&self, p: Parameter) -> &ParameterCheck {
        self.per_parameter
            .iter()
            .find(|c| c.parameter == p)
            .expect("every parameter is checked")
    }
}

/// Check each parameter against its nominal then extended interval.
pub fn classify(p: &PoseParameters, cfg: &OddConfig) -> OddClass {
    let segment = match segment_for(p.along_track, cfg) {
        Some(m) => m.index,
        None => nearest_segment(p.along_track, cfg),
    };
    let per_parameter: Vec<ParameterCheck> = Parameter::ALL
        .iter()
        .map(|&param| {
            let value = p.get(param);
            let nominal = cfg.nominal_interval(param, segment);
            let extended = cfg.extended_interval(param, segment);
            let status = if nominal.contains(value) {
                OddStatus::Nominal
            } else if extended.contains(value) {
                OddStatus::Extended
            } else {
                OddStatus::Out
            };
            ParameterCheck {
                parameter: param,
                value,
                nominal,
                extended,
                status,
            }
        })
        .collect();
    let worst = per_parameter
        .iter()
        .map(|c| c.status)
        .max()
        .unwrap_or(OddStatus::Nominal);
    let kind = match worst {
        OddStatus::Nominal => OddClassKind::InOdd,
        OddStatus::Extended => OddClassKind::ExtendedOdd,
        OddStatus::Out => OddClassKind::OutOfOdd,
    };
    OddClass {
        kind,
        segment,
        per_parameter,
    }
}
