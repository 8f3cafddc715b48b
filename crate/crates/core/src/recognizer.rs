//! Matching segmented strokes against the shapes of a domain library.
//!
//! Every shape of every domain is tried in library order. A shape matches
//! when the segment count lies in its line range and each constraint holds
//! within tolerance. Among the matches of a stroke, the one built from the
//! most line primitives is chosen; ties go to the one found first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{angle_between_deg, distance, Vec2};
use crate::segmentation::{trace_stroke, MergeConfig, Segment, SmoothingConfig};
use crate::shape_dsl::{Constraint, DomainLibrary, Property, ShapeSpec};
use crate::stroke_model::{SketchDocument, Stroke};

/// Slack on top of a tolerance that still counts as satisfied, to absorb
/// floating-point noise in geometry that is exact by construction.
const SATISFY_EPS: f64 = 1e-9;

/// Geometry of a chain of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub segment_count: usize,
    pub lengths: Vec<f64>,
    /// Direction of each segment in degrees, (-180, 180].
    pub directions: Vec<f64>,
    /// Interior angle at each shared vertex, degrees.
    pub turn_angles: Vec<f64>,
    /// Interior angle where the last segment meets the first, if there are
    /// at least two segments. Only meaningful for closed shapes.
    pub wrap_angle: Option<f64>,
    pub closure_gap: f64,
    pub bbox_diagonal: f64,
    #[serde(skip)]
    vectors: Vec<Vec2>,
}

impl FeatureVector {
    /// Features of the chain `v0 -> v1 -> ... -> vn` (n segments).
    pub fn from_vertices(vertices: &[Vec2]) -> Self {
        let vectors: Vec<Vec2> = vertices.windows(2).map(|w| w[1] - w[0]).collect();
        let lengths = vectors.iter().map(|v| v.norm()).collect();
        let directions = vectors.iter().map(|v| v.angle_deg()).collect();
        let interior = |incoming: Vec2, outgoing: Vec2| angle_between_deg(incoming * -1.0, outgoing);
        let turn_angles = vectors.windows(2).map(|w| interior(w[0], w[1])).collect();
        let wrap_angle = (vectors.len() >= 2)
            .then(|| interior(*vectors.last().unwrap(), vectors[0]));
        let closure_gap = match (vertices.first(), vertices.last()) {
            (Some(&a), Some(&b)) => distance(a, b),
            _ => 0.0,
        };
        let (mut lo, mut hi) = (
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for v in vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        let bbox_diagonal = if vertices.is_empty() {
            0.0
        } else {
            distance(lo, hi)
        };
        FeatureVector {
            segment_count: vectors.len(),
            lengths,
            directions,
            turn_angles,
            wrap_angle,
            closure_gap,
            bbox_diagonal,
            vectors,
        }
    }

    fn vector(&self, line: usize) -> Result<Vec2, EvalError> {
        self.vectors
            .get(line.wrapping_sub(1))
            .copied()
            .ok_or(EvalError::IndexOutOfRange {
                index: line,
                segments: self.segment_count,
            })
    }

    fn length(&self, line: usize) -> Result<f64, EvalError> {
        self.vector(line).map(Vec2::norm)
    }

    /// Turn angles, plus the wrap-around angle for closed shapes.
    pub fn angles(&self, closed: bool) -> Vec<f64> {
        let mut out = self.turn_angles.clone();
        if closed {
            out.extend(self.wrap_angle);
        }
        out
    }
}

/// Vertices of a chained segment list as real points.
pub fn segment_vertices(segments: &[Segment]) -> Vec<Vec2> {
    let to = |p: crate::stroke_model::Point| Vec2::new(p.x as f64, p.y as f64);
    segments
        .first()
        .map(|s| to(s.start))
        .into_iter()
        .chain(segments.iter().map(|s| to(s.end)))
        .collect()
}

pub fn extract_features(segments: &[Segment]) -> FeatureVector {
    FeatureVector::from_vertices(&segment_vertices(segments))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("line {index} referenced but only {segments} segments exist")]
    IndexOutOfRange { index: usize, segments: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintCheck {
    pub satisfied: bool,
    /// Distance from the ideal value divided by the tolerance (the raw
    /// distance when the tolerance is zero).
    pub slack: f64,
}

impl ConstraintCheck {
    fn new(deviation: f64, tol: f64) -> Self {
        ConstraintCheck {
            satisfied: deviation <= tol + SATISFY_EPS,
            slack: if tol > 0.0 { deviation / tol } else { deviation },
        }
    }
}

/// Angle between two lines regardless of direction, in [0, 90].
fn line_angle(u: Vec2, v: Vec2) -> f64 {
    let a = angle_between_deg(u, v);
    a.min(180.0 - a)
}

pub fn eval_constraint(c: &Constraint, f: &FeatureVector) -> Result<ConstraintCheck, EvalError> {
    Ok(match *c {
        Constraint::Closed { gap } => {
            ConstraintCheck::new(f.closure_gap, gap.allowed_gap(f.bbox_diagonal))
        }
        Constraint::Perpendicular { a, b, tol_deg } => {
            let dev = 90.0 - line_angle(f.vector(a)?, f.vector(b)?);
            ConstraintCheck::new(dev, tol_deg)
        }
        Constraint::Parallel { a, b, tol_deg } => {
            ConstraintCheck::new(line_angle(f.vector(a)?, f.vector(b)?), tol_deg)
        }
        Constraint::AngleBetween {
            a,
            b,
            degrees,
            tol_deg,
        } => {
            let measured = angle_between_deg(f.vector(a)? * -1.0, f.vector(b)?);
            ConstraintCheck::new((measured - degrees).abs(), tol_deg)
        }
        Constraint::EqualLength { a, b, tol_ratio } => {
            let (la, lb) = (f.length(a)?, f.length(b)?);
            ConstraintCheck::new((la - lb).abs() / la.max(lb), tol_ratio)
        }
        Constraint::LengthRatio {
            a,
            b,
            ratio,
            tol_ratio,
        } => {
            let measured = f.length(a)? / f.length(b)?;
            ConstraintCheck::new((measured / ratio - 1.0).abs(), tol_ratio)
        }
    })
}

/// Which segmentation of the stroke an interpretation was matched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentationLevel {
    /// After collinear merging.
    Merged,
    /// Straight pieces between change points, before merging.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpretation {
    pub domain_name: String,
    pub shape_name: String,
    pub display_label: String,
    pub primitive_count: usize,
    pub properties: BTreeMap<String, Vec<f64>>,
    pub residual: f64,
    pub level: SegmentationLevel,
}

pub fn properties_for(report: &[Property], f: &FeatureVector, closed: bool) -> BTreeMap<String, Vec<f64>> {
    report
        .iter()
        .map(|p| {
            let values = match p {
                Property::Angles => f.angles(closed),
                Property::Lengths => f.lengths.clone(),
                Property::ClosureGap => vec![f.closure_gap],
            };
            (p.name().to_string(), values)
        })
        .collect()
}

/// Matches one shape against a segment chain.
pub fn match_shape(
    domain_name: &str,
    spec: &ShapeSpec,
    segments: &[Segment],
    level: SegmentationLevel,
) -> Option<Interpretation> {
    if segments.is_empty() || !spec.lines.contains(segments.len()) {
        return None;
    }
    let features = extract_features(segments);
    let mut residual = 0.0;
    for c in &spec.constraints {
        let check = eval_constraint(c, &features).ok()?;
        if !check.satisfied {
            return None;
        }
        residual += check.slack;
    }
    Some(Interpretation {
        domain_name: domain_name.to_string(),
        shape_name: spec.name.clone(),
        display_label: spec.display_label.clone(),
        primitive_count: segments.len(),
        properties: properties_for(&spec.report, &features, spec.is_closed()),
        residual,
        level,
    })
}

/// Index of the interpretation to display: the one composed of the most
/// primitives, the earliest found among equals. Discovery order is unique,
/// so residuals never need to break a tie.
pub fn select_interpretation(candidates: &[Interpretation]) -> Option<usize> {
    candidates
        .iter()
        .enumerate()
        .min_by_key(|(i, c)| (std::cmp::Reverse(c.primitive_count), *i))
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RecognizeConfig {
    pub smoothing: SmoothingConfig,
    pub merge: MergeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecognitionResult {
    pub stroke_id: u64,
    /// `None` means Undefined.
    pub chosen: Option<Interpretation>,
    pub candidates: Vec<Interpretation>,
    pub raw_segments: Vec<Segment>,
    pub merged_segments: Vec<Segment>,
    /// Why the stroke could not be segmented, if it could not.
    pub error: Option<String>,
}

impl RecognitionResult {
    /// The segments the chosen interpretation was matched on.
    pub fn chosen_segments(&self) -> Option<&[Segment]> {
        self.chosen.as_ref().map(|c| match c.level {
            SegmentationLevel::Merged => self.merged_segments.as_slice(),
            SegmentationLevel::Raw => self.raw_segments.as_slice(),
        })
    }
}

/// Matches every shape of the library against both segmentations of a
/// stroke, merged first.
pub fn candidates_for(
    library: &DomainLibrary,
    raw: &[Segment],
    merged: &[Segment],
) -> Vec<Interpretation> {
    let mut out = Vec::new();
    for (domain, shape) in library.iter_shapes() {
        out.extend(match_shape(&domain.name, shape, merged, SegmentationLevel::Merged));
        if raw != merged {
            out.extend(match_shape(&domain.name, shape, raw, SegmentationLevel::Raw));
        }
    }
    out
}

pub fn recognize_stroke(
    stroke: &Stroke,
    library: &DomainLibrary,
    cfg: &RecognizeConfig,
) -> RecognitionResult {
    match trace_stroke(stroke, cfg.smoothing, cfg.merge) {
        Ok(trace) => {
            let candidates = candidates_for(library, &trace.raw, &trace.merged);
            let chosen = select_interpretation(&candidates).map(|i| candidates[i].clone());
            RecognitionResult {
                stroke_id: stroke.id,
                chosen,
                candidates,
                raw_segments: trace.raw,
                merged_segments: trace.merged,
                error: None,
            }
        }
        Err(e) => RecognitionResult {
            stroke_id: stroke.id,
            chosen: None,
            candidates: Vec::new(),
            raw_segments: Vec::new(),
            merged_segments: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// Recognizes every stroke of a document independently.
pub fn recognize(
    document: &SketchDocument,
    library: &DomainLibrary,
    cfg: &RecognizeConfig,
) -> Vec<RecognitionResult> {
    document
        .strokes
        .iter()
        .map(|s| recognize_stroke(s, library, cfg))
        .collect()
}
