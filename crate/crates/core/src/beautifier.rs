//! Clean redraw of a recognized figure.
//!
//! The figure is handled as a list of segment directions and lengths:
//!
//! 1. directions within 15° of a multiple of 45° are snapped to it;
//! 2. perpendicular, parallel and angle constraints are enforced in order by
//!    turning the later of the two lines about its start vertex;
//! 3. lengths get the smallest least-squares change that satisfies equal
//!    length, length ratio and (for closed shapes) exact closure together;
//! 4. the polygon is rebuilt and moved so its vertex centroid stays put.
//!
//! If the result does not satisfy every constraint of the shape (for example
//! snapping left directions that cannot close with positive lengths), the
//! beautifier falls back to spreading the closure error evenly over the
//! source vertices and marks the result as degraded.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::{signed_delta_deg, wrap_deg, Vec2};
use crate::recognizer::{eval_constraint, properties_for, segment_vertices, FeatureVector, Interpretation};
use crate::segmentation::Segment;
use crate::shape_dsl::{Constraint, Property, ShapeSpec};

pub const SNAP_STEP_DEG: f64 = 45.0;
pub const SNAP_WINDOW_DEG: f64 = 15.0;

/// Largest slack a constraint may show on beautified geometry.
pub const MAX_RESIDUAL_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeautifiedShape {
    /// Polygon corners for closed shapes, polyline points otherwise.
    pub vertices: Vec<Vec2>,
    pub closed: bool,
    pub label: String,
    pub properties: BTreeMap<String, Vec<f64>>,
    /// Set when only closure cleanup could be applied.
    pub degraded: bool,
}

impl BeautifiedShape {
    /// The drawn chain, repeating the first vertex at the end when closed.
    pub fn chain(&self) -> Vec<Vec2> {
        let mut v = self.vertices.clone();
        if self.closed {
            v.extend(self.vertices.first().copied());
        }
        v
    }
}

fn snap(deg: f64) -> f64 {
    let grid = (deg / SNAP_STEP_DEG).round() * SNAP_STEP_DEG;
    if (deg - grid).abs() <= SNAP_WINDOW_DEG {
        wrap_deg(grid)
    } else {
        wrap_deg(deg)
    }
}

fn unit(deg: f64) -> Vec2 {
    // exact axis vectors keep axis-aligned output free of trig noise
    let d = wrap_deg(deg);
    match d {
        0.0 => Vec2::new(1.0, 0.0),
        90.0 => Vec2::new(0.0, 1.0),
        180.0 => Vec2::new(-1.0, 0.0),
        270.0 => Vec2::new(0.0, -1.0),
        _ => Vec2::from_angle_deg(d),
    }
}

/// Sets direction `hi` to whichever candidate offset from direction `lo` is
/// closest to its current value.
fn turn_to_nearest(dirs: &mut [f64], lo: usize, hi: usize, offsets: &[f64]) {
    let current = dirs[hi];
    let best = offsets
        .iter()
        .map(|o| wrap_deg(dirs[lo] + o))
        .min_by(|a, b| {
            signed_delta_deg(current, *a)
                .abs()
                .total_cmp(&signed_delta_deg(current, *b).abs())
        })
        .expect("at least one candidate");
    dirs[hi] = best;
}

fn enforce_directions(dirs: &mut [f64], constraints: &[Constraint]) {
    for c in constraints {
        let Some((a, b)) = c.lines() else { continue };
        let (lo, hi) = (a.min(b) - 1, a.max(b) - 1);
        match *c {
            Constraint::Perpendicular { .. } => turn_to_nearest(dirs, lo, hi, &[90.0, -90.0]),
            Constraint::Parallel { .. } => turn_to_nearest(dirs, lo, hi, &[0.0, 180.0]),
            // interior angle is symmetric in the two lines
            Constraint::AngleBetween { degrees, .. } => {
                turn_to_nearest(dirs, lo, hi, &[180.0 + degrees, 180.0 - degrees])
            }
            _ => {}
        }
    }
}

/// Least-squares length adjustment subject to linear equality constraints.
fn adjust_lengths(lengths: &[f64], dirs: &[f64], spec: &ShapeSpec) -> Option<Vec<f64>> {
    let n = lengths.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    if spec.is_closed() {
        rows.push(dirs.iter().map(|&d| unit(d).x).collect());
        rows.push(dirs.iter().map(|&d| unit(d).y).collect());
    }
    for c in &spec.constraints {
        match *c {
            Constraint::EqualLength { a, b, .. } => {
                let mut r = vec![0.0; n];
                r[a - 1] += 1.0;
                r[b - 1] -= 1.0;
                rows.push(r);
            }
            Constraint::LengthRatio { a, b, ratio, .. } => {
                let mut r = vec![0.0; n];
                r[a - 1] += 1.0;
                r[b - 1] -= ratio;
                rows.push(r);
            }
            _ => {}
        }
    }
    let l0 = DVector::from_column_slice(lengths);
    if rows.is_empty() {
        return Some(lengths.to_vec());
    }
    let c = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let gram = &c * c.transpose();
    let pinv = gram.pseudo_inverse(1e-12).ok()?;
    let l = &l0 - c.transpose() * (pinv * (&c * &l0));
    let min_len = 1e-6 * lengths.iter().cloned().fold(0.0, f64::max);
    l.iter()
        .all(|&x| x.is_finite() && x > min_len)
        .then(|| l.iter().copied().collect())
}

fn centroid(points: &[Vec2]) -> Vec2 {
    let sum = points.iter().fold(Vec2::default(), |acc, &p| acc + p);
    sum * (1.0 / points.len() as f64)
}

fn finish(vertices: Vec<Vec2>, spec: &ShapeSpec, closed: bool, degraded: bool) -> BeautifiedShape {
    let mut chain = vertices.clone();
    if closed {
        chain.extend(vertices.first().copied());
    }
    let features = FeatureVector::from_vertices(&chain);
    let mut report: Vec<Property> = vec![Property::Angles, Property::Lengths];
    if spec.report.contains(&Property::ClosureGap) {
        report.push(Property::ClosureGap);
    }
    BeautifiedShape {
        vertices,
        closed,
        label: spec.display_label.clone(),
        properties: properties_for(&report, &features, closed),
        degraded,
    }
}

/// Every constraint of `spec` holds on `chain` with slack below
/// [`MAX_RESIDUAL_SLACK`].
pub fn satisfies_exactly(spec: &ShapeSpec, chain: &[Vec2]) -> bool {
    let features = FeatureVector::from_vertices(chain);
    spec.constraints.iter().all(|c| {
        eval_constraint(c, &features).is_ok_and(|check| check.slack < MAX_RESIDUAL_SLACK)
    })
}

/// Beautifies the chain `v0 -> ... -> vn` under `spec`.
pub fn beautify_polyline(source: &[Vec2], spec: &ShapeSpec) -> BeautifiedShape {
    let closed = spec.is_closed();
    let n = source.len().saturating_sub(1);
    if n == 0 {
        return finish(source.to_vec(), spec, false, true);
    }
    let kept = if closed { n } else { n + 1 };
    let anchor = centroid(&source[..kept]);

    let vectors: Vec<Vec2> = source.windows(2).map(|w| w[1] - w[0]).collect();
    let lengths: Vec<f64> = vectors.iter().map(|v| v.norm()).collect();
    let mut dirs: Vec<f64> = vectors.iter().map(|v| snap(v.angle_deg())).collect();
    enforce_directions(&mut dirs, &spec.constraints);

    let attempt = adjust_lengths(&lengths, &dirs, spec).map(|lengths| {
        let mut pts = Vec::with_capacity(n + 1);
        let mut at = Vec2::default();
        pts.push(at);
        for (l, d) in lengths.iter().zip(&dirs) {
            at = at + unit(*d) * *l;
            pts.push(at);
        }
        pts.truncate(kept);
        let shift = anchor - centroid(&pts);
        pts.into_iter().map(|p| p + shift).collect::<Vec<_>>()
    });

    if let Some(vertices) = attempt {
        let mut chain = vertices.clone();
        if closed {
            chain.push(vertices[0]);
        }
        if satisfies_exactly(spec, &chain) {
            return finish(vertices, spec, closed, false);
        }
    }

    // closure-only cleanup
    let vertices = if closed {
        let error = source[n] - source[0];
        (0..n)
            .map(|k| source[k] - error * (k as f64 / n as f64))
            .collect()
    } else {
        source.to_vec()
    };
    finish(vertices, spec, closed, true)
}

/// Beautifies the segments an interpretation was matched on.
pub fn beautify(_interp: &Interpretation, segments: &[Segment], spec: &ShapeSpec) -> BeautifiedShape {
    beautify_polyline(&segment_vertices(segments), spec)
}
