#![allow(dead_code)]

use sketchrec::geometry::Vec2;
use sketchrec::shape_dsl::{Constraint, DomainLibrary, GapTolerance};
use sketchrec::{DirectionCategory, Point, Segment, Stroke};

/// First 21 captured pixels of the sample rectangle stroke.
pub const SAMPLE_POINTS: [(i64, i64); 21] = [
    (102, 30),
    (102, 34),
    (102, 41),
    (100, 59),
    (99, 77),
    (99, 80),
    (99, 83),
    (99, 85),
    (99, 86),
    (99, 87),
    (99, 89),
    (99, 92),
    (99, 94),
    (99, 96),
    (99, 100),
    (99, 103),
    (99, 105),
    (99, 108),
    (99, 110),
    (99, 112),
    (99, 114),
];

pub const RAW_CATEGORY_COLUMN: [u8; 20] = [4, 4, 6, 6, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4];
pub const SMOOTHED_CATEGORY_COLUMN: [u8; 20] = [4; 20];

pub const SAMPLE_SEGMENT_TABLE: &str = "ID,X1,Y1,X2,Y2
1,102,30,99,123
2,99,123,140,125
3,140,125,150,130
4,150,130,171,129
5,171,129,162,45
6,162,45,160,30
7,160,30,98,27
";

pub const SAMPLE_MERGED_CHAIN: [(i64, i64); 5] =
    [(102, 30), (99, 123), (171, 129), (160, 30), (98, 27)];

pub fn cats(v: &[u8]) -> Vec<DirectionCategory> {
    v.iter().map(|&c| DirectionCategory::new(c).unwrap()).collect()
}

pub fn chain(points: &[(i64, i64)]) -> Vec<Segment> {
    points
        .windows(2)
        .enumerate()
        .map(|(i, w)| Segment::new(i + 1, w[0].into(), w[1].into()).unwrap())
        .collect()
}

/// Appends points reached by the given steps.
fn walk(points: &mut Vec<(i64, i64)>, steps: &[(i64, i64)]) {
    for &(dx, dy) in steps {
        let &(x, y) = points.last().unwrap();
        points.push((x + dx, y + dy));
    }
}

/// A full 66-pixel stroke that starts with the 21 captured pixels above and
/// continues through the seven segment rows, with every corner on a
/// pixel-set boundary so the raw change points land on the table rows.
pub fn sample_stroke() -> Stroke {
    let mut p: Vec<(i64, i64)> = SAMPLE_POINTS.to_vec();
    // down to (99,123)
    walk(&mut p, &[(0, 2), (0, 2), (0, 2), (0, 2), (0, 1)]);
    // right to (140,125)
    walk(
        &mut p,
        &[(4, 0), (4, 0), (4, 0), (4, 0), (4, 0), (4, 0), (4, 0), (4, 0), (4, 1), (5, 1)],
    );
    // to (150,130)
    walk(&mut p, &[(2, 1); 5]);
    // to (171,129)
    walk(&mut p, &[(4, 0), (4, 0), (4, 0), (4, 0), (5, -1)]);
    // up to (162,45)
    walk(&mut p, &[(-2, -17), (-2, -17), (-2, -17), (-2, -17), (-1, -16)]);
    // to (160,30)
    walk(&mut p, &[(0, -3), (0, -3), (-1, -3), (0, -3), (-1, -3)]);
    // left to (98,27)
    walk(
        &mut p,
        &[
            (-6, -1),
            (-6, 0),
            (-6, 0),
            (-6, 0),
            (-6, 0),
            (-7, -1),
            (-7, -1),
            (-6, 0),
            (-6, 0),
            (-6, 0),
        ],
    );
    Stroke::new(1, p)
}

/// A stroke around `corners` (closing back to the first one when `close`),
/// `steps` pixels per side with rounded interpolation.
pub fn polygon_stroke(id: u64, corners: &[(i64, i64)], steps: usize, close: bool) -> Stroke {
    let mut ring = corners.to_vec();
    if close {
        ring.push(corners[0]);
    }
    let mut pts = vec![ring[0]];
    for w in ring.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            pts.push((
                (x0 as f64 + (x1 - x0) as f64 * t).round() as i64,
                (y0 as f64 + (y1 - y0) as f64 * t).round() as i64,
            ));
        }
    }
    Stroke::new(id, pts)
}

pub fn rectangle_stroke(id: u64, x: i64, y: i64, w: i64, h: i64) -> Stroke {
    polygon_stroke(id, &[(x, y), (x + w, y), (x + w, y + h), (x, y + h)], 5, true)
}

pub fn triangle_stroke(id: u64, x: i64, y: i64) -> Stroke {
    polygon_stroke(id, &[(x, y), (x + 100, y), (x + 50, y + 80)], 5, true)
}

/// Up-down zigzag with `corners` interior corners.
pub fn zigzag_stroke(id: u64, corners: usize) -> Stroke {
    let ends: Vec<(i64, i64)> = (0..=corners + 1)
        .map(|i| (40 * i as i64, if i % 2 == 0 { 0 } else { 60 }))
        .collect();
    polygon_stroke(id, &ends, 5, false)
}

/// An L whose legs each carry a small kink: four raw pieces that merge into
/// two lines.
pub fn kinked_l_stroke(id: u64) -> Stroke {
    let mut p = vec![(0, 0)];
    walk(&mut p, &[(0, 10); 5]);
    walk(&mut p, &[(1, 10); 5]);
    walk(&mut p, &[(10, 0); 5]);
    walk(&mut p, &[(10, 1); 5]);
    Stroke::new(id, p)
}

pub fn to_vec2(p: Point) -> Vec2 {
    Vec2::new(p.x as f64, p.y as f64)
}

// ---------------------------------------------------------------------------
// brute-force matcher, written independently of the recognizer

fn dir(segments: &[Segment], line: usize) -> (f64, f64) {
    let s = &segments[line - 1];
    ((s.end.x - s.start.x) as f64, (s.end.y - s.start.y) as f64)
}

fn len(segments: &[Segment], line: usize) -> f64 {
    let (x, y) = dir(segments, line);
    (x * x + y * y).sqrt()
}

/// Angle between two direction vectors in degrees via acos of the
/// normalized dot product.
fn acos_angle(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = (a.0 * b.0 + a.1 * b.1) / ((a.0 * a.0 + a.1 * a.1).sqrt() * (b.0 * b.0 + b.1 * b.1).sqrt());
    d.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Whether every constraint holds, evaluated from scratch.
pub fn oracle_satisfied(c: &Constraint, segments: &[Segment]) -> bool {
    let slop = 1e-7;
    match *c {
        Constraint::Closed { gap } => {
            let first = segments[0].start;
            let last = segments[segments.len() - 1].end;
            let g = (((last.x - first.x).pow(2) + (last.y - first.y).pow(2)) as f64).sqrt();
            let xs = segments.iter().flat_map(|s| [s.start.x, s.end.x]);
            let ys = segments.iter().flat_map(|s| [s.start.y, s.end.y]);
            let w = (xs.clone().max().unwrap() - xs.min().unwrap()) as f64;
            let h = (ys.clone().max().unwrap() - ys.min().unwrap()) as f64;
            let diag = (w * w + h * h).sqrt();
            let allowed = match gap {
                GapTolerance::Adaptive { pixels, fraction } => pixels.max(fraction * diag),
                GapTolerance::Pixels(p) => p,
                GapTolerance::Fraction(f) => f * diag,
            };
            g <= allowed + slop
        }
        Constraint::Perpendicular { a, b, tol_deg } => {
            let ang = acos_angle(dir(segments, a), dir(segments, b));
            (ang - 90.0).abs() <= tol_deg + slop
        }
        Constraint::Parallel { a, b, tol_deg } => {
            let ang = acos_angle(dir(segments, a), dir(segments, b));
            ang.min(180.0 - ang) <= tol_deg + slop
        }
        Constraint::AngleBetween {
            a,
            b,
            degrees,
            tol_deg,
        } => {
            let (ax, ay) = dir(segments, a);
            let ang = acos_angle((-ax, -ay), dir(segments, b));
            (ang - degrees).abs() <= tol_deg + slop
        }
        Constraint::EqualLength { a, b, tol_ratio } => {
            let (la, lb) = (len(segments, a), len(segments, b));
            (la - lb).abs() <= tol_ratio * la.max(lb) + slop
        }
        Constraint::LengthRatio {
            a,
            b,
            ratio,
            tol_ratio,
        } => {
            let r = len(segments, a) / len(segments, b);
            (r - ratio).abs() <= tol_ratio * ratio + slop
        }
    }
}

/// Every (domain, shape) whose line range and constraints accept `segments`.
pub fn oracle_matches(library: &DomainLibrary, segments: &[Segment]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for d in &library.domains {
        for s in &d.shapes {
            let n = segments.len();
            if n >= s.lines.min
                && n <= s.lines.max
                && s.constraints.iter().all(|c| oracle_satisfied(c, segments))
            {
                out.push((d.name.clone(), s.name.clone()));
            }
        }
    }
    out
}
