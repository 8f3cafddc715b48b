//! Direction-based stroke segmentation.
//!
//! Every adjacent pixel pair gets one of eight direction categories from the
//! signs of its displacement. Categories are smoothed over fixed blocks of
//! pixels ("pixel sets"), the stroke is cut wherever the smoothed category
//! changes, and nearly collinear neighbouring pieces are merged.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{point_segment_distance, Vec2};
use crate::stroke_model::{dedup_points, Point, Stroke};

/// Motion class of an adjacent pixel pair, 1 through 8.
///
/// | case | Δx  | Δy  |
/// |------|-----|-----|
/// | 1    | > 0 | = 0 |
/// | 2    | < 0 | = 0 |
/// | 3    | = 0 | > 0 |
/// | 4    | = 0 | < 0 |
/// | 5    | > 0 | < 0 |
/// | 6    | > 0 | > 0 |
/// | 7    | < 0 | > 0 |
/// | 8    | < 0 | < 0 |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct DirectionCategory(u8);

impl DirectionCategory {
    pub const ALL: [DirectionCategory; 8] = [
        DirectionCategory(1),
        DirectionCategory(2),
        DirectionCategory(3),
        DirectionCategory(4),
        DirectionCategory(5),
        DirectionCategory(6),
        DirectionCategory(7),
        DirectionCategory(8),
    ];

    pub fn new(value: u8) -> Option<Self> {
        (1..=8).contains(&value).then_some(DirectionCategory(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Category of a displacement, `None` when both components are zero.
    pub fn from_displacement(dx: i64, dy: i64) -> Option<Self> {
        use std::cmp::Ordering::*;
        let v = match (dx.cmp(&0), dy.cmp(&0)) {
            (Equal, Equal) => return None,
            (Greater, Equal) => 1,
            (Less, Equal) => 2,
            (Equal, Greater) => 3,
            (Equal, Less) => 4,
            (Greater, Less) => 5,
            (Greater, Greater) => 6,
            (Less, Greater) => 7,
            (Less, Less) => 8,
        };
        Some(DirectionCategory(v))
    }

    /// The category of the reversed motion.
    pub fn opposite(self) -> Self {
        DirectionCategory(match self.0 {
            1 => 2,
            2 => 1,
            3 => 4,
            4 => 3,
            5 => 7,
            7 => 5,
            6 => 8,
            _ => 6,
        })
    }
}

impl TryFrom<u8> for DirectionCategory {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        DirectionCategory::new(v).ok_or_else(|| format!("direction category {v} not in 1..=8"))
    }
}

impl From<DirectionCategory> for u8 {
    fn from(c: DirectionCategory) -> u8 {
        c.0
    }
}

impl fmt::Display for DirectionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A straight piece of a stroke. `index` is 1-based within its list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub start: Point,
    pub end: Point,
}

impl Segment {
    /// `None` when `start == end`.
    pub fn new(index: usize, start: Point, end: Point) -> Option<Self> {
        (start != end).then_some(Segment { index, start, end })
    }

    pub fn length(&self) -> f64 {
        ((self.end.x - self.start.x) as f64).hypot((self.end.y - self.start.y) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub block_size: usize,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig { block_size: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeConfig {
    /// Pixels.
    pub max_deviation: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig { max_deviation: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentationError {
    #[error("zero displacement at {0}")]
    ZeroDisplacement(Point),
    #[error("stroke has {0} distinct points, at least 2 are needed")]
    TooShort(usize),
    #[error("empty category list")]
    EmptyInput,
    #[error("block size must be at least 1")]
    InvalidBlockSize,
    #[error("invalid split indices {splits:?} for a stroke of {points} points")]
    InvalidSplits { splits: Vec<usize>, points: usize },
    #[error("segment {0} would start and end at the same point")]
    DegenerateSegment(usize),
}

pub fn direction_category(p1: Point, p2: Point) -> Result<DirectionCategory, SegmentationError> {
    DirectionCategory::from_displacement(p2.x - p1.x, p2.y - p1.y)
        .ok_or(SegmentationError::ZeroDisplacement(p1))
}

/// One category per adjacent point pair. The stroke must be deduplicated.
pub fn categorize(stroke: &Stroke) -> Result<Vec<DirectionCategory>, SegmentationError> {
    if stroke.points.len() < 2 {
        return Err(SegmentationError::TooShort(stroke.points.len()));
    }
    stroke
        .points
        .windows(2)
        .map(|w| direction_category(w[0], w[1]))
        .collect()
}

/// Most frequent category of a block. Ties go to the block's middle element
/// if it is among the tied values, otherwise to the smallest value.
fn block_mode(block: &[DirectionCategory]) -> DirectionCategory {
    let mut counts = [0usize; 9];
    for c in block {
        counts[c.0 as usize] += 1;
    }
    let best = *counts.iter().max().expect("nine counters");
    let middle = block[block.len() / 2];
    if counts[middle.0 as usize] == best {
        return middle;
    }
    let v = (1..=8).find(|&v| counts[v] == best).expect("nonempty block");
    DirectionCategory(v as u8)
}

/// Replaces every category by the mode of its block of `block_size`
/// consecutive entries; the last block may be shorter.
pub fn smooth(
    categories: &[DirectionCategory],
    cfg: SmoothingConfig,
) -> Result<Vec<DirectionCategory>, SegmentationError> {
    if categories.is_empty() {
        return Err(SegmentationError::EmptyInput);
    }
    if cfg.block_size == 0 {
        return Err(SegmentationError::InvalidBlockSize);
    }
    let mut out = Vec::with_capacity(categories.len());
    for block in categories.chunks(cfg.block_size) {
        let mode = block_mode(block);
        out.extend(std::iter::repeat_n(mode, block.len()));
    }
    Ok(out)
}

/// Indices `i >= 1` where the category differs from the one before it. A
/// split at category index `i` cuts the stroke at point `i`.
pub fn split_points(smoothed: &[DirectionCategory]) -> Vec<usize> {
    smoothed
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i + 1)
        .collect()
}

/// Cuts the stroke at the given point indices, which must be strictly
/// increasing and interior.
pub fn extract_segments(
    stroke: &Stroke,
    splits: &[usize],
) -> Result<Vec<Segment>, SegmentationError> {
    let n = stroke.points.len();
    if n < 2 {
        return Err(SegmentationError::TooShort(n));
    }
    let valid = splits.iter().all(|&s| s > 0 && s < n - 1)
        && splits.windows(2).all(|w| w[0] < w[1]);
    if !valid {
        return Err(SegmentationError::InvalidSplits {
            splits: splits.to_vec(),
            points: n,
        });
    }
    let bounds = std::iter::once(0)
        .chain(splits.iter().copied())
        .chain(std::iter::once(n - 1))
        .collect::<Vec<_>>();
    bounds
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            Segment::new(k + 1, stroke.points[w[0]], stroke.points[w[1]])
                .ok_or(SegmentationError::DegenerateSegment(k + 1))
        })
        .collect()
}

fn to_vec2(p: Point) -> Vec2 {
    Vec2::new(p.x as f64, p.y as f64)
}

/// Greedy forward merge: each run of consecutive segments is extended while
/// every interior vertex stays within `max_deviation` of the run's chord
/// and the chord stays non-degenerate.
pub fn merge_collinear(segments: &[Segment], cfg: MergeConfig) -> Vec<Segment> {
    let mut out = Vec::with_capacity(segments.len());
    let mut i = 0;
    while i < segments.len() {
        let start = segments[i].start;
        let mut j = i;
        while j + 1 < segments.len() {
            let end = segments[j + 1].end;
            if end == start {
                break;
            }
            let (a, b) = (to_vec2(start), to_vec2(end));
            let fits = segments[i..=j]
                .iter()
                .all(|s| point_segment_distance(to_vec2(s.end), a, b) <= cfg.max_deviation);
            if !fits {
                break;
            }
            j += 1;
        }
        out.push(Segment {
            index: out.len() + 1,
            start,
            end: segments[j].end,
        });
        i = j + 1;
    }
    out
}

/// Drops split indices that would produce a zero-length segment (a piece
/// that returns to its own starting pixel).
fn drop_degenerate_splits(points: &[Point], splits: &[usize]) -> Vec<usize> {
    let last = points.len() - 1;
    let mut kept: Vec<usize> = Vec::with_capacity(splits.len());
    let mut from = 0;
    for &s in splits {
        if points[s] != points[from] {
            kept.push(s);
            from = s;
        }
    }
    while let Some(&s) = kept.last() {
        if points[s] == points[last] {
            kept.pop();
        } else {
            break;
        }
    }
    kept
}

/// Intermediate products of segmenting one stroke.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationTrace {
    /// The deduplicated stroke.
    pub stroke: Stroke,
    pub categories: Vec<DirectionCategory>,
    pub smoothed: Vec<DirectionCategory>,
    pub splits: Vec<usize>,
    /// Segments between change points, before merging.
    pub raw: Vec<Segment>,
    pub merged: Vec<Segment>,
}

/// Runs the whole pipeline and keeps every intermediate result.
pub fn trace_stroke(
    stroke: &Stroke,
    smoothing: SmoothingConfig,
    merge: MergeConfig,
) -> Result<SegmentationTrace, SegmentationError> {
    let stroke = dedup_points(stroke);
    let categories = categorize(&stroke)?;
    let smoothed = smooth(&categories, smoothing)?;
    let splits = drop_degenerate_splits(&stroke.points, &split_points(&smoothed));
    let raw = extract_segments(&stroke, &splits)?;
    let merged = merge_collinear(&raw, merge);
    Ok(SegmentationTrace {
        stroke,
        categories,
        smoothed,
        splits,
        raw,
        merged,
    })
}

/// Deduplicate, categorize, smooth, split, extract and merge.
pub fn segment_stroke(
    stroke: &Stroke,
    smoothing: SmoothingConfig,
    merge: MergeConfig,
) -> Result<Vec<Segment>, SegmentationError> {
    trace_stroke(stroke, smoothing, merge).map(|t| t.merged)
}
