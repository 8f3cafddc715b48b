//! Online sketch recognition for line-based figures.
//!
//! A stroke is split into straight pieces by looking at the direction of
//! motion between adjacent pixels, the pieces are matched against
//! declaratively described shapes grouped into domains, and a matched
//! figure can be redrawn cleanly.
//!
//! The pipeline is:
//!
//! 1. [`stroke_model`]: points, strokes, sketch documents and CSV tables.
//! 2. [`segmentation`]: direction categories, pixel-set smoothing, split
//!    points, segments and collinear merging.
//! 3. [`shape_dsl`]: the domain description language and builtin library.
//! 4. [`recognizer`]: feature extraction, constraint evaluation and
//!    interpretation selection.
//! 5. [`beautifier`]: constraint-respecting redraw of a recognized figure.

pub mod beautifier;
pub mod geometry;
pub mod recognizer;
pub mod segmentation;
pub mod shape_dsl;
pub mod stroke_model;

pub use beautifier::{beautify, beautify_polyline, BeautifiedShape};
pub use recognizer::{
    extract_features, match_shape, recognize, recognize_stroke, select_interpretation,
    Interpretation, RecognitionResult, RecognizeConfig, SegmentationLevel,
};
pub use segmentation::{
    categorize, direction_category, extract_segments, merge_collinear, segment_stroke, smooth,
    split_points, DirectionCategory, MergeConfig, Segment, SmoothingConfig,
};
pub use shape_dsl::{
    builtin_library, parse_domain_file, parse_library, Constraint, DomainLibrary, DomainSpec,
    ShapeSpec,
};
pub use stroke_model::{dedup_points, parse_document, Point, SketchDocument, Stroke};
