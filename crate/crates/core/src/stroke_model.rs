//! Points, strokes and sketch documents, plus the four per-stroke CSV tables
//! (`sketch{k}`, `sketch{k}cat`, `sketch{k}catm`, `sketch{k}segment`).

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segmentation::{DirectionCategory, Segment};

/// A captured pixel in screen coordinates (y grows downward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
}

impl From<[i64; 2]> for Point {
    fn from([x, y]: [i64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [i64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl From<(i64, i64)> for Point {
    fn from((x, y): (i64, i64)) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// The pixels captured between one pointer-down and the following pointer-up,
/// in capture order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stroke {
    pub id: u64,
    pub points: Vec<Point>,
}

impl Stroke {
    pub fn new(id: u64, points: impl IntoIterator<Item = impl Into<Point>>) -> Self {
        Stroke {
            id,
            points: points.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies the same integer offset to every point.
    pub fn translated(&self, dx: i64, dy: i64) -> Stroke {
        Stroke {
            id: self.id,
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SketchDocument {
    pub strokes: Vec<Stroke>,
    #[serde(rename = "canvas", default, skip_serializing_if = "Option::is_none")]
    pub canvas_size: Option<(u32, u32)>,
}

impl SketchDocument {
    pub fn new(strokes: Vec<Stroke>) -> Self {
        SketchDocument {
            strokes,
            canvas_size: None,
        }
    }

    /// Checks id uniqueness/positivity and that every stroke has a point.
    pub fn validate(&self) -> Result<(), DocumentError> {
        let mut seen = HashSet::new();
        for stroke in &self.strokes {
            if stroke.id == 0 {
                return Err(DocumentError::NonPositiveId);
            }
            if !seen.insert(stroke.id) {
                return Err(DocumentError::DuplicateId(stroke.id));
            }
            if stroke.points.is_empty() {
                return Err(DocumentError::EmptyStroke(stroke.id));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate stroke id {0}")]
    DuplicateId(u64),
    #[error("stroke ids must be positive")]
    NonPositiveId,
    #[error("stroke {0} has no points")]
    EmptyStroke(u64),
}

/// Removes consecutive duplicate points, keeping the first of each run.
pub fn dedup_points(stroke: &Stroke) -> Stroke {
    let mut points = stroke.points.clone();
    points.dedup();
    Stroke {
        id: stroke.id,
        points,
    }
}

/// Parses a sketch document:
/// `{"strokes": [{"id": 1, "points": [[x, y], ...]}], "canvas": [w, h]}`.
pub fn parse_document(text: &str) -> Result<SketchDocument, DocumentError> {
    let doc: SketchDocument = serde_json::from_str(text).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.validate()?;
    Ok(doc)
}

pub const POINT_HEADER: [&str; 3] = ["ID", "X", "Y"];
pub const CATEGORY_HEADER: [&str; 2] = ["ID", "CAT"];
pub const SEGMENT_HEADER: [&str; 5] = ["ID", "X1", "Y1", "X2", "Y2"];

/// Which of the four per-stroke tables a file holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Points,
    Categories,
    SmoothedCategories,
    Segments,
}

impl TableKind {
    pub const ALL: [TableKind; 4] = [
        TableKind::Points,
        TableKind::Categories,
        TableKind::SmoothedCategories,
        TableKind::Segments,
    ];

    pub fn suffix(self) -> &'static str {
        match self {
            TableKind::Points => "",
            TableKind::Categories => "cat",
            TableKind::SmoothedCategories => "catm",
            TableKind::Segments => "segment",
        }
    }

    /// File name for stroke `id`, e.g. `sketch3catm.csv`.
    pub fn file_name(self, id: u64) -> String {
        format!("sketch{}{}.csv", id, self.suffix())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableFile {
    pub name: String,
    pub contents: String,
}

/// Everything the four tables hold for one stroke.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrokeTables {
    pub stroke: Stroke,
    pub categories: Vec<DirectionCategory>,
    pub smoothed: Vec<DirectionCategory>,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("expected {expected} entries for {what}, got {actual}")]
    Inconsistent {
        what: String,
        expected: usize,
        actual: usize,
    },
    #[error("bad header: expected {expected:?}, got {actual:?}")]
    Header {
        expected: Vec<String>,
        actual: Vec<String>,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn write_rows<const N: usize>(
    header: [&str; N],
    rows: impl Iterator<Item = [i64; N]>,
) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(i64::to_string))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

fn id_of(i: usize) -> i64 {
    i as i64 + 1
}

pub fn point_table(points: &[Point]) -> String {
    write_rows(
        POINT_HEADER,
        points.iter().enumerate().map(|(i, p)| [id_of(i), p.x, p.y]),
    )
}

pub fn category_table(cats: &[DirectionCategory]) -> String {
    write_rows(
        CATEGORY_HEADER,
        cats.iter()
            .enumerate()
            .map(|(i, c)| [id_of(i), i64::from(c.value())]),
    )
}

pub fn segment_table(segments: &[Segment]) -> String {
    write_rows(
        SEGMENT_HEADER,
        segments
            .iter()
            .enumerate()
            .map(|(i, s)| [id_of(i), s.start.x, s.start.y, s.end.x, s.end.y]),
    )
}

fn check_len(what: String, expected: usize, actual: usize) -> Result<(), TableError> {
    if expected == actual {
        Ok(())
    } else {
        Err(TableError::Inconsistent {
            what,
            expected,
            actual,
        })
    }
}

/// Renders the four tables for every stroke. The per-stroke slices must be
/// parallel to `document.strokes`, and every stroke must already be
/// deduplicated so that `categories[k].len() == points - 1`.
pub fn export_tables(
    document: &SketchDocument,
    categories: &[Vec<DirectionCategory>],
    smoothed: &[Vec<DirectionCategory>],
    segments: &[Vec<Segment>],
) -> Result<Vec<TableFile>, TableError> {
    let n = document.strokes.len();
    check_len("category lists".into(), n, categories.len())?;
    check_len("smoothed category lists".into(), n, smoothed.len())?;
    check_len("segment lists".into(), n, segments.len())?;

    let mut files = Vec::with_capacity(4 * n);
    for (k, stroke) in document.strokes.iter().enumerate() {
        let pairs = stroke.points.len().saturating_sub(1);
        check_len(
            format!("categories of stroke {}", stroke.id),
            pairs,
            categories[k].len(),
        )?;
        check_len(
            format!("smoothed categories of stroke {}", stroke.id),
            pairs,
            smoothed[k].len(),
        )?;
        let tables = [
            point_table(&stroke.points),
            category_table(&categories[k]),
            category_table(&smoothed[k]),
            segment_table(&segments[k]),
        ];
        for (kind, contents) in TableKind::ALL.into_iter().zip(tables) {
            files.push(TableFile {
                name: kind.file_name(stroke.id),
                contents,
            });
        }
    }
    Ok(files)
}

/// Writes table files into `dir`, creating it if needed.
pub fn write_tables(dir: &Path, files: &[TableFile]) -> Result<(), TableError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| TableError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    for file in files {
        let path = dir.join(&file.name);
        fs::write(&path, &file.contents).map_err(io(&path))?;
    }
    Ok(())
}

fn read_rows<const N: usize>(text: &str, header: [&str; N]) -> Result<Vec<[i64; N]>, TableError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .quoting(false)
        .from_reader(text.as_bytes());
    let actual = r
        .headers()
        .map_err(|e| TableError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if actual.iter().ne(header.iter().copied()) {
        return Err(TableError::Header {
            expected: header.iter().map(|s| s.to_string()).collect(),
            actual: actual.iter().map(String::from).collect(),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| TableError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != N {
            return Err(TableError::Parse {
                line,
                message: format!("expected {N} columns, found {}", record.len()),
            });
        }
        let mut row = [0i64; N];
        for (slot, cell) in row.iter_mut().zip(record.iter()) {
            *slot = cell.trim().parse().map_err(|_| TableError::Parse {
                line,
                message: format!("not an integer: {cell:?}"),
            })?;
        }
        rows.push(row);
    }
    // IDs must run 1, 2, 3, ...
    for (i, row) in rows.iter().enumerate() {
        if row[0] != id_of(i) {
            return Err(TableError::Parse {
                line: i as u64 + 2,
                message: format!("expected ID {}, found {}", id_of(i), row[0]),
            });
        }
    }
    Ok(rows)
}

pub fn parse_point_table(text: &str) -> Result<Vec<Point>, TableError> {
    Ok(read_rows(text, POINT_HEADER)?
        .into_iter()
        .map(|[_, x, y]| Point::new(x, y))
        .collect())
}

pub fn parse_category_table(text: &str) -> Result<Vec<DirectionCategory>, TableError> {
    read_rows(text, CATEGORY_HEADER)?
        .into_iter()
        .enumerate()
        .map(|(i, [_, cat])| {
            u8::try_from(cat)
                .ok()
                .and_then(DirectionCategory::new)
                .ok_or_else(|| TableError::Parse {
                    line: i as u64 + 2,
                    message: format!("category {cat} is not in 1..=8"),
                })
        })
        .collect()
}

pub fn parse_segment_table(text: &str) -> Result<Vec<Segment>, TableError> {
    read_rows(text, SEGMENT_HEADER)?
        .into_iter()
        .map(|[id, x1, y1, x2, y2]| {
            Segment::new(id as usize, Point::new(x1, y1), Point::new(x2, y2)).ok_or_else(|| {
                TableError::Parse {
                    line: id as u64 + 1,
                    message: "segment start equals end".into(),
                }
            })
        })
        .collect()
}

/// The four table texts of one stroke.
#[derive(Debug, Clone, Copy)]
pub struct TableTexts<'a> {
    pub points: &'a str,
    pub categories: &'a str,
    pub smoothed: &'a str,
    pub segments: &'a str,
}

/// Inverse of [`export_tables`] for one stroke.
pub fn import_tables(id: u64, texts: TableTexts<'_>) -> Result<StrokeTables, TableError> {
    let points = parse_point_table(texts.points)?;
    let categories = parse_category_table(texts.categories)?;
    let smoothed = parse_category_table(texts.smoothed)?;
    let segments = parse_segment_table(texts.segments)?;
    let pairs = points.len().saturating_sub(1);
    check_len("category rows".into(), pairs, categories.len())?;
    check_len("smoothed category rows".into(), pairs, smoothed.len())?;
    Ok(StrokeTables {
        stroke: Stroke { id, points },
        categories,
        smoothed,
        segments,
    })
}

/// Reads `sketch{id}*.csv` from `dir` and imports them.
pub fn read_tables(dir: &Path, id: u64) -> Result<StrokeTables, TableError> {
    let read = |kind: TableKind| {
        let path = dir.join(kind.file_name(id));
        fs::read_to_string(&path).map_err(|source| TableError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    let [points, categories, smoothed, segments] = TableKind::ALL.map(read);
    import_tables(
        id,
        TableTexts {
            points: &points?,
            categories: &categories?,
            smoothed: &smoothed?,
            segments: &segments?,
        },
    )
}
