//! The domain description language.
//!
//! ```text
//! library    := domain+
//! domain     := "domain" IDENT "{" shape+ "}"
//! shape      := "shape" IDENT "{" "lines" INT [".." INT] ";"
//!               "constraints" "{" constraint* "}"
//!               ["display" STRING ";"] ["report" IDENT ("," IDENT)* ";"] "}"
//! constraint := ( "closed" | "perpendicular" INT INT | "parallel" INT INT
//!               | "equal_length" INT INT | "angle" INT INT NUMBER
//!               | "length_ratio" INT INT NUMBER ) ["tol" NUMBER] ";"
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Line indices are
//! 1-based in drawing order of the merged segments.
//!
//! Omitted tolerances are filled in at parse time, so a parsed spec carries
//! every number the matcher will use: ±15° for perpendicular, parallel and
//! angle, ±20% for equal_length and length_ratio, and for `closed` a gap of
//! at most max(10 px, 10% of the bounding-box diagonal). An explicit
//! `closed tol X` is read as pixels when X >= 1 and as a fraction of the
//! bounding-box diagonal otherwise.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_ANGLE_TOL_DEG: f64 = 15.0;
pub const DEFAULT_LENGTH_TOL_RATIO: f64 = 0.2;
pub const DEFAULT_GAP_PX: f64 = 10.0;
pub const DEFAULT_GAP_FRACTION: f64 = 0.1;

const BUILTIN_SOURCE: &str = include_str!("../data/builtin.dsl");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapTolerance {
    /// Allowed gap is `max(pixels, fraction * bbox_diagonal)`.
    Adaptive { pixels: f64, fraction: f64 },
    Pixels(f64),
    Fraction(f64),
}

impl Default for GapTolerance {
    fn default() -> Self {
        GapTolerance::Adaptive {
            pixels: DEFAULT_GAP_PX,
            fraction: DEFAULT_GAP_FRACTION,
        }
    }
}

impl GapTolerance {
    pub fn allowed_gap(&self, bbox_diagonal: f64) -> f64 {
        match *self {
            GapTolerance::Adaptive { pixels, fraction } => pixels.max(fraction * bbox_diagonal),
            GapTolerance::Pixels(px) => px,
            GapTolerance::Fraction(f) => f * bbox_diagonal,
        }
    }

    fn from_tol(tol: f64) -> Self {
        if tol >= 1.0 {
            GapTolerance::Pixels(tol)
        } else {
            GapTolerance::Fraction(tol)
        }
    }
}

/// A geometric relation between merged segments (1-based line indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    Closed { gap: GapTolerance },
    Perpendicular { a: usize, b: usize, tol_deg: f64 },
    Parallel { a: usize, b: usize, tol_deg: f64 },
    EqualLength { a: usize, b: usize, tol_ratio: f64 },
    /// The angle formed where line `a` would hand over to line `b`, i.e.
    /// the interior angle for adjacent lines.
    AngleBetween { a: usize, b: usize, degrees: f64, tol_deg: f64 },
    /// `length(a) / length(b) == ratio`.
    LengthRatio { a: usize, b: usize, ratio: f64, tol_ratio: f64 },
}

impl Constraint {
    pub fn keyword(&self) -> &'static str {
        match self {
            Constraint::Closed { .. } => "closed",
            Constraint::Perpendicular { .. } => "perpendicular",
            Constraint::Parallel { .. } => "parallel",
            Constraint::EqualLength { .. } => "equal_length",
            Constraint::AngleBetween { .. } => "angle",
            Constraint::LengthRatio { .. } => "length_ratio",
        }
    }

    /// The two line indices, `None` for `closed`.
    pub fn lines(&self) -> Option<(usize, usize)> {
        match *self {
            Constraint::Closed { .. } => None,
            Constraint::Perpendicular { a, b, .. }
            | Constraint::Parallel { a, b, .. }
            | Constraint::EqualLength { a, b, .. }
            | Constraint::AngleBetween { a, b, .. }
            | Constraint::LengthRatio { a, b, .. } => Some((a, b)),
        }
    }

    fn problem(&self, max_lines: usize) -> Option<String> {
        if let Some((a, b)) = self.lines() {
            if a == 0 || b == 0 || a > max_lines || b > max_lines {
                return Some(format!(
                    "{}: line index out of range 1..={max_lines}",
                    self.keyword()
                ));
            }
            if a == b {
                return Some(format!("{}: a line cannot be related to itself", self.keyword()));
            }
        }
        let tol = match *self {
            Constraint::Closed { gap } => match gap {
                GapTolerance::Adaptive { pixels, fraction } => pixels.min(fraction),
                GapTolerance::Pixels(t) | GapTolerance::Fraction(t) => t,
            },
            Constraint::Perpendicular { tol_deg, .. }
            | Constraint::Parallel { tol_deg, .. }
            | Constraint::AngleBetween { tol_deg, .. } => tol_deg,
            Constraint::EqualLength { tol_ratio, .. } | Constraint::LengthRatio { tol_ratio, .. } => {
                tol_ratio
            }
        };
        if !(tol >= 0.0 && tol.is_finite()) {
            return Some(format!("{}: tolerance must be non-negative", self.keyword()));
        }
        match *self {
            Constraint::LengthRatio { ratio, .. } if !(ratio > 0.0 && ratio.is_finite()) => {
                Some("length_ratio: ratio must be positive".into())
            }
            Constraint::AngleBetween { degrees, .. } if !(0.0..=180.0).contains(&degrees) => {
                Some("angle: degrees must be within 0..=180".into())
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Angles,
    Lengths,
    ClosureGap,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Angles => "angles",
            Property::Lengths => "lengths",
            Property::ClosureGap => "closure_gap",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "angles" => Some(Property::Angles),
            "lengths" => Some(Property::Lengths),
            "closure_gap" => Some(Property::ClosureGap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRange {
    pub min: usize,
    pub max: usize,
}

impl LineRange {
    pub fn exactly(n: usize) -> Self {
        LineRange { min: n, max: n }
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.min..=self.max).contains(&n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub name: String,
    pub lines: LineRange,
    pub constraints: Vec<Constraint>,
    pub display_label: String,
    pub report: Vec<Property>,
}

impl ShapeSpec {
    pub fn is_closed(&self) -> bool {
        self.constraints
            .iter()
            .any(|c| matches!(c, Constraint::Closed { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub name: String,
    pub shapes: Vec<ShapeSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DomainLibrary {
    pub domains: Vec<DomainSpec>,
}

impl DomainLibrary {
    pub fn shape(&self, domain: &str, shape: &str) -> Option<&ShapeSpec> {
        self.domains
            .iter()
            .find(|d| d.name == domain)?
            .shapes
            .iter()
            .find(|s| s.name == shape)
    }

    /// Every shape with its domain, in library order.
    pub fn iter_shapes(&self) -> impl Iterator<Item = (&DomainSpec, &ShapeSpec)> {
        self.domains
            .iter()
            .flat_map(|d| d.shapes.iter().map(move |s| (d, s)))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown {kind} `{word}`")]
    Vocabulary {
        line: usize,
        column: usize,
        kind: &'static str,
        word: String,
    },
    #[error("{line}:{column}: {message}")]
    Validation {
        line: usize,
        column: usize,
        message: String,
    },
}

impl DslError {
    pub fn line(&self) -> usize {
        match self {
            DslError::Syntax { line, .. }
            | DslError::Vocabulary { line, .. }
            | DslError::Validation { line, .. } => *line,
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Dsl {
        path: String,
        #[source]
        source: DslError,
    },
    #[error("{0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number { text: String, value: f64 },
    Str(String),
    LBrace,
    RBrace,
    Semi,
    Comma,
    DotDot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number { text, .. } => write!(f, "number {text}"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, DslError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| DslError::Syntax {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i);
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '{' | '}' | ';' | ',' => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ';' => Tok::Semi,
                    _ => Tok::Comma,
                };
                advance(1, &mut i);
                out.push(Spanned {
                    tok,
                    line: start_line,
                    column: start_col,
                });
                continue;
            }
            '.' if chars.get(i + 1) == Some(&'.') => {
                advance(2, &mut i);
                out.push(Spanned {
                    tok: Tok::DotDot,
                    line: start_line,
                    column: start_col,
                });
                continue;
            }
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => {
                            return Err(err(start_line, start_col, "unterminated string".into()))
                        }
                        Some('"') => break,
                        Some('\\') => {
                            match chars.get(j + 1) {
                                Some(&e @ ('"' | '\\')) => s.push(e),
                                Some('n') => s.push('\n'),
                                _ => {
                                    return Err(err(line, col + (j - i), "bad escape".into()))
                                }
                            }
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                advance(j + 1 - i, &mut i);
                out.push(Spanned {
                    tok: Tok::Str(s),
                    line: start_line,
                    column: start_col,
                });
                continue;
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                // a fraction needs a digit after the dot, so `4..6` lexes as 4 .. 6
                if chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(char::is_ascii_digit)
                {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let text: String = chars[i..j].iter().collect();
                let value = text
                    .parse::<f64>()
                    .map_err(|_| err(start_line, start_col, format!("bad number {text:?}")))?;
                advance(j - i, &mut i);
                out.push(Spanned {
                    tok: Tok::Number { text, value },
                    line: start_line,
                    column: start_col,
                });
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                advance(j - i, &mut i);
                out.push(Spanned {
                    tok: Tok::Ident(word),
                    line: start_line,
                    column: start_col,
                });
                continue;
            }
            other => {
                return Err(err(
                    start_line,
                    start_col,
                    format!("unexpected character {other:?}"),
                ))
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// parser

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(at: &Spanned, message: String) -> DslError {
        DslError::Syntax {
            line: at.line,
            column: at.column,
            message,
        }
    }

    fn validation(at: &Spanned, message: String) -> DslError {
        DslError::Validation {
            line: at.line,
            column: at.column,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<Spanned, DslError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(Self::syntax(&t, format!("expected {want}, found {}", t.tok)))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Spanned, DslError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(w) if w == kw => Ok(t),
            other => Err(Self::syntax(&t, format!("expected `{kw}`, found {other}"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(w) if w == kw)
    }

    fn ident(&mut self) -> Result<(String, Spanned), DslError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(w) => Ok((w.clone(), t)),
            other => Err(Self::syntax(&t, format!("expected a name, found {other}"))),
        }
    }

    fn number(&mut self) -> Result<(f64, Spanned), DslError> {
        let t = self.next();
        match t.tok {
            Tok::Number { value, .. } => Ok((value, t)),
            ref other => Err(Self::syntax(&t, format!("expected a number, found {other}"))),
        }
    }

    fn int(&mut self) -> Result<(usize, Spanned), DslError> {
        let t = self.next();
        match &t.tok {
            Tok::Number { text, .. } => match text.parse::<usize>() {
                Ok(v) => Ok((v, t)),
                Err(_) => Err(Self::syntax(
                    &t,
                    format!("expected a non-negative integer, found {text}"),
                )),
            },
            other => Err(Self::syntax(&t, format!("expected an integer, found {other}"))),
        }
    }

    fn library(&mut self) -> Result<DomainLibrary, DslError> {
        let mut domains: Vec<DomainSpec> = Vec::new();
        loop {
            let at = self.peek().clone();
            let domain = self.domain()?;
            if domains.iter().any(|d| d.name == domain.name) {
                return Err(Self::validation(
                    &at,
                    format!("duplicate domain `{}`", domain.name),
                ));
            }
            domains.push(domain);
            if self.peek().tok == Tok::Eof {
                return Ok(DomainLibrary { domains });
            }
        }
    }

    fn domain(&mut self) -> Result<DomainSpec, DslError> {
        self.keyword("domain")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut shapes: Vec<ShapeSpec> = Vec::new();
        loop {
            let at = self.peek().clone();
            let shape = self.shape()?;
            if shapes.iter().any(|s| s.name == shape.name) {
                return Err(Self::validation(
                    &at,
                    format!("duplicate shape `{}` in domain `{name}`", shape.name),
                ));
            }
            shapes.push(shape);
            if self.peek().tok == Tok::RBrace {
                self.next();
                return Ok(DomainSpec { name, shapes });
            }
        }
    }

    fn shape(&mut self) -> Result<ShapeSpec, DslError> {
        self.keyword("shape")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;

        let lines_at = self.keyword("lines")?;
        let (min, _) = self.int()?;
        let max = if self.peek().tok == Tok::DotDot {
            self.next();
            self.int()?.0
        } else {
            min
        };
        if min < 1 || min > max {
            return Err(Self::validation(
                &lines_at,
                format!("line range {min}..{max} must satisfy 1 <= min <= max"),
            ));
        }
        self.expect(Tok::Semi)?;

        self.keyword("constraints")?;
        self.expect(Tok::LBrace)?;
        let mut constraints = Vec::new();
        while self.peek().tok != Tok::RBrace {
            constraints.push(self.constraint(max)?);
        }
        self.next();

        let mut display_label = name.clone();
        if self.at_keyword("display") {
            self.next();
            let t = self.next();
            match t.tok {
                Tok::Str(s) => display_label = s,
                ref other => {
                    return Err(Self::syntax(&t, format!("expected a string, found {other}")))
                }
            }
            self.expect(Tok::Semi)?;
        }

        let mut report = Vec::new();
        if self.at_keyword("report") {
            self.next();
            loop {
                let (word, at) = self.ident()?;
                let prop = Property::from_name(&word).ok_or(DslError::Vocabulary {
                    line: at.line,
                    column: at.column,
                    kind: "property",
                    word,
                })?;
                if !report.contains(&prop) {
                    report.push(prop);
                }
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect(Tok::Semi)?;
        }
        self.expect(Tok::RBrace)?;
        Ok(ShapeSpec {
            name,
            lines: LineRange { min, max },
            constraints,
            display_label,
            report,
        })
    }

    fn constraint(&mut self, max_lines: usize) -> Result<Constraint, DslError> {
        let (word, at) = self.ident()?;
        let pair = |p: &mut Parser| -> Result<(usize, usize), DslError> {
            Ok((p.int()?.0, p.int()?.0))
        };
        let mut c = match word.as_str() {
            "closed" => Constraint::Closed {
                gap: GapTolerance::default(),
            },
            "perpendicular" => {
                let (a, b) = pair(self)?;
                Constraint::Perpendicular {
                    a,
                    b,
                    tol_deg: DEFAULT_ANGLE_TOL_DEG,
                }
            }
            "parallel" => {
                let (a, b) = pair(self)?;
                Constraint::Parallel {
                    a,
                    b,
                    tol_deg: DEFAULT_ANGLE_TOL_DEG,
                }
            }
            "equal_length" => {
                let (a, b) = pair(self)?;
                Constraint::EqualLength {
                    a,
                    b,
                    tol_ratio: DEFAULT_LENGTH_TOL_RATIO,
                }
            }
            "angle" => {
                let (a, b) = pair(self)?;
                Constraint::AngleBetween {
                    a,
                    b,
                    degrees: self.number()?.0,
                    tol_deg: DEFAULT_ANGLE_TOL_DEG,
                }
            }
            "length_ratio" => {
                let (a, b) = pair(self)?;
                Constraint::LengthRatio {
                    a,
                    b,
                    ratio: self.number()?.0,
                    tol_ratio: DEFAULT_LENGTH_TOL_RATIO,
                }
            }
            _ => {
                return Err(DslError::Vocabulary {
                    line: at.line,
                    column: at.column,
                    kind: "constraint",
                    word,
                })
            }
        };
        if self.at_keyword("tol") {
            self.next();
            let (tol, _) = self.number()?;
            match &mut c {
                Constraint::Closed { gap } => *gap = GapTolerance::from_tol(tol),
                Constraint::Perpendicular { tol_deg, .. }
                | Constraint::Parallel { tol_deg, .. }
                | Constraint::AngleBetween { tol_deg, .. } => *tol_deg = tol,
                Constraint::EqualLength { tol_ratio, .. }
                | Constraint::LengthRatio { tol_ratio, .. } => *tol_ratio = tol,
            }
        }
        self.expect(Tok::Semi)?;
        if let Some(problem) = c.problem(max_lines) {
            return Err(Self::validation(&at, problem));
        }
        Ok(c)
    }
}

/// Parses one or more domains.
pub fn parse_library(text: &str) -> Result<DomainLibrary, DslError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    p.library()
}

/// Parses a file that must declare exactly one domain.
pub fn parse_domain_file(text: &str) -> Result<DomainSpec, DslError> {
    let mut lib = parse_library(text)?;
    if lib.domains.len() != 1 {
        return Err(DslError::Validation {
            line: 1,
            column: 1,
            message: format!("expected exactly one domain, found {}", lib.domains.len()),
        });
    }
    Ok(lib.domains.remove(0))
}

/// The bundled Flowchart and Mathematics domains.
pub fn builtin_library() -> DomainLibrary {
    parse_library(BUILTIN_SOURCE).expect("bundled domain library parses")
}

/// Loads every `*.dsl` file in `dir`, in file-name order, into one library.
pub fn load_library_dir(dir: &Path) -> Result<DomainLibrary, LoadError> {
    let io = |source| LoadError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.extension().is_some_and(|e| e == "dsl") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut library = DomainLibrary::default();
    for path in paths {
        let shown = path.display().to_string();
        let text = fs::read_to_string(&path).map_err(|source| LoadError::Io {
            path: shown.clone(),
            source,
        })?;
        let parsed = parse_library(&text).map_err(|source| LoadError::Dsl {
            path: shown,
            source,
        })?;
        library.domains.extend(parsed.domains);
    }
    let diagnostics = validate(&library);
    if let Some(first) = diagnostics.first() {
        return Err(LoadError::Invalid(first.to_string()));
    }
    if library.domains.is_empty() {
        return Err(LoadError::Invalid(format!(
            "no .dsl files in {}",
            dir.display()
        )));
    }
    Ok(library)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// `domain` or `domain/shape`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Reports every invariant violation in a library; empty when it is sound.
pub fn validate(library: &DomainLibrary) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut domain_names = HashSet::new();
    for domain in &library.domains {
        let diag = |path: String, message: String| Diagnostic { path, message };
        if !domain_names.insert(domain.name.as_str()) {
            out.push(diag(domain.name.clone(), "duplicate domain name".into()));
        }
        if domain.shapes.is_empty() {
            out.push(diag(domain.name.clone(), "domain has no shapes".into()));
        }
        let mut shape_names = HashSet::new();
        for shape in &domain.shapes {
            let path = format!("{}/{}", domain.name, shape.name);
            if !shape_names.insert(shape.name.as_str()) {
                out.push(diag(path.clone(), "duplicate shape name".into()));
            }
            let LineRange { min, max } = shape.lines;
            if min < 1 || min > max {
                out.push(diag(
                    path.clone(),
                    format!("line range {min}..{max} must satisfy 1 <= min <= max"),
                ));
            }
            for c in &shape.constraints {
                if let Some(problem) = c.problem(max) {
                    out.push(diag(path.clone(), problem));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// printer

fn write_tol_suffix(f: &mut fmt::Formatter<'_>, tol: f64, default: f64) -> fmt::Result {
    if tol != default {
        write!(f, " tol {tol}")?;
    }
    Ok(())
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())?;
        match *self {
            Constraint::Closed { gap } => match gap {
                GapTolerance::Adaptive { .. } => {}
                GapTolerance::Pixels(t) | GapTolerance::Fraction(t) => write!(f, " tol {t}")?,
            },
            Constraint::Perpendicular { a, b, tol_deg } | Constraint::Parallel { a, b, tol_deg } => {
                write!(f, " {a} {b}")?;
                write_tol_suffix(f, tol_deg, DEFAULT_ANGLE_TOL_DEG)?;
            }
            Constraint::EqualLength { a, b, tol_ratio } => {
                write!(f, " {a} {b}")?;
                write_tol_suffix(f, tol_ratio, DEFAULT_LENGTH_TOL_RATIO)?;
            }
            Constraint::AngleBetween {
                a,
                b,
                degrees,
                tol_deg,
            } => {
                write!(f, " {a} {b} {degrees}")?;
                write_tol_suffix(f, tol_deg, DEFAULT_ANGLE_TOL_DEG)?;
            }
            Constraint::LengthRatio {
                a,
                b,
                ratio,
                tol_ratio,
            } => {
                write!(f, " {a} {b} {ratio}")?;
                write_tol_suffix(f, tol_ratio, DEFAULT_LENGTH_TOL_RATIO)?;
            }
        }
        f.write_str(";")
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "    shape {} {{", self.name)?;
        if self.lines.min == self.lines.max {
            writeln!(f, "        lines {};", self.lines.min)?;
        } else {
            writeln!(f, "        lines {}..{};", self.lines.min, self.lines.max)?;
        }
        writeln!(f, "        constraints {{")?;
        for c in &self.constraints {
            writeln!(f, "            {c}")?;
        }
        writeln!(f, "        }}")?;
        writeln!(f, "        display \"{}\";", escape(&self.display_label))?;
        if !self.report.is_empty() {
            let names: Vec<_> = self.report.iter().map(|p| p.name()).collect();
            writeln!(f, "        report {};", names.join(", "))?;
        }
        writeln!(f, "    }}")
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domain {} {{", self.name)?;
        for s in &self.shapes {
            s.fmt(f)?;
        }
        writeln!(f, "}}")
    }
}

impl fmt::Display for DomainLibrary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.domains.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            d.fmt(f)?;
        }
        Ok(())
    }
}
