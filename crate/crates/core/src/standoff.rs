//! Flat, line-oriented stand-off annotation files.
//!
//! One annotation per line, so line counts equal annotation counts and a
//! plain substring search finds every record carrying a label. Record
//! grammar:
//!
//! ```text
//! label <span> <name>
//! text  <span> <escaped free text>
//! link  <source-span> <target-span>
//! ```
//!
//! Positions print as `()`, `(L)`, `(L,T)`, `(L,T,C)`; a span is a single
//! position or `<pos>-<pos>`. Output is canonical: records sorted by
//! (span start, span end, kind, payload), UTF-8, LF endings, byte-identical
//! for a given annotation set regardless of edit order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{Document, Position, Span};
use crate::store::{validate_label_name, Annotation, AnnotationStore};

/// Suffix appended to a data path to locate its annotation file.
pub const ANNOTATIONS_SUFFIX: &str = ".annotations";
/// Suffix for adjudication output files.
pub const ADJUDICATED_SUFFIX: &str = ".adjudicated";

/// `log.txt` -> `log.txt.annotations`
pub fn annotation_path(data_path: &Path) -> PathBuf {
    append_suffix(data_path, ANNOTATIONS_SUFFIX)
}

/// `log.txt` -> `log.txt.adjudicated`
pub fn adjudicated_path(data_path: &Path) -> PathBuf {
    append_suffix(data_path, ADJUDICATED_SUFFIX)
}

fn append_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

#[derive(Debug, Error)]
pub enum StandoffError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: position {position} is out of range")]
    OutOfRange { line: usize, position: Position },
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Non-fatal parser diagnostics; duplicates are kept once and reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

/// A parsed store plus any warnings raised while reading it.
#[derive(Debug)]
pub struct Parsed {
    pub store: AnnotationStore,
    pub warnings: Vec<ParseWarning>,
}

fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(ch),
        }
    }
    out
}

fn unescape_text(text: &str, line: usize) -> Result<String, StandoffError> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(ch) = chars.next() {
        if ch != '\\' {
            out.push(ch);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            other => {
                return Err(StandoffError::Malformed {
                    line,
                    reason: match other {
                        Some(c) => format!("invalid escape `\\{c}` in text payload"),
                        None => "dangling backslash in text payload".to_string(),
                    },
                })
            }
        }
    }
    Ok(out)
}

fn record(annotation: &Annotation) -> String {
    match annotation {
        Annotation::Label { span, name } => format!("label {span} {name}"),
        Annotation::Text { span, text } => format!("text {span} {}", escape_text(text)),
        Annotation::Link { source, target } => format!("link {source} {target}"),
    }
}

/// Renders the store in canonical order, one record per line, trailing
/// newline after every record. An empty store serializes to the empty
/// string.
pub fn serialize(store: &AnnotationStore) -> String {
    let mut out = String::new();
    for annotation in store.canonical_order() {
        out.push_str(&record(annotation));
        out.push('\n');
    }
    out
}

fn parse_span(field: &str, line: usize, doc: &Document) -> Result<Span, StandoffError> {
    let span: Span = field.parse().map_err(|e| StandoffError::Malformed {
        line,
        reason: format!("{e}"),
    })?;
    for pos in [span.start(), span.end()] {
        if !doc.is_valid(pos) {
            return Err(StandoffError::OutOfRange {
                line,
                position: pos,
            });
        }
    }
    Ok(span)
}

fn parse_record(text: &str, line_no: usize, doc: &Document) -> Result<Annotation, StandoffError> {
    let malformed = |reason: String| StandoffError::Malformed {
        line: line_no,
        reason,
    };
    let (kind, rest) = text
        .split_once(' ')
        .ok_or_else(|| malformed("expected `<kind> <span> <payload>`".to_string()))?;
    let (span_field, payload) = rest
        .split_once(' ')
        .ok_or_else(|| malformed(format!("missing payload after `{kind} {rest}`")))?;
    let span = parse_span(span_field, line_no, doc)?;
    match kind {
        "label" => {
            validate_label_name(payload).map_err(|e| malformed(format!("{e}")))?;
            Ok(Annotation::Label {
                span,
                name: payload.to_string(),
            })
        }
        "text" => {
            if payload.is_empty() {
                return Err(malformed("empty text payload".to_string()));
            }
            Ok(Annotation::Text {
                span,
                text: unescape_text(payload, line_no)?,
            })
        }
        "link" => {
            if payload.contains(' ') {
                return Err(malformed("trailing content after link target".to_string()));
            }
            let target = parse_span(payload, line_no, doc)?;
            if target.scope() != span.scope() {
                return Err(malformed(format!(
                    "link endpoints have different scopes: {} vs {}",
                    span.scope().name(),
                    target.scope().name()
                )));
            }
            Ok(Annotation::Link {
                source: span,
                target,
            })
        }
        other => Err(malformed(format!("unknown record kind `{other}`"))),
    }
}

/// Parses an annotation file against the document it annotates.
///
/// The parser is strict: a malformed record or out-of-range position fails
/// with its line number. Duplicate records are the one exception; they warn
/// and are kept once so no annotator work is silently lost.
pub fn parse(text: &str, doc: &Document) -> Result<Parsed, StandoffError> {
    let mut store = AnnotationStore::new();
    let mut warnings = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() {
            return Err(StandoffError::Malformed {
                line: line_no,
                reason: "blank line in annotation file".to_string(),
            });
        }
        let annotation = parse_record(line, line_no, doc)?;
        if !store.insert_unjournaled(annotation) {
            warnings.push(ParseWarning {
                line: line_no,
                message: format!("duplicate record `{line}` kept once"),
            });
        }
    }
    Ok(Parsed { store, warnings })
}

/// Reads and parses the annotation file at `path`.
pub fn read_store(path: &Path, doc: &Document) -> Result<Parsed, StandoffError> {
    let text = fs::read_to_string(path).map_err(|source| StandoffError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, doc)
}

/// Writes `contents` via a temp file in the same directory followed by a
/// rename, so a crash never leaves a truncated annotation file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), StandoffError> {
    let io_err = |source| StandoffError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(io_err)?;
    file.write_all(contents.as_bytes()).map_err(io_err)?;
    file.sync_all().map_err(io_err)?;
    drop(file);
    fs::rename(&tmp, path).map_err(io_err)
}
