//! The set of annotations for one document, with toggle semantics and an
//! undo journal.
//!
//! Labels and links toggle: applying an annotation that already exists
//! removes it, so a repeated keypress is its own undo. Free text is unique
//! per span and last-writer-wins. Every edit pushes its inverse onto the
//! journal; `undo` pops and replays it.

use std::cmp::Ordering;

use indexmap::IndexSet;
use thiserror::Error;

use crate::model::{Position, Scope, Span};

/// One annotation: a categorical label, free text, or a directed link.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Annotation {
    Label { span: Span, name: String },
    Text { span: Span, text: String },
    Link { source: Span, target: Span },
}

impl Annotation {
    /// The span the annotation is anchored to; for links, the source span.
    pub fn span(&self) -> &Span {
        match self {
            Annotation::Label { span, .. } | Annotation::Text { span, .. } => span,
            Annotation::Link { source, .. } => source,
        }
    }

    pub fn scope(&self) -> Scope {
        self.span().scope()
    }

    /// True when `pos` falls inside the annotation's span, or for links,
    /// inside either endpoint span.
    pub fn touches(&self, pos: Position) -> bool {
        match self {
            Annotation::Label { span, .. } | Annotation::Text { span, .. } => span.contains(pos),
            Annotation::Link { source, target } => source.contains(pos) || target.contains(pos),
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Annotation::Label { .. } => 0,
            Annotation::Link { .. } => 1,
            Annotation::Text { .. } => 2,
        }
    }

    /// Canonical order: (span start, span end, kind, payload). Used for
    /// serialization, never for store semantics.
    pub fn canonical_cmp(&self, other: &Annotation) -> Ordering {
        let key = |a: &Annotation| (a.span().start(), a.span().end(), a.kind_rank());
        key(self).cmp(&key(other)).then_with(|| match (self, other) {
            (Annotation::Label { name: a, .. }, Annotation::Label { name: b, .. }) => a.cmp(b),
            (Annotation::Text { text: a, .. }, Annotation::Text { text: b, .. }) => a.cmp(b),
            (Annotation::Link { target: a, .. }, Annotation::Link { target: b, .. }) => {
                (a.start(), a.end()).cmp(&(b.start(), b.end()))
            }
            _ => Ordering::Equal,
        })
    }
}

/// Checks the label-name rule shared by the store and the file parser.
pub fn validate_label_name(name: &str) -> Result<(), StoreError> {
    if name.is_empty() {
        return Err(StoreError::EmptyLabel);
    }
    if name.chars().any(char::is_whitespace) {
        return Err(StoreError::LabelHasWhitespace(name.to_string()));
    }
    Ok(())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("label name must not be empty")]
    EmptyLabel,
    #[error("label name `{0}` contains whitespace")]
    LabelHasWhitespace(String),
    #[error("link endpoints have different scopes: {} vs {}", .source_scope.name(), .target_scope.name())]
    LinkScopeMismatch {
        source_scope: Scope,
        target_scope: Scope,
    },
}

/// What a single store operation did. Undo replays the inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Edit {
    Added(Annotation),
    Removed(Annotation),
    Replaced { old: Annotation, new: Annotation },
}

/// Insertion-ordered, duplicate-free annotation set plus the undo journal.
#[derive(Debug, Clone, Default)]
pub struct AnnotationStore {
    annotations: IndexSet<Annotation>,
    journal: Vec<Edit>,
}

impl AnnotationStore {
    pub fn new() -> AnnotationStore {
        AnnotationStore::default()
    }

    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Annotation> {
        self.annotations.iter()
    }

    pub fn contains(&self, annotation: &Annotation) -> bool {
        self.annotations.contains(annotation)
    }

    /// Number of edits that can still be undone.
    pub fn journal_len(&self) -> usize {
        self.journal.len()
    }

    /// Inserts without journaling; used when loading from disk. Returns false
    /// on duplicates.
    pub fn insert_unjournaled(&mut self, annotation: Annotation) -> bool {
        self.annotations.insert(annotation)
    }

    /// Adds the annotation as-is if absent, journaled so it can be undone.
    /// Unlike the toggle operations this never removes anything.
    pub fn insert_journaled(&mut self, annotation: Annotation) -> Option<Edit> {
        if self.annotations.contains(&annotation) {
            return None;
        }
        Some(self.apply(Edit::Added(annotation)))
    }

    fn apply(&mut self, edit: Edit) -> Edit {
        match &edit {
            Edit::Added(a) => {
                self.annotations.insert(a.clone());
            }
            Edit::Removed(a) => {
                self.annotations.shift_remove(a);
            }
            Edit::Replaced { old, new } => {
                self.annotations.shift_remove(old);
                self.annotations.insert(new.clone());
            }
        }
        self.journal.push(edit.clone());
        edit
    }

    /// Toggles a categorical label on the span: adds it when absent, removes
    /// it when present. Distinct labels coexist on one span.
    pub fn apply_label(&mut self, span: Span, name: &str) -> Result<Edit, StoreError> {
        validate_label_name(name)?;
        let annotation = Annotation::Label {
            span,
            name: name.to_string(),
        };
        if self.annotations.contains(&annotation) {
            Ok(self.apply(Edit::Removed(annotation)))
        } else {
            Ok(self.apply(Edit::Added(annotation)))
        }
    }

    /// Sets the free text for the span, replacing any existing text there.
    /// Empty text deletes. Returns None when nothing changed.
    pub fn set_text(&mut self, span: Span, text: &str) -> Option<Edit> {
        let existing = self
            .annotations
            .iter()
            .find(|a| matches!(a, Annotation::Text { span: s, .. } if *s == span))
            .cloned();
        let new = (!text.is_empty()).then(|| Annotation::Text {
            span,
            text: text.to_string(),
        });
        match (existing, new) {
            (Some(old), Some(new)) if old == new => None,
            (Some(old), Some(new)) => Some(self.apply(Edit::Replaced { old, new })),
            (Some(old), None) => Some(self.apply(Edit::Removed(old))),
            (None, Some(new)) => Some(self.apply(Edit::Added(new))),
            (None, None) => None,
        }
    }

    /// The free text stored on exactly this span, if any.
    pub fn text_at(&self, span: Span) -> Option<&str> {
        self.annotations.iter().find_map(|a| match a {
            Annotation::Text { span: s, text } if *s == span => Some(text.as_str()),
            _ => None,
        })
    }

    /// Toggles a directed link. Self-links are allowed; a message linked to
    /// itself conventionally marks a conversation start.
    pub fn toggle_link(&mut self, source: Span, target: Span) -> Result<Edit, StoreError> {
        if source.scope() != target.scope() {
            return Err(StoreError::LinkScopeMismatch {
                source_scope: source.scope(),
                target_scope: target.scope(),
            });
        }
        let annotation = Annotation::Link { source, target };
        if self.annotations.contains(&annotation) {
            Ok(self.apply(Edit::Removed(annotation)))
        } else {
            Ok(self.apply(Edit::Added(annotation)))
        }
    }

    /// Reverses the most recent edit. No-op on an empty journal. Returns the
    /// edit that was undone.
    pub fn undo(&mut self) -> Option<Edit> {
        let edit = self.journal.pop()?;
        match &edit {
            Edit::Added(a) => {
                self.annotations.shift_remove(a);
            }
            Edit::Removed(a) => {
                self.annotations.insert(a.clone());
            }
            Edit::Replaced { old, new } => {
                self.annotations.shift_remove(new);
                self.annotations.insert(old.clone());
            }
        }
        Some(edit)
    }

    /// Every annotation whose span contains the item; links count when either
    /// endpoint span contains it. Insertion order.
    pub fn annotations_at(&self, item: Position) -> Vec<&Annotation> {
        self.annotations.iter().filter(|a| a.touches(item)).collect()
    }

    /// Labels on the item, in insertion order.
    pub fn labels_at(&self, item: Position) -> Vec<&str> {
        self.annotations
            .iter()
            .filter_map(|a| match a {
                Annotation::Label { span, name } if span.contains(item) => Some(name.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Spans linked to the item from either direction: targets of links whose
    /// source covers it and sources of links whose target covers it.
    pub fn linked_partners(&self, item: Position) -> Vec<&Span> {
        let mut partners = Vec::new();
        for a in &self.annotations {
            if let Annotation::Link { source, target } = a {
                if source.contains(item) {
                    partners.push(target);
                }
                if target.contains(item) && source != target {
                    partners.push(source);
                }
            }
        }
        partners
    }

    /// Annotations in canonical order, ready for serialization.
    pub fn canonical_order(&self) -> Vec<&Annotation> {
        let mut all: Vec<&Annotation> = self.annotations.iter().collect();
        all.sort_by(|a, b| a.canonical_cmp(b));
        all
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Position;

    fn token_span(line: usize, a: usize, b: usize) -> Span {
        Span::normalized(Position::Token(line, a), Position::Token(line, b)).unwrap()
    }

    fn point(line: usize, token: usize) -> Span {
        Span::point(Position::Token(line, token))
    }

    #[test]
    fn apply_label_adds_and_toggles_off() {
        let mut store = AnnotationStore::new();
        let span = point(0, 0);
        store.apply_label(span, "Offer").unwrap();
        assert_eq!(store.len(), 1);
        assert!(store.contains(&Annotation::Label {
            span,
            name: "Offer".into()
        }));

        store.apply_label(span, "Offer").unwrap();
        assert!(store.is_empty());
    }

    #[test]
    fn distinct_labels_coexist_on_one_span() {
        let mut store = AnnotationStore::new();
        let span = point(0, 0);
        store.apply_label(span, "Offer").unwrap();
        store.apply_label(span, "Rate").unwrap();
        assert_eq!(store.annotations_at(Position::Token(0, 0)).len(), 2);
    }

    #[test]
    fn apply_label_rejects_bad_names() {
        let mut store = AnnotationStore::new();
        assert_eq!(store.apply_label(point(0, 0), ""), Err(StoreError::EmptyLabel));
        assert!(matches!(
            store.apply_label(point(0, 0), "two words"),
            Err(StoreError::LabelHasWhitespace(_))
        ));
        assert!(store.is_empty());
        assert_eq!(store.journal_len(), 0);
    }

    #[test]
    fn set_text_reads_back_and_deletes_on_empty() {
        let mut store = AnnotationStore::new();
        let span = token_span(1, 0, 2);
        store.set_text(span, "check later");
        assert_eq!(store.text_at(span), Some("check later"));

        store.set_text(span, "");
        assert_eq!(store.text_at(span), None);
        assert!(store.is_empty());
    }

    #[test]
    fn set_text_is_independent_per_span() {
        let mut store = AnnotationStore::new();
        let a = point(0, 0);
        let b = point(0, 1);
        store.set_text(a, "first");
        store.set_text(b, "second");
        store.set_text(a, "first again");
        assert_eq!(store.text_at(a), Some("first again"));
        assert_eq!(store.text_at(b), Some("second"));
        assert_eq!(store.len(), 2);
    }

    #[test]
    fn set_text_noop_cases_do_not_journal() {
        let mut store = AnnotationStore::new();
        let span = point(0, 0);
        assert_eq!(store.set_text(span, ""), None);
        store.set_text(span, "note");
        let before = store.journal_len();
        assert_eq!(store.set_text(span, "note"), None);
        assert_eq!(store.journal_len(), before);
    }

    #[test]
    fn toggle_link_round_trip_and_partner_query() {
        let mut store = AnnotationStore::new();
        let five = Span::point(Position::Line(5));
        let two = Span::point(Position::Line(2));
        store.toggle_link(five, two).unwrap();
        assert_eq!(store.linked_partners(Position::Line(5)), vec![&two]);
        assert_eq!(store.linked_partners(Position::Line(2)), vec![&five]);

        store.toggle_link(five, two).unwrap();
        assert!(store.is_empty());
    }

    #[test]
    fn self_link_marks_conversation_start() {
        let mut store = AnnotationStore::new();
        let msg = Span::point(Position::Line(0));
        store.toggle_link(msg, msg).unwrap();
        assert_eq!(store.linked_partners(Position::Line(0)), vec![&msg]);
    }

    #[test]
    fn toggle_link_rejects_scope_mismatch() {
        let mut store = AnnotationStore::new();
        let err = store.toggle_link(Span::point(Position::Line(0)), point(0, 0));
        assert!(matches!(err, Err(StoreError::LinkScopeMismatch { .. })));
    }

    #[test]
    fn undo_reverses_each_edit_kind() {
        let mut store = AnnotationStore::new();
        let span = point(0, 0);

        store.apply_label(span, "Offer").unwrap();
        store.undo();
        assert!(store.is_empty());

        store.apply_label(span, "Offer").unwrap();
        store.apply_label(span, "Offer").unwrap(); // toggles off
        store.undo();
        assert_eq!(store.len(), 1);

        store.set_text(span, "a");
        store.set_text(span, "b");
        store.undo();
        assert_eq!(store.text_at(span), Some("a"));
    }

    #[test]
    fn undo_on_fresh_store_is_identity() {
        let mut store = AnnotationStore::new();
        assert_eq!(store.undo(), None);
        assert!(store.is_empty());
    }

    #[test]
    fn annotations_at_empty_store() {
        let store = AnnotationStore::new();
        assert!(store.annotations_at(Position::Token(0, 0)).is_empty());
    }

    #[test]
    fn annotations_at_reports_span_containment() {
        let mut store = AnnotationStore::new();
        store.apply_label(token_span(0, 0, 2), "Offer").unwrap();
        let hits = store.annotations_at(Position::Token(0, 1));
        assert_eq!(hits.len(), 1);
        assert!(store.annotations_at(Position::Token(0, 3)).is_empty());
        assert!(store.annotations_at(Position::Line(0)).is_empty());
    }
}
