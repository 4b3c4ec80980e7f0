//! Property tests for the headless engine.
//!
//! Each property checks the implementation against an independent oracle
//! built from first principles in this file: brute-force enumerations,
//! linear scans, and snapshot comparisons.

use std::path::PathBuf;

use proptest::prelude::*;

use slate_core::config::{BindingTable, Config, Decoded, KeyDecoder};
use slate_core::model::{Direction, Document, Position, Scope, Span};
use slate_core::session::{
    AnnotationKind, Mode, Session, SessionFile, SessionOptions,
};
use slate_core::standoff;
use slate_core::store::{Annotation, AnnotationStore};
use slate_core::{Action, Command};

// --- oracles ---------------------------------------------------------------

/// Brute-force item enumeration straight off the document structure.
fn enumerate_items(doc: &Document, scope: Scope) -> Vec<Position> {
    let mut out = Vec::new();
    match scope {
        Scope::Document => out.push(Position::Document),
        Scope::Line => {
            for l in 0..doc.line_count() {
                out.push(Position::Line(l));
            }
        }
        Scope::Token => {
            for l in 0..doc.line_count() {
                for t in 0..doc.line(l).tokens().len() {
                    out.push(Position::Token(l, t));
                }
            }
        }
        Scope::Character => {
            for l in 0..doc.line_count() {
                for (t, token) in doc.line(l).tokens().iter().enumerate() {
                    for c in 0..token.len() {
                        out.push(Position::Character(l, t, c));
                    }
                }
            }
        }
    }
    out
}

// --- generators ------------------------------------------------------------

fn arb_doc() -> impl Strategy<Value = Document> {
    prop::collection::vec(prop::collection::vec("[a-z]{1,4}", 0..5), 1..6).prop_map(|lines| {
        let text = lines
            .iter()
            .map(|tokens| tokens.join(" "))
            .collect::<Vec<_>>()
            .join("\n");
        Document::tokenize(&text)
    })
}

fn arb_doc_with_tokens() -> impl Strategy<Value = Document> {
    arb_doc().prop_filter("need at least one token", |d| d.item_count(Scope::Token) > 0)
}

fn arb_scope() -> impl Strategy<Value = Scope> {
    prop_oneof![
        Just(Scope::Document),
        Just(Scope::Line),
        Just(Scope::Token),
        Just(Scope::Character),
    ]
}

/// A valid position in `doc` at `scope`, by index into the item enumeration.
fn position_in(doc: &Document, scope: Scope, seed: usize) -> Option<Position> {
    let count = doc.item_count(scope);
    if count == 0 {
        return None;
    }
    doc.item_at(scope, seed % count)
}

fn span_in(doc: &Document, scope: Scope, a: usize, b: usize) -> Option<Span> {
    let start = position_in(doc, scope, a)?;
    let end = position_in(doc, scope, b)?;
    Span::normalized(start, end).ok()
}

#[derive(Debug, Clone)]
enum AnnSeed {
    Label { a: usize, b: usize, name: String },
    Text { a: usize, b: usize, text: String },
    Link { a: usize, b: usize, c: usize, d: usize },
}

fn arb_ann_seed() -> impl Strategy<Value = AnnSeed> {
    prop_oneof![
        (any::<usize>(), any::<usize>(), "[A-Z][a-z]{0,3}")
            .prop_map(|(a, b, name)| AnnSeed::Label { a, b, name }),
        (any::<usize>(), any::<usize>(), "[ -~]{1,8}")
            .prop_map(|(a, b, text)| AnnSeed::Text { a, b, text }),
        (any::<usize>(), any::<usize>(), any::<usize>(), any::<usize>())
            .prop_map(|(a, b, c, d)| AnnSeed::Link { a, b, c, d }),
    ]
}

fn materialize(doc: &Document, scope: Scope, seed: &AnnSeed) -> Option<Annotation> {
    match seed {
        AnnSeed::Label { a, b, name } => Some(Annotation::Label {
            span: span_in(doc, scope, *a, *b)?,
            name: name.clone(),
        }),
        AnnSeed::Text { a, b, text } => Some(Annotation::Text {
            span: span_in(doc, scope, *a, *b)?,
            text: text.clone(),
        }),
        AnnSeed::Link { a, b, c, d } => Some(Annotation::Link {
            source: span_in(doc, scope, *a, *b)?,
            target: span_in(doc, scope, *c, *d)?,
        }),
    }
}

fn store_from_seeds(doc: &Document, scope: Scope, seeds: &[AnnSeed]) -> AnnotationStore {
    let mut store = AnnotationStore::new();
    for seed in seeds {
        if let Some(annotation) = materialize(doc, scope, seed) {
            store.insert_unjournaled(annotation);
        }
    }
    store
}

fn same_annotations(a: &AnnotationStore, b: &AnnotationStore) -> bool {
    a.len() == b.len() && a.iter().all(|ann| b.contains(ann))
}

// --- model properties --------------------------------------------------------

proptest! {
    #[test]
    fn items_in_matches_enumeration_filter(
        doc in arb_doc(),
        scope in arb_scope(),
        a in any::<usize>(),
        b in any::<usize>(),
    ) {
        let Some(span) = span_in(&doc, scope, a, b) else { return Ok(()) };
        let got = doc.items_in(&span).unwrap();
        // Oracle: filter the brute-force enumeration by the inclusive bounds.
        let expected: Vec<Position> = enumerate_items(&doc, scope)
            .into_iter()
            .filter(|p| span.start() <= *p && *p <= span.end())
            .collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn next_right_is_successor_in_enumeration(
        doc in arb_doc(),
        scope in arb_scope(),
        seed in any::<usize>(),
    ) {
        let Some(pos) = position_in(&doc, scope, seed) else { return Ok(()) };
        let all = enumerate_items(&doc, scope);
        let idx = all.iter().position(|p| *p == pos).unwrap();
        let right = doc.next_item(pos, Direction::Right).unwrap();
        if idx + 1 < all.len() {
            prop_assert_eq!(right, all[idx + 1]);
        } else {
            prop_assert_eq!(right, pos);
        }
        let left = doc.next_item(pos, Direction::Left).unwrap();
        if idx > 0 {
            prop_assert_eq!(left, all[idx - 1]);
        } else {
            prop_assert_eq!(left, pos);
        }
    }

    #[test]
    fn right_k_then_left_k_returns_home(
        doc in arb_doc_with_tokens(),
        seed in any::<usize>(),
        k in 0usize..8,
    ) {
        let all = enumerate_items(&doc, Scope::Token);
        let start_idx = seed % all.len();
        // Stay clear of the right boundary so no clamp occurs.
        let k = k.min(all.len() - 1 - start_idx);
        let start = all[start_idx];
        let mut pos = start;
        for _ in 0..k {
            pos = doc.next_item(pos, Direction::Right).unwrap();
        }
        for _ in 0..k {
            pos = doc.next_item(pos, Direction::Left).unwrap();
        }
        prop_assert_eq!(pos, start);
    }

    #[test]
    fn normalized_spans_are_ordered(
        doc in arb_doc(),
        scope in arb_scope(),
        a in any::<usize>(),
        b in any::<usize>(),
    ) {
        let (Some(x), Some(y)) = (position_in(&doc, scope, a), position_in(&doc, scope, b))
        else { return Ok(()) };
        let span = Span::normalized(x, y).unwrap();
        prop_assert!(span.start() <= span.end());
        prop_assert!(span.contains(x) && span.contains(y));
    }

    #[test]
    fn validation_rejects_exactly_out_of_range_tuples(
        doc in arb_doc(),
        l in 0usize..8,
        t in 0usize..8,
        c in 0usize..8,
    ) {
        // Oracle: check the tuple against the raw document structure.
        let line_ok = l < doc.line_count();
        let token_ok = line_ok && t < doc.line(l).tokens().len();
        let char_ok = token_ok && c < doc.line(l).tokens()[t].len();
        prop_assert_eq!(doc.is_valid(Position::Line(l)), line_ok);
        prop_assert_eq!(doc.is_valid(Position::Token(l, t)), token_ok);
        prop_assert_eq!(doc.is_valid(Position::Character(l, t, c)), char_ok);
        prop_assert!(doc.is_valid(Position::Document));
    }

    #[test]
    fn tokenize_is_stable_under_whitespace_normalization(doc in arb_doc()) {
        // Rebuild the text with all whitespace runs collapsed to one space.
        let normalized: String = (0..doc.line_count())
            .map(|l| {
                (0..doc.line(l).tokens().len())
                    .map(|t| doc.token_text(l, t))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n");
        let redone = Document::tokenize(&normalized);
        prop_assert_eq!(doc.line_count(), redone.line_count());
        for l in 0..doc.line_count() {
            let original: Vec<&str> =
                (0..doc.line(l).tokens().len()).map(|t| doc.token_text(l, t)).collect();
            let again: Vec<&str> =
                (0..redone.line(l).tokens().len()).map(|t| redone.token_text(l, t)).collect();
            prop_assert_eq!(original, again);
        }
    }
}

// --- store properties --------------------------------------------------------

proptest! {
    #[test]
    fn toggles_are_involutions(
        doc in arb_doc_with_tokens(),
        a in any::<usize>(),
        b in any::<usize>(),
        c in any::<usize>(),
        d in any::<usize>(),
        name in "[A-Z][a-z]{0,3}",
    ) {
        let span = span_in(&doc, Scope::Token, a, b).unwrap();
        let target = span_in(&doc, Scope::Token, c, d).unwrap();
        let mut store = AnnotationStore::new();
        store.set_text(span, "background");

        let before = standoff::serialize(&store);
        store.apply_label(span, &name).unwrap();
        store.apply_label(span, &name).unwrap();
        prop_assert_eq!(standoff::serialize(&store), before.clone());

        store.toggle_link(span, target).unwrap();
        store.toggle_link(span, target).unwrap();
        prop_assert_eq!(standoff::serialize(&store), before);
    }

    #[test]
    fn annotations_at_matches_linear_scan(
        doc in arb_doc_with_tokens(),
        seeds in prop::collection::vec(arb_ann_seed(), 0..20),
        query in any::<usize>(),
    ) {
        let store = store_from_seeds(&doc, Scope::Token, &seeds);
        let Some(item) = position_in(&doc, Scope::Token, query) else { return Ok(()) };
        let got = store.annotations_at(item);
        // Oracle: test containment annotation by annotation.
        let expected: Vec<&Annotation> = store
            .iter()
            .filter(|ann| match ann {
                Annotation::Label { span, .. } | Annotation::Text { span, .. } => {
                    span.contains(item)
                }
                Annotation::Link { source, target } => {
                    source.contains(item) || target.contains(item)
                }
            })
            .collect();
        prop_assert_eq!(got, expected);
    }
}

// --- stand-off round trip ------------------------------------------------------

proptest! {
    #[test]
    fn parse_inverts_serialize(
        doc in arb_doc_with_tokens(),
        scope in arb_scope(),
        seeds in prop::collection::vec(arb_ann_seed(), 0..20),
    ) {
        let store = store_from_seeds(&doc, scope, &seeds);
        let text = standoff::serialize(&store);
        prop_assert_eq!(text.lines().count(), store.len());
        let parsed = standoff::parse(&text, &doc).unwrap();
        prop_assert!(parsed.warnings.is_empty());
        prop_assert!(same_annotations(&store, &parsed.store));
        prop_assert_eq!(standoff::serialize(&parsed.store), text);
    }

    #[test]
    fn serialization_ignores_insertion_order(
        doc in arb_doc_with_tokens(),
        seeds in prop::collection::vec(arb_ann_seed(), 0..20),
        rotation in any::<usize>(),
    ) {
        let forward = store_from_seeds(&doc, Scope::Token, &seeds);
        let mut rotated_seeds = seeds.clone();
        if !rotated_seeds.is_empty() {
            let pivot = rotation % rotated_seeds.len();
            rotated_seeds.rotate_left(pivot);
        }
        rotated_seeds.reverse();
        let rotated = store_from_seeds(&doc, Scope::Token, &rotated_seeds);
        prop_assert_eq!(standoff::serialize(&forward), standoff::serialize(&rotated));
    }
}

// --- undo --------------------------------------------------------------------

#[derive(Debug, Clone)]
enum EditSeed {
    Label { a: usize, b: usize, name: String },
    Text { a: usize, b: usize, text: String },
    Link { a: usize, b: usize, c: usize, d: usize },
}

fn arb_edit_seed() -> impl Strategy<Value = EditSeed> {
    prop_oneof![
        (any::<usize>(), any::<usize>(), "[A-Z]")
            .prop_map(|(a, b, name)| EditSeed::Label { a, b, name }),
        (any::<usize>(), any::<usize>(), "[a-z ]{0,5}")
            .prop_map(|(a, b, text)| EditSeed::Text { a, b, text }),
        (any::<usize>(), any::<usize>(), any::<usize>(), any::<usize>())
            .prop_map(|(a, b, c, d)| EditSeed::Link { a, b, c, d }),
    ]
}

proptest! {
    #[test]
    fn k_edits_then_k_undos_restore_the_store(
        doc in arb_doc_with_tokens(),
        initial in prop::collection::vec(arb_ann_seed(), 0..8),
        edits in prop::collection::vec(arb_edit_seed(), 0..25),
    ) {
        let mut store = store_from_seeds(&doc, Scope::Token, &initial);
        let snapshot = standoff::serialize(&store);
        let mut performed = 0usize;
        for edit in &edits {
            let changed = match edit {
                EditSeed::Label { a, b, name } => {
                    let span = span_in(&doc, Scope::Token, *a, *b).unwrap();
                    store.apply_label(span, name).is_ok()
                }
                EditSeed::Text { a, b, text } => {
                    let span = span_in(&doc, Scope::Token, *a, *b).unwrap();
                    store.set_text(span, text).is_some()
                }
                EditSeed::Link { a, b, c, d } => {
                    let source = span_in(&doc, Scope::Token, *a, *b).unwrap();
                    let target = span_in(&doc, Scope::Token, *c, *d).unwrap();
                    store.toggle_link(source, target).is_ok()
                }
            };
            if changed {
                performed += 1;
            }
        }
        prop_assert_eq!(store.journal_len(), performed);
        for _ in 0..performed {
            prop_assert!(store.undo().is_some());
        }
        prop_assert_eq!(standoff::serialize(&store), snapshot);
        prop_assert_eq!(store.undo(), None);
    }
}

// --- session properties ---------------------------------------------------------

fn session_over(doc: Document, scope: Scope) -> Session {
    Session::new(
        vec![SessionFile {
            path: PathBuf::from("prop.txt"),
            doc,
            store: AnnotationStore::new(),
            saved: None,
            adjudication: None,
        }],
        SessionOptions {
            scope,
            mode: Mode::Annotate,
            kind: AnnotationKind::Label,
            config: Config::default(),
            output_override: None,
        },
    )
    .unwrap()
}

fn movement_actions() -> Vec<Action> {
    vec![
        Action::MoveUp,
        Action::MoveDown,
        Action::MoveLeft,
        Action::MoveRight,
        Action::ExtendUp,
        Action::ExtendDown,
        Action::ExtendLeft,
        Action::ExtendRight,
        Action::ContractUp,
        Action::ContractDown,
        Action::ContractLeft,
        Action::ContractRight,
    ]
}

proptest! {
    #[test]
    fn repeat_count_equals_folded_singles(
        doc in arb_doc_with_tokens(),
        warmup in prop::collection::vec(0usize..12, 0..6),
        action_idx in 0usize..12,
        n in 0u32..20,
    ) {
        let actions = movement_actions();
        let mut bulk = session_over(doc.clone(), Scope::Token);
        let mut singles = session_over(doc, Scope::Token);
        // Shared warmup so the test starts from varied cursor states.
        for w in &warmup {
            let warm = Command::once(actions[w % actions.len()].clone());
            bulk.execute(&warm);
            singles.execute(&warm);
        }
        let action = actions[action_idx].clone();
        bulk.execute(&Command::new(action.clone(), n));
        for _ in 0..n {
            singles.execute(&Command::once(action.clone()));
        }
        prop_assert_eq!(bulk.cursor(), singles.cursor());
        prop_assert_eq!(bulk.selection(), singles.selection());
    }

    #[test]
    fn selection_always_contains_cursor(
        doc in arb_doc_with_tokens(),
        moves in prop::collection::vec((0usize..12, 1u32..4), 0..30),
    ) {
        let actions = movement_actions();
        let mut session = session_over(doc, Scope::Token);
        for (idx, count) in moves {
            session.execute(&Command::new(actions[idx % actions.len()].clone(), count));
            let sel = session.selection();
            prop_assert!(sel.contains(session.cursor()));
            prop_assert!(sel.start() <= sel.end());
        }
    }
}

// --- config and rendering ---------------------------------------------------------

proptest! {
    #[test]
    fn parse_config_never_panics(
        lines in prop::collection::vec("[a-zA-Z0-9#+ _-]{0,24}", 0..8),
        tail in "\\PC{0,40}",
    ) {
        let text = format!("{}\n{tail}", lines.join("\n"));
        // Total over its error type: config or diagnostics, never a crash.
        match slate_core::config::parse_config(&text) {
            Ok(_) => {}
            Err(errors) => prop_assert!(!errors.is_empty()),
        }
    }

    #[test]
    fn every_item_gets_exactly_one_style_and_render_never_panics(
        doc in arb_doc_with_tokens(),
        seeds in prop::collection::vec(arb_ann_seed(), 0..15),
        kind_pick in 0usize..3,
        width in 0usize..60,
        height in 0usize..20,
    ) {
        let kind = [AnnotationKind::Label, AnnotationKind::Text, AnnotationKind::Link][kind_pick];
        let store = store_from_seeds(&doc, Scope::Token, &seeds);
        let session = Session::new(
            vec![SessionFile {
                path: PathBuf::from("style.txt"),
                doc: doc.clone(),
                store,
                saved: None,
                adjudication: None,
            }],
            SessionOptions {
                scope: Scope::Token,
                mode: Mode::Annotate,
                kind,
                config: Config::default(),
                output_override: None,
            },
        )
        .unwrap();
        for idx in 0..doc.item_count(Scope::Token) {
            let item = doc.item_at(Scope::Token, idx).unwrap();
            let style = slate_core::render::style_for_item(&session, item);
            // Exactly one background class, always resolvable to a color.
            let _ = style.class.background();
        }
        let screen = slate_core::render::render(&session, width, height);
        prop_assert_eq!(screen.width(), width);
        prop_assert_eq!(screen.height(), height);
    }
}

// --- key decoding ----------------------------------------------------------------

proptest! {
    #[test]
    fn concatenated_chords_decode_one_command_each(
        picks in prop::collection::vec(any::<usize>(), 1..12),
    ) {
        let config = slate_core::config::parse_config(
            "label Offer SPACE+a green\nlabel Rate SPACE+r yellow\nlabel Long w+x+y blue\n",
        )
        .unwrap();
        let table = BindingTable::from_config(&config);
        let mut chords: Vec<(Vec<slate_core::Key>, Action)> = config
            .bindings
            .iter()
            .map(|b| (b.keys.clone(), b.action.clone()))
            .collect();
        for label in &config.labels {
            chords.push((label.keys.clone(), Action::ApplyLabel(label.name.clone())));
        }
        let sequence: Vec<&(Vec<slate_core::Key>, Action)> =
            picks.iter().map(|p| &chords[p % chords.len()]).collect();

        let mut decoder = KeyDecoder::new();
        let mut decoded = Vec::new();
        for (keys, _) in &sequence {
            for key in keys.iter() {
                match decoder.push(*key, &table) {
                    Decoded::Command(cmd) => decoded.push(cmd.action),
                    Decoded::Pending => {}
                    Decoded::Unbound => prop_assert!(false, "dead end inside a bound chord"),
                }
            }
        }
        let expected: Vec<Action> = sequence.iter().map(|(_, a)| a.clone()).collect();
        prop_assert_eq!(decoded, expected);
    }
}
