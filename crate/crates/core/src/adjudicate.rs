//! Comparing annotators' files and resolving their disagreements.
//!
//! Disagreement granularity is exact-annotation identity: an annotation is
//! agreed when every input store contains it and disputed when at least one
//! but not all do. The resolution store starts as the agreed core; the
//! adjudicator accepts candidates, authors new annotations, or rejects
//! everything at an item, and each disputed item is tracked until some
//! explicit action has covered it.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Document, Position, Scope};
use crate::store::{Annotation, AnnotationStore};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdjudicationError {
    #[error("adjudication needs at least 2 annotation sets, got {0}")]
    TooFewStores(usize),
    #[error("annotation sets mix scopes: {} vs {}", .first.name(), .second.name())]
    MixedScopes { first: Scope, second: Scope },
}

/// One disputed annotation and the annotators asserting it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disputed {
    pub annotation: Annotation,
    pub asserted_by: Vec<String>,
}

/// Set-algebra partition of the input stores.
///
/// `agreed` and the disputed annotations partition the union of all inputs;
/// `disputed_items` is every position touched by a disputed annotation,
/// including link endpoints.
#[derive(Debug, Clone, Default)]
pub struct DisagreementSet {
    pub agreed: Vec<Annotation>,
    pub disputed: Vec<Disputed>,
    pub disputed_items: BTreeSet<Position>,
}

impl DisagreementSet {
    pub fn is_disputed(&self, annotation: &Annotation) -> bool {
        self.disputed.iter().any(|d| &d.annotation == annotation)
    }

    pub fn is_agreed(&self, annotation: &Annotation) -> bool {
        self.agreed.contains(annotation)
    }

    /// Disputed annotations touching the item, with attribution.
    pub fn disputed_at(&self, item: Position) -> Vec<&Disputed> {
        self.disputed
            .iter()
            .filter(|d| d.annotation.touches(item))
            .collect()
    }
}

/// Positions touched by the annotation: its span's items, and for links the
/// target span's items as well.
fn touched_items(doc: &Document, annotation: &Annotation) -> Vec<Position> {
    let mut items = doc.items_in(annotation.span()).unwrap_or_default();
    if let Annotation::Link { target, .. } = annotation {
        items.extend(doc.items_in(target).unwrap_or_default());
    }
    items
}

/// Partitions `stores` into agreed and disputed annotations.
///
/// The partition ignores input order; order only affects annotator name
/// attribution on disputed entries. Every store must annotate `doc` at one
/// common scope.
pub fn compute_disagreements(
    doc: &Document,
    stores: &[(String, AnnotationStore)],
) -> Result<DisagreementSet, AdjudicationError> {
    if stores.len() < 2 {
        return Err(AdjudicationError::TooFewStores(stores.len()));
    }
    let mut scope: Option<Scope> = None;
    for (_, store) in stores {
        for annotation in store.iter() {
            match scope {
                None => scope = Some(annotation.scope()),
                Some(s) if s != annotation.scope() => {
                    return Err(AdjudicationError::MixedScopes {
                        first: s,
                        second: annotation.scope(),
                    })
                }
                Some(_) => {}
            }
        }
    }

    let mut set = DisagreementSet::default();
    let mut seen: Vec<&Annotation> = Vec::new();
    for (_, store) in stores {
        for annotation in store.iter() {
            if seen.contains(&annotation) {
                continue;
            }
            seen.push(annotation);
            let asserted_by: Vec<String> = stores
                .iter()
                .filter(|(_, s)| s.contains(annotation))
                .map(|(name, _)| name.clone())
                .collect();
            if asserted_by.len() == stores.len() {
                set.agreed.push(annotation.clone());
            } else {
                set.disputed_items.extend(touched_items(doc, annotation));
                set.disputed.push(Disputed {
                    annotation: annotation.clone(),
                    asserted_by,
                });
            }
        }
    }
    Ok(set)
}

/// An adjudicator's call on a disagreement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision {
    Accept(Annotation),
    RejectAllAt(Position),
}

/// What `resolve` did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolveOutcome {
    Resolved { items: Vec<Position> },
    /// The decision touched no disputed item; nothing changed.
    NoDisputeTouched,
}

/// Adjudication bookkeeping for one document: the named inputs, their
/// disagreement partition, and which disputed items have been covered by an
/// adjudicator action. The resolution store itself lives with the session so
/// ordinary annotation commands and undo work on it.
#[derive(Debug, Clone)]
pub struct AdjudicationState {
    pub inputs: Vec<(String, AnnotationStore)>,
    pub disagreements: DisagreementSet,
    resolved: BTreeSet<Position>,
}

impl AdjudicationState {
    pub fn new(
        doc: &Document,
        inputs: Vec<(String, AnnotationStore)>,
    ) -> Result<AdjudicationState, AdjudicationError> {
        let disagreements = compute_disagreements(doc, &inputs)?;
        Ok(AdjudicationState {
            inputs,
            disagreements,
            resolved: BTreeSet::new(),
        })
    }

    /// Seeds a fresh resolution store with the agreed core.
    pub fn agreed_core(&self) -> AnnotationStore {
        let mut store = AnnotationStore::new();
        for annotation in &self.disagreements.agreed {
            store.insert_unjournaled(annotation.clone());
        }
        store
    }

    pub fn resolved_items(&self) -> &BTreeSet<Position> {
        &self.resolved
    }

    pub fn is_resolved(&self, item: Position) -> bool {
        self.resolved.contains(&item)
    }

    pub fn is_disputed_item(&self, item: Position) -> bool {
        self.disagreements.disputed_items.contains(&item)
    }

    /// Disputed items not yet covered by any adjudicator action.
    pub fn unresolved_items(&self) -> impl Iterator<Item = &Position> {
        self.disagreements
            .disputed_items
            .iter()
            .filter(move |item| !self.resolved.contains(item))
    }

    /// True once every disputed item is resolved.
    pub fn is_complete(&self) -> bool {
        self.unresolved_items().next().is_none()
    }

    /// First unresolved disputed item strictly after `from` in document
    /// order, wrapping around once. None when everything is resolved.
    pub fn next_disagreement(&self, from: Position) -> Option<Position> {
        let unresolved: Vec<Position> = self.unresolved_items().copied().collect();
        unresolved
            .iter()
            .find(|item| **item > from)
            .or_else(|| unresolved.first())
            .copied()
    }

    /// Marks every disputed item touched by `annotation` as resolved. Called
    /// for each annotation the adjudicator adds through normal commands.
    pub fn mark_resolved_by(&mut self, doc: &Document, annotation: &Annotation) -> Vec<Position> {
        let items: Vec<Position> = touched_items(doc, annotation)
            .into_iter()
            .filter(|item| self.disagreements.disputed_items.contains(item))
            .collect();
        self.resolved.extend(items.iter().copied());
        items
    }

    /// Applies an explicit decision against the resolution store.
    ///
    /// Accepting adds the annotation (journaled, so the session can undo it)
    /// and marks its disputed items resolved; accepting an annotation already
    /// present only marks. Rejecting marks the item resolved with no
    /// annotation. A decision touching no disputed item is a no-op.
    pub fn resolve(
        &mut self,
        doc: &Document,
        resolution: &mut AnnotationStore,
        decision: Decision,
    ) -> ResolveOutcome {
        match decision {
            Decision::Accept(annotation) => {
                let items = self.mark_resolved_by(doc, &annotation);
                if items.is_empty() {
                    return ResolveOutcome::NoDisputeTouched;
                }
                resolution.insert_journaled(annotation);
                ResolveOutcome::Resolved { items }
            }
            Decision::RejectAllAt(item) => {
                if !self.disagreements.disputed_items.contains(&item) {
                    return ResolveOutcome::NoDisputeTouched;
                }
                self.resolved.insert(item);
                ResolveOutcome::Resolved { items: vec![item] }
            }
        }
    }
}
