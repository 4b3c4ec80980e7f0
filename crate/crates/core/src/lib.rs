//! Headless engine for a keyboard-driven terminal annotation tool.
//!
//! Everything here is terminal-free: documents, annotation stores, the
//! stand-off file format, configuration and key decoding, the command
//! engine, adjudication, and a pure renderer that produces a grid of styled
//! cells. A thin terminal backend elsewhere blits those grids and feeds keys
//! back in, which keeps the whole display and input contract testable.

pub mod adjudicate;
pub mod config;
pub mod model;
pub mod render;
pub mod session;
pub mod standoff;
pub mod store;

pub use config::{Action, Command, Config, Decoded, Key};
pub use model::{Direction, Document, ModelError, Position, Scope, Span};
pub use store::{Annotation, AnnotationStore, Edit, StoreError};
