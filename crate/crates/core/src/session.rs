//! The headless command engine.
//!
//! A session owns the file list, per-file cursor/selection/scroll, the
//! annotation stores, view toggles, search state, and the key decoder. It
//! consumes decoded commands (or raw keys) and never touches a terminal, so
//! entire interactive workflows can be driven from a key script in tests.

use std::path::PathBuf;

use thiserror::Error;

use crate::adjudicate::{AdjudicationState, Decision, ResolveOutcome};
use crate::config::{Action, BindingTable, Command, Config, Decoded, Key, KeyDecoder};
use crate::model::{Direction, Document, Position, Scope, Span};
use crate::standoff;
use crate::store::{AnnotationStore, Edit};

/// Whether the session annotates from scratch or adjudicates existing files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Annotate,
    Adjudicate,
}

/// The annotation type this run applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationKind {
    Label,
    Text,
    Link,
}

/// Which informational panels are visible right now.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViewState {
    pub show_legend: bool,
    pub show_line_numbers: bool,
    pub show_current_item: bool,
    pub show_progress: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchDirection {
    Forward,
    Backward,
}

#[derive(Debug, Clone)]
struct SearchState {
    query: String,
    /// Last visited raw match (line, column), used so repeated searches step
    /// through every occurrence even when several share one item.
    last: Option<(usize, usize)>,
}

/// What a one-line prompt is collecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    TextEntry,
    Search,
}

#[derive(Debug, Clone)]
pub struct Prompt {
    pub kind: PromptKind,
    pub buffer: String,
}

/// One data file open in the session.
#[derive(Debug)]
pub struct FileState {
    pub path: PathBuf,
    pub doc: Document,
    pub store: AnnotationStore,
    pub cursor: Position,
    pub selection: Span,
    pub scroll: usize,
    /// Serialization at last load/save; the dirty flag compares against it.
    saved: String,
    pub adjudication: Option<AdjudicationState>,
}

impl FileState {
    pub fn is_dirty(&self) -> bool {
        standoff::serialize(&self.store) != self.saved
    }
}

/// Inputs for one file when opening a session.
pub struct SessionFile {
    pub path: PathBuf,
    pub doc: Document,
    pub store: AnnotationStore,
    /// Contents of the output file on disk, if it already exists.
    pub saved: Option<String>,
    pub adjudication: Option<AdjudicationState>,
}

pub struct SessionOptions {
    pub scope: Scope,
    pub mode: Mode,
    pub kind: AnnotationKind,
    pub config: Config,
    /// Overrides the derived output path; only sensible with a single file.
    pub output_override: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no files to annotate")]
    NoFiles,
    #[error("{path} has no items at {} scope", .scope.name())]
    NoItems { path: PathBuf, scope: Scope },
    #[error(transparent)]
    Write(#[from] standoff::StandoffError),
}

/// Whether the event loop should keep going.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Continue,
    Quit,
}

pub struct Session {
    files: Vec<FileState>,
    current: usize,
    scope: Scope,
    mode: Mode,
    kind: AnnotationKind,
    link_anchor: Option<Span>,
    view: ViewState,
    search: Option<SearchState>,
    prompt: Option<Prompt>,
    status: String,
    pending_quit: bool,
    decoder: KeyDecoder,
    table: BindingTable,
    config: Config,
    output_override: Option<PathBuf>,
}

impl Session {
    pub fn new(files: Vec<SessionFile>, options: SessionOptions) -> Result<Session, SessionError> {
        if files.is_empty() {
            return Err(SessionError::NoFiles);
        }
        let mut states = Vec::with_capacity(files.len());
        for file in files {
            let cursor = file
                .doc
                .first_item(options.scope)
                .ok_or_else(|| SessionError::NoItems {
                    path: file.path.clone(),
                    scope: options.scope,
                })?;
            let saved = file
                .saved
                .unwrap_or_else(|| standoff::serialize(&AnnotationStore::new()));
            states.push(FileState {
                path: file.path,
                doc: file.doc,
                store: file.store,
                cursor,
                selection: Span::point(cursor),
                scroll: 0,
                saved,
                adjudication: file.adjudication,
            });
        }
        let table = BindingTable::from_config(&options.config);
        let view = ViewState {
            show_legend: options.config.view.show_legend,
            show_line_numbers: options.config.view.show_line_numbers,
            show_current_item: options.config.view.show_current_item,
            show_progress: options.config.view.show_progress,
        };
        Ok(Session {
            files: states,
            current: 0,
            scope: options.scope,
            mode: options.mode,
            kind: options.kind,
            link_anchor: None,
            view,
            search: None,
            prompt: None,
            status: String::new(),
            pending_quit: false,
            decoder: KeyDecoder::new(),
            table,
            config: options.config,
            output_override: options.output_override,
        })
    }

    // --- accessors -------------------------------------------------------

    pub fn current_file(&self) -> &FileState {
        &self.files[self.current]
    }

    fn current_file_mut(&mut self) -> &mut FileState {
        &mut self.files[self.current]
    }

    pub fn files(&self) -> &[FileState] {
        &self.files
    }

    pub fn current_index(&self) -> usize {
        self.current
    }

    pub fn doc(&self) -> &Document {
        &self.current_file().doc
    }

    pub fn store(&self) -> &AnnotationStore {
        &self.current_file().store
    }

    pub fn cursor(&self) -> Position {
        self.current_file().cursor
    }

    pub fn selection(&self) -> Span {
        self.current_file().selection
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn kind(&self) -> AnnotationKind {
        self.kind
    }

    pub fn link_anchor(&self) -> Option<Span> {
        self.link_anchor
    }

    pub fn view(&self) -> &ViewState {
        &self.view
    }

    pub fn status(&self) -> &str {
        &self.status
    }

    pub fn prompt(&self) -> Option<&Prompt> {
        self.prompt.as_ref()
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn adjudication(&self) -> Option<&AdjudicationState> {
        self.current_file().adjudication.as_ref()
    }

    pub fn pending_keys(&self) -> (&[Key], Option<u32>) {
        self.decoder.pending()
    }

    /// Raw (line, column) of the match the last search landed on.
    pub fn search_match(&self) -> Option<(usize, usize)> {
        self.search.as_ref().and_then(|s| s.last)
    }

    pub fn any_dirty(&self) -> bool {
        self.files.iter().any(FileState::is_dirty)
    }

    /// Remembers the scroll a renderer settled on for the current file.
    pub fn set_scroll(&mut self, scroll: usize) {
        self.current_file_mut().scroll = scroll;
    }

    /// Output path for the file at `index`: the explicit override, or the
    /// data path plus the mode's suffix.
    pub fn output_path(&self, index: usize) -> PathBuf {
        if let Some(path) = &self.output_override {
            return path.clone();
        }
        let data = &self.files[index].path;
        match self.mode {
            Mode::Annotate => standoff::annotation_path(data),
            Mode::Adjudicate => standoff::adjudicated_path(data),
        }
    }

    // --- input -----------------------------------------------------------

    /// Feeds one raw key: prompts consume it directly, otherwise the decoder
    /// accumulates it into a command.
    pub fn feed_key(&mut self, key: Key) -> Outcome {
        if self.prompt.is_some() {
            self.prompt_key(key);
            return Outcome::Continue;
        }
        match self.decoder.push(key, &self.table) {
            Decoded::Command(cmd) => self.execute(&cmd),
            Decoded::Pending => Outcome::Continue,
            Decoded::Unbound => {
                self.status = format!("unbound key: {key}");
                Outcome::Continue
            }
        }
    }

    fn prompt_key(&mut self, key: Key) {
        match key {
            Key::Enter => {
                if let Some(prompt) = self.prompt.take() {
                    self.commit_prompt(prompt);
                }
            }
            Key::Esc => {
                self.prompt = None;
                self.status = "cancelled".to_string();
            }
            _ => {
                let Some(prompt) = &mut self.prompt else {
                    return;
                };
                match key {
                    Key::Backspace => {
                        prompt.buffer.pop();
                    }
                    Key::Char(c) => prompt.buffer.push(c),
                    Key::Space => prompt.buffer.push(' '),
                    Key::Tab => prompt.buffer.push('\t'),
                    _ => {}
                }
            }
        }
    }

    fn commit_prompt(&mut self, prompt: Prompt) {
        match prompt.kind {
            PromptKind::TextEntry => {
                let selection = self.selection();
                let edit = self.current_file_mut().store.set_text(selection, &prompt.buffer);
                match edit {
                    Some(edit) => {
                        self.note_edit(&edit);
                        self.status = if prompt.buffer.is_empty() {
                            format!("cleared text on {selection}")
                        } else {
                            format!("text set on {selection}")
                        };
                    }
                    None => self.status = "no change".to_string(),
                }
            }
            PromptKind::Search => {
                if prompt.buffer.is_empty() {
                    self.status = "empty search".to_string();
                    return;
                }
                self.search = Some(SearchState {
                    query: prompt.buffer,
                    last: None,
                });
                self.run_search(SearchDirection::Forward);
            }
        }
    }

    // --- command execution -----------------------------------------------

    pub fn execute(&mut self, cmd: &Command) -> Outcome {
        if cmd.action != Action::Quit {
            self.pending_quit = false;
        }
        let count = cmd.count;
        self.status.clear();
        match &cmd.action {
            Action::MoveUp => self.repeat_move(Direction::Up, count),
            Action::MoveDown => self.repeat_move(Direction::Down, count),
            Action::MoveLeft => self.repeat_move(Direction::Left, count),
            Action::MoveRight => self.repeat_move(Direction::Right, count),
            Action::ExtendUp => self.repeat_extend(Direction::Up, count),
            Action::ExtendDown => self.repeat_extend(Direction::Down, count),
            Action::ExtendLeft => self.repeat_extend(Direction::Left, count),
            Action::ExtendRight => self.repeat_extend(Direction::Right, count),
            Action::ContractUp => self.repeat_contract(Direction::Up, count),
            Action::ContractDown => self.repeat_contract(Direction::Down, count),
            Action::ContractLeft => self.repeat_contract(Direction::Left, count),
            Action::ContractRight => self.repeat_contract(Direction::Right, count),
            Action::ApplyLabel(name) => self.apply_label(name),
            Action::EnterText => self.open_text_prompt(),
            Action::ToggleLinkAnchor => self.toggle_link_anchor(),
            Action::CommitLink => self.commit_link(),
            Action::Undo => self.undo(),
            Action::SearchPrompt => {
                self.prompt = Some(Prompt {
                    kind: PromptKind::Search,
                    buffer: String::new(),
                });
            }
            Action::SearchNext => {
                self.run_search(SearchDirection::Forward);
            }
            Action::SearchPrev => {
                self.run_search(SearchDirection::Backward);
            }
            Action::ToggleLegend => self.view.show_legend = !self.view.show_legend,
            Action::ToggleLineNumbers => {
                self.view.show_line_numbers = !self.view.show_line_numbers
            }
            Action::ToggleCurrentItem => {
                self.view.show_current_item = !self.view.show_current_item
            }
            Action::ToggleProgress => self.view.show_progress = !self.view.show_progress,
            Action::NextDisagreement => self.jump_to_disagreement(),
            Action::RejectAt => self.reject_at_cursor(),
            Action::NextFile => self.switch_file(count as isize),
            Action::PrevFile => self.switch_file(-(count as isize)),
            Action::Save => match self.save() {
                Ok(paths) if paths.is_empty() => self.status = "no changes to save".to_string(),
                Ok(paths) => {
                    let names: Vec<String> =
                        paths.iter().map(|p| p.display().to_string()).collect();
                    self.status = format!("saved {}", names.join(", "));
                }
                Err(e) => self.status = format!("save failed: {e}"),
            },
            Action::Quit => {
                let unresolved: usize = self
                    .files
                    .iter()
                    .filter_map(|f| f.adjudication.as_ref())
                    .map(|a| a.unresolved_items().count())
                    .sum();
                if (self.any_dirty() || unresolved > 0) && !self.pending_quit {
                    self.pending_quit = true;
                    self.status = if unresolved > 0 {
                        format!(
                            "{unresolved} unresolved disagreement(s): resolve them, or quit again to leave anyway"
                        )
                    } else {
                        "unsaved changes: save first, or quit again to discard".to_string()
                    };
                } else {
                    return Outcome::Quit;
                }
            }
        }
        Outcome::Continue
    }

    fn repeat_move(&mut self, dir: Direction, count: u32) {
        for _ in 0..count {
            let file = self.current_file_mut();
            let next = file
                .doc
                .next_item(file.cursor, dir)
                .expect("cursor stays valid");
            file.cursor = next;
            file.selection = Span::point(next);
        }
    }

    fn repeat_extend(&mut self, dir: Direction, count: u32) {
        for _ in 0..count {
            let file = self.current_file_mut();
            let (start, end) = (file.selection.start(), file.selection.end());
            let grown = match dir {
                Direction::Left | Direction::Up => Span::normalized(
                    file.doc.next_item(start, dir).expect("start stays valid"),
                    end,
                ),
                Direction::Right | Direction::Down => Span::normalized(
                    start,
                    file.doc.next_item(end, dir).expect("end stays valid"),
                ),
            };
            file.selection = grown.expect("endpoints share the cursor scope");
        }
    }

    /// Shrinks the selection edge opposite to `extend` in the same
    /// direction, never past the cursor.
    fn repeat_contract(&mut self, dir: Direction, count: u32) {
        for _ in 0..count {
            let file = self.current_file_mut();
            let (start, end) = (file.selection.start(), file.selection.end());
            let cursor = file.cursor;
            let shrunk = match dir {
                Direction::Left | Direction::Up => {
                    let inward = match dir {
                        Direction::Left => Direction::Right,
                        _ => Direction::Down,
                    };
                    let new_start = file
                        .doc
                        .next_item(start, inward)
                        .expect("start stays valid")
                        .min(cursor);
                    Span::normalized(new_start, end)
                }
                Direction::Right | Direction::Down => {
                    let inward = match dir {
                        Direction::Right => Direction::Left,
                        _ => Direction::Up,
                    };
                    let new_end = file
                        .doc
                        .next_item(end, inward)
                        .expect("end stays valid")
                        .max(cursor);
                    Span::normalized(start, new_end)
                }
            };
            file.selection = shrunk.expect("endpoints share the cursor scope");
        }
    }

    /// Records adjudication progress for annotations the user added.
    fn note_edit(&mut self, edit: &Edit) {
        let file = self.current_file_mut();
        if let Some(adjudication) = &mut file.adjudication {
            let added = match edit {
                Edit::Added(a) => Some(a),
                Edit::Replaced { new, .. } => Some(new),
                Edit::Removed(_) => None,
            };
            if let Some(annotation) = added {
                adjudication.mark_resolved_by(&file.doc, annotation);
            }
        }
    }

    fn apply_label(&mut self, name: &str) {
        if self.kind != AnnotationKind::Label {
            self.status = "labels are disabled in this annotation mode".to_string();
            return;
        }
        let selection = self.selection();
        match self.current_file_mut().store.apply_label(selection, name) {
            Ok(edit) => {
                let verb = match &edit {
                    Edit::Added(_) => "applied",
                    _ => "removed",
                };
                self.note_edit(&edit);
                self.status = format!("{verb} {name} on {selection}");
            }
            Err(e) => self.status = format!("{e}"),
        }
    }

    fn open_text_prompt(&mut self) {
        if self.kind != AnnotationKind::Text {
            self.status = "free text is disabled in this annotation mode".to_string();
            return;
        }
        let existing = self
            .store()
            .text_at(self.selection())
            .unwrap_or_default()
            .to_string();
        self.prompt = Some(Prompt {
            kind: PromptKind::TextEntry,
            buffer: existing,
        });
    }

    fn toggle_link_anchor(&mut self) {
        if self.kind != AnnotationKind::Link {
            self.status = "links are disabled in this annotation mode".to_string();
            return;
        }
        let selection = self.selection();
        if self.link_anchor == Some(selection) {
            self.link_anchor = None;
            self.status = "link source cleared".to_string();
        } else {
            self.link_anchor = Some(selection);
            self.status = format!("link source set to {selection}");
        }
    }

    fn commit_link(&mut self) {
        if self.kind != AnnotationKind::Link {
            self.status = "links are disabled in this annotation mode".to_string();
            return;
        }
        let Some(source) = self.link_anchor else {
            self.status = "no link source: mark one first".to_string();
            return;
        };
        let target = self.selection();
        match self.current_file_mut().store.toggle_link(source, target) {
            Ok(edit) => {
                let verb = match &edit {
                    Edit::Added(_) => "linked",
                    _ => "unlinked",
                };
                self.note_edit(&edit);
                self.status = format!("{verb} {source} -> {target}");
            }
            Err(e) => self.status = format!("{e}"),
        }
    }

    fn undo(&mut self) {
        match self.current_file_mut().store.undo() {
            Some(_) => self.status = "undone".to_string(),
            None => self.status = "nothing to undo".to_string(),
        }
    }

    fn jump_to_disagreement(&mut self) {
        let cursor = self.cursor();
        let target = match self.current_file().adjudication.as_ref() {
            None => {
                self.status = "not adjudicating".to_string();
                return;
            }
            Some(adjudication) => adjudication.next_disagreement(cursor),
        };
        match target {
            Some(item) => {
                let file = self.current_file_mut();
                file.cursor = item;
                file.selection = Span::point(item);
                self.status = format!("disagreement at {item}");
            }
            None => self.status = "all disagreements resolved".to_string(),
        }
    }

    fn reject_at_cursor(&mut self) {
        let cursor = self.cursor();
        let outcome = {
            let file = self.current_file_mut();
            match &mut file.adjudication {
                None => None,
                Some(adjudication) => Some(adjudication.resolve(
                    &file.doc,
                    &mut file.store,
                    Decision::RejectAllAt(cursor),
                )),
            }
        };
        self.status = match outcome {
            None => "not adjudicating".to_string(),
            Some(ResolveOutcome::Resolved { .. }) => {
                format!("resolved {cursor} with no annotation")
            }
            Some(ResolveOutcome::NoDisputeTouched) => format!("no disagreement at {cursor}"),
        };
    }

    fn switch_file(&mut self, delta: isize) {
        let last = self.files.len() as isize - 1;
        let next = (self.current as isize + delta).clamp(0, last) as usize;
        if next != self.current {
            self.current = next;
            self.link_anchor = None;
            if let Some(search) = &mut self.search {
                search.last = None;
            }
        }
        self.status = format!(
            "file {}/{}: {}",
            self.current + 1,
            self.files.len(),
            self.current_file().path.display()
        );
    }

    // --- search ------------------------------------------------------------

    /// Starts a fresh search for `query` and jumps to the first hit.
    pub fn search(&mut self, query: &str, direction: SearchDirection) -> Option<Position> {
        if query.is_empty() {
            return None;
        }
        self.search = Some(SearchState {
            query: query.to_string(),
            last: None,
        });
        self.run_search(direction)
    }

    /// All raw match positions (line, code-point column) of `query`, in
    /// document order.
    fn matches_in_doc(doc: &Document, query: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (l, line) in doc.lines().iter().enumerate() {
            let text = line.raw_text();
            for (byte, _) in text.match_indices(query) {
                let col = text[..byte].chars().count();
                out.push((l, col));
            }
        }
        out
    }

    /// Maps a raw match to the item holding it: at token scope the token
    /// containing the match column (or the nearest token on that line), at
    /// character scope the character itself.
    fn item_for_match(doc: &Document, scope: Scope, line: usize, col: usize) -> Option<Position> {
        match scope {
            Scope::Document => Some(Position::Document),
            Scope::Line => Some(Position::Line(line)),
            Scope::Token | Scope::Character => {
                let tokens = doc.line(line).tokens();
                let token = doc.line(line).token_at_column(col).or_else(|| {
                    tokens
                        .iter()
                        .position(|t| t.start_column() > col)
                        .or_else(|| (!tokens.is_empty()).then_some(tokens.len() - 1))
                })?;
                if scope == Scope::Token {
                    Some(Position::Token(line, token))
                } else {
                    let t = &tokens[token];
                    let c = col.saturating_sub(t.start_column()).min(t.len() - 1);
                    Some(Position::Character(line, token, c))
                }
            }
        }
    }

    /// Reference point for "after the cursor" in (line, column) terms.
    fn cursor_ref(&self) -> (usize, usize) {
        let file = self.current_file();
        match file.cursor {
            Position::Document => (0, 0),
            Position::Line(l) => (l, 0),
            Position::Token(l, t) => (l, file.doc.line(l).tokens()[t].start_column()),
            Position::Character(l, t, c) => {
                (l, file.doc.line(l).tokens()[t].start_column() + c)
            }
        }
    }

    fn run_search(&mut self, direction: SearchDirection) -> Option<Position> {
        let Some(state) = &self.search else {
            self.status = "no previous search".to_string();
            return None;
        };
        let query = state.query.clone();
        let file = self.current_file();
        let matches = Self::matches_in_doc(&file.doc, &query);
        if matches.is_empty() {
            self.status = format!("not found: {query}");
            return None;
        }
        // Continue from the last visited match while the cursor still sits on
        // it; otherwise search relative to the cursor.
        let anchor = match state.last {
            Some(last)
                if Self::item_for_match(&file.doc, self.scope, last.0, last.1)
                    == Some(file.cursor) =>
            {
                last
            }
            _ => self.cursor_ref(),
        };
        let found = match direction {
            SearchDirection::Forward => matches
                .iter()
                .find(|m| **m > anchor)
                .copied()
                .unwrap_or(matches[0]),
            SearchDirection::Backward => matches
                .iter()
                .rev()
                .find(|m| **m < anchor)
                .copied()
                .unwrap_or(*matches.last().expect("non-empty")),
        };
        let item = Self::item_for_match(&file.doc, self.scope, found.0, found.1);
        let Some(item) = item else {
            self.status = format!("match for {query} has no item at this scope");
            return None;
        };
        let file = self.current_file_mut();
        file.cursor = item;
        file.selection = Span::point(item);
        if let Some(state) = &mut self.search {
            state.last = Some(found);
        }
        self.status = format!("match at line {}, column {}", found.0, found.1);
        Some(item)
    }

    // --- persistence -------------------------------------------------------

    /// Writes every dirty store atomically to its output path and clears its
    /// dirty flag. Files already clean are skipped. On failure the failed
    /// file (and any not yet reached) keeps its dirty flag.
    pub fn save(&mut self) -> Result<Vec<PathBuf>, SessionError> {
        let mut written = Vec::new();
        for index in 0..self.files.len() {
            let text = standoff::serialize(&self.files[index].store);
            if text == self.files[index].saved {
                continue;
            }
            let path = self.output_path(index);
            standoff::write_atomic(&path, &text)?;
            self.files[index].saved = text;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config, Action};
    use crate::model::Position;

    fn open(text: &str, kind: AnnotationKind, scope: Scope) -> Session {
        open_with_config(text, kind, scope, Config::default())
    }

    fn open_with_config(
        text: &str,
        kind: AnnotationKind,
        scope: Scope,
        config: Config,
    ) -> Session {
        let doc = Document::tokenize(text);
        Session::new(
            vec![SessionFile {
                path: PathBuf::from("test.txt"),
                doc,
                store: AnnotationStore::new(),
                saved: None,
                adjudication: None,
            }],
            SessionOptions {
                scope,
                mode: Mode::Annotate,
                kind,
                config,
                output_override: None,
            },
        )
        .unwrap()
    }

    fn run(session: &mut Session, action: Action, count: u32) -> Outcome {
        session.execute(&Command::new(action, count))
    }

    #[test]
    fn movement_round_trip_restores_cursor() {
        let mut s = open("a b c d e\nf g", AnnotationKind::Label, Scope::Token);
        run(&mut s, Action::MoveRight, 3);
        run(&mut s, Action::MoveLeft, 3);
        assert_eq!(s.cursor(), Position::Token(0, 0));
    }

    #[test]
    fn repeat_equals_repeated_singles() {
        let text = "a b c\nd e f g\n\nh";
        let mut bulk = open(text, AnnotationKind::Label, Scope::Token);
        let mut singles = open(text, AnnotationKind::Label, Scope::Token);
        run(&mut bulk, Action::MoveDown, 12);
        for _ in 0..12 {
            run(&mut singles, Action::MoveDown, 1);
        }
        assert_eq!(bulk.cursor(), singles.cursor());
        assert_eq!(bulk.selection(), singles.selection());
    }

    #[test]
    fn selection_contains_cursor_under_extension() {
        let mut s = open("a b c d e\nf g h", AnnotationKind::Label, Scope::Token);
        run(&mut s, Action::MoveRight, 2);
        run(&mut s, Action::ExtendRight, 3);
        run(&mut s, Action::ExtendLeft, 1);
        let sel = s.selection();
        assert!(sel.contains(s.cursor()));
        assert_eq!(sel.start(), Position::Token(0, 1));
        assert_eq!(sel.end(), Position::Token(1, 0));

        run(&mut s, Action::ContractRight, 10);
        run(&mut s, Action::ContractLeft, 10);
        assert_eq!(s.selection(), Span::point(s.cursor()));
    }

    #[test]
    fn label_apply_then_undo_restores_serialization() {
        let mut s = open("a b", AnnotationKind::Label, Scope::Token);
        let before = standoff::serialize(s.store());
        run(&mut s, Action::ApplyLabel("Offer".into()), 1);
        assert_eq!(s.store().len(), 1);
        run(&mut s, Action::Undo, 1);
        assert_eq!(standoff::serialize(s.store()), before);
    }

    #[test]
    fn label_command_requires_label_kind() {
        let mut s = open("a b", AnnotationKind::Link, Scope::Token);
        run(&mut s, Action::ApplyLabel("Offer".into()), 1);
        assert!(s.store().is_empty());
        assert!(s.status().contains("disabled"));
    }

    #[test]
    fn link_workflow_pins_anchor_then_commits() {
        let mut s = open("one\ntwo\nthree", AnnotationKind::Link, Scope::Line);
        run(&mut s, Action::MoveDown, 2);
        run(&mut s, Action::ToggleLinkAnchor, 1);
        assert_eq!(s.link_anchor(), Some(Span::point(Position::Line(2))));
        run(&mut s, Action::MoveUp, 2);
        run(&mut s, Action::CommitLink, 1);
        assert_eq!(
            s.store().linked_partners(Position::Line(2)),
            vec![&Span::point(Position::Line(0))]
        );
        // Anchor stays pinned for further targets; toggling clears it.
        run(&mut s, Action::MoveDown, 2);
        run(&mut s, Action::ToggleLinkAnchor, 1);
        assert_eq!(s.link_anchor(), None);
    }

    #[test]
    fn text_prompt_sets_and_clears() {
        let mut s = open("a b", AnnotationKind::Text, Scope::Token);
        run(&mut s, Action::EnterText, 1);
        assert!(s.prompt().is_some());
        for ch in "note".chars() {
            s.feed_key(Key::from_char(ch));
        }
        s.feed_key(Key::Enter);
        assert_eq!(s.store().text_at(s.selection()), Some("note"));

        // Re-opening prefills; ESC cancels without change.
        run(&mut s, Action::EnterText, 1);
        assert_eq!(s.prompt().unwrap().buffer, "note");
        s.feed_key(Key::Esc);
        assert_eq!(s.store().text_at(s.selection()), Some("note"));
    }

    #[test]
    fn search_moves_to_containing_token() {
        let mut s = open("alpha beta\ngamma x=1\ndelta", AnnotationKind::Label, Scope::Token);
        let hit = s.search("=", SearchDirection::Forward);
        assert_eq!(hit, Some(Position::Token(1, 1)));
        assert_eq!(s.cursor(), Position::Token(1, 1));
    }

    #[test]
    fn search_not_found_leaves_state_unchanged() {
        let mut s = open("alpha beta", AnnotationKind::Label, Scope::Token);
        let before = s.cursor();
        assert_eq!(s.search("zzz", SearchDirection::Forward), None);
        assert_eq!(s.cursor(), before);
    }

    #[test]
    fn search_next_wraps_and_visits_every_match() {
        let mut s = open("x a x\nb x", AnnotationKind::Label, Scope::Token);
        // Oracle: brute-force scan of every line for the pattern.
        let mut expected = Vec::new();
        for (l, line) in ["x a x", "b x"].iter().enumerate() {
            for (i, ch) in line.chars().enumerate() {
                if ch == 'x' {
                    expected.push((l, i));
                }
            }
        }
        let mut visited = Vec::new();
        s.search("x", SearchDirection::Forward);
        for _ in 0..expected.len() {
            let state = s.search.as_ref().unwrap();
            visited.push(state.last.unwrap());
            run(&mut s, Action::SearchNext, 1);
        }
        // The cursor starts on the match at (0,0), so the walk begins
        // strictly after it and wraps around the full match set.
        assert_eq!(visited, vec![(0, 4), (1, 2), (0, 0)]);
        assert_eq!(s.search.as_ref().unwrap().last, Some((0, 4)));
    }

    #[test]
    fn file_switching_preserves_per_file_state() {
        let files = vec![
            SessionFile {
                path: PathBuf::from("one.txt"),
                doc: Document::tokenize("a b c"),
                store: AnnotationStore::new(),
                saved: None,
                adjudication: None,
            },
            SessionFile {
                path: PathBuf::from("two.txt"),
                doc: Document::tokenize("d e"),
                store: AnnotationStore::new(),
                saved: None,
                adjudication: None,
            },
        ];
        let mut s = Session::new(
            files,
            SessionOptions {
                scope: Scope::Token,
                mode: Mode::Annotate,
                kind: AnnotationKind::Label,
                config: Config::default(),
                output_override: None,
            },
        )
        .unwrap();
        run(&mut s, Action::MoveRight, 2);
        run(&mut s, Action::ApplyLabel("K".into()), 1);
        let cursor_before = s.cursor();

        run(&mut s, Action::NextFile, 1);
        assert_eq!(s.current_index(), 1);
        assert_eq!(s.cursor(), Position::Token(0, 0));
        run(&mut s, Action::PrevFile, 1);
        assert_eq!(s.cursor(), cursor_before);
        assert_eq!(s.store().len(), 1);

        // Clamped at the ends.
        run(&mut s, Action::PrevFile, 5);
        assert_eq!(s.current_index(), 0);
    }

    #[test]
    fn quit_requires_confirmation_when_dirty() {
        let mut s = open("a b", AnnotationKind::Label, Scope::Token);
        run(&mut s, Action::ApplyLabel("K".into()), 1);
        assert_eq!(run(&mut s, Action::Quit, 1), Outcome::Continue);
        assert!(s.status().contains("unsaved"));
        // Any other command withdraws the pending quit.
        run(&mut s, Action::MoveRight, 1);
        assert_eq!(run(&mut s, Action::Quit, 1), Outcome::Continue);
        // Second quit in a row goes through.
        assert_eq!(run(&mut s, Action::Quit, 1), Outcome::Quit);
    }

    #[test]
    fn quit_is_immediate_when_clean() {
        let mut s = open("a b", AnnotationKind::Label, Scope::Token);
        assert_eq!(run(&mut s, Action::Quit, 1), Outcome::Quit);
    }

    #[test]
    fn quit_warns_while_disagreements_are_unresolved() {
        use crate::adjudicate::AdjudicationState;
        let doc = Document::tokenize("one\ntwo\nthree");
        let mut a = AnnotationStore::new();
        a.apply_label(Span::point(Position::Line(1)), "X").unwrap();
        let b = AnnotationStore::new();
        let adjudication = AdjudicationState::new(
            &doc,
            vec![("a".to_string(), a), ("b".to_string(), b)],
        )
        .unwrap();
        let store = adjudication.agreed_core();
        let mut s = Session::new(
            vec![SessionFile {
                path: PathBuf::from("chat.txt"),
                doc,
                store,
                saved: None,
                adjudication: Some(adjudication),
            }],
            SessionOptions {
                scope: Scope::Line,
                mode: Mode::Adjudicate,
                kind: AnnotationKind::Label,
                config: Config::default(),
                output_override: None,
            },
        )
        .unwrap();

        assert_eq!(run(&mut s, Action::Quit, 1), Outcome::Continue);
        assert!(s.status().contains("unresolved"));

        // Resolving the lone dispute makes the quit clean (store not dirty:
        // nothing was ever added to the resolution).
        run(&mut s, Action::NextDisagreement, 1);
        assert_eq!(s.cursor(), Position::Line(1));
        run(&mut s, Action::RejectAt, 1);
        assert_eq!(run(&mut s, Action::Quit, 1), Outcome::Quit);
    }

    #[test]
    fn save_writes_only_dirty_files() {
        let dir = std::env::temp_dir().join("slate-session-save-test");
        std::fs::create_dir_all(&dir).unwrap();
        let files = vec![
            SessionFile {
                path: dir.join("one.txt"),
                doc: Document::tokenize("a b"),
                store: AnnotationStore::new(),
                saved: None,
                adjudication: None,
            },
            SessionFile {
                path: dir.join("two.txt"),
                doc: Document::tokenize("c d"),
                store: AnnotationStore::new(),
                saved: None,
                adjudication: None,
            },
        ];
        let mut s = Session::new(
            files,
            SessionOptions {
                scope: Scope::Token,
                mode: Mode::Annotate,
                kind: AnnotationKind::Label,
                config: Config::default(),
                output_override: None,
            },
        )
        .unwrap();

        assert_eq!(s.save().unwrap(), Vec::<PathBuf>::new());

        run(&mut s, Action::ApplyLabel("K".into()), 1);
        let written = s.save().unwrap();
        assert_eq!(written, vec![dir.join("one.txt.annotations")]);
        assert!(!s.any_dirty());
        assert!(!dir.join("two.txt.annotations").exists());

        let contents = std::fs::read_to_string(dir.join("one.txt.annotations")).unwrap();
        assert_eq!(contents, "label (0,0) K\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn keys_decode_through_config_bindings() {
        let config = parse_config("label Offer SPACE+a green\n").unwrap();
        let mut s = open_with_config("a b c", AnnotationKind::Label, Scope::Token, config);
        s.feed_key(Key::Char('2'));
        s.feed_key(Key::Right);
        assert_eq!(s.cursor(), Position::Token(0, 2));
        s.feed_key(Key::Space);
        s.feed_key(Key::Char('a'));
        assert_eq!(s.store().labels_at(Position::Token(0, 2)), vec!["Offer"]);
    }
}
