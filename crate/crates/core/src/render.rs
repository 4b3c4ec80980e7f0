//! The pure renderer: session state in, grid of styled cells out.
//!
//! Nothing here touches a terminal. A `ScreenModel` is a plain rows-by-cols
//! grid; the terminal backend blits it and nothing else, so every detail of
//! the display contract can be asserted in tests against dumped grids.
//!
//! Annotation state is carried by the cell background so glyphs stay
//! legible; underline is reserved for the selection and for link candidates.

use unicode_segmentation::UnicodeSegmentation;
use unicode_width::UnicodeWidthStr;

use crate::config::{format_key_sequence, Color, LabelSpec, LABEL_PALETTE};
use crate::model::{Position, Scope, Span};
use crate::session::{AnnotationKind, Mode, PromptKind, Session};
use crate::store::{Annotation, AnnotationStore};

/// Smallest grid the full layout fits in; below this a placeholder message
/// is rendered instead.
pub const MIN_WIDTH: usize = 10;
pub const MIN_HEIGHT: usize = 2;

/// One screen cell. Wide glyphs occupy two cells: the glyph sits in the
/// first and the second holds an empty continuation glyph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub glyph: String,
    pub fg: Color,
    pub bg: Color,
    pub underline: bool,
    /// Document location (line, code-point column) this cell shows, if any.
    pub source: Option<(usize, usize)>,
}

impl Cell {
    fn blank() -> Cell {
        Cell {
            glyph: " ".to_string(),
            fg: Color::Default,
            bg: Color::Default,
            underline: false,
            source: None,
        }
    }
}

/// The grid a renderer produced for one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScreenModel {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    /// Cursor location in grid coordinates, when visible.
    pub cursor: Option<(usize, usize)>,
    /// First document line shown; callers persist this back to the session.
    pub scroll: usize,
}

impl ScreenModel {
    fn blank(width: usize, height: usize) -> ScreenModel {
        ScreenModel {
            width,
            height,
            cells: vec![Cell::blank(); width * height],
            cursor: None,
            scroll: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[Cell] {
        &self.cells[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cell]> {
        self.cells.chunks(self.width.max(1))
    }

    fn cell_mut(&mut self, row: usize, col: usize) -> &mut Cell {
        &mut self.cells[row * self.width + col]
    }

    /// Row text with continuation cells elided, for assertions.
    pub fn row_text(&self, row: usize) -> String {
        self.row(row).iter().map(|c| c.glyph.as_str()).collect()
    }

    /// Deterministic text form: the glyph grid plus per-cell background and
    /// underline maps. Snapshot tests compare this byte for byte.
    pub fn dump(&self) -> String {
        let cursor = match self.cursor {
            Some((r, c)) => format!("{r},{c}"),
            None => "-".to_string(),
        };
        let mut out = format!(
            "size {}x{} cursor {} scroll {}\nTEXT\n",
            self.width, self.height, cursor, self.scroll
        );
        for row in 0..self.height {
            out.push('|');
            out.push_str(&self.row_text(row));
            out.push_str("|\n");
        }
        out.push_str("STYLE\n");
        for row in 0..self.height {
            out.push('|');
            for cell in self.row(row) {
                if cell.glyph.is_empty() {
                    continue; // continuation of a wide glyph
                }
                out.push(style_letter(cell.bg));
            }
            out.push_str("|\n");
        }
        out.push_str("UNDERLINE\n");
        for row in 0..self.height {
            out.push('|');
            for cell in self.row(row) {
                if cell.glyph.is_empty() {
                    continue;
                }
                out.push(if cell.underline { '_' } else { '.' });
            }
            out.push_str("|\n");
        }
        out
    }
}

fn style_letter(color: Color) -> char {
    match color {
        Color::Default => '.',
        Color::Black => 'k',
        Color::Red => 'r',
        Color::Green => 'g',
        Color::Yellow => 'y',
        Color::Blue => 'b',
        Color::Magenta => 'm',
        Color::Cyan => 'c',
        Color::White => 'w',
        Color::BrightRed => 'R',
        Color::BrightGreen => 'G',
        Color::BrightYellow => 'Y',
        Color::BrightBlue => 'B',
        Color::BrightMagenta => 'M',
        Color::BrightCyan => 'C',
    }
}

/// Symbolic display states, resolved to colors in one place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StyleClass {
    Plain,
    Label(Color),
    MultiLabel,
    HasText,
    LinkSource,
    LinkTarget,
    HasLink,
    AdjCurrent,
    AdjAgreed,
    AdjDisputedHere,
    AdjDisputedElsewhere,
}

impl StyleClass {
    pub fn background(self) -> Color {
        match self {
            StyleClass::Plain => Color::Default,
            StyleClass::Label(color) => color,
            StyleClass::MultiLabel => Color::BrightMagenta,
            StyleClass::HasText => Color::Cyan,
            StyleClass::LinkSource => Color::Green,
            StyleClass::LinkTarget => Color::Blue,
            StyleClass::HasLink => Color::Yellow,
            StyleClass::AdjCurrent => Color::Green,
            StyleClass::AdjAgreed => Color::Blue,
            StyleClass::AdjDisputedHere => Color::BrightBlue,
            StyleClass::AdjDisputedElsewhere => Color::Red,
        }
    }
}

/// Background class plus the underline modifier for one item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ItemStyle {
    pub class: StyleClass,
    pub underline: bool,
}

/// Color for a label name: its configured color, or a palette color cycled
/// by the label's rank among unconfigured names in the store.
fn label_color(session: &Session, name: &str) -> Color {
    if let Some(spec) = session.config().labels.iter().find(|l| l.name == name) {
        return spec.color;
    }
    let mut unknown: Vec<&str> = session
        .store()
        .iter()
        .filter_map(|a| match a {
            Annotation::Label { name, .. } => Some(name.as_str()),
            _ => None,
        })
        .filter(|n| !session.config().labels.iter().any(|l| l.name == *n))
        .collect();
    unknown.sort_unstable();
    unknown.dedup();
    let rank = unknown.iter().position(|n| *n == name).unwrap_or(0);
    LABEL_PALETTE[rank % LABEL_PALETTE.len()].1
}

fn has_link_from_to(store: &AnnotationStore, from: &Span, item: Position) -> bool {
    store.iter().any(|a| match a {
        Annotation::Link { source, target } => source.overlaps(from) && target.contains(item),
        _ => false,
    })
}

fn label_style(session: &Session, store: &AnnotationStore, item: Position) -> StyleClass {
    let labels = store.labels_at(item);
    match labels.len() {
        0 => StyleClass::Plain,
        1 => StyleClass::Label(label_color(session, labels[0])),
        _ => StyleClass::MultiLabel,
    }
}

/// Resolves the display state of one item. Precedence is first-match-wins
/// per mode; the selection contributes only the underline.
pub fn style_for_item(session: &Session, item: Position) -> ItemStyle {
    let selection = session.selection();
    let store = session.store();
    let underline = selection.contains(item);
    // The span being linked from: the pinned source if any, else the selection.
    let current = session.link_anchor().unwrap_or(selection);

    let class = match (session.mode(), session.kind()) {
        (Mode::Annotate, AnnotationKind::Label) => label_style(session, store, item),
        (Mode::Annotate, AnnotationKind::Text) => {
            let has_text = store
                .iter()
                .any(|a| matches!(a, Annotation::Text { span, .. } if span.contains(item)));
            if has_text {
                StyleClass::HasText
            } else {
                StyleClass::Plain
            }
        }
        (Mode::Annotate, AnnotationKind::Link) => {
            if current.contains(item) {
                StyleClass::LinkSource
            } else if has_link_from_to(store, &current, item)
                || store.iter().any(|a| matches!(a, Annotation::Link { source, target }
                    if target.overlaps(&current) && source.contains(item)))
            {
                StyleClass::LinkTarget
            } else if store
                .iter()
                .any(|a| matches!(a, Annotation::Link { .. }) && a.touches(item))
            {
                StyleClass::HasLink
            } else {
                StyleClass::Plain
            }
        }
        (Mode::Adjudicate, kind) => {
            let adjudication = session.adjudication();
            if current.contains(item) {
                StyleClass::AdjCurrent
            } else if kind == AnnotationKind::Link && has_link_from_to(store, &current, item) {
                // In the resolution store (agreed core or accepted): settled.
                StyleClass::AdjAgreed
            } else if kind == AnnotationKind::Link
                && adjudication.is_some_and(|adj| {
                    adj.disagreements.disputed.iter().any(|d| match &d.annotation {
                        Annotation::Link { source, target } => {
                            source.overlaps(&current) && target.contains(item)
                        }
                        _ => false,
                    })
                })
            {
                StyleClass::AdjDisputedHere
            } else if adjudication
                .is_some_and(|adj| adj.is_disputed_item(item) && !adj.is_resolved(item))
            {
                StyleClass::AdjDisputedElsewhere
            } else if kind == AnnotationKind::Label {
                label_style(session, store, item)
            } else {
                StyleClass::Plain
            }
        }
    };
    ItemStyle { class, underline }
}

/// Legend entry text: `<keyseq>:<name>`.
pub fn legend_entry(label: &LabelSpec) -> String {
    format!("{}:{}", format_key_sequence(&label.keys), label.name)
}

/// Greedy first-fit legend packing: entries left to right separated by one
/// space, wrapping to a new row when the next entry would overflow. An entry
/// wider than the whole row stands alone, truncated with a `…` marker.
/// Returns (row, start column, text, color) per entry.
pub fn pack_legend(labels: &[LabelSpec], width: usize) -> Vec<(usize, usize, String, Color)> {
    let mut placed = Vec::new();
    let mut row = 0;
    let mut col = 0;
    for label in labels {
        let mut text = legend_entry(label);
        let mut w = text.width();
        if w > width {
            let mut truncated = String::new();
            for g in text.graphemes(true) {
                if truncated.width() + g.width() + 1 > width {
                    break;
                }
                truncated.push_str(g);
            }
            truncated.push('…');
            text = truncated;
            w = text.width();
        }
        if col > 0 && col + w > width {
            row += 1;
            col = 0;
        }
        placed.push((row, col, text, label.color));
        col += w + 1;
    }
    placed
}

/// The legend as plain text rows, one string per screen row.
pub fn layout_legend(labels: &[LabelSpec], width: usize) -> Vec<String> {
    let placed = pack_legend(labels, width);
    let rows = placed.iter().map(|(r, _, _, _)| r + 1).max().unwrap_or(0);
    let mut out = vec![String::new(); rows];
    for (row, col, text, _) in placed {
        let line = &mut out[row];
        while line.width() < col {
            line.push(' ');
        }
        line.push_str(&text);
    }
    out
}

/// Item shown at a (line, column) cell, at the session's scope.
fn item_at_column(session: &Session, line: usize, col: usize) -> Option<Position> {
    let doc = session.doc();
    match session.scope() {
        Scope::Document => Some(Position::Document),
        Scope::Line => Some(Position::Line(line)),
        Scope::Token => doc
            .line(line)
            .token_at_column(col)
            .map(|t| Position::Token(line, t)),
        Scope::Character => doc.line(line).token_at_column(col).map(|t| {
            let start = doc.line(line).tokens()[t].start_column();
            Position::Character(line, t, col - start)
        }),
    }
}

/// Display column extent (start, end) of the cursor item on its line,
/// measured in code points.
fn cursor_column_extent(session: &Session) -> (usize, usize) {
    let doc = session.doc();
    match session.cursor() {
        Position::Document | Position::Line(_) => (0, 1),
        Position::Token(l, t) => {
            let token = &doc.line(l).tokens()[t];
            (token.start_column(), token.end_column())
        }
        Position::Character(l, t, c) => {
            let start = doc.line(l).tokens()[t].start_column() + c;
            (start, start + 1)
        }
    }
}

struct PanelRow {
    text: String,
    /// Colored segments: (start column, width, background).
    colors: Vec<(usize, usize, Color)>,
}

impl PanelRow {
    fn plain(text: String) -> PanelRow {
        PanelRow {
            text,
            colors: Vec::new(),
        }
    }
}

fn progress_line(session: &Session) -> String {
    let doc = session.doc();
    let item = doc.flat_index(session.cursor()).unwrap_or(0) + 1;
    let total = doc.item_count(session.scope());
    format!(
        "file {}/{}, item {}/{}",
        session.current_index() + 1,
        session.files().len(),
        item,
        total
    )
}

fn describe(annotation: &Annotation) -> String {
    match annotation {
        Annotation::Label { name, .. } => format!("label {name}"),
        Annotation::Text { text, .. } => format!("text \"{text}\""),
        Annotation::Link { source, target } => format!("link {source}->{target}"),
    }
}

fn current_item_line(session: &Session) -> String {
    let cursor = session.cursor();
    let mut parts: Vec<String> = session
        .store()
        .annotations_at(cursor)
        .into_iter()
        .map(describe)
        .collect();
    if let Some(adjudication) = session.adjudication() {
        for disputed in adjudication.disagreements.disputed_at(cursor) {
            parts.push(format!(
                "candidate {} [{}]",
                describe(&disputed.annotation),
                disputed.asserted_by.join(", ")
            ));
        }
    }
    if parts.is_empty() {
        format!("{cursor}")
    } else {
        format!("{cursor} {}", parts.join(" | "))
    }
}

fn status_line(session: &Session) -> Option<String> {
    if let Some(prompt) = session.prompt() {
        let name = match prompt.kind {
            PromptKind::TextEntry => "text",
            PromptKind::Search => "search",
        };
        return Some(format!("{name}: {}", prompt.buffer));
    }
    let (pending, repeat) = session.pending_keys();
    if !pending.is_empty() || repeat.is_some() {
        let mut text = String::from("keys:");
        if let Some(n) = repeat {
            text.push_str(&format!(" {n}"));
        }
        for key in pending {
            text.push_str(&format!(" {key}"));
        }
        return Some(text);
    }
    if session.status().is_empty() {
        None
    } else {
        Some(session.status().to_string())
    }
}

/// Bottom panel rows in display order (top to bottom), already limited to
/// `max_rows` with the rows closest to the bottom of the screen winning.
fn panel_rows(session: &Session, width: usize, max_rows: usize) -> Vec<PanelRow> {
    let mut bottom_up: Vec<PanelRow> = Vec::new();
    if let Some(text) = status_line(session) {
        bottom_up.push(PanelRow::plain(text));
    }
    if session.view().show_legend && !session.config().labels.is_empty() {
        let placed = pack_legend(&session.config().labels, width);
        let rows = placed.iter().map(|(r, _, _, _)| r + 1).max().unwrap_or(0);
        for row in (0..rows).rev() {
            let mut text = String::new();
            let mut colors = Vec::new();
            for (r, col, entry, color) in &placed {
                if *r != row {
                    continue;
                }
                while text.width() < *col {
                    text.push(' ');
                }
                colors.push((*col, entry.width(), *color));
                text.push_str(entry);
            }
            bottom_up.push(PanelRow { text, colors });
        }
    }
    if session.view().show_progress {
        bottom_up.push(PanelRow::plain(progress_line(session)));
    }
    if session.view().show_current_item {
        bottom_up.push(PanelRow::plain(current_item_line(session)));
    }
    bottom_up.truncate(max_rows);
    bottom_up.reverse();
    bottom_up
}

fn put_text(screen: &mut ScreenModel, row: usize, col: usize, text: &str) -> usize {
    let mut x = col;
    for g in text.graphemes(true) {
        let w = g.width().max(1);
        if x + w > screen.width {
            break;
        }
        let cell = screen.cell_mut(row, x);
        cell.glyph = g.to_string();
        for extra in 1..w {
            screen.cell_mut(row, x + extra).glyph = String::new();
        }
        x += w;
    }
    x
}

/// Renders one frame. The grid always has exactly the requested size; sizes
/// below the minimum yield a placeholder message rather than an error.
pub fn render(session: &Session, width: usize, height: usize) -> ScreenModel {
    let mut screen = ScreenModel::blank(width, height);
    if width < MIN_WIDTH || height < MIN_HEIGHT {
        if width > 0 && height > 0 {
            put_text(&mut screen, 0, 0, "too small");
        }
        return screen;
    }

    let doc = session.doc();
    let view = session.view();

    let panels = panel_rows(session, width, height - 1);
    let text_rows = height - panels.len();

    // Vertical scroll keeps the cursor's line inside the text region.
    let cursor_line = session.cursor().line().unwrap_or(0);
    let mut scroll = session
        .current_file()
        .scroll
        .min(doc.line_count().saturating_sub(1));
    if cursor_line < scroll {
        scroll = cursor_line;
    }
    if cursor_line >= scroll + text_rows {
        scroll = cursor_line + 1 - text_rows;
    }
    screen.scroll = scroll;

    let gutter = if view.show_line_numbers {
        let digits = doc.line_count().saturating_sub(1).to_string().len();
        digits + 1
    } else {
        0
    };
    let text_width = width - gutter.min(width.saturating_sub(1));

    // Horizontal scroll, uniform across lines, keeps the cursor item visible.
    let (cur_start, cur_end) = cursor_column_extent(session);
    let cursor_x = display_x(doc.line(cursor_line).raw_text(), cur_start);
    let cursor_x_end = display_x(doc.line(cursor_line).raw_text(), cur_end);
    let mut h_scroll = 0;
    if cursor_x_end > text_width {
        h_scroll = cursor_x_end - text_width;
    }
    if cursor_x < h_scroll {
        h_scroll = cursor_x;
    }

    for row in 0..text_rows {
        let line_idx = scroll + row;
        if line_idx >= doc.line_count() {
            break;
        }
        if gutter > 0 {
            let number = format!("{:>width$} ", line_idx, width = gutter - 1);
            for (x, ch) in number.chars().enumerate().take(gutter) {
                let cell = screen.cell_mut(row, x);
                cell.glyph = ch.to_string();
                cell.fg = Color::Cyan;
            }
        }
        draw_document_line(session, &mut screen, row, line_idx, gutter, h_scroll);
    }

    // Cursor grid location.
    let cursor_row = cursor_line - scroll;
    let cursor_col = gutter + cursor_x.saturating_sub(h_scroll);
    if cursor_row < text_rows && cursor_col < width {
        screen.cursor = Some((cursor_row, cursor_col));
    }

    for (i, panel) in panels.iter().enumerate() {
        let row = text_rows + i;
        put_text(&mut screen, row, 0, &panel.text);
        for (start, w, color) in &panel.colors {
            for col in *start..(*start + *w).min(width) {
                let cell = screen.cell_mut(row, col);
                cell.bg = *color;
                cell.fg = Color::Black;
            }
        }
    }

    screen
}

/// Display width of the first `columns` code points of `text`.
fn display_x(text: &str, columns: usize) -> usize {
    let mut x = 0;
    for (i, ch) in text.chars().enumerate() {
        if i >= columns {
            break;
        }
        x += char_width(ch);
    }
    x
}

fn char_width(ch: char) -> usize {
    if ch == '\t' {
        return 1; // tabs draw as a single space
    }
    unicode_width::UnicodeWidthChar::width(ch).unwrap_or(0)
}

fn draw_document_line(
    session: &Session,
    screen: &mut ScreenModel,
    row: usize,
    line_idx: usize,
    gutter: usize,
    h_scroll: usize,
) {
    let doc = session.doc();
    let raw = doc.line(line_idx).raw_text();
    let mut x: usize = 0; // display x before h_scroll
    let mut col = 0; // code-point column
    for g in raw.graphemes(true) {
        let w: usize = g.chars().map(char_width).sum();
        let w = if g.chars().count() > 0 && w == 0 { 1 } else { w };
        let points = g.chars().count();
        if x + w > h_scroll + (screen.width - gutter) {
            break;
        }
        if x >= h_scroll {
            let screen_col = gutter + x - h_scroll;
            // Whitespace between tokens belongs to no item and stays plain.
            let style = item_at_column(session, line_idx, col)
                .map(|item| style_for_item(session, item))
                .unwrap_or(ItemStyle {
                    class: StyleClass::Plain,
                    underline: false,
                });
            let bg = style.class.background();
            let cell = screen.cell_mut(row, screen_col);
            cell.glyph = if g == "\t" { " ".to_string() } else { g.to_string() };
            cell.bg = bg;
            cell.fg = if bg == Color::Default {
                Color::Default
            } else {
                Color::Black
            };
            cell.underline = style.underline;
            cell.source = Some((line_idx, col));
            for extra in 1..w {
                let cont = screen.cell_mut(row, screen_col + extra);
                cont.glyph = String::new();
                cont.bg = bg;
                cont.underline = style.underline;
            }
        }
        x += w;
        col += points;
    }
}
