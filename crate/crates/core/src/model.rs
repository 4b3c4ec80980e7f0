//! Documents, positions, and spans.
//!
//! A document is an immutable tokenized view of one text file: lines split on
//! newline, tokens split on whitespace, characters counted per token. Items at
//! every scope are addressed by integer tuples and ordered by those tuples, so
//! navigation is plain index arithmetic.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Granularity of an annotatable item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Document,
    Line,
    Token,
    Character,
}

impl Scope {
    /// Number of indices in a position tuple at this scope.
    pub fn arity(self) -> usize {
        match self {
            Scope::Document => 0,
            Scope::Line => 1,
            Scope::Token => 2,
            Scope::Character => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scope::Document => "document",
            Scope::Line => "line",
            Scope::Token => "token",
            Scope::Character => "character",
        }
    }
}

/// Address of one item. The variant fixes the scope and the tuple arity.
///
/// Character indices are numbered within their token, so `(2,1,0)` is the
/// first character of the second token on line 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    Document,
    Line(usize),
    Token(usize, usize),
    Character(usize, usize, usize),
}

impl Position {
    pub fn scope(self) -> Scope {
        match self {
            Position::Document => Scope::Document,
            Position::Line(_) => Scope::Line,
            Position::Token(_, _) => Scope::Token,
            Position::Character(_, _, _) => Scope::Character,
        }
    }

    /// Line index, for every scope below document.
    pub fn line(self) -> Option<usize> {
        match self {
            Position::Document => None,
            Position::Line(l) | Position::Token(l, _) | Position::Character(l, _, _) => Some(l),
        }
    }

    /// Token index within the line, for token and character scope.
    pub fn token(self) -> Option<usize> {
        match self {
            Position::Token(_, t) | Position::Character(_, t, _) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Document => write!(f, "()"),
            Position::Line(l) => write!(f, "({l})"),
            Position::Token(l, t) => write!(f, "({l},{t})"),
            Position::Character(l, t, c) => write!(f, "({l},{t},{c})"),
        }
    }
}

impl FromStr for Position {
    type Err = ModelError;

    /// Parses the `()` / `(L)` / `(L,T)` / `(L,T,C)` syntax. No internal
    /// spaces are accepted.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::BadPositionSyntax(s.to_string());
        let inner = s
            .strip_prefix('(')
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(bad)?;
        if inner.is_empty() {
            return Ok(Position::Document);
        }
        let mut parts = Vec::new();
        for field in inner.split(',') {
            if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            parts.push(field.parse::<usize>().map_err(|_| bad())?);
        }
        match parts[..] {
            [l] => Ok(Position::Line(l)),
            [l, t] => Ok(Position::Token(l, t)),
            [l, t, c] => Ok(Position::Character(l, t, c)),
            _ => Err(bad()),
        }
    }
}

/// Inclusive run of items of one scope, with `start <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    start: Position,
    end: Position,
}

impl Span {
    /// Orders the two endpoints. The endpoints must share a scope.
    pub fn normalized(a: Position, b: Position) -> Result<Span, ModelError> {
        if a.scope() != b.scope() {
            return Err(ModelError::ScopeMismatch {
                a: a.scope(),
                b: b.scope(),
            });
        }
        Ok(Span {
            start: a.min(b),
            end: a.max(b),
        })
    }

    pub fn point(p: Position) -> Span {
        Span { start: p, end: p }
    }

    pub fn start(&self) -> Position {
        self.start
    }

    pub fn end(&self) -> Position {
        self.end
    }

    pub fn scope(&self) -> Scope {
        self.start.scope()
    }

    pub fn is_point(&self) -> bool {
        self.start == self.end
    }

    /// True when `pos` lies between the endpoints. Positions of a different
    /// scope are never contained.
    pub fn contains(&self, pos: Position) -> bool {
        pos.scope() == self.scope() && self.start <= pos && pos <= self.end
    }

    /// True when the two spans share at least one item.
    pub fn overlaps(&self, other: &Span) -> bool {
        self.scope() == other.scope() && self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", self.start)
        } else {
            write!(f, "{}-{}", self.start, self.end)
        }
    }
}

impl FromStr for Span {
    type Err = ModelError;

    /// Parses `<pos>` or `<pos>-<pos>`; the two-endpoint form is normalized.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(')') {
            Some((head, rest)) if rest.starts_with('-') => {
                let start: Position = format!("{head})").parse()?;
                let end: Position = rest[1..].parse()?;
                Span::normalized(start, end)
            }
            _ => Ok(Span::point(s.parse()?)),
        }
    }
}

/// Cursor movement direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("position {0} is out of range for this document")]
    OutOfRange(Position),
    #[error("scope mismatch: {} vs {}", .a.name(), .b.name())]
    ScopeMismatch { a: Scope, b: Scope },
    #[error("malformed position `{0}`")]
    BadPositionSyntax(String),
}

/// One whitespace-free token, located by code-point columns into its line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    start_column: usize,
    end_column: usize,
    byte_start: usize,
    byte_end: usize,
}

impl Token {
    /// First column of the token (code points).
    pub fn start_column(&self) -> usize {
        self.start_column
    }

    /// One past the last column (code points).
    pub fn end_column(&self) -> usize {
        self.end_column
    }

    /// Code-point length; always at least 1.
    pub fn len(&self) -> usize {
        self.end_column - self.start_column
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when `column` falls inside the token.
    pub fn covers_column(&self, column: usize) -> bool {
        self.start_column <= column && column < self.end_column
    }
}

/// One line of the source text plus its tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLine {
    raw_text: String,
    tokens: Vec<Token>,
}

impl RawLine {
    fn tokenize(raw_text: &str) -> RawLine {
        let mut tokens = Vec::new();
        let mut start: Option<(usize, usize)> = None; // (column, byte)
        let mut column = 0;
        for (byte, ch) in raw_text.char_indices() {
            if ch.is_whitespace() {
                if let Some((sc, sb)) = start.take() {
                    tokens.push(Token {
                        start_column: sc,
                        end_column: column,
                        byte_start: sb,
                        byte_end: byte,
                    });
                }
            } else if start.is_none() {
                start = Some((column, byte));
            }
            column += 1;
        }
        if let Some((sc, sb)) = start {
            tokens.push(Token {
                start_column: sc,
                end_column: column,
                byte_start: sb,
                byte_end: raw_text.len(),
            });
        }
        RawLine {
            raw_text: raw_text.to_string(),
            tokens,
        }
    }

    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token_text(&self, index: usize) -> &str {
        let t = &self.tokens[index];
        &self.raw_text[t.byte_start..t.byte_end]
    }

    /// Total characters across the line's tokens.
    pub fn char_count(&self) -> usize {
        self.tokens.iter().map(Token::len).sum()
    }

    /// Index of the token covering `column`, if any.
    pub fn token_at_column(&self, column: usize) -> Option<usize> {
        self.tokens.iter().position(|t| t.covers_column(column))
    }
}

/// Immutable tokenized view of one text file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    lines: Vec<RawLine>,
}

impl Document {
    /// Splits `raw_text` into lines on `\n` and each line into tokens on
    /// unicode whitespace. Total: empty input yields a single empty line so a
    /// cursor always has a line to sit on.
    pub fn tokenize(raw_text: &str) -> Document {
        Document {
            lines: raw_text.split('\n').map(RawLine::tokenize).collect(),
        }
    }

    pub fn lines(&self) -> &[RawLine] {
        &self.lines
    }

    pub fn line(&self, index: usize) -> &RawLine {
        &self.lines[index]
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn token_text(&self, line: usize, token: usize) -> &str {
        self.lines[line].token_text(token)
    }

    pub fn is_valid(&self, pos: Position) -> bool {
        match pos {
            Position::Document => true,
            Position::Line(l) => l < self.lines.len(),
            Position::Token(l, t) => l < self.lines.len() && t < self.lines[l].tokens.len(),
            Position::Character(l, t, c) => {
                l < self.lines.len()
                    && t < self.lines[l].tokens.len()
                    && c < self.lines[l].tokens[t].len()
            }
        }
    }

    pub fn validate(&self, pos: Position) -> Result<(), ModelError> {
        if self.is_valid(pos) {
            Ok(())
        } else {
            Err(ModelError::OutOfRange(pos))
        }
    }

    /// Number of items at `scope`.
    pub fn item_count(&self, scope: Scope) -> usize {
        match scope {
            Scope::Document => 1,
            Scope::Line => self.lines.len(),
            Scope::Token => self.lines.iter().map(|l| l.tokens.len()).sum(),
            Scope::Character => self.lines.iter().map(RawLine::char_count).sum(),
        }
    }

    /// Rank of a valid position in document order among items of its scope.
    pub fn flat_index(&self, pos: Position) -> Result<usize, ModelError> {
        self.validate(pos)?;
        Ok(match pos {
            Position::Document => 0,
            Position::Line(l) => l,
            Position::Token(l, t) => {
                self.lines[..l].iter().map(|ln| ln.tokens.len()).sum::<usize>() + t
            }
            Position::Character(l, t, c) => {
                let before: usize = self.lines[..l].iter().map(RawLine::char_count).sum();
                before + self.char_ordinal_in_line(l, t, c)
            }
        })
    }

    /// The `index`-th item at `scope` in document order.
    pub fn item_at(&self, scope: Scope, index: usize) -> Option<Position> {
        match scope {
            Scope::Document => (index == 0).then_some(Position::Document),
            Scope::Line => (index < self.lines.len()).then_some(Position::Line(index)),
            Scope::Token => {
                let mut rest = index;
                for (l, line) in self.lines.iter().enumerate() {
                    if rest < line.tokens.len() {
                        return Some(Position::Token(l, rest));
                    }
                    rest -= line.tokens.len();
                }
                None
            }
            Scope::Character => {
                let mut rest = index;
                for (l, line) in self.lines.iter().enumerate() {
                    let count = line.char_count();
                    if rest < count {
                        let (t, c) = self.char_at_ordinal(l, rest);
                        return Some(Position::Character(l, t, c));
                    }
                    rest -= count;
                }
                None
            }
        }
    }

    pub fn first_item(&self, scope: Scope) -> Option<Position> {
        self.item_at(scope, 0)
    }

    pub fn last_item(&self, scope: Scope) -> Option<Position> {
        let count = self.item_count(scope);
        if count == 0 {
            None
        } else {
            self.item_at(scope, count - 1)
        }
    }

    /// All items at `scope` in document order.
    pub fn items(&self, scope: Scope) -> Vec<Position> {
        (0..self.item_count(scope))
            .map(|i| self.item_at(scope, i).expect("index within count"))
            .collect()
    }

    /// Items within the line when the line is addressed at `scope`.
    pub fn line_item_count(&self, line: usize, scope: Scope) -> usize {
        match scope {
            Scope::Token => self.lines[line].tokens.len(),
            Scope::Character => self.lines[line].char_count(),
            _ => 0,
        }
    }

    fn char_ordinal_in_line(&self, line: usize, token: usize, ch: usize) -> usize {
        self.lines[line].tokens[..token]
            .iter()
            .map(Token::len)
            .sum::<usize>()
            + ch
    }

    fn char_at_ordinal(&self, line: usize, ordinal: usize) -> (usize, usize) {
        let mut rest = ordinal;
        for (t, token) in self.lines[line].tokens.iter().enumerate() {
            if rest < token.len() {
                return (t, rest);
            }
            rest -= token.len();
        }
        unreachable!("ordinal within line char count")
    }

    /// Ordinal of a token/character item within its own line.
    fn ordinal_in_line(&self, pos: Position) -> usize {
        match pos {
            Position::Token(_, t) => t,
            Position::Character(l, t, c) => self.char_ordinal_in_line(l, t, c),
            _ => 0,
        }
    }

    fn item_at_line_ordinal(&self, line: usize, scope: Scope, ordinal: usize) -> Position {
        match scope {
            Scope::Token => Position::Token(line, ordinal),
            Scope::Character => {
                let (t, c) = self.char_at_ordinal(line, ordinal);
                Position::Character(line, t, c)
            }
            _ => unreachable!("line ordinals exist only below line scope"),
        }
    }

    /// The adjacent item at the same scope. Left/right step through document
    /// order (wrapping across lines); up/down keep the ordinal index within
    /// the line, clamped to the target line's last item, skipping lines that
    /// have no items. At a document boundary the position is returned
    /// unchanged. Document-scope positions never move.
    pub fn next_item(&self, pos: Position, direction: Direction) -> Result<Position, ModelError> {
        self.validate(pos)?;
        let scope = pos.scope();
        match scope {
            Scope::Document => Ok(pos),
            Scope::Line => {
                let l = pos.line().expect("line scope has a line");
                let next = match direction {
                    Direction::Left | Direction::Up => l.checked_sub(1),
                    Direction::Right | Direction::Down => {
                        (l + 1 < self.lines.len()).then_some(l + 1)
                    }
                };
                Ok(next.map_or(pos, Position::Line))
            }
            Scope::Token | Scope::Character => match direction {
                Direction::Left | Direction::Right => {
                    let idx = self.flat_index(pos)?;
                    let next = match direction {
                        Direction::Left => idx.checked_sub(1),
                        _ => Some(idx + 1),
                    };
                    Ok(next.and_then(|i| self.item_at(scope, i)).unwrap_or(pos))
                }
                Direction::Up | Direction::Down => {
                    let ordinal = self.ordinal_in_line(pos);
                    let mut l = pos.line().expect("sub-line scope has a line");
                    loop {
                        l = match direction {
                            Direction::Up => match l.checked_sub(1) {
                                Some(prev) => prev,
                                None => return Ok(pos),
                            },
                            _ => {
                                if l + 1 >= self.lines.len() {
                                    return Ok(pos);
                                }
                                l + 1
                            }
                        };
                        let count = self.line_item_count(l, scope);
                        if count > 0 {
                            return Ok(self.item_at_line_ordinal(
                                l,
                                scope,
                                ordinal.min(count - 1),
                            ));
                        }
                    }
                }
            },
        }
    }

    /// Every position between the span's endpoints, inclusive, in document
    /// order.
    pub fn items_in(&self, span: &Span) -> Result<Vec<Position>, ModelError> {
        let start = self.flat_index(span.start())?;
        let end = self.flat_index(span.end())?;
        Ok((start..=end)
            .map(|i| self.item_at(span.scope(), i).expect("index within span"))
            .collect())
    }

    /// True when every position of the span is in range.
    pub fn span_is_valid(&self, span: &Span) -> bool {
        self.is_valid(span.start()) && self.is_valid(span.end())
    }
}
