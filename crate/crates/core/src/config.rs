//! Label definitions, keybindings, and key-sequence decoding.
//!
//! Configuration is a simple line-oriented text file:
//!
//! ```text
//! # labels: name, key sequence, color
//! label Offer SPACE+a green
//! label Rate SPACE+r yellow
//! # rebind an action
//! bind save w
//! ```
//!
//! The full binding set (labels plus actions) must be prefix-free: no bound
//! sequence is a proper prefix of another, and no sequence starts with a
//! digit, since leading digits accumulate a repeat count. Decoding is
//! therefore deterministic and needs no timers.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// One key press, normalized: named keys never alias `Key::Char`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Key {
    Char(char),
    Space,
    Tab,
    Enter,
    Esc,
    Backspace,
    Up,
    Down,
    Left,
    Right,
    ShiftUp,
    ShiftDown,
    ShiftLeft,
    ShiftRight,
    CtrlUp,
    CtrlDown,
    CtrlLeft,
    CtrlRight,
}

impl Key {
    /// Canonical constructor for character keys; space and tab map to their
    /// named variants.
    pub fn from_char(ch: char) -> Key {
        match ch {
            ' ' => Key::Space,
            '\t' => Key::Tab,
            '\n' | '\r' => Key::Enter,
            _ => Key::Char(ch),
        }
    }

    pub fn is_digit(self) -> bool {
        matches!(self, Key::Char(c) if c.is_ascii_digit())
    }

    pub fn digit_value(self) -> Option<u32> {
        match self {
            Key::Char(c) => c.to_digit(10),
            _ => None,
        }
    }

    /// Parses one key name as written in config files and key scripts.
    pub fn parse_name(name: &str) -> Option<Key> {
        let mut chars = name.chars();
        if let (Some(ch), None) = (chars.next(), chars.next()) {
            if !ch.is_whitespace() {
                return Some(Key::from_char(ch));
            }
        }
        Some(match name {
            "SPACE" => Key::Space,
            "TAB" => Key::Tab,
            "ENTER" => Key::Enter,
            "ESC" => Key::Esc,
            "BACKSPACE" => Key::Backspace,
            "UP" => Key::Up,
            "DOWN" => Key::Down,
            "LEFT" => Key::Left,
            "RIGHT" => Key::Right,
            "S-UP" => Key::ShiftUp,
            "S-DOWN" => Key::ShiftDown,
            "S-LEFT" => Key::ShiftLeft,
            "S-RIGHT" => Key::ShiftRight,
            "C-UP" => Key::CtrlUp,
            "C-DOWN" => Key::CtrlDown,
            "C-LEFT" => Key::CtrlLeft,
            "C-RIGHT" => Key::CtrlRight,
            "PLUS" => Key::Char('+'),
            _ => return None,
        })
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Char('+') => write!(f, "PLUS"),
            Key::Char(c) => write!(f, "{c}"),
            Key::Space => write!(f, "SPACE"),
            Key::Tab => write!(f, "TAB"),
            Key::Enter => write!(f, "ENTER"),
            Key::Esc => write!(f, "ESC"),
            Key::Backspace => write!(f, "BACKSPACE"),
            Key::Up => write!(f, "UP"),
            Key::Down => write!(f, "DOWN"),
            Key::Left => write!(f, "LEFT"),
            Key::Right => write!(f, "RIGHT"),
            Key::ShiftUp => write!(f, "S-UP"),
            Key::ShiftDown => write!(f, "S-DOWN"),
            Key::ShiftLeft => write!(f, "S-LEFT"),
            Key::ShiftRight => write!(f, "S-RIGHT"),
            Key::CtrlUp => write!(f, "C-UP"),
            Key::CtrlDown => write!(f, "C-DOWN"),
            Key::CtrlLeft => write!(f, "C-LEFT"),
            Key::CtrlRight => write!(f, "C-RIGHT"),
        }
    }
}

/// A multi-key chord, e.g. `SPACE+a`.
pub type KeySequence = Vec<Key>;

/// Parses `SPACE+a` style sequences.
pub fn parse_key_sequence(text: &str) -> Result<KeySequence, String> {
    let mut keys = Vec::new();
    for part in text.split('+') {
        if part.is_empty() {
            return Err(format!(
                "empty key name in `{text}` (write PLUS to bind the + key)"
            ));
        }
        let key =
            Key::parse_name(part).ok_or_else(|| format!("unknown key name `{part}` in `{text}`"))?;
        keys.push(key);
    }
    if keys.is_empty() {
        return Err("empty key sequence".to_string());
    }
    Ok(keys)
}

/// Formats a sequence back into `SPACE+a` form.
pub fn format_key_sequence(keys: &[Key]) -> String {
    keys.iter()
        .map(Key::to_string)
        .collect::<Vec<_>>()
        .join("+")
}

/// Terminal colors. Labels draw from the eight base colors; the bright
/// variants are reserved for fixed interface styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Default,
    Black,
    Red,
    Green,
    Yellow,
    Blue,
    Magenta,
    Cyan,
    White,
    BrightRed,
    BrightGreen,
    BrightYellow,
    BrightBlue,
    BrightMagenta,
    BrightCyan,
}

/// The palette label colors may be chosen from, in cycling order.
pub const LABEL_PALETTE: [(&str, Color); 8] = [
    ("green", Color::Green),
    ("yellow", Color::Yellow),
    ("blue", Color::Blue),
    ("magenta", Color::Magenta),
    ("cyan", Color::Cyan),
    ("red", Color::Red),
    ("white", Color::White),
    ("black", Color::Black),
];

pub fn color_by_name(name: &str) -> Option<Color> {
    LABEL_PALETTE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| *c)
}

/// A configured label: its name, the chord that applies it, and its color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSpec {
    pub name: String,
    pub keys: KeySequence,
    pub color: Color,
}

/// Everything a command can do. Bindings resolve to one of these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    MoveUp,
    MoveDown,
    MoveLeft,
    MoveRight,
    ExtendUp,
    ExtendDown,
    ExtendLeft,
    ExtendRight,
    ContractUp,
    ContractDown,
    ContractLeft,
    ContractRight,
    ApplyLabel(String),
    EnterText,
    ToggleLinkAnchor,
    CommitLink,
    Undo,
    SearchPrompt,
    SearchNext,
    SearchPrev,
    ToggleLegend,
    ToggleLineNumbers,
    ToggleCurrentItem,
    ToggleProgress,
    NextDisagreement,
    RejectAt,
    NextFile,
    PrevFile,
    Save,
    Quit,
}

/// Actions addressable from `bind` directives, with their default chords.
const BINDABLE_ACTIONS: [(&str, Action, &str); 29] = [
    ("move_up", Action::MoveUp, "UP"),
    ("move_down", Action::MoveDown, "DOWN"),
    ("move_left", Action::MoveLeft, "LEFT"),
    ("move_right", Action::MoveRight, "RIGHT"),
    ("extend_up", Action::ExtendUp, "S-UP"),
    ("extend_down", Action::ExtendDown, "S-DOWN"),
    ("extend_left", Action::ExtendLeft, "S-LEFT"),
    ("extend_right", Action::ExtendRight, "S-RIGHT"),
    ("contract_up", Action::ContractUp, "C-UP"),
    ("contract_down", Action::ContractDown, "C-DOWN"),
    ("contract_left", Action::ContractLeft, "C-LEFT"),
    ("contract_right", Action::ContractRight, "C-RIGHT"),
    ("enter_text", Action::EnterText, "t"),
    ("toggle_link_anchor", Action::ToggleLinkAnchor, "m"),
    ("commit_link", Action::CommitLink, "ENTER"),
    ("undo", Action::Undo, "u"),
    ("search_prompt", Action::SearchPrompt, "/"),
    ("search_next", Action::SearchNext, "n"),
    ("search_prev", Action::SearchPrev, "p"),
    ("toggle_legend", Action::ToggleLegend, "v+l"),
    ("toggle_line_numbers", Action::ToggleLineNumbers, "v+n"),
    ("toggle_current_item", Action::ToggleCurrentItem, "v+i"),
    ("toggle_progress", Action::ToggleProgress, "v+p"),
    ("next_disagreement", Action::NextDisagreement, "d"),
    ("reject_at", Action::RejectAt, "x"),
    ("next_file", Action::NextFile, "]"),
    ("prev_file", Action::PrevFile, "["),
    ("save", Action::Save, "s"),
    ("quit", Action::Quit, "q"),
];

fn action_by_name(name: &str) -> Option<Action> {
    BINDABLE_ACTIONS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, a, _)| a.clone())
}

/// One action bound to one chord.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBinding {
    pub action: Action,
    pub keys: KeySequence,
}

/// Which informational panels start visible. The default view devotes the
/// whole terminal to the document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ViewDefaults {
    pub show_legend: bool,
    pub show_line_numbers: bool,
    pub show_current_item: bool,
    pub show_progress: bool,
}

/// Parsed configuration: labels, bindings, view defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub labels: Vec<LabelSpec>,
    pub bindings: Vec<KeyBinding>,
    pub view: ViewDefaults,
}

impl Default for Config {
    fn default() -> Self {
        let bindings = BINDABLE_ACTIONS
            .iter()
            .map(|(_, action, keys)| KeyBinding {
                action: action.clone(),
                keys: parse_key_sequence(keys).expect("default bindings are well formed"),
            })
            .collect();
        Config {
            labels: Vec::new(),
            bindings,
            view: ViewDefaults::default(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

/// Parses a config file, merging its directives over the built-in defaults.
/// Every diagnostic carries the offending line number; an empty file yields
/// the default config.
pub fn parse_config(text: &str) -> Result<Config, Vec<ConfigError>> {
    let mut config = Config::default();
    let mut errors = Vec::new();
    // Line number attribution for conflict checks; 0 marks a built-in.
    let mut binding_lines: HashMap<Vec<Key>, usize> = HashMap::new();
    let mut action_lines: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut err = |message: String| {
            errors.push(ConfigError {
                line: line_no,
                message,
            })
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "label" => {
                if fields.len() != 4 {
                    err(format!(
                        "expected `label <name> <keyseq> <color>`, got {} fields",
                        fields.len()
                    ));
                    continue;
                }
                let name = fields[1];
                if config.labels.iter().any(|l| l.name == name) {
                    err(format!("duplicate label `{name}`"));
                    continue;
                }
                let keys = match parse_key_sequence(fields[2]) {
                    Ok(keys) => keys,
                    Err(e) => {
                        err(e);
                        continue;
                    }
                };
                let color = match color_by_name(fields[3]) {
                    Some(color) => color,
                    None => {
                        err(format!(
                            "unknown color `{}`; palette: {}",
                            fields[3],
                            LABEL_PALETTE
                                .iter()
                                .map(|(n, _)| *n)
                                .collect::<Vec<_>>()
                                .join(", ")
                        ));
                        continue;
                    }
                };
                binding_lines.insert(keys.clone(), line_no);
                config.labels.push(LabelSpec {
                    name: name.to_string(),
                    keys,
                    color,
                });
            }
            "bind" => {
                if fields.len() != 3 {
                    err(format!(
                        "expected `bind <action> <keyseq>`, got {} fields",
                        fields.len()
                    ));
                    continue;
                }
                let action = match action_by_name(fields[1]) {
                    Some(action) => action,
                    None => {
                        err(format!("unknown action `{}`", fields[1]));
                        continue;
                    }
                };
                if let Some(prev) = action_lines.get(fields[1]) {
                    err(format!(
                        "action `{}` already bound on line {prev}",
                        fields[1]
                    ));
                    continue;
                }
                let keys = match parse_key_sequence(fields[2]) {
                    Ok(keys) => keys,
                    Err(e) => {
                        err(e);
                        continue;
                    }
                };
                action_lines.insert(fields[1].to_string(), line_no);
                binding_lines.insert(keys.clone(), line_no);
                // Rebinding replaces the default chord for that action.
                config.bindings.retain(|b| b.action != action);
                config.bindings.push(KeyBinding { action, keys });
            }
            other => err(format!("unknown directive `{other}`")),
        }
    }

    // Global checks over the merged result.
    let mut all: Vec<(&KeySequence, String)> = Vec::new();
    for label in &config.labels {
        all.push((&label.keys, format!("label `{}`", label.name)));
    }
    for binding in &config.bindings {
        let name = BINDABLE_ACTIONS
            .iter()
            .find(|(_, a, _)| *a == binding.action)
            .map(|(n, _, _)| *n)
            .unwrap_or("?");
        all.push((&binding.keys, format!("action `{name}`")));
    }
    let line_of = |keys: &KeySequence| binding_lines.get(keys).copied().unwrap_or(0);
    for (keys, what) in &all {
        if keys[0].is_digit() {
            errors.push(ConfigError {
                line: line_of(keys),
                message: format!(
                    "{what}: sequence `{}` starts with a digit, which is reserved for repeat counts",
                    format_key_sequence(keys)
                ),
            });
        }
    }
    for (i, (a_keys, a_what)) in all.iter().enumerate() {
        for (b_keys, b_what) in all.iter().skip(i + 1) {
            let conflict = a_keys.starts_with(b_keys) || b_keys.starts_with(a_keys);
            if conflict {
                errors.push(ConfigError {
                    line: line_of(a_keys).max(line_of(b_keys)),
                    message: format!(
                        "{a_what} (`{}`) conflicts with {b_what} (`{}`): bindings must be prefix-free",
                        format_key_sequence(a_keys),
                        format_key_sequence(b_keys)
                    ),
                });
            }
        }
    }

    if errors.is_empty() {
        Ok(config)
    } else {
        Err(errors)
    }
}

/// A decoded command: an action plus its repeat count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Command {
    pub action: Action,
    pub count: u32,
}

impl Command {
    pub fn new(action: Action, count: u32) -> Command {
        Command { action, count }
    }

    pub fn once(action: Action) -> Command {
        Command { action, count: 1 }
    }
}

/// Result of feeding one key to the decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    /// A full chord matched.
    Command(Command),
    /// The keys so far are a proper prefix of some binding.
    Pending,
    /// Dead end; pending input was discarded.
    Unbound,
}

/// Lookup table built from a config: full chords plus their proper prefixes.
#[derive(Debug, Clone)]
pub struct BindingTable {
    chords: HashMap<KeySequence, Action>,
    prefixes: HashSet<KeySequence>,
}

impl BindingTable {
    pub fn from_config(config: &Config) -> BindingTable {
        let mut chords = HashMap::new();
        let mut prefixes = HashSet::new();
        let mut add = |keys: &KeySequence, action: Action| {
            for len in 1..keys.len() {
                prefixes.insert(keys[..len].to_vec());
            }
            chords.insert(keys.clone(), action);
        };
        for binding in &config.bindings {
            add(&binding.keys, binding.action.clone());
        }
        for label in &config.labels {
            add(&label.keys, Action::ApplyLabel(label.name.clone()));
        }
        BindingTable { chords, prefixes }
    }

    pub fn lookup(&self, keys: &[Key]) -> Option<&Action> {
        self.chords.get(keys)
    }

    pub fn is_prefix(&self, keys: &[Key]) -> bool {
        self.prefixes.contains(keys)
    }
}

/// Maximum repeat count; larger prefixes saturate here.
pub const MAX_REPEAT: u32 = 9999;

/// Streaming key decoder: leading digits accumulate a repeat count, then
/// non-digit keys walk the prefix map until a chord completes or dead-ends.
#[derive(Debug, Clone, Default)]
pub struct KeyDecoder {
    repeat: Option<u32>,
    pending: Vec<Key>,
}

impl KeyDecoder {
    pub fn new() -> KeyDecoder {
        KeyDecoder::default()
    }

    /// Keys buffered but not yet resolved, for status display.
    pub fn pending(&self) -> (&[Key], Option<u32>) {
        (&self.pending, self.repeat)
    }

    pub fn is_idle(&self) -> bool {
        self.pending.is_empty() && self.repeat.is_none()
    }

    pub fn reset(&mut self) {
        self.repeat = None;
        self.pending.clear();
    }

    pub fn push(&mut self, key: Key, table: &BindingTable) -> Decoded {
        if self.pending.is_empty() {
            if let Some(digit) = key.digit_value() {
                let so_far = self.repeat.unwrap_or(0);
                self.repeat = Some((so_far.saturating_mul(10) + digit).min(MAX_REPEAT));
                return Decoded::Pending;
            }
        }
        self.pending.push(key);
        if let Some(action) = table.lookup(&self.pending) {
            let command = Command {
                action: action.clone(),
                count: self.repeat.unwrap_or(1),
            };
            self.reset();
            return Decoded::Command(command);
        }
        if table.is_prefix(&self.pending) {
            return Decoded::Pending;
        }
        self.reset();
        Decoded::Unbound
    }
}
