//! Thin crossterm backend: blits screen models, yields keys.
//!
//! This is the only place that touches the terminal. Everything it draws
//! comes from a fully-formed `ScreenModel`, so there is no display logic
//! here beyond color translation.

use std::io::{self, Stdout, Write};

use crossterm::event::{Event, KeyCode, KeyEvent, KeyEventKind, KeyModifiers};
use crossterm::style::{Attribute, Color as TermColor, SetAttribute, SetBackgroundColor, SetForegroundColor};
use crossterm::{cursor, execute, queue, terminal};

use slate_core::config::Color;
use slate_core::render::ScreenModel;
use slate_core::Key;

fn term_color(color: Color) -> TermColor {
    match color {
        Color::Default => TermColor::Reset,
        Color::Black => TermColor::Black,
        Color::Red => TermColor::DarkRed,
        Color::Green => TermColor::DarkGreen,
        Color::Yellow => TermColor::DarkYellow,
        Color::Blue => TermColor::DarkBlue,
        Color::Magenta => TermColor::DarkMagenta,
        Color::Cyan => TermColor::DarkCyan,
        Color::White => TermColor::Grey,
        Color::BrightRed => TermColor::Red,
        Color::BrightGreen => TermColor::Green,
        Color::BrightYellow => TermColor::Yellow,
        Color::BrightBlue => TermColor::Blue,
        Color::BrightMagenta => TermColor::Magenta,
        Color::BrightCyan => TermColor::Cyan,
    }
}

/// Raw-mode terminal with RAII restore.
pub struct Terminal {
    out: Stdout,
}

impl Terminal {
    pub fn new() -> io::Result<Terminal> {
        let mut out = io::stdout();
        terminal::enable_raw_mode()?;
        execute!(out, terminal::EnterAlternateScreen, cursor::Hide)?;
        Ok(Terminal { out })
    }

    pub fn size(&self) -> io::Result<(usize, usize)> {
        let (w, h) = terminal::size()?;
        Ok((w as usize, h as usize))
    }

    /// Full repaint of one frame.
    pub fn blit(&mut self, screen: &ScreenModel) -> io::Result<()> {
        queue!(self.out, cursor::Hide)?;
        let mut last_fg = None;
        let mut last_bg = None;
        let mut last_underline = false;
        for row in 0..screen.height() {
            queue!(self.out, cursor::MoveTo(0, row as u16))?;
            for col in 0..screen.width() {
                let cell = screen.cell(row, col);
                if cell.glyph.is_empty() {
                    continue; // covered by the preceding wide glyph
                }
                if last_fg != Some(cell.fg) {
                    queue!(self.out, SetForegroundColor(term_color(cell.fg)))?;
                    last_fg = Some(cell.fg);
                }
                if last_bg != Some(cell.bg) {
                    queue!(self.out, SetBackgroundColor(term_color(cell.bg)))?;
                    last_bg = Some(cell.bg);
                }
                if cell.underline != last_underline {
                    let attr = if cell.underline {
                        Attribute::Underlined
                    } else {
                        Attribute::NoUnderline
                    };
                    queue!(self.out, SetAttribute(attr))?;
                    last_underline = cell.underline;
                }
                write!(self.out, "{}", cell.glyph)?;
            }
        }
        queue!(self.out, SetAttribute(Attribute::Reset))?;
        if let Some((row, col)) = screen.cursor {
            queue!(self.out, cursor::MoveTo(col as u16, row as u16), cursor::Show)?;
        }
        self.out.flush()
    }

    /// Blocks for the next event; `None` for resizes and unmapped keys, both
    /// of which just trigger a re-render.
    pub fn read_key(&self) -> io::Result<Option<Key>> {
        match crossterm::event::read()? {
            Event::Key(event) => Ok(map_key(event)),
            _ => Ok(None),
        }
    }
}

impl Drop for Terminal {
    fn drop(&mut self) {
        // Best effort; we are likely unwinding or exiting.
        let _ = terminal::disable_raw_mode();
        let _ = execute!(self.out, terminal::LeaveAlternateScreen, cursor::Show);
    }
}

fn map_key(event: KeyEvent) -> Option<Key> {
    if event.kind == KeyEventKind::Release {
        return None;
    }
    let shift = event.modifiers.contains(KeyModifiers::SHIFT);
    let ctrl = event.modifiers.contains(KeyModifiers::CONTROL);
    Some(match event.code {
        KeyCode::Char(c) if !ctrl => Key::from_char(c),
        KeyCode::Up if ctrl => Key::CtrlUp,
        KeyCode::Down if ctrl => Key::CtrlDown,
        KeyCode::Left if ctrl => Key::CtrlLeft,
        KeyCode::Right if ctrl => Key::CtrlRight,
        KeyCode::Up if shift => Key::ShiftUp,
        KeyCode::Down if shift => Key::ShiftDown,
        KeyCode::Left if shift => Key::ShiftLeft,
        KeyCode::Right if shift => Key::ShiftRight,
        KeyCode::Up => Key::Up,
        KeyCode::Down => Key::Down,
        KeyCode::Left => Key::Left,
        KeyCode::Right => Key::Right,
        KeyCode::Enter => Key::Enter,
        KeyCode::Esc => Key::Esc,
        KeyCode::Backspace => Key::Backspace,
        KeyCode::Tab => Key::Tab,
        KeyCode::BackTab => Key::Tab,
        _ => return None,
    })
}
