//! Loading, resume, and the two front ends: interactive terminal and key
//! scripts.

use std::fs;
use std::path::Path;

use slate_core::adjudicate::AdjudicationState;
use slate_core::config::{parse_config, Config, Key};
use slate_core::model::Document;
use slate_core::render;
use slate_core::session::{Outcome, Session, SessionFile, SessionOptions};
use slate_core::standoff;
use slate_core::store::AnnotationStore;

use crate::args::RunPlan;
use crate::term::Terminal;

/// Exit code for unreadable or malformed input files.
pub const EXIT_DATA: u8 = 2;
/// Exit code when the terminal cannot be initialized.
pub const EXIT_TERMINAL: u8 = 3;

/// Script-mode screens render at the baseline terminal size.
const SCRIPT_WIDTH: usize = 80;
const SCRIPT_HEIGHT: usize = 24;

pub enum RunError {
    Data(String),
    Terminal(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Data(_) => EXIT_DATA,
            RunError::Terminal(_) => EXIT_TERMINAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Data(m) | RunError::Terminal(m) => m,
        }
    }
}

fn data_err(msg: impl Into<String>) -> RunError {
    RunError::Data(msg.into())
}

fn read_file(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|e| data_err(format!("cannot read {}: {e}", path.display())))
}

fn load_config(plan: &RunPlan) -> Result<Config, RunError> {
    let text = match &plan.config {
        Some(path) => read_file(path)?,
        None => {
            let default_path = Path::new("slate.config");
            if default_path.exists() {
                read_file(default_path)?
            } else {
                return Ok(Config::default());
            }
        }
    };
    parse_config(&text).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| format!("  {e}")).collect();
        data_err(format!("invalid config:\n{}", lines.join("\n")))
    })
}

fn load_store(path: &Path, doc: &Document) -> Result<AnnotationStore, RunError> {
    let text = read_file(path)?;
    let parsed = standoff::parse(&text, doc)
        .map_err(|e| data_err(format!("{}: {e}", path.display())))?;
    for warning in &parsed.warnings {
        eprintln!(
            "warning: {}:{}: {}",
            path.display(),
            warning.line,
            warning.message
        );
    }
    Ok(parsed.store)
}

fn build_session(plan: &RunPlan) -> Result<Session, RunError> {
    let config = load_config(plan)?;
    let mut files = Vec::new();
    for data_path in &plan.data_files {
        let doc = Document::tokenize(&read_file(data_path)?);
        let output_path = match &plan.output {
            Some(path) => path.clone(),
            None => match plan.mode {
                slate_core::session::Mode::Annotate => standoff::annotation_path(data_path),
                slate_core::session::Mode::Adjudicate => standoff::adjudicated_path(data_path),
            },
        };
        let resume = output_path.exists() && !plan.overwrite;

        let (store, saved, adjudication) = match plan.mode {
            slate_core::session::Mode::Annotate => {
                if resume {
                    let store = load_store(&output_path, &doc)?;
                    let saved = standoff::serialize(&store);
                    (store, Some(saved), None)
                } else {
                    (AnnotationStore::new(), None, None)
                }
            }
            slate_core::session::Mode::Adjudicate => {
                let mut inputs = Vec::new();
                for anno_path in &plan.anno_files {
                    let store = load_store(anno_path, &doc)?;
                    if let Some(bad) = store.iter().find(|a| a.scope() != plan.scope) {
                        return Err(data_err(format!(
                            "{}: annotation {} is at {} scope but this run adjudicates at {} scope",
                            anno_path.display(),
                            bad.span(),
                            bad.scope().name(),
                            plan.scope.name()
                        )));
                    }
                    inputs.push((anno_path.display().to_string(), store));
                }
                let mut adjudication = AdjudicationState::new(&doc, inputs)
                    .map_err(|e| data_err(format!("{}: {e}", data_path.display())))?;
                let (store, saved) = if resume {
                    // Re-derive progress from the prior session's output.
                    let store = load_store(&output_path, &doc)?;
                    let prior: Vec<_> = store.iter().cloned().collect();
                    for annotation in prior {
                        adjudication.mark_resolved_by(&doc, &annotation);
                    }
                    let saved = standoff::serialize(&store);
                    (store, Some(saved))
                } else {
                    (adjudication.agreed_core(), None)
                };
                (store, saved, Some(adjudication))
            }
        };
        files.push(SessionFile {
            path: data_path.clone(),
            doc,
            store,
            saved,
            adjudication,
        });
    }

    Session::new(
        files,
        SessionOptions {
            scope: plan.scope,
            mode: plan.mode,
            kind: plan.kind,
            config,
            output_override: plan.output.clone(),
        },
    )
    .map_err(|e| data_err(format!("{e}")))
}

/// Parses a key script: whitespace-separated key names, `#` comment lines.
pub fn parse_script(text: &str) -> Result<Vec<Key>, String> {
    let mut keys = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for name in line.split_whitespace() {
            let key = Key::parse_name(name)
                .ok_or_else(|| format!("line {}: unknown key name `{name}`", idx + 1))?;
            keys.push(key);
        }
    }
    Ok(keys)
}

fn run_script(session: &mut Session, script_path: &Path) -> Result<(), RunError> {
    let text = read_file(script_path)?;
    let keys = parse_script(&text)
        .map_err(|e| data_err(format!("{}: {e}", script_path.display())))?;
    for key in keys {
        if session.feed_key(key) == Outcome::Quit {
            break;
        }
    }
    let screen = render::render(session, SCRIPT_WIDTH, SCRIPT_HEIGHT);
    session.set_scroll(screen.scroll);
    print!("{}", screen.dump());
    Ok(())
}

fn run_terminal(session: &mut Session) -> Result<(), RunError> {
    let mut terminal =
        Terminal::new().map_err(|e| RunError::Terminal(format!("terminal unavailable: {e}")))?;
    loop {
        let (width, height) = terminal
            .size()
            .map_err(|e| RunError::Terminal(format!("{e}")))?;
        let screen = render::render(session, width, height);
        session.set_scroll(screen.scroll);
        terminal
            .blit(&screen)
            .map_err(|e| RunError::Terminal(format!("{e}")))?;
        let key = terminal
            .read_key()
            .map_err(|e| RunError::Terminal(format!("{e}")))?;
        if let Some(key) = key {
            if session.feed_key(key) == Outcome::Quit {
                break;
            }
        }
    }
    Ok(())
}

/// Loads everything and runs the session to completion.
pub fn run(plan: &RunPlan) -> Result<(), RunError> {
    let mut session = build_session(plan)?;
    match &plan.script {
        Some(script) => run_script(&mut session, script),
        None => run_terminal(&mut session),
    }
}
