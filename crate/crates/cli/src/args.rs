//! Command-line grammar and the validated run plan.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use slate_core::model::Scope;
use slate_core::session::{AnnotationKind, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Annotate,
    Adjudicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Label,
    Text,
    Link,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Char,
    Token,
    Line,
    Doc,
}

#[derive(Debug, Parser)]
#[command(
    name = "slate",
    version,
    about = "Keyboard-driven terminal annotation of text files",
    after_help = "Annotations are stored next to each data file in <data>.annotations \
                  (or <data>.adjudicated in adjudication mode), one annotation per line."
)]
struct Cli {
    /// Text files to annotate.
    data: Vec<PathBuf>,

    /// Annotate from scratch or adjudicate existing annotation files.
    #[arg(long, value_enum, default_value = "annotate")]
    mode: ModeArg,

    /// Annotation type applied during this run.
    #[arg(long, value_enum, default_value = "label")]
    kind: KindArg,

    /// Item granularity annotations attach to.
    #[arg(long, value_enum, default_value = "token")]
    scope: ScopeArg,

    /// Config file with labels and keybindings (default: ./slate.config if present).
    #[arg(long)]
    config: Option<PathBuf>,

    /// An annotator's file to adjudicate; repeat for each annotator (>= 2).
    #[arg(long = "anno")]
    anno: Vec<PathBuf>,

    /// Write annotations here instead of the derived path (single data file only).
    #[arg(long)]
    output: Option<PathBuf>,

    /// Start from an empty annotation set even when output already exists.
    #[arg(long)]
    overwrite: bool,

    /// Manifest with one data path per line; `#` starts a comment.
    #[arg(long = "file-list")]
    file_list: Option<PathBuf>,

    /// Drive the session from a key script and dump the final screen (for tests).
    #[arg(long, hide = true)]
    script: Option<PathBuf>,
}

/// Everything `run` needs, validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPlan {
    pub mode: Mode,
    pub kind: AnnotationKind,
    pub scope: Scope,
    pub data_files: Vec<PathBuf>,
    pub anno_files: Vec<PathBuf>,
    pub config: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub overwrite: bool,
    pub script: Option<PathBuf>,
}

#[derive(Debug)]
pub enum UsageError {
    /// Flag-level problems; rendered by clap with its own styling.
    Clap(clap::Error),
    /// Grammar-level problems found after flag parsing.
    Invalid(String),
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UsageError::Clap(e) => write!(f, "{e}"),
            UsageError::Invalid(msg) => write!(f, "error: {msg}"),
        }
    }
}

/// Parses argv into a run plan. Total over its error type: every input
/// yields a plan or a usage diagnostic.
pub fn parse_args<I, T>(argv: I) -> Result<RunPlan, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(UsageError::Clap)?;

    let mut data_files = cli.data;
    if let Some(manifest) = &cli.file_list {
        let text = fs::read_to_string(manifest).map_err(|e| {
            UsageError::Invalid(format!("cannot read file list {}: {e}", manifest.display()))
        })?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            data_files.push(PathBuf::from(line));
        }
    }
    if data_files.is_empty() {
        return Err(UsageError::Invalid(
            "no data files given (positional arguments or --file-list)".to_string(),
        ));
    }

    let mode = match cli.mode {
        ModeArg::Annotate => Mode::Annotate,
        ModeArg::Adjudicate => Mode::Adjudicate,
    };
    match mode {
        Mode::Adjudicate => {
            if cli.anno.len() < 2 {
                return Err(UsageError::Invalid(format!(
                    "adjudication needs at least 2 --anno files, got {}",
                    cli.anno.len()
                )));
            }
            if data_files.len() != 1 {
                return Err(UsageError::Invalid(
                    "adjudication works on exactly one data file per run".to_string(),
                ));
            }
        }
        Mode::Annotate => {
            if !cli.anno.is_empty() {
                return Err(UsageError::Invalid(
                    "--anno only applies with --mode adjudicate".to_string(),
                ));
            }
        }
    }
    if cli.output.is_some() && data_files.len() != 1 {
        return Err(UsageError::Invalid(
            "--output requires exactly one data file".to_string(),
        ));
    }

    Ok(RunPlan {
        mode,
        kind: match cli.kind {
            KindArg::Label => AnnotationKind::Label,
            KindArg::Text => AnnotationKind::Text,
            KindArg::Link => AnnotationKind::Link,
        },
        scope: match cli.scope {
            ScopeArg::Char => Scope::Character,
            ScopeArg::Token => Scope::Token,
            ScopeArg::Line => Scope::Line,
            ScopeArg::Doc => Scope::Document,
        },
        data_files,
        anno_files: cli.anno,
        config: cli.config,
        output: cli.output,
        overwrite: cli.overwrite,
        script: cli.script,
    })
}
