//! `rflx` command line: check specifications, print message graphs, generate
//! parser modules and validate message files with the interpreter.
//!
//! Exit status is 0 on success or a valid message, 1 on a semantic failure or
//! an invalid message and 2 on a usage error. Diagnostics are colored when
//! `RFLX_COLOR` is `always`, or `auto` on a terminal.

mod dot;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rflx_core::codegen::{generate_all, write_files, CodegenOptions};
use rflx_core::derive::derive_parser;
use rflx_core::dsl::{elaborate_all, parse_spec, Model, Span, SpecFile};
use rflx_core::runtime::{MessageBuffer, MessageParser};

pub use dot::to_dot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "rflx", version, about = "Message format specification toolchain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse, elaborate and validate specification files.
    Check {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
    },
    /// Print the graph of a message in DOT format.
    Graph {
        spec: PathBuf,
        /// Message name, qualified or unique unqualified.
        message: String,
        /// Write to this file instead of standard output.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Additional specification files the spec depends on.
        #[arg(long = "include", short = 'I')]
        include: Vec<PathBuf>,
    },
    /// Generate parser modules for every message.
    Generate {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a message file (.bin raw bytes, .hex hex text).
    Validate {
        spec: PathBuf,
        message: String,
        data: PathBuf,
        /// Also report validity and value of this field.
        #[arg(long = "field")]
        fields: Vec<String>,
        #[arg(long = "include", short = 'I')]
        include: Vec<PathBuf>,
    },
}

struct Diagnostic {
    file: String,
    span: Span,
    message: String,
}

struct Context<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    color: bool,
}

impl Context<'_> {
    fn report(&mut self, mut diagnostics: Vec<Diagnostic>) {
        diagnostics.sort_by(|a, b| {
            (&a.file, a.span.line, a.span.column, &a.message).cmp(&(&b.file, b.span.line, b.span.column, &b.message))
        });
        for d in diagnostics {
            let label = if self.color { "\x1b[1;31merror\x1b[0m" } else { "error" };
            let _ = writeln!(self.err, "{}:{}:{}: {label}: {}", d.file, d.span.line, d.span.column, d.message);
        }
    }

    fn fail(&mut self, message: impl std::fmt::Display) -> i32 {
        let label = if self.color { "\x1b[1;31merror\x1b[0m" } else { "error" };
        let _ = writeln!(self.err, "{label}: {message}");
        EXIT_FAILURE
    }
}

/// Color setting from `RFLX_COLOR` (`always`, `never` or `auto`).
pub fn color_from_env(is_terminal: bool) -> bool {
    match std::env::var("RFLX_COLOR").as_deref() {
        Ok("always") => true,
        Ok("auto") => is_terminal,
        _ => false,
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = if color { e.render().ansi().to_string() } else { e.render().to_string() };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{text}");
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let mut cx = Context { out, err, color };
    match cli.command {
        Command::Check { specs } => check(&mut cx, &specs),
        Command::Graph { spec, message, dot, include } => graph(&mut cx, &spec, &include, &message, dot.as_deref()),
        Command::Generate { specs, out } => generate(&mut cx, &specs, &out),
        Command::Validate { spec, message, data, fields, include } => {
            validate(&mut cx, &spec, &include, &message, &data, &fields)
        }
    }
}

/// Loads and elaborates `paths`, reporting all diagnostics on failure.
fn load(cx: &mut Context<'_>, paths: &[PathBuf]) -> Option<Model> {
    let mut diagnostics = Vec::new();
    let mut specs: Vec<SpecFile> = Vec::new();
    let names: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    for (path, name) in paths.iter().zip(&names) {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                cx.fail(format!("{name}: {e}"));
                return None;
            }
        };
        match parse_spec(&text) {
            Ok(s) => specs.push(s),
            Err(errors) => diagnostics.extend(errors.into_iter().map(|e| Diagnostic {
                file: name.clone(),
                span: e.span,
                message: e.to_string().split_once(": ").map_or(e.to_string(), |(_, m)| m.to_string()),
            })),
        }
    }
    if !diagnostics.is_empty() {
        cx.report(diagnostics);
        return None;
    }
    match elaborate_all(&specs) {
        Ok(m) => Some(m),
        Err(errors) => {
            cx.report(
                errors
                    .into_iter()
                    .map(|e| Diagnostic { file: names[e.file].clone(), span: e.span, message: e.kind.to_string() })
                    .collect(),
            );
            None
        }
    }
}

fn check(cx: &mut Context<'_>, specs: &[PathBuf]) -> i32 {
    let Some(model) = load(cx, specs) else { return EXIT_FAILURE };
    let _ = writeln!(
        cx.out,
        "ok: {} package(s), {} message(s), {} refinement(s)",
        model.packages.len(),
        model.messages().count(),
        model.refinements().count()
    );
    EXIT_OK
}

fn with_includes(spec: &Path, include: &[PathBuf]) -> Vec<PathBuf> {
    let mut all = include.to_vec();
    all.push(spec.to_path_buf());
    all
}

fn graph(cx: &mut Context<'_>, spec: &Path, include: &[PathBuf], message: &str, dot: Option<&Path>) -> i32 {
    let Some(model) = load(cx, &with_includes(spec, include)) else { return EXIT_FAILURE };
    let Some(g) = model.message(message) else { return cx.fail(format!("unknown message `{message}`")) };
    let text = to_dot(g);
    match dot {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => EXIT_OK,
            Err(e) => cx.fail(format!("{}: {e}", path.display())),
        },
        None => {
            let _ = cx.out.write_all(text.as_bytes());
            EXIT_OK
        }
    }
}

fn generate(cx: &mut Context<'_>, specs: &[PathBuf], out: &Path) -> i32 {
    let Some(model) = load(cx, specs) else { return EXIT_FAILURE };
    let parsers: Vec<_> = model.messages().map(derive_parser).collect();
    let refinements: Vec<_> = parsers.iter().map(|p| model.refinements_of(p.graph.name())).collect();
    let inputs: Vec<_> = parsers.iter().zip(&refinements).map(|(p, r)| (p, r.as_slice())).collect();
    let files = generate_all(&inputs, &CodegenOptions::default());
    if let Err(e) = write_files(out, &files) {
        return cx.fail(format!("{}: {e}", out.display()));
    }
    for f in &files {
        let _ = writeln!(cx.out, "{}", out.join(&f.path).display());
    }
    EXIT_OK
}

/// Raw bytes, or hex digits for `.hex` files (whitespace and `#` comments
/// are ignored).
pub fn read_data(path: &Path) -> Result<Vec<u8>, String> {
    let fail = |e: &dyn std::fmt::Display| format!("{}: {e}", path.display());
    if path.extension().is_some_and(|x| x.eq_ignore_ascii_case("hex")) {
        let text = std::fs::read_to_string(path).map_err(|e| fail(&e))?;
        let digits: String = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or_default())
            .flat_map(|l| l.chars().filter(|c| !c.is_whitespace()))
            .collect();
        hex::decode(digits).map_err(|e| fail(&e))
    } else {
        std::fs::read(path).map_err(|e| fail(&e))
    }
}

fn validate(cx: &mut Context<'_>, spec: &Path, include: &[PathBuf], message: &str, data: &Path, fields: &[String]) -> i32 {
    let Some(model) = load(cx, &with_includes(spec, include)) else { return EXIT_FAILURE };
    let Some(g) = model.message(message) else { return cx.fail(format!("unknown message `{message}`")) };
    let parser = MessageParser::from_graph(g);
    let bytes = match read_data(data) {
        Ok(b) => b,
        Err(e) => return cx.fail(e),
    };
    let mut buffer = MessageBuffer::new(&bytes);
    parser.label(&mut buffer);
    let session = parser.session(&buffer).expect("buffer was just labeled");
    let valid = session.is_valid();
    let mut report = String::new();
    writeln!(report, "{}", if valid { "valid" } else { "invalid" }).unwrap();
    for field in fields {
        match session.field_valid(field) {
            Err(e) => return cx.fail(e),
            Ok(false) => writeln!(report, "{field}: invalid").unwrap(),
            Ok(true) => {
                let s = session.field_access(field).expect("valid field is accessible");
                match s.value {
                    Some(v) => match parser.literal(field, v) {
                        Some(lit) => writeln!(report, "{field}: {v} ({lit})").unwrap(),
                        None => writeln!(report, "{field}: {v}").unwrap(),
                    },
                    None => writeln!(report, "{field}: first {}, length {}", s.first, s.length).unwrap(),
                }
            }
        }
    }
    let _ = cx.out.write_all(report.as_bytes());
    if valid {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}
