//! Source generation from derived parsers.
//!
//! Each message becomes one module exposing `label`, `is_contained`,
//! `valid_<field>`/`get_<field>`, `is_valid` and a `contains_<refinement>`
//! function per refinement of the message. The bodies transcribe the derived
//! variant and field functions. A fixed support file provides the buffer type,
//! contract errors, bit reads and checked arithmetic.

mod rust;

use std::io;
use std::path::Path;

use crate::derive::DerivedParser;
use crate::model::Refinement;

pub use rust::RustBackend;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratedFile {
    /// Path relative to the output directory.
    pub path: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodegenOptions {
    pub emit_support: bool,
    /// Emit an index file declaring every generated module.
    pub emit_index: bool,
}

impl Default for CodegenOptions {
    fn default() -> Self {
        CodegenOptions { emit_support: true, emit_index: true }
    }
}

/// Emitter for one target language.
pub trait Backend {
    fn support(&self) -> GeneratedFile;
    fn message(&self, parser: &DerivedParser, refinements: &[Refinement]) -> GeneratedFile;
    fn index(&self, modules: &[GeneratedFile]) -> GeneratedFile;
}

/// Files for a single message, plus the support file if requested.
pub fn generate(parser: &DerivedParser, refinements: &[Refinement], options: &CodegenOptions) -> Vec<GeneratedFile> {
    generate_with(&RustBackend, &[(parser, refinements)], options)
}

/// Files for several messages sharing one support file.
pub fn generate_all(messages: &[(&DerivedParser, &[Refinement])], options: &CodegenOptions) -> Vec<GeneratedFile> {
    generate_with(&RustBackend, messages, options)
}

pub fn generate_with(
    backend: &dyn Backend,
    messages: &[(&DerivedParser, &[Refinement])],
    options: &CodegenOptions,
) -> Vec<GeneratedFile> {
    let modules: Vec<GeneratedFile> = messages.iter().map(|(p, r)| backend.message(p, r)).collect();
    let mut files = Vec::new();
    if options.emit_support {
        files.push(backend.support());
    }
    if options.emit_index {
        files.push(backend.index(&modules));
    }
    files.extend(modules);
    files
}

pub fn write_files(dir: &Path, files: &[GeneratedFile]) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in files {
        let path = dir.join(&f.path);
        // Leave unchanged files alone so build scripts do not retrigger.
        if std::fs::read_to_string(&path).is_ok_and(|old| old == f.text) {
            continue;
        }
        std::fs::write(path, &f.text)?;
    }
    Ok(())
}
