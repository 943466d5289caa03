//! Writing artifacts, manifests and error documents.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::cli::Cli;
use crate::commands::Artifact;
use crate::error::{CliError, Result};

pub fn render(cli: &Cli, art: &Artifact) -> String {
    match cli.format {
        crate::cli::Format::Json => pretty(&art.json),
        crate::cli::Format::Csv => art.csv.clone(),
    }
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path.display(), e))
}

/// Everything that determines the run, with no paths or clocks, so that
/// identical configurations give identical manifests.
pub fn manifest(cli: &Cli, files: &[String], passed: bool) -> Value {
    json!({
        "tool": "coarse",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "format": cli.format,
        "horizon": cli.horizon,
        "budget": cli.budget,
        "seed": cli.seed,
        "parameters": cli.command,
        "artifacts": files,
        "passed": passed,
    })
}

/// Artifact to stdout, or artifact, extras and manifest into `--out`.
pub fn emit(cli: &Cli, art: &Artifact) -> Result<()> {
    let body = render(cli, art);
    let Some(dir) = &cli.out else {
        // A reader that hangs up early is not an error of the run.
        return match std::io::stdout().lock().write_all(body.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("stdout", e)),
            _ => Ok(()),
        };
    };
    let main = format!("{}.{}", cli.command.name(), cli.format.extension());
    write(&dir.join(&main), &body)?;
    let mut files = vec![main];
    for (name, text) in &art.extra {
        write(&dir.join(name), text)?;
        files.push(name.clone());
    }
    write(&dir.join("manifest.json"), &pretty(&manifest(cli, &files, art.passed)))
}

/// Error JSON on stderr, and into `error.json` when there is an output
/// directory.
pub fn emit_error(err: &CliError, dir: Option<&Path>) {
    let doc = pretty(&err.to_json());
    eprint!("{doc}");
    if let Some(dir) = dir {
        let _ = write(&dir.join("error.json"), &doc);
    }
}
