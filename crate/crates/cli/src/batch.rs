//! Batch files: a JSON array of experiment configurations, run in parallel,
//! each into its own directory under `--out`.

use std::path::Path;

use clap::Parser;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::{BatchArgs, Cli, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::{commands, input, output};

fn run_one(cfg: &ExperimentConfig, dir: &Path) -> Result<bool> {
    let argv = cfg.argv()?;
    let mut cli = Cli::try_parse_from(&argv).map_err(|e| CliError::usage(e.to_string()))?;
    cli.out = Some(dir.to_path_buf());
    let art = commands::run(&cli)?;
    output::emit(&cli, &art)?;
    Ok(art.passed)
}

fn run_dir(cfg: &ExperimentConfig, i: usize) -> String {
    cfg.out.clone().or_else(|| cfg.name.clone()).unwrap_or_else(|| format!("{i:03}-{}", cfg.command))
}

/// Returns whether every experiment ran and passed.
pub fn run(cli: &Cli, args: &BatchArgs) -> Result<bool> {
    let out = cli.out.as_ref().ok_or_else(|| CliError::usage("batch needs --out"))?;
    let configs: Vec<ExperimentConfig> = serde_json::from_value(input::read_json(&args.file)?)
        .map_err(|e| CliError::json(args.file.display().to_string(), e))?;
    let mut dirs: Vec<String> = configs.iter().enumerate().map(|(i, c)| run_dir(c, i)).collect();
    dirs.sort();
    if dirs.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::usage("two experiments share an output directory"));
    }
    let runs: Vec<Value> = configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let name = run_dir(cfg, i);
            let dir = out.join(&name);
            let (status, error) = match run_one(cfg, &dir) {
                Ok(true) => ("passed", Value::Null),
                Ok(false) => ("failed", Value::Null),
                Err(e) => {
                    output::emit_error(&e, Some(&dir));
                    ("error", e.to_json())
                }
            };
            json!({"dir": name, "command": cfg.command, "status": status, "error": error})
        })
        .collect();
    let all = runs.iter().all(|r| r["status"] == "passed");
    let manifest = json!({
        "tool": "coarse",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "batch",
        "experiments": runs.len(),
        "runs": runs,
        "passed": all,
    });
    output::write(&out.join("manifest.json"), &output::pretty(&manifest))?;
    Ok(all)
}
