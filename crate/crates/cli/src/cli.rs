//! Command-line surface and the batch configuration that maps onto it.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "coarse", version, about = "Coarse geometry experiments on graphs and pseudogroup orbits")]
pub struct Cli {
    /// Format of the main artifact.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Window radius. Each command has its own default.
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    /// Exploration budget: orbit points for pseudogroups, search steps for
    /// exhaustive covers.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Directory receiving the artifact and manifest.json. Without it the
    /// artifact goes to stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized orders of `net` and `match`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Maximal K-separated subset of a window, hence a K-net of it.
    Net(NetArgs),
    /// Bijection between separated subnets of two K-nets.
    Match(MatchArgs),
    /// Composite of two coarse quasi-isometries of one space.
    Compose(ComposeArgs),
    /// Checks a coarse quasi-isometry certificate; exit status 1 on failure.
    Verify(VerifyArgs),
    /// Growth function v(x, r) and its exponent estimates.
    Growth(GrowthArgs),
    /// Ball Følner certificate and its verification.
    Folner(FolnerArgs),
    /// Component forest of the window outside growing balls.
    Ends(EndsArgs),
    /// Colored covers and the asymptotic dimension profile.
    Asdim(AsdimArgs),
    /// Closed ball of an orbit graph.
    Orbit(OrbitArgs),
    /// Recurrence radius of a region.
    Recur(RecurArgs),
    /// Reeb neighbourhood of a point and the ball map to another point.
    Reeb(ReebArgs),
    /// Finite-resolution sample of the limit set of orbit windows.
    Limitset(LimitArgs),
    /// Group model of a pseudogroup compared against its orbit metric.
    Double(DoubleArgs),
    /// Rotation with a recurrent orbit but no recurrence on a large set.
    DemoRotation(DemoArgs),
    /// Runs a JSON array of experiment configurations.
    Batch(BatchArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Net(_) => "net",
            Command::Match(_) => "match",
            Command::Compose(_) => "compose",
            Command::Verify(_) => "verify",
            Command::Growth(_) => "growth",
            Command::Folner(_) => "folner",
            Command::Ends(_) => "ends",
            Command::Asdim(_) => "asdim",
            Command::Orbit(_) => "orbit",
            Command::Recur(_) => "recur",
            Command::Reeb(_) => "reeb",
            Command::Limitset(_) => "limitset",
            Command::Double(_) => "double",
            Command::DemoRotation(_) => "demo-rotation",
            Command::Batch(_) => "batch",
        }
    }
}

/// A graph: `z`, `z2`, `zd:D`, `tree:K`, `free:N`, `path:N`, `cycle:N`, or
/// a file (`.json` document or `u v` edge list).
#[derive(Debug, Clone, Args, Serialize)]
pub struct SpaceArgs {
    #[arg(long, default_value = "z")]
    pub space: String,
    /// Basepoint as JSON, e.g. `3` or `[0,1]`. Defaults to the origin.
    #[arg(long)]
    pub x0: Option<String>,
}

/// A pseudogroup, from a JSON file `{"kind", "params", "basepoints"}` or a
/// built-in example.
#[derive(Debug, Clone, Args, Serialize)]
pub struct PgArgs {
    #[arg(long, conflicts_with = "example")]
    pub spec: Option<PathBuf>,
    /// rotation, zd, tree, shift or custom.
    #[arg(long)]
    pub example: Option<String>,
    /// Example parameters as a JSON object.
    #[arg(long, default_value = "{}")]
    pub params: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NetArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 1)]
    pub k: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MatchArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    /// JSON array of points; a greedy net from the basepoint if absent.
    #[arg(long)]
    pub first: Option<PathBuf>,
    /// JSON array of points; a greedy net in reverse (or seeded) order if
    /// absent.
    #[arg(long)]
    pub second: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ComposeArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 1)]
    pub k: u64,
    /// Bi-Lipschitz constant shared by both maps, e.g. `2` or `3/2`.
    #[arg(long, default_value = "1")]
    pub c: String,
    /// First map: JSON array of pairs or a certificate with `pairs`.
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long)]
    pub g: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Target space; the source space if absent.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub target_x0: Option<String>,
    /// `{"pairs": [[x, y], ...], "constants": {"k": .., "c": ..}}`.
    #[arg(long)]
    pub cert: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GrowthArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 20)]
    pub r_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Balls,
    Shaved,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FolnerArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 10)]
    pub max_n: u64,
    #[arg(long, default_value_t = 100_000)]
    pub max_size: usize,
    /// Boundary radii, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub r: Vec<u64>,
    #[arg(long, value_enum, default_value_t = StrategyArg::Balls)]
    pub strategy: StrategyArg,
    /// `a` in the schedule `ε_n = a / n`.
    #[arg(long, default_value = "8")]
    pub epsilon: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EndsArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 1)]
    pub mu: u64,
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// Also write the forest in DOT format to the output directory.
    #[arg(long)]
    pub dot: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AsdimArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Separation scales, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub r: Vec<u64>,
    /// Also build and verify a cover at this scale.
    #[arg(long)]
    pub cover: Option<u64>,
    /// Largest number of colors minus one to try for `--cover`.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub pg: PgArgs,
    /// Center as JSON in the notation of the pseudogroup; its first
    /// basepoint if absent.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub radius: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RecurArgs {
    #[command(flatten)]
    pub pg: PgArgs,
    /// Region as JSON, e.g. `{"type": "arc", "lo": "0", "hi": "1/10"}`.
    #[arg(long)]
    pub region: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReebArgs {
    #[command(flatten)]
    pub pg: PgArgs,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub radius: u64,
    /// Second point of the neighbourhood; builds the ball map to it.
    #[arg(long)]
    pub y: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LimitArgs {
    #[command(flatten)]
    pub pg: PgArgs,
    /// Resolution 2^-level.
    #[arg(long, default_value_t = 4)]
    pub level: u32,
    #[arg(long, default_value_t = 10)]
    pub radius: u64,
    /// Window centers (repeatable); the basepoints if absent.
    #[arg(long)]
    pub center: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DoubleArgs {
    #[command(flatten)]
    pub pg: PgArgs,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 6)]
    pub radius: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 6)]
    pub n_max: u64,
    /// Orbit points k·α tried per row, for |k| up to this.
    #[arg(long, default_value_t = 100_000)]
    pub scan: i64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BatchArgs {
    pub file: PathBuf,
}

const PSEUDOGROUP_COMMANDS: [&str; 5] = ["orbit", "recur", "reeb", "limitset", "double"];

/// One experiment of a batch file. `input` is a space name or graph path
/// for graph commands; for pseudogroup commands it is a spec path or
/// `{"example": name, "params": {...}}`. `params` holds the remaining flags
/// by name.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub command: String,
    #[serde(default)]
    pub input: Option<Value>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    pub horizon: Option<u64>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub format: Option<String>,
    /// Run directory, relative to the batch output directory.
    pub out: Option<String>,
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl ExperimentConfig {
    /// Equivalent command line, program name first.
    pub fn argv(&self) -> Result<Vec<String>> {
        let mut argv = vec!["coarse".to_string()];
        for (flag, v) in [("--horizon", self.horizon), ("--budget", self.budget), ("--seed", self.seed)] {
            if let Some(v) = v {
                argv.extend([flag.to_string(), v.to_string()]);
            }
        }
        if let Some(f) = &self.format {
            argv.extend(["--format".to_string(), f.clone()]);
        }
        if self.command == "batch" {
            return Err(CliError::usage("batch files cannot nest batches"));
        }
        argv.push(self.command.clone());
        match (&self.input, PSEUDOGROUP_COMMANDS.contains(&self.command.as_str())) {
            (None, _) => {}
            (Some(Value::String(s)), false) => argv.extend(["--space".to_string(), s.clone()]),
            (Some(Value::String(s)), true) => argv.extend(["--spec".to_string(), s.clone()]),
            (Some(Value::Object(o)), true) if o.contains_key("example") => {
                argv.extend(["--example".to_string(), scalar(&o["example"])]);
                if let Some(p) = o.get("params") {
                    argv.extend(["--params".to_string(), p.to_string()]);
                }
            }
            (Some(other), _) => {
                return Err(CliError::usage(format!("cannot use {other} as input of {}", self.command)))
            }
        }
        for (key, v) in &self.params {
            let flag = format!("--{}", key.replace('_', "-"));
            match v {
                Value::Bool(true) => argv.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::Array(items) => {
                    for item in items {
                        argv.extend([flag.clone(), scalar(item)]);
                    }
                }
                other => argv.extend([flag, scalar(other)]),
            }
        }
        Ok(argv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_becomes_a_command_line() {
        let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
            "command": "asdim", "input": "z2", "horizon": 30,
            "params": {"r": [2, 4], "cover": 4}
        }))
        .unwrap();
        let cli = Cli::try_parse_from(cfg.argv().unwrap()).unwrap();
        assert_eq!(cli.horizon, Some(30));
        let Command::Asdim(a) = cli.command else { panic!("wrong command") };
        assert_eq!((a.space.space.as_str(), a.r, a.cover), ("z2", vec![2, 4], Some(4)));
    }

    #[test]
    fn example_input_for_orbits() {
        let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({
            "command": "orbit", "input": {"example": "rotation", "params": {"alpha": "5/12"}},
            "params": {"radius": 3}
        }))
        .unwrap();
        let cli = Cli::try_parse_from(cfg.argv().unwrap()).unwrap();
        let Command::Orbit(o) = cli.command else { panic!("wrong command") };
        assert_eq!(o.pg.example.as_deref(), Some("rotation"));
        assert_eq!(o.radius, 3);
    }

    #[test]
    fn nested_batches_are_refused() {
        let cfg: ExperimentConfig = serde_json::from_value(serde_json::json!({"command": "batch"})).unwrap();
        assert!(cfg.argv().is_err());
    }
}
