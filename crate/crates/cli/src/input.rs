//! Loading spaces, points, maps and pseudogroups from arguments and files.

use std::collections::BTreeSet;
use std::path::Path;

use coarse_core::cqi::{int, Distortion, PartialBijection, Rational};
use coarse_core::pseudogroup::{make_example, PseudogroupSpec, SymbolicPoint};
use coarse_core::spaces::{FreeGroup, Graph, Lattice, RegularTree};
use coarse_core::Space;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::cli::PgArgs;
use crate::error::{CliError, Result};

pub enum AnySpace {
    Graph(Graph),
    Lattice(Lattice),
    Tree(RegularTree),
    Free(FreeGroup),
}

/// Runs `$body` with `$s` bound to the concrete space inside an
/// [`AnySpace`].
#[macro_export]
macro_rules! with_space {
    ($space:expr, $s:ident => $body:expr) => {
        match $space {
            $crate::input::AnySpace::Graph($s) => $body,
            $crate::input::AnySpace::Lattice($s) => $body,
            $crate::input::AnySpace::Tree($s) => $body,
            $crate::input::AnySpace::Free($s) => $body,
        }
    };
}

fn size(name: &str, arg: &str, lo: usize, hi: usize) -> Result<usize> {
    match arg.parse::<usize>() {
        Ok(n) if (lo..=hi).contains(&n) => Ok(n),
        _ => Err(CliError::usage(format!("{name} needs a size in {lo}..={hi}, got {arg:?}"))),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))
}

pub fn read_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::json(path.display().to_string(), e))
}

pub fn load_space(spec: &str) -> Result<AnySpace> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match (name, arg) {
        ("z", "") => AnySpace::Lattice(Lattice::new(1)),
        ("z2", "") => AnySpace::Lattice(Lattice::new(2)),
        ("zd", d) => AnySpace::Lattice(Lattice::new(size("zd", d, 1, 16)?)),
        ("tree", k) => AnySpace::Tree(RegularTree::new(size("tree", k, 1, 255)?)),
        ("free", n) => AnySpace::Free(FreeGroup::new(size("free", n, 1, 127)?)),
        ("path", n) => AnySpace::Graph(Graph::path(size("path", n, 1, u32::MAX as usize)? as u32)),
        ("cycle", n) => AnySpace::Graph(Graph::cycle(size("cycle", n, 3, u32::MAX as usize)? as u32)),
        _ => {
            let path = Path::new(spec);
            let text = read_text(path)?;
            let graph = if path.extension().is_some_and(|e| e == "json") {
                Graph::from_json(&text)?
            } else {
                Graph::from_edge_list(&text)?
            };
            AnySpace::Graph(graph)
        }
    })
}

/// A JSON argument; bare words that are not JSON are read as strings.
pub fn json_arg(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn from_value<T: DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| CliError::json(what, e))
}

pub fn point<S: Space>(s: &S, raw: Option<&str>) -> Result<S::Point> {
    match raw {
        None => Ok(s.origin()),
        Some(raw) => from_value(json_arg(raw), "point"),
    }
}

pub fn point_set<S: Space>(_s: &S, path: &Path) -> Result<BTreeSet<S::Point>> {
    from_value(read_json(path)?, &path.display().to_string())
}

/// A map given as an array of pairs or as an object with `pairs`.
pub fn load_map<S: Space, T: Space>(
    _s: &S,
    _t: &T,
    v: &Value,
    what: &str,
) -> Result<PartialBijection<S::Point, T::Point>> {
    let pairs = match v {
        Value::Object(o) => o.get("pairs").cloned().ok_or_else(|| CliError::usage(format!("{what} has no pairs")))?,
        other => other.clone(),
    };
    from_value(pairs, what)
}

/// `3`, `"3/2"` or `[3, 2]`.
pub fn rational(v: &Value) -> Result<Rational> {
    let bad = || CliError::usage(format!("cannot read {v} as a rational"));
    match v {
        Value::Number(n) => n.as_u64().map(int).ok_or_else(bad),
        Value::String(s) => s.trim().parse::<Rational>().map_err(|_| bad()),
        Value::Array(a) if a.len() == 2 => {
            let (p, q) = (a[0].as_i64().ok_or_else(bad)?, a[1].as_i64().ok_or_else(bad)?);
            if q == 0 {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        _ => Err(bad()),
    }
}

pub fn rational_arg(raw: &str) -> Result<Rational> {
    rational(&Value::String(raw.to_string()))
}

pub fn constants(v: &Value) -> Result<Distortion> {
    let c = v.get("constants").ok_or_else(|| CliError::usage("certificate has no constants"))?;
    let get = |key: &str| {
        let upper = key.to_uppercase();
        c.get(key).or_else(|| c.get(&upper)).ok_or_else(|| CliError::usage(format!("constants lack {key}")))
    };
    Ok(Distortion { k: rational(get("k")?)?, c: rational(get("c")?)? })
}

pub fn pseudogroup(args: &PgArgs) -> Result<PseudogroupSpec> {
    match (&args.spec, &args.example) {
        (Some(path), _) => Ok(PseudogroupSpec::from_json(&read_json(path)?)?),
        (None, Some(name)) => {
            let params: Value = serde_json::from_str(&args.params).map_err(|e| CliError::json("--params", e))?;
            Ok(make_example(name, &params)?)
        }
        (None, None) => Err(CliError::usage("give --spec FILE or --example NAME")),
    }
}

pub fn symbolic(spec: &PseudogroupSpec, raw: Option<&str>) -> Result<SymbolicPoint> {
    match raw {
        None => Ok(spec.origin()),
        Some(raw) => Ok(spec.parse_point(&json_arg(raw))?),
    }
}
