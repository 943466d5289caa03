//! Finitely generated pseudogroups acting on exactly represented points,
//! their orbit graphs with the word metric `d_E`, and the constructions
//! built on them.

mod circle;
mod demo;
mod double;
mod limit;
mod reeb;
mod region;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::{Arc, RwLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::metric::{Space, SpaceKind};

pub use circle::{convergent, floor_golden, CirclePoint, Q};
pub use demo::{demo_rotation, DemoReport, DemoRow};
pub use double::{group_double, DoubleReport, DoubledGraph, DoubledPoint};
pub use limit::{limit_set_sample, Cell, LimitSample, WindowSpec};
pub use reeb::{reeb_neighborhood, Neighborhood, PhiMap, ReebNeighborhood};
pub use region::{recurrence_radius, Recurrence, Region};

/// A point of one of the built-in ambient spaces, in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolicPoint {
    Circle(CirclePoint),
    Lattice(Vec<i64>),
    /// Reduced word in the involutions of a regular tree.
    Word(Vec<u8>),
    /// One-sided word `prefix period period ...`.
    Sequence {
        prefix: String,
        period: String,
    },
    /// Position of the pointer in the example's bi-infinite sequence.
    Shift(i64),
}

/// Bi-infinite sequence carried by a shift example.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftSeq {
    /// Fixed point of `0 -> 01, 1 -> 0`, extended to negative indices by the
    /// same Sturmian formula.
    Fibonacci,
    /// `... left left mid right right ...` with `mid` starting at index 0.
    Eventually { left: Vec<u8>, mid: Vec<u8>, right: Vec<u8>, period: Option<i64> },
}

impl ShiftSeq {
    pub fn letter(&self, n: i64) -> Result<u8> {
        Ok(match self {
            ShiftSeq::Fibonacci => {
                let f = |m: i64| floor_golden(Q::from_integer(0), m);
                b'0' + (2 + f(n + 1)? - f(n + 2)?) as u8
            }
            ShiftSeq::Eventually { left, mid, right, .. } => {
                if n < 0 {
                    let l = left.len() as i64;
                    left[(l - ((-n) % l)) as usize % left.len()]
                } else if (n as usize) < mid.len() {
                    mid[n as usize]
                } else {
                    right[(n as usize - mid.len()) % right.len()]
                }
            }
        })
    }

    fn eventually(left: Vec<u8>, mid: Vec<u8>, right: Vec<u8>) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::invalid("shift tails must be non-empty"));
        }
        let mut seq = ShiftSeq::Eventually { left, mid, right, period: None };
        let ShiftSeq::Eventually { left, mid, right, .. } = &seq else { unreachable!() };
        let p = (left.len() as i64).lcm(&(right.len() as i64));
        let lo = -p;
        let hi = mid.len() as i64 + p;
        let periodic_with = |d: i64| -> Result<bool> {
            for n in lo..hi {
                if seq.letter(n)? != seq.letter(n + d)? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        if periodic_with(p)? {
            let d = (1..=p).find(|d| p % d == 0 && periodic_with(*d).unwrap_or(false)).unwrap();
            if let ShiftSeq::Eventually { period, .. } = &mut seq {
                *period = Some(d);
            }
        }
        Ok(seq)
    }

    pub fn period(&self) -> Option<i64> {
        match self {
            ShiftSeq::Fibonacci => None,
            ShiftSeq::Eventually { period, .. } => *period,
        }
    }
}

/// Prefix rewrite `from -> to` on one-sided words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub name: String,
    pub inverse: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ambient {
    Rotation { alpha: CirclePoint },
    Lattice { dim: usize },
    Tree { degree: u8 },
    Shift { seq: ShiftSeq },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Identity,
    Rotate(CirclePoint),
    Translate {
        axis: usize,
        step: i64,
    },
    Flip(u8),
    /// Defined where the letter at the pointer is the given one.
    ShiftRight(u8),
    /// Defined where the letter just left of the pointer is the given one.
    ShiftLeft(u8),
    Rewrite {
        from: Vec<u8>,
        to: Vec<u8>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub inverse: String,
    pub action: Action,
}

/// Finite symmetric generating set with its ambient space and basepoints.
#[derive(Debug, Clone)]
pub struct PseudogroupSpec {
    pub kind: String,
    pub params: Value,
    pub generators: Vec<Generator>,
    pub basepoints: Vec<SymbolicPoint>,
    pub ambient: Ambient,
}

impl Serialize for PseudogroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let names: Vec<&str> = self.generators.iter().map(|g| g.name.as_str()).collect();
        json!({"kind": self.kind, "params": self.params, "generators": names, "basepoints": self.basepoints})
            .serialize(s)
    }
}

fn parse_rational(v: &Value) -> Result<Q> {
    let bad = || Error::invalid(format!("not a rational: {v}"));
    match v {
        Value::Number(n) => n.as_i64().map(Q::from_integer).ok_or_else(bad),
        Value::String(s) => {
            let (p, q) = s.split_once('/').unwrap_or((s, "1"));
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 {
                return Err(bad());
            }
            Ok(Q::new(p, q))
        }
        _ => Err(bad()),
    }
}

fn param<'a>(params: &'a Value, key: &str) -> Result<&'a Value> {
    params.get(key).ok_or_else(|| Error::invalid(format!("missing parameter {key}")))
}

fn param_str(params: &Value, key: &str) -> Result<Vec<u8>> {
    let v = param(params, key)?;
    let s = v.as_str().ok_or_else(|| Error::invalid(format!("{key} must be a string")))?;
    if !s.is_ascii() {
        return Err(Error::invalid(format!("{key} must be ASCII")));
    }
    Ok(s.as_bytes().to_vec())
}

/// Canonical `u v v v ...`: primitive period, shortest prefix.
pub fn canonical_sequence(prefix: &[u8], period: &[u8]) -> Result<SymbolicPoint> {
    if period.is_empty() {
        return Err(Error::invalid("period must be non-empty"));
    }
    let n = period.len();
    let d = (1..=n).find(|d| n.is_multiple_of(*d) && (0..n).all(|i| period[i] == period[i % d])).unwrap();
    let mut period = period[..d].to_vec();
    let mut prefix = prefix.to_vec();
    while prefix.last() == period.last() && !prefix.is_empty() {
        prefix.pop();
        period.rotate_right(1);
    }
    let text = |v: Vec<u8>| String::from_utf8(v).map_err(|_| Error::invalid("letters must be ASCII"));
    Ok(SymbolicPoint::Sequence { prefix: text(prefix)?, period: text(period)? })
}

fn sequence_letter(prefix: &[u8], period: &[u8], i: usize) -> u8 {
    if i < prefix.len() {
        prefix[i]
    } else {
        period[(i - prefix.len()) % period.len()]
    }
}

impl PseudogroupSpec {
    /// Reads `{"kind", "params", "basepoints"}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| Error::invalid("missing kind"))?;
        let params = v.get("params").cloned().unwrap_or(json!({}));
        let mut spec = make_example(kind, &params)?;
        if let Some(bps) = v.get("basepoints").and_then(Value::as_array) {
            if !bps.is_empty() {
                spec.basepoints = bps.iter().map(|b| spec.parse_point(b)).collect::<Result<_>>()?;
            }
        }
        Ok(spec)
    }

    /// Reads a point in the notation of this spec's kind: `"p/q"` or
    /// `{"r", "b"}` on the circle, integer arrays, digit strings for tree
    /// words, `{"prefix", "period"}` for one-sided words and integer offsets
    /// for shifts. Canonical serialized points are accepted too.
    pub fn parse_point(&self, v: &Value) -> Result<SymbolicPoint> {
        if let Ok(p) = serde_json::from_value::<SymbolicPoint>(v.clone()) {
            return self.canonicalize(p);
        }
        let bad = || Error::invalid(format!("cannot read point {v} for kind {}", self.kind));
        let p = match &self.ambient {
            Ambient::Rotation { .. } => match v {
                Value::Object(_) => {
                    let b = v.get("b").and_then(Value::as_i64).unwrap_or(0);
                    SymbolicPoint::Circle(CirclePoint::new(parse_rational(param(v, "r")?)?, b)?)
                }
                _ => SymbolicPoint::Circle(CirclePoint::new(parse_rational(v)?, 0)?),
            },
            Ambient::Lattice { .. } => {
                let a = v.as_array().ok_or_else(bad)?;
                SymbolicPoint::Lattice(a.iter().map(|x| x.as_i64().ok_or_else(bad)).collect::<Result<_>>()?)
            }
            Ambient::Tree { .. } => {
                let s = v.as_str().ok_or_else(bad)?;
                SymbolicPoint::Word(s.bytes().map(|c| c.wrapping_sub(b'0')).collect())
            }
            Ambient::Shift { .. } => SymbolicPoint::Shift(v.as_i64().ok_or_else(bad)?),
            Ambient::Custom => canonical_sequence(&param_str(v, "prefix")?, &param_str(v, "period")?)?,
        };
        self.canonicalize(p)
    }

    fn canonicalize(&self, p: SymbolicPoint) -> Result<SymbolicPoint> {
        let bad = || Error::invalid(format!("point {p:?} does not belong to a {} example", self.kind));
        match (&self.ambient, &p) {
            (Ambient::Rotation { .. }, SymbolicPoint::Circle(c)) => {
                Ok(SymbolicPoint::Circle(CirclePoint::new(c.r, c.b)?))
            }
            (Ambient::Lattice { dim }, SymbolicPoint::Lattice(v)) if v.len() == *dim => Ok(p),
            (Ambient::Tree { degree }, SymbolicPoint::Word(w)) => {
                let reduced = w.iter().all(|&a| a < *degree) && w.windows(2).all(|p| p[0] != p[1]);
                if reduced {
                    Ok(p)
                } else {
                    Err(bad())
                }
            }
            (Ambient::Shift { seq }, SymbolicPoint::Shift(n)) => {
                Ok(SymbolicPoint::Shift(seq.period().map_or(*n, |d| n.rem_euclid(d))))
            }
            (Ambient::Custom, SymbolicPoint::Sequence { prefix, period }) => {
                canonical_sequence(prefix.as_bytes(), period.as_bytes())
            }
            _ => Err(bad()),
        }
    }

    pub fn generator(&self, name: &str) -> Result<usize> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::invalid(format!("unknown generator {name}")))
    }

    pub fn inverse_of(&self, g: usize) -> usize {
        self.generator(&self.generators[g].inverse).expect("specs are closed under inversion")
    }

    /// Letter of a shift point at relative position `i`.
    pub fn shift_letter(&self, p: &SymbolicPoint, i: i64) -> Result<u8> {
        match (&self.ambient, p) {
            (Ambient::Shift { seq }, SymbolicPoint::Shift(n)) => seq.letter(n + i),
            _ => Err(Error::invalid("not a shift point")),
        }
    }

    /// `g(p)`, or `None` outside the domain of `g`.
    pub fn apply(&self, g: usize, p: &SymbolicPoint) -> Result<Option<SymbolicPoint>> {
        use SymbolicPoint as P;
        let out = match (&self.generators[g].action, p) {
            (Action::Identity, p) => Some(p.clone()),
            (Action::Rotate(a), P::Circle(c)) => Some(P::Circle(c.add(a)?)),
            (Action::Translate { axis, step }, P::Lattice(v)) => {
                let mut v = v.clone();
                v[*axis] += step;
                Some(P::Lattice(v))
            }
            (Action::Flip(a), P::Word(w)) => {
                let mut w = w.clone();
                if w.last() == Some(a) {
                    w.pop();
                } else {
                    w.push(*a);
                }
                Some(P::Word(w))
            }
            (Action::ShiftRight(a), P::Shift(n)) => (self.shift_letter(p, 0)? == *a).then(|| P::Shift(n + 1)),
            (Action::ShiftLeft(a), P::Shift(n)) => (self.shift_letter(p, -1)? == *a).then(|| P::Shift(n - 1)),
            (Action::Rewrite { from, to }, P::Sequence { prefix, period }) => {
                let (u, v) = (prefix.as_bytes(), period.as_bytes());
                if (0..from.len()).all(|i| sequence_letter(u, v, i) == from[i]) {
                    let mut rest: Vec<u8> = to.clone();
                    let cut = from.len();
                    let (u2, v2) = if cut <= u.len() {
                        (u[cut..].to_vec(), v.to_vec())
                    } else {
                        let mut v2 = v.to_vec();
                        v2.rotate_left((cut - u.len()) % v.len());
                        (Vec::new(), v2)
                    };
                    rest.extend(u2);
                    Some(canonical_sequence(&rest, &v2)?)
                } else {
                    None
                }
            }
            _ => return Err(Error::invalid(format!("generator {} cannot act on {p:?}", self.generators[g].name))),
        };
        match out {
            Some(q) => Ok(Some(self.canonicalize(q)?)),
            None => Ok(None),
        }
    }

    /// Applies generator names right to left of application order, i.e.
    /// `word[0]` first.
    pub fn apply_word(&self, word: &[String], p: &SymbolicPoint) -> Result<Option<SymbolicPoint>> {
        let mut cur = p.clone();
        for name in word {
            match self.apply(self.generator(name)?, &cur)? {
                Some(q) => cur = q,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    /// Adds `id` to the generating set if it is missing.
    pub fn with_identity(&self) -> PseudogroupSpec {
        let mut s = self.clone();
        if !s.generators.iter().any(|g| g.action == Action::Identity) {
            s.generators.insert(0, Generator { name: "id".into(), inverse: "id".into(), action: Action::Identity });
        }
        s
    }

    pub fn origin(&self) -> SymbolicPoint {
        self.basepoints[0].clone()
    }
}

fn gen(name: impl Into<String>, inverse: impl Into<String>, action: Action) -> Generator {
    Generator { name: name.into(), inverse: inverse.into(), action }
}

/// Built-in examples: `rotation` (`alpha` as `"p/q"`, `"golden"` or a
/// continued fraction list), `zd` (`dim`), `tree` (`degree`), `shift`
/// (`word: "fibonacci"` or `left`/`mid`/`right` strings, or `period`) and
/// `custom` (`rules`, `basepoints`).
pub fn make_example(name: &str, params: &Value) -> Result<PseudogroupSpec> {
    let (ambient, generators, basepoint) = match name {
        "rotation" => {
            let a = param(params, "alpha")?;
            let alpha = match a {
                Value::String(s) if s == "golden" => CirclePoint::new(Q::from_integer(-1), 1)?,
                Value::Array(cf) => {
                    let cf: Vec<i64> = cf
                        .iter()
                        .map(|x| x.as_i64().ok_or_else(|| Error::invalid("bad continued fraction")))
                        .collect::<Result<_>>()?;
                    CirclePoint::new(convergent(&cf)?, 0)?
                }
                v => CirclePoint::new(parse_rational(v)?, 0)?,
            };
            if alpha == CirclePoint::zero() {
                return Err(Error::invalid("rotation by 0"));
            }
            let gens =
                vec![gen("+a", "-a", Action::Rotate(alpha.clone())), gen("-a", "+a", Action::Rotate(alpha.neg()?))];
            (Ambient::Rotation { alpha }, gens, SymbolicPoint::Circle(CirclePoint::zero()))
        }
        "zd" => {
            let dim =
                param(params, "dim")?.as_u64().filter(|&d| d >= 1).ok_or_else(|| Error::invalid("dim >= 1"))? as usize;
            let mut gens = Vec::new();
            for i in 0..dim {
                let (p, m) = (format!("+e{}", i + 1), format!("-e{}", i + 1));
                gens.push(gen(&p, &m, Action::Translate { axis: i, step: 1 }));
                gens.push(gen(&m, &p, Action::Translate { axis: i, step: -1 }));
            }
            (Ambient::Lattice { dim }, gens, SymbolicPoint::Lattice(vec![0; dim]))
        }
        "tree" => {
            let v = params.get("degree").or_else(|| params.get("code"));
            let degree = v
                .and_then(Value::as_u64)
                .filter(|&d| (2..=255).contains(&d))
                .ok_or_else(|| Error::invalid("degree in 2..=255"))? as u8;
            let gens = (0..degree).map(|a| gen(format!("a{a}"), format!("a{a}"), Action::Flip(a))).collect();
            (Ambient::Tree { degree }, gens, SymbolicPoint::Word(Vec::new()))
        }
        "shift" => {
            let seq = match params.get("word").and_then(Value::as_str) {
                Some("fibonacci") => ShiftSeq::Fibonacci,
                Some(w) => return Err(Error::UnsupportedName { name: format!("shift word {w}") }),
                None if params.get("period").is_some() => {
                    let p = param_str(params, "period")?;
                    ShiftSeq::eventually(p.clone(), Vec::new(), p)?
                }
                None => ShiftSeq::eventually(
                    param_str(params, "left")?,
                    params.get("mid").map(|_| param_str(params, "mid")).transpose()?.unwrap_or_default(),
                    param_str(params, "right")?,
                )?,
            };
            let mut alphabet: Vec<u8> = match &seq {
                ShiftSeq::Fibonacci => vec![b'0', b'1'],
                ShiftSeq::Eventually { left, mid, right, .. } => left.iter().chain(mid).chain(right).copied().collect(),
            };
            alphabet.sort();
            alphabet.dedup();
            let mut gens = Vec::new();
            for &a in &alphabet {
                let c = a as char;
                gens.push(gen(format!("R{c}"), format!("L{c}"), Action::ShiftRight(a)));
                gens.push(gen(format!("L{c}"), format!("R{c}"), Action::ShiftLeft(a)));
            }
            (Ambient::Shift { seq }, gens, SymbolicPoint::Shift(0))
        }
        "custom" => {
            let rules: Vec<Rule> = serde_json::from_value(param(params, "rules")?.clone())
                .map_err(|e| Error::invalid(format!("rules: {e}")))?;
            let mut gens = Vec::new();
            for r in &rules {
                let inv = rules
                    .iter()
                    .find(|s| s.name == r.inverse)
                    .ok_or_else(|| Error::invalid(format!("rule {} has no inverse {}", r.name, r.inverse)))?;
                if inv.from != r.to || inv.to != r.from || inv.inverse != r.name {
                    return Err(Error::invalid(format!("rule {} and {} are not mutually inverse", r.name, inv.name)));
                }
                if !r.from.is_ascii() || !r.to.is_ascii() {
                    return Err(Error::invalid("letters must be ASCII"));
                }
                gens.push(gen(
                    &r.name,
                    &r.inverse,
                    Action::Rewrite { from: r.from.clone().into_bytes(), to: r.to.clone().into_bytes() },
                ));
            }
            let mut names: Vec<&str> = rules.iter().map(|r| r.name.as_str()).collect();
            names.sort();
            if names.windows(2).any(|w| w[0] == w[1]) || names.is_empty() {
                return Err(Error::invalid("rule names must be unique and non-empty"));
            }
            let bp = canonical_sequence(b"", b"0")?;
            (Ambient::Custom, gens, bp)
        }
        other => return Err(Error::UnsupportedName { name: other.to_string() }),
    };
    let mut spec = PseudogroupSpec {
        kind: name.to_string(),
        params: params.clone(),
        generators,
        basepoints: vec![basepoint],
        ambient,
    };
    if let Some(bps) = params.get("basepoints").and_then(Value::as_array) {
        spec.basepoints = bps.iter().map(|b| spec.parse_point(b)).collect::<Result<_>>()?;
    }
    if spec.basepoints.is_empty() {
        return Err(Error::invalid("no basepoints"));
    }
    Ok(spec)
}

/// Orbit graph explored lazily from any point, with vertex budget.
pub struct OrbitGraph<'a> {
    pub spec: &'a PseudogroupSpec,
    budget: usize,
    cache: RwLock<HashMap<SymbolicPoint, Arc<Vec<(usize, SymbolicPoint)>>>>,
}

impl<'a> OrbitGraph<'a> {
    pub fn new(spec: &'a PseudogroupSpec, budget: usize) -> Self {
        OrbitGraph { spec, budget, cache: RwLock::new(HashMap::new()) }
    }

    /// `(generator index, g(p))` for every generator whose domain holds `p`.
    pub fn labeled(&self, p: &SymbolicPoint) -> Result<Arc<Vec<(usize, SymbolicPoint)>>> {
        if let Some(e) = self.cache.read().unwrap().get(p) {
            return Ok(e.clone());
        }
        let mut out = Vec::new();
        for g in 0..self.spec.generators.len() {
            if let Some(q) = self.spec.apply(g, p)? {
                out.push((g, q));
            }
        }
        let out = Arc::new(out);
        let mut cache = self.cache.write().unwrap();
        if cache.len() >= self.budget {
            return Err(Error::BudgetExhausted { explored: cache.len() as u64 });
        }
        cache.insert(p.clone(), out.clone());
        Ok(out)
    }

    pub fn explored(&self) -> usize {
        self.cache.read().unwrap().len()
    }
}

impl Space for OrbitGraph<'_> {
    type Point = SymbolicPoint;

    fn neighbors(&self, p: &SymbolicPoint) -> Result<Vec<SymbolicPoint>> {
        let mut v: Vec<SymbolicPoint> =
            self.labeled(p)?.iter().filter(|(_, q)| q != p).map(|(_, q)| q.clone()).collect();
        v.sort();
        v.dedup();
        Ok(v)
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::LazyOrbit
    }

    fn origin(&self) -> SymbolicPoint {
        self.spec.origin()
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.spec.generators.len())
    }

    fn coordinates(&self, p: &SymbolicPoint) -> Option<Vec<i64>> {
        match p {
            SymbolicPoint::Lattice(v) => Some(v.clone()),
            _ => None,
        }
    }

    fn product_dim(&self) -> Option<usize> {
        match self.spec.ambient {
            Ambient::Lattice { dim } => Some(dim),
            _ => None,
        }
    }
}

/// Exact closed ball `B̄_E(x, r)` with its labelled edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitBall {
    pub center: SymbolicPoint,
    pub radius: u64,
    /// BFS order: by distance, then generator order of discovery.
    pub points: Vec<SymbolicPoint>,
    pub depth: Vec<u64>,
    /// `(i, generator, j)` with `g(points[i]) = points[j]`.
    pub edges: Vec<(usize, String, usize)>,
    /// For each point, a shortest word carrying the center to it.
    #[serde(skip)]
    pub words: Vec<Vec<usize>>,
}

impl OrbitBall {
    pub fn index(&self) -> BTreeMap<&SymbolicPoint, usize> {
        self.points.iter().enumerate().map(|(i, p)| (p, i)).collect()
    }
}

pub fn orbit_ball(graph: &OrbitGraph, x: &SymbolicPoint, r: u64) -> Result<OrbitBall> {
    let x = graph.spec.canonicalize(x.clone())?;
    let mut idx: HashMap<SymbolicPoint, usize> = HashMap::from([(x.clone(), 0)]);
    let mut points = vec![x.clone()];
    let mut depth = vec![0];
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        if depth[i] == r {
            continue;
        }
        for (g, q) in graph.labeled(&points[i])?.iter() {
            if !idx.contains_key(q) {
                idx.insert(q.clone(), points.len());
                let mut w = words[i].clone();
                w.push(*g);
                points.push(q.clone());
                depth.push(depth[i] + 1);
                words.push(w);
                queue.push_back(points.len() - 1);
            }
        }
    }
    let mut edges = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for (g, q) in graph.labeled(p)?.iter() {
            if let Some(&j) = idx.get(q) {
                edges.push((i, graph.spec.generators[*g].name.clone(), j));
            }
        }
    }
    Ok(OrbitBall { center: x, radius: r, points, depth, edges, words })
}

/// Shortest generator word carrying `x` to `y`, found by BFS up to `cap`.
pub fn word_between(graph: &OrbitGraph, x: &SymbolicPoint, y: &SymbolicPoint, cap: u64) -> Result<Option<Vec<String>>> {
    let mut parent: HashMap<SymbolicPoint, Option<(SymbolicPoint, usize)>> = HashMap::from([(x.clone(), None)]);
    let mut frontier = vec![x.clone()];
    let mut seen: HashSet<SymbolicPoint> = HashSet::from([x.clone()]);
    for _ in 0..=cap {
        if seen.contains(y) {
            let mut word = Vec::new();
            let mut cur = y.clone();
            while let Some(Some((p, g))) = parent.get(&cur) {
                word.push(graph.spec.generators[*g].name.clone());
                cur = p.clone();
            }
            word.reverse();
            return Ok(Some(word));
        }
        let mut next = Vec::new();
        for p in &frontier {
            for (g, q) in graph.labeled(p)?.iter() {
                if seen.insert(q.clone()) {
                    parent.insert(q.clone(), Some((p.clone(), *g)));
                    next.push(q.clone());
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{distance, Distance};

    fn fib_substitution(n: usize) -> Vec<u8> {
        let mut w = vec![b'0'];
        while w.len() < n {
            w = w.iter().flat_map(|&c| if c == b'0' { vec![b'0', b'1'] } else { vec![b'0'] }).collect();
        }
        w.truncate(n);
        w
    }

    #[test]
    fn fibonacci_word_matches_substitution() {
        let seq = ShiftSeq::Fibonacci;
        let got: Vec<u8> = (0..300).map(|n| seq.letter(n).unwrap()).collect();
        assert_eq!(got, fib_substitution(300));
    }

    #[test]
    fn rational_rotation_orbit_has_q_points() {
        let spec = make_example("rotation", &json!({"alpha": "89/144"})).unwrap();
        let g = OrbitGraph::new(&spec, 10_000);
        let ball = orbit_ball(&g, &spec.origin(), 200).unwrap();
        assert_eq!(ball.points.len(), 144);
        let b3 = orbit_ball(&g, &spec.origin(), 3).unwrap();
        assert_eq!(b3.points.len(), 7);
        let third = CirclePoint::new(Q::new(3 * 89, 144), 0).unwrap();
        assert!(b3.points.contains(&SymbolicPoint::Circle(third)));
    }

    #[test]
    fn lattice_and_tree_balls() {
        let spec = make_example("zd", &json!({"dim": 1})).unwrap();
        let g = OrbitGraph::new(&spec, 10_000);
        for r in 0..10 {
            assert_eq!(orbit_ball(&g, &spec.origin(), r).unwrap().points.len(), 2 * r as usize + 1);
        }
        let spec = make_example("tree", &json!({"degree": 3})).unwrap();
        let g = OrbitGraph::new(&spec, 10_000);
        let ball = orbit_ball(&g, &spec.origin(), 2).unwrap();
        // Brute force: all words of length <= 2 in three involutions.
        let mut brute: HashSet<SymbolicPoint> = HashSet::new();
        for a in 0..4u8 {
            for b in 0..4u8 {
                let mut w: Vec<u8> = Vec::new();
                for c in [a, b] {
                    if c == 3 {
                        continue;
                    }
                    if w.last() == Some(&c) {
                        w.pop();
                    } else {
                        w.push(c);
                    }
                }
                brute.insert(SymbolicPoint::Word(w));
            }
        }
        assert_eq!(ball.points.len(), brute.len());
        assert!(ball.points.iter().all(|p| brute.contains(p)));
        assert_eq!(ball.edges.len(), 2 * 9);
    }

    #[test]
    fn shift_orbit_is_a_line() {
        let spec = make_example("shift", &json!({"word": "fibonacci"})).unwrap();
        let g = OrbitGraph::new(&spec, 10_000);
        let ball = orbit_ball(&g, &SymbolicPoint::Shift(0), 5).unwrap();
        let mut offs: Vec<i64> = ball
            .points
            .iter()
            .map(|p| match p {
                SymbolicPoint::Shift(n) => *n,
                _ => 0,
            })
            .collect();
        offs.sort();
        assert_eq!(offs, (-5..=5).collect::<Vec<_>>());
        let w = word_between(&g, &SymbolicPoint::Shift(0), &SymbolicPoint::Shift(3), 10).unwrap().unwrap();
        assert_eq!(w, vec!["R0", "R1", "R0"]);
        assert_eq!(spec.apply_word(&w, &SymbolicPoint::Shift(0)).unwrap(), Some(SymbolicPoint::Shift(3)));
        let per = make_example("shift", &json!({"period": "011"})).unwrap();
        let g = OrbitGraph::new(&per, 100);
        assert_eq!(orbit_ball(&g, &SymbolicPoint::Shift(7), 10).unwrap().points.len(), 3);
    }

    #[test]
    fn custom_rewrites_and_canonical_words() {
        let rules = json!([
            {"name": "a", "inverse": "A", "from": "0", "to": "10"},
            {"name": "A", "inverse": "a", "from": "10", "to": "0"},
        ]);
        let spec =
            make_example("custom", &json!({"rules": rules, "basepoints": [{"prefix": "", "period": "0"}]})).unwrap();
        let g = OrbitGraph::new(&spec, 1000);
        let x = spec.origin();
        // 0^∞ is fixed by `a` only after cancelling: 0000... -> 10000...
        let y = spec.apply(0, &x).unwrap().unwrap();
        assert_eq!(y, SymbolicPoint::Sequence { prefix: "1".into(), period: "0".into() });
        assert_eq!(distance(&g, &x, &y, 5).unwrap(), Distance::Finite(1));
        assert_eq!(canonical_sequence(b"0101", b"0101").unwrap(), canonical_sequence(b"", b"01").unwrap());
        let bad = json!([{"name": "a", "inverse": "a", "from": "0", "to": "1"}]);
        assert!(make_example("custom", &json!({"rules": bad})).is_err());
        assert!(matches!(make_example("klein", &json!({})), Err(Error::UnsupportedName { .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let spec = make_example("zd", &json!({"dim": 2})).unwrap();
        let g = OrbitGraph::new(&spec, 50);
        assert!(matches!(orbit_ball(&g, &spec.origin(), 10), Err(Error::BudgetExhausted { .. })));
    }
}
