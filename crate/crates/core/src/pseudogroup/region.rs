//! Decidable subsets of the ambient spaces and the recurrence radius of a
//! generating set relative to one of them.

use serde::Serialize;
use serde_json::Value;

use super::{orbit_ball, parse_rational, OrbitGraph, PseudogroupSpec, SymbolicPoint, Q};
use crate::error::{Error, Result};
use crate::metric::bfs_from;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Region {
    Everything,
    /// Half-open arc `[lo, hi)` of the circle, wrapping when `lo > hi`.
    Arc {
        lo: Q,
        hi: Q,
    },
    /// Shift points whose letters at `start, start + 1, ...` spell `pattern`.
    Cylinder {
        start: i64,
        pattern: String,
    },
    /// One-sided words, or tree words written as digit strings, starting with
    /// `prefix`.
    Prefix {
        prefix: String,
    },
    /// Lattice points congruent to `residue` modulo `modulus`, coordinatewise.
    Sublattice {
        modulus: Vec<i64>,
        residue: Vec<i64>,
    },
    Points {
        points: Vec<SymbolicPoint>,
    },
    Complement {
        of: Box<Region>,
    },
    Union {
        of: Vec<Region>,
    },
}

impl Region {
    /// Reads the serialized form, with arc ends also accepted as `"p/q"`.
    pub fn parse(spec: &PseudogroupSpec, v: &Value) -> Result<Region> {
        let ty = v.get("type").and_then(Value::as_str).ok_or_else(|| Error::invalid("region needs a type"))?;
        let field = |k: &str| v.get(k).ok_or_else(|| Error::invalid(format!("region field {k} missing")));
        let rational = |k: &str| -> Result<Q> {
            let f = field(k)?;
            match f.as_array() {
                Some(a) if a.len() == 2 => {
                    let n = a[0].as_i64().zip(a[1].as_i64()).filter(|(_, d)| *d != 0);
                    n.map(|(n, d)| Q::new(n, d)).ok_or_else(|| Error::invalid("bad rational"))
                }
                _ => parse_rational(f),
            }
        };
        let string = |k: &str| -> Result<String> {
            field(k)?.as_str().map(str::to_string).ok_or_else(|| Error::invalid(format!("{k} must be a string")))
        };
        let ints = |k: &str| -> Result<Vec<i64>> {
            let a = field(k)?.as_array().ok_or_else(|| Error::invalid(format!("{k} must be an array")))?;
            a.iter().map(|x| x.as_i64().ok_or_else(|| Error::invalid("expected integers"))).collect()
        };
        Ok(match ty {
            "everything" => Region::Everything,
            "arc" => Region::Arc { lo: rational("lo")?, hi: rational("hi")? },
            "cylinder" => Region::Cylinder {
                start: field("start")?.as_i64().ok_or_else(|| Error::invalid("start must be an integer"))?,
                pattern: string("pattern")?,
            },
            "prefix" => Region::Prefix { prefix: string("prefix")? },
            "sublattice" => {
                let (modulus, residue) = (ints("modulus")?, ints("residue")?);
                if modulus.len() != residue.len() || modulus.iter().any(|&m| m <= 0) {
                    return Err(Error::invalid("sublattice needs positive moduli matching residues"));
                }
                Region::Sublattice { modulus, residue }
            }
            "points" => Region::Points {
                points: field("points")?
                    .as_array()
                    .ok_or_else(|| Error::invalid("points must be an array"))?
                    .iter()
                    .map(|p| spec.parse_point(p))
                    .collect::<Result<_>>()?,
            },
            "complement" => Region::Complement { of: Box::new(Region::parse(spec, field("of")?)?) },
            "union" => Region::Union {
                of: field("of")?
                    .as_array()
                    .ok_or_else(|| Error::invalid("union needs an array"))?
                    .iter()
                    .map(|r| Region::parse(spec, r))
                    .collect::<Result<_>>()?,
            },
            other => return Err(Error::invalid(format!("unknown region type {other}"))),
        })
    }

    pub fn contains(&self, spec: &PseudogroupSpec, p: &SymbolicPoint) -> Result<bool> {
        use SymbolicPoint as P;
        let mismatch = || Error::invalid(format!("region {self:?} cannot test {p:?}"));
        Ok(match (self, p) {
            (Region::Everything, _) => true,
            (Region::Arc { lo, hi }, P::Circle(c)) => c.in_arc(*lo, *hi)?,
            (Region::Cylinder { start, pattern }, P::Shift(_)) => {
                let mut ok = true;
                for (i, c) in pattern.bytes().enumerate() {
                    ok &= spec.shift_letter(p, start + i as i64)? == c;
                }
                ok
            }
            (Region::Prefix { prefix }, P::Sequence { prefix: u, period: v }) => {
                let (u, v) = (u.as_bytes(), v.as_bytes());
                prefix.bytes().enumerate().all(|(i, c)| super::sequence_letter(u, v, i) == c)
            }
            (Region::Prefix { prefix }, P::Word(w)) => {
                let want: Vec<u8> = prefix.bytes().map(|c| c.wrapping_sub(b'0')).collect();
                w.starts_with(&want)
            }
            (Region::Sublattice { modulus, residue }, P::Lattice(x)) if x.len() == modulus.len() => {
                x.iter().zip(modulus).zip(residue).all(|((x, m), r)| (x - r).rem_euclid(*m) == 0)
            }
            (Region::Points { points }, p) => points.contains(p),
            (Region::Complement { of }, p) => !of.contains(spec, p)?,
            (Region::Union { of }, p) => {
                let mut any = false;
                for r in of {
                    any |= r.contains(spec, p)?;
                }
                any
            }
            _ => return Err(mismatch()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recurrence {
    /// Least `R` that works for every sampled basepoint, if any.
    pub radius: Option<u64>,
    /// Recurrence quantifies over all orbits; only the given basepoints were
    /// examined.
    pub sampled: bool,
    pub per_basepoint: Vec<Option<u64>>,
    /// A point of some window with no region point within `H / 2`.
    pub witness: Option<SymbolicPoint>,
    pub points_checked: usize,
}

/// Every point of `B̄_E(x0, H)` must reach the region within `H / 2`; the
/// recurrence radius is the largest such distance. Points farther than
/// `H / 2` from the region count as a failure, since a window of radius
/// `H` cannot tell them from a point that never reaches it.
pub fn recurrence_radius(
    graph: &OrbitGraph,
    region: &Region,
    basepoints: &[SymbolicPoint],
    horizon: u64,
) -> Result<Recurrence> {
    let reach = horizon / 2;
    let mut out =
        Recurrence { radius: Some(0), sampled: true, per_basepoint: Vec::new(), witness: None, points_checked: 0 };
    for x0 in basepoints {
        let outer = orbit_ball(graph, x0, horizon + reach)?;
        let mut sources = Vec::new();
        for p in &outer.points {
            if region.contains(graph.spec, p)? {
                sources.push(p.clone());
            }
        }
        let dist = bfs_from(graph, sources, reach)?;
        let mut worst = Some(0);
        for (p, &d) in outer.points.iter().zip(&outer.depth) {
            if d > horizon {
                continue;
            }
            out.points_checked += 1;
            match dist.get(p) {
                Some(&e) => worst = worst.map(|w: u64| w.max(e)),
                None => {
                    worst = None;
                    out.witness.get_or_insert_with(|| p.clone());
                    break;
                }
            }
        }
        out.per_basepoint.push(worst);
        out.radius = out.radius.zip(worst).map(|(a, b)| a.max(b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudogroup::make_example;
    use serde_json::json;

    #[test]
    fn recurrence_on_lattices() {
        let spec = make_example("zd", &json!({"dim": 1})).unwrap();
        let g = OrbitGraph::new(&spec, 100_000);
        let evens = Region::parse(&spec, &json!({"type": "sublattice", "modulus": [2], "residue": [0]})).unwrap();
        assert_eq!(recurrence_radius(&g, &evens, &spec.basepoints, 40).unwrap().radius, Some(1));
        let zero = Region::Points { points: vec![SymbolicPoint::Lattice(vec![0])] };
        for h in [4, 10, 30] {
            let rec = recurrence_radius(&g, &zero, &spec.basepoints, h).unwrap();
            assert_eq!(rec.radius, None);
            assert!(rec.witness.is_some());
        }
    }

    #[test]
    fn recurrence_on_the_circle_matches_gap_oracle() {
        let spec = make_example("rotation", &json!({"alpha": "89/144"})).unwrap();
        let g = OrbitGraph::new(&spec, 100_000);
        let arc = Region::parse(&spec, &json!({"type": "arc", "lo": "0", "hi": "1/10"})).unwrap();
        let rec = recurrence_radius(&g, &arc, &spec.basepoints, 200).unwrap();
        // Orbit index k sits at 89k/144 mod 1; distance along the cycle.
        let hits: Vec<i64> = (0..144).filter(|k| (89 * k) % 144 * 10 < 144).collect();
        let oracle = (0..144i64)
            .map(|k| hits.iter().map(|h| ((k - h).rem_euclid(144)).min((h - k).rem_euclid(144))).min().unwrap())
            .max()
            .unwrap();
        assert_eq!(rec.radius, Some(oracle as u64));
    }

    #[test]
    fn regions_compose() {
        let spec = make_example("shift", &json!({"word": "fibonacci"})).unwrap();
        let cyl = Region::Cylinder { start: 0, pattern: "01".into() };
        assert!(cyl.contains(&spec, &SymbolicPoint::Shift(0)).unwrap());
        assert!(!cyl.contains(&spec, &SymbolicPoint::Shift(1)).unwrap());
        let not = Region::Complement { of: Box::new(cyl.clone()) };
        assert!(not.contains(&spec, &SymbolicPoint::Shift(1)).unwrap());
        let u = Region::Union { of: vec![cyl, not] };
        assert!(u.contains(&spec, &SymbolicPoint::Shift(5)).unwrap());
        assert!(Region::Arc { lo: Q::new(0, 1), hi: Q::new(1, 2) }.contains(&spec, &SymbolicPoint::Shift(0)).is_err());
    }
}
