//! Reeb-type neighbourhoods `V(x, r)` and the ball maps
//! `φ_{x,y,r}: g(x) ↦ g(y)`.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;
use serde_json::json;

use super::{
    canonical_sequence, orbit_ball, sequence_letter, Action, Ambient, OrbitBall, OrbitGraph, Region, SymbolicPoint, Q,
};
use crate::error::{Error, Result};
use crate::metric::distances_to;
use crate::report::{witness, Report};

/// Descriptor of `V(x, r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Neighborhood {
    Everything,
    Arc {
        lo: Q,
        hi: Q,
    },
    /// Letters at relative positions `start..start + len` are fixed.
    Cylinder {
        start: i64,
        pattern: String,
    },
    Prefix {
        prefix: String,
    },
}

impl Neighborhood {
    fn region(&self) -> Region {
        match self.clone() {
            Neighborhood::Everything => Region::Everything,
            Neighborhood::Arc { lo, hi } => Region::Arc { lo, hi },
            Neighborhood::Cylinder { start, pattern } => Region::Cylinder { start, pattern },
            Neighborhood::Prefix { prefix } => Region::Prefix { prefix },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReebNeighborhood {
    pub center: SymbolicPoint,
    pub radius: u64,
    pub neighborhood: Neighborhood,
    pub ball: OrbitBall,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiMap {
    pub x: SymbolicPoint,
    pub y: SymbolicPoint,
    pub radius: u64,
    pub map: Vec<(SymbolicPoint, SymbolicPoint)>,
    pub non_expanding: bool,
    pub isometric: bool,
    /// The image is all of `B̄_E(y, r)`.
    pub onto: bool,
    pub report: Report,
}

/// Depth of the prefix of `x` read by any generator word of length at most
/// `4r`; fails if some such word fixes `x` without fixing every word that
/// shares that prefix.
fn custom_depth(graph: &OrbitGraph, x: &SymbolicPoint, r: u64) -> Result<usize> {
    let SymbolicPoint::Sequence { prefix, period } = x else {
        return Err(Error::invalid("custom examples act on one-sided words"));
    };
    let (u, v) = (prefix.as_bytes(), period.as_bytes());
    let letter = |i: usize| sequence_letter(u, v, i);
    // State: the current word is `t` followed by `x` from position `d` on.
    type State = (Vec<u8>, usize);
    let mut seen: HashSet<State> = HashSet::from([(Vec::new(), 0)]);
    let mut queue: VecDeque<(State, Vec<usize>)> = VecDeque::from([((Vec::new(), 0), Vec::new())]);
    let mut depth = 0;
    while let Some(((t, d), word)) = queue.pop_front() {
        depth = depth.max(d);
        if word.len() as u64 == 4 * r {
            continue;
        }
        for (g, gen) in graph.spec.generators.iter().enumerate() {
            let Action::Rewrite { from, to } = &gen.action else { continue };
            let (mut t2, mut d2) = (t.clone(), d);
            while t2.len() < from.len() {
                t2.push(letter(d2));
                d2 += 1;
            }
            if !t2.starts_with(from) {
                continue;
            }
            let t3: Vec<u8> = to.iter().chain(&t2[from.len()..]).copied().collect();
            let mut w = word.clone();
            w.push(g);
            if canonical_at(&t3, u, v, d2)? == *x && t3 != (0..d2).map(letter).collect::<Vec<_>>() {
                let names = w.iter().map(|&g| graph.spec.generators[g].name.clone()).collect();
                return Err(Error::HolonomyObstruction { word: names });
            }
            if seen.len() > 1_000_000 {
                return Err(Error::BudgetExhausted { explored: seen.len() as u64 });
            }
            if seen.insert((t3.clone(), d2)) {
                queue.push_back(((t3, d2), w));
            }
        }
    }
    Ok(depth)
}

/// Canonical form of `t` followed by the word `u v v ...` from position `d`.
fn canonical_at(t: &[u8], u: &[u8], v: &[u8], d: usize) -> Result<SymbolicPoint> {
    let (rest_prefix, period): (Vec<u8>, Vec<u8>) = if d <= u.len() {
        (u[d..].to_vec(), v.to_vec())
    } else {
        let mut p = v.to_vec();
        p.rotate_left((d - u.len()) % v.len());
        (Vec::new(), p)
    };
    let word: Vec<u8> = t.iter().chain(&rest_prefix).copied().collect();
    canonical_sequence(&word, &period)
}

pub fn reeb_neighborhood(graph: &OrbitGraph, x: &SymbolicPoint, r: u64) -> Result<ReebNeighborhood> {
    let ball = orbit_ball(graph, x, r)?;
    let x = ball.center.clone();
    let neighborhood = match &graph.spec.ambient {
        Ambient::Lattice { .. } | Ambient::Tree { .. } => Neighborhood::Everything,
        Ambient::Rotation { .. } => Neighborhood::Arc { lo: Q::from_integer(0), hi: Q::from_integer(1) },
        Ambient::Shift { .. } => {
            let r = r as i64;
            let mut pattern = String::new();
            for i in -2 * r..2 * r {
                pattern.push(graph.spec.shift_letter(&x, i)? as char);
            }
            Neighborhood::Cylinder { start: -2 * r, pattern }
        }
        Ambient::Custom => {
            let d = custom_depth(graph, &x, r)?;
            let SymbolicPoint::Sequence { prefix, period } = &x else { unreachable!() };
            let p: String = (0..d).map(|i| sequence_letter(prefix.as_bytes(), period.as_bytes(), i) as char).collect();
            Neighborhood::Prefix { prefix: p }
        }
    };
    Ok(ReebNeighborhood { center: x, radius: r, neighborhood, ball })
}

impl ReebNeighborhood {
    pub fn contains(&self, graph: &OrbitGraph, y: &SymbolicPoint) -> Result<bool> {
        self.neighborhood.region().contains(graph.spec, y)
    }

    fn loop_word(&self, graph: &OrbitGraph, i: usize, g: usize, j: usize) -> Vec<String> {
        let spec = graph.spec;
        let mut w: Vec<String> = self.ball.words[i].iter().map(|&h| spec.generators[h].name.clone()).collect();
        w.push(spec.generators[g].name.clone());
        w.extend(self.ball.words[j].iter().rev().map(|&h| spec.generators[h].inverse.clone()));
        w
    }

    /// `φ_{x,y,r}`, checked for well-definedness on every edge of the ball,
    /// then for non-expansion on every pair.
    pub fn phi(&self, graph: &OrbitGraph, y: &SymbolicPoint) -> Result<PhiMap> {
        let spec = graph.spec;
        let y = spec.canonicalize(y.clone())?;
        if !self.contains(graph, &y)? {
            return Err(Error::invalid(format!("{y:?} lies outside V(x, {})", self.radius)));
        }
        let mut image = Vec::with_capacity(self.ball.points.len());
        for (i, w) in self.ball.words.iter().enumerate() {
            let mut cur = y.clone();
            for &g in w {
                cur = spec.apply(g, &cur)?.ok_or_else(|| Error::HolonomyObstruction {
                    word: self.ball.words[i].iter().map(|&h| spec.generators[h].name.clone()).collect(),
                })?;
            }
            image.push(cur);
        }
        for (i, name, j) in &self.ball.edges {
            let g = spec.generator(name)?;
            if spec.apply(g, &image[*i])?.as_ref() != Some(&image[*j]) {
                return Err(Error::HolonomyObstruction { word: self.loop_word(graph, *i, g, *j) });
            }
        }
        let mut report = Report::new();
        let mut isometric = true;
        let cap = 2 * self.radius;
        let targets: HashSet<SymbolicPoint> = self.ball.points.iter().cloned().collect();
        let image_targets: HashSet<SymbolicPoint> = image.iter().cloned().collect();
        for (i, z) in self.ball.points.iter().enumerate() {
            let dx = distances_to(graph, z, &targets, cap)?;
            let dy = distances_to(graph, &image[i], &image_targets, cap)?;
            for (j, w) in self.ball.points.iter().enumerate().skip(i + 1) {
                report.check();
                let a = dx[w];
                let b = dy.get(&image[j]).copied().unwrap_or(u64::MAX);
                if b > a {
                    report.fail(
                        "non-expanding",
                        json!({"z": witness(z), "w": witness(w), "d_x": a, "phi_z": witness(&image[i]), "phi_w": witness(&image[j])}),
                    );
                }
                isometric &= a == b;
            }
        }
        let target: BTreeSet<SymbolicPoint> = orbit_ball(graph, &y, self.radius)?.points.into_iter().collect();
        let onto = image.iter().cloned().collect::<BTreeSet<_>>() == target;
        Ok(PhiMap {
            x: self.center.clone(),
            y,
            radius: self.radius,
            map: self.ball.points.iter().cloned().zip(image).collect(),
            non_expanding: report.passed,
            isometric,
            onto,
            report,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudogroup::make_example;
    use serde_json::json;
    use std::collections::BTreeMap;

    fn same_cylinder(spec: &crate::pseudogroup::PseudogroupSpec, r: i64, x: i64) -> Vec<i64> {
        let pat = |n: i64| {
            (-2 * r..2 * r).map(|i| spec.shift_letter(&SymbolicPoint::Shift(n), i).unwrap()).collect::<Vec<_>>()
        };
        (1..2000).filter(|&n| pat(n + x) == pat(x)).map(|n| n + x).take(3).collect()
    }

    #[test]
    fn fibonacci_cylinder_and_isometric_maps() {
        let spec = make_example("shift", &json!({"word": "fibonacci"})).unwrap();
        let g = OrbitGraph::new(&spec, 100_000);
        let reeb = reeb_neighborhood(&g, &SymbolicPoint::Shift(0), 3).unwrap();
        let Neighborhood::Cylinder { start, pattern } = &reeb.neighborhood else { panic!() };
        assert_eq!((*start, pattern.len()), (-6, 12));
        for y in same_cylinder(&spec, 3, 0) {
            let phi = reeb.phi(&g, &SymbolicPoint::Shift(y)).unwrap();
            assert!(phi.non_expanding && phi.isometric && phi.onto);
            assert!(phi.map.iter().all(|(a, b)| match (a, b) {
                (SymbolicPoint::Shift(m), SymbolicPoint::Shift(n)) => n - m == y,
                _ => false,
            }));
        }
        assert!(reeb.phi(&g, &SymbolicPoint::Shift(1)).is_err());
    }

    #[test]
    fn reeb_maps_compose() {
        let spec = make_example("shift", &json!({"word": "fibonacci"})).unwrap();
        let g = OrbitGraph::new(&spec, 100_000);
        let ys = same_cylinder(&spec, 2, 0);
        let (x, y, z) = (SymbolicPoint::Shift(0), SymbolicPoint::Shift(ys[0]), SymbolicPoint::Shift(ys[1]));
        let at = |p: &SymbolicPoint| reeb_neighborhood(&g, p, 2).unwrap();
        let xz: BTreeMap<_, _> = at(&x).phi(&g, &z).unwrap().map.into_iter().collect();
        let xy: BTreeMap<_, _> = at(&x).phi(&g, &y).unwrap().map.into_iter().collect();
        let yz: BTreeMap<_, _> = at(&y).phi(&g, &z).unwrap().map.into_iter().collect();
        for (p, q) in &xz {
            assert_eq!(yz[&xy[p]], *q);
        }
    }

    #[test]
    fn free_actions_translate() {
        let spec = make_example("zd", &json!({"dim": 2})).unwrap();
        let g = OrbitGraph::new(&spec, 100_000);
        let reeb = reeb_neighborhood(&g, &SymbolicPoint::Lattice(vec![0, 0]), 4).unwrap();
        assert_eq!(reeb.neighborhood, Neighborhood::Everything);
        let phi = reeb.phi(&g, &SymbolicPoint::Lattice(vec![7, -3])).unwrap();
        assert!(phi.isometric && phi.onto);
        for (a, b) in &phi.map {
            let (SymbolicPoint::Lattice(a), SymbolicPoint::Lattice(b)) = (a, b) else { panic!() };
            assert_eq!((b[0] - a[0], b[1] - a[1]), (7, -3));
        }
        let spec = make_example("rotation", &json!({"alpha": "89/144"})).unwrap();
        let g = OrbitGraph::new(&spec, 100_000);
        let reeb = reeb_neighborhood(&g, &spec.origin(), 10).unwrap();
        let y = spec.parse_point(&json!("1/7")).unwrap();
        let phi = reeb.phi(&g, &y).unwrap();
        assert!(phi.non_expanding && phi.onto);
    }

    #[test]
    fn fixed_point_that_does_not_transfer() {
        let rules = json!([
            {"name": "t", "inverse": "T", "from": "0", "to": "00"},
            {"name": "T", "inverse": "t", "from": "00", "to": "0"},
        ]);
        let spec = make_example("custom", &json!({"rules": rules})).unwrap();
        let g = OrbitGraph::new(&spec, 10_000);
        let err = reeb_neighborhood(&g, &spec.origin(), 1).unwrap_err();
        assert_eq!(err, Error::HolonomyObstruction { word: vec!["t".into()] });
        let rules = json!([
            {"name": "a", "inverse": "A", "from": "0", "to": "10"},
            {"name": "A", "inverse": "a", "from": "10", "to": "0"},
        ]);
        let spec =
            make_example("custom", &json!({"rules": rules, "basepoints": [{"prefix": "0", "period": "1"}]})).unwrap();
        let g = OrbitGraph::new(&spec, 10_000);
        let reeb = reeb_neighborhood(&g, &spec.origin(), 2).unwrap();
        assert!(matches!(&reeb.neighborhood, Neighborhood::Prefix { prefix } if prefix.starts_with('0')));
    }
}
