//! Doubling a pseudogroup into a group of involutions on two copies of the
//! space, and the comparison of the two orbit metrics.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{OrbitGraph, PseudogroupSpec, SymbolicPoint};
use crate::error::Result;
use crate::metric::{ball, distances_to, Space, SpaceKind};
use crate::report::{witness, Report};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DoubledPoint {
    pub point: SymbolicPoint,
    pub layer: u8,
}

/// `W = Z × {0, 1}` with one involution `g_h` per generator `h` (including
/// the identity): `(z, 0) ↦ (h z, 1)` on `dom h`, `(z, 1) ↦ (h⁻¹ z, 0)` on
/// `im h`, fixed elsewhere.
pub struct DoubledGraph<'a> {
    pub spec: &'a PseudogroupSpec,
}

impl DoubledGraph<'_> {
    pub fn apply(&self, h: usize, p: &DoubledPoint) -> Result<DoubledPoint> {
        let (g, layer) = if p.layer == 0 { (h, 1) } else { (self.spec.inverse_of(h), 0) };
        Ok(match self.spec.apply(g, &p.point)? {
            Some(q) => DoubledPoint { point: q, layer },
            None => p.clone(),
        })
    }

    pub fn generator_names(&self) -> Vec<String> {
        self.spec.generators.iter().map(|g| format!("g_{}", g.name)).collect()
    }
}

impl Space for DoubledGraph<'_> {
    type Point = DoubledPoint;

    fn neighbors(&self, p: &DoubledPoint) -> Result<Vec<DoubledPoint>> {
        let mut out = Vec::new();
        for h in 0..self.spec.generators.len() {
            let q = self.apply(h, p)?;
            if q != *p {
                out.push(q);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::LazyOrbit
    }

    fn origin(&self) -> DoubledPoint {
        DoubledPoint { point: self.spec.origin(), layer: 0 }
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.spec.generators.len())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DoubleReport {
    pub generators: Vec<String>,
    pub window_radius: u64,
    pub window_size: usize,
    /// The window is a whole doubled orbit.
    pub closed: bool,
    pub pairs: usize,
    /// Largest `d_F - d_E` and `d_E - d_F` seen.
    pub max_excess_f: i64,
    pub max_excess_e: i64,
    pub report: Report,
}

/// Builds `F = {g_h}` from `E ∪ {id}` and compares `d_F` with `d_E` on
/// every pair of the window `B̄_F((x0, 0), radius)`, expecting
/// `d_E <= d_F + 1` and `d_F <= d_E + 1`. Each `g_h` is also checked to be
/// an involution on the window.
pub fn group_double(spec: &PseudogroupSpec, x0: &SymbolicPoint, radius: u64, budget: usize) -> Result<DoubleReport> {
    let full = spec.with_identity();
    let doubled = DoubledGraph { spec: &full };
    let base = OrbitGraph::new(spec, budget);
    let x0 = DoubledPoint { point: spec.canonicalize(x0.clone())?, layer: 0 };
    let window: Vec<DoubledPoint> = ball(&doubled, &x0, radius)?.into_iter().collect();
    let closed = ball(&doubled, &x0, radius + 1)?.len() == window.len();
    let mut report = Report::new();
    for p in &window {
        for h in 0..full.generators.len() {
            report.check();
            let back = doubled.apply(h, &doubled.apply(h, p)?)?;
            if back != *p {
                report.fail("involution", json!({"generator": full.generators[h].name, "point": witness(p)}));
            }
        }
    }
    let cap = 2 * radius + 2;
    let targets_f: HashSet<DoubledPoint> = window.iter().cloned().collect();
    let targets_e: HashSet<SymbolicPoint> = window.iter().map(|p| p.point.clone()).collect();
    let (mut ef, mut ee, mut pairs) = (i64::MIN, i64::MIN, 0);
    for p in &window {
        let df = distances_to(&doubled, p, &targets_f, cap)?;
        let de = distances_to(&base, &p.point, &targets_e, cap)?;
        for q in &window {
            pairs += 1;
            report.check();
            let (f, e) = (df.get(q), de.get(&q.point));
            match (f, e) {
                (Some(&f), Some(&e)) => {
                    let (f, e) = (f as i64, e as i64);
                    ef = ef.max(f - e);
                    ee = ee.max(e - f);
                    if e > f + 1 || f > e + 1 {
                        report.fail("metric-comparison", json!({"p": witness(p), "q": witness(q), "d_F": f, "d_E": e}));
                    }
                }
                _ => report.fail("metric-comparison", json!({"p": witness(p), "q": witness(q), "d_F": f, "d_E": e})),
            }
        }
    }
    Ok(DoubleReport {
        generators: doubled.generator_names(),
        window_radius: radius,
        window_size: window.len(),
        closed,
        pairs,
        max_excess_f: ef,
        max_excess_e: ee,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudogroup::make_example;
    use serde_json::json;

    #[test]
    fn line_doubles_to_a_ladder() {
        let spec = make_example("zd", &json!({"dim": 1})).unwrap();
        let rep = group_double(&spec, &spec.origin(), 15, 100_000).unwrap();
        assert!(rep.report.passed, "{:?}", rep.report.first_violation());
        assert_eq!(rep.generators, vec!["g_id", "g_+e1", "g_-e1"]);
        assert!(rep.max_excess_f <= 1 && rep.max_excess_e <= 0);
        let full = spec.with_identity();
        let d = DoubledGraph { spec: &full };
        // Ladder: every vertex has the rung and two rails.
        let p = DoubledPoint { point: SymbolicPoint::Lattice(vec![3]), layer: 1 };
        assert_eq!(d.neighbors(&p).unwrap().len(), 3);
    }

    #[test]
    fn rational_rotation_doubles_to_2q_points() {
        let spec = make_example("rotation", &json!({"alpha": "5/12"})).unwrap();
        let rep = group_double(&spec, &spec.origin(), 15, 100_000).unwrap();
        assert!(rep.report.passed);
        assert!(rep.closed);
        assert_eq!(rep.window_size, 24);
    }

    #[test]
    fn identity_alone_gives_two_point_orbits() {
        let rules = json!([{"name": "i", "inverse": "i", "from": "0", "to": "0"}]);
        let spec = make_example("custom", &json!({"rules": rules})).unwrap();
        let rep = group_double(&spec, &spec.origin(), 5, 1000).unwrap();
        assert_eq!(rep.window_size, 2);
        assert!(rep.report.passed);
    }
}
