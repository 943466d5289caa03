//! Finite-resolution samples of limit sets: the cells of an `ε`-grid that
//! every window of a sequence of orbit windows meets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{orbit_ball, sequence_letter, OrbitGraph, PseudogroupSpec, SymbolicPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub center: SymbolicPoint,
    pub radius: u64,
}

/// Grid cell at level `k`, i.e. resolution `ε = 2^-k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cell {
    /// `[index / 2^k, (index + 1) / 2^k)` on the circle.
    Dyadic(i64),
    /// Letters at relative positions `-k..k` of a shift point.
    Pattern(String),
    /// First `k` letters of a word.
    Prefix(String),
    /// Lattice sites with every coordinate in `[-2^k, 2^k]`.
    Site(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSample {
    pub level: u32,
    pub cells_per_window: Vec<usize>,
    pub cells: Vec<Cell>,
}

/// Largest usable level; finer grids overflow the exact arithmetic.
pub const MAX_LEVEL: u32 = 40;

pub fn cell_of(spec: &PseudogroupSpec, p: &SymbolicPoint, k: u32) -> Result<Option<Cell>> {
    if k > MAX_LEVEL {
        return Err(Error::ResolutionUnreachable { level: k });
    }
    Ok(Some(match p {
        SymbolicPoint::Circle(c) => Cell::Dyadic(c.dyadic_cell(k)?),
        SymbolicPoint::Shift(_) => {
            let k = k as i64;
            let mut s = String::new();
            for i in -k..k {
                s.push(spec.shift_letter(p, i)? as char);
            }
            Cell::Pattern(s)
        }
        SymbolicPoint::Sequence { prefix, period } => Cell::Prefix(
            (0..k as usize).map(|i| sequence_letter(prefix.as_bytes(), period.as_bytes(), i) as char).collect(),
        ),
        SymbolicPoint::Word(w) => Cell::Prefix(w.iter().take(k as usize).map(|&a| (b'0' + a) as char).collect()),
        SymbolicPoint::Lattice(v) => {
            let bound = 1i64 << k;
            if v.iter().any(|x| x.abs() > bound) {
                return Ok(None);
            }
            Cell::Site(v.clone())
        }
    }))
}

/// Cells met by every window: an over-approximation, at resolution
/// `2^-level`, of the limit set along the window sequence.
pub fn limit_set_sample(graph: &OrbitGraph, windows: &[WindowSpec], level: u32) -> Result<LimitSample> {
    if windows.is_empty() {
        return Err(Error::invalid("no windows"));
    }
    let mut common: Option<BTreeSet<Cell>> = None;
    let mut counts = Vec::new();
    for w in windows {
        let ball = orbit_ball(graph, &w.center, w.radius)?;
        let mut cells = BTreeSet::new();
        for p in &ball.points {
            if let Some(c) = cell_of(graph.spec, p, level)? {
                cells.insert(c);
            }
        }
        counts.push(cells.len());
        common = Some(match common {
            None => cells,
            Some(c) => c.intersection(&cells).cloned().collect(),
        });
    }
    Ok(LimitSample { level, cells_per_window: counts, cells: common.unwrap().into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudogroup::{make_example, CirclePoint};
    use serde_json::json;

    fn circle(spec: &PseudogroupSpec, k: i64) -> SymbolicPoint {
        let crate::pseudogroup::Ambient::Rotation { alpha } = &spec.ambient else { panic!() };
        SymbolicPoint::Circle(CirclePoint::new(alpha.r * k, alpha.b * k).unwrap())
    }

    #[test]
    fn golden_rotation_fills_every_cell() {
        let spec = make_example("rotation", &json!({"alpha": "golden"})).unwrap();
        let g = OrbitGraph::new(&spec, 1_000_000);
        let windows: Vec<WindowSpec> =
            [1000, 5000, 20000].iter().map(|&k| WindowSpec { center: circle(&spec, k), radius: 150 }).collect();
        let s = limit_set_sample(&g, &windows, 6).unwrap();
        assert_eq!(s.cells.len(), 64);
        assert!(matches!(limit_set_sample(&g, &windows, 41), Err(Error::ResolutionUnreachable { level: 41 })));
    }

    #[test]
    fn escaping_lattice_windows_leave_the_grid() {
        let spec = make_example("zd", &json!({"dim": 1})).unwrap();
        let g = OrbitGraph::new(&spec, 1_000_000);
        let windows: Vec<WindowSpec> = [100, 200, 400]
            .iter()
            .map(|&k| WindowSpec { center: SymbolicPoint::Lattice(vec![k]), radius: 10 })
            .collect();
        assert!(limit_set_sample(&g, &windows, 4).unwrap().cells.is_empty());
    }

    #[test]
    fn eventually_periodic_tail_sees_its_cycle() {
        let spec = make_example("shift", &json!({"left": "0", "mid": "1", "right": "011"})).unwrap();
        let g = OrbitGraph::new(&spec, 1_000_000);
        let windows: Vec<WindowSpec> =
            [1000, 2000, 3000].iter().map(|&k| WindowSpec { center: SymbolicPoint::Shift(k), radius: 10 }).collect();
        let s = limit_set_sample(&g, &windows, 2).unwrap();
        let brute: BTreeSet<String> = (0..3).map(|i| (0..4).map(|j| b"011"[(i + j) % 3] as char).collect()).collect();
        let got: BTreeSet<String> = s
            .cells
            .iter()
            .map(|c| match c {
                Cell::Pattern(p) => p.clone(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn balls_around_nearby_points_shadow_the_ball() {
        // Fibonacci multiples of the golden rotation converge to 0.
        let spec = make_example("rotation", &json!({"alpha": "golden"})).unwrap();
        let g = OrbitGraph::new(&spec, 1_000_000);
        let r = 6;
        let ball = orbit_ball(&g, &spec.origin(), r).unwrap();
        let eps = 1.0 / 64.0;
        let near = |a: f64, b: f64| {
            let d = (a - b).abs();
            d.min(1.0 - d) < eps
        };
        let (mut f0, mut f1) = (1i64, 2i64);
        for _ in 0..12 {
            (f0, f1) = (f1, f0 + f1);
            if f1 < 100 {
                continue;
            }
            let xi = circle(&spec, f1);
            let bi = orbit_ball(&g, &xi, r).unwrap();
            for p in &ball.points {
                let SymbolicPoint::Circle(p) = p else { panic!() };
                assert!(bi.points.iter().any(|q| match q {
                    SymbolicPoint::Circle(q) => near(p.to_f64(), q.to_f64()),
                    _ => false,
                }));
            }
        }
    }
}
