//! The golden rotation with a Borel set `A` of small measure that still
//! swallows whole orbit balls: `A = ⋃ₙ ⋃_{|i| ≤ n} hⁱ(Iₙ)` with `Iₙ` of
//! length `1 / ((2n + 1) 2^{n+1})`.

use serde::Serialize;
use serde_json::json;

use super::{make_example, orbit_ball, CirclePoint, OrbitGraph, SymbolicPoint, Q};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct DemoRow {
    pub n: u64,
    pub arc: (Q, Q),
    /// `x = k α` is the first orbit point of 0 found in `Iₙ`.
    pub k: i64,
    pub x: SymbolicPoint,
    pub ball_size: usize,
    /// `B̄_E(x, n) ⊆ A`, so no point of the complement is within `n` of `x`.
    pub ball_in_a: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub alpha: String,
    pub rows: Vec<DemoRow>,
    /// Upper bound for the length of the part of `A` built from `n <= n_max`.
    pub measure_bound: Q,
    /// Every row witnessed the failure of the `n`-net test for the complement.
    pub complement_fails_net: bool,
}

fn arc(n: u64) -> (Q, Q) {
    let lo = Q::new(1, 3);
    (lo, lo + Q::new(1, (2 * n as i64 + 1) << (n + 1)))
}

fn in_a(alpha: &CirclePoint, y: &CirclePoint, n_max: u64) -> Result<bool> {
    for m in 1..=n_max {
        let (lo, hi) = arc(m);
        for i in -(m as i64)..=m as i64 {
            let back = CirclePoint::new(y.r - alpha.r * i, y.b - alpha.b * i)?;
            if back.in_arc(lo, hi)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Runs the construction for `n = 1..=n_max`, scanning the orbit of 0 in
/// the order `0, 1, -1, 2, -2, ...` up to `|k| <= scan`.
pub fn demo_rotation(n_max: u64, scan: i64) -> Result<DemoReport> {
    if n_max == 0 || n_max > 20 {
        return Err(Error::invalid("n_max must lie in 1..=20"));
    }
    let spec = make_example("rotation", &json!({"alpha": "golden"}))?;
    let super::Ambient::Rotation { alpha } = &spec.ambient else { unreachable!() };
    let graph = OrbitGraph::new(&spec, 10 * scan as usize + 1000);
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let (lo, hi) = arc(n);
        let mut found = None;
        for j in 0..=2 * scan {
            let k = if j % 2 == 1 { (j + 1) / 2 } else { -(j / 2) };
            let x = CirclePoint::new(alpha.r * k, alpha.b * k)?;
            if x.in_arc(lo, hi)? {
                found = Some((k, x));
                break;
            }
        }
        let (k, x) = found.ok_or(Error::BudgetExhausted { explored: scan as u64 })?;
        let ball = orbit_ball(&graph, &SymbolicPoint::Circle(x.clone()), n)?;
        let mut inside = true;
        for p in &ball.points {
            let SymbolicPoint::Circle(c) = p else { unreachable!() };
            inside &= in_a(alpha, c, n_max)?;
        }
        rows.push(DemoRow {
            n,
            arc: (lo, hi),
            k,
            x: SymbolicPoint::Circle(x),
            ball_size: ball.points.len(),
            ball_in_a: inside,
        });
    }
    let measure_bound = (1..=n_max).map(|n| Q::new(1, 1 << (n + 1))).sum();
    let complement_fails_net = rows.iter().all(|r| r.ball_in_a);
    Ok(DemoReport { alpha: "golden".into(), rows, measure_bound, complement_fails_net })
}
