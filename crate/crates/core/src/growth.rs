//! Growth functions, domination witnesses, exponent estimates and growth
//! classes.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::metric::{ball, distance_to_set, spheres, Space, Window};
use crate::report::{witness, Report};

/// Closed-ball counts `v(x, r)` for `r = 1..=r_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub basepoint: serde_json::Value,
    pub counts: Vec<u64>,
}

impl GrowthSample {
    /// Wraps raw counts, `counts[0]` being `v(1)`.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() || counts[0] == 0 || counts.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("counts must be positive and nondecreasing"));
        }
        Ok(GrowthSample { basepoint: serde_json::Value::Null, counts })
    }

    pub fn r_max(&self) -> u64 {
        self.counts.len() as u64
    }

    /// `v(r)` for `1 <= r <= r_max`.
    pub fn v(&self, r: u64) -> u64 {
        self.counts[r as usize - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, c));
        }
        out
    }
}

pub fn growth_function<S: Space>(s: &S, x: &S::Point, r_max: u64) -> Result<GrowthSample> {
    let layers = spheres(s, x, r_max)?;
    let mut counts = Vec::with_capacity(r_max as usize);
    let mut total = 1;
    for r in 1..=r_max as usize {
        total += layers.get(r).map_or(0, Vec::len) as u64;
        counts.push(total);
    }
    Ok(GrowthSample { basepoint: witness(x), counts })
}

/// Counts `|Γ ∩ B̄(x, r)|` for `r = 1..=r_max`.
pub fn lattice_growth<S: Space>(s: &S, x: &S::Point, gamma: &BTreeSet<S::Point>, r_max: u64) -> Result<Vec<u64>> {
    let layers = spheres(s, x, r_max)?;
    let mut total = u64::from(gamma.contains(x));
    let mut out = Vec::new();
    for r in 1..=r_max as usize {
        total += layers.get(r).map_or(0, |l| l.iter().filter(|p| gamma.contains(p)).count()) as u64;
        out.push(total);
    }
    Ok(out)
}

/// `u(r) <= a v(b r)` for every sampled `r >= c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominationWitness {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl DominationWitness {
    /// Witness for `u ≼ w` from witnesses for `u ≼ v` and `v ≼ w`.
    pub fn compose(self, next: DominationWitness) -> DominationWitness {
        DominationWitness { a: self.a * next.a, b: self.b * next.b, c: self.c.max(next.c.div_ceil(self.b)) }
    }

    pub fn holds(&self, u: &GrowthSample, v: &GrowthSample) -> bool {
        (self.c.max(1)..=u.r_max()).all(|r| self.b * r <= v.r_max() && u.v(r) <= self.a * v.v(self.b * r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

/// Least witness within the caps, searching `b` first, then `c`, then `a`.
/// Only scales `b` with `b · r_max(u) <= r_max(v)` can be checked.
pub fn check_domination(u: &GrowthSample, v: &GrowthSample, caps: Caps) -> Result<Option<DominationWitness>> {
    if v.r_max() < u.r_max() {
        return Err(Error::InsufficientRange(format!(
            "dominating sample reaches r = {}, need {}",
            v.r_max(),
            u.r_max()
        )));
    }
    for b in (1..=caps.b).take_while(|b| b * u.r_max() <= v.r_max()) {
        for c in 1..=caps.c.min(u.r_max()) {
            let a = (c..=u.r_max()).map(|r| u.v(r).div_ceil(v.v(b * r))).max().unwrap_or(1).max(1);
            if a <= caps.a {
                return Ok(Some(DominationWitness { a, b, c }));
            }
        }
    }
    Ok(None)
}

/// Finite-horizon surrogates for the four limits of `log v / log r` and
/// `log v / r`, from least-squares slopes over sliding windows of the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub tail_start: u64,
    pub tail_end: u64,
    pub poly_fit: f64,
    pub poly_sup: f64,
    pub poly_inf: f64,
    pub exp_fit: f64,
    pub exp_sup: f64,
    pub exp_inf: f64,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn window_slopes(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let m = (xs.len().div_ceil(2)).max(3).min(xs.len());
    let local: Vec<f64> = (0..=xs.len() - m).map(|i| slope(&xs[i..i + m], &ys[i..i + m])).collect();
    let sup = local.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let inf = local.iter().cloned().fold(f64::INFINITY, f64::min);
    (slope(xs, ys), sup, inf)
}

pub fn growth_exponents(sample: &GrowthSample, tail_fraction: f64) -> Result<ExponentReport> {
    let r_max = sample.r_max();
    if r_max < 8 {
        return Err(Error::InsufficientRange(format!("need r_max >= 8, got {r_max}")));
    }
    if !(0.0..=1.0).contains(&tail_fraction) || tail_fraction == 0.0 {
        return Err(Error::invalid("tail fraction must lie in (0, 1]"));
    }
    let start = ((r_max as f64) * (1.0 - tail_fraction)).floor().max(1.0) as u64;
    let start = start.min(r_max - 2);
    let rs: Vec<f64> = (start..=r_max).map(|r| r as f64).collect();
    let logr: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let logv: Vec<f64> = (start..=r_max).map(|r| (sample.v(r) as f64).ln()).collect();
    let (poly_fit, poly_sup, poly_inf) = window_slopes(&logr, &logv);
    let (exp_fit, exp_sup, exp_inf) = window_slopes(&rs, &logv);
    Ok(ExponentReport { tail_start: start, tail_end: r_max, poly_fit, poly_sup, poly_inf, exp_fit, exp_sup, exp_inf })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "class", content = "degree")]
pub enum GrowthClass {
    Polynomial(u32),
    Exponential,
    QuasiPolynomial,
    QuasiExponential,
    PseudoQuasiPolynomial,
    Inconclusive,
}

/// Thresholds the exponent estimates at tolerance `tol`. Exponential-type
/// labels need a semi-log slope of at least `3 tol`.
pub fn classify_growth(sample: &GrowthSample, tol: f64) -> Result<GrowthClass> {
    let e = growth_exponents(sample, 0.5)?;
    let tail = &sample.counts[e.tail_start as usize - 1..];
    if tail.iter().all(|&c| c == tail[0]) {
        return Ok(GrowthClass::Polynomial(0));
    }
    let exp_stable = e.exp_sup - e.exp_inf <= tol;
    let poly_stable = e.poly_sup - e.poly_inf <= tol;
    Ok(if exp_stable && e.exp_inf >= 3.0 * tol {
        GrowthClass::Exponential
    } else if poly_stable {
        let d = e.poly_fit.round();
        if (e.poly_fit - d).abs() <= tol {
            GrowthClass::Polynomial(d as u32)
        } else {
            GrowthClass::Polynomial((e.poly_fit - tol).ceil().max(0.0) as u32)
        }
    } else if e.exp_sup < tol {
        GrowthClass::QuasiPolynomial
    } else if e.exp_sup >= 3.0 * tol && e.poly_inf < 3.0 * tol {
        GrowthClass::PseudoQuasiPolynomial
    } else if e.exp_sup >= 3.0 * tol {
        GrowthClass::QuasiExponential
    } else {
        GrowthClass::Inconclusive
    })
}

/// `Γ` is an `R`-net with `|Γ ∩ B̄(x, r)| <= Q_r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiLatticeProfile {
    pub r: u64,
    pub q: Vec<u64>,
}

/// Net radius measured over the inner half of the window, and the largest
/// `|Γ ∩ B̄(x, r)|` over points whose `r`-ball fits in the window. A net
/// radius of a quarter of the horizon or more is not accepted.
pub fn quasi_lattice_profile<S: Space>(
    s: &S,
    w: &Window<S::Point>,
    gamma: &BTreeSet<S::Point>,
    r_max: u64,
) -> Result<QuasiLatticeProfile> {
    if gamma.iter().any(|g| !w.contains(g)) {
        return Err(Error::invalid("lattice points must lie in the window"));
    }
    if r_max > w.horizon {
        return Err(Error::MarginTooSmall { needed: r_max, available: w.horizon });
    }
    let set: HashSet<S::Point> = gamma.iter().cloned().collect();
    let mut radius = 0;
    for x in w.points().iter().filter(|x| w.depth(x).unwrap() <= w.horizon / 2) {
        match distance_to_set(s, x, &set, w.horizon)? {
            Some((d, _)) => radius = radius.max(d),
            None => return Err(Error::NotANet(format!("{x:?} has no lattice point within the horizon"))),
        }
    }
    if 4 * radius >= w.horizon.max(1) && radius > 0 {
        return Err(Error::NotANet(format!("net radius {radius} is not small against horizon {}", w.horizon)));
    }
    let mut q = Vec::new();
    for r in 0..=r_max {
        let mut best = 0;
        for x in w.interior(r) {
            best = best.max(ball(s, x, r)?.iter().filter(|p| set.contains(p)).count() as u64);
        }
        q.push(best);
    }
    Ok(QuasiLatticeProfile { r: radius, q })
}

/// Checks `v_{Γ1}(x1, r) <= Q¹_{R2} v_{Γ2}(x2, r + δ + R2)` wherever both
/// balls fit in the window.
pub fn compare_quasi_lattices<S: Space>(
    s: &S,
    w: &Window<S::Point>,
    g1: (&BTreeSet<S::Point>, &QuasiLatticeProfile),
    g2: (&BTreeSet<S::Point>, &QuasiLatticeProfile),
    x1: &S::Point,
    x2: &S::Point,
) -> Result<Report> {
    let delta = crate::metric::distance(s, x1, x2, 2 * w.horizon)?
        .finite()
        .ok_or_else(|| Error::invalid("basepoints are not connected"))?;
    let r2 = g2.1.r;
    let factor = *g1.1.q.get(r2 as usize).ok_or_else(|| Error::InsufficientRange("Q table too short".into()))?;
    let (d1, d2) = (w.depth(x1).unwrap_or(u64::MAX), w.depth(x2).unwrap_or(u64::MAX));
    let mut report = Report::new();
    let mut r = 1;
    while d1.saturating_add(r) <= w.horizon && d2.saturating_add(r + delta + r2) <= w.horizon {
        report.check();
        let lhs = *lattice_growth(s, x1, g1.0, r)?.last().unwrap();
        let rhs = *lattice_growth(s, x2, g2.0, r + delta + r2)?.last().unwrap();
        if lhs > factor * rhs {
            report.fail("lattice-comparison", json!({"r": r, "lhs": lhs, "rhs": rhs, "factor": factor}));
        }
        r += 1;
    }
    Ok(report)
}

/// Constants `(p, q)` with `v_{Γ'}(x', r) <= p v_Γ(x, C r + q)` under a
/// `(K, C)` coarse quasi-isometry, for an `(R, Q)` quasi-lattice `Γ`,
/// `δ = d(x, dom f)`-type offsets `delta` and `delta_p`.
pub fn cqi_growth_constants(k: u64, c: u64, r: u64, q: &[u64], delta: u64, delta_p: u64) -> Option<(u64, u64)> {
    let p = *q.get((c * r + 2 * c * k + k) as usize)?;
    let qq = c * (c * delta + 4 * c * k + 2 * k + delta_p + c * r) + 2 * c * k + 2 * k;
    Some((p, qq))
}
