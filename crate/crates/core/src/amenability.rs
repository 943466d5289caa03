//! Isoperimetric ratios, Følner certificates and exhaustive search for the
//! isoperimetric infimum.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cqi::Rational;
use crate::error::{Error, Result};
use crate::metric::{ball, lambda_bound, penumbra, r_boundary, Space};
use crate::report::Report;

/// `|∂_r S| / |S|`.
pub fn iso_ratio<S: Space>(s: &S, set: &BTreeSet<S::Point>, r: u64) -> Result<Rational> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let b = r_boundary(s, set, r)?.len() as i64;
    Ok(Rational::new(b, set.len() as i64))
}

/// `(n, r, |∂_r S_n|, |S_n|)` with `n` counted from 1.
pub type RatioEntry = [u64; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "P: Serialize", deserialize = "P: Ord + serde::de::DeserializeOwned"))]
pub struct FolnerCertificate<P> {
    pub sets: Vec<BTreeSet<P>>,
    pub ratios: Vec<RatioEntry>,
    #[serde(default)]
    pub exhausted: bool,
    #[serde(default)]
    pub non_vanishing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_n: u64,
    pub max_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Balls,
    Shaved,
}

/// Removes, one at a time, the non-locked vertex whose removal lowers the
/// 1-ratio most, while that strictly improves it.
fn shave<S: Space>(s: &S, set: &mut BTreeSet<S::Point>, locked: &BTreeSet<S::Point>) -> Result<()> {
    let mut current = iso_ratio(s, set, 1)?;
    loop {
        let mut best: Option<(Rational, S::Point)> = None;
        for v in set.iter().filter(|v| !locked.contains(*v)) {
            let mut t = set.clone();
            t.remove(v);
            if t.is_empty() {
                continue;
            }
            let q = iso_ratio(s, &t, 1)?;
            if best.as_ref().is_none_or(|(b, _)| q < *b) {
                best = Some((q, v.clone()));
            }
        }
        match best {
            Some((q, v)) if q < current => {
                set.remove(&v);
                current = q;
            }
            _ => return Ok(()),
        }
    }
}

/// Balls `B̄(x, n)` for `n = 1..=max_n`, stopping early (and flagging the
/// certificate) once a ball would exceed `max_size` points.
pub fn folner_search<S: Space>(
    s: &S,
    x: &S::Point,
    budget: SearchBudget,
    r_list: &[u64],
    strategy: Strategy,
) -> Result<FolnerCertificate<S::Point>> {
    let mut sets: Vec<BTreeSet<S::Point>> = Vec::new();
    let mut exhausted = false;
    for n in 1..=budget.max_n {
        let mut b = ball(s, x, n)?;
        if b.len() > budget.max_size {
            exhausted = true;
            break;
        }
        if strategy == Strategy::Shaved {
            let locked = sets.last().cloned().unwrap_or_else(|| [x.clone()].into_iter().collect());
            shave(s, &mut b, &locked)?;
        }
        sets.push(b);
    }
    let mut ratios = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        for &r in r_list {
            let b = r_boundary(s, set, r)?.len() as u64;
            ratios.push([i as u64 + 1, r, b, set.len() as u64]);
        }
    }
    let first_r = r_list.first().copied();
    let track: Vec<Rational> =
        ratios.iter().filter(|e| Some(e[1]) == first_r).map(|e| Rational::new(e[2] as i64, e[3] as i64)).collect();
    let non_vanishing = track.len() >= 2 && track[track.len() - 1] * 2 >= track[0];
    Ok(FolnerCertificate { sets, ratios, exhausted, non_vanishing })
}

/// `n ↦ ε_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `ε_n = a / n`.
    Harmonic(Rational),
    /// `ε_n` listed for `n = 1, 2, ...`; later sets use the last entry.
    Explicit(Vec<Rational>),
}

impl Schedule {
    pub fn epsilon(&self, n: u64) -> Rational {
        match self {
            Schedule::Harmonic(a) => *a / Rational::from_integer(n as i64),
            Schedule::Explicit(v) => v[(n as usize - 1).min(v.len() - 1)],
        }
    }
}

/// `∂_r S` recomputed as `Pen(∂_1 S, r - 1)`, a different route from the one
/// used to build certificates.
fn boundary_via_penumbra<S: Space>(s: &S, set: &BTreeSet<S::Point>, r: u64) -> Result<BTreeSet<S::Point>> {
    if r == 0 {
        return Ok(BTreeSet::new());
    }
    let inside: HashSet<&S::Point> = set.iter().collect();
    let mut b1 = BTreeSet::new();
    for p in set {
        let ns = s.neighbors(p)?;
        let outside: Vec<_> = ns.into_iter().filter(|q| !inside.contains(q)).collect();
        if !outside.is_empty() {
            b1.insert(p.clone());
            b1.extend(outside);
        }
    }
    penumbra(s, &b1, r - 1)
}

pub fn verify_folner<S: Space>(
    s: &S,
    cert: &FolnerCertificate<S::Point>,
    r_list: &[u64],
    schedule: &Schedule,
) -> Result<Report> {
    let mut report = Report::new();
    if let Schedule::Explicit(v) = schedule {
        if v.is_empty() {
            return Err(Error::invalid("empty schedule"));
        }
    }
    for (i, pair) in cert.sets.windows(2).enumerate() {
        report.check();
        if !pair[0].is_subset(&pair[1]) {
            report.fail("nested", json!({"n": i + 1}));
        }
    }
    for (i, set) in cert.sets.iter().enumerate() {
        let n = i as u64 + 1;
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let b1 = boundary_via_penumbra(s, set, 1)?.len() as u64;
        for &r in r_list {
            report.check();
            let br = boundary_via_penumbra(s, set, r)?.len() as u64;
            let q = Rational::new(br as i64, set.len() as i64);
            if let Some(e) = cert.ratios.iter().find(|e| e[0] == n && e[1] == r) {
                if e[2] != br || e[3] != set.len() as u64 {
                    report.fail("stored-ratio", json!({"n": n, "r": r, "stored": e, "recomputed": [br, set.len()]}));
                }
            }
            if q > schedule.epsilon(n) {
                report.fail(
                    "schedule",
                    json!({"n": n, "r": r, "ratio": [br, set.len()], "epsilon": schedule.epsilon(n)}),
                );
            }
            if let Some(k) = s.degree_bound() {
                if r >= 1 && br > lambda_bound(k as u64, r - 1).saturating_mul(b1) {
                    report.fail("lambda-boundary", json!({"n": n, "r": r}));
                }
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "P: Serialize"))]
pub struct IsoInfimum<P> {
    pub best_set: BTreeSet<P>,
    pub best_ratio: Rational,
    pub sets_searched: u64,
    pub exhaustive: bool,
}

struct Enumerator<'a, S: Space> {
    s: &'a S,
    max_size: usize,
    budget: u64,
    searched: u64,
    best: Option<(Rational, BTreeSet<S::Point>)>,
}

impl<S: Space> Enumerator<'_, S> {
    /// Each connected set through the root is reached once: choosing the
    /// `i`-th frontier vertex excludes the earlier ones for the whole branch.
    fn grow(
        &mut self,
        current: &mut BTreeSet<S::Point>,
        frontier: Vec<S::Point>,
        excluded: &mut HashSet<S::Point>,
    ) -> Result<bool> {
        if self.searched >= self.budget {
            return Ok(false);
        }
        self.searched += 1;
        let q = iso_ratio(self.s, current, 1)?;
        if self.best.as_ref().is_none_or(|(b, _)| q < *b) {
            self.best = Some((q, current.clone()));
        }
        if current.len() == self.max_size {
            return Ok(true);
        }
        let mut added = Vec::new();
        for (i, v) in frontier.iter().enumerate() {
            let mut next: Vec<S::Point> = frontier[i + 1..].to_vec();
            let known: HashSet<&S::Point> = frontier.iter().collect();
            for w in self.s.neighbors(v)? {
                if !current.contains(&w) && !excluded.contains(&w) && !known.contains(&w) && !next.contains(&w) {
                    next.push(w);
                }
            }
            current.insert(v.clone());
            let done = self.grow(current, next, excluded)?;
            current.remove(v);
            excluded.insert(v.clone());
            added.push(v.clone());
            if !done {
                for a in added {
                    excluded.remove(&a);
                }
                return Ok(false);
            }
        }
        for a in added {
            excluded.remove(&a);
        }
        Ok(true)
    }
}

/// Least `|∂_1 S| / |S|` over connected `S ∋ x` with `|S| <= max_size`,
/// visiting at most `budget` sets.
pub fn iso_infimum<S: Space>(s: &S, x: &S::Point, max_size: usize, budget: u64) -> Result<IsoInfimum<S::Point>> {
    if max_size == 0 {
        return Err(Error::invalid("max_size must be positive"));
    }
    let mut e = Enumerator { s, max_size, budget, searched: 0, best: None };
    let mut current: BTreeSet<S::Point> = [x.clone()].into_iter().collect();
    let frontier = s.neighbors(x)?;
    let exhaustive = e.grow(&mut current, frontier, &mut HashSet::new())?;
    let (best_ratio, best_set) = e.best.ok_or(Error::BudgetExhausted { explored: 0 })?;
    Ok(IsoInfimum { best_set, best_ratio, sets_searched: e.searched, exhaustive })
}
