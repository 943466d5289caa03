//! Colored uniformly bounded covers: verification, constructions and the
//! finite-separation profile of the least number of colors.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cqi::{floor_u64, int, Distortion, PartialBijection};
use crate::error::{Error, Result};
use crate::metric::{bfs_from, distances_to, Space, Window};
use crate::report::{witness, Report};

/// Families `V_0..V_n` of sets of diameter at most `D`, members of one
/// family more than `R` apart.
/// Color classes, each a list of member sets.
pub type Families<P> = Vec<Vec<BTreeSet<P>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "P: Serialize", deserialize = "P: Ord + serde::de::DeserializeOwned"))]
pub struct ColoredCover<P> {
    #[serde(rename = "R")]
    pub r: u64,
    #[serde(rename = "D")]
    pub d: u64,
    pub families: Families<P>,
}

impl<P> ColoredCover<P> {
    /// `n` in "`n + 1` families".
    pub fn dimension(&self) -> usize {
        self.families.len().saturating_sub(1)
    }
}

/// Largest diameter accepted from the single-set, annulus and exhaustive
/// constructions at separation `R`, so that a finite window cannot be
/// covered by a few huge pieces. Windows need `2H > 4R + 4` for the cap to
/// bite.
pub fn diameter_cap(r: u64) -> u64 {
    4 * (r + 1)
}

/// Diameter bound of the product constructions in dimension `d`.
fn product_cap(r: u64, d: usize) -> u64 {
    match d {
        1 => 2 * r.max(1),
        2 => 6 * r.max(1),
        d => d as u64 * (r + 1),
    }
}

pub fn verify_cover<S: Space>(s: &S, w: &Window<S::Point>, cover: &ColoredCover<S::Point>) -> Result<Report> {
    verify_cover_on(s, w.points(), cover)
}

/// Checks diameters, separation within each family and coverage of
/// `target`.
pub fn verify_cover_on<S: Space>(s: &S, target: &BTreeSet<S::Point>, cover: &ColoredCover<S::Point>) -> Result<Report> {
    let members: Vec<(usize, usize, &BTreeSet<S::Point>)> = cover
        .families
        .iter()
        .enumerate()
        .flat_map(|(f, fam)| fam.iter().enumerate().map(move |(i, m)| (f, i, m)))
        .collect();
    let owner: Vec<HashMap<&S::Point, usize>> = cover
        .families
        .iter()
        .map(|fam| fam.iter().enumerate().flat_map(|(i, m)| m.iter().map(move |p| (p, i))).collect())
        .collect();
    let rows: Vec<Result<Report>> = members
        .par_iter()
        .map(|&(f, i, m)| {
            let mut r = Report::new();
            let hs: HashSet<S::Point> = m.iter().cloned().collect();
            for x in m {
                r.check();
                let found = distances_to(s, x, &hs, cover.d)?;
                if found.len() < hs.len() {
                    let y = m.iter().find(|y| !found.contains_key(*y)).unwrap();
                    r.fail("diameter", json!({"family": f, "member": i, "x": witness(x), "y": witness(y)}));
                    break;
                }
            }
            r.check();
            for q in bfs_from(s, m.iter().cloned(), cover.r)?.into_keys() {
                if let Some(&j) = owner[f].get(&q) {
                    if j != i {
                        r.fail("separation", json!({"family": f, "members": [i, j], "point": witness(&q)}));
                        break;
                    }
                }
            }
            Ok(r)
        })
        .collect();
    let mut report = Report::new();
    for r in rows {
        report.merge(r?);
    }
    let covered: HashSet<&S::Point> = members.iter().flat_map(|(_, _, m)| m.iter()).collect();
    for p in target {
        report.check();
        if !covered.contains(p) {
            report.fail("coverage", json!({"point": witness(p)}));
        }
    }
    Ok(report)
}

/// Classes of `set` under chains with steps of length at most `r`.
fn r_components<S: Space>(s: &S, set: &BTreeSet<S::Point>, r: u64) -> Result<Vec<BTreeSet<S::Point>>> {
    let mut seen: HashSet<S::Point> = HashSet::new();
    let mut out = Vec::new();
    for start in set {
        if !seen.insert(start.clone()) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(p) = queue.pop_front() {
            for q in bfs_from(s, [p.clone()], r)?.into_keys() {
                if set.contains(&q) && seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
            comp.insert(p);
        }
        out.push(comp);
    }
    Ok(out)
}

fn diameter<S: Space>(s: &S, set: &BTreeSet<S::Point>, cap: u64) -> Result<Option<u64>> {
    let hs: HashSet<S::Point> = set.iter().cloned().collect();
    let mut best = 0;
    for x in set {
        let d = distances_to(s, x, &hs, cap)?;
        if d.len() < hs.len() {
            return Ok(None);
        }
        best = best.max(d.values().copied().max().unwrap_or(0));
    }
    Ok(Some(best))
}

fn group_by<P: Ord + Clone, K: Ord + Clone>(
    points: &BTreeSet<P>,
    key: impl Fn(&P) -> (usize, K),
    colors: usize,
) -> Families<P> {
    let mut fams: Vec<std::collections::BTreeMap<K, BTreeSet<P>>> = vec![Default::default(); colors];
    for p in points {
        let (c, k) = key(p);
        fams[c].entry(k).or_default().insert(p.clone());
    }
    fams.into_iter().map(|m| m.into_values().collect()).collect()
}

/// BFS annuli of width `R + 1` with alternating colors, each cut into its
/// `R`-components.
fn annulus_cover<S: Space>(s: &S, w: &Window<S::Point>, r: u64) -> Result<Families<S::Point>> {
    let width = r + 1;
    let mut rings: Vec<BTreeSet<S::Point>> = Vec::new();
    for p in w.points() {
        let k = (w.depth(p).unwrap() / width) as usize;
        if rings.len() <= k {
            rings.resize(k + 1, BTreeSet::new());
        }
        rings[k].insert(p.clone());
    }
    let mut fams = vec![Vec::new(), Vec::new()];
    for (k, ring) in rings.iter().enumerate() {
        fams[k % 2].extend(r_components(s, ring, r)?);
    }
    Ok(fams)
}

/// Integer cells `floor((x - shift) / side)`.
fn cell(x: i64, shift: i64, side: i64) -> i64 {
    (x - shift).div_euclid(side)
}

fn product_cover<S: Space>(s: &S, w: &Window<S::Point>, r: u64, dim: usize) -> Option<Families<S::Point>> {
    let r = r as i64;
    let coords = |p: &S::Point| s.coordinates(p).unwrap();
    match dim {
        1 => Some(group_by(
            w.points(),
            |p| {
                let i = cell(coords(p)[0], 0, 2 * r.max(1));
                (i.rem_euclid(2) as usize, vec![i])
            },
            2,
        )),
        2 => Some(group_by(
            w.points(),
            |p| {
                let c = coords(p);
                let side = 3 * r.max(1);
                let j = cell(c[1], 0, side);
                let i = cell(c[0], j * r, side);
                ((i + 2 * j).rem_euclid(3) as usize, vec![i, j])
            },
            3,
        )),
        d if d <= 16 => Some(group_by(
            w.points(),
            |p| {
                let idx: Vec<i64> = coords(p).iter().map(|&x| cell(x, 0, r + 1)).collect();
                let color = idx.iter().enumerate().map(|(k, i)| (i.rem_euclid(2) as usize) << k).sum();
                (color, idx)
            },
            1 << d,
        )),
        _ => None,
    }
}

/// Backtracking colouring of a tiny window: points in BFS order, pruning as
/// soon as a colour class has an `R`-component wider than the cap.
fn exhaustive_cover<S: Space>(
    s: &S,
    w: &Window<S::Point>,
    r: u64,
    n: usize,
    cap: u64,
    budget: &mut u64,
) -> Result<Option<Families<S::Point>>> {
    let order = w.bfs_order();
    let mut classes: Vec<BTreeSet<S::Point>> = vec![BTreeSet::new(); n + 1];
    fn go<S: Space>(
        s: &S,
        order: &[S::Point],
        i: usize,
        classes: &mut Vec<BTreeSet<S::Point>>,
        r: u64,
        cap: u64,
        budget: &mut u64,
    ) -> Result<bool> {
        if i == order.len() {
            return Ok(true);
        }
        for c in 0..classes.len() {
            if *budget == 0 {
                return Err(Error::BudgetExhausted { explored: 0 });
            }
            *budget -= 1;
            classes[c].insert(order[i].clone());
            let comp = r_components(s, &classes[c], r)?.into_iter().find(|k| k.contains(&order[i])).unwrap();
            if diameter(s, &comp, cap)?.is_some() && go(s, order, i + 1, classes, r, cap, budget)? {
                return Ok(true);
            }
            classes[c].remove(&order[i]);
            if classes[c].is_empty() {
                // Colours are interchangeable; an empty class behaves like any other.
                break;
            }
        }
        Ok(false)
    }
    if go(s, &order, 0, &mut classes, r, cap, budget)? {
        let mut fams = Vec::new();
        for c in &classes {
            fams.push(r_components(s, c, r)?);
        }
        Ok(Some(fams))
    } else {
        Ok(None)
    }
}

/// Windows up to this size may be covered by exhaustive search.
pub const EXHAUSTIVE_LIMIT: usize = 64;

fn finish<S: Space>(
    s: &S,
    w: &Window<S::Point>,
    r: u64,
    cap: u64,
    families: Families<S::Point>,
) -> Result<Option<ColoredCover<S::Point>>> {
    let mut d = 0;
    for m in families.iter().flatten() {
        match diameter(s, m, cap)? {
            Some(x) => d = d.max(x),
            None => return Ok(None),
        }
    }
    let cover = ColoredCover { r, d, families };
    Ok(verify_cover(s, w, &cover)?.passed.then_some(cover))
}

/// Tries, in order of increasing `n <= n_target`: one set, annuli or
/// intervals, layer-shifted bricks and parity cubes for products, and
/// exhaustive search on windows of at most 64 points. Every candidate is
/// verified before it is returned.
pub fn slab_cover<S: Space>(
    s: &S,
    x0: &S::Point,
    r: u64,
    n_target: usize,
    horizon: u64,
    budget: u64,
) -> Result<ColoredCover<S::Point>> {
    let w = Window::new(s, x0.clone(), horizon)?;
    let mut budget = budget;
    let dim = s.product_dim();
    for n in 0..=n_target {
        let mut candidates: Vec<(u64, Families<S::Point>)> = Vec::new();
        let cap = diameter_cap(r);
        match (n, dim) {
            (0, _) => candidates.push((cap, vec![vec![w.points().clone()]])),
            (1, Some(1)) | (2, Some(2)) => {
                let d = dim.unwrap();
                candidates.extend(product_cover(s, &w, r, d).map(|f| (product_cap(r, d), f)))
            }
            (1, _) => candidates.push((cap, annulus_cover(s, &w, r)?)),
            (n, Some(d)) if d >= 3 && n + 1 == 1 << d => {
                candidates.extend(product_cover(s, &w, r, d).map(|f| (product_cap(r, d), f)))
            }
            _ => {}
        }
        for (cap, fams) in candidates {
            if let Some(c) = finish(s, &w, r, cap, fams)? {
                return Ok(c);
            }
        }
        if w.len() <= EXHAUSTIVE_LIMIT && n <= 3 {
            if let Some(fams) = exhaustive_cover(s, &w, r, n, diameter_cap(r), &mut budget)? {
                if let Some(c) = finish(s, &w, r, diameter_cap(r), fams)? {
                    return Ok(c);
                }
            }
        }
    }
    Err(Error::ConstructionFailed(format!("no verified cover with at most {} colours at R = {r}", n_target + 1)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileEntry {
    #[serde(rename = "R")]
    pub r: u64,
    /// Least `n` achieved, or `None` if every construction failed.
    pub n: Option<usize>,
    pub budget_exhausted: bool,
}

pub fn asdim_profile<S: Space>(
    s: &S,
    x0: &S::Point,
    r_list: &[u64],
    horizon: u64,
    budget: u64,
) -> Result<Vec<ProfileEntry>> {
    let n_max = match s.product_dim() {
        Some(d) if d >= 2 => (1usize << d.min(16)) - 1,
        _ => 3,
    };
    let mut out = Vec::new();
    for &r in r_list {
        let entry = match slab_cover(s, x0, r, n_max, horizon, budget) {
            Ok(c) => ProfileEntry { r, n: Some(c.dimension()), budget_exhausted: false },
            Err(Error::ConstructionFailed(_)) => ProfileEntry { r, n: None, budget_exhausted: false },
            Err(Error::BudgetExhausted { .. }) => ProfileEntry { r, n: None, budget_exhausted: true },
            Err(e) => return Err(e),
        };
        out.push(entry);
    }
    Ok(out)
}

/// Pushes a cover through a `(K, C)` coarse quasi-isometry: each member `V`
/// becomes `Pen(f(V ∩ dom f), K)`, with `D ↦ CD + 2CK` and
/// `R ↦ floor(R / C) - 2K`.
pub fn push_cover<P, Q, T: Space<Point = Q>>(
    t: &T,
    f: &PartialBijection<P, Q>,
    d: Distortion,
    cover: &ColoredCover<P>,
) -> Result<ColoredCover<Q>>
where
    P: Ord + Clone + std::fmt::Debug,
    Q: Ord + Clone + std::fmt::Debug + std::hash::Hash,
{
    let k = floor_u64(d.k);
    let r_new = floor_u64(int(cover.r) / d.c).checked_sub(2 * k).filter(|&r| r > 0);
    let r_new = r_new.ok_or_else(|| Error::invalid("separation does not survive the push"))?;
    let d_new = floor_u64(d.c * int(cover.d) + d.c * d.k * 2);
    let mut families = Vec::new();
    for fam in &cover.families {
        let mut out = Vec::new();
        for m in fam {
            let image: Vec<Q> = m.iter().filter_map(|p| f.get(p).cloned()).collect();
            if image.is_empty() {
                continue;
            }
            out.push(bfs_from(t, image, k)?.into_keys().collect());
        }
        families.push(out);
    }
    Ok(ColoredCover { r: r_new, d: d_new, families })
}
