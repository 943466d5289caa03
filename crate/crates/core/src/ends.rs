//! Coarse `μ`-connected components of window complements, the finite-depth
//! tower of escaping components, and end counts read off from it.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::metric::{bfs_from, lambda_bound, Space, Window};
use crate::report::Report;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuComponent<P> {
    pub points: BTreeSet<P>,
    /// Touches the outermost `μ`-shell of the window.
    pub escaping: bool,
}

/// Classes of `Window \ B` under chains with steps of length at most `μ`,
/// sorted by their least point.
pub fn mu_components<S: Space>(
    s: &S,
    w: &Window<S::Point>,
    b: &BTreeSet<S::Point>,
    mu: u64,
) -> Result<Vec<MuComponent<S::Point>>> {
    if mu == 0 {
        return Err(Error::invalid("μ must be positive"));
    }
    if w.horizon < mu {
        return Err(Error::MarginTooSmall { needed: mu, available: w.horizon });
    }
    let shell = w.horizon - mu;
    let mut seen: HashSet<S::Point> = HashSet::new();
    let mut out = Vec::new();
    for start in w.points() {
        if b.contains(start) || seen.contains(start) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start.clone());
        while let Some(p) = queue.pop_front() {
            for q in bfs_from(s, [p.clone()], mu)?.into_keys() {
                if w.contains(&q) && !b.contains(&q) && seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
            comp.insert(p);
        }
        let escaping = comp.iter().any(|p| w.depth(p).unwrap() > shell);
        out.push(MuComponent { points: comp, escaping });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "P: Serialize", deserialize = "P: serde::de::DeserializeOwned"))]
pub struct ForestNode<P> {
    pub level: usize,
    pub id: usize,
    pub size: usize,
    pub escaping: bool,
    pub parent: Option<usize>,
    pub representative: P,
    #[serde(skip)]
    pub points: BTreeSet<P>,
}

/// Escaping `μ`-components of `Window \ B(x0, n)` for `n = 1..=depth`, where
/// `B(x0, n)` is the open ball, linked to the component one level up that
/// contains them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "P: Serialize", deserialize = "P: serde::de::DeserializeOwned"))]
pub struct ComponentForest<P> {
    pub basepoint: P,
    pub mu: u64,
    pub depth: usize,
    pub horizon: u64,
    pub levels: Vec<Vec<ForestNode<P>>>,
}

impl<P: Clone + Ord + std::hash::Hash + Serialize> ComponentForest<P> {
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Index of the component at `level` (1-based) containing `p`.
    pub fn locate(&self, level: usize, p: &P) -> Option<usize> {
        self.levels[level - 1].iter().position(|c| c.points.contains(p))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ends {\n");
        for lvl in &self.levels {
            for c in lvl {
                let _ = writeln!(out, "  \"{}_{}\" [label=\"{}\"];", c.level, c.id, c.size);
                if let Some(p) = c.parent {
                    let _ = writeln!(out, "  \"{}_{}\" -> \"{}_{}\";", c.level - 1, p, c.level, c.id);
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn end_tree<S: Space>(
    s: &S,
    x0: &S::Point,
    mu: u64,
    depth: usize,
    horizon: u64,
) -> Result<ComponentForest<S::Point>> {
    let needed = depth as u64 + 3 * mu;
    if horizon < needed {
        return Err(Error::MarginTooSmall { needed, available: horizon });
    }
    let w = Window::new(s, x0.clone(), horizon)?;
    let per_level: Vec<Result<Vec<MuComponent<S::Point>>>> = (1..=depth)
        .into_par_iter()
        .map(|n| {
            let b: BTreeSet<S::Point> = w.points().iter().filter(|p| w.depth(p).unwrap() < n as u64).cloned().collect();
            Ok(mu_components(s, &w, &b, mu)?.into_iter().filter(|c| c.escaping).collect())
        })
        .collect();
    let mut levels: Vec<Vec<ForestNode<S::Point>>> = Vec::new();
    for (i, comps) in per_level.into_iter().enumerate() {
        let level = i + 1;
        let mut nodes = Vec::new();
        for (id, c) in comps?.into_iter().enumerate() {
            let representative = c.points.first().unwrap().clone();
            let parent = levels.last().and_then(|prev: &Vec<ForestNode<S::Point>>| {
                prev.iter().position(|u| u.points.contains(&representative))
            });
            nodes.push(ForestNode {
                level,
                id,
                size: c.points.len(),
                escaping: true,
                parent,
                representative,
                points: c.points,
            });
        }
        levels.push(nodes);
    }
    Ok(ComponentForest { basepoint: x0.clone(), mu, depth, horizon, levels })
}

/// Checks nesting, that every escaping component comes within `3μ` of the
/// removed ball, and, given a degree bound `K`, that level `n` has at most
/// `Λ_{K, 2(n-1) + 3μ}` components.
pub fn forest_invariants<S: Space>(s: &S, forest: &ComponentForest<S::Point>) -> Result<Report> {
    let w = Window::new(s, forest.basepoint.clone(), forest.horizon)?;
    let mut report = Report::new();
    for (i, lvl) in forest.levels.iter().enumerate() {
        let n = i as u64 + 1;
        let b: Vec<S::Point> = w.points().iter().filter(|p| w.depth(p).unwrap() < n).cloned().collect();
        let near = bfs_from(s, b, 3 * forest.mu)?;
        for c in lvl {
            report.check();
            if !c.points.iter().any(|p| near.contains_key(p)) {
                report.fail("penumbra", json!({"level": n, "id": c.id}));
            }
            if i > 0 {
                let ok = c.parent.is_some_and(|p| c.points.is_subset(&forest.levels[i - 1][p].points));
                if !ok {
                    report.fail("nesting", json!({"level": n, "id": c.id}));
                }
            }
        }
        if let Some(k) = s.degree_bound() {
            report.check();
            let bound = lambda_bound(k as u64, 2 * (n - 1) + 3 * forest.mu);
            if lvl.len() as u64 > bound {
                report.fail("component-count", json!({"level": n, "count": lvl.len(), "bound": bound}));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndClass {
    Zero,
    One,
    Two,
    Finite(usize),
    CantorLike,
    Inconclusive,
}

impl std::fmt::Display for EndClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EndClass::Zero => write!(f, "0"),
            EndClass::One => write!(f, "1"),
            EndClass::Two => write!(f, "2"),
            EndClass::Finite(k) => write!(f, "finite({k})"),
            EndClass::CantorLike => write!(f, "cantor-like"),
            EndClass::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

fn descendants<P>(forest: &ComponentForest<P>, level: usize, id: usize, target: usize) -> usize {
    let mut current: HashSet<usize> = [id].into_iter().collect();
    for l in level + 1..=target {
        current = forest.levels[l - 1]
            .iter()
            .filter(|c| c.parent.is_some_and(|p| current.contains(&p)))
            .map(|c| c.id)
            .collect();
    }
    current.len()
}

pub fn end_classification<P>(forest: &ComponentForest<P>) -> EndClass {
    let d = forest.depth;
    if d < 4 || forest.levels.len() != d {
        return EndClass::Inconclusive;
    }
    let counts: Vec<usize> = forest.levels.iter().map(Vec::len).collect();
    let half = d.div_ceil(2);
    let tail = &counts[d - half..];
    if tail.iter().all(|&c| c == tail[0]) {
        return match tail[0] {
            0 => EndClass::Zero,
            1 => EndClass::One,
            2 => EndClass::Two,
            k => EndClass::Finite(k),
        };
    }
    let increasing = counts.windows(2).all(|w| w[1] > w[0]);
    let splitting = (1..=d - half).all(|l| (0..counts[l - 1]).all(|id| descendants(forest, l, id, l + half) >= 2));
    if increasing && splitting {
        EndClass::CantorLike
    } else {
        EndClass::Inconclusive
    }
}

/// Per level, the index of the target component containing each source
/// component, and whether the assignment commutes with parent links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelMap {
    pub levels: Vec<Vec<usize>>,
    pub contained: bool,
    pub commutes: bool,
    /// Whether each level map is a bijection.
    pub bijective: Vec<bool>,
}

fn level_map<P: Ord + Clone + std::hash::Hash + Serialize>(
    from: &ComponentForest<P>,
    to: &ComponentForest<P>,
    offset: usize,
    levels: usize,
) -> LevelMap {
    let mut out = Vec::new();
    let mut contained = true;
    let mut bijective = Vec::new();
    for n in 1..=levels {
        let src = &from.levels[n + offset - 1];
        let mut row = Vec::new();
        for c in src {
            match to.locate(n, &c.representative) {
                Some(t) => {
                    contained &= c.points.is_subset(&to.levels[n - 1][t].points);
                    row.push(t);
                }
                None => {
                    contained = false;
                    row.push(usize::MAX);
                }
            }
        }
        let hit: BTreeSet<usize> = row.iter().copied().collect();
        bijective.push(hit.len() == row.len() && hit.len() == to.levels[n - 1].len() && !hit.contains(&usize::MAX));
        out.push(row);
    }
    let mut commutes = true;
    for n in 2..=levels {
        for (i, c) in from.levels[n + offset - 1].iter().enumerate() {
            let (Some(p), t) = (c.parent, out[n - 1][i]) else { continue };
            if t == usize::MAX {
                continue;
            }
            commutes &= to.levels[n - 1][t].parent == Some(out[n - 2][p]);
        }
    }
    LevelMap { levels: out, contained, commutes, bijective }
}

/// `θ_{μ,ν}`: each `μ`-component to the `ν`-component containing it.
pub fn theta_map<P: Ord + Clone + std::hash::Hash + Serialize>(
    fine: &ComponentForest<P>,
    coarse: &ComponentForest<P>,
) -> Result<LevelMap> {
    if fine.basepoint != coarse.basepoint || fine.depth != coarse.depth || fine.horizon != coarse.horizon {
        return Err(Error::MismatchedParameters("forests differ in basepoint, depth or horizon".into()));
    }
    if fine.mu > coarse.mu {
        return Err(Error::MismatchedParameters(format!("μ = {} exceeds ν = {}", fine.mu, coarse.mu)));
    }
    Ok(level_map(fine, coarse, 0, fine.depth))
}

/// For a graph: components of the `N`-forest at level `n + ⌈(N-1)/2⌉` sent
/// to the `1`-components at level `n` containing them.
pub fn offset_map<P: Ord + Clone + std::hash::Hash + Serialize>(
    coarse: &ComponentForest<P>,
    fine: &ComponentForest<P>,
) -> Result<LevelMap> {
    if fine.mu != 1 || fine.basepoint != coarse.basepoint || fine.horizon != coarse.horizon {
        return Err(Error::MismatchedParameters("need a 1-forest with the same basepoint and horizon".into()));
    }
    let offset = (coarse.mu as usize).saturating_sub(1).div_ceil(2);
    if coarse.depth <= offset {
        return Err(Error::MismatchedParameters("coarse forest too shallow for the offset".into()));
    }
    let levels = (coarse.depth - offset).min(fine.depth);
    Ok(level_map(coarse, fine, offset, levels))
}

/// Counts of escaping components per level keyed by level, for reports.
pub fn count_table<P: Clone + Ord + std::hash::Hash + Serialize>(f: &ComponentForest<P>) -> BTreeMap<usize, usize> {
    f.counts().into_iter().enumerate().map(|(i, c)| (i + 1, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Graph, Lattice, RegularTree};

    fn set(v: &[i64]) -> BTreeSet<Vec<i64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn components_of_the_punctured_line() {
        let z = Lattice::new(1);
        let w = Window::new(&z, vec![0], 10).unwrap();
        let one = mu_components(&z, &w, &set(&[0]), 1).unwrap();
        assert_eq!(one.len(), 2);
        assert!(one.iter().all(|c| c.escaping && c.points.len() == 10));
        let two = mu_components(&z, &w, &set(&[0]), 2).unwrap();
        assert_eq!(two.len(), 1);
        let z2 = Lattice::new(2);
        let w2 = Window::new(&z2, vec![0, 0], 10).unwrap();
        let b = crate::metric::ball(&z2, &vec![0, 0], 3).unwrap();
        assert_eq!(mu_components(&z2, &w2, &b, 1).unwrap().len(), 1);
    }

    #[test]
    fn line_plane_and_tree_forests() {
        let z = Lattice::new(1);
        let f = end_tree(&z, &vec![0], 1, 10, 14).unwrap();
        assert_eq!(f.counts(), vec![2; 10]);
        assert_eq!(end_classification(&f), EndClass::Two);
        assert!(forest_invariants(&z, &f).unwrap().passed);
        let z2 = Lattice::new(2);
        let f = end_tree(&z2, &vec![0, 0], 1, 8, 12).unwrap();
        assert_eq!(f.counts(), vec![1; 8]);
        assert_eq!(end_classification(&f), EndClass::One);
        let t = RegularTree::new(3);
        let f = end_tree(&t, &vec![], 1, 5, 9).unwrap();
        assert_eq!(f.counts(), (1..=5).map(|n| 3 << (n - 1)).collect::<Vec<_>>());
        assert_eq!(end_classification(&f), EndClass::CantorLike);
        assert!(forest_invariants(&t, &f).unwrap().passed);
        assert!(f.to_dot().contains("\"1_0\" -> \"2_0\""));
    }

    #[test]
    fn finite_graph_has_no_ends() {
        let g = Graph::cycle(9);
        let f = end_tree(&g, &0, 1, 4, 12).unwrap();
        assert_eq!(f.counts(), vec![0; 4]);
        assert_eq!(end_classification(&f), EndClass::Zero);
    }

    #[test]
    fn theta_and_offset_maps() {
        let z = Lattice::new(1);
        let f1 = end_tree(&z, &vec![0], 1, 5, 20).unwrap();
        let f2 = end_tree(&z, &vec![0], 2, 5, 20).unwrap();
        let id = theta_map(&f1, &f1).unwrap();
        assert!(id.levels.iter().all(|l| l.iter().enumerate().all(|(i, &j)| i == j)));
        assert!(matches!(theta_map(&f2, &f1), Err(Error::MismatchedParameters(_))));
        let th = theta_map(&f1, &f2).unwrap();
        assert!(th.contained && th.commutes);
        // Both 1-components at level 1 merge into the single 2-component.
        assert_eq!(th.levels[0], vec![0, 0]);
        assert_eq!(th.bijective, vec![false, true, true, true, true]);
        let t = RegularTree::new(3);
        let t1 = end_tree(&t, &vec![], 1, 4, 14).unwrap();
        let t3 = end_tree(&t, &vec![], 3, 5, 14).unwrap();
        let xi = offset_map(&t3, &t1).unwrap();
        assert_eq!(xi.levels.len(), 4);
        assert!(xi.contained && xi.commutes && xi.bijective.iter().all(|b| *b), "{xi:?}");
    }

    #[test]
    fn shallow_horizon_is_rejected() {
        let z = Lattice::new(1);
        assert!(matches!(end_tree(&z, &vec![0], 2, 5, 8), Err(Error::MarginTooSmall { .. })));
    }
}
