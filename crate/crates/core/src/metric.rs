//! Graph metrics seen through a neighbour oracle.
//!
//! Every space here is the vertex set of a connected-or-not graph with the
//! path metric. Distances are exact: they come from breadth-first search in
//! the full space, never from a truncated copy of it.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    ExplicitGraph,
    LazyOrbit,
    Product,
}

pub trait Space: Sync {
    type Point: Clone + Ord + Hash + Debug + Send + Sync + Serialize + DeserializeOwned;

    /// Neighbours of `p`, sorted and without `p` itself.
    fn neighbors(&self, p: &Self::Point) -> Result<Vec<Self::Point>>;

    fn kind(&self) -> SpaceKind;

    fn origin(&self) -> Self::Point;

    fn degree_bound(&self) -> Option<usize> {
        None
    }

    /// Integer coordinates for spaces that are products of lines.
    fn coordinates(&self, _p: &Self::Point) -> Option<Vec<i64>> {
        None
    }

    fn product_dim(&self) -> Option<usize> {
        None
    }

    /// Largest radius a lazily built space is prepared to explore.
    fn horizon(&self) -> Option<u64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Finite(u64),
    Infinite,
}

impl Distance {
    pub fn finite(self) -> Option<u64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn le(self, r: u64) -> bool {
        matches!(self, Distance::Finite(d) if d <= r)
    }
}

fn check_radius<S: Space>(space: &S, r: u64) -> Result<()> {
    match space.horizon() {
        Some(h) if r > h => Err(Error::HorizonExceeded { what: format!("radius {r} beyond horizon {h}") }),
        _ => Ok(()),
    }
}

/// Multi-source BFS up to `radius`; returns the distance to the source set.
pub fn bfs_from<S: Space>(
    space: &S,
    sources: impl IntoIterator<Item = S::Point>,
    radius: u64,
) -> Result<HashMap<S::Point, u64>> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    for s in sources {
        if !dist.contains_key(&s) {
            dist.insert(s.clone(), 0);
            queue.push_back(s);
        }
    }
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        if d == radius {
            continue;
        }
        for q in space.neighbors(&p)? {
            if !dist.contains_key(&q) {
                dist.insert(q.clone(), d + 1);
                queue.push_back(q);
            }
        }
    }
    Ok(dist)
}

/// BFS layers `[S_0, S_1, ...]` around `x` up to `radius`.
pub fn spheres<S: Space>(space: &S, x: &S::Point, radius: u64) -> Result<Vec<Vec<S::Point>>> {
    check_radius(space, radius)?;
    spheres_unchecked(space, x, radius)
}

/// Distances from `x` to each point of `targets`, searching no further than
/// `cap`. Targets not reached are absent from the result.
pub fn distances_to<S: Space>(
    space: &S,
    x: &S::Point,
    targets: &HashSet<S::Point>,
    cap: u64,
) -> Result<HashMap<S::Point, u64>> {
    let mut found = HashMap::new();
    let mut dist: HashMap<S::Point, u64> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(x.clone(), 0);
    queue.push_back(x.clone());
    if targets.contains(x) {
        found.insert(x.clone(), 0);
    }
    while let Some(p) = queue.pop_front() {
        if found.len() == targets.len() {
            break;
        }
        let d = dist[&p];
        if d == cap {
            continue;
        }
        for q in space.neighbors(&p)? {
            if !dist.contains_key(&q) {
                if targets.contains(&q) {
                    found.insert(q.clone(), d + 1);
                }
                dist.insert(q.clone(), d + 1);
                queue.push_back(q);
            }
        }
    }
    Ok(found)
}

/// Exact distance, searching up to `cap`; beyond the cap the answer is
/// reported as infinite.
pub fn distance<S: Space>(space: &S, x: &S::Point, y: &S::Point, cap: u64) -> Result<Distance> {
    let targets: HashSet<_> = std::iter::once(y.clone()).collect();
    Ok(distances_to(space, x, &targets, cap)?.get(y).map_or(Distance::Infinite, |&d| Distance::Finite(d)))
}

/// Distance from `x` to the nearest point of `set`, if one lies within `cap`.
pub fn distance_to_set<S: Space>(
    space: &S,
    x: &S::Point,
    set: &HashSet<S::Point>,
    cap: u64,
) -> Result<Option<(u64, S::Point)>> {
    if set.contains(x) {
        return Ok(Some((0, x.clone())));
    }
    for (d, layer) in spheres_unchecked(space, x, cap)?.into_iter().enumerate() {
        if let Some(p) = layer.into_iter().find(|p| set.contains(p)) {
            return Ok(Some((d as u64, p)));
        }
    }
    Ok(None)
}

fn spheres_unchecked<S: Space>(space: &S, x: &S::Point, radius: u64) -> Result<Vec<Vec<S::Point>>> {
    let mut seen: HashSet<S::Point> = HashSet::new();
    seen.insert(x.clone());
    let mut layers = vec![vec![x.clone()]];
    for _ in 0..radius {
        let mut next = Vec::new();
        for p in layers.last().unwrap() {
            for q in space.neighbors(p)? {
                if seen.insert(q.clone()) {
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort();
        layers.push(next);
    }
    Ok(layers)
}

/// Closed ball of radius `r` about `x`.
pub fn ball<S: Space>(space: &S, x: &S::Point, r: u64) -> Result<BTreeSet<S::Point>> {
    check_radius(space, r)?;
    Ok(bfs_from(space, [x.clone()], r)?.into_keys().collect())
}

/// `Pen(S, r)`: points within `r` of the set.
pub fn penumbra<S: Space>(space: &S, set: &BTreeSet<S::Point>, r: u64) -> Result<BTreeSet<S::Point>> {
    check_radius(space, r)?;
    Ok(bfs_from(space, set.iter().cloned(), r)?.into_keys().collect())
}

/// `∂_r S = Pen(S, r) ∩ Pen(M \ S, r)`.
///
/// A shortest path out of `S` leaves through the outer vertex boundary, so a
/// point of `S` is within `r` of the complement exactly when it is within `r`
/// of that boundary.
pub fn r_boundary<S: Space>(space: &S, set: &BTreeSet<S::Point>, r: u64) -> Result<BTreeSet<S::Point>> {
    check_radius(space, r)?;
    if r == 0 {
        return Ok(BTreeSet::new());
    }
    let pen = bfs_from(space, set.iter().cloned(), r)?;
    let outer: Vec<S::Point> =
        pen.iter().filter(|&(p, &d)| d == 1 && !set.contains(p)).map(|(p, _)| p.clone()).collect();
    let near_outer = bfs_from(space, outer, r)?;
    Ok(pen.into_keys().filter(|p| !set.contains(p) || near_outer.contains_key(p)).collect())
}

/// Ball-size ceiling for graphs of degree at most `k`, saturating at
/// `u64::MAX`.
pub fn lambda_bound(k: u64, r: u64) -> u64 {
    // 1 + k * sum_{i<r} (k-1)^i
    let mut total: u64 = 1;
    let mut layer = k;
    for _ in 0..r {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(k.saturating_sub(1));
    }
    total
}

/// A finite truncation: every point within `horizon` of `center`.
#[derive(Debug, Clone)]
pub struct Window<P> {
    pub center: P,
    pub horizon: u64,
    depth: HashMap<P, u64>,
    points: BTreeSet<P>,
}

impl<P: Clone + Ord + Hash + Debug> Window<P> {
    pub fn new<S: Space<Point = P>>(space: &S, center: P, horizon: u64) -> Result<Self> {
        check_radius(space, horizon)?;
        let depth = bfs_from(space, [center.clone()], horizon)?;
        let points = depth.keys().cloned().collect();
        Ok(Window { center, horizon, depth, points })
    }

    pub fn points(&self) -> &BTreeSet<P> {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &P) -> bool {
        self.depth.contains_key(p)
    }

    pub fn depth(&self, p: &P) -> Option<u64> {
        self.depth.get(p).copied()
    }

    /// Whether `p` sits at least `margin` away from the outer rim, so that
    /// everything within `margin` of it lies in the window.
    pub fn is_interior(&self, p: &P, margin: u64) -> bool {
        matches!(self.depth(p), Some(d) if d + margin <= self.horizon)
    }

    pub fn interior(&self, margin: u64) -> impl Iterator<Item = &P> {
        self.points.iter().filter(move |p| self.is_interior(p, margin))
    }

    pub fn hash_set(&self) -> HashSet<P> {
        self.points.iter().cloned().collect()
    }

    /// Points in BFS order from the center, ties broken canonically.
    pub fn bfs_order(&self) -> Vec<P> {
        let mut v: Vec<P> = self.points.iter().cloned().collect();
        v.sort_by(|a, b| self.depth[a].cmp(&self.depth[b]).then_with(|| a.cmp(b)));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Lattice, RegularTree};

    fn z() -> Lattice {
        Lattice::new(1)
    }

    fn pts(v: &[i64]) -> BTreeSet<Vec<i64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn ball_in_the_plane() {
        let z2 = Lattice::new(2);
        assert_eq!(ball(&z2, &vec![0, 0], 2).unwrap().len(), 13);
        assert_eq!(ball(&z(), &vec![0], 3).unwrap(), pts(&[-3, -2, -1, 0, 1, 2, 3]));
    }

    #[test]
    fn penumbra_of_two_points() {
        let s = pts(&[0, 10]);
        assert_eq!(penumbra(&z(), &s, 1).unwrap(), pts(&[-1, 0, 1, 9, 10, 11]));
    }

    #[test]
    fn boundary_of_interval_and_box() {
        let s: BTreeSet<_> = (0..10).map(|x| vec![x]).collect();
        assert_eq!(r_boundary(&z(), &s, 1).unwrap(), pts(&[-1, 0, 9, 10]));
        let z2 = Lattice::new(2);
        let b: BTreeSet<_> = (0..3).flat_map(|i| (0..3).map(move |j| vec![i, j])).collect();
        assert_eq!(r_boundary(&z2, &b, 1).unwrap().len(), 20);
        assert!(r_boundary(&z2, &b, 0).unwrap().is_empty());
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_bound(2, 3), 7);
        assert_eq!(lambda_bound(3, 2), 10);
        assert_eq!(lambda_bound(4, 1), 5);
        assert_eq!(lambda_bound(5, 0), 1);
        assert_eq!(lambda_bound(1, 4), 2);
        assert_eq!(lambda_bound(0, 4), 1);
        assert_eq!(lambda_bound(7, 200), u64::MAX);
    }

    #[test]
    fn regular_tree_balls_are_extremal() {
        for k in 3..6u64 {
            let t = RegularTree::new(k as usize);
            for r in 0..5 {
                assert_eq!(ball(&t, &t.origin(), r).unwrap().len() as u64, lambda_bound(k, r));
            }
        }
    }

    #[test]
    fn distances() {
        assert_eq!(distance(&z(), &vec![0], &vec![5], 10).unwrap(), Distance::Finite(5));
        assert_eq!(distance(&z(), &vec![0], &vec![50], 10).unwrap(), Distance::Infinite);
        assert!(Distance::Finite(3).le(3));
        assert!(!Distance::Infinite.le(u64::MAX));
    }

    #[test]
    fn window_interior() {
        let w = Window::new(&z(), vec![0], 5).unwrap();
        assert_eq!(w.len(), 11);
        assert!(w.is_interior(&vec![3], 2));
        assert!(!w.is_interior(&vec![4], 2));
        assert_eq!(w.bfs_order()[..3], [vec![0], vec![-1], vec![1]]);
    }
}
