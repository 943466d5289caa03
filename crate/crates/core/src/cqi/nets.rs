use std::collections::{BTreeSet, HashSet};

use serde_json::json;

use crate::error::{Error, Result};
use crate::metric::{bfs_from, distances_to, Space, Window};
use crate::report::{witness, Report};

/// Greedy maximal `k`-separated subset of `candidates`, taken in the given
/// order. Every candidate ends up within `k` of the result.
pub fn greedy_separated<S: Space>(s: &S, candidates: &[S::Point], k: u64) -> Result<BTreeSet<S::Point>> {
    let mut chosen = BTreeSet::new();
    let mut blocked: HashSet<S::Point> = HashSet::new();
    for p in candidates {
        if blocked.contains(p) {
            continue;
        }
        chosen.insert(p.clone());
        blocked.extend(bfs_from(s, [p.clone()], k)?.into_keys());
    }
    Ok(chosen)
}

/// A `k`-separated `k`-net of the window containing `x0`, built greedily in
/// BFS order from the window center.
pub fn separated_net<S: Space>(s: &S, w: &Window<S::Point>, k: u64, x0: &S::Point) -> Result<BTreeSet<S::Point>> {
    if !w.contains(x0) {
        return Err(Error::UnknownPoint { point: format!("{x0:?}") });
    }
    let mut order = vec![x0.clone()];
    order.extend(w.bfs_order().into_iter().filter(|p| p != x0));
    greedy_separated(s, &order, k)
}

/// Is every window point at least `radius` inside the rim within `radius`
/// of `set`? Misses closer to the rim are censored rather than failed.
pub fn net_report<S: Space>(
    s: &S,
    w: &Window<S::Point>,
    set: &BTreeSet<S::Point>,
    radius: u64,
    label: &str,
) -> Result<Report> {
    let covered: HashSet<S::Point> = bfs_from(s, set.iter().cloned(), radius)?.into_keys().collect();
    let mut report = Report::new();
    for x in w.points() {
        report.check();
        if !covered.contains(x) {
            if w.is_interior(x, radius) {
                report.fail(label, json!({"point": witness(x), "radius": radius}));
            } else {
                report.censor();
            }
        }
    }
    Ok(report)
}

/// Are distinct points of `set` more than `k` apart?
pub fn separation_report<S: Space>(s: &S, set: &BTreeSet<S::Point>, k: u64) -> Result<Report> {
    let hs: HashSet<S::Point> = set.iter().cloned().collect();
    let mut report = Report::new();
    for x in set {
        report.check();
        for (y, d) in distances_to(s, x, &hs, k)? {
            if &y > x {
                report.fail("separation", json!({"x": witness(x), "y": witness(&y), "d": d}));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Lattice, RegularTree};

    #[test]
    fn separated_net_on_the_line() {
        let z = Lattice::new(1);
        let w = Window::new(&z, vec![0], 20).unwrap();
        let a = separated_net(&z, &w, 2, &vec![0]).unwrap();
        let want: BTreeSet<_> = (-6..=6).map(|i| vec![3 * i]).collect();
        assert_eq!(a, want);
        assert!(net_report(&z, &w, &a, 2, "net").unwrap().passed);
        assert!(separation_report(&z, &a, 2).unwrap().passed);
        assert!(!separation_report(&z, &a, 3).unwrap().passed);
    }

    #[test]
    fn zero_net_is_everything() {
        let z2 = Lattice::new(2);
        let w = Window::new(&z2, vec![0, 0], 4).unwrap();
        let a = separated_net(&z2, &w, 0, &vec![0, 0]).unwrap();
        assert_eq!(&a, w.points());
    }

    #[test]
    fn pinned_point_is_kept() {
        let t = RegularTree::new(3);
        let w = Window::new(&t, vec![], 5).unwrap();
        let a = separated_net(&t, &w, 3, &vec![0, 1]).unwrap();
        assert!(a.contains(&vec![0, 1]));
        assert!(separation_report(&t, &a, 3).unwrap().passed);
        assert!(net_report(&t, &w, &a, 3, "net").unwrap().passed);
    }

    #[test]
    fn rim_misses_are_censored() {
        let z = Lattice::new(1);
        let w = Window::new(&z, vec![0], 10).unwrap();
        let a: BTreeSet<_> = (-8..=8).map(|i| vec![i]).collect();
        let r = net_report(&z, &w, &a, 1, "net").unwrap();
        assert!(r.passed);
        assert_eq!(r.rim_censored, 2);
        let holes: BTreeSet<_> = (-8..=8).filter(|i| *i != 3).map(|i| vec![3 * i]).collect();
        assert!(!net_report(&z, &w, &holes, 1, "net").unwrap().passed);
    }
}
