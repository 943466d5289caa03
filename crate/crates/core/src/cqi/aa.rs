use std::collections::BTreeSet;

use serde::Serialize;

use super::{int, Distortion, PartialBijection};
use crate::error::{Error, Result};

/// Partial coarse quasi-isometries `f_n` with a common distortion, each
/// compared against the increasing finite sets `F_n ⊂ M` and `F'_n ⊂ M'`.
#[derive(Debug, Clone)]
pub struct CqiChain<P: Ord, Q: Ord> {
    pub sets: Vec<BTreeSet<P>>,
    pub targets: Vec<BTreeSet<Q>>,
    pub maps: Vec<PartialBijection<P, Q>>,
    pub distortion: Distortion,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "P: Ord + Serialize, Q: Ord + Serialize"))]
pub struct AaLimit<P: Ord, Q: Ord> {
    pub map: PartialBijection<P, Q>,
    pub distortion: Distortion,
    /// Index of the chain member whose restrictions form the chosen ray.
    pub source: usize,
    pub depth: usize,
}

type Restriction<P, Q> = Vec<(P, Q)>;

impl<P: Ord + Clone + std::fmt::Debug, Q: Ord + Clone + std::fmt::Debug> CqiChain<P, Q> {
    /// The restriction of `f_n` to `F_m`, provided it maps `F_m ∩ dom f_n`
    /// onto `F'_m ∩ im f_n`.
    fn restriction(&self, n: usize, m: usize) -> Option<Restriction<P, Q>> {
        let f = &self.maps[n];
        let r: Restriction<P, Q> =
            self.sets[m].iter().filter_map(|x| f.get(x).map(|y| (x.clone(), y.clone()))).collect();
        let hit: BTreeSet<&Q> = r.iter().map(|(_, y)| y).collect();
        let want: BTreeSet<&Q> = self.targets[m].iter().filter(|y| f.preimage(y).is_some()).collect();
        (hit == want).then_some(r)
    }
}

/// Extracts a ray of compatible restrictions through the first `depth`
/// levels of the restriction tree, choosing the lexicographically least
/// one, and returns its union. The claimed distortion is `(K + L, C)`,
/// where `L` bounds how far the `F_n` are from being nets.
pub fn aa_limit<P, Q>(chain: &CqiChain<P, Q>, depth: usize, l: u64) -> Result<AaLimit<P, Q>>
where
    P: Ord + Clone + std::fmt::Debug,
    Q: Ord + Clone + std::fmt::Debug,
{
    let n = chain.maps.len();
    if chain.sets.len() != n || chain.targets.len() != n {
        return Err(Error::invalid("chain needs one set pair per map"));
    }
    if depth == 0 || depth > n {
        return Err(Error::invalid(format!("depth must lie in 1..={n}")));
    }
    for i in 1..n {
        if !chain.sets[i - 1].is_subset(&chain.sets[i]) || !chain.targets[i - 1].is_subset(&chain.targets[i]) {
            return Err(Error::invalid("chain sets must increase"));
        }
    }
    let mut best: Option<(Vec<Restriction<P, Q>>, usize)> = None;
    let mut reached = 0;
    for i in 0..n {
        let mut ray = Vec::new();
        for m in 0..=i.min(depth - 1) {
            match chain.restriction(i, m) {
                Some(r) => ray.push(r),
                None => break,
            }
        }
        reached = reached.max(ray.len());
        if ray.len() == depth && best.as_ref().is_none_or(|(b, _)| ray < *b) {
            best = Some((ray, i));
        }
    }
    let (ray, source) = best.ok_or(Error::NoInfiniteRay { depth_reached: reached })?;
    let map = PartialBijection::new(ray.last().unwrap().iter().cloned())?;
    let distortion = Distortion { k: chain.distortion.k + int(l), c: chain.distortion.c };
    Ok(AaLimit { map, distortion, source, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(n: i64) -> BTreeSet<i64> {
        (-n..=n).collect()
    }

    fn chain(maps: Vec<PartialBijection<i64, i64>>) -> CqiChain<i64, i64> {
        let n = maps.len() as i64;
        CqiChain {
            sets: (1..=n).map(interval).collect(),
            targets: (1..=n).map(interval).collect(),
            maps,
            distortion: Distortion::new(0, 1),
        }
    }

    fn signed(n: i64) -> PartialBijection<i64, i64> {
        let s = if n % 2 == 0 { 1 } else { -1 };
        PartialBijection::new((-n..=n).map(|x| (x, s * x))).unwrap()
    }

    #[test]
    fn alternating_reflections_pick_one_parity() {
        let c = chain((1..=8).map(signed).collect());
        let g = aa_limit(&c, 5, 0).unwrap();
        // The identity restricted to F_1 sorts before the reflection.
        assert_eq!(g.map.get(&3), Some(&3));
        assert!(g.map.iter().all(|(x, y)| y == x));
        assert_eq!(g.source % 2, 1);
        assert_eq!(g.map.len(), 11);
        assert_eq!(g.distortion, Distortion::new(0, 1));
    }

    #[test]
    fn fixed_points_survive() {
        let c = chain((1..=6).map(signed).collect());
        let g = aa_limit(&c, 4, 2).unwrap();
        assert_eq!(g.map.get(&0), Some(&0));
        assert_eq!(g.distortion, Distortion::new(2, 1));
    }

    #[test]
    fn incompatible_chain_has_no_ray() {
        let shifts: Vec<_> = (1..=5i64).map(|n| PartialBijection::new((-n..=n).map(|x| (x, x + 1))).unwrap()).collect();
        let c = chain(shifts);
        assert!(matches!(aa_limit(&c, 3, 0), Err(Error::NoInfiniteRay { depth_reached: 0 })));
    }
}
