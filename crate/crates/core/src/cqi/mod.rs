//! Coarse quasi-isometries between finite windows: construction,
//! composition, conversion to and from large-scale Lipschitz equivalences,
//! and independent verification of every claimed constant.

mod aa;
mod compose;
mod lsl;
mod nets;
mod rough;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::json;

use crate::error::{Error, Result};
use crate::metric::{distances_to, Space, Window};
use crate::report::{witness, Report};

pub use aa::{aa_limit, AaLimit, CqiChain};
pub use compose::{coarse_composite, net_matching, Composite, NetMatching};
pub use lsl::{cqi_from_lsl, lsl_from_cqi, rebase_cqi, verify_lsl, LslConstants, LslEquivalence, Rebased};
pub use nets::{greedy_separated, net_report, separated_net, separation_report};
pub use rough::{rough_equivalence, rough_profile, RoughEquivalence, RoughProfile};

pub type Rational = Ratio<i64>;

pub fn int(n: u64) -> Rational {
    Rational::from_integer(n as i64)
}

/// Largest integer not exceeding a nonnegative rational.
pub fn floor_u64(q: Rational) -> u64 {
    q.floor().to_integer().max(0) as u64
}

/// `a <= q * b` in exact arithmetic.
pub(crate) fn le_scaled(a: u64, q: Rational, b: u64) -> bool {
    (a as i128) * (*q.denom() as i128) <= (*q.numer() as i128) * (b as i128)
}

/// The `(K, C)` of a coarse quasi-isometry: domain and image are `K`-nets
/// and the map is `C`-bi-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distortion {
    pub k: Rational,
    pub c: Rational,
}

impl Distortion {
    pub fn new(k: u64, c: u64) -> Self {
        Distortion { k: int(k), c: int(c) }
    }

    fn validate(&self) -> Result<()> {
        if self.k < Rational::zero() || self.c < Rational::from_integer(1) {
            return Err(Error::invalid(format!("distortion needs K >= 0 and C >= 1, got {self:?}")));
        }
        Ok(())
    }
}

/// A finite injective map stored together with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialBijection<P: Ord, Q: Ord> {
    fwd: BTreeMap<P, Q>,
    bwd: BTreeMap<Q, P>,
}

impl<P: Ord + Clone + std::fmt::Debug, Q: Ord + Clone + std::fmt::Debug> PartialBijection<P, Q> {
    pub fn new(pairs: impl IntoIterator<Item = (P, Q)>) -> Result<Self> {
        let mut fwd = BTreeMap::new();
        let mut bwd = BTreeMap::new();
        for (p, q) in pairs {
            if fwd.contains_key(&p) {
                return Err(Error::invalid(format!("{p:?} mapped twice")));
            }
            if bwd.contains_key(&q) {
                return Err(Error::invalid(format!("{q:?} hit twice")));
            }
            fwd.insert(p.clone(), q.clone());
            bwd.insert(q, p);
        }
        Ok(PartialBijection { fwd, bwd })
    }

    pub fn get(&self, p: &P) -> Option<&Q> {
        self.fwd.get(p)
    }

    pub fn preimage(&self, q: &Q) -> Option<&P> {
        self.bwd.get(q)
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, &Q)> {
        self.fwd.iter()
    }

    pub fn domain(&self) -> BTreeSet<P> {
        self.fwd.keys().cloned().collect()
    }

    pub fn image(&self) -> BTreeSet<Q> {
        self.bwd.keys().cloned().collect()
    }

    pub fn inverse(&self) -> PartialBijection<Q, P> {
        PartialBijection { fwd: self.bwd.clone(), bwd: self.fwd.clone() }
    }
}

impl<P: Ord + Serialize, Q: Ord + Serialize> Serialize for PartialBijection<P, Q> {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        s.collect_seq(self.fwd.iter())
    }
}

impl<'de, P, Q> Deserialize<'de> for PartialBijection<P, Q>
where
    P: Ord + Clone + std::fmt::Debug + DeserializeOwned,
    Q: Ord + Clone + std::fmt::Debug + DeserializeOwned,
{
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(P, Q)> = Vec::deserialize(d)?;
        PartialBijection::new(pairs).map_err(serde::de::Error::custom)
    }
}

/// A map with the constants it is claimed to satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "P: Ord + Serialize, Q: Ord + Serialize",
    deserialize = "P: Ord + Clone + std::fmt::Debug + DeserializeOwned, Q: Ord + Clone + std::fmt::Debug + DeserializeOwned"
))]
pub struct CqiCertificate<P: Ord, Q: Ord> {
    pub pairs: PartialBijection<P, Q>,
    pub constants: Distortion,
}

/// Checks that `f` is a `(K, C)` coarse quasi-isometry between the two
/// windows. Net conditions are only decided at points at least `K` inside
/// the rim; bi-Lipschitz bounds are checked on every pair of the domain.
pub fn verify_cqi<S: Space, T: Space>(
    s: &S,
    w: &Window<S::Point>,
    t: &T,
    wt: &Window<T::Point>,
    f: &PartialBijection<S::Point, T::Point>,
    d: Distortion,
) -> Result<Report> {
    d.validate()?;
    let mut report = Report::new();
    for (x, y) in f.iter() {
        report.check();
        if !w.contains(x) || !wt.contains(y) {
            report.fail("outside-window", json!([witness(x), witness(y)]));
        }
    }
    let k = floor_u64(d.k);
    report.merge(net_report(s, w, &f.domain(), k, "domain-net")?);
    report.merge(net_report(t, wt, &f.image(), k, "image-net")?);
    report.merge(bilipschitz_report(s, w.horizon, t, wt.horizon, f, d.c)?);
    Ok(report)
}

/// Pairwise check of `d'/C <= d <= C d'` over the domain of `f`.
pub(crate) fn bilipschitz_report<S: Space, T: Space>(
    s: &S,
    h: u64,
    t: &T,
    ht: u64,
    f: &PartialBijection<S::Point, T::Point>,
    c: Rational,
) -> Result<Report> {
    let dom: Vec<S::Point> = f.domain().into_iter().collect();
    let dom_set: HashSet<S::Point> = dom.iter().cloned().collect();
    let im_set: HashSet<T::Point> = f.image().into_iter().collect();
    let rows: Vec<Result<Report>> = dom
        .par_iter()
        .map(|x| {
            let fx = f.get(x).unwrap();
            let dx = distances_to(s, x, &dom_set, 2 * h)?;
            let dfx = distances_to(t, fx, &im_set, 2 * ht)?;
            let mut r = Report::new();
            for y in dom.iter().filter(|y| *y > x) {
                r.check();
                let fy = f.get(y).unwrap();
                let a = dx.get(y).copied();
                let b = dfx.get(fy).copied();
                let ok = match (a, b) {
                    (Some(a), Some(b)) => le_scaled(a, c, b) && le_scaled(b, c, a),
                    (None, None) => true,
                    _ => false,
                };
                if !ok {
                    r.fail("bi-lipschitz", json!({"x": witness(x), "y": witness(y), "d": a, "d_image": b}));
                }
            }
            Ok(r)
        })
        .collect();
    let mut report = Report::new();
    for r in rows {
        report.merge(r?);
    }
    Ok(report)
}

/// Checks that every domain point of `f` at least `r` inside the rim has a
/// domain point of `g` within `r` whose image is within `s` of its own.
pub fn verify_closeness<S: Space, T: Space>(
    sp: &S,
    w: &Window<S::Point>,
    t: &T,
    f: &PartialBijection<S::Point, T::Point>,
    g: &PartialBijection<S::Point, T::Point>,
    r: u64,
    s: u64,
) -> Result<Report> {
    let gdom: HashSet<S::Point> = g.domain().into_iter().collect();
    let mut report = Report::new();
    for (x, fx) in f.iter() {
        report.check();
        let near = distances_to(sp, x, &gdom, r)?;
        let targets: HashSet<T::Point> = near.keys().map(|y| g.get(y).unwrap().clone()).collect();
        let found = !distances_to(t, fx, &targets, s)?.is_empty();
        if !found {
            if w.is_interior(x, r) {
                report.fail("closeness", json!({"x": witness(x), "r": r, "s": s}));
            } else {
                report.censor();
            }
        }
    }
    Ok(report)
}

/// The point of `set` nearest to `x` (ties canonical), searching out to `cap`.
pub(crate) fn nearest_in<S: Space>(
    s: &S,
    x: &S::Point,
    set: &HashSet<S::Point>,
    cap: u64,
) -> Result<Option<(u64, S::Point)>> {
    crate::metric::distance_to_set(s, x, set, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Lattice;

    fn z() -> Lattice {
        Lattice::new(1)
    }

    fn doubling(h: i64) -> PartialBijection<Vec<i64>, Vec<i64>> {
        PartialBijection::new((-h..=h).map(|x| (vec![x], vec![2 * x]))).unwrap()
    }

    #[test]
    fn partial_bijection_rejects_collisions() {
        assert!(PartialBijection::new([(1, 2), (3, 2)]).is_err());
        assert!(PartialBijection::new([(1, 2), (1, 3)]).is_err());
        let f = PartialBijection::new([(1, 2), (3, 4)]).unwrap();
        assert_eq!(f.inverse().get(&4), Some(&3));
        let js = serde_json::to_string(&f).unwrap();
        assert_eq!(js, "[[1,2],[3,4]]");
        let back: PartialBijection<i32, i32> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn doubling_is_a_1_2_cqi() {
        let w = Window::new(&z(), vec![0], 10).unwrap();
        let wt = Window::new(&z(), vec![0], 20).unwrap();
        let f = doubling(10);
        let rep = verify_cqi(&z(), &w, &z(), &wt, &f, Distortion::new(1, 2)).unwrap();
        assert!(rep.passed, "{rep:?}");
        let rep = verify_cqi(&z(), &w, &z(), &wt, &f, Distortion::new(1, 1)).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.violations[0].check, "bi-lipschitz");
    }

    #[test]
    fn image_gap_is_a_net_violation() {
        let w = Window::new(&z(), vec![0], 10).unwrap();
        let wt = Window::new(&z(), vec![0], 40).unwrap();
        let f = PartialBijection::new((-10..=10).map(|x| (vec![x], vec![4 * x]))).unwrap();
        let rep = verify_cqi(&z(), &w, &z(), &wt, &f, Distortion::new(1, 4)).unwrap();
        assert!(!rep.passed);
        assert!(rep.violations.iter().any(|v| v.check == "image-net"));
    }

    #[test]
    fn rational_constants() {
        assert!(le_scaled(3, Rational::new(3, 2), 2));
        assert!(!le_scaled(4, Rational::new(3, 2), 2));
        assert_eq!(floor_u64(Rational::new(7, 2)), 3);
        assert!(Distortion { k: int(0), c: Rational::new(1, 2) }.validate().is_err());
    }

    #[test]
    fn closeness_of_translations() {
        let w = Window::new(&z(), vec![0], 10).unwrap();
        let f = PartialBijection::new((-10..=10).map(|x| (vec![x], vec![x]))).unwrap();
        let g = PartialBijection::new((-10..=10).map(|x| (vec![x], vec![x + 3]))).unwrap();
        assert!(verify_closeness(&z(), &w, &z(), &f, &g, 0, 3).unwrap().passed);
        assert!(!verify_closeness(&z(), &w, &z(), &f, &g, 0, 2).unwrap().passed);
        assert!(verify_closeness(&z(), &w, &z(), &f, &g, 3, 0).unwrap().passed);
    }
}
