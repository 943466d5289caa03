use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use serde_json::json;

use super::{int, net_report, verify_cqi, Distortion, PartialBijection, Rational};
use crate::cqi::nets::greedy_separated;
use crate::error::{Error, Result};
use crate::metric::{distance, spheres, Space, Window};
use crate::report::{witness, Report};

/// A bijection between separated subnets of two `K`-nets of the same window.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "P: Ord + Serialize"))]
pub struct NetMatching<P: Ord> {
    pub map: PartialBijection<P, P>,
    pub distortion: Distortion,
    /// Largest `d(x, h(x))` allowed.
    pub displacement: u64,
    pub report: Report,
}

fn ordered_from<P>(set: &BTreeSet<P>, w: &Window<P>, first: Option<&P>) -> Vec<P>
where
    P: Clone + Ord + std::hash::Hash + std::fmt::Debug,
{
    let mut v: Vec<P> = first.into_iter().cloned().collect();
    v.extend(w.bfs_order().into_iter().filter(|p| set.contains(p) && Some(p) != first));
    v
}

/// Given two `K`-nets `a1`, `a2` of the window, builds `h` with
/// `d(x, h(x)) <= 2K` that is a `(6K, 5)` coarse quasi-isometry; with a pin
/// `(x1, x2)`, `h(x1) = x2`.
pub fn net_matching<S: Space>(
    s: &S,
    w: &Window<S::Point>,
    a1: &BTreeSet<S::Point>,
    a2: &BTreeSet<S::Point>,
    k: u64,
    pin: Option<(S::Point, S::Point)>,
) -> Result<NetMatching<S::Point>> {
    if k == 0 {
        return Err(Error::invalid("net matching needs K > 0"));
    }
    for (set, name) in [(a1, "first"), (a2, "second")] {
        let r = net_report(s, w, set, k, name)?;
        if !r.passed {
            return Err(Error::NotANet(format!("{name} set is not a {k}-net: {:?}", r.first_violation())));
        }
    }
    if let Some((x1, x2)) = &pin {
        if !a1.contains(x1) || !a2.contains(x2) {
            return Err(Error::invalid("pin must pair points of the two nets"));
        }
        if !distance(s, x1, x2, 2 * k)?.le(2 * k) {
            return Err(Error::invalid(format!("pinned points are more than {} apart", 2 * k)));
        }
    }
    let sep1 = greedy_separated(s, &ordered_from(a1, w, pin.as_ref().map(|p| &p.0)), k)?;
    let sep2 = greedy_separated(s, &ordered_from(a2, w, pin.as_ref().map(|p| &p.1)), k)?;
    let sep2_set: HashSet<S::Point> = sep2.iter().cloned().collect();

    let mut forward: BTreeMap<S::Point, S::Point> = BTreeMap::new();
    for x in &sep1 {
        if let Some((x1, x2)) = &pin {
            if x == x1 {
                forward.insert(x.clone(), x2.clone());
                continue;
            }
        }
        let near = spheres(s, x, 2 * k)?.into_iter().flatten().find(|p| sep2_set.contains(p));
        if let Some(y) = near {
            forward.insert(x.clone(), y);
        }
    }
    // One preimage per image point, the pin claiming its image first.
    let mut back: BTreeMap<S::Point, S::Point> = BTreeMap::new();
    if let Some((x1, x2)) = &pin {
        back.insert(x2.clone(), x1.clone());
    }
    for (x, y) in &forward {
        back.entry(y.clone()).or_insert_with(|| x.clone());
    }
    let map = PartialBijection::new(back.into_iter().map(|(y, x)| (x, y)))?;
    let distortion = Distortion::new(6 * k, 5);
    let mut report = verify_cqi(s, w, s, w, &map, distortion)?;
    report.merge(displacement_report(s, &map, 2 * k)?);
    report.merge(net_report(s, w, &map.domain(), 5 * k, "domain-net-of-first")?);
    report.merge(net_report(s, w, &map.image(), 3 * k, "image-net-of-second")?);
    Ok(NetMatching { map, distortion, displacement: 2 * k, report })
}

fn displacement_report<S: Space>(s: &S, h: &PartialBijection<S::Point, S::Point>, bound: u64) -> Result<Report> {
    let mut report = Report::new();
    for (x, y) in h.iter() {
        report.check();
        if !distance(s, x, y, bound)?.le(bound) {
            report.fail("displacement", json!({"x": witness(x), "h(x)": witness(y), "bound": bound}));
        }
    }
    Ok(report)
}

/// `f' ∘ h ∘ f` where `h` matches the image of `f` to the domain of `f'`.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "P: Ord + Serialize, Q: Ord + Serialize, R: Ord + Serialize"))]
pub struct Composite<P: Ord, Q: Ord, R: Ord> {
    pub map: PartialBijection<P, R>,
    pub distortion: Distortion,
    pub matching: PartialBijection<Q, Q>,
    pub report: Report,
}

/// Composes two `(K, C)` coarse quasi-isometries into one with distortion
/// `(K(5C + 1), 5C²)`. A pin `(x, x'')` with `x` in the domain of `f` and
/// `x''` in the image of `f'` forces `x ↦ x''`.
#[allow(clippy::too_many_arguments)]
pub fn coarse_composite<S: Space, T: Space, U: Space>(
    s: &S,
    w: &Window<S::Point>,
    t: &T,
    wt: &Window<T::Point>,
    u: &U,
    wu: &Window<U::Point>,
    f: &PartialBijection<S::Point, T::Point>,
    g: &PartialBijection<T::Point, U::Point>,
    k: u64,
    c: Rational,
    pin: Option<(S::Point, U::Point)>,
) -> Result<Composite<S::Point, T::Point, U::Point>> {
    let d = Distortion { k: int(k), c };
    for (rep, name) in [(verify_cqi(s, w, t, wt, f, d)?, "first"), (verify_cqi(t, wt, u, wu, g, d)?, "second")] {
        if !rep.passed {
            return Err(Error::DistortionMismatch(format!(
                "{name} map is not ({k}, {c}): {:?}",
                rep.first_violation()
            )));
        }
    }
    let inner_pin = match &pin {
        Some((x, z)) => {
            let fx = f.get(x).ok_or_else(|| Error::invalid("pin source outside the first domain"))?;
            let gz = g.preimage(z).ok_or_else(|| Error::invalid("pin target outside the second image"))?;
            Some((fx.clone(), gz.clone()))
        }
        None => None,
    };
    let h = net_matching(t, wt, &f.image(), &g.domain(), k, inner_pin)?;
    let pairs = f.iter().filter_map(|(x, fx)| {
        let hx = h.map.get(fx)?;
        Some((x.clone(), g.get(hx).unwrap().clone()))
    });
    let map = PartialBijection::new(pairs)?;
    let distortion = Distortion { k: int(k) * (c * 5 + 1), c: c * c * 5 };
    let mut report = verify_cqi(s, w, u, wu, &map, distortion)?;
    for (x, z) in map.iter() {
        report.check();
        let fx = f.get(x).unwrap();
        let back = g.preimage(z).unwrap();
        if !distance(t, fx, back, 2 * k)?.le(2 * k) {
            report.fail("proximity", json!({"x": witness(x), "f(x)": witness(fx), "g^-1(z)": witness(back)}));
        }
    }
    Ok(Composite { map, distortion, matching: h.map, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cqi::separated_net;
    use crate::spaces::{Lattice, RegularTree};

    #[test]
    fn matching_two_shifted_lattices() {
        let z = Lattice::new(1);
        let w = Window::new(&z, vec![0], 40).unwrap();
        let a1: BTreeSet<_> = (-20..=20).map(|i| vec![2 * i]).collect();
        let a2: BTreeSet<_> = (-20..20).map(|i| vec![2 * i + 1]).collect();
        let m = net_matching(&z, &w, &a1, &a2, 1, Some((vec![0], vec![1]))).unwrap();
        assert!(m.report.passed, "{:?}", m.report);
        assert_eq!(m.map.get(&vec![0]), Some(&vec![1]));
        assert_eq!(m.distortion, Distortion::new(6, 5));
    }

    #[test]
    fn matching_rejects_non_nets_and_zero_k() {
        let z = Lattice::new(1);
        let w = Window::new(&z, vec![0], 20).unwrap();
        let sparse: BTreeSet<_> = (-4..=4).map(|i| vec![5 * i]).collect();
        let all = w.points().clone();
        assert!(matches!(net_matching(&z, &w, &sparse, &all, 1, None), Err(Error::NotANet(_))));
        assert!(net_matching(&z, &w, &all, &all, 0, None).is_err());
    }

    #[test]
    fn matching_on_a_tree() {
        let t = RegularTree::new(3);
        let w = Window::new(&t, vec![], 7).unwrap();
        let a1 = separated_net(&t, &w, 2, &vec![]).unwrap();
        let a2 = separated_net(&t, &w, 2, &vec![1, 0]).unwrap();
        let m = net_matching(&t, &w, &a1, &a2, 2, None).unwrap();
        assert!(m.report.passed, "{:?}", m.report);
    }

    #[test]
    fn composite_constants() {
        let z = Lattice::new(1);
        let w = Window::new(&z, vec![0], 12).unwrap();
        let w2 = Window::new(&z, vec![0], 24).unwrap();
        let w4 = Window::new(&z, vec![0], 48).unwrap();
        let f = PartialBijection::new((-12..=12).map(|x| (vec![x], vec![2 * x]))).unwrap();
        let g = PartialBijection::new((-24..=24).map(|x| (vec![x], vec![2 * x]))).unwrap();
        let comp = coarse_composite(&z, &w, &z, &w2, &z, &w4, &f, &g, 1, int(2), Some((vec![0], vec![0]))).unwrap();
        assert_eq!(comp.distortion, Distortion::new(11, 20));
        assert!(comp.report.passed, "{:?}", comp.report);
        assert_eq!(comp.map.get(&vec![0]), Some(&vec![0]));
    }

    #[test]
    fn composite_checks_its_inputs() {
        let z = Lattice::new(1);
        let w = Window::new(&z, vec![0], 10).unwrap();
        let f = PartialBijection::new((-10..=10).map(|x| (vec![x], vec![x]))).unwrap();
        let bad = PartialBijection::new((-10..=10).map(|x| (vec![x], vec![-x * 3]))).unwrap();
        let w3 = Window::new(&z, vec![0], 30).unwrap();
        let r = coarse_composite(&z, &w, &z, &w, &z, &w3, &f, &bad, 1, int(1), None);
        assert!(matches!(r, Err(Error::DistortionMismatch(_))));
    }
}
