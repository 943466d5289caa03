use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    floor_u64, int, nearest_in, verify_closeness, verify_cqi, CqiCertificate, Distortion, PartialBijection, Rational,
};
use crate::cqi::nets::greedy_separated;
use crate::error::{Error, Result};
use crate::metric::{ball, distance, distances_to, Space, Window};
use crate::report::{witness, Report};

/// `(λ, b, c)`: both maps are `(λ, b)`-large scale Lipschitz and the two
/// composites are `c`-close to the identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LslConstants {
    pub lambda: Rational,
    pub b: Rational,
    pub c: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "P: Ord + Serialize, Q: Ord + Serialize",
    deserialize = "P: Ord + DeserializeOwned, Q: Ord + DeserializeOwned"
))]
pub struct LslEquivalence<P: Ord, Q: Ord> {
    #[serde(with = "crate::pairs")]
    pub phi: BTreeMap<P, Q>,
    #[serde(with = "crate::pairs")]
    pub psi: BTreeMap<Q, P>,
    pub constants: LslConstants,
}

fn nearest_extension<S: Space, Q: Clone>(
    s: &S,
    w: &Window<S::Point>,
    f: impl Fn(&S::Point) -> Option<Q>,
    dom: &HashSet<S::Point>,
) -> Result<BTreeMap<S::Point, Q>> {
    let mut out = BTreeMap::new();
    for x in w.points() {
        let (_, y) = nearest_in(s, x, dom, 2 * w.horizon)?
            .ok_or_else(|| Error::NotANet(format!("{x:?} cannot reach the domain")))?;
        out.insert(x.clone(), f(&y).unwrap());
    }
    Ok(out)
}

/// Extends a `(K, C)` coarse quasi-isometry to every window point by the
/// nearest domain point (ties canonical), giving a `(C, 2CK, K)`
/// equivalence.
pub fn lsl_from_cqi<S: Space, T: Space>(
    s: &S,
    w: &Window<S::Point>,
    t: &T,
    wt: &Window<T::Point>,
    f: &PartialBijection<S::Point, T::Point>,
    d: Distortion,
) -> Result<(LslEquivalence<S::Point, T::Point>, Report)> {
    let dom: HashSet<S::Point> = f.domain().into_iter().collect();
    let im: HashSet<T::Point> = f.image().into_iter().collect();
    let phi = nearest_extension(s, w, |y| f.get(y).cloned(), &dom)?;
    let psi = nearest_extension(t, wt, |y| f.preimage(y).cloned(), &im)?;
    let constants = LslConstants { lambda: d.c, b: d.c * d.k * 2, c: d.k };
    let eq = LslEquivalence { phi, psi, constants };
    let report = verify_lsl(s, w, t, wt, &eq)?;
    Ok((eq, report))
}

#[allow(clippy::too_many_arguments)]
fn lipschitz_report<S: Space, T: Space>(
    s: &S,
    pts: &[S::Point],
    h: u64,
    t: &T,
    ht: u64,
    map: &BTreeMap<S::Point, T::Point>,
    lambda: Rational,
    b: Rational,
    label: &str,
) -> Result<Report> {
    let src: HashSet<S::Point> = pts.iter().cloned().collect();
    let img: HashSet<T::Point> = pts.iter().map(|p| map[p].clone()).collect();
    let rows: Vec<Result<Report>> = pts
        .par_iter()
        .map(|x| {
            let dx = distances_to(s, x, &src, 2 * h)?;
            let dfx = distances_to(t, &map[x], &img, 2 * ht)?;
            let mut r = Report::new();
            for y in pts.iter().filter(|y| *y > x) {
                r.check();
                let ok = match (dx.get(y), dfx.get(&map[y])) {
                    (Some(&a), Some(&b2)) => int(b2) <= lambda * int(a) + b,
                    (None, _) => true,
                    (Some(_), None) => false,
                };
                if !ok {
                    r.fail(label, json!({"x": witness(x), "y": witness(y)}));
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

/// Checks an equivalence on the points at least `floor(c)` inside each rim.
pub fn verify_lsl<S: Space, T: Space>(
    s: &S,
    w: &Window<S::Point>,
    t: &T,
    wt: &Window<T::Point>,
    eq: &LslEquivalence<S::Point, T::Point>,
) -> Result<Report> {
    let LslConstants { lambda, b, c } = eq.constants;
    let margin = floor_u64(c);
    let mut report = Report::new();
    let inner: Vec<S::Point> = w.interior(margin).cloned().collect();
    let inner_t: Vec<T::Point> = wt.interior(margin).cloned().collect();
    report.rim_censored += (w.len() - inner.len() + wt.len() - inner_t.len()) as u64;
    for x in &inner {
        if !eq.phi.contains_key(x) {
            return Err(Error::invalid(format!("phi undefined at {x:?}")));
        }
    }
    for y in &inner_t {
        if !eq.psi.contains_key(y) {
            return Err(Error::invalid(format!("psi undefined at {y:?}")));
        }
    }
    report.merge(lipschitz_report(s, &inner, w.horizon, t, wt.horizon, &eq.phi, lambda, b, "phi-lipschitz")?);
    report.merge(lipschitz_report(t, &inner_t, wt.horizon, s, w.horizon, &eq.psi, lambda, b, "psi-lipschitz")?);
    let cap = floor_u64(c);
    for x in &inner {
        report.check();
        let back = eq.psi.get(&eq.phi[x]);
        let ok = match back {
            Some(p) => distance(s, x, p, cap)?.le(cap),
            None => false,
        };
        if !ok {
            report.fail("psi-phi-closeness", json!({"x": witness(x)}));
        }
    }
    for y in &inner_t {
        report.check();
        let back = eq.phi.get(&eq.psi[y]);
        let ok = match back {
            Some(p) => distance(t, y, p, cap)?.le(cap),
            None => false,
        };
        if !ok {
            report.fail("phi-psi-closeness", json!({"y": witness(y)}));
        }
    }
    Ok(report)
}

/// Restricts `φ` to a `(2c + b + ε)`-separated net through `x0`. The result
/// is a `(K, C)` coarse quasi-isometry with
/// `K = c + 2λc + λb + λε + b` and `C = λ + λ(2c + b)/ε`; the default `ε`
/// is `2c + b + 1`.
pub fn cqi_from_lsl<S: Space, T: Space>(
    s: &S,
    w: &Window<S::Point>,
    t: &T,
    wt: &Window<T::Point>,
    eq: &LslEquivalence<S::Point, T::Point>,
    eps: Option<Rational>,
    x0: &S::Point,
) -> Result<(CqiCertificate<S::Point, T::Point>, Report)> {
    let LslConstants { lambda, b, c } = eq.constants;
    let eps = eps.unwrap_or(c * 2 + b + 1);
    if eps <= int(0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let margin = floor_u64(c);
    if !w.is_interior(x0, margin) {
        return Err(Error::MarginTooSmall { needed: margin, available: w.horizon - w.depth(x0).unwrap_or(w.horizon) });
    }
    let delta = floor_u64(c * 2 + b + eps);
    let mut order = vec![x0.clone()];
    order.extend(w.bfs_order().into_iter().filter(|p| p != x0 && w.is_interior(p, margin)));
    let net: BTreeSet<S::Point> = greedy_separated(s, &order, delta)?;
    let pairs: Vec<_> = net.iter().map(|x| (x.clone(), eq.phi[x].clone())).collect();
    let map = PartialBijection::new(pairs)
        .map_err(|e| Error::VerificationFailed(format!("restriction is not injective: {e}")))?;
    let constants =
        Distortion { k: c + lambda * c * 2 + lambda * b + lambda * eps + b, c: lambda + lambda / eps * (c * 2 + b) };
    let report = verify_cqi(s, w, t, wt, &map, constants)?;
    Ok((CqiCertificate { pairs: map, constants }, report))
}

/// A coarse quasi-isometry moved so that it sends `x0` to `x0'`.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "P: Ord + Serialize, Q: Ord + Serialize"))]
pub struct Rebased<P: Ord, Q: Ord> {
    pub certificate: CqiCertificate<P, Q>,
    pub lsl: LslConstants,
    /// `(r, s)` such that the new map is `(r, s)`-close to the old one.
    pub closeness: (Rational, Rational),
    pub report: Report,
}

#[allow(clippy::too_many_arguments)]
pub fn rebase_cqi<S: Space, T: Space>(
    s: &S,
    w: &Window<S::Point>,
    t: &T,
    wt: &Window<T::Point>,
    f: &PartialBijection<S::Point, T::Point>,
    d: Distortion,
    x0: &S::Point,
    x0p: &T::Point,
    r: u64,
    eps: Option<Rational>,
) -> Result<Rebased<S::Point, T::Point>> {
    let anchored = ball(s, x0, r)?.into_iter().any(|y| match f.get(&y) {
        Some(fy) => distance(t, x0p, fy, r).map(|d| d.le(r)).unwrap_or(false),
        None => false,
    });
    if !anchored {
        return Err(Error::NoAnchor { r });
    }
    let (mut eq, mut report) = lsl_from_cqi(s, w, t, wt, f, d)?;
    let (cc, k, rr) = (d.c, d.k, int(r));
    let r1 = cc * rr + cc * k * 2 + rr;
    let b_bar = cc * k * 2 + r1;
    let c_bar = cc * r1 + cc * k * 2 + k * 2;
    eq.phi.insert(x0.clone(), x0p.clone());
    eq.psi.insert(x0p.clone(), x0.clone());
    eq.constants = LslConstants { lambda: cc, b: b_bar, c: c_bar };
    report.merge(verify_lsl(s, w, t, wt, &eq)?);
    let eps = eps.unwrap_or(c_bar * 2 + b_bar + 1);
    let (certificate, rep) = cqi_from_lsl(s, w, t, wt, &eq, Some(eps), x0)?;
    report.merge(rep);
    let Distortion { k: kb, c: cb } = certificate.constants;
    let closeness = (kb, r1 + cb * kb + b_bar);
    if certificate.pairs.get(x0) != Some(x0p) {
        report.fail("rebase-pin", json!({"x0": witness(x0)}));
    }
    report.merge(verify_closeness(s, w, t, &certificate.pairs, f, floor_u64(closeness.0), floor_u64(closeness.1))?);
    Ok(Rebased { certificate, lsl: eq.constants, closeness, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Lattice;

    fn z() -> Lattice {
        Lattice::new(1)
    }

    #[test]
    fn lsl_constants_from_cqi() {
        let w = Window::new(&z(), vec![0], 30).unwrap();
        let wt = Window::new(&z(), vec![0], 60).unwrap();
        let f = PartialBijection::new((-10..=10).map(|x| (vec![3 * x], vec![6 * x]))).unwrap();
        let (eq, rep) = lsl_from_cqi(&z(), &w, &z(), &wt, &f, Distortion::new(3, 2)).unwrap();
        assert_eq!(eq.constants, LslConstants { lambda: int(2), b: int(12), c: int(3) });
        assert!(rep.passed, "{rep:?}");
        assert_eq!(eq.phi[&vec![4]], vec![6]);
        // Tie between 0 and 3 breaks toward the smaller point.
        assert_eq!(eq.psi[&vec![3]], vec![0]);
    }

    #[test]
    fn cqi_constants_from_lsl() {
        let w = Window::new(&z(), vec![0], 40).unwrap();
        let phi: BTreeMap<_, _> = w.points().iter().map(|p| (p.clone(), p.clone())).collect();
        let eq = LslEquivalence {
            phi: phi.clone(),
            psi: phi,
            constants: LslConstants { lambda: int(2), b: int(1), c: int(1) },
        };
        let (cert, rep) = cqi_from_lsl(&z(), &w, &z(), &w, &eq, Some(int(2)), &vec![0]).unwrap();
        assert_eq!(cert.constants, Distortion::new(12, 5));
        assert!(rep.passed, "{rep:?}");
        assert!(cert.pairs.get(&vec![0]).is_some());
        let (cert, _) = cqi_from_lsl(&z(), &w, &z(), &w, &eq, None, &vec![0]).unwrap();
        assert_eq!(cert.constants.c, Rational::new(2 * 4 + 2 * 3, 4));
    }

    #[test]
    fn rebase_a_shift() {
        let w = Window::new(&z(), vec![0], 150).unwrap();
        let f = PartialBijection::new((-150..=150).map(|x| (vec![x], vec![x]))).unwrap();
        let out = rebase_cqi(&z(), &w, &z(), &w, &f, Distortion::new(0, 1), &vec![0], &vec![5], 5, None).unwrap();
        assert_eq!(out.certificate.pairs.get(&vec![0]), Some(&vec![5]));
        assert!(out.report.passed, "{:?}", out.report);
        let far = rebase_cqi(&z(), &w, &z(), &w, &f, Distortion::new(0, 1), &vec![0], &vec![50], 5, None);
        assert!(matches!(far, Err(Error::NoAnchor { r: 5 })));
    }
}
