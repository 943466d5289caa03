use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{nearest_in, net_report};
use crate::error::{Error, Result};
use crate::metric::{distance, distances_to, Space, Window};
use crate::report::{witness, Report};

/// `s[r]` bounds `d'(f x, f y)` when `d(x, y) <= r`; `t[r]` bounds
/// `d(x, y)` when `d'(f x, f y) <= r`. A `None` in `t` means the bound grew
/// when the window grew from half to full size, the finite shadow of an
/// unbounded value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoughProfile {
    pub s: Vec<u64>,
    pub t: Vec<Option<u64>>,
}

impl RoughProfile {
    /// `max(s_r, t_r)`, if every `t_r` is bounded.
    pub fn combined(&self) -> Option<Vec<u64>> {
        self.s.iter().zip(&self.t).map(|(s, t)| t.map(|t| t.max(*s))).collect()
    }
}

fn prefix_max(v: &mut [u64]) {
    for i in 1..v.len() {
        v[i] = v[i].max(v[i - 1]);
    }
}

pub fn rough_profile<S: Space, T: Space>(
    s: &S,
    w: &Window<S::Point>,
    t: &T,
    wt: &Window<T::Point>,
    f: &BTreeMap<S::Point, T::Point>,
    horizon: u64,
) -> Result<RoughProfile> {
    for x in w.points() {
        match f.get(x) {
            Some(y) if wt.contains(y) => {}
            Some(y) => return Err(Error::invalid(format!("{y:?} lies outside the target window"))),
            None => return Err(Error::invalid(format!("map undefined at {x:?}"))),
        }
    }
    let pts: Vec<S::Point> = w.points().iter().cloned().collect();
    let src: HashSet<S::Point> = pts.iter().cloned().collect();
    let img: HashSet<T::Point> = pts.iter().map(|x| f[x].clone()).collect();
    let len = horizon as usize + 1;
    let half = w.horizon / 2;
    // (s, t over the full window, t over the half window, unbounded flags)
    type Acc = (Vec<u64>, Vec<u64>, Vec<u64>, Vec<bool>);
    let rows: Vec<Result<Acc>> = pts
        .par_iter()
        .map(|x| {
            let dx = distances_to(s, x, &src, 2 * w.horizon)?;
            let dfx = distances_to(t, &f[x], &img, 2 * wt.horizon)?;
            let (mut sv, mut tv, mut ti, mut unb) = (vec![0; len], vec![0; len], vec![0; len], vec![false; len]);
            for y in &pts {
                let d = dx.get(y).copied();
                let dp = dfx.get(&f[y]).copied();
                if let Some(d) = d {
                    if d <= horizon {
                        sv[d as usize] = sv[d as usize].max(dp.unwrap_or(u64::MAX));
                    }
                }
                if let Some(dp) = dp {
                    if dp <= horizon {
                        let i = dp as usize;
                        match d {
                            Some(d) => {
                                tv[i] = tv[i].max(d);
                                if w.depth(x).unwrap() <= half && w.depth(y).unwrap() <= half {
                                    ti[i] = ti[i].max(d);
                                }
                            }
                            None => unb[i] = true,
                        }
                    }
                }
            }
            Ok((sv, tv, ti, unb))
        })
        .collect();
    let (mut sv, mut tv, mut ti, mut unb) = (vec![0; len], vec![0; len], vec![0; len], vec![false; len]);
    for row in rows {
        let (a, b, c, u) = row?;
        for i in 0..len {
            sv[i] = sv[i].max(a[i]);
            tv[i] = tv[i].max(b[i]);
            ti[i] = ti[i].max(c[i]);
            unb[i] |= u[i];
        }
    }
    prefix_max(&mut sv);
    prefix_max(&mut tv);
    prefix_max(&mut ti);
    let mut seen_unbounded = false;
    let t = (0..len)
        .map(|i| {
            seen_unbounded |= unb[i] || tv[i] > ti[i];
            (!seen_unbounded).then_some(tv[i])
        })
        .collect();
    Ok(RoughProfile { s: sv, t })
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "P: Ord + Serialize, Q: Ord + Serialize"))]
pub struct RoughEquivalence<P: Ord, Q: Ord> {
    #[serde(with = "crate::pairs")]
    pub inverse: BTreeMap<Q, P>,
    /// `max{s_{r+2K}, s_r + 2K}` for `r = 0..=horizon`.
    pub profile: Vec<u64>,
    pub closeness: u64,
    pub report: Report,
}

/// Builds a rough quasi-inverse of `f` from the fact that its image is a
/// `K`-net: `g(x')` is a canonical preimage of the image point nearest `x'`.
pub fn rough_equivalence<S: Space, T: Space>(
    s: &S,
    w: &Window<S::Point>,
    t: &T,
    wt: &Window<T::Point>,
    f: &BTreeMap<S::Point, T::Point>,
    k: u64,
    horizon: u64,
) -> Result<RoughEquivalence<S::Point, T::Point>> {
    let prof = rough_profile(s, w, t, wt, f, horizon + 2 * k)?;
    let u = prof.combined().ok_or_else(|| Error::invalid("map is not uniformly metrically proper on this window"))?;
    let image: BTreeSet<T::Point> = f.values().cloned().collect();
    let nets = net_report(t, wt, &image, k, "image-net")?;
    if !nets.passed {
        return Err(Error::NotANet(format!("image is not a {k}-net: {:?}", nets.first_violation())));
    }
    let mut pre: BTreeMap<&T::Point, &S::Point> = BTreeMap::new();
    for (x, y) in f {
        pre.entry(y).or_insert(x);
    }
    let img_set: HashSet<T::Point> = image.iter().cloned().collect();
    let mut inverse = BTreeMap::new();
    for y in wt.points() {
        let (_, q) = nearest_in(t, y, &img_set, 2 * wt.horizon)?
            .ok_or_else(|| Error::NotANet(format!("{y:?} cannot reach the image")))?;
        inverse.insert(y.clone(), pre[&q].clone());
    }
    let kk = k as usize;
    let closeness = k.max(u[kk]);
    let profile: Vec<u64> = (0..=horizon as usize).map(|r| u[r + 2 * kk].max(u[r] + 2 * k)).collect();

    let mut report = Report::new();
    for y in wt.interior(k) {
        report.check();
        if !distance(t, &f[&inverse[y]], y, k)?.le(k) {
            report.fail("fg-closeness", json!({"y": witness(y)}));
        }
    }
    for x in w.interior(closeness) {
        report.check();
        match inverse.get(&f[x]) {
            Some(back) if distance(s, x, back, closeness)?.le(closeness) => {}
            _ => report.fail("gf-closeness", json!({"x": witness(x)})),
        }
    }
    let inner = Window::new(t, wt.center.clone(), wt.horizon.saturating_sub(k))?;
    let inner_map: BTreeMap<T::Point, S::Point> =
        inner.points().iter().map(|y| (y.clone(), inverse[y].clone())).collect();
    let gp = rough_profile(t, &inner, s, w, &inner_map, horizon)?;
    for (r, &bound) in profile.iter().enumerate().take(horizon as usize + 1) {
        report.check();
        let bounded = gp.s[r] <= bound && gp.t[r].is_none_or(|v| v <= bound);
        if !bounded {
            report.fail("inverse-profile", json!({"r": r, "s": gp.s[r], "t": gp.t[r], "bound": bound}));
        }
    }
    Ok(RoughEquivalence { inverse, profile, closeness, report })
}
