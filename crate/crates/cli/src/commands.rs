//! One function per subcommand. Each returns the artifact; writing it out
//! is left to the caller.

use std::collections::BTreeSet;

use coarse_core::amenability::{folner_search, verify_folner, Schedule, SearchBudget, Strategy};
use coarse_core::asdim::{asdim_profile, slab_cover, verify_cover};
use coarse_core::cqi::{
    coarse_composite, greedy_separated, net_matching, net_report, separated_net, verify_cqi, Distortion,
};
use coarse_core::ends::{end_classification, end_tree, forest_invariants};
use coarse_core::growth::{growth_exponents, growth_function};
use coarse_core::pseudogroup::{
    demo_rotation, group_double, limit_set_sample, orbit_ball, recurrence_radius, reeb_neighborhood, OrbitGraph,
    Region, WindowSpec,
};
use coarse_core::{Space, Window};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::*;
use crate::error::{CliError, Result};
use crate::input::{self, load_space};
use crate::with_space;

const DEFAULT_HORIZON: u64 = 20;
const DEFAULT_BUDGET: u64 = 1_000_000;

pub struct Artifact {
    pub json: Value,
    /// Header plus rows.
    pub csv: String,
    /// Further files, by name.
    pub extra: Vec<(String, String)>,
    /// False when a certificate or construction was rejected.
    pub passed: bool,
}

impl Artifact {
    fn new(json: Value, csv: String, passed: bool) -> Self {
        Artifact { json, csv, extra: Vec::new(), passed }
    }
}

fn enc<T: Serialize>(t: &T) -> String {
    serde_json::to_string(t).unwrap_or_default()
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing to memory cannot fail.
    w.write_record(header).unwrap();
    for row in rows {
        w.write_record(&row).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn distortion_json(d: Distortion) -> Value {
    json!({"K": d.k.to_string(), "C": d.c.to_string()})
}

pub fn run(cli: &Cli) -> Result<Artifact> {
    let horizon = cli.horizon.unwrap_or(DEFAULT_HORIZON);
    let budget = cli.budget.unwrap_or(DEFAULT_BUDGET);
    match &cli.command {
        Command::Net(a) => with_space!(&load_space(&a.space.space)?, s => net(s, a, horizon, cli.seed)),
        Command::Match(a) => with_space!(&load_space(&a.space.space)?, s => matching(s, a, horizon, cli.seed)),
        Command::Compose(a) => with_space!(&load_space(&a.space.space)?, s => compose(s, a, horizon)),
        Command::Verify(a) => {
            let source = load_space(&a.space.space)?;
            let target = load_space(a.target.as_deref().unwrap_or(&a.space.space))?;
            with_space!(&source, s => with_space!(&target, t => verify(s, t, a, horizon)))
        }
        Command::Growth(a) => with_space!(&load_space(&a.space.space)?, s => growth(s, a)),
        Command::Folner(a) => with_space!(&load_space(&a.space.space)?, s => folner(s, a)),
        Command::Ends(a) => with_space!(&load_space(&a.space.space)?, s => ends(s, a, cli.horizon)),
        Command::Asdim(a) => {
            let h = cli.horizon.unwrap_or(30);
            with_space!(&load_space(&a.space.space)?, s => asdim(s, a, h, budget))
        }
        Command::Orbit(a) => orbit(a, budget),
        Command::Recur(a) => recur(a, cli.horizon.unwrap_or(40), budget),
        Command::Reeb(a) => reeb(a, budget),
        Command::Limitset(a) => limitset(a, budget),
        Command::Double(a) => double(a, budget),
        Command::DemoRotation(a) => demo(a),
        Command::Batch(_) => Err(CliError::usage("batch runs through the batch driver")),
    }
}

fn points_csv<P: Serialize>(points: &BTreeSet<P>) -> String {
    table(&["point"], points.iter().map(|p| vec![enc(p)]))
}

fn shuffled<P: Clone + Ord + std::hash::Hash + std::fmt::Debug>(w: &Window<P>, seed: u64) -> Vec<P> {
    let mut order = w.bfs_order();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

fn net<S: Space>(s: &S, a: &NetArgs, horizon: u64, seed: Option<u64>) -> Result<Artifact> {
    let x0 = input::point(s, a.space.x0.as_deref())?;
    let w = Window::new(s, x0.clone(), horizon)?;
    let net = match seed {
        None => separated_net(s, &w, a.k, &x0)?,
        Some(seed) => greedy_separated(s, &shuffled(&w, seed), a.k)?,
    };
    let report = net_report(s, &w, &net, a.k, "net")?;
    let json = json!({
        "k": a.k, "center": x0, "horizon": horizon, "window_size": w.len(),
        "size": net.len(), "net": net, "report": report,
    });
    Ok(Artifact::new(json, points_csv(&net), report.passed))
}

fn matching<S: Space>(s: &S, a: &MatchArgs, horizon: u64, seed: Option<u64>) -> Result<Artifact> {
    let x0 = input::point(s, a.space.x0.as_deref())?;
    let w = Window::new(s, x0.clone(), horizon)?;
    let first = match &a.first {
        Some(p) => input::point_set(s, p)?,
        None => separated_net(s, &w, a.k, &x0)?,
    };
    let second = match (&a.second, seed) {
        (Some(p), _) => input::point_set(s, p)?,
        (None, Some(seed)) => greedy_separated(s, &shuffled(&w, seed), a.k)?,
        (None, None) => {
            let mut order = w.bfs_order();
            order.reverse();
            greedy_separated(s, &order, a.k)?
        }
    };
    let m = net_matching(s, &w, &first, &second, a.k, None)?;
    let json = json!({
        "k": a.k, "center": x0, "horizon": horizon,
        "distortion": distortion_json(m.distortion), "displacement": m.displacement,
        "map": m.map, "report": m.report,
    });
    let csv = table(&["x", "h(x)"], m.map.iter().map(|(x, y)| vec![enc(x), enc(y)]));
    Ok(Artifact::new(json, csv, m.report.passed))
}

fn compose<S: Space>(s: &S, a: &ComposeArgs, horizon: u64) -> Result<Artifact> {
    let x0 = input::point(s, a.space.x0.as_deref())?;
    let w = Window::new(s, x0.clone(), horizon)?;
    let f = input::load_map(s, s, &input::read_json(&a.f)?, "--f")?;
    let g = input::load_map(s, s, &input::read_json(&a.g)?, "--g")?;
    let c = input::rational_arg(&a.c)?;
    let out = coarse_composite(s, &w, s, &w, s, &w, &f, &g, a.k, c, None)?;
    let json = json!({
        "k": a.k, "c": c.to_string(), "center": x0, "horizon": horizon,
        "distortion": distortion_json(out.distortion), "map": out.map, "report": out.report,
    });
    let csv = table(&["x", "composite(x)"], out.map.iter().map(|(x, y)| vec![enc(x), enc(y)]));
    Ok(Artifact::new(json, csv, out.report.passed))
}

fn verify<S: Space, T: Space>(s: &S, t: &T, a: &VerifyArgs, horizon: u64) -> Result<Artifact> {
    let cert = input::read_json(&a.cert)?;
    let f = input::load_map(s, t, &cert, "--cert")?;
    let d = input::constants(&cert)?;
    let w = Window::new(s, input::point(s, a.space.x0.as_deref())?, horizon)?;
    let wt = Window::new(t, input::point(t, a.target_x0.as_deref())?, horizon)?;
    let report = verify_cqi(s, &w, t, &wt, &f, d)?;
    let json = json!({"constants": distortion_json(d), "pairs": f.len(), "horizon": horizon, "report": report});
    let csv =
        table(&["check", "witness"], report.violations.iter().map(|v| vec![v.check.clone(), v.witness.to_string()]));
    Ok(Artifact::new(json, csv, report.passed))
}

fn growth<S: Space>(s: &S, a: &GrowthArgs) -> Result<Artifact> {
    let x0 = input::point(s, a.space.x0.as_deref())?;
    let sample = growth_function(s, &x0, a.r_max)?;
    let exponents = growth_exponents(&sample, 0.5).ok();
    let counts: Vec<u64> = std::iter::once(1).chain(sample.counts.iter().copied()).collect();
    let json = json!({"basepoint": x0, "r_max": a.r_max, "counts": counts, "exponents": exponents});
    let csv = table(&["r", "count"], counts.iter().enumerate().map(|(r, c)| vec![r.to_string(), c.to_string()]));
    Ok(Artifact::new(json, csv, true))
}

fn folner<S: Space>(s: &S, a: &FolnerArgs) -> Result<Artifact> {
    let x0 = input::point(s, a.space.x0.as_deref())?;
    let strategy = match a.strategy {
        StrategyArg::Balls => Strategy::Balls,
        StrategyArg::Shaved => Strategy::Shaved,
    };
    let budget = SearchBudget { max_n: a.max_n, max_size: a.max_size };
    let cert = folner_search(s, &x0, budget, &a.r, strategy)?;
    let schedule = Schedule::Harmonic(input::rational_arg(&a.epsilon)?);
    let report = verify_folner(s, &cert, &a.r, &schedule)?;
    let json = json!({
        "basepoint": x0, "r": a.r, "schedule": format!("{}/n", a.epsilon),
        "certificate": cert, "accepted": report.passed, "report": report,
    });
    let csv =
        table(&["n", "r", "boundary", "size"], cert.ratios.iter().map(|e| e.iter().map(u64::to_string).collect()));
    // A rejected certificate is a result, not a failure of the run.
    Ok(Artifact::new(json, csv, true))
}

fn ends<S: Space>(s: &S, a: &EndsArgs, horizon: Option<u64>) -> Result<Artifact> {
    let x0 = input::point(s, a.space.x0.as_deref())?;
    let horizon = horizon.unwrap_or(a.depth as u64 + 3 * a.mu);
    let forest = end_tree(s, &x0, a.mu, a.depth, horizon)?;
    let class = end_classification(&forest);
    let invariants = forest_invariants(s, &forest)?;
    let json = json!({
        "classification": class.to_string(), "counts": forest.counts(),
        "invariants": invariants, "forest": forest,
    });
    let rows = forest.levels.iter().flatten().map(|c| {
        vec![
            c.level.to_string(),
            c.id.to_string(),
            c.size.to_string(),
            c.parent.map(|p| p.to_string()).unwrap_or_default(),
            c.escaping.to_string(),
            enc(&c.representative),
        ]
    });
    let csv = table(&["level", "id", "size", "parent", "escaping", "representative"], rows);
    let mut art = Artifact::new(json, csv, invariants.passed);
    if a.dot {
        art.extra.push(("forest.dot".to_string(), forest.to_dot()));
    }
    Ok(art)
}

fn asdim<S: Space>(s: &S, a: &AsdimArgs, horizon: u64, budget: u64) -> Result<Artifact> {
    let x0 = input::point(s, a.space.x0.as_deref())?;
    let profile = asdim_profile(s, &x0, &a.r, horizon, budget)?;
    let mut passed = true;
    let cover = match a.cover {
        None => Value::Null,
        Some(r) => {
            let cover = slab_cover(s, &x0, r, a.n, horizon, budget)?;
            let report = verify_cover(s, &Window::new(s, x0.clone(), horizon)?, &cover)?;
            passed = report.passed;
            json!({"n": cover.dimension(), "cover": cover, "report": report})
        }
    };
    let json = json!({"basepoint": x0, "horizon": horizon, "profile": profile, "cover": cover});
    let rows = profile
        .iter()
        .map(|e| vec![e.r.to_string(), e.n.map(|n| n.to_string()).unwrap_or_default(), e.budget_exhausted.to_string()]);
    Ok(Artifact::new(json, table(&["R", "n", "budget_exhausted"], rows), passed))
}

fn orbit(a: &OrbitArgs, budget: u64) -> Result<Artifact> {
    let spec = input::pseudogroup(&a.pg)?;
    let g = OrbitGraph::new(&spec, budget as usize);
    let x = input::symbolic(&spec, a.x.as_deref())?;
    let ball = orbit_ball(&g, &x, a.radius)?;
    let json = json!({"spec": spec, "size": ball.points.len(), "ball": ball});
    let rows =
        ball.points.iter().zip(&ball.depth).enumerate().map(|(i, (p, d))| vec![i.to_string(), d.to_string(), enc(p)]);
    Ok(Artifact::new(json, table(&["index", "depth", "point"], rows), true))
}

fn recur(a: &RecurArgs, horizon: u64, budget: u64) -> Result<Artifact> {
    let spec = input::pseudogroup(&a.pg)?;
    let g = OrbitGraph::new(&spec, budget as usize);
    let region = Region::parse(&spec, &input::json_arg(&a.region))?;
    let rec = recurrence_radius(&g, &region, &spec.basepoints, horizon)?;
    let rows = spec
        .basepoints
        .iter()
        .zip(&rec.per_basepoint)
        .map(|(b, r)| vec![enc(b), r.map(|r| r.to_string()).unwrap_or_default()]);
    let csv = table(&["basepoint", "radius"], rows);
    let json = json!({"spec": spec, "region": region, "horizon": horizon, "recurrence": rec});
    Ok(Artifact::new(json, csv, true))
}

fn reeb(a: &ReebArgs, budget: u64) -> Result<Artifact> {
    let spec = input::pseudogroup(&a.pg)?;
    let g = OrbitGraph::new(&spec, budget as usize);
    let x = input::symbolic(&spec, a.x.as_deref())?;
    let nb = reeb_neighborhood(&g, &x, a.radius)?;
    let (phi, csv, passed) = match &a.y {
        None => {
            let rows = nb.ball.points.iter().enumerate().map(|(i, p)| vec![i.to_string(), enc(p)]);
            (Value::Null, table(&["index", "point"], rows), true)
        }
        Some(y) => {
            let y = input::symbolic(&spec, Some(y))?;
            let phi = nb.phi(&g, &y)?;
            let rows = phi.map.iter().map(|(u, v)| vec![enc(u), enc(v)]);
            let csv = table(&["z", "phi(z)"], rows);
            let passed = phi.report.passed;
            (serde_json::to_value(&phi).unwrap_or_default(), csv, passed)
        }
    };
    let json = json!({"spec": spec, "neighborhood": nb, "phi": phi});
    Ok(Artifact::new(json, csv, passed))
}

fn limitset(a: &LimitArgs, budget: u64) -> Result<Artifact> {
    let spec = input::pseudogroup(&a.pg)?;
    let g = OrbitGraph::new(&spec, budget as usize);
    let centers = if a.center.is_empty() {
        spec.basepoints.clone()
    } else {
        a.center.iter().map(|c| input::symbolic(&spec, Some(c))).collect::<Result<_>>()?
    };
    let windows: Vec<WindowSpec> = centers.into_iter().map(|center| WindowSpec { center, radius: a.radius }).collect();
    let sample = limit_set_sample(&g, &windows, a.level)?;
    let csv = table(&["cell"], sample.cells.iter().map(|c| vec![enc(c)]));
    let json = json!({"spec": spec, "windows": windows, "sample": sample});
    Ok(Artifact::new(json, csv, true))
}

fn double(a: &DoubleArgs, budget: u64) -> Result<Artifact> {
    let spec = input::pseudogroup(&a.pg)?;
    let x = input::symbolic(&spec, a.x.as_deref())?;
    let rep = group_double(&spec, &x, a.radius, budget as usize)?;
    let csv = table(
        &["window_radius", "window_size", "closed", "pairs", "max_excess_f", "max_excess_e", "passed"],
        [vec![
            rep.window_radius.to_string(),
            rep.window_size.to_string(),
            rep.closed.to_string(),
            rep.pairs.to_string(),
            rep.max_excess_f.to_string(),
            rep.max_excess_e.to_string(),
            rep.report.passed.to_string(),
        ]],
    );
    let passed = rep.report.passed;
    Ok(Artifact::new(json!({"spec": spec, "center": x, "double": rep}), csv, passed))
}

fn demo(a: &DemoArgs) -> Result<Artifact> {
    let rep = demo_rotation(a.n_max, a.scan)?;
    let rows = rep.rows.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.arc.0.to_string(),
            r.arc.1.to_string(),
            r.k.to_string(),
            enc(&r.x),
            r.ball_size.to_string(),
            r.ball_in_a.to_string(),
        ]
    });
    let csv = table(&["n", "lo", "hi", "k", "x", "ball_size", "ball_in_a"], rows);
    let passed = rep.complement_fails_net;
    Ok(Artifact::new(serde_json::to_value(&rep).unwrap_or_default(), csv, passed))
}
