//! Seeded random graphs shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use coarse_core::spaces::Graph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Connected graph on `n` vertices with maximum degree `max_deg`: a random
/// spanning tree grown under the degree cap, then extra edges.
pub fn random_connected_graph(seed: u64, n: u32, max_deg: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deg = vec![0usize; n as usize];
    let mut edges = Vec::new();
    for v in 1..n {
        let open: Vec<u32> = (0..v).filter(|&u| deg[u as usize] < max_deg - 1 || v == 1).collect();
        let u = *open.choose(&mut rng).unwrap_or(&(v - 1));
        edges.push((u, v));
        deg[u as usize] += 1;
        deg[v as usize] += 1;
    }
    let extra = rng.gen_range(0..=n as usize);
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && deg[u as usize] < max_deg && deg[v as usize] < max_deg && !edges.contains(&(u.min(v), u.max(v))) {
            edges.push((u.min(v), u.max(v)));
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Random non-empty proper-or-full subset, biased towards connected blobs
/// half of the time.
pub fn random_subset(rng: &mut ChaCha8Rng, g: &Graph, n: u32) -> BTreeSet<u32> {
    use coarse_core::Space;
    let size = rng.gen_range(1..=n.min(40));
    if rng.gen_bool(0.5) {
        let mut set = BTreeSet::from([rng.gen_range(0..n)]);
        while (set.len() as u32) < size {
            let v = *set.iter().nth(rng.gen_range(0..set.len())).unwrap();
            let nb = g.neighbors(&v).unwrap();
            set.insert(*nb.choose(rng).unwrap());
        }
        set
    } else {
        (0..size).map(|_| rng.gen_range(0..n)).collect()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
