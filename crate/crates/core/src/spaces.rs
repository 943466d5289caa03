//! Built-in spaces: explicit graphs, integer lattices, regular trees and
//! free groups.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Space, SpaceKind};

/// A finite graph held as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    vertices: u32,
    edges: Vec<[u32; 2]>,
}

impl Graph {
    pub fn from_edges(vertices: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); vertices as usize];
        for &(u, v) in edges {
            if u >= vertices || v >= vertices {
                return Err(Error::invalid(format!("edge ({u}, {v}) outside 0..{vertices}")));
            }
            if u != v {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Ok(Graph { adj })
    }

    /// Whitespace-separated `u v` pairs, one per line; `#` starts a comment.
    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<u32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => {
                    n = n.max(u + 1).max(v + 1);
                    edges.push((u, v));
                }
                _ => return Err(Error::invalid(format!("line {}: expected `u v`", i + 1))),
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GraphJson = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        let edges: Vec<_> = g.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::from_edges(g.vertices, &edges)
    }

    pub fn to_json(&self) -> String {
        let edges = self.edges().into_iter().map(|(u, v)| [u, v]).collect();
        serde_json::to_string(&GraphJson { vertices: self.adj.len() as u32, edges }).unwrap()
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for (u, a) in self.adj.iter().enumerate() {
            for &v in a {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn path(n: u32) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).unwrap()
    }

    pub fn cycle(n: u32) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges).unwrap()
    }
}

impl Space for Graph {
    type Point = u32;

    fn neighbors(&self, p: &u32) -> Result<Vec<u32>> {
        self.adj.get(*p as usize).cloned().ok_or_else(|| Error::UnknownPoint { point: p.to_string() })
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::ExplicitGraph
    }

    fn origin(&self) -> u32 {
        0
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.adj.iter().map(Vec::len).max().unwrap_or(0))
    }
}

/// `Z^d` with the word metric of the standard generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
}

impl Lattice {
    pub fn new(dim: usize) -> Self {
        Lattice { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Space for Lattice {
    type Point = Vec<i64>;

    fn neighbors(&self, p: &Vec<i64>) -> Result<Vec<Vec<i64>>> {
        if p.len() != self.dim {
            return Err(Error::UnknownPoint { point: format!("{p:?}") });
        }
        let mut out = Vec::with_capacity(2 * self.dim);
        for i in 0..self.dim {
            for s in [-1, 1] {
                let mut q = p.clone();
                q[i] += s;
                out.push(q);
            }
        }
        out.sort();
        Ok(out)
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::Product
    }

    fn origin(&self) -> Vec<i64> {
        vec![0; self.dim]
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(2 * self.dim)
    }

    fn coordinates(&self, p: &Vec<i64>) -> Option<Vec<i64>> {
        Some(p.clone())
    }

    fn product_dim(&self) -> Option<usize> {
        Some(self.dim)
    }
}

/// The `k`-regular tree, realised as reduced words in `k` involutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularTree {
    degree: usize,
}

impl RegularTree {
    pub fn new(degree: usize) -> Self {
        assert!(degree <= u8::MAX as usize);
        RegularTree { degree }
    }
}

impl Space for RegularTree {
    type Point = Vec<u8>;

    fn neighbors(&self, p: &Vec<u8>) -> Result<Vec<Vec<u8>>> {
        let mut out = Vec::with_capacity(self.degree);
        for a in 0..self.degree as u8 {
            let mut q = p.clone();
            if q.last() == Some(&a) {
                q.pop();
            } else {
                q.push(a);
            }
            out.push(q);
        }
        out.sort();
        Ok(out)
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::LazyOrbit
    }

    fn origin(&self) -> Vec<u8> {
        Vec::new()
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(self.degree)
    }
}

/// Cayley graph of the free group on `rank` generators. Letters are
/// `±1..=±rank`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeGroup {
    rank: usize,
}

impl FreeGroup {
    pub fn new(rank: usize) -> Self {
        assert!(rank <= i8::MAX as usize);
        FreeGroup { rank }
    }
}

impl Space for FreeGroup {
    type Point = Vec<i8>;

    fn neighbors(&self, p: &Vec<i8>) -> Result<Vec<Vec<i8>>> {
        let mut out = Vec::with_capacity(2 * self.rank);
        for g in 1..=self.rank as i8 {
            for l in [g, -g] {
                let mut q = p.clone();
                if q.last() == Some(&-l) {
                    q.pop();
                } else {
                    q.push(l);
                }
                out.push(q);
            }
        }
        out.sort();
        Ok(out)
    }

    fn kind(&self) -> SpaceKind {
        SpaceKind::LazyOrbit
    }

    fn origin(&self) -> Vec<i8> {
        Vec::new()
    }

    fn degree_bound(&self) -> Option<usize> {
        Some(2 * self.rank)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::ball;

    #[test]
    fn edge_list_and_json_agree() {
        let a = Graph::from_edge_list("0 1\n1 2 # comment\n\n2 0\n").unwrap();
        let b = Graph::from_json(r#"{"vertices":3,"edges":[[0,1],[1,2],[2,0]]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(Graph::from_json(&a.to_json()).unwrap(), a);
        assert!(Graph::from_edge_list("0 x").is_err());
        assert!(Graph::from_edges(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn unknown_vertex() {
        assert!(matches!(Graph::path(3).neighbors(&7), Err(Error::UnknownPoint { .. })));
    }

    #[test]
    fn free_group_balls() {
        let f2 = FreeGroup::new(2);
        for r in 0..5u32 {
            assert_eq!(ball(&f2, &f2.origin(), r as u64).unwrap().len() as u64, 2 * 3u64.pow(r) - 1);
        }
    }

    #[test]
    fn tree_neighbors_are_reduced() {
        let t = RegularTree::new(3);
        let n = t.neighbors(&vec![0, 1]).unwrap();
        assert_eq!(n, vec![vec![0], vec![0, 1, 0], vec![0, 1, 2]]);
    }
}
