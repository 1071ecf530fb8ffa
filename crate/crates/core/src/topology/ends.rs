use std::collections::BTreeMap;

use serde::Serialize;

use crate::brw::TraceRecord;
use crate::error::{Error, Result};
use crate::graph::{GraphFamily, VertexAddr};

/// Far components of a trace that still carry live particles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndsProfile {
    pub radii: Vec<u64>,
    pub components: Vec<u64>,
    pub generations: u32,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
    }
}

/// For each radius `r`, removes the trace vertices within distance `r` of the
/// origin and counts the remaining components that contain a final particle.
pub fn ends_profile(graph: &GraphFamily, trace: &TraceRecord, radii: &[u64]) -> Result<EndsProfile> {
    if trace.truncated {
        return Err(Error::config("ends profile needs a completed run"));
    }
    let index: BTreeMap<&VertexAddr, usize> = trace.visited.keys().enumerate().map(|(i, v)| (v, i)).collect();
    let depth: Vec<u64> = trace
        .visited
        .keys()
        .map(|v| graph.ball_distance(v))
        .collect::<Result<_>>()?;
    let edges: Vec<(usize, usize)> = trace.edges.iter().map(|(a, b)| (index[a], index[b])).collect();
    let finals: Vec<usize> = trace
        .last
        .counts
        .keys()
        .map(|v| {
            index
                .get(v)
                .copied()
                .ok_or_else(|| Error::Consistency(format!("final particle at unvisited vertex {v}")))
        })
        .collect::<Result<_>>()?;

    let mut components = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut uf = UnionFind::new(depth.len());
        for &(a, b) in &edges {
            if depth[a] > r && depth[b] > r {
                uf.union(a, b);
            }
        }
        let mut roots: Vec<usize> = finals.iter().filter(|&&v| depth[v] > r).map(|&v| uf.find(v)).collect();
        roots.sort_unstable();
        roots.dedup();
        components.push(roots.len() as u64);
    }
    Ok(EndsProfile {
        radii: radii.to_vec(),
        components,
        generations: trace.generations(),
    })
}
