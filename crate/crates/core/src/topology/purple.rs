use std::collections::BTreeSet;

use serde::Serialize;

use crate::brw::{simulate_brw, OffspringDist, RunConfig, TraceRecord};
use crate::error::{Error, Result};
use crate::graph::VertexAddr;
use crate::kernel::Kernel;
use crate::rng::derive_seed;

/// Vertices visited by two independent runs, red and blue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColoredTrace {
    pub red: BTreeSet<String>,
    pub blue: BTreeSet<String>,
    pub purple: BTreeSet<String>,
    /// Entry `h` counts vertices visited by both colours within `h` generations.
    pub purple_by_horizon: Vec<u64>,
    pub truncated: bool,
}

impl ColoredTrace {
    pub fn purple_at(&self, horizon: u32) -> u64 {
        let last = self.purple_by_horizon.len() - 1;
        self.purple_by_horizon[(horizon as usize).min(last)]
    }
}

fn run_or_partial(cfg: &RunConfig) -> Result<TraceRecord> {
    match simulate_brw(cfg) {
        Err(Error::Truncated { trace, .. }) => Ok(*trace),
        other => other,
    }
}

/// Runs independent branching random walks from `red` and `blue` and colours
/// the vertices each one visits.
pub fn purple_experiment(
    kernel: &Kernel,
    offspring: &OffspringDist,
    red: &VertexAddr,
    blue: &VertexAddr,
    generations: u32,
    seed: u64,
    population_cap: u64,
) -> Result<ColoredTrace> {
    let run = |start: &VertexAddr, label: u64| {
        let mut cfg = RunConfig::new(kernel.clone(), offspring.clone(), generations, derive_seed(seed, label));
        cfg.start = Some(start.clone());
        cfg.population_cap = population_cap;
        cfg.allow_small_cap = true;
        run_or_partial(&cfg)
    };
    let (r, b) = (run(red, 0)?, run(blue, 1)?);
    let mut by_horizon = vec![0u64; generations as usize + 1];
    let mut purple = BTreeSet::new();
    for (v, &tr) in &r.visited {
        if let Some(&tb) = b.visited.get(v) {
            purple.insert(v.to_string());
            by_horizon[tr.max(tb) as usize] += 1;
        }
    }
    for h in 1..by_horizon.len() {
        by_horizon[h] += by_horizon[h - 1];
    }
    Ok(ColoredTrace {
        red: r.visited.keys().map(|v| v.to_string()).collect(),
        blue: b.visited.keys().map(|v| v.to_string()).collect(),
        purple,
        purple_by_horizon: by_horizon,
        truncated: r.truncated || b.truncated,
    })
}
