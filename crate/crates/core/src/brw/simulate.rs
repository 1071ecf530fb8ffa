use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::offspring::{multinomial, OffspringDist};
use crate::error::{Error, Result};
use crate::graph::VertexAddr;
use crate::kernel::Kernel;
use crate::rng::generation_rng;

/// Which generation states a run keeps besides the last one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Retention {
    #[default]
    FinalOnly,
    All,
    /// Every `k`-th generation, starting from generation 0.
    Every(u32),
}

impl Retention {
    fn keeps(self, generation: u32) -> bool {
        match self {
            Retention::FinalOnly => false,
            Retention::All => true,
            Retention::Every(k) => k > 0 && generation % k == 0,
        }
    }
}

/// Particle counts per occupied vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenerationState {
    pub generation: u32,
    pub counts: BTreeMap<VertexAddr, u64>,
    pub total: u64,
}

impl GenerationState {
    pub fn single(v: VertexAddr) -> Self {
        GenerationState {
            generation: 0,
            counts: BTreeMap::from([(v, 1)]),
            total: 1,
        }
    }

    pub fn count(&self, v: &VertexAddr) -> u64 {
        self.counts.get(v).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub origin: VertexAddr,
    pub seed: u64,
    pub replication: u64,
    /// Visited vertices with the first generation they were occupied.
    pub visited: BTreeMap<VertexAddr, u32>,
    /// Traversed undirected edges, endpoints in ascending order.
    pub edges: BTreeSet<(VertexAddr, VertexAddr)>,
    /// Total population per generation.
    pub populations: Vec<u64>,
    pub retention: Retention,
    /// Retained states (see `retention`); the last state is always in `last`.
    pub states: Vec<GenerationState>,
    pub last: GenerationState,
    pub truncated: bool,
    pub color: Option<String>,
}

impl TraceRecord {
    pub fn generations(&self) -> u32 {
        self.last.generation
    }

    /// The state of generation `n`, if it was retained.
    pub fn state(&self, n: u32) -> Option<&GenerationState> {
        if self.last.generation == n {
            return Some(&self.last);
        }
        self.states.iter().find(|s| s.generation == n)
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub kernel: Kernel,
    pub offspring: OffspringDist,
    pub generations: u32,
    pub seed: u64,
    pub replication: u64,
    /// Defaults to the graph origin.
    pub start: Option<VertexAddr>,
    pub population_cap: u64,
    /// Accept a cap below the expected final population `m^generations`.
    pub allow_small_cap: bool,
    pub retention: Retention,
}

impl RunConfig {
    pub fn new(kernel: Kernel, offspring: OffspringDist, generations: u32, seed: u64) -> Self {
        RunConfig {
            kernel,
            offspring,
            generations,
            seed,
            replication: 0,
            start: None,
            population_cap: 5_000_000,
            allow_small_cap: false,
            retention: Retention::FinalOnly,
        }
    }

    pub fn expected_population(&self) -> f64 {
        self.offspring.mean().powf(f64::from(self.generations))
    }

    pub fn validate(&self) -> Result<()> {
        if self.generations == 0 {
            return Err(Error::config("generation budget must be at least 1"));
        }
        if let Some(v) = &self.start {
            self.kernel.graph().validate(v)?;
        }
        if !self.allow_small_cap && (self.population_cap as f64) < self.expected_population() {
            return Err(Error::config(format!(
                "population cap {} is below the expected final population {:.3e}",
                self.population_cap,
                self.expected_population()
            )));
        }
        Ok(())
    }
}

/// Advances `current` by one generation, reporting every move as
/// `(from, to, count)`. Returns `None` once the population would exceed `cap`.
pub(crate) fn advance<R: rand::Rng + ?Sized>(
    kernel: &Kernel,
    offspring: &OffspringDist,
    current: &GenerationState,
    cap: u64,
    rng: &mut R,
    mut on_move: impl FnMut(&VertexAddr, &VertexAddr, u64),
) -> Result<Option<GenerationState>> {
    let mut next: BTreeMap<VertexAddr, u64> = BTreeMap::new();
    let mut total = 0u64;
    let bounded = kernel.graph().regular_degree().is_none();
    for (v, &c) in &current.counts {
        if bounded {
            kernel.graph().validate(v).map_err(|e| {
                Error::Resource(format!("particles reached {v}, outside the addressable part of the graph ({e})"))
            })?;
        }
        let children = offspring.sample_total(c, rng);
        total += children;
        if total > cap {
            return Ok(None);
        }
        let row_len = kernel.graph().degree_unchecked(v) + 1;
        if children < row_len {
            for _ in 0..children {
                let u = kernel.sample_step(v, rng);
                on_move(v, &u, 1);
                *next.entry(u).or_insert(0) += 1;
            }
        } else {
            let row = kernel.row::<f64>(v)?;
            let probs: Vec<f64> = row.entries.iter().map(|(_, p)| *p).collect();
            let counts = multinomial(children, &probs, rng);
            for ((u, _), k) in row.entries.into_iter().zip(counts) {
                if k > 0 {
                    on_move(v, &u, k);
                    *next.entry(u).or_insert(0) += k;
                }
            }
        }
    }
    Ok(Some(GenerationState {
        generation: current.generation + 1,
        counts: next,
        total,
    }))
}

/// Runs one branching random walk with vertex-aggregated populations.
///
/// Each generation, the offspring of the `c` particles at a vertex are drawn in
/// one go and sent to the kernel targets by a multinomial draw. When there are
/// fewer offspring than targets, each offspring steps individually instead.
pub fn simulate_brw(cfg: &RunConfig) -> Result<TraceRecord> {
    cfg.validate()?;
    let kernel = &cfg.kernel;
    let origin = cfg.start.clone().unwrap_or_else(|| kernel.origin());
    let mut trace = TraceRecord {
        origin: origin.clone(),
        seed: cfg.seed,
        replication: cfg.replication,
        visited: BTreeMap::from([(origin.clone(), 0)]),
        edges: BTreeSet::new(),
        populations: vec![1],
        retention: cfg.retention,
        states: Vec::new(),
        last: GenerationState::single(origin),
        truncated: false,
        color: None,
    };
    for generation in 1..=cfg.generations {
        let mut rng = generation_rng(cfg.seed, cfg.replication, generation);
        let (visited, edges) = (&mut trace.visited, &mut trace.edges);
        let next = advance(kernel, &cfg.offspring, &trace.last, cfg.population_cap, &mut rng, |v, u, _| {
            if u != v {
                let edge = if v < u { (v.clone(), u.clone()) } else { (u.clone(), v.clone()) };
                edges.insert(edge);
            }
            visited.entry(u.clone()).or_insert(generation);
        })?;
        let Some(state) = next else {
            trace.truncated = true;
            return Err(Error::Truncated {
                generation: trace.last.generation,
                trace: Box::new(trace),
            });
        };
        trace.populations.push(state.total);
        let previous = std::mem::replace(&mut trace.last, state);
        if cfg.retention.keeps(previous.generation) {
            trace.states.push(previous);
        }
    }
    Ok(trace)
}
