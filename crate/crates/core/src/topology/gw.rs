use rayon::prelude::*;
use serde::Serialize;

use crate::brw::{advance, binomial, simulate_brw, GenerationState, OffspringDist, Retention, RunConfig};
use crate::error::{Error, Result};
use crate::graph::{GraphFamily, SpineEmbedding, VertexAddr};
use crate::kernel::{build_kernel, Kernel, KernelSpec};
use crate::rng::{derive_seed, generation_rng};
use crate::spectral::{build_chain, distributions, numerical_rho, peel_lazy, product_factors, ChainKind, DEFAULT_SUPPORT_CAP};

/// The copy of `Z` whose visits drive the embedded Galton-Watson process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddedLine {
    /// All vertices whose coordinate `factor` equals `vertex`.
    Fiber { factor: usize, vertex: VertexAddr },
    /// The fiber over `vertex`, further restricted to the spine of the height
    /// embedding in coordinate `spine_factor`.
    SpineFiber {
        factor: usize,
        vertex: VertexAddr,
        spine_factor: usize,
    },
}

impl EmbeddedLine {
    pub fn contains(&self, v: &VertexAddr) -> bool {
        match self {
            EmbeddedLine::Fiber { factor, vertex } => v.coordinate(*factor) == Some(vertex),
            EmbeddedLine::SpineFiber {
                factor,
                vertex,
                spine_factor,
            } => {
                v.coordinate(*factor) == Some(vertex)
                    && matches!(v.coordinate(*spine_factor), Some(VertexAddr::Word(w)) if SpineEmbedding.spine_label(w).is_some())
            }
        }
    }

    /// A vertex of the line next to the graph origin.
    fn base_point(&self, graph: &GraphFamily) -> VertexAddr {
        let VertexAddr::Tuple(mut cs) = graph.origin() else {
            return graph.origin();
        };
        let (EmbeddedLine::Fiber { factor, vertex } | EmbeddedLine::SpineFiber { factor, vertex, .. }) = self;
        cs[*factor] = vertex.clone();
        VertexAddr::Tuple(cs)
    }
}

impl std::fmt::Display for EmbeddedLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EmbeddedLine::Fiber { factor, vertex } => write!(f, "fiber({factor}, {vertex})"),
            EmbeddedLine::SpineFiber {
                factor,
                vertex,
                spine_factor,
            } => write!(f, "spine-fiber({factor}, {vertex}, {spine_factor})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GwConfig {
    pub kernel: Kernel,
    pub offspring: OffspringDist,
    pub line: EmbeddedLine,
    pub lag: usize,
    /// The flagged particle is the first to sit on the line in generations
    /// `generations / 4 ..= generations`.
    pub generations: u32,
    pub replications: usize,
    /// Number of lags `Y_1, ..., Y_J` followed per replication.
    pub observed_lags: usize,
    pub seed: u64,
    pub population_cap: u64,
    /// `None` picks the lumped route whenever it applies.
    pub route: Option<GwRoute>,
}

impl GwConfig {
    pub fn new(kernel: Kernel, offspring: OffspringDist, line: EmbeddedLine, lag: usize, replications: usize, seed: u64) -> Self {
        GwConfig {
            kernel,
            offspring,
            line,
            lag,
            generations: 40,
            replications,
            observed_lags: 1,
            seed,
            population_cap: 1 << 40,
            route: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GwRoute {
    /// Particles are tracked by their tree distance to the fiber only.
    Lumped,
    Vertex,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddedGWStats {
    pub lag: usize,
    pub line: String,
    pub route: GwRoute,
    pub replications: usize,
    /// Replications discarded because no particle reached the line in the search window.
    pub search_failures: usize,
    /// `Y_0 = 1, Y_1, ...` per replication, cut after the first zero.
    pub sequences: Vec<Vec<u64>>,
    pub mean_y1: f64,
    pub std_error_y1: f64,
    /// `m^k p_k`, the mean of `Y_1` by the many-to-one identity.
    pub reference: f64,
    /// `rho^(-k) p_k`, which equals `reference` for a critical law.
    pub critical_reference: f64,
    pub rho: f64,
    pub p_k: f64,
    pub z: f64,
    /// Fraction of replications with every observed `Y_j >= 1`.
    pub survival_fraction: f64,
    /// 99% Wilson interval for the survival fraction.
    pub survival_interval: (f64, f64),
    /// `1 - s` for the smallest fixed point `s` of the empirical offspring law of `Y_1`.
    pub fitted_survival: f64,
}

/// Large `Y_j` are treated as survival to keep counts bounded.
const SURVIVAL_SATURATION: u64 = 1_000_000;

/// Projection of the walk onto the tree coordinate of the fiber, when that
/// coordinate is a (lazy) simple walk on a regular tree.
fn lumped_projection(kernel: &Kernel, line: &EmbeddedLine) -> Option<(Kernel, usize)> {
    let EmbeddedLine::Fiber { factor, vertex } = line else {
        return None;
    };
    let factors = product_factors(kernel)?;
    let (fk, alpha) = factors.get(*factor)?;
    let (stay, base) = peel_lazy(fk.spec());
    let GraphFamily::HomTree { degree } = fk.graph() else {
        return None;
    };
    if *base != KernelSpec::Simple {
        return None;
    }
    let moving = *alpha * (num_rational::Rational64::from_integer(1) - stay);
    let projected = build_kernel(
        KernelSpec::lazy(KernelSpec::Simple, num_rational::Rational64::from_integer(1) - moving),
        GraphFamily::hom_tree(*degree).ok()?,
    )
    .ok()?;
    let origin = kernel.origin();
    let start = fk.graph().distance(origin.coordinate(*factor)?, vertex).ok()? as usize;
    Some((projected, start))
}

struct LumpedWalk {
    rows: Vec<Vec<(usize, f64)>>,
}

impl LumpedWalk {
    /// One generation; states beyond `limit` are dropped.
    fn step<R: rand::Rng>(&self, mu: &OffspringDist, counts: &[u64], limit: usize, cap: u64, rng: &mut R) -> Option<Vec<u64>> {
        let mut next = vec![0u64; counts.len()];
        let mut total = 0u64;
        for (d, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let children = mu.sample_total(c, rng);
            total = total.checked_add(children)?;
            if total > cap {
                return None;
            }
            let mut left = children;
            let mut mass = 1.0;
            let row = &self.rows[d];
            for (i, &(u, p)) in row.iter().enumerate() {
                let k = if i + 1 == row.len() {
                    left
                } else {
                    binomial(left, (p / mass).min(1.0), rng)
                };
                left -= k;
                mass -= p;
                if u <= limit {
                    next[u] += k;
                }
                if left == 0 {
                    break;
                }
            }
        }
        Some(next)
    }
}

fn gw_sequence_lumped(cfg: &GwConfig, walk: &LumpedWalk, start: usize, rep: u64) -> Result<Option<Vec<u64>>> {
    let budget = cfg.generations as usize;
    let reach = walk.rows.len() - 1;
    let mut counts = vec![0u64; reach + 1];
    counts[start] = 1;
    let mut found = start == 0 && budget / 4 == 0;
    for t in 1..=budget {
        if found {
            break;
        }
        let mut rng = generation_rng(cfg.seed, rep, t as u32);
        counts = walk
            .step(&cfg.offspring, &counts, reach, cfg.population_cap, &mut rng)
            .ok_or_else(|| Error::Resource(format!("population cap exceeded while searching, generation {t}")))?;
        found = t >= budget / 4 && counts[0] > 0;
    }
    if !found {
        return Ok(None);
    }
    let k = cfg.lag;
    let mut seq = vec![1u64];
    for j in 1..=cfg.observed_lags {
        let lag_seed = derive_seed(cfg.seed, j as u64);
        let mut counts = vec![0u64; k + 1];
        counts[0] = *seq.last().expect("non-empty");
        for t in 1..=k {
            let mut rng = generation_rng(lag_seed, rep, t as u32);
            counts = walk
                .step(&cfg.offspring, &counts, k - t, u64::MAX / 4, &mut rng)
                .ok_or_else(|| Error::Resource("descendant count overflow".into()))?;
        }
        seq.push(counts[0]);
        if counts[0] == 0 || counts[0] >= SURVIVAL_SATURATION {
            break;
        }
    }
    Ok(Some(seq))
}

fn gw_sequence_vertex(cfg: &GwConfig, rep: u64) -> Result<Option<Vec<u64>>> {
    let mut run = RunConfig::new(cfg.kernel.clone(), cfg.offspring.clone(), cfg.generations.max(1), cfg.seed);
    run.replication = rep;
    run.retention = Retention::All;
    run.population_cap = cfg.population_cap;
    run.allow_small_cap = true;
    let trace = simulate_brw(&run).map_err(|e| match e {
        Error::Truncated { generation, .. } => {
            Error::Resource(format!("population cap exceeded while searching, generation {generation}"))
        }
        other => other,
    })?;
    let flagged = (cfg.generations / 4..=cfg.generations)
        .filter_map(|n| trace.state(n))
        .find_map(|s| s.counts.keys().find(|v| cfg.line.contains(v)).cloned());
    let Some(flagged) = flagged else {
        return Ok(None);
    };
    let mut seq = vec![1u64];
    let mut state = GenerationState::single(flagged);
    for j in 1..=cfg.observed_lags {
        let lag_seed = derive_seed(cfg.seed, j as u64);
        for t in 1..=cfg.lag {
            let mut rng = generation_rng(lag_seed, rep, t as u32);
            state = advance(&cfg.kernel, &cfg.offspring, &state, cfg.population_cap, &mut rng, |_, _, _| {})?
                .ok_or_else(|| Error::Resource("population cap exceeded while following descendants".into()))?;
        }
        state.counts.retain(|v, _| cfg.line.contains(v));
        state.total = state.counts.values().sum();
        state.generation = 0;
        seq.push(state.total);
        if state.total == 0 || state.total >= SURVIVAL_SATURATION {
            break;
        }
    }
    Ok(Some(seq))
}

fn wilson_99(successes: usize, n: usize) -> (f64, f64) {
    let z = 2.575_829_303_548_901;
    let (n, q) = (n as f64, successes as f64 / n as f64);
    let centre = (q + z * z / (2.0 * n)) / (1.0 + z * z / n);
    let half = z * (q * (1.0 - q) / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Smallest fixed point of the generating function of `law` (probabilities by count).
fn extinction_probability(law: &[f64]) -> f64 {
    let g = |s: f64| law.iter().rev().fold(0.0, |acc, p| acc * s + p);
    let mut s = 0.0;
    for _ in 0..100_000 {
        let next = g(s);
        if (next - s).abs() < 1e-15 {
            return next;
        }
        s = next;
    }
    s
}

/// Follows the descendants of one flagged particle on the line at lags
/// `k, 2k, ...` and compares the mean of `Y_1` with `rho^(-k) p_k`.
pub fn embedded_gw_stats(cfg: &GwConfig) -> Result<EmbeddedGWStats> {
    if cfg.lag == 0 || cfg.observed_lags == 0 || cfg.replications < 2 {
        return Err(Error::config("lag, observed lags and replications must be positive (replications >= 2)"));
    }
    let graph = cfg.kernel.graph();
    let base = cfg.line.base_point(graph);
    graph.validate(&base)?;
    let rho = numerical_rho(&cfg.kernel)?.rho;
    let lumped = match cfg.route {
        Some(GwRoute::Vertex) => None,
        Some(GwRoute::Lumped) => Some(
            lumped_projection(&cfg.kernel, &cfg.line)
                .ok_or_else(|| Error::config("the lumped route needs a fiber over a simple tree factor"))?,
        ),
        None => lumped_projection(&cfg.kernel, &cfg.line),
    };
    let (p_k, route, walk, start) = match &lumped {
        Some((projected, start)) => {
            let reach = (cfg.generations as usize + 1).max(cfg.lag + 1).max(*start + 1);
            let chain = build_chain::<f64>(projected, ChainKind::TreeDistance(match projected.graph() {
                GraphFamily::HomTree { degree } => *degree,
                _ => unreachable!(),
            }), reach as u64);
            let series = crate::spectral::return_series(projected, cfg.lag, crate::weight::ArithmeticMode::Float)?;
            (series.p(cfg.lag), GwRoute::Lumped, Some(LumpedWalk { rows: chain.rows }), *start)
        }
        None => {
            let dist = distributions::<f64>(&cfg.kernel, &base, cfg.lag, DEFAULT_SUPPORT_CAP)?;
            let p: f64 = dist[cfg.lag].iter().filter(|(v, _)| cfg.line.contains(v)).map(|(_, p)| p).sum();
            (p, GwRoute::Vertex, None, 0)
        }
    };

    let mut sequences = Vec::with_capacity(cfg.replications);
    let mut failures = 0usize;
    let mut next_rep = 0u64;
    while sequences.len() < cfg.replications {
        if next_rep as usize >= 4 * cfg.replications + 100 {
            return Err(Error::SampleFailure(format!(
                "only {} of {next_rep} replications reached {} in the search window",
                sequences.len(),
                cfg.line
            )));
        }
        let batch = (cfg.replications - sequences.len()).max(16) as u64;
        let results = (next_rep..next_rep + batch)
            .into_par_iter()
            .map(|rep| match &walk {
                Some(w) => gw_sequence_lumped(cfg, w, start, rep),
                None => gw_sequence_vertex(cfg, rep),
            })
            .collect::<Result<Vec<_>>>()?;
        next_rep += batch;
        for r in results {
            match r {
                Some(seq) if sequences.len() < cfg.replications => sequences.push(seq),
                Some(_) => {}
                None => failures += 1,
            }
        }
    }

    let n = sequences.len() as f64;
    let y1: Vec<f64> = sequences.iter().map(|s| s[1] as f64).collect();
    let mean = y1.iter().sum::<f64>() / n;
    let var = y1.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    let reference = p_k * cfg.offspring.mean().powi(cfg.lag as i32);
    let critical_reference = p_k * (-(cfg.lag as f64) * rho.ln()).exp();
    let survivors = sequences.iter().filter(|s| s.iter().all(|&y| y >= 1)).count();
    let max_y = sequences.iter().map(|s| s[1]).max().unwrap_or(0) as usize;
    let mut law = vec![0.0; max_y + 1];
    for s in &sequences {
        law[s[1] as usize] += 1.0 / n;
    }
    Ok(EmbeddedGWStats {
        lag: cfg.lag,
        line: cfg.line.to_string(),
        route,
        replications: sequences.len(),
        search_failures: failures,
        mean_y1: mean,
        std_error_y1: se,
        reference,
        critical_reference,
        rho,
        p_k,
        z: if se > 0.0 { (mean - reference) / se } else { f64::INFINITY },
        survival_fraction: survivors as f64 / n,
        survival_interval: wilson_99(survivors, sequences.len()),
        fitted_survival: 1.0 - extinction_probability(&law),
        sequences,
    })
}
