use rayon::prelude::*;
use serde::Serialize;

use super::simulate::{simulate_brw, Retention, RunConfig};
use crate::error::{Error, Result};
use crate::graph::VertexAddr;
use crate::spectral::{distributions, DEFAULT_SUPPORT_CAP};

/// Monte Carlo mean of the particle count at `target` in generation `n`
/// against `m^n P(X_n = target)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManyToOneReport {
    pub n: u32,
    pub target: String,
    pub replications: u64,
    pub mc_mean: f64,
    pub std_error: f64,
    pub exact: f64,
    pub z: f64,
}

pub fn many_to_one_check(cfg: &RunConfig, n: u32, target: &VertexAddr, replications: u64) -> Result<ManyToOneReport> {
    let mut reports = many_to_one_batch(cfg, n, std::slice::from_ref(target), replications)?;
    Ok(reports.swap_remove(n as usize))
}

/// Checks every `n` in `0..=max_n` and every target on one set of runs.
///
/// Reports are ordered by `n`, then by target.
pub fn many_to_one_batch(
    cfg: &RunConfig,
    max_n: u32,
    targets: &[VertexAddr],
    replications: u64,
) -> Result<Vec<ManyToOneReport>> {
    if replications < 2 {
        return Err(Error::config("many-to-one needs at least two replications"));
    }
    let kernel = &cfg.kernel;
    for t in targets {
        kernel.graph().validate(t)?;
    }
    let start = cfg.start.clone().unwrap_or_else(|| kernel.origin());
    let cells = (max_n as usize + 1) * targets.len();
    let mut run = cfg.clone();
    run.generations = max_n.max(1);
    run.retention = Retention::All;

    let sums = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut cfg = run.clone();
            cfg.replication = rep;
            let trace = simulate_brw(&cfg)?;
            let mut cell = vec![(0u128, 0u128); cells];
            for n in 0..=max_n {
                let state = trace.state(n).expect("all states retained");
                for (t, target) in targets.iter().enumerate() {
                    let c = u128::from(state.count(target));
                    cell[n as usize * targets.len() + t] = (c, c * c);
                }
            }
            Ok(cell)
        })
        .try_reduce(
            || vec![(0u128, 0u128); cells],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.0 += y.0;
                    x.1 += y.1;
                }
                Ok(a)
            },
        )?;

    let dists = distributions::<f64>(kernel, &start, max_n as usize, DEFAULT_SUPPORT_CAP)?;
    let m = cfg.offspring.mean();
    let r = replications as f64;
    let mut out = Vec::with_capacity(cells);
    for n in 0..=max_n {
        for (t, target) in targets.iter().enumerate() {
            let (s, ss) = sums[n as usize * targets.len() + t];
            let p = dists[n as usize].get(target).copied().unwrap_or(0.0);
            if p == 0.0 && s > 0 {
                return Err(Error::Consistency(format!(
                    "particles observed at {target} in generation {n}, which the walk cannot reach"
                )));
            }
            let exact = m.powi(n as i32) * p;
            let mean = s as f64 / r;
            let var = ((ss as f64 - r * mean * mean) / (r - 1.0)).max(0.0);
            let se = (var / r).sqrt();
            let z = if se > 0.0 {
                (mean - exact) / se
            } else if (mean - exact).abs() <= 1e-12 * exact.max(1.0) {
                0.0
            } else {
                f64::INFINITY
            };
            out.push(ManyToOneReport {
                n,
                target: target.to_string(),
                replications,
                mc_mean: mean,
                std_error: se,
                exact,
                z,
            });
        }
    }
    Ok(out)
}
