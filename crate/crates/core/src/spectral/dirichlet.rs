//! Spectral radius of the kernel restricted to a ball with absorbing boundary.
//!
//! Power iteration runs on `(I + Q) / 2`, whose Perron root `(1 + rho_R) / 2`
//! strictly dominates even for bipartite graphs. Collatz-Wielandt quotients of
//! the positive iterate bracket the root, which gives a certified gap.

use serde::Serialize;

use super::series::{build_chain, chain_kind};
use crate::error::Result;
use crate::kernel::Kernel;
use crate::FixedMap;

/// Default cap on ball size for the vertex-level route.
pub const DEFAULT_BALL_CAP: usize = 250_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirichletRoute {
    /// Radial (or type, level) lumping; exact for the Perron root.
    Quotient,
    /// Breadth-first enumeration of the ball.
    Ball,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletEstimate {
    pub radius: u64,
    pub rho: f64,
    /// Collatz-Wielandt bracket: `lower <= rho_R <= upper`.
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    /// False when the iteration budget ran out before the bracket closed.
    pub converged: bool,
    pub route: DirichletRoute,
    pub states: usize,
}

/// Tolerance on the width of the bracket.
pub const DIRICHLET_TOLERANCE: f64 = 1e-11;

fn power_iteration(rows: &[Vec<(usize, f64)>], max_iterations: usize) -> (f64, f64, f64, usize, bool) {
    let n = rows.len();
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut it = 0;
    while it < max_iterations {
        it += 1;
        for (v, row) in rows.iter().enumerate() {
            let mut acc = x[v];
            for &(u, p) in row {
                acc += p * x[u];
            }
            y[v] = 0.5 * acc;
        }
        lo = f64::INFINITY;
        hi = 0.0;
        for v in 0..n {
            let q = y[v] / x[v];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        for v in 0..n {
            x[v] = y[v] / norm;
        }
        if 2.0 * (hi - lo) < DIRICHLET_TOLERANCE {
            break;
        }
    }
    let (lower, upper) = (2.0 * lo - 1.0, 2.0 * hi - 1.0);
    (0.5 * (lower + upper), lower, upper, it, upper - lower < DIRICHLET_TOLERANCE)
}

/// `rho_R` for the ball of radius `radius` about the origin.
pub fn dirichlet_rho(kernel: &Kernel, radius: u64, max_iterations: usize) -> Result<DirichletEstimate> {
    dirichlet_rho_capped(kernel, radius, max_iterations, DEFAULT_BALL_CAP)
}

pub fn dirichlet_rho_capped(kernel: &Kernel, radius: u64, max_iterations: usize, cap: usize) -> Result<DirichletEstimate> {
    let (rows, route) = match chain_kind(kernel, &kernel.origin()) {
        Some(kind) => {
            let chain = build_chain::<f64>(kernel, kind, radius.max(1));
            let keep: Vec<usize> = (0..chain.rows.len()).filter(|&i| chain.level[i] <= radius).collect();
            let mut index = vec![usize::MAX; chain.rows.len()];
            for (new, &old) in keep.iter().enumerate() {
                index[old] = new;
            }
            let rows = keep
                .iter()
                .map(|&old| {
                    chain.rows[old]
                        .iter()
                        .filter(|(u, _)| index[*u] != usize::MAX)
                        .map(|&(u, p)| (index[u], p))
                        .collect()
                })
                .collect();
            (rows, DirichletRoute::Quotient)
        }
        None => {
            let ball = kernel.graph().ball(radius, cap)?;
            let index: FixedMap<_, usize> = ball.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
            let rows = ball
                .iter()
                .map(|v| {
                    Ok(kernel
                        .row::<f64>(v)?
                        .entries
                        .into_iter()
                        .filter_map(|(u, p)| index.get(&u).map(|&i| (i, p)))
                        .collect())
                })
                .collect::<Result<Vec<Vec<(usize, f64)>>>>()?;
            (rows, DirichletRoute::Ball)
        }
    };
    let states = rows.len();
    let (rho, lower, upper, iterations, converged) = power_iteration(&rows, max_iterations);
    Ok(DirichletEstimate {
        radius,
        rho,
        lower,
        upper,
        iterations,
        converged,
        route,
        states,
    })
}
