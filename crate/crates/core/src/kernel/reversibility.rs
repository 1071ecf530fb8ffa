//! Exact degree-weighted detailed-balance check for simple and lazy-simple walks.
//!
//! The walk from every vertex of the ball `B(o, R)` is propagated exactly for
//! `n` steps. Paths that start and end in the ball never leave `B(o, R + n/2)`,
//! and vertices outside `B(o, R)` are lumped by the automorphisms fixing the
//! ball pointwise, which keeps the state space small on trees and the hammock.
//! Probabilities share the common denominator `L^t`, where `L` is the lcm of all
//! row denominators, so propagation is integer-only.

use std::ops::{AddAssign, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::Kernel;
use crate::error::{Error, Result};
use crate::graph::VertexAddr;
use crate::FixedMap;

const REGION_CAP: usize = 400_000;

/// Outcome of [`reversibility_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct ReversibilityReport {
    /// Maximum of `P_i(X_m = j) / P_j(X_m = i)` over tested pairs with a positive denominator.
    pub max_ratio: BigRational,
    pub pairs_checked: u64,
    pub ball_size: usize,
    pub region_size: usize,
}

impl ReversibilityReport {
    pub fn max_ratio_f64(&self) -> f64 {
        self.max_ratio.to_f64().unwrap_or(f64::NAN)
    }
}

struct Region {
    states: Vec<VertexAddr>,
    distance: Vec<u64>,
    degree: Vec<u64>,
    /// Row of each state as (target index, probability times `L`).
    rows: Vec<Vec<(usize, BigInt)>>,
    ball_size: usize,
    lcm: BigInt,
}

fn build_region(kernel: &Kernel, radius: u64, outer: u64) -> Result<Region> {
    let g = kernel.graph();
    let mut index: FixedMap<VertexAddr, usize> = FixedMap::default();
    let mut states = vec![g.origin()];
    index.insert(g.origin(), 0);
    let mut raw_rows: Vec<Vec<(usize, BigRational)>> = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let v = states[cursor].clone();
        cursor += 1;
        let row = kernel.row::<BigRational>(&v)?;
        let mut lumped: Vec<(usize, BigRational)> = Vec::new();
        for (u, p) in row.entries {
            if g.ball_distance(&u)? > outer {
                continue;
            }
            let rep = g.collapse_beyond(&u, radius);
            let idx = match index.get(&rep) {
                Some(&i) => i,
                None => {
                    if states.len() >= REGION_CAP {
                        return Err(Error::Resource(format!(
                            "reversibility region exceeds {REGION_CAP} lumped states"
                        )));
                    }
                    index.insert(rep.clone(), states.len());
                    states.push(rep);
                    states.len() - 1
                }
            };
            match lumped.iter_mut().find(|(i, _)| *i == idx) {
                Some((_, q)) => *q += p,
                None => lumped.push((idx, p)),
            }
        }
        raw_rows.push(lumped);
    }

    // Ball vertices first, so sources and targets are a prefix.
    let distance: Vec<u64> = states.iter().map(|v| g.ball_distance(v)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by_key(|&i| (distance[i] > radius, i));
    let mut position = vec![0; states.len()];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }
    let lcm = raw_rows
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
    let rows = order
        .iter()
        .map(|&old| {
            raw_rows[old]
                .iter()
                .map(|(t, p)| {
                    let scaled = p * BigRational::from_integer(lcm.clone());
                    debug_assert!(scaled.is_integer());
                    (position[*t], scaled.to_integer())
                })
                .collect()
        })
        .collect();
    let states: Vec<VertexAddr> = order.iter().map(|&i| states[i].clone()).collect();
    let degree = states.iter().map(|v| g.degree(v)).collect::<Result<_>>()?;
    let distance: Vec<u64> = order.iter().map(|&i| distance[i]).collect();
    let ball_size = distance.iter().take_while(|&&d| d <= radius).count();
    Ok(Region {
        states,
        distance,
        degree,
        rows,
        ball_size,
        lcm,
    })
}

/// Runs the walk from each ball vertex; `on_step(source, m, values at ball targets)`.
fn propagate<T, F>(region: &Region, rows: &[Vec<(usize, T)>], horizon: u32, radius: u64, mut on_step: F) -> Result<()>
where
    T: Clone + Zero + One + AddAssign,
    for<'a> &'a T: Mul<&'a T, Output = T>,
    F: FnMut(usize, u32, &[T]) -> Result<()>,
{
    let n = region.states.len();
    let s = region.ball_size;
    for src in 0..s {
        let mut cur = vec![T::zero(); n];
        let mut active = vec![src];
        cur[src] = T::one();
        on_step(src, 0, &cur[..s])?;
        for m in 1..=horizon {
            let limit = radius + u64::from(horizon - m);
            let mut next = vec![T::zero(); n];
            let mut next_active = Vec::new();
            for &v in &active {
                let mass = &cur[v];
                for (u, c) in &rows[v] {
                    if region.distance[*u] > limit {
                        continue;
                    }
                    if next[*u].is_zero() {
                        next_active.push(*u);
                    }
                    next[*u] += mass * c;
                }
            }
            next_active.sort_unstable();
            next_active.dedup();
            on_step(src, m, &next[..s])?;
            cur = next;
            active = next_active;
        }
    }
    Ok(())
}

trait Exact: Clone + Zero + One + AddAssign + Into<BigInt> {}
impl Exact for u128 {}
impl Exact for BigInt {}

fn check_with<T>(region: &Region, rows: Vec<Vec<(usize, T)>>, horizon: u32, radius: u64) -> Result<ReversibilityReport>
where
    T: Exact,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let s = region.ball_size;
    let per = horizon as usize + 1;
    // stash[j] holds P_i(X_m = j) for i < j, laid out as i * per + m.
    let mut stash: Vec<Vec<T>> = (0..s).map(|j| Vec::with_capacity(j * per)).collect();
    let mut max_ratio = BigRational::one();
    let mut pairs = 0u64;
    let mut current: Vec<Vec<T>> = Vec::new();
    let mut current_src = usize::MAX;
    let mut finish = |src: usize, values: &Vec<Vec<T>>, stash: &mut Vec<Vec<T>>| -> Result<()> {
        let earlier = std::mem::take(&mut stash[src]);
        for i in 0..src {
            for m in 0..per {
                let forward: BigInt = earlier[i * per + m].clone().into();
                let backward: BigInt = values[m][i].clone().into();
                let lhs = BigInt::from(region.degree[i]) * &forward;
                let rhs = BigInt::from(region.degree[src]) * &backward;
                if lhs != rhs {
                    return Err(Error::Consistency(format!(
                        "detailed balance fails between {} and {} at step {m}",
                        region.states[i], region.states[src]
                    )));
                }
                pairs += 1;
                if !forward.is_zero() {
                    let r = BigRational::new(forward.clone(), backward.clone());
                    let r = if r < BigRational::one() { r.recip() } else { r };
                    if r > max_ratio {
                        max_ratio = r;
                    }
                }
            }
        }
        for j in src + 1..s {
            for m in 0..per {
                stash[j].push(values[m][j].clone());
            }
        }
        Ok(())
    };
    propagate(region, &rows, horizon, radius, |src, m, vals| {
        if src != current_src {
            current_src = src;
            current.clear();
        }
        current.push(vals.to_vec());
        if m == horizon {
            finish(src, &current, &mut stash)?;
        }
        Ok(())
    })?;
    Ok(ReversibilityReport {
        max_ratio,
        pairs_checked: pairs,
        ball_size: s,
        region_size: region.states.len(),
    })
}

/// Verifies `deg(i) P_i(X_m = j) = deg(j) P_j(X_m = i)` exactly for all `i, j`
/// in the ball of `radius` and all `m <= horizon`, returning the largest ratio
/// `P_i(X_m = j) / P_j(X_m = i)`.
pub fn reversibility_check(kernel: &Kernel, horizon: u32, radius: u64) -> Result<ReversibilityReport> {
    if !kernel.spec().is_lazy_simple() {
        return Err(Error::config("reversibility check needs a simple or lazy simple kernel"));
    }
    let region = build_region(kernel, radius, radius + u64::from(horizon / 2))?;
    let bits = region.lcm.bits() * u64::from(horizon.max(1)) + 64;
    if bits < 127 {
        let rows = region
            .rows
            .iter()
            .map(|row| row.iter().map(|(t, c)| (*t, c.to_u128().expect("fits"))).collect())
            .collect();
        check_with::<u128>(&region, rows, horizon, radius)
    } else {
        let rows = region.rows.clone();
        check_with::<BigInt>(&region, rows, horizon, radius)
    }
}

#[cfg(test)]
mod tests {
    use num_rational::Rational64;

    use super::*;
    use crate::graph::GraphFamily;
    use crate::kernel::{build_kernel, KernelSpec};

    #[test]
    fn vertex_transitive_tree_has_unit_ratio() {
        let k = build_kernel(KernelSpec::Simple, GraphFamily::hom_tree(3).unwrap()).unwrap();
        let rep = reversibility_check(&k, 8, 3).unwrap();
        assert_eq!(rep.max_ratio, BigRational::one());
        let lazy = build_kernel(
            KernelSpec::lazy(KernelSpec::Simple, Rational64::new(1, 2)),
            GraphFamily::hom_tree(3).unwrap(),
        )
        .unwrap();
        assert_eq!(reversibility_check(&lazy, 8, 3).unwrap().max_ratio, BigRational::one());
    }

    #[test]
    fn hammock_root_to_spine_ratio_is_six_fifths() {
        let k = build_kernel(KernelSpec::Simple, GraphFamily::Hammock).unwrap();
        let rep = reversibility_check(&k, 8, 2).unwrap();
        // Spine degrees grow, so the maximum comes from a spine vertex; the
        // root/spine-0 pair itself is pinned by the identity being exact.
        assert!(rep.max_ratio >= BigRational::new(6.into(), 5.into()));
    }

    #[test]
    fn non_reversible_kernels_are_rejected() {
        let k = build_kernel(
            KernelSpec::BiasedLine { right: Rational64::new(7, 10) },
            GraphFamily::Line,
        )
        .unwrap();
        assert!(matches!(reversibility_check(&k, 4, 2), Err(Error::Config(_))));
    }
}
