//! Return-probability series `p_n = P_o(X_n = o)`.
//!
//! Three exact routes, chosen automatically:
//!
//! * lumped chains: distance from the root on `T_d`, position on `Z`, and
//!   (type, level) on the hammock;
//! * products: the multinomial split of the step count over the factors;
//! * a sparse vertex-space dynamic program for everything else.
//!
//! Floating-point runs keep the state rescaled and track the scale in the log
//! domain, so horizons of several thousand steps do not underflow.

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GraphFamily, VertexAddr};
use crate::kernel::{build_kernel, Kernel, KernelSpec};
use crate::weight::{ArithmeticMode, Weight};
use crate::FixedMap;

/// Default bound on the support of the sparse dynamic program.
pub const DEFAULT_SUPPORT_CAP: usize = 2_000_000;

/// Sparse mapping vertex -> probability.
pub type DistVector<W> = FixedMap<VertexAddr, W>;

/// How a series was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesStrategy {
    QuotientChain,
    ProductConvolution,
    SparseDp,
}

/// Requested route; `Auto` prefers lumped chains and convolutions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StrategyChoice {
    #[default]
    Auto,
    SparseOnly,
}

/// Exact return probabilities `p_0..=p_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnSeries {
    pub origin: VertexAddr,
    /// `ln p_n`, `-inf` where `p_n = 0`.
    pub log_p: Vec<f64>,
    /// Exact values in rational mode.
    pub exact: Option<Vec<BigRational>>,
    /// Gcd of the times with positive return probability (1 or 2 in practice).
    pub period: u32,
    pub mode: ArithmeticMode,
    pub strategy: SeriesStrategy,
}

impl ReturnSeries {
    fn from_log(origin: VertexAddr, log_p: Vec<f64>, strategy: SeriesStrategy) -> Self {
        let period = period_of(&log_p);
        ReturnSeries {
            origin,
            log_p,
            exact: None,
            period,
            mode: ArithmeticMode::Float,
            strategy,
        }
    }

    fn from_exact(origin: VertexAddr, exact: Vec<BigRational>, strategy: SeriesStrategy) -> Self {
        let log_p: Vec<f64> = exact.iter().map(big_ln).collect();
        let mut s = Self::from_log(origin, log_p, strategy);
        s.exact = Some(exact);
        s.mode = ArithmeticMode::Rational;
        s
    }

    /// Largest index `N`.
    pub fn horizon(&self) -> usize {
        self.log_p.len() - 1
    }

    pub fn p(&self, n: usize) -> f64 {
        self.log_p[n].exp()
    }

    pub fn values(&self) -> Vec<f64> {
        self.log_p.iter().map(|l| l.exp()).collect()
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn period_of(log_p: &[f64]) -> u32 {
    let g = log_p
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| l.is_finite())
        .fold(0u32, |g, (n, _)| gcd(g, n as u32));
    g.max(1)
}

fn big_ln(x: &BigRational) -> f64 {
    if Zero::is_zero(x) {
        return f64::NEG_INFINITY;
    }
    // Scale by powers of two so the quotient stays representable.
    let shift = x.numer().bits() as i64 - x.denom().bits() as i64;
    let scaled = if shift > 0 {
        x / BigRational::from_integer(BigInt::one() << shift as usize)
    } else {
        x * BigRational::from_integer(BigInt::one() << (-shift) as usize)
    };
    ToPrimitive::to_f64(&scaled).unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

// ---------------------------------------------------------------------------
// Lumped chains

/// A finite lumped chain with a level per state; a state at level `l` is at
/// least `l` steps from the origin state.
pub(crate) struct LumpedChain<W> {
    pub rows: Vec<Vec<(usize, W)>>,
    pub level: Vec<u64>,
    pub origin: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ChainKind {
    /// Distance from the root of `T_d`.
    TreeDistance(u32),
    /// Position on `Z`, offset by the horizon.
    Line,
    /// Hammock (type, level): tree generation `g` at index `2g`, spine `k` at `2k + 1`.
    Hammock,
}

/// Splits `Lazy^*(base)` into its total stay mass and base kernel.
pub(crate) fn peel_lazy(spec: &KernelSpec) -> (Rational64, &KernelSpec) {
    match spec {
        KernelSpec::Lazy { base, stay } => {
            let (inner, b) = peel_lazy(base);
            (stay + (Rational64::one() - stay) * inner, b)
        }
        other => (Rational64::zero(), other),
    }
}

/// The lumped chain for `kernel` if one exists and `origin` is its root state.
pub(crate) fn chain_kind(kernel: &Kernel, origin: &VertexAddr) -> Option<ChainKind> {
    let (_, base) = peel_lazy(kernel.spec());
    match (kernel.graph(), base) {
        (GraphFamily::HomTree { degree }, KernelSpec::Simple) => Some(ChainKind::TreeDistance(*degree)),
        (GraphFamily::Line, KernelSpec::Simple | KernelSpec::BiasedLine { .. }) => Some(ChainKind::Line),
        (GraphFamily::Hammock, KernelSpec::Simple) if *origin == kernel.origin() => Some(ChainKind::Hammock),
        _ => None,
    }
}

/// Builds the chain covering every state within `reach` of the origin.
pub(crate) fn build_chain<W: Weight>(kernel: &Kernel, kind: ChainKind, reach: u64) -> LumpedChain<W> {
    let (stay, base) = peel_lazy(kernel.spec());
    let mut chain = match kind {
        ChainKind::TreeDistance(d) => {
            let d = u64::from(d);
            let n = reach as usize + 1;
            let rows = (0..n)
                .map(|r| {
                    let mut row = Vec::new();
                    if r == 0 {
                        row.push((1.min(n - 1), W::one()));
                    } else {
                        row.push((r - 1, W::from_frac(1, d)));
                        if r + 1 < n {
                            row.push((r + 1, W::from_frac(d - 1, d)));
                        }
                    }
                    row
                })
                .collect();
            LumpedChain {
                rows,
                level: (0..n as u64).collect(),
                origin: 0,
            }
        }
        ChainKind::Line => {
            let right = match base {
                KernelSpec::BiasedLine { right } => W::from_rational(right),
                _ => W::from_frac(1, 2),
            };
            let left = right.complement();
            let m = reach as i64;
            let n = (2 * m + 1) as usize;
            let rows = (0..n)
                .map(|i| {
                    let mut row = Vec::new();
                    if i + 1 < n {
                        row.push((i + 1, right.clone()));
                    }
                    if i > 0 {
                        row.push((i - 1, left.clone()));
                    }
                    row
                })
                .collect();
            LumpedChain {
                rows,
                level: (0..n as i64).map(|i| (i - m).unsigned_abs()).collect(),
                origin: m as usize,
            }
        }
        ChainKind::Hammock => hammock_chain(reach),
    };
    if !stay.is_zero() {
        let s = W::from_rational(&stay);
        let move_mass = s.complement();
        for (i, row) in chain.rows.iter_mut().enumerate() {
            for (_, p) in row.iter_mut() {
                *p = p.mul(&move_mass);
            }
            row.insert(0, (i, s.clone()));
        }
    }
    chain
}

fn hammock_chain<W: Weight>(reach: u64) -> LumpedChain<W> {
    // Tree generations 0..=reach, spines 0..reach (spine k sits at level k + 1).
    let gens = reach as usize + 1;
    let tree = |g: usize| 2 * g;
    let spine = |k: usize| 2 * k + 1;
    let n = 2 * gens;
    let mut rows = vec![Vec::new(); n];
    let mut level = vec![0u64; n];
    let push = |row: &mut Vec<(usize, W)>, target: usize, p: W| {
        if target < n {
            row.push((target, p));
        }
    };
    for g in 0..gens {
        level[tree(g)] = g as u64;
        let mut row = Vec::new();
        if g == 0 {
            push(&mut row, tree(1), W::from_frac(4, 5));
            push(&mut row, spine(0), W::from_frac(1, 5));
        } else {
            push(&mut row, tree(g - 1), W::from_frac(1, 7));
            push(&mut row, tree(g + 1), W::from_frac(4, 7));
            push(&mut row, spine(g - 1), W::from_frac(1, 7));
            push(&mut row, spine(g), W::from_frac(1, 7));
        }
        rows[tree(g)] = row;
    }
    for k in 0..gens {
        level[spine(k)] = k as u64 + 1;
        let mut row = Vec::new();
        if k == 0 {
            push(&mut row, spine(1), W::from_frac(1, 6));
            push(&mut row, tree(0), W::from_frac(1, 6));
            push(&mut row, tree(1), W::from_frac(4, 6));
        } else {
            let four_k = BigInt::one() << (2 * k);
            let deg = BigInt::from(2) + &four_k * 5;
            let one = BigInt::one();
            push(&mut row, spine(k + 1), W::from_big(&one, &deg));
            push(&mut row, spine(k - 1), W::from_big(&one, &deg));
            push(&mut row, tree(k), W::from_big(&four_k, &deg));
            push(&mut row, tree(k + 1), W::from_big(&(&four_k * 4), &deg));
        }
        rows[spine(k)] = row;
    }
    LumpedChain { rows, level, origin: 0 }
}

/// Return probabilities of a lumped chain, in the log domain.
pub(crate) fn chain_return_log(chain: &LumpedChain<f64>, horizon: usize) -> Vec<f64> {
    let n = chain.rows.len();
    let mut cur = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    cur[chain.origin] = 1.0;
    let mut log_scale = 0.0f64;
    let mut out = Vec::with_capacity(horizon + 1);
    out.push(0.0);
    for t in 1..=horizon {
        let limit = (horizon - t) as u64;
        next.iter_mut().for_each(|x| *x = 0.0);
        for (v, &mass) in cur.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(u, p) in &chain.rows[v] {
                if chain.level[u] <= limit {
                    next[u] += mass * p;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        let max = cur.iter().cloned().fold(0.0f64, f64::max);
        if max > 0.0 && !(1e-100..=1e100).contains(&max) {
            cur.iter_mut().for_each(|x| *x /= max);
            log_scale += max.ln();
        }
        let here = cur[chain.origin];
        out.push(if here > 0.0 { here.ln() + log_scale } else { f64::NEG_INFINITY });
    }
    out
}

pub(crate) fn chain_return_exact(chain: &LumpedChain<BigRational>, horizon: usize) -> Vec<BigRational> {
    let n = chain.rows.len();
    let mut cur = vec![<BigRational as Weight>::zero(); n];
    cur[chain.origin] = <BigRational as Weight>::one();
    let mut out = vec![<BigRational as Weight>::one()];
    for t in 1..=horizon {
        let limit = (horizon - t) as u64;
        let mut next = vec![<BigRational as Weight>::zero(); n];
        for (v, mass) in cur.iter().enumerate() {
            if Zero::is_zero(mass) {
                continue;
            }
            for (u, p) in &chain.rows[v] {
                if chain.level[*u] <= limit {
                    next[*u] += mass * p;
                }
            }
        }
        cur = next;
        out.push(cur[chain.origin].clone());
    }
    out
}

// ---------------------------------------------------------------------------
// Sparse vertex-space dynamic program

/// Exact distributions of `X_0..=X_n` started at `start`.
pub fn distributions<W: Weight>(kernel: &Kernel, start: &VertexAddr, n: usize, cap: usize) -> Result<Vec<DistVector<W>>> {
    kernel.graph().validate(start)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut cur: DistVector<W> = DistVector::default();
    cur.insert(start.clone(), W::one());
    out.push(cur.clone());
    for _ in 0..n {
        cur = step(kernel, &cur, cap, |_| true)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// One step of the dynamic program, keeping only targets accepted by `keep`.
pub(crate) fn step<W: Weight>(
    kernel: &Kernel,
    cur: &DistVector<W>,
    cap: usize,
    keep: impl Fn(&VertexAddr) -> bool,
) -> Result<DistVector<W>> {
    let mut next: DistVector<W> = DistVector::default();
    let mut sources: Vec<&VertexAddr> = cur.keys().collect();
    sources.sort();
    for v in sources {
        let mass = &cur[v];
        for (u, p) in kernel.row::<W>(v)?.entries {
            if !keep(&u) {
                continue;
            }
            let add = mass.mul(&p);
            match next.get_mut(&u) {
                Some(x) => x.add_assign(&add),
                None => {
                    if next.len() >= cap {
                        return Err(Error::Resource(format!(
                            "sparse support exceeded {cap} vertices; use dirichlet_rho for this kernel"
                        )));
                    }
                    next.insert(u, add);
                }
            }
        }
    }
    Ok(next)
}

fn sparse_return<W: Weight>(kernel: &Kernel, origin: &VertexAddr, horizon: usize, cap: usize) -> Result<Vec<W>> {
    let g = kernel.graph();
    let mut cur: DistVector<W> = DistVector::default();
    cur.insert(origin.clone(), W::one());
    let mut out = vec![W::one()];
    for t in 1..=horizon {
        let limit = (horizon - t) as u64;
        cur = step(kernel, &cur, cap, |u| g.distance_unchecked(u, origin) <= limit)?;
        out.push(cur.get(origin).cloned().unwrap_or_else(W::zero));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Products

/// Factor kernels and weights if `kernel` is a product walk. The isotropic walk
/// on a product of regular graphs is the product walk with degree weights.
pub(crate) fn product_factors(kernel: &Kernel) -> Option<Vec<(Kernel, Rational64)>> {
    let GraphFamily::Product(factors) = kernel.graph() else {
        return None;
    };
    match kernel.spec() {
        KernelSpec::Product(parts) => Some(
            parts
                .iter()
                .zip(factors)
                .map(|((k, a), g)| (build_kernel(k.clone(), g.clone()).expect("validated"), *a))
                .collect(),
        ),
        KernelSpec::Simple => {
            let total = kernel.graph().regular_degree()?;
            factors
                .iter()
                .map(|g| {
                    let d = g.regular_degree()?;
                    Some((
                        build_kernel(KernelSpec::Simple, g.clone()).expect("simple"),
                        Rational64::new(d as i64, total as i64),
                    ))
                })
                .collect()
        }
        _ => None,
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

/// Log-domain binomial split: `p_n = sum_k C(n,k) a^k (1-a)^(n-k) p1_k p2_(n-k)`.
pub(crate) fn convolve_log(first: &[f64], second: &[f64], alpha: f64) -> Vec<f64> {
    let n = first.len().min(second.len()) - 1;
    if alpha >= 1.0 {
        return first[..=n].to_vec();
    }
    if alpha <= 0.0 {
        return second[..=n].to_vec();
    }
    let lf = ln_factorials(n);
    let (la, lb) = (alpha.ln(), (1.0 - alpha).ln());
    let mut out = Vec::with_capacity(n + 1);
    let mut terms = Vec::with_capacity(n + 1);
    for m in 0..=n {
        terms.clear();
        for k in 0..=m {
            let t = first[k] + second[m - k];
            if t.is_finite() {
                terms.push(lf[m] - lf[k] - lf[m - k] + k as f64 * la + (m - k) as f64 * lb + t);
            }
        }
        out.push(log_sum_exp(&terms));
    }
    out
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 1..=n {
        let prev = row[k - 1].clone();
        row.push(prev * BigInt::from(n - k + 1) / BigInt::from(k));
    }
    row
}

fn convolve_exact(first: &[BigRational], second: &[BigRational], alpha: &BigRational) -> Vec<BigRational> {
    let n = first.len().min(second.len()) - 1;
    let beta = <BigRational as Weight>::one() - alpha;
    let apow: Vec<BigRational> = std::iter::successors(Some(<BigRational as Weight>::one()), |x| Some(x * alpha)).take(n + 1).collect();
    let bpow: Vec<BigRational> = std::iter::successors(Some(<BigRational as Weight>::one()), |x| Some(x * &beta)).take(n + 1).collect();
    (0..=n)
        .map(|m| {
            let c = binomial_row(m);
            (0..=m).fold(<BigRational as Weight>::zero(), |acc, k| {
                acc + BigRational::from_integer(c[k].clone()) * &apow[k] * &bpow[m - k] * &first[k] * &second[m - k]
            })
        })
        .collect()
}

/// Folds factors pairwise: the first factor against the renormalised rest.
fn product_series(
    factors: &[(Kernel, Rational64)],
    origin: &[VertexAddr],
    horizon: usize,
    mode: ArithmeticMode,
    cap: usize,
) -> Result<ReturnSeries> {
    let series: Vec<ReturnSeries> = factors
        .iter()
        .zip(origin)
        .map(|((k, _), o)| return_series_with(k, o, horizon, mode, StrategyChoice::Auto, cap))
        .collect::<Result<_>>()?;
    let origin = VertexAddr::Tuple(origin.to_vec());
    let last = factors.len() - 1;
    match mode {
        ArithmeticMode::Float => {
            let mut acc = series[last].log_p.clone();
            let mut rest_weight = factors[last].1;
            for i in (0..last).rev() {
                let a = factors[i].1;
                let total = a + rest_weight;
                let alpha = if total.is_zero() { Rational64::zero() } else { a / total };
                acc = convolve_log(&series[i].log_p, &acc, *alpha.numer() as f64 / *alpha.denom() as f64);
                rest_weight = total;
            }
            Ok(ReturnSeries::from_log(origin, acc, SeriesStrategy::ProductConvolution))
        }
        ArithmeticMode::Rational => {
            let exact = |s: &ReturnSeries| s.exact.clone().expect("rational series");
            let mut acc = exact(&series[last]);
            let mut rest_weight = factors[last].1;
            for i in (0..last).rev() {
                let a = factors[i].1;
                let total = a + rest_weight;
                let alpha = if total.is_zero() { Rational64::zero() } else { a / total };
                acc = convolve_exact(&exact(&series[i]), &acc, &BigRational::from_rational(&alpha));
                rest_weight = total;
            }
            Ok(ReturnSeries::from_exact(origin, acc, SeriesStrategy::ProductConvolution))
        }
    }
}

// ---------------------------------------------------------------------------
// Entry points

/// Return series from the graph origin with automatic strategy selection.
pub fn return_series(kernel: &Kernel, horizon: usize, mode: ArithmeticMode) -> Result<ReturnSeries> {
    return_series_with(kernel, &kernel.origin(), horizon, mode, StrategyChoice::Auto, DEFAULT_SUPPORT_CAP)
}

pub fn return_series_with(
    kernel: &Kernel,
    origin: &VertexAddr,
    horizon: usize,
    mode: ArithmeticMode,
    choice: StrategyChoice,
    cap: usize,
) -> Result<ReturnSeries> {
    if horizon < 1 {
        return Err(Error::config("series horizon must be at least 1"));
    }
    kernel.graph().validate(origin)?;
    if choice == StrategyChoice::Auto {
        if let Some(kind) = chain_kind(kernel, origin) {
            // The chain is translation invariant on T_d and Z, so any origin works.
            let reach = horizon as u64 / 2 + 1;
            return Ok(match mode {
                ArithmeticMode::Float => {
                    let chain = build_chain::<f64>(kernel, kind, reach);
                    ReturnSeries::from_log(origin.clone(), chain_return_log(&chain, horizon), SeriesStrategy::QuotientChain)
                }
                ArithmeticMode::Rational => {
                    let chain = build_chain::<BigRational>(kernel, kind, reach);
                    ReturnSeries::from_exact(origin.clone(), chain_return_exact(&chain, horizon), SeriesStrategy::QuotientChain)
                }
            });
        }
        if let (Some(factors), VertexAddr::Tuple(coords)) = (product_factors(kernel), origin) {
            return product_series(&factors, coords, horizon, mode, cap);
        }
    }
    Ok(match mode {
        ArithmeticMode::Float => {
            let p = sparse_return::<f64>(kernel, origin, horizon, cap)?;
            let log_p = p.iter().map(|x| if *x > 0.0 { x.ln() } else { f64::NEG_INFINITY }).collect();
            ReturnSeries::from_log(origin.clone(), log_p, SeriesStrategy::SparseDp)
        }
        ArithmeticMode::Rational => {
            let p = sparse_return::<BigRational>(kernel, origin, horizon, cap)?;
            ReturnSeries::from_exact(origin.clone(), p, SeriesStrategy::SparseDp)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn big(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn t3() -> GraphFamily {
        GraphFamily::hom_tree(3).unwrap()
    }

    fn exact(k: &Kernel, n: usize, choice: StrategyChoice) -> Vec<BigRational> {
        return_series_with(k, &k.origin(), n, ArithmeticMode::Rational, choice, DEFAULT_SUPPORT_CAP)
            .unwrap()
            .exact
            .unwrap()
    }

    #[test]
    fn tree_values() {
        let k = build_kernel(KernelSpec::Simple, t3()).unwrap();
        let p = exact(&k, 4, StrategyChoice::Auto);
        assert_eq!(p[1], big(0, 1));
        assert_eq!(p[2], big(1, 3));
        assert_eq!(p[4], big(5, 27));
    }

    #[test]
    fn hammock_two_step_return() {
        let k = build_kernel(KernelSpec::Simple, GraphFamily::Hammock).unwrap();
        let p = exact(&k, 3, StrategyChoice::Auto);
        assert_eq!(p[2], big(31, 210));
        assert!(p[3] > big(0, 1));
    }

    #[test]
    fn product_two_step_return() {
        let g = GraphFamily::product(vec![t3(), t3()]).unwrap();
        let k = build_kernel(KernelSpec::Product(vec![(KernelSpec::Simple, r(1, 2)), (KernelSpec::Simple, r(1, 2))]), g).unwrap();
        let conv = exact(&k, 2, StrategyChoice::Auto);
        let dp = exact(&k, 2, StrategyChoice::SparseOnly);
        assert_eq!(conv[2], big(1, 6));
        assert_eq!(conv, dp);
    }

    #[test]
    fn lazy_tree_series_start() {
        let k = build_kernel(KernelSpec::lazy(KernelSpec::Simple, r(1, 2)), t3()).unwrap();
        let p = exact(&k, 3, StrategyChoice::Auto);
        assert_eq!(p[1], big(1, 2));
        assert_eq!(p[2], big(1, 3));
        assert_eq!(p[3], big(1, 4));
    }

    #[test]
    fn float_and_exact_agree() {
        let k = build_kernel(KernelSpec::Simple, GraphFamily::Hammock).unwrap();
        let e = return_series(&k, 30, ArithmeticMode::Rational).unwrap();
        let f = return_series(&k, 30, ArithmeticMode::Float).unwrap();
        for n in 0..=30 {
            if e.p(n) == 0.0 {
                assert_eq!(f.p(n), 0.0);
                continue;
            }
            let rel = (e.p(n) - f.p(n)).abs() / e.p(n);
            assert!(rel < 1e-12, "n={n}");
        }
    }

    #[test]
    fn long_horizons_do_not_underflow() {
        let k = build_kernel(KernelSpec::Simple, t3()).unwrap();
        let s = return_series(&k, 4000, ArithmeticMode::Float).unwrap();
        assert!(s.log_p[4000].is_finite());
        assert!(s.log_p[3999] == f64::NEG_INFINITY);
        assert_eq!(s.period, 2);
        // ln p_n ~ n ln rho - 1.5 ln n + const
        let rho = 2.0 * 2f64.sqrt() / 3.0;
        let drift = s.log_p[4000] - 4000.0 * rho.ln();
        assert!(drift < 0.0 && drift > -30.0);
    }

    #[test]
    fn big_ln_handles_tiny_values() {
        let tiny = BigRational::new(BigInt::one(), BigInt::one() << 5000usize);
        assert!((big_ln(&tiny) + 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
