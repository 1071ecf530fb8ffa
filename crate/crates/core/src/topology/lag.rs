use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GraphFamily;
use crate::kernel::{build_kernel, Kernel, KernelSpec};
use crate::spectral::{return_series, ReturnSeries};
use crate::weight::ArithmeticMode;

/// Lazy simple walk on `T_3` with holding probability 1/2: the projection of
/// the product walk onto its tree coordinate.
pub fn lazy_tree_kernel() -> Kernel {
    build_kernel(
        KernelSpec::lazy(KernelSpec::Simple, Rational64::new(1, 2)),
        GraphFamily::hom_tree(3).expect("degree 3"),
    )
    .expect("valid kernel")
}

/// `1/2 T_3 + 1/2 Z(p)`, the walk on `T_3 x Z` biased to the right with probability `p`.
pub fn biased_product_kernel(p: Rational64) -> Result<Kernel> {
    let h = Rational64::new(1, 2);
    build_kernel(
        KernelSpec::Product(vec![(KernelSpec::Simple, h), (KernelSpec::BiasedLine { right: p }, h)]),
        GraphFamily::product(vec![GraphFamily::hom_tree(3)?, GraphFamily::Line])?,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagReport {
    pub p: String,
    pub k: usize,
    pub rho: f64,
    /// `p_k rho^(-k)`, above 1.
    pub ratio: f64,
    /// `p_(k-1) rho^(-(k-1))`, at most 1.
    pub previous_ratio: f64,
    /// Whether exact arithmetic confirmed the crossing (only for `k <= 30`).
    pub exact_verified: Option<bool>,
}

/// Largest lag rechecked in exact arithmetic.
pub const EXACT_LAG_LIMIT: usize = 30;

/// Smallest `k >= 1` with `p_k > rho(P(p))^k`, where `p_k` is the return
/// series of the lazy tree walk.
pub fn min_supercritical_lag(p: Rational64, lazy_series: &ReturnSeries) -> Result<LagReport> {
    if p <= Rational64::zero() || p >= Rational64::one() {
        return Err(Error::Domain(format!("bias must lie in (0, 1), got {p}")));
    }
    if p == Rational64::new(1, 2) {
        return Err(Error::Domain(
            "without bias the two spectral radii coincide and no lag is guaranteed".into(),
        ));
    }
    let rho = biased_product_kernel(p)?.analytic_rho().expect("closed form");
    let ln_rho = rho.ln();
    let excess = |k: usize| lazy_series.log_p[k] - k as f64 * ln_rho;
    let k = (1..=lazy_series.horizon())
        .find(|&k| excess(k) > 0.0)
        .ok_or_else(|| Error::InsufficientData(format!("no crossing within {} steps", lazy_series.horizon())))?;
    let exact_verified = (k <= EXACT_LAG_LIMIT).then(|| verify_exact(p, k));
    Ok(LagReport {
        p: p.to_string(),
        k,
        rho,
        ratio: excess(k).exp(),
        previous_ratio: excess(k - 1).exp(),
        exact_verified,
    })
}

/// Rational bounds on `sqrt(num) / den`.
fn sqrt_bounds(num: &BigInt, den: &BigInt) -> (BigRational, BigRational) {
    let scale = BigInt::from(10u32).pow(30);
    let root = (num * &scale * &scale).sqrt();
    let d = den * &scale;
    (
        BigRational::new(root.clone(), d.clone()),
        BigRational::new(root + BigInt::one(), d),
    )
}

fn verify_exact(p: Rational64, k: usize) -> bool {
    let exact = return_series(&lazy_tree_kernel(), k, ArithmeticMode::Rational).expect("small horizon");
    let values = exact.exact.expect("rational mode");
    let (a, b) = (BigInt::from(*p.numer()), BigInt::from(*p.denom()));
    let (s2_lo, s2_hi) = sqrt_bounds(&BigInt::from(2), &BigInt::from(3));
    let (sp_lo, sp_hi) = sqrt_bounds(&(&a * (&b - &a)), &b);
    let (lo, hi) = (s2_lo + sp_lo, s2_hi + sp_hi);
    let pow = |x: &BigRational, n: usize| (0..n).fold(BigRational::one(), |acc, _| acc * x);
    let crosses = values[k] > pow(&hi, k);
    let below = (1..k).all(|j| values[j] <= pow(&lo, j));
    crosses && below
}
