//! Summability criteria for critical branching random walks, regime
//! classification and numerical spectral radii.

use num_rational::Rational64;
use serde::Serialize;

use super::dirichlet::dirichlet_rho_capped;
use super::fit::{fit_spectral, linear_fit, RhoMethod};
use super::series::{
    build_chain, chain_kind, distributions, product_factors, return_series, return_series_with, ChainKind, LumpedChain,
    ReturnSeries, StrategyChoice,
};
use crate::error::{Error, Result};
use crate::graph::{GraphFamily, VertexAddr};
use crate::kernel::Kernel;
use crate::weight::ArithmeticMode;

/// Tail mass below which a convergent series counts as converged.
pub const TAIL_TOLERANCE: f64 = 1e-6;
/// Minimum R^2 of the divergence-rate fit.
pub const DIVERGENCE_R2: f64 = 0.99;
/// Margin around the critical decay exponent 1 of the terms.
pub const EXPONENT_MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Converged,
    Diverging,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converged => "converged",
            Verdict::Diverging => "diverging",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Fit of partial sums against their expected growth law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivergenceFit {
    /// `ln n` for logarithmic growth, `n^g` for power growth.
    pub regressor: String,
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub terms: Vec<f64>,
    /// `S_N` for every `N`; nondecreasing.
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
    /// Fitted `d` in `term_n ~ K n^(-d)` over the upper half of the range.
    pub term_decay: f64,
    pub term_constant: f64,
    /// Return-series exponent when the terms come from a return series.
    pub a_hat: Option<f64>,
    pub tail_estimate: Option<f64>,
    pub divergence_fit: Option<DivergenceFit>,
    /// For two-walk sums started at one vertex: largest relative deviation from
    /// the diagonal terms `(s + 1) m^s p_s`.
    pub diagonal_max_rel_err: Option<f64>,
}

fn partial(terms: &[f64]) -> Vec<f64> {
    terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

/// Positive-term indices in the upper half of the range.
fn upper_window(terms: &[f64]) -> Vec<usize> {
    let horizon = terms.iter().rposition(|t| *t > 0.0).unwrap_or(0);
    (horizon / 2..=horizon).filter(|&n| n >= 1 && terms[n] > 0.0).collect()
}

fn period_of_terms(terms: &[f64]) -> usize {
    let mut g = 0usize;
    for (n, t) in terms.iter().enumerate().skip(1) {
        if *t > 0.0 {
            let (mut a, mut b) = (g, n);
            while b != 0 {
                (a, b) = (b, a % b);
            }
            g = a;
        }
    }
    g.max(1)
}

/// Applies the verdict rule given `term_n ~ K n^(-decay)`.
fn assess(terms: Vec<f64>, decay: f64, constant: f64, a_hat: Option<f64>) -> ConditionReport {
    let partial_sums = partial(&terms);
    let window = upper_window(&terms);
    let per = period_of_terms(&terms) as f64;
    let horizon = window.last().copied().unwrap_or(0) as f64;
    let mut report = ConditionReport {
        terms,
        partial_sums,
        verdict: Verdict::Inconclusive,
        term_decay: decay,
        term_constant: constant,
        a_hat,
        tail_estimate: None,
        divergence_fit: None,
        diagonal_max_rel_err: None,
    };
    if window.len() < 3 {
        return report;
    }
    if decay > 1.0 + EXPONENT_MARGIN {
        let tail = constant / per * horizon.powf(1.0 - decay) / (decay - 1.0);
        report.tail_estimate = Some(tail);
        if tail < TAIL_TOLERANCE {
            report.verdict = Verdict::Converged;
        }
    } else {
        let (label, xs): (String, Vec<f64>) = if decay >= 1.0 - EXPONENT_MARGIN {
            ("ln n".into(), window.iter().map(|&n| (n as f64).ln()).collect())
        } else {
            let g = 1.0 - decay;
            (format!("n^{g:.4}"), window.iter().map(|&n| (n as f64).powf(g)).collect())
        };
        let ys: Vec<f64> = window.iter().map(|&n| report.partial_sums[n]).collect();
        let fit = linear_fit(&xs, &ys);
        if fit.slope > 0.0 && fit.r_squared >= DIVERGENCE_R2 {
            report.verdict = Verdict::Diverging;
        }
        report.divergence_fit = Some(DivergenceFit {
            regressor: label,
            slope: fit.slope,
            r_squared: fit.r_squared,
        });
    }
    report
}

/// `S_N = sum_{n <= N} (n + 1) rho^(-n) p_n` with a verdict from the fitted exponent.
pub fn criticality_sum(series: &ReturnSeries, rho: f64, horizon: usize) -> Result<ConditionReport> {
    if rho <= 0.0 {
        return Err(Error::Domain(format!("spectral radius must be positive, got {rho}")));
    }
    let horizon = horizon.min(series.horizon());
    let ln_rho = rho.ln();
    let terms: Vec<f64> = (0..=horizon)
        .map(|n| ((n as f64 + 1.0).ln() - n as f64 * ln_rho + series.log_p[n]).exp())
        .collect();
    let truncated = ReturnSeries {
        log_p: series.log_p[..=horizon].to_vec(),
        ..series.clone()
    };
    let fit = fit_spectral(&truncated, Some(rho))?;
    Ok(assess(terms, fit.a_hat - 1.0, fit.c_hat, Some(fit.a_hat)))
}

// ---------------------------------------------------------------------------
// Two-walk sums

/// `ip[a][b] = <f_a, g_b>` for `a + b <= N`.
type Overlap = Vec<Vec<f64>>;

fn chain_distributions(chain: &LumpedChain<f64>, start: usize, horizon: usize) -> Vec<Vec<f64>> {
    let n = chain.rows.len();
    let mut cur = vec![0.0; n];
    cur[start] = 1.0;
    let mut out = vec![cur.clone()];
    for _ in 0..horizon {
        let mut next = vec![0.0; n];
        for (v, &mass) in cur.iter().enumerate() {
            if mass > 0.0 {
                for &(u, p) in &chain.rows[v] {
                    next[u] += mass * p;
                }
            }
        }
        cur = next;
        out.push(cur.clone());
    }
    out
}

fn tree_overlap(kernel: &Kernel, d: u32, distance: u64, horizon: usize) -> Overlap {
    let chain = build_chain::<f64>(kernel, ChainKind::TreeDistance(d), horizon as u64 + 1);
    let f = chain_distributions(&chain, 0, horizon);
    let dd = f64::from(d);
    let ln_sphere = |r: usize| if r == 0 { 0.0 } else { dd.ln() + (r - 1) as f64 * (dd - 1.0).ln() };
    let big_d = distance as usize;
    // weight(t, h) = (#vertices projecting at t with height h) / (|S_(t+h)| |S_(D-t+h)|)
    let weight = |t: usize, h: usize| -> f64 {
        let ln_count = if h == 0 {
            0.0
        } else if big_d == 0 {
            ln_sphere(h)
        } else if t == 0 || t == big_d {
            h as f64 * (dd - 1.0).ln()
        } else {
            (dd - 2.0).ln() + (h - 1) as f64 * (dd - 1.0).ln()
        };
        (ln_count - ln_sphere(t + h) - ln_sphere(big_d - t + h)).exp()
    };
    let mut ip = vec![Vec::new(); horizon + 1];
    for a in 0..=horizon {
        ip[a] = (0..=horizon - a)
            .map(|b| {
                let mut acc = 0.0;
                for t in 0..=big_d {
                    let mut h = 0;
                    while t + h <= a && big_d - t + h <= b {
                        let (x, y) = (f[a][t + h], f[b][big_d - t + h]);
                        if x > 0.0 && y > 0.0 {
                            acc += weight(t, h) * x * y;
                        }
                        h += 1;
                    }
                }
                acc
            })
            .collect();
    }
    ip
}

fn line_overlap(kernel: &Kernel, i: i64, j: i64, horizon: usize) -> Overlap {
    let chain = build_chain::<f64>(kernel, ChainKind::Line, horizon as u64);
    let centre = chain.origin;
    let f = chain_distributions(&chain, centre, horizon);
    let shift = j - i;
    let n = chain.rows.len() as i64;
    (0..=horizon)
        .map(|a| {
            (0..=horizon - a)
                .map(|b| {
                    // <f_a, g_b> = sum_x F_a(x - i) G_b(x - j)
                    (0..n)
                        .filter_map(|x| {
                            let y = x - shift;
                            (0..n).contains(&y).then(|| f[a][x as usize] * f[b][y as usize])
                        })
                        .sum()
                })
                .collect()
        })
        .collect()
}

fn sparse_overlap(kernel: &Kernel, i: &VertexAddr, j: &VertexAddr, horizon: usize, cap: usize) -> Result<Overlap> {
    let f = distributions::<f64>(kernel, i, horizon, cap)?;
    let g = if i == j { f.clone() } else { distributions::<f64>(kernel, j, horizon, cap)? };
    Ok((0..=horizon)
        .map(|a| {
            (0..=horizon - a)
                .map(|b| {
                    let (small, large) = if f[a].len() <= g[b].len() { (&f[a], &g[b]) } else { (&g[b], &f[a]) };
                    let mut keys: Vec<_> = small.keys().collect();
                    keys.sort();
                    keys.into_iter().filter_map(|v| large.get(v).map(|q| q * small[v])).sum()
                })
                .collect()
        })
        .collect())
}

fn binomial_weights(horizon: usize, alpha: f64) -> Vec<Vec<f64>> {
    let mut lf = vec![0.0f64; horizon + 1];
    for n in 1..=horizon {
        lf[n] = lf[n - 1] + (n as f64).ln();
    }
    (0..=horizon)
        .map(|a| {
            (0..=a)
                .map(|k| {
                    if alpha >= 1.0 {
                        if k == a { 1.0 } else { 0.0 }
                    } else if alpha <= 0.0 {
                        if k == 0 { 1.0 } else { 0.0 }
                    } else {
                        (lf[a] - lf[k] - lf[a - k] + k as f64 * alpha.ln() + (a - k) as f64 * (1.0 - alpha).ln()).exp()
                    }
                })
                .collect()
        })
        .collect()
}

/// Overlap of product walks from the per-factor overlaps.
fn combine_overlaps(first: &Overlap, rest: &Overlap, alpha: f64, horizon: usize) -> Overlap {
    let w = binomial_weights(horizon, alpha);
    (0..=horizon)
        .map(|a| {
            (0..=horizon - a)
                .map(|b| {
                    let mut acc = 0.0;
                    for a1 in 0..=a {
                        let wa = w[a][a1];
                        if wa == 0.0 {
                            continue;
                        }
                        for b1 in 0..=b {
                            let wb = w[b][b1];
                            if wb != 0.0 {
                                acc += wa * wb * first[a1][b1] * rest[a - a1][b - b1];
                            }
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn overlap_table(kernel: &Kernel, i: &VertexAddr, j: &VertexAddr, horizon: usize, cap: usize) -> Result<Overlap> {
    if let (Some(factors), VertexAddr::Tuple(ci), VertexAddr::Tuple(cj)) = (product_factors(kernel), i, j) {
        let tables: Vec<Overlap> = factors
            .iter()
            .zip(ci.iter().zip(cj))
            .map(|((k, _), (a, b))| overlap_table(k, a, b, horizon, cap))
            .collect::<Result<_>>()?;
        let last = factors.len() - 1;
        let mut acc = tables[last].clone();
        let mut rest_weight = factors[last].1;
        for l in (0..last).rev() {
            let total = factors[l].1 + rest_weight;
            let alpha = if total == Rational64::from_integer(0) { Rational64::from_integer(0) } else { factors[l].1 / total };
            acc = combine_overlaps(&tables[l], &acc, *alpha.numer() as f64 / *alpha.denom() as f64, horizon);
            rest_weight = total;
        }
        return Ok(acc);
    }
    match (chain_kind(kernel, i), kernel.graph(), i, j) {
        (Some(ChainKind::TreeDistance(d)), _, _, _) => Ok(tree_overlap(kernel, d, kernel.graph().distance(i, j)?, horizon)),
        (Some(ChainKind::Line), GraphFamily::Line, VertexAddr::Int(a), VertexAddr::Int(b)) => {
            Ok(line_overlap(kernel, *a, *b, horizon))
        }
        _ => sparse_overlap(kernel, i, j, horizon, cap),
    }
}

/// `sum_{k + n <= N} m^(k+n) <f_k, g_n>` for independent walks from `i` and `j`.
pub fn two_walk_sum(kernel: &Kernel, i: &VertexAddr, j: &VertexAddr, m: f64, horizon: usize, cap: usize) -> Result<ConditionReport> {
    kernel.graph().validate(i)?;
    kernel.graph().validate(j)?;
    let ip = overlap_table(kernel, i, j, horizon, cap)?;
    let terms: Vec<f64> = (0..=horizon)
        .map(|s| m.powi(s as i32) * (0..=s).map(|a| ip[a][s - a]).sum::<f64>())
        .collect();
    let window = upper_window(&terms);
    let (decay, constant) = if window.len() >= 3 {
        let xs: Vec<f64> = window.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = window.iter().map(|&n| terms[n].ln()).collect();
        let fit = linear_fit(&xs, &ys);
        (-fit.slope, fit.intercept.exp())
    } else {
        (f64::NAN, f64::NAN)
    };
    let mut report = assess(terms, decay, constant, None);
    if i == j {
        let series = return_series_with(kernel, i, horizon, ArithmeticMode::Float, StrategyChoice::Auto, cap)?;
        let mut worst = 0.0f64;
        for s in 0..=horizon {
            let diag = (s as f64 + 1.0) * m.powi(s as i32) * series.p(s);
            let t = report.terms[s];
            let err = if diag > 0.0 { (t - diag).abs() / diag } else { t.abs() };
            worst = worst.max(err);
        }
        report.diagonal_max_rel_err = Some(worst);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Regimes and numerical radii

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Transient,
    Critical,
    Recurrent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Critical processes are transient as well.
    pub transient: bool,
}

/// Tolerance on `|m - 1/rho|` for criticality.
pub const CRITICAL_TOLERANCE: f64 = 1e-9;

pub fn classify_regime(m: f64, rho: f64) -> Result<RegimeReport> {
    if !(rho > 0.0 && rho <= 1.0) || m < 1.0 {
        return Err(Error::Domain(format!("need m >= 1 and rho in (0, 1], got m = {m}, rho = {rho}")));
    }
    let threshold = 1.0 / rho;
    let regime = if (m - threshold).abs() <= CRITICAL_TOLERANCE {
        Regime::Critical
    } else if m < threshold {
        Regime::Transient
    } else {
        Regime::Recurrent
    };
    Ok(RegimeReport {
        regime,
        transient: regime != Regime::Recurrent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoEstimate {
    pub rho: f64,
    pub method: RhoMethod,
    pub detail: String,
}

/// Horizon used when the radius is read off a return series.
pub const NUMERICAL_RHO_HORIZON: usize = 4000;

/// Spectral radius by the best available route: closed form, the weighted sum
/// over product factors, a fitted return series, or Dirichlet radii with
/// `1/R^2` extrapolation.
pub fn numerical_rho(kernel: &Kernel) -> Result<RhoEstimate> {
    if let Some(rho) = kernel.analytic_rho() {
        return Ok(RhoEstimate {
            rho,
            method: RhoMethod::ClosedForm,
            detail: "closed form".into(),
        });
    }
    if let Some(factors) = product_factors(kernel) {
        let mut rho = 0.0;
        let mut method = RhoMethod::ClosedForm;
        let mut parts = Vec::new();
        for (k, a) in &factors {
            let a = *a.numer() as f64 / *a.denom() as f64;
            if a == 0.0 {
                continue;
            }
            let est = numerical_rho(k)?;
            rho += a * est.rho;
            if est.method != RhoMethod::ClosedForm {
                method = est.method;
            }
            parts.push(format!("{a}*[{}]", est.detail));
        }
        return Ok(RhoEstimate {
            rho,
            method,
            detail: format!("weighted sum {}", parts.join(" + ")),
        });
    }
    if chain_kind(kernel, &kernel.origin()).is_some() {
        let series = return_series(kernel, NUMERICAL_RHO_HORIZON, ArithmeticMode::Float)?;
        let fit = fit_spectral(&series, None)?;
        return Ok(RhoEstimate {
            rho: fit.rho_hat.min(1.0),
            method: RhoMethod::SeriesExtrapolation,
            detail: format!("ratio fit of the lumped return series, N = {NUMERICAL_RHO_HORIZON}"),
        });
    }
    let cap = 60_000;
    let mut radii = Vec::new();
    let mut r = 2;
    while let Ok(est) = dirichlet_rho_capped(kernel, r, 200_000, cap) {
        radii.push(est);
        r += 2;
        if r > 40 {
            break;
        }
    }
    let n = radii.len();
    if n < 2 {
        return Err(Error::Resource("ball too large for a Dirichlet estimate".into()));
    }
    let (a, b) = (&radii[n - 2], &radii[n - 1]);
    let (ra, rb) = ((a.radius as f64 + 1.0).powi(2), (b.radius as f64 + 1.0).powi(2));
    let extrapolated = (rb * b.rho - ra * a.rho) / (rb - ra);
    Ok(RhoEstimate {
        rho: extrapolated.clamp(b.rho, 1.0),
        method: RhoMethod::DirichletPowerIteration,
        detail: format!(
            "rho_{} = {:.10}, rho_{} = {:.10}, extrapolated in 1/(R+1)^2",
            a.radius, a.rho, b.radius, b.rho
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_kernel, KernelSpec};

    fn half_half(second: GraphFamily) -> Kernel {
        let g = GraphFamily::product(vec![GraphFamily::hom_tree(3).unwrap(), second]).unwrap();
        let h = Rational64::new(1, 2);
        build_kernel(KernelSpec::Product(vec![(KernelSpec::Simple, h), (KernelSpec::Simple, h)]), g).unwrap()
    }

    #[test]
    fn regimes() {
        let rho = 2.0 * 2f64.sqrt() / 3.0;
        assert_eq!(classify_regime(1.02, rho).unwrap().regime, Regime::Transient);
        let c = classify_regime(3.0 / (2.0 * 2f64.sqrt()), rho).unwrap();
        assert_eq!(c.regime, Regime::Critical);
        assert!(c.transient);
        assert_eq!(classify_regime(1.2, 0.9714).unwrap().regime, Regime::Recurrent);
        assert!(classify_regime(1.2, 0.0).is_err());
    }

    #[test]
    fn overlap_routes_agree_with_sparse_dp() {
        let k = half_half(GraphFamily::hom_tree(3).unwrap());
        let i = k.origin();
        let j = VertexAddr::tuple([VertexAddr::word(&[0, 1]), VertexAddr::word(&[2])]);
        let fast = overlap_table(&k, &i, &j, 10, 1 << 20).unwrap();
        let slow = sparse_overlap(&k, &i, &j, 10, 1 << 20).unwrap();
        for a in 0..=10 {
            for b in 0..=10 - a {
                assert!((fast[a][b] - slow[a][b]).abs() < 1e-14, "{a} {b}");
            }
        }
        let lazy_line = build_kernel(KernelSpec::lazy(KernelSpec::BiasedLine { right: Rational64::new(7, 10) }, Rational64::new(1, 3)), GraphFamily::Line).unwrap();
        let (x, y) = (VertexAddr::Int(-2), VertexAddr::Int(3));
        let fast = overlap_table(&lazy_line, &x, &y, 12, 1 << 20).unwrap();
        let slow = sparse_overlap(&lazy_line, &x, &y, 12, 1 << 20).unwrap();
        for a in 0..=12 {
            for b in 0..=12 - a {
                assert!((fast[a][b] - slow[a][b]).abs() < 1e-14);
            }
        }
        let t4 = build_kernel(KernelSpec::Simple, GraphFamily::hom_tree(4).unwrap()).unwrap();
        let (x, y) = (VertexAddr::word(&[1, 0, 2]), VertexAddr::word(&[3]));
        let fast = overlap_table(&t4, &x, &y, 10, 1 << 20).unwrap();
        let slow = sparse_overlap(&t4, &x, &y, 10, 1 << 20).unwrap();
        for a in 0..=10 {
            for b in 0..=10 - a {
                assert!((fast[a][b] - slow[a][b]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn diagonal_identity_small_horizon() {
        let k = half_half(GraphFamily::hom_tree(3).unwrap());
        let m = 1.0 / k.analytic_rho().unwrap();
        let rep = two_walk_sum(&k, &k.origin(), &k.origin(), m, 40, 1 << 20).unwrap();
        assert!(rep.diagonal_max_rel_err.unwrap() < 1e-12);
    }

    #[test]
    fn criticality_sum_partial_sums_are_nondecreasing() {
        let k = half_half(GraphFamily::Line);
        let s = return_series(&k, 600, ArithmeticMode::Float).unwrap();
        let rep = criticality_sum(&s, k.analytic_rho().unwrap(), 600).unwrap();
        assert!(rep.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    }
}
