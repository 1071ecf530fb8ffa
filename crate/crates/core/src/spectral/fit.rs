//! Fitting `p_n ~ C rho^n / n^a` to a return series.

use serde::Serialize;

use super::series::ReturnSeries;
use crate::error::{Error, Result};

/// Minimum number of positive terms a fit needs.
pub const MIN_POSITIVE_TERMS: usize = 200;

/// Where a spectral radius came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoMethod {
    ClosedForm,
    SeriesExtrapolation,
    DirichletPowerIteration,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralFit {
    pub rho_hat: f64,
    pub a_hat: f64,
    pub c_hat: f64,
    /// Inclusive index window of the regression.
    pub window: (usize, usize),
    pub points: usize,
    pub r_squared: f64,
    pub rms_residual: f64,
    pub max_residual: f64,
    pub method: RhoMethod,
}

/// Ordinary least squares of `y` on `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub rms_residual: f64,
    pub max_residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (mut ss, mut worst) = (0.0f64, 0.0f64);
    for (a, b) in x.iter().zip(y) {
        let e = b - (intercept + slope * a);
        ss += e * e;
        worst = worst.max(e.abs());
    }
    LinearFit {
        slope,
        intercept,
        r_squared: if syy > 0.0 { 1.0 - ss / syy } else { 1.0 },
        rms_residual: (ss / n).sqrt(),
        max_residual: worst,
    }
}

/// Fits the spectral radius, polynomial exponent and constant over `[N/2, N]`.
///
/// Without `known_rho`, `ln rho` is the intercept of the consecutive-ratio
/// regression `ln (p_(n+per)/p_n)^(1/per) = ln rho - a ln(1 + per/n)/per`.
pub fn fit_spectral(series: &ReturnSeries, known_rho: Option<f64>) -> Result<SpectralFit> {
    let positive: Vec<usize> = (1..series.log_p.len()).filter(|&n| series.log_p[n].is_finite()).collect();
    if positive.len() < MIN_POSITIVE_TERMS {
        return Err(Error::InsufficientData(format!(
            "{} positive terms, at least {MIN_POSITIVE_TERMS} needed",
            positive.len()
        )));
    }
    let horizon = *positive.last().expect("non-empty");
    let lo = horizon / 2;
    let window: Vec<usize> = positive.iter().copied().filter(|&n| n >= lo).collect();
    let per = series.period as usize;

    let (ln_rho, method) = match known_rho {
        Some(rho) => (rho.ln(), RhoMethod::ClosedForm),
        None => {
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for &n in &window {
                if n + per <= horizon && series.log_p[n + per].is_finite() {
                    xs.push(((per as f64) / n as f64).ln_1p() / per as f64);
                    ys.push((series.log_p[n + per] - series.log_p[n]) / per as f64);
                }
            }
            (linear_fit(&xs, &ys).intercept, RhoMethod::SeriesExtrapolation)
        }
    };
    let xs: Vec<f64> = window.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|&n| series.log_p[n] - n as f64 * ln_rho).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(SpectralFit {
        rho_hat: ln_rho.exp(),
        a_hat: -fit.slope,
        c_hat: fit.intercept.exp(),
        window: (window[0], horizon),
        points: window.len(),
        r_squared: fit.r_squared,
        rms_residual: fit.rms_residual,
        max_residual: fit.max_residual,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexAddr;
    use crate::spectral::series::SeriesStrategy;
    use crate::weight::ArithmeticMode;

    fn synthetic(rho: f64, a: f64, c: f64, n: usize, period: usize) -> ReturnSeries {
        let log_p = (0..=n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else if k % period != 0 {
                    f64::NEG_INFINITY
                } else {
                    c.ln() + k as f64 * rho.ln() - a * (k as f64).ln()
                }
            })
            .collect();
        ReturnSeries {
            origin: VertexAddr::Int(0),
            log_p,
            exact: None,
            period: period as u32,
            mode: ArithmeticMode::Float,
            strategy: SeriesStrategy::QuotientChain,
        }
    }

    #[test]
    fn recovers_exact_power_law() {
        let f = fit_spectral(&synthetic(0.9, 1.5, 2.0, 1000, 2), None).unwrap();
        assert!((f.rho_hat - 0.9).abs() < 1e-9);
        assert!((f.a_hat - 1.5).abs() < 1e-6);
        assert!((f.c_hat - 2.0).abs() < 1e-5);
        assert!(f.r_squared > 0.999_999);
    }

    #[test]
    fn too_short_series_is_rejected() {
        assert!(matches!(
            fit_spectral(&synthetic(0.9, 1.5, 1.0, 300, 2), None),
            Err(Error::InsufficientData(_))
        ));
    }
}
