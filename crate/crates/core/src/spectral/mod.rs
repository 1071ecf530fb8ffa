//! Return series, spectral fits, Dirichlet radii and summability criteria.

mod criteria;
mod dirichlet;
mod fit;
mod series;

pub use criteria::{
    classify_regime, criticality_sum, numerical_rho, two_walk_sum, ConditionReport, DivergenceFit, Regime,
    RegimeReport, RhoEstimate, Verdict, CRITICAL_TOLERANCE, DIVERGENCE_R2, EXPONENT_MARGIN, NUMERICAL_RHO_HORIZON,
    TAIL_TOLERANCE,
};
pub use dirichlet::{dirichlet_rho, dirichlet_rho_capped, DirichletEstimate, DirichletRoute, DEFAULT_BALL_CAP, DIRICHLET_TOLERANCE};
pub use fit::{fit_spectral, linear_fit, LinearFit, RhoMethod, SpectralFit, MIN_POSITIVE_TERMS};
pub use series::{
    distributions, return_series, return_series_with, DistVector, ReturnSeries, SeriesStrategy, StrategyChoice,
    DEFAULT_SUPPORT_CAP,
};
pub(crate) use series::{build_chain, peel_lazy, product_factors, ChainKind};
