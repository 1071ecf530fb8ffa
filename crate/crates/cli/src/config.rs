//! Line-oriented experiment configs.
//!
//! One `key = value` per line; `#` starts a comment. Lists of numbers are
//! separated by `,` or `;`, lists of addresses by `;` (tuples use commas).

use std::fmt::{self, Write as _};
use std::str::FromStr;

use brwlab_core::kernel::build_kernel;
use brwlab_core::{ArithmeticMode, GraphFamily, Kernel, KernelSpec, VertexAddr};

use crate::error::CliError;
use crate::grammar::{parse_address, parse_graph, parse_kernel, parse_line, parse_offspring, LineSpec, OffspringSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    ReturnSeries,
    SpectralFit,
    CriticalitySum,
    TwoWalkSum,
    Simulate,
    ManyToOne,
    Purple,
    Ends,
    Fiber,
    EmbeddedGw,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::ReturnSeries,
        ExperimentKind::SpectralFit,
        ExperimentKind::CriticalitySum,
        ExperimentKind::TwoWalkSum,
        ExperimentKind::Simulate,
        ExperimentKind::ManyToOne,
        ExperimentKind::Purple,
        ExperimentKind::Ends,
        ExperimentKind::Fiber,
        ExperimentKind::EmbeddedGw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ReturnSeries => "return-series",
            ExperimentKind::SpectralFit => "spectral-fit",
            ExperimentKind::CriticalitySum => "criticality-sum",
            ExperimentKind::TwoWalkSum => "two-walk-sum",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::ManyToOne => "many-to-one",
            ExperimentKind::Purple => "purple",
            ExperimentKind::Ends => "ends",
            ExperimentKind::Fiber => "fiber",
            ExperimentKind::EmbeddedGw => "embedded-gw",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

/// A fully parsed experiment. Unset budgets fall back to per-experiment defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub graph: GraphFamily,
    pub kernel: KernelSpec,
    pub offspring: Option<OffspringSpec>,
    pub seed: u64,
    pub mode: ArithmeticMode,
    /// Series horizon `N`.
    pub horizon: Option<usize>,
    pub generations: Option<u32>,
    pub replications: Option<u64>,
    pub radii: Option<Vec<u64>>,
    /// Start vertex; the first walk of a two-walk sum; the red seed of a purple run.
    pub source: Option<VertexAddr>,
    /// Second walk of a two-walk sum; the blue seed of a purple run.
    pub target: Option<VertexAddr>,
    /// Many-to-one targets.
    pub targets: Option<Vec<VertexAddr>>,
    /// Purple budgets.
    pub horizons: Option<Vec<u32>>,
    pub line: Option<LineSpec>,
    pub lag: Option<usize>,
    pub observed_lags: Option<usize>,
    pub population_cap: Option<u64>,
    /// Spectral radius supplied by hand instead of computed.
    pub rho: Option<f64>,
    /// Mean offspring for the two-walk sum.
    pub m: Option<f64>,
    pub fiber: Option<LineSpec>,
    pub dirichlet_radii: Option<Vec<u64>>,
}

const KEYS: [&str; 22] = [
    "experiment",
    "graph",
    "kernel",
    "offspring",
    "seed",
    "mode",
    "horizon",
    "generations",
    "replications",
    "radii",
    "source",
    "target",
    "targets",
    "horizons",
    "line",
    "lag",
    "observed_lags",
    "population_cap",
    "rho",
    "m",
    "fiber",
    "dirichlet_radii",
];

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}` expects a number, got `{value}`")))
}

fn number_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = value.split([',', ';']).map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Config(format!("`{key}` needs at least one value")));
    }
    items.into_iter().map(|s| number(key, s)).collect()
}

fn address_list(value: &str) -> Result<Vec<VertexAddr>, CliError> {
    value.split(';').map(str::trim).filter(|s| !s.is_empty()).map(parse_address).collect()
}

fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn finite(key: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("`{key}` must be positive and finite, got {x}")))
    }
}

impl ExperimentConfig {
    /// Parses config text. Keys may appear at most once.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values: Vec<(&'static str, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let key = KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| CliError::Config(format!("line {}: unknown key `{key}`", lineno + 1)))?;
            if values.iter().any(|(k, _)| *k == key) {
                return Err(CliError::Config(format!("line {}: `{key}` set twice", lineno + 1)));
            }
            values.push((key, value.trim().to_string()));
        }
        let get = |k: &str| values.iter().find(|(key, _)| *key == k).map(|(_, v)| v.as_str());
        let require = |k: &str| get(k).ok_or_else(|| CliError::Config(format!("missing required key `{k}`")));

        let cfg = ExperimentConfig {
            experiment: require("experiment")?.parse()?,
            graph: parse_graph(require("graph")?)?,
            kernel: parse_kernel(require("kernel")?)?,
            offspring: get("offspring").map(parse_offspring).transpose()?,
            seed: get("seed").map(|v| number("seed", v)).transpose()?.unwrap_or(1),
            mode: match get("mode") {
                None | Some("float") => ArithmeticMode::Float,
                Some("rational") => ArithmeticMode::Rational,
                Some(other) => return Err(CliError::Config(format!("mode must be float or rational, got `{other}`"))),
            },
            horizon: get("horizon").map(|v| number("horizon", v)).transpose()?,
            generations: get("generations").map(|v| number("generations", v)).transpose()?,
            replications: get("replications").map(|v| number("replications", v)).transpose()?,
            radii: get("radii").map(|v| number_list("radii", v)).transpose()?,
            source: get("source").map(parse_address).transpose()?,
            target: get("target").map(parse_address).transpose()?,
            targets: get("targets").map(address_list).transpose()?,
            horizons: get("horizons").map(|v| number_list("horizons", v)).transpose()?,
            line: get("line").map(parse_line).transpose()?,
            lag: get("lag").map(|v| number("lag", v)).transpose()?,
            observed_lags: get("observed_lags").map(|v| number("observed_lags", v)).transpose()?,
            population_cap: get("population_cap").map(|v| number("population_cap", v)).transpose()?,
            rho: get("rho").map(|v| number("rho", v).and_then(|x| finite("rho", x))).transpose()?,
            m: get("m").map(|v| number("m", v).and_then(|x| finite("m", x))).transpose()?,
            fiber: get("fiber").map(parse_line).transpose()?,
            dirichlet_radii: get("dirichlet_radii").map(|v| number_list("dirichlet_radii", v)).transpose()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Builds the kernel and checks every address and budget against it.
    pub fn validate(&self) -> Result<Kernel, CliError> {
        let kernel = build_kernel(self.kernel.clone(), self.graph.clone())?;
        let graph = kernel.graph();
        for v in self.source.iter().chain(&self.target).chain(self.targets.iter().flatten()) {
            graph.validate(v)?;
        }
        for line in self.line.iter().chain(&self.fiber) {
            let (factor, vertex) = match line {
                LineSpec::Fiber { factor, vertex } | LineSpec::SpineFiber { factor, vertex, .. } => (*factor, vertex),
            };
            let factors = graph
                .factors()
                .ok_or_else(|| CliError::Config(format!("`{line}` needs a product graph")))?;
            let f = factors
                .get(factor - 1)
                .ok_or_else(|| CliError::Config(format!("`{line}`: the graph has {} factors", factors.len())))?;
            f.validate(vertex)?;
        }
        if matches!(self.fiber, Some(LineSpec::SpineFiber { .. })) {
            return Err(CliError::Config("`fiber` takes fiber(i, addr)".into()));
        }
        let needs_offspring = matches!(
            self.experiment,
            ExperimentKind::Simulate
                | ExperimentKind::ManyToOne
                | ExperimentKind::Purple
                | ExperimentKind::Ends
                | ExperimentKind::Fiber
                | ExperimentKind::EmbeddedGw
        );
        if needs_offspring && self.offspring.is_none() {
            return Err(CliError::Config(format!("{} needs `offspring`", self.experiment)));
        }
        if matches!(self.experiment, ExperimentKind::Fiber | ExperimentKind::EmbeddedGw) && graph.factors().is_none() {
            return Err(CliError::Config(format!("{} needs a product graph", self.experiment)));
        }
        if self.replications == Some(0) {
            return Err(CliError::Config("`replications` must be at least 1".into()));
        }
        if self.horizons.as_ref().is_some_and(|h| h.contains(&0)) {
            return Err(CliError::Config("purple budgets must be positive".into()));
        }
        if self.lag == Some(0) || self.observed_lags == Some(0) {
            return Err(CliError::Config("`lag` and `observed_lags` must be positive".into()));
        }
        Ok(kernel)
    }

    /// Canonical text that parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("experiment", self.experiment.to_string());
        put("graph", self.graph.to_string());
        put("kernel", self.kernel.to_string());
        if let Some(o) = &self.offspring {
            put("offspring", o.to_string());
        }
        put("seed", self.seed.to_string());
        put("mode", self.mode.to_string());
        if let Some(v) = self.horizon {
            put("horizon", v.to_string());
        }
        if let Some(v) = self.generations {
            put("generations", v.to_string());
        }
        if let Some(v) = self.replications {
            put("replications", v.to_string());
        }
        if let Some(v) = &self.radii {
            put("radii", join(v, ", "));
        }
        if let Some(v) = &self.source {
            put("source", v.to_string());
        }
        if let Some(v) = &self.target {
            put("target", v.to_string());
        }
        if let Some(v) = &self.targets {
            put("targets", join(v, "; "));
        }
        if let Some(v) = &self.horizons {
            put("horizons", join(v, ", "));
        }
        if let Some(v) = &self.line {
            put("line", v.to_string());
        }
        if let Some(v) = self.lag {
            put("lag", v.to_string());
        }
        if let Some(v) = self.observed_lags {
            put("observed_lags", v.to_string());
        }
        if let Some(v) = self.population_cap {
            put("population_cap", v.to_string());
        }
        if let Some(v) = self.rho {
            put("rho", v.to_string());
        }
        if let Some(v) = self.m {
            put("m", v.to_string());
        }
        if let Some(v) = &self.fiber {
            put("fiber", v.to_string());
        }
        if let Some(v) = &self.dirichlet_radii {
            put("dirichlet_radii", join(v, ", "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
        # paired purple run
        experiment = purple
        graph = product(t(3), t(3))
        kernel = product(1/2: simple@1, 1/2: simple@2)
        offspring = critical
        seed = 7
        horizons = 20; 30
        source = w:,w:
        target = w:00000,w:00000   # distance 10
        replications = 50
    ";

    #[test]
    fn echo_round_trips() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.horizons, Some(vec![20, 30]));
        assert_eq!(cfg.target.as_ref().unwrap().to_string(), "w:00000,w:00000");
        let again = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_text(), cfg.to_text());
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "experiment = purple\ngraph = z\nkernel = simple\nkernel = simple",
            "experiment = purple\ngraph = z\nkernel = simpel",
            "experiment = purple\ngraph = z",
            "experiment = nope\ngraph = z\nkernel = simple",
            "experiment = ends\ngraph = z\nkernel = simple\ncolour = red",
            "experiment = ends\ngraph = z\nkernel = simple\nsource = w:0",
            "experiment = ends\ngraph = z\nkernel = heightbiased(0.7)",
            "experiment = ends\ngraph = z\nkernel = simple\nrho = -1",
            "experiment = fiber\ngraph = product(t(3), z)\nkernel = product(1/2: simple@1, 1/2: simple@2)\nfiber = fiber(3, w:)",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(CliError::Config(_) | CliError::Core(_))), "{bad}");
        }
    }
}
