//! Named configs reproducing each proposition and numerical check.

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:expr, $description:expr, $($line:expr),+ $(,)?) => {
        Preset { name: $name, description: $description, text: concat!($($line, "\n"),+) }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!(
        "t3xz-critical-ends",
        "Critical BRW on T3 x Z with the unbiased product walk: the trace splits into many ends",
        "experiment = ends",
        "graph = product(t(3), z)",
        "kernel = product(1/2: simple@1, 1/2: simple@2)",
        "offspring = critical",
        "generations = 60",
        "radii = 0, 2, 4, 6, 8",
        "replications = 50",
        "seed = 1",
    ),
    preset!(
        "t3xz-biased-ends",
        "Critical BRW on T3 x Z with a drift p = 0.7 on the line: one end",
        "experiment = ends",
        "graph = product(t(3), z)",
        "kernel = product(1/2: simple@1, 1/2: biasedline(7/10)@2)",
        "offspring = critical",
        "generations = 60",
        "radii = 0, 2, 4, 6, 8",
        "replications = 50",
        "seed = 1",
    ),
    preset!(
        "t3xz-fiber",
        "Last visit to the fiber over the tree root: stabilises for the critical unbiased walk",
        "experiment = fiber",
        "graph = product(t(3), z)",
        "kernel = product(1/2: simple@1, 1/2: simple@2)",
        "offspring = critical",
        "fiber = fiber(1, w:)",
        "generations = 100",
        "replications = 50",
        "seed = 1",
    ),
    preset!(
        "t3xz-biased-purple",
        "Red and blue descendants of the root on T3 x Z with drift 0.7: purple vertices keep appearing",
        "experiment = purple",
        "graph = product(t(3), z)",
        "kernel = product(1/2: simple@1, 1/2: biasedline(7/10)@2)",
        "offspring = critical",
        "horizons = 30, 60",
        "replications = 50",
        "seed = 1",
    ),
    preset!(
        "t3xz-biased-gw",
        "Embedded Galton-Watson process on the fiber over the root, drift 0.7, lag from the return series",
        "experiment = embedded-gw",
        "graph = product(t(3), z)",
        "kernel = product(1/2: simple@1, 1/2: biasedline(7/10)@2)",
        "offspring = critical",
        "line = fiber(1, w:)",
        "replications = 2000",
        "observed_lags = 2",
        "horizon = 1500",
        "seed = 1",
    ),
    preset!(
        "t3xt3-purple",
        "Critical BRW on T3 x T3 from sources at distance 10: finitely many purple vertices",
        "experiment = purple",
        "graph = product(t(3), t(3))",
        "kernel = product(1/2: simple@1, 1/2: simple@2)",
        "offspring = critical",
        "source = w:,w:",
        "target = w:00000,w:00000",
        "horizons = 20, 30",
        "replications = 50",
        "seed = 1",
    ),
    preset!(
        "t3xt3-critical-ends",
        "Critical BRW on T3 x T3 with the unbiased walk: infinitely many ends",
        "experiment = ends",
        "graph = product(t(3), t(3))",
        "kernel = product(1/2: simple@1, 1/2: simple@2)",
        "offspring = critical",
        "generations = 30",
        "radii = 0, 2, 4, 6",
        "replications = 30",
        "seed = 1",
    ),
    preset!(
        "t3xt3-biased",
        "Critical BRW on T3 x T3 with downward height bias 0.7 on the second factor: one end",
        "experiment = ends",
        "graph = product(t(3), t(3))",
        "kernel = product(1/2: simple@1, 1/2: heightbiased(7/10)@2)",
        "offspring = critical",
        "generations = 30",
        "radii = 0, 2, 4, 6",
        "replications = 30",
        "seed = 1",
    ),
    preset!(
        "t3xt3-height-open",
        "Open case: height bias 1/4 on T3 x T3, end count unknown",
        "experiment = ends",
        "graph = product(t(3), t(3))",
        "kernel = product(1/2: simple@1, 1/2: heightbiased(1/4)@2)",
        "offspring = critical",
        "generations = 30",
        "radii = 0, 2, 4, 6",
        "replications = 30",
        "seed = 1",
    ),
    preset!(
        "hammock-one-end",
        "Critical BRW on the hammock graph: red and blue families meet again and again",
        "experiment = purple",
        "graph = hammock",
        "kernel = simple",
        "offspring = critical",
        "horizons = 15, 30",
        "replications = 30",
        "seed = 1",
    ),
    preset!(
        "hammock-series",
        "Exact return probabilities of the simple walk on the hammock",
        "experiment = return-series",
        "graph = hammock",
        "kernel = simple",
        "mode = rational",
        "horizon = 30",
    ),
    preset!(
        "glue-remark",
        "Two hammocks and T3 x T3 glued at one vertex: one, two or infinitely many ends",
        "experiment = ends",
        "graph = glue(hammock@h:s0, hammock@h:s0, product(t(3), t(3))@(w:,w:))",
        "kernel = simple",
        "offspring = critical",
        "generations = 30",
        "radii = 0, 2, 4",
        "replications = 30",
        "seed = 1",
    ),
    preset!(
        "tree-exponent",
        "Return series of the simple walk on T3: decay exponent 3/2",
        "experiment = spectral-fit",
        "graph = t(3)",
        "kernel = simple",
        "horizon = 4000",
        "dirichlet_radii = 4, 8, 12, 16",
    ),
    preset!(
        "exponent-additivity",
        "Exponents add over products: 3/2 + 3/2 on T3 x T3",
        "experiment = spectral-fit",
        "graph = product(t(3), t(3))",
        "kernel = product(1/2: simple@1, 1/2: simple@2)",
        "horizon = 4000",
    ),
    preset!(
        "recurrence-sum",
        "Summability of rho^-n p_n on T3 x Z: diverges, so the critical process is recurrent",
        "experiment = criticality-sum",
        "graph = product(t(3), z)",
        "kernel = product(1/2: simple@1, 1/2: simple@2)",
        "horizon = 4000",
    ),
    preset!(
        "two-walk-identity",
        "Two-walk sum on T3 x T3 at the critical mean, with the diagonal identity check",
        "experiment = two-walk-sum",
        "graph = product(t(3), t(3))",
        "kernel = product(1/2: simple@1, 1/2: simple@2)",
        "horizon = 200",
    ),
    preset!(
        "many-to-one",
        "Mean particle counts against m^n p_n(o, j) on critical T3 x Z",
        "experiment = many-to-one",
        "graph = product(t(3), z)",
        "kernel = product(1/2: simple@1, 1/2: simple@2)",
        "offspring = critical",
        "generations = 8",
        "targets = w:,z:0; w:0,z:1",
        "replications = 20000",
        "seed = 1",
    ),
];

pub fn find_preset(name: &str) -> Result<&'static Preset, CliError> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| CliError::Config(format!("unknown preset `{name}`; run `brwlab presets` for the list")))
}

pub fn preset_config(name: &str) -> Result<ExperimentConfig, CliError> {
    ExperimentConfig::parse(find_preset(name)?.text)
}

/// `name  description` lines.
pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    PRESETS.iter().map(|p| (p.name, p.description)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for p in PRESETS {
            let cfg = ExperimentConfig::parse(p.text).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
        }
        let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), PRESETS.len());
    }
}
