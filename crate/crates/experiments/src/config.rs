//! Experiment configuration files.
//!
//! ```toml
//! scenario = "convergence"
//! seed = 1
//! n_grid = [250, 500, 1000, 2000, 4000]
//! repeats = 10
//! n_ref = 20000
//! model = "bumped-surface-eps"       # a fixture name, or an inline [model] table
//! alpha_grid = [1.0, 0.25, { kind = "log-over-n", c = 4.0 }]
//!
//! [network]
//! widths = [1, 8, 8, 4]
//! order = 2
//! seed = 7
//! scale = "unit-h2"                  # or a number
//! activation = "relu"
//!
//! [tau]                              # stability and amplitude scenarios
//! kind = "gaussian-bump"
//! target = "distribution"
//! amplitudes = [0.0, 0.1, 0.2]
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rgcn_core::gcn::{Activation, GcnParams, ScalePolicy};
use rgcn_core::model::{fixtures, model_from_toml_table, sparsity_from_toml_table, DeformTarget, Deformation, RandomGraphModel, Sparsity};
use rgcn_core::{Error, Result};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Convergence,
    SparsitySweep,
    StabilityEdges,
    StabilityDeform,
    DeformAmplitudeSweep,
    ConcentrationCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Convergence,
        Scenario::SparsitySweep,
        Scenario::StabilityEdges,
        Scenario::StabilityDeform,
        Scenario::DeformAmplitudeSweep,
        Scenario::ConcentrationCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Convergence => "convergence",
            Scenario::SparsitySweep => "sparsity-sweep",
            Scenario::StabilityEdges => "stability-edges",
            Scenario::StabilityDeform => "stability-deform",
            Scenario::DeformAmplitudeSweep => "deform-amplitude-sweep",
            Scenario::ConcentrationCheck => "concentration-check",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| config_error(
            "scenario",
            format!("unknown scenario `{s}`; known: {}", Scenario::ALL.map(Scenario::name).join(", ")),
        ))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Input signal fed to the networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    /// The model's signal `f` at the latent positions.
    Signal,
    /// The normalized degrees `A 1 / (α n)`.
    Degree,
}

/// How a deformed graph shares randomness with its baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    /// Same latent and edge seeds, so the difference isolates the deformation.
    Shared,
    /// Same latent seed, independent edge seeds.
    Independent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    pub widths: Vec<usize>,
    pub order: usize,
    pub seed: u64,
    pub scale: ScalePolicy,
    pub activation: Activation,
}

impl NetworkConfig {
    pub fn build(&self) -> Result<GcnParams> {
        GcnParams::random(&self.widths, self.order, self.seed, self.scale, self.activation)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TauConfig {
    pub kind: String,
    pub target: DeformTarget,
    pub amplitudes: Vec<f64>,
    pub coupling: Coupling,
}

impl TauConfig {
    pub fn deformation(&self, dimension: usize, amplitude: f64) -> Result<Deformation> {
        fixtures::deformation(&self.kind, dimension, amplitude)
    }
}

/// A validated experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Fixture name, or `"inline"` for a model given as a table.
    pub model_name: String,
    pub model: RandomGraphModel,
    pub network: NetworkConfig,
    pub n_grid: Vec<usize>,
    pub alpha_grid: Vec<Sparsity>,
    /// Explicit `(n, α)` pairs for the concentration check; overrides the
    /// product of `n_grid` and `alpha_grid`.
    pub points: Vec<(usize, f64)>,
    pub tau: Option<TauConfig>,
    pub repeats: usize,
    pub n_ref: usize,
    pub seed: u64,
    pub rho: f64,
    pub input: InputKind,
    /// Also compute the node-level error against the extended reference.
    pub equivariant: bool,
    /// Dense runs averaged into the sparsity-sweep limit proxy.
    pub proxy_repeats: usize,
    /// Monte-Carlo sample count for envelope inputs.
    pub mc_samples: usize,
    pub output_dir: Option<PathBuf>,
}

fn config_error(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { key: key.into(), message: message.into() }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ModelSpec {
    Fixture(String),
    Inline(toml::Table),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlphaSpec {
    Value(f64),
    Schedule(toml::Table),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScaleSpec {
    Value(f64),
    Name(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    widths: Vec<usize>,
    order: usize,
    #[serde(default)]
    seed: u64,
    scale: Option<ScaleSpec>,
    activation: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTau {
    kind: String,
    target: Option<String>,
    amplitudes: Option<Vec<f64>>,
    coupling: Option<Coupling>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    model: ModelSpec,
    network: RawNetwork,
    n_grid: Option<Vec<usize>>,
    alpha_grid: Option<Vec<AlphaSpec>>,
    points: Option<Vec<(usize, f64)>>,
    tau: Option<RawTau>,
    repeats: Option<usize>,
    n_ref: Option<usize>,
    #[serde(default)]
    seed: u64,
    rho: Option<f64>,
    input: Option<InputKind>,
    equivariant: Option<bool>,
    proxy_repeats: Option<usize>,
    mc_samples: Option<usize>,
    output_dir: Option<PathBuf>,
}

/// Default node-count grid.
pub const DEFAULT_N_GRID: [usize; 5] = [250, 500, 1000, 2000, 4000];
pub const DEFAULT_REPEATS: usize = 10;
pub const DEFAULT_SWEEP_REPEATS: usize = 20;
pub const DEFAULT_N_REF: usize = 20_000;

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let span = e.span().map(|s| format!(" (bytes {}..{})", s.start, s.end)).unwrap_or_default();
            config_error("config", format!("{}{span}", e.message()))
        })?;
        Self::from_raw(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let scenario: Scenario = raw.scenario.parse()?;
        let (model_name, model) = match raw.model {
            ModelSpec::Fixture(name) => {
                let m = fixtures::model(&name)?;
                (name, m)
            }
            ModelSpec::Inline(table) => ("inline".to_string(), model_from_toml_table(&table)?),
        };
        let scale = match raw.network.scale {
            None => ScalePolicy::UnitH2,
            Some(ScaleSpec::Value(v)) => ScalePolicy::Fixed(v),
            Some(ScaleSpec::Name(s)) => s.parse()?,
        };
        let activation = match raw.network.activation {
            None => Activation::Relu,
            Some(a) => a.parse()?,
        };
        let network = NetworkConfig { widths: raw.network.widths, order: raw.network.order, seed: raw.network.seed, scale, activation };
        let alpha_grid = match raw.alpha_grid {
            None => vec![model.sparsity],
            Some(list) => list
                .into_iter()
                .enumerate()
                .map(|(i, a)| match a {
                    AlphaSpec::Value(v) => {
                        let s = Sparsity::Constant(v);
                        s.validate().map_err(|_| config_error(format!("alpha_grid[{i}]"), format!("{v} outside (0, 1]")))?;
                        Ok(s)
                    }
                    AlphaSpec::Schedule(t) => sparsity_from_toml_table(&t, &format!("alpha_grid[{i}]")),
                })
                .collect::<Result<_>>()?,
        };
        let tau = match raw.tau {
            None => None,
            Some(t) => Some(TauConfig {
                kind: t.kind,
                target: t.target.as_deref().unwrap_or("distribution").parse()?,
                amplitudes: t.amplitudes.unwrap_or_else(|| vec![0.2]),
                coupling: t.coupling.unwrap_or(Coupling::Shared),
            }),
        };
        let default_repeats = if scenario == Scenario::DeformAmplitudeSweep { DEFAULT_SWEEP_REPEATS } else { DEFAULT_REPEATS };
        let cfg = Self {
            scenario,
            model_name,
            model,
            network,
            n_grid: raw.n_grid.unwrap_or_else(|| DEFAULT_N_GRID.to_vec()),
            alpha_grid,
            points: raw.points.unwrap_or_default(),
            tau,
            repeats: raw.repeats.unwrap_or(default_repeats),
            n_ref: raw.n_ref.unwrap_or(DEFAULT_N_REF),
            seed: raw.seed,
            rho: raw.rho.unwrap_or(0.05),
            input: raw.input.unwrap_or(InputKind::Signal),
            equivariant: raw.equivariant.unwrap_or(true),
            proxy_repeats: raw.proxy_repeats.unwrap_or(5),
            mc_samples: raw.mc_samples.unwrap_or(rgcn_core::model::DEFAULT_MC_SAMPLES),
            output_dir: raw.output_dir,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the cross-field invariants; called by the parser and again by
    /// the runner for configurations built in code.
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(config_error("n_grid", "must be non-empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_error("n_grid", "must be strictly increasing"));
        }
        if self.n_grid[0] < 2 {
            return Err(config_error("n_grid", "graphs need at least two nodes"));
        }
        if self.repeats == 0 {
            return Err(config_error("repeats", "must be at least 1"));
        }
        if self.alpha_grid.is_empty() {
            return Err(config_error("alpha_grid", "must be non-empty"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(config_error("rho", "must lie in (0, 1)"));
        }
        let expected_input = match self.input {
            InputKind::Signal => self.model.signal.output_dimension,
            InputKind::Degree => 1,
        };
        if self.network.widths.first() != Some(&expected_input) {
            return Err(config_error(
                "network.widths",
                format!("first width must equal the input dimension {expected_input}"),
            ));
        }
        self.network.build()?;
        match self.scenario {
            Scenario::Convergence | Scenario::SparsitySweep => {
                if self.input != InputKind::Signal {
                    return Err(config_error("input", "the reference c-GCN needs the model signal as input"));
                }
                let max_n = *self.n_grid.last().unwrap();
                if self.scenario == Scenario::Convergence && self.n_ref < 4 * max_n {
                    return Err(config_error("n_ref", format!("must be at least 4 * max(n_grid) = {}", 4 * max_n)));
                }
                if self.scenario == Scenario::SparsitySweep && self.proxy_repeats == 0 {
                    return Err(config_error("proxy_repeats", "must be at least 1"));
                }
            }
            Scenario::StabilityDeform | Scenario::DeformAmplitudeSweep => {
                let tau = self.tau.as_ref().ok_or_else(|| config_error("tau", "missing section"))?;
                if tau.amplitudes.is_empty() {
                    return Err(config_error("tau.amplitudes", "must be non-empty"));
                }
                for &t in &tau.amplitudes {
                    tau.deformation(self.model.dimension(), t)?;
                }
            }
            Scenario::ConcentrationCheck => {
                for (i, &(n, a)) in self.points.iter().enumerate() {
                    if n < 2 || !(a > 0.0 && a <= 1.0) {
                        return Err(config_error(format!("points[{i}]"), "need n >= 2 and alpha in (0, 1]"));
                    }
                }
            }
            Scenario::StabilityEdges => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
scenario = "convergence"
model = "bumped-surface-eps"
n_grid = [50, 100]
n_ref = 400
[network]
widths = [1, 4, 2]
order = 1
"#;

    fn key_of(text: &str) -> String {
        match ExperimentConfig::from_toml_str(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn defaults_are_filled_in() {
        let cfg = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.scenario, Scenario::Convergence);
        assert_eq!(cfg.repeats, DEFAULT_REPEATS);
        assert_eq!(cfg.rho, 0.05);
        assert_eq!(cfg.network.scale, ScalePolicy::UnitH2);
        assert_eq!(cfg.network.activation, Activation::Relu);
        assert_eq!(cfg.alpha_grid, vec![Sparsity::Constant(1.0)]);
        assert!(cfg.equivariant);
    }

    #[test]
    fn amplitude_sweep_defaults_to_twenty_repeats() {
        let text = BASE.replace("\"convergence\"", "\"deform-amplitude-sweep\"") + "[tau]\nkind = \"scaling\"\n";
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.repeats, DEFAULT_SWEEP_REPEATS);
        let tau = cfg.tau.unwrap();
        assert_eq!((tau.amplitudes, tau.target, tau.coupling), (vec![0.2], DeformTarget::Distribution, Coupling::Shared));
    }

    #[test]
    fn alpha_grid_accepts_numbers_and_schedules() {
        let text = BASE.replace("n_ref = 400", "n_ref = 400\nalpha_grid = [1.0, 0.25, { kind = \"log-over-n\", c = 4.0 }]");
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.alpha_grid, vec![Sparsity::Constant(1.0), Sparsity::Constant(0.25), Sparsity::LogOverN { c: 4.0 }]);
    }

    #[test]
    fn errors_name_the_offending_key() {
        assert_eq!(key_of(&BASE.replace("[50, 100]", "[100, 50]")), "n_grid");
        assert_eq!(key_of(&BASE.replace("[1, 4, 2]", "[2, 4, 2]")), "network.widths");
        assert_eq!(key_of(&BASE.replace("n_ref = 400", "n_ref = 399")), "n_ref");
        assert_eq!(key_of(&BASE.replace("n_ref = 400", "n_ref = 400\nalpha_grid = [1.5]")), "alpha_grid[0]");
        assert_eq!(key_of(&BASE.replace("n_ref = 400", "n_ref = 400\nrho = 1.0")), "rho");
        assert_eq!(key_of(&BASE.replace("n_ref = 400", "n_ref = 400\nrepeats = 0")), "repeats");
        assert_eq!(key_of(&BASE.replace("\"convergence\"", "\"stability-deform\"")), "tau");
        assert_eq!(key_of(&BASE.replace("n_ref = 400", "n_ref = 400\ninput = \"degree\"")), "input");
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        match ExperimentConfig::from_toml_str(&BASE.replace("n_ref = 400", "n_ref = 400\nnrepeats = 3")) {
            Err(Error::Config { message, .. }) => assert!(message.contains("nrepeats"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        assert!(ExperimentConfig::from_toml_str(&BASE.replace("\"convergence\"", "\"converge\"")).is_err());
        assert!(ExperimentConfig::from_toml_str(&BASE.replace("bumped-surface-eps", "bumped")).is_err());
        assert!(ExperimentConfig::from_toml_str(&BASE.replace("order = 1", "order = 1\nactivation = \"sigmoid\"")).is_err());
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(s.to_string(), s.name());
        }
    }

    #[test]
    fn shipped_configs_validate() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
        for s in Scenario::ALL {
            let cfg = ExperimentConfig::from_file(&dir.join(format!("{s}.toml"))).unwrap();
            assert_eq!(cfg.scenario, s);
        }
    }
}
