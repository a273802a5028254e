use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::embeddings::random_density;
use crate::error::{Error, Result};
use crate::model::{measure_from_density, AtomPartition, NormKind, NormedSpace, StepFunction, VectorMeasure};
use crate::norms::SearchMode;
use crate::rng::RandomStream;

/// One JSON document describing an experiment.
///
/// ```json
/// {
///   "partition": {"uniform": 4},
///   "space": {"dim": 2, "norm": "linf"},
///   "input": {"density": [[1, 0], [0, 1], [1, 1], [0, 0]]},
///   "engine": {"samples": 100000, "seed": 7}
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub suite: SuiteSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum PartitionSpec {
    Uniform(usize),
    Weights(Vec<f64>),
    Boundaries(Vec<f64>),
    /// Dirichlet(1) weights on this many atoms, drawn per generated input.
    Random(usize),
}

impl PartitionSpec {
    pub fn atoms(&self) -> usize {
        match self {
            PartitionSpec::Uniform(n) | PartitionSpec::Random(n) => *n,
            PartitionSpec::Weights(w) => w.len(),
            PartitionSpec::Boundaries(b) => b.len().saturating_sub(1),
        }
    }

    fn fixed(&self) -> Result<Option<Arc<AtomPartition>>> {
        let built = match self {
            PartitionSpec::Uniform(n) => AtomPartition::uniform(*n),
            PartitionSpec::Weights(w) => AtomPartition::from_weights(w.clone()),
            PartitionSpec::Boundaries(b) => AtomPartition::from_boundaries(b.clone()),
            PartitionSpec::Random(n) => {
                if *n == 0 {
                    return Err(Error::config("partition.random", "need at least one atom"));
                }
                return Ok(None);
            }
        };
        built
            .map(|p| Some(Arc::new(p)))
            .map_err(|e| Error::config("partition", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub dim: usize,
    pub norm: NormKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InputSpec {
    /// Measure values `F(A_n)`, one row per atom.
    Measure(Vec<Vec<f64>>),
    /// Density values `φ_n`, one row per atom.
    Density(Vec<Vec<f64>>),
    /// `count` densities with i.i.d. standard Gaussian coordinates.
    Generator {
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSpec {
    pub samples: usize,
    pub paths: usize,
    pub seed: u64,
    pub z: f64,
    pub mode: SearchMode,
}

impl Default for EngineSpec {
    fn default() -> Self {
        Self {
            samples: 100_000,
            paths: 100_000,
            seed: 0,
            z: 3.0,
            mode: SearchMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    /// Binary dump of the path ensemble written by `integrate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<PathBuf>,
}

/// Suite-specific knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSpec {
    /// Atom counts swept by `example-3-4`.
    pub grid: Vec<usize>,
    /// Largest N for which `example-3-4` simulates paths.
    pub empirical_max_atoms: usize,
    /// Trials of the embedding suites.
    pub trials: usize,
    /// Largest block count checked by `randomisation`.
    pub max_blocks: usize,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            grid: vec![4, 16, 64, 100, 10_000],
            empirical_max_atoms: 100,
            trials: 1000,
            max_blocks: 8,
        }
    }
}

/// A validated input: either a measure or a density on its partition.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Measure(VectorMeasure),
    Density(StepFunction),
}

impl Input {
    pub fn measure(&self) -> VectorMeasure {
        match self {
            Input::Measure(m) => m.clone(),
            Input::Density(d) => measure_from_density(d),
        }
    }

    /// The density `F(A_n)/μ(A_n)` for measure inputs.
    pub fn density(&self) -> StepFunction {
        match self {
            Input::Density(d) => d.clone(),
            Input::Measure(m) => {
                let w = m.partition().weights();
                let values = (0..m.atoms())
                    .map(|n| m.value(n).iter().map(|v| v / w[n]).collect())
                    .collect();
                StepFunction::new(m.partition().clone(), m.dim(), values).expect("shape taken from a valid measure")
            }
        }
    }

    pub fn partition(&self) -> &Arc<AtomPartition> {
        match self {
            Input::Measure(m) => m.partition(),
            Input::Density(d) => d.partition(),
        }
    }
}

/// Everything a suite needs, validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub partition: Option<Arc<AtomPartition>>,
    pub space: Option<NormedSpace>,
    pub inputs: Vec<Input>,
    pub stream: RandomStream,
}

impl Resolved {
    pub fn atoms(&self) -> Result<usize> {
        self.config
            .partition
            .as_ref()
            .map(PartitionSpec::atoms)
            .ok_or_else(|| Error::config("partition", "required by this command"))
    }

    pub fn space(&self) -> Result<NormedSpace> {
        self.space
            .ok_or_else(|| Error::config("space", "required by this command"))
    }

    pub fn inputs(&self) -> Result<&[Input]> {
        if self.inputs.is_empty() {
            return Err(Error::config("input", "required by this command"));
        }
        Ok(&self.inputs)
    }

    pub fn engine(&self) -> &EngineSpec {
        &self.config.engine
    }

    pub fn suite(&self) -> &SuiteSpec {
        &self.config.suite
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks every section and materializes the inputs. Nothing random is
    /// evaluated beyond drawing generated inputs.
    pub fn resolve(&self) -> Result<Resolved> {
        let partition = match &self.partition {
            Some(p) => p.fixed()?,
            None => None,
        };
        let space = self
            .space
            .map(|s| NormedSpace::new(s.dim, s.norm).map_err(|e| Error::config("space", e.to_string())))
            .transpose()?;
        let need_space = || space.ok_or_else(|| Error::config("space", "required to read an input"));
        let e = &self.engine;
        if !(e.z.is_finite() && e.z > 0.0) {
            return Err(Error::config(
                "engine.z",
                format!("must be a positive number, got {}", e.z),
            ));
        }
        if self.suite.max_blocks == 0 {
            return Err(Error::config("suite.max_blocks", "must be positive"));
        }
        if self.suite.grid.contains(&0) {
            return Err(Error::config("suite.grid", "atom counts must be positive"));
        }
        let stream = RandomStream::new(e.seed, 0);
        let inputs = match &self.input {
            None => Vec::new(),
            Some(InputSpec::Measure(values)) => {
                let p = partition
                    .clone()
                    .ok_or_else(|| Error::config("input.measure", "needs a fixed partition"))?;
                let m = VectorMeasure::new(p, need_space()?.dim(), values.clone())
                    .map_err(|e| Error::config("input.measure", e.to_string()))?;
                vec![Input::Measure(m)]
            }
            Some(InputSpec::Density(values)) => {
                let p = partition
                    .clone()
                    .ok_or_else(|| Error::config("input.density", "needs a fixed partition"))?;
                let d = StepFunction::new(p, need_space()?.dim(), values.clone())
                    .map_err(|e| Error::config("input.density", e.to_string()))?;
                vec![Input::Density(d)]
            }
            Some(InputSpec::Generator { count, seed }) => {
                if *count == 0 {
                    return Err(Error::config("input.generator.count", "must be positive"));
                }
                let atoms = self
                    .partition
                    .as_ref()
                    .map(PartitionSpec::atoms)
                    .ok_or_else(|| Error::config("partition", "required to generate inputs"))?;
                let dim = need_space()?.dim();
                let base = RandomStream::new(seed.unwrap_or(e.seed), 0).derive("input");
                (0..*count)
                    .map(|i| generate(&partition, atoms, dim, &base.substream(i as u64)))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Resolved {
            config: self.clone(),
            partition,
            space,
            inputs,
            stream,
        })
    }
}

fn generate(partition: &Option<Arc<AtomPartition>>, atoms: usize, dim: usize, stream: &RandomStream) -> Result<Input> {
    let density = match partition {
        None => random_density(dim, atoms, stream)?,
        Some(p) => {
            let mut rng = stream.rng();
            let values = (0..p.len())
                .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
                .collect();
            StepFunction::new(p.clone(), dim, values)?
        }
    };
    Ok(Input::Density(density))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c =
            ExperimentConfig::from_json(r#"{"partition": {"uniform": 3}, "space": {"dim": 2, "norm": "l1"}}"#).unwrap();
        assert_eq!(c.engine, EngineSpec::default());
        let r = c.resolve().unwrap();
        assert_eq!(r.atoms().unwrap(), 3);
        let bare = ExperimentConfig::from_json("{}").unwrap().resolve().unwrap();
        assert!(matches!(bare.space(), Err(Error::Config { .. })));
        assert!(r.inputs.is_empty());
    }

    #[test]
    fn field_level_errors() {
        let bad = [
            (
                r#"{"partition": {"weights": [0.5, 0.4]}, "space": {"dim": 1, "norm": "l2"}}"#,
                "partition",
            ),
            (
                r#"{"partition": {"uniform": 2}, "space": {"dim": 1, "norm": {"lp": 0.5}}}"#,
                "space",
            ),
            (
                r#"{"partition": {"uniform": 2}, "space": {"dim": 2, "norm": "l2"}, "input": {"measure": [[1, 2]]}}"#,
                "input.measure",
            ),
            (
                r#"{"partition": {"uniform": 2}, "space": {"dim": 1, "norm": "l2"}, "engine": {"z": -1}}"#,
                "engine.z",
            ),
            (
                r#"{"partition": {"random": 2}, "space": {"dim": 1, "norm": "l2"}, "input": {"density": [[1], [2]]}}"#,
                "input.density",
            ),
        ];
        for (json, field) in bad {
            match ExperimentConfig::from_json(json).unwrap().resolve() {
                Err(Error::Config { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{json}: {other:?}"),
            }
        }
        assert!(ExperimentConfig::from_json(
            r#"{"partition": {"uniform": 2}, "space": {"dim": 1, "norm": "l2"}, "extra": 1}"#
        )
        .is_err());
    }

    #[test]
    fn generated_inputs_are_seeded() {
        let json = r#"{"partition": {"random": 4}, "space": {"dim": 2, "norm": "linf"}, "input": {"generator": {"count": 3}}}"#;
        let a = ExperimentConfig::from_json(json).unwrap().resolve().unwrap();
        let b = ExperimentConfig::from_json(json).unwrap().resolve().unwrap();
        assert_eq!(a.inputs, b.inputs);
        assert_eq!(a.inputs.len(), 3);
        assert_ne!(a.inputs[0].partition(), a.inputs[1].partition());
    }

    #[test]
    fn measure_density_roundtrip() {
        let c = ExperimentConfig::from_json(
            r#"{"partition": {"weights": [0.25, 0.75]}, "space": {"dim": 1, "norm": "l2"}, "input": {"measure": [[0.5], [1.5]]}}"#,
        )
        .unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.inputs[0].density().values(), vec![vec![2.0], vec![2.0]]);
    }
}
