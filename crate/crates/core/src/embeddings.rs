//! Ratios `‖∫ φ dμ‖_{Vγ} / ‖φ‖_{L²(μ;X)}` for step functions, and seeded
//! trial runs estimating the extreme ratio for a given `ℓ_p^d`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{measure_from_density, AtomPartition, NormKind, NormedSpace, StepFunction};
use crate::norms::{gamma_variation_norm, SearchMode};
use crate::rng::RandomStream;

/// `(Σ_n μ(A_n) ‖φ_n‖²)^½`.
pub fn l2_bochner_norm(density: &StepFunction, space: &NormedSpace) -> f64 {
    let w = density.partition().weights();
    (0..density.atoms())
        .map(|n| w[n] * space.norm_sq(density.value(n)))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `‖F‖_{Vγ} ≤ K ‖φ‖_{L²}`, meaningful for `p ≥ 2`.
    Type2,
    /// `‖φ‖_{L²} ≤ K ‖F‖_{Vγ}`, meaningful for `p ≤ 2`.
    Cotype2,
}

impl Direction {
    fn admits(self, kind: NormKind) -> bool {
        let p = kind.exponent();
        match self {
            Direction::Type2 => p >= 2.0,
            Direction::Cotype2 => p <= 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Type2 => "type2",
            Direction::Cotype2 => "cotype2",
        }
    }

    fn requirement(self) -> &'static str {
        match self {
            Direction::Type2 => "p >= 2",
            Direction::Cotype2 => "p <= 2",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub ratio: f64,
    pub std_error: f64,
}

/// `‖∫ φ dμ‖_{Vγ} / ‖φ‖_{L²(μ;X)}`, with the γ-norm on the finest grouping.
/// A zero density has ratio 1 by convention.
pub fn embedding_ratio(
    density: &StepFunction,
    space: &NormedSpace,
    stream: &RandomStream,
    samples: usize,
) -> Result<RatioEstimate> {
    let denominator = l2_bochner_norm(density, space);
    let report = gamma_variation_norm(
        &measure_from_density(density),
        space,
        stream,
        samples,
        SearchMode::FastPath,
    )?;
    if denominator == 0.0 {
        return Ok(RatioEstimate {
            ratio: 1.0,
            std_error: 0.0,
        });
    }
    Ok(RatioEstimate {
        ratio: report.norm_value / denominator,
        std_error: report.norm_std_error() / denominator,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub direction: Direction,
    pub space: NormedSpace,
    pub atoms: usize,
    /// Mean ratio over trials.
    pub ratio: f64,
    /// Largest ratio for `type2`, smallest for `cotype2`.
    pub worst_ratio_over_trials: f64,
    pub worst_std_error: f64,
    pub worst_trial: usize,
    pub trials: usize,
}

/// Draws the input of one trial: Dirichlet(1) weights on `atoms` atoms and
/// i.i.d. standard Gaussian coordinates for `φ`.
pub fn random_density(dim: usize, atoms: usize, stream: &RandomStream) -> Result<StepFunction> {
    let mut rng = stream.rng();
    let raw: Vec<f64> = (0..atoms)
        .map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE))
        .collect();
    let total: f64 = raw.iter().sum();
    let partition = Arc::new(AtomPartition::from_weights(raw.iter().map(|x| x / total).collect())?);
    let values = (0..atoms)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    StepFunction::new(partition, dim, values)
}

/// Runs `trials` seeded trials; trial `t` draws its input from
/// `stream.substream(t).derive("input")` and its Gaussian samples from
/// `stream.substream(t).derive("gamma")`.
pub fn run_embedding_trials(
    direction: Direction,
    space: &NormedSpace,
    atoms: usize,
    trials: usize,
    stream: &RandomStream,
    samples: usize,
) -> Result<EmbeddingReport> {
    if !direction.admits(space.kind()) {
        return Err(Error::DirectionMismatch {
            direction: direction.as_str(),
            requirement: direction.requirement(),
            norm: space.kind().to_string(),
        });
    }
    if trials == 0 {
        return Err(Error::config("trials", "at least one trial is required"));
    }
    let ratios = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = stream.substream(t as u64);
            let phi = random_density(space.dim(), atoms, &s.derive("input"))?;
            embedding_ratio(&phi, space, &s.derive("gamma"), samples)
        })
        .collect::<Result<Vec<_>>>()?;
    let better = |a: f64, b: f64| match direction {
        Direction::Type2 => a > b,
        Direction::Cotype2 => a < b,
    };
    let mut worst = 0;
    for (t, r) in ratios.iter().enumerate() {
        if better(r.ratio, ratios[worst].ratio) {
            worst = t;
        }
    }
    Ok(EmbeddingReport {
        direction,
        space: *space,
        atoms,
        ratio: ratios.iter().map(|r| r.ratio).sum::<f64>() / trials as f64,
        worst_ratio_over_trials: ratios[worst].ratio,
        worst_std_error: ratios[worst].std_error,
        worst_trial: worst,
        trials,
    })
}
