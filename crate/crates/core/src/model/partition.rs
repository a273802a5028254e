use crate::error::{Error, Result};

const MASS_TOLERANCE: f64 = 1e-12;

/// A finite probability space: `N` atoms with strictly positive masses
/// summing to one. Every subset of atoms is measurable.
///
/// When built from boundaries the space is the unit interval cut into
/// half-open cells `(t_{n-1}, t_n]`, which is what contiguous groupings
/// refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomPartition {
    weights: Vec<f64>,
    boundaries: Option<Vec<f64>>,
}

impl AtomPartition {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self {
            weights,
            boundaries: None,
        })
    }

    pub fn from_boundaries(boundaries: Vec<f64>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidPartition("boundaries need at least two points".into()));
        }
        if boundaries[0] != 0.0 || boundaries[boundaries.len() - 1] != 1.0 {
            return Err(Error::InvalidPartition(
                "boundaries must start at 0 and end at 1".into(),
            ));
        }
        let weights: Vec<f64> = boundaries.windows(2).map(|t| t[1] - t[0]).collect();
        if let Some(pos) = boundaries.windows(2).position(|t| t[1] <= t[0]) {
            return Err(Error::InvalidPartition(format!(
                "boundaries must be strictly increasing (at position {})",
                pos + 1
            )));
        }
        check_weights(&weights)?;
        Ok(Self {
            weights,
            boundaries: Some(boundaries),
        })
    }

    /// Explicit weights together with matching boundaries.
    pub fn with_boundaries(weights: Vec<f64>, boundaries: Vec<f64>) -> Result<Self> {
        let from_bounds = Self::from_boundaries(boundaries)?;
        if from_bounds.weights.len() != weights.len() {
            return Err(Error::InvalidPartition(format!(
                "{} weights but {} boundary cells",
                weights.len(),
                from_bounds.weights.len()
            )));
        }
        for (n, (w, cell)) in weights.iter().zip(&from_bounds.weights).enumerate() {
            if (w - cell).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidPartition(format!(
                    "weight {n} is {w} but its cell has length {cell}"
                )));
            }
        }
        check_weights(&weights)?;
        Ok(Self {
            weights,
            boundaries: from_bounds.boundaries,
        })
    }

    /// `n` equal atoms on the unit interval.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("at least one atom required".into()));
        }
        let boundaries: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let weights = vec![1.0 / n as f64; n];
        check_weights(&weights)?;
        Ok(Self {
            weights,
            boundaries: Some(boundaries),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, n: usize) -> f64 {
        self.weights[n]
    }

    pub fn boundaries(&self) -> Option<&[f64]> {
        self.boundaries.as_deref()
    }

    /// μ of a set of atoms.
    pub fn mass(&self, atoms: &[usize]) -> f64 {
        atoms.iter().map(|&n| self.weights[n]).sum()
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                atoms: self.len(),
            });
        }
        Ok(())
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidPartition("at least one atom required".into()));
    }
    if let Some(n) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidPartition(format!(
            "weight {n} is {}, weights must be strictly positive",
            weights[n]
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidPartition(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}
