//! The JSON exchange format for partitions, measures and densities:
//!
//! ```json
//! {"weights": [0.5, 0.5], "boundaries": [0, 0.5, 1], "dim": 2,
//!  "norm": "l2", "values": [[1, 0], [0, 1]]}
//! ```
//!
//! `boundaries` is optional; `norm` is `"l1"`, `"l2"`, `"linf"` or `{"lp": p}`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AtomPartition, NormKind, NormedSpace, StepFunction, VectorMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDocument {
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Vec<f64>>,
    pub dim: usize,
    pub norm: NormKind,
    pub values: Vec<Vec<f64>>,
}

impl MeasureDocument {
    pub fn from_measure(measure: &VectorMeasure, space: &NormedSpace) -> Self {
        Self::build(measure.partition(), space, measure.values())
    }

    pub fn from_density(density: &StepFunction, space: &NormedSpace) -> Self {
        Self::build(density.partition(), space, density.values())
    }

    fn build(partition: &AtomPartition, space: &NormedSpace, values: Vec<Vec<f64>>) -> Self {
        Self {
            weights: partition.weights().to_vec(),
            boundaries: partition.boundaries().map(<[f64]>::to_vec),
            dim: space.dim(),
            norm: space.kind(),
            values,
        }
    }

    pub fn partition(&self) -> Result<AtomPartition> {
        match &self.boundaries {
            Some(b) => AtomPartition::with_boundaries(self.weights.clone(), b.clone()),
            None => AtomPartition::from_weights(self.weights.clone()),
        }
    }

    pub fn space(&self) -> Result<NormedSpace> {
        NormedSpace::new(self.dim, self.norm)
    }

    pub fn to_measure(&self) -> Result<(VectorMeasure, NormedSpace)> {
        let space = self.space()?;
        let measure = VectorMeasure::new(Arc::new(self.partition()?), self.dim, self.values.clone())?;
        Ok((measure, space))
    }

    pub fn to_density(&self) -> Result<(StepFunction, NormedSpace)> {
        let space = self.space()?;
        let density = StepFunction::new(Arc::new(self.partition()?), self.dim, self.values.clone())?;
        Ok((density, space))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::config(path.display().to_string(), j.to_string()),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_any_field_order() {
        let doc =
            MeasureDocument::from_json(r#"{"values":[[1,0],[0,1]],"norm":{"lp":1.5},"dim":2,"weights":[0.25,0.75]}"#)
                .unwrap();
        let (f, x) = doc.to_measure().unwrap();
        assert_eq!(x.kind(), NormKind::Lp(1.5));
        assert_eq!(f.value(1), &[0.0, 1.0]);
        assert!(f.partition().boundaries().is_none());
    }

    #[test]
    fn roundtrip_with_boundaries() {
        let p = Arc::new(AtomPartition::uniform(2).unwrap());
        let f = VectorMeasure::new(p, 1, vec![vec![0.5], vec![-1.25]]).unwrap();
        let x = NormedSpace::new(1, NormKind::Linf).unwrap();
        let doc = MeasureDocument::from_measure(&f, &x);
        let text = doc.to_json().unwrap();
        assert!(text.contains(r#""norm":"linf""#));
        let (g, y) = MeasureDocument::from_json(&text).unwrap().to_measure().unwrap();
        assert_eq!(f, g);
        assert_eq!(x, y);
    }

    #[test]
    fn rejects_invalid_contents() {
        let bad_weights = r#"{"weights":[0.5,0.4],"dim":1,"norm":"l2","values":[[1],[1]]}"#;
        assert!(MeasureDocument::from_json(bad_weights).unwrap().to_measure().is_err());
        let bad_shape = r#"{"weights":[1],"dim":2,"norm":"l2","values":[[1]]}"#;
        assert!(MeasureDocument::from_json(bad_shape).unwrap().to_measure().is_err());
        let unknown = r#"{"weights":[1],"dim":1,"norm":"l2","values":[[1]],"extra":0}"#;
        assert!(MeasureDocument::from_json(unknown).is_err());
    }
}
