use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which ℓ_p norm equips ℝ^d.
///
/// Serializes as `"l1"`, `"l2"`, `"linf"` or `{"lp": p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Lp(f64),
    Linf,
}

impl NormKind {
    /// The exponent p, `f64::INFINITY` for the sup norm.
    pub fn exponent(&self) -> f64 {
        match *self {
            NormKind::L1 => 1.0,
            NormKind::L2 => 2.0,
            NormKind::Lp(p) => p,
            NormKind::Linf => f64::INFINITY,
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::L1 => f.write_str("l1"),
            NormKind::L2 => f.write_str("l2"),
            NormKind::Lp(p) => write!(f, "l{p}"),
            NormKind::Linf => f.write_str("linf"),
        }
    }
}

/// The target space X = (ℝ^d, ‖·‖_p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormedSpace {
    dim: usize,
    norm: NormKind,
}

impl NormedSpace {
    pub fn new(dim: usize, norm: NormKind) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        if let NormKind::Lp(p) = norm {
            if !(p.is_finite() && p > 1.0) {
                return Err(Error::InvalidSpace(format!(
                    "lp exponent must be a finite real > 1, got {p}"
                )));
            }
        }
        Ok(Self { dim, norm })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> NormKind {
        self.norm
    }

    /// True when the norm comes from an inner product. On ℝ¹ every ℓ_p
    /// norm is the absolute value, so one-dimensional spaces qualify too.
    pub fn is_hilbert(&self) -> bool {
        self.dim == 1 || self.norm.exponent() == 2.0
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.norm {
            NormKind::L1 => x.iter().map(|v| v.abs()).sum(),
            NormKind::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormKind::Linf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            NormKind::Lp(p) => {
                if p == 2.0 {
                    return x.iter().map(|v| v * v).sum::<f64>().sqrt();
                }
                lp_norm(x, p)
            }
        }
    }

    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        match self.norm {
            NormKind::L2 => x.iter().map(|v| v * v).sum(),
            _ => {
                let n = self.norm(x);
                n * n
            }
        }
    }

    pub(crate) fn check_vector(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Shape(format!(
                "vector of length {} in a space of dimension {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// `(Σ|x_i|^p)^{1/p}`, rescaled by the largest entry only when the plain
/// sum overflows or underflows.
fn lp_norm(x: &[f64], p: f64) -> f64 {
    let integral = p.fract() == 0.0 && p <= 64.0;
    let power = |v: f64| {
        if integral {
            v.abs().powi(p as i32)
        } else {
            v.abs().powf(p)
        }
    };
    let plain: f64 = x.iter().map(|&v| power(v)).sum();
    if plain.is_finite() && plain >= f64::MIN_POSITIVE {
        return plain.powf(1.0 / p);
    }
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|&v| power(v / scale)).sum::<f64>().powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spaces(d: usize) -> Vec<NormedSpace> {
        [
            NormKind::L1,
            NormKind::L2,
            NormKind::Lp(1.5),
            NormKind::Lp(3.0),
            NormKind::Linf,
        ]
        .into_iter()
        .map(|k| NormedSpace::new(d, k).unwrap())
        .collect()
    }

    #[test]
    fn known_values() {
        let x = [3.0, -4.0];
        let norms: Vec<f64> = spaces(2).iter().map(|s| s.norm(&x)).collect();
        assert_eq!(norms[0], 7.0);
        assert_eq!(norms[1], 5.0);
        assert!((norms[3] - (27.0f64 + 64.0).cbrt()).abs() < 1e-12);
        assert_eq!(norms[4], 4.0);
    }

    #[test]
    fn lp_survives_extreme_magnitudes() {
        let x = NormedSpace::new(2, NormKind::Lp(3.0)).unwrap();
        let cube_root_two = 2f64.powf(1.0 / 3.0);
        for scale in [1e-200, 1.0, 1e200] {
            let n = x.norm(&[scale, -scale]);
            assert!((n / scale - cube_root_two).abs() < 1e-12, "{scale}: {n}");
        }
        let y = NormedSpace::new(3, NormKind::Lp(1.5)).unwrap();
        assert!((y.norm(&[1e300, 0.0, 0.0]) - 1e300).abs() < 1e288);
        assert_eq!(y.norm(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(NormedSpace::new(2, NormKind::Lp(1.0)).is_err());
        assert!(NormedSpace::new(2, NormKind::Lp(f64::NAN)).is_err());
        assert!(NormedSpace::new(0, NormKind::L2).is_err());
    }

    #[test]
    fn serde_names() {
        let json = serde_json::to_string(&[NormKind::L1, NormKind::Linf, NormKind::Lp(1.5)]).unwrap();
        assert_eq!(json, r#"["l1","linf",{"lp":1.5}]"#);
        let back: NormKind = serde_json::from_str(r#""l2""#).unwrap();
        assert_eq!(back, NormKind::L2);
    }

    #[test]
    fn hilbert_detection() {
        assert!(NormedSpace::new(3, NormKind::L2).unwrap().is_hilbert());
        assert!(NormedSpace::new(3, NormKind::Lp(2.0)).unwrap().is_hilbert());
        assert!(NormedSpace::new(1, NormKind::Linf).unwrap().is_hilbert());
        assert!(!NormedSpace::new(2, NormKind::L1).unwrap().is_hilbert());
    }

    proptest! {
        #[test]
        fn homogeneous_and_subadditive(
            x in prop::collection::vec(-10.0f64..10.0, 3),
            y in prop::collection::vec(-10.0f64..10.0, 3),
            c in -5.0f64..5.0,
        ) {
            for s in spaces(3) {
                let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
                let lhs = s.norm(&cx);
                let rhs = c.abs() * s.norm(&x);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
                let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                prop_assert!(s.norm(&sum) <= s.norm(&x) + s.norm(&y) + 1e-12);
            }
        }
    }
}
