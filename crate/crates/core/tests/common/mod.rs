#![allow(dead_code)]

use std::sync::Arc;

use gvar::embeddings::random_density;
use gvar::model::{measure_from_density, AtomPartition, NormKind, NormedSpace, StepFunction, VectorMeasure};
use gvar::rng::RandomStream;

/// E max(γ₁², γ₂²) for independent standard Gaussians, frozen from an
/// adaptive 2-D quadrature of 1 + ½E|γ₂² − γ₁²|.
pub const E_MAX_SQ: f64 = 1.636_619_772_367_581_5;

/// E(|γ₁| + |γ₂|)² = 2 + 4/π.
pub const E_L1_SUM_SQ: f64 = 3.273_239_544_735_163;

/// Midpoint rule for `∬ f(x, y) φ(x) φ(y) dx dy` on `[-l, l]²`.
pub fn gaussian_quadrature_2d(f: impl Fn(f64, f64) -> f64, l: f64, cells: usize) -> f64 {
    let h = 2.0 * l / cells as f64;
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let nodes: Vec<(f64, f64)> = (0..cells)
        .map(|i| {
            let t = -l + (i as f64 + 0.5) * h;
            (t, density(t) * h)
        })
        .collect();
    let mut total = 0.0;
    for &(x, wx) in &nodes {
        let mut row = 0.0;
        for &(y, wy) in &nodes {
            row += f(x, y) * wy;
        }
        total += row * wx;
    }
    total
}

pub fn space(dim: usize, norm: NormKind) -> NormedSpace {
    NormedSpace::new(dim, norm).unwrap()
}

pub fn uniform(n: usize) -> Arc<AtomPartition> {
    Arc::new(AtomPartition::uniform(n).unwrap())
}

/// Seeded density with Dirichlet(1) weights and Gaussian values.
pub fn density(seed: u64, index: u64, dim: usize, atoms: usize) -> StepFunction {
    random_density(
        dim,
        atoms,
        &RandomStream::new(seed, 0).derive("fixture").substream(index),
    )
    .unwrap()
}

pub fn measure(seed: u64, index: u64, dim: usize, atoms: usize) -> VectorMeasure {
    measure_from_density(&density(seed, index, dim, atoms))
}

pub const NORMS: [NormKind; 4] = [NormKind::L1, NormKind::L2, NormKind::Lp(3.0), NormKind::Linf];
