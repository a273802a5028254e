use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::AtomPartition;

/// Row-major `rows × dim` storage shared by measures, densities and operators.
#[derive(Debug, Clone, PartialEq)]
struct Rows {
    dim: usize,
    data: Vec<f64>,
}

impl Rows {
    fn from_nested(partition: &AtomPartition, dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        if rows.len() != partition.len() {
            return Err(Error::Shape(format!(
                "{} values for {} atoms",
                rows.len(),
                partition.len()
            )));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (n, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "value {n} has length {}, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Shape(format!("value {n} is not finite")));
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    fn to_nested(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    fn map_rows(&self, mut f: impl FnMut(usize, f64) -> f64) -> Self {
        let dim = self.dim;
        let data = self.data.iter().enumerate().map(|(i, &v)| f(i / dim, v)).collect();
        Self { dim, data }
    }
}

/// An ℝ^d-valued measure on the atoms: `F(A_n)` per atom, extended additively.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMeasure {
    partition: Arc<AtomPartition>,
    rows: Rows,
}

impl VectorMeasure {
    pub fn new(partition: Arc<AtomPartition>, dim: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        let rows = Rows::from_nested(&partition, dim, values)?;
        Ok(Self { partition, rows })
    }

    pub fn zero(partition: Arc<AtomPartition>, dim: usize) -> Result<Self> {
        let n = partition.len();
        Self::new(partition, dim, vec![vec![0.0; dim]; n])
    }

    pub fn partition(&self) -> &Arc<AtomPartition> {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.rows.dim
    }

    pub fn atoms(&self) -> usize {
        self.partition.len()
    }

    /// `F(A_n)`.
    pub fn value(&self, n: usize) -> &[f64] {
        self.rows.row(n)
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.rows.to_nested()
    }

    /// `F(A)` for a set of atom indices; the empty set maps to zero.
    pub fn evaluate(&self, atoms: &[usize]) -> Result<Vec<f64>> {
        for &n in atoms {
            self.partition.check_index(n)?;
        }
        Ok(self.evaluate_unchecked(atoms))
    }

    pub(crate) fn evaluate_unchecked(&self, atoms: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for &n in atoms {
            for (o, v) in out.iter_mut().zip(self.value(n)) {
                *o += v;
            }
        }
        out
    }

    /// `F(S)`.
    pub fn total(&self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.atoms()).collect();
        self.evaluate_unchecked(&all)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            partition: self.partition.clone(),
            rows: self.rows.map_rows(|_, v| c * v),
        }
    }
}

/// A simple function φ, constant on each atom.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    partition: Arc<AtomPartition>,
    rows: Rows,
}

impl StepFunction {
    pub fn new(partition: Arc<AtomPartition>, dim: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        let rows = Rows::from_nested(&partition, dim, values)?;
        Ok(Self { partition, rows })
    }

    /// φ ≡ x on every atom.
    pub fn constant(partition: Arc<AtomPartition>, x: &[f64]) -> Result<Self> {
        let n = partition.len();
        Self::new(partition, x.len(), vec![x.to_vec(); n])
    }

    pub fn partition(&self) -> &Arc<AtomPartition> {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.rows.dim
    }

    pub fn atoms(&self) -> usize {
        self.partition.len()
    }

    /// φ_n.
    pub fn value(&self, n: usize) -> &[f64] {
        self.rows.row(n)
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.rows.to_nested()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            partition: self.partition.clone(),
            rows: self.rows.map_rows(|_, v| c * v),
        }
    }
}

/// An operator `T: L²(μ) → ℝ^d` restricted to the span of atom indicators,
/// stored through its images of the orthonormal basis `e_n = 1_{A_n}/√μ(A_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    partition: Arc<AtomPartition>,
    rows: Rows,
}

impl DiscreteOperator {
    pub fn new(partition: Arc<AtomPartition>, dim: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        let rows = Rows::from_nested(&partition, dim, columns)?;
        Ok(Self { partition, rows })
    }

    pub fn partition(&self) -> &Arc<AtomPartition> {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.rows.dim
    }

    pub fn atoms(&self) -> usize {
        self.partition.len()
    }

    /// `T e_n`.
    pub fn column(&self, n: usize) -> &[f64] {
        self.rows.row(n)
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        self.rows.to_nested()
    }

    /// `T f` for `f = Σ_n c_n e_n` given by its coefficients in the normalized
    /// indicator basis.
    pub fn apply(&self, coefficients: &[f64]) -> Result<Vec<f64>> {
        if coefficients.len() != self.atoms() {
            return Err(Error::Shape(format!(
                "{} coefficients for {} basis vectors",
                coefficients.len(),
                self.atoms()
            )));
        }
        let mut out = vec![0.0; self.dim()];
        for (n, c) in coefficients.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(self.column(n)) {
                *o += c * v;
            }
        }
        Ok(out)
    }

    /// `T 1_A`; since `1_{A_n} = √μ(A_n) e_n` this is `Σ_{n∈A} √μ(A_n) T e_n`.
    pub fn apply_indicator(&self, atoms: &[usize]) -> Result<Vec<f64>> {
        let mut coefficients = vec![0.0; self.atoms()];
        for &n in atoms {
            self.partition.check_index(n)?;
            coefficients[n] += self.partition.weight(n).sqrt();
        }
        self.apply(&coefficients)
    }
}

/// The operator with `T 1_A = F(A)`: column n is `F(A_n)/√μ(A_n)`.
pub fn operator_from_measure(measure: &VectorMeasure) -> DiscreteOperator {
    let w = measure.partition.weights();
    DiscreteOperator {
        partition: measure.partition.clone(),
        rows: measure.rows.map_rows(|n, v| v / w[n].sqrt()),
    }
}

/// The measure `A ↦ T 1_A`.
pub fn measure_from_operator(operator: &DiscreteOperator) -> VectorMeasure {
    let w = operator.partition.weights();
    VectorMeasure {
        partition: operator.partition.clone(),
        rows: operator.rows.map_rows(|n, v| w[n].sqrt() * v),
    }
}

/// `F(A) = ∫_A φ dμ`, i.e. `F(A_n) = μ(A_n) φ_n`.
pub fn measure_from_density(density: &StepFunction) -> VectorMeasure {
    let w = density.partition.weights();
    VectorMeasure {
        partition: density.partition.clone(),
        rows: density.rows.map_rows(|n, v| w[n] * v),
    }
}
