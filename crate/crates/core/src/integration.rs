//! Set-indexed Brownian motion on the atoms and stochastic integrals of step
//! functions against it.
//!
//! A path stores one independent `N(0, μ(A_n))` increment per atom, so
//! `W(A)` is a sum of stored increments and additivity holds exactly. The
//! integral of a step function over `A` is `Σ_{n∈A} φ_n ΔW_n` path by path.

use std::io::{Read, Write};
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expectation::SignEnumerator;
use crate::expectation::{compare_estimates, compare_values, Moments, SumEstimate, Verdict, CHUNK, ENUMERATION_CAP};
use crate::model::{measure_from_density, operator_from_measure, AtomPartition, Grouping, NormedSpace, StepFunction};
use crate::norms::{
    gamma_summing_norm, gamma_variation_norm, randomized_variation_norm, NormReport, RademacherFamily, SearchMode,
};
use crate::rng::RandomStream;

const DUMP_MAGIC: &[u8; 4] = b"GVLB";

/// Largest atom count for which [`EmpiricalVectorMeasure::randomisation_checks`]
/// tabulates all atom sign vectors.
pub const SIGN_TABLE_MAX_ATOMS: usize = 12;
const SIGN_TABLE_ROWS: usize = 64;
const DUMP_VERSION: u32 = 1;

/// `M` sample paths of a Brownian motion indexed by the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianEnsemble {
    partition: Arc<AtomPartition>,
    paths: usize,
    increments: Vec<f64>,
    stream: Option<RandomStream>,
}

/// Draws `paths` independent paths; path chunk `c` uses `stream.substream(c)`.
pub fn sample_brownian(partition: Arc<AtomPartition>, paths: usize, stream: &RandomStream) -> Result<BrownianEnsemble> {
    if paths < 2 {
        return Err(Error::InsufficientPaths { need: 2, got: paths });
    }
    let n = partition.len();
    let scales: Vec<f64> = partition.weights().iter().map(|w| w.sqrt()).collect();
    let chunks = paths.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.substream(c as u64).rng();
            let count = CHUNK.min(paths - c * CHUNK);
            let mut out = Vec::with_capacity(count * n);
            for _ in 0..count {
                for s in &scales {
                    let g: f64 = rng.sample(StandardNormal);
                    out.push(s * g);
                }
            }
            out
        })
        .collect();
    Ok(BrownianEnsemble {
        partition,
        paths,
        increments: parts.concat(),
        stream: Some(*stream),
    })
}

impl BrownianEnsemble {
    pub fn partition(&self) -> &Arc<AtomPartition> {
        &self.partition
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn atoms(&self) -> usize {
        self.partition.len()
    }

    pub fn stream(&self) -> Option<RandomStream> {
        self.stream
    }

    /// Increments `ΔW_{m,n}` of path `m`.
    pub fn path(&self, m: usize) -> &[f64] {
        let n = self.atoms();
        &self.increments[m * n..(m + 1) * n]
    }

    /// `W(A)` on path `m`.
    pub fn evaluate(&self, m: usize, atoms: &[usize]) -> f64 {
        let p = self.path(m);
        atoms.iter().map(|&n| p[n]).sum()
    }

    /// `W(A)` on every path.
    pub fn evaluate_all(&self, atoms: &[usize]) -> Result<Vec<f64>> {
        for &n in atoms {
            self.partition.check_index(n)?;
        }
        Ok((0..self.paths).map(|m| self.evaluate(m, atoms)).collect())
    }

    /// Writes the flat little-endian dump: `"GVLB"`, version, `M`, `N` as
    /// u32, then `M × N` row-major f64 increments.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        let m = u32::try_from(self.paths).map_err(|_| Error::Dump("too many paths".into()))?;
        let n = u32::try_from(self.atoms()).map_err(|_| Error::Dump("too many atoms".into()))?;
        out.write_all(DUMP_MAGIC)?;
        out.write_all(&DUMP_VERSION.to_le_bytes())?;
        out.write_all(&m.to_le_bytes())?;
        out.write_all(&n.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.increments.len() * 8);
        for v in &self.increments {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// Reads a dump written by [`write_dump`](Self::write_dump) for the
    /// given partition.
    pub fn read_dump<R: Read>(mut input: R, partition: Arc<AtomPartition>) -> Result<Self> {
        let mut header = [0u8; 16];
        input.read_exact(&mut header)?;
        if &header[..4] != DUMP_MAGIC {
            return Err(Error::Dump("bad magic".into()));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        if word(4) != DUMP_VERSION {
            return Err(Error::Dump(format!("unsupported version {}", word(4))));
        }
        let (m, n) = (word(8) as usize, word(12) as usize);
        if n != partition.len() {
            return Err(Error::Dump(format!(
                "dump has {n} atoms, partition has {}",
                partition.len()
            )));
        }
        if m < 2 {
            return Err(Error::InsufficientPaths { need: 2, got: m });
        }
        let mut body = Vec::new();
        input.read_to_end(&mut body)?;
        if body.len() != m * n * 8 {
            return Err(Error::Dump(format!(
                "expected {} payload bytes, found {}",
                m * n * 8,
                body.len()
            )));
        }
        let increments = body
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(Self {
            partition,
            paths: m,
            increments,
            stream: None,
        })
    }
}

/// Per-path values of an ℝ^d-valued random variable, `paths × dim` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSamples {
    dim: usize,
    data: Vec<f64>,
}

impl PathSamples {
    pub fn paths(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.dim..(m + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Empirical `E‖Y‖²` with the standard error of the mean.
    pub fn second_moment(&self, space: &NormedSpace) -> SumEstimate {
        SumEstimate::from_moments(&Moments::from_iter(self.rows().map(|r| space.norm_sq(r))))
    }

    /// Coordinate means.
    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for r in self.rows() {
            for (o, v) in out.iter_mut().zip(r) {
                *o += v;
            }
        }
        let m = self.paths() as f64;
        out.iter_mut().for_each(|o| *o /= m);
        out
    }

    /// Coordinate variances (unbiased).
    pub fn variance(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|k| {
                let m = Moments::from_iter(self.rows().map(|r| r[k]));
                m.m2 / (m.count.max(2) - 1) as f64
            })
            .collect()
    }
}

fn check_same_partition(a: &AtomPartition, b: &AtomPartition) -> Result<()> {
    if a != b {
        return Err(Error::PartitionMismatch);
    }
    Ok(())
}

/// `∫_A φ dW` on every path.
pub fn stochastic_integral(
    density: &StepFunction,
    ensemble: &BrownianEnsemble,
    atoms: &[usize],
) -> Result<PathSamples> {
    check_same_partition(density.partition(), ensemble.partition())?;
    for &n in atoms {
        ensemble.partition.check_index(n)?;
    }
    let d = density.dim();
    let mut data = vec![0.0; ensemble.paths() * d];
    for (m, row) in data.chunks_exact_mut(d).enumerate() {
        let p = ensemble.path(m);
        for &n in atoms {
            for (o, v) in row.iter_mut().zip(density.value(n)) {
                *o += v * p[n];
            }
        }
    }
    Ok(PathSamples { dim: d, data })
}

/// The measure `G(A) = ∫_A φ dW` with values in `L²(Ω; X)`, stored as the
/// per-path, per-atom contributions `φ_n ΔW_{m,n}`.
///
/// As input to [`randomized_variation_norm`] the paths are split in two:
/// the first half ranks groupings, the second half evaluates the chosen one,
/// so the reported moment is not inflated by the search.
pub struct EmpiricalVectorMeasure {
    partition: Arc<AtomPartition>,
    space: NormedSpace,
    paths: usize,
    contributions: Vec<f64>,
    stream: RandomStream,
    gram: OnceLock<Arc<Vec<f64>>>,
}

pub fn induced_randomized_measure(
    density: &StepFunction,
    ensemble: &BrownianEnsemble,
    space: &NormedSpace,
) -> Result<EmpiricalVectorMeasure> {
    check_same_partition(density.partition(), ensemble.partition())?;
    if density.dim() != space.dim() {
        return Err(Error::Shape(format!(
            "density has dimension {} but the space has dimension {}",
            density.dim(),
            space.dim()
        )));
    }
    let (n, d) = (density.atoms(), density.dim());
    let mut contributions = Vec::with_capacity(ensemble.paths() * n * d);
    for m in 0..ensemble.paths() {
        for (atom, dw) in ensemble.path(m).iter().enumerate() {
            contributions.extend(density.value(atom).iter().map(|v| v * dw));
        }
    }
    let stream = ensemble
        .stream()
        .unwrap_or_else(|| RandomStream::new(0, 0))
        .derive("rademacher");
    Ok(EmpiricalVectorMeasure {
        partition: density.partition().clone(),
        space: *space,
        paths: ensemble.paths(),
        contributions,
        stream,
        gram: OnceLock::new(),
    })
}

impl EmpiricalVectorMeasure {
    pub fn partition(&self) -> &Arc<AtomPartition> {
        &self.partition
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    fn contribution(&self, m: usize, n: usize) -> &[f64] {
        let (atoms, d) = (self.partition.len(), self.space.dim());
        let start = (m * atoms + n) * d;
        &self.contributions[start..start + d]
    }

    /// `G(A)` on every path.
    pub fn block_samples(&self, atoms: &[usize]) -> Result<PathSamples> {
        for &n in atoms {
            self.partition.check_index(n)?;
        }
        let d = self.space.dim();
        let mut data = vec![0.0; self.paths * d];
        for (m, row) in data.chunks_exact_mut(d).enumerate() {
            for &n in atoms {
                for (o, v) in row.iter_mut().zip(self.contribution(m, n)) {
                    *o += v;
                }
            }
        }
        Ok(PathSamples { dim: d, data })
    }

    /// `‖G(A)‖_{L²(Ω;X)}` as the root mean square over paths.
    pub fn l2_norm(&self, atoms: &[usize]) -> Result<SumEstimate> {
        Ok(self.block_samples(atoms)?.second_moment(&self.space))
    }

    /// [`check_randomisation_identity`] on this measure's paths.
    pub fn randomisation_check(&self, grouping: &Grouping, z: f64) -> Result<RandomisationCheck> {
        if grouping.len() > ENUMERATION_CAP {
            return Err(Error::SizeLimit {
                what: "randomisation identity check",
                cap: ENUMERATION_CAP,
                detail: "blocks enumerated over 2^20 sign patterns",
                got: grouping.len(),
            });
        }
        for b in grouping.blocks() {
            for &n in b {
                self.partition.check_index(n)?;
            }
        }
        let [signed, plain, diff] = self.randomisation_gap(grouping);
        Ok(RandomisationCheck {
            signed: SumEstimate::from_moments(&signed),
            plain: SumEstimate::from_moments(&plain),
            verdict: compare_values(diff.mean, diff.std_error(), 0.0, 0.0, z),
        })
    }

    /// [`randomisation_check`](Self::randomisation_check) for many groupings
    /// on the same paths.
    ///
    /// For covering groupings of up to [`SIGN_TABLE_MAX_ATOMS`] atoms each
    /// path tabulates `‖Σ_n s_n G(A_n)‖²` once for every atom sign vector `s`
    /// (with `s_0 = +1`); a grouping's signed moment is then the mean over the
    /// sign vectors constant on its blocks. Other groupings are checked one
    /// at a time.
    pub fn randomisation_checks(&self, groupings: &[Grouping], z: f64) -> Result<Vec<RandomisationCheck>> {
        let atoms = self.partition.len();
        let tabulated = atoms <= SIGN_TABLE_MAX_ATOMS;
        let mut plans = Vec::new();
        for (i, g) in groupings.iter().enumerate() {
            if g.len() > ENUMERATION_CAP {
                return Err(Error::SizeLimit {
                    what: "randomisation identity check",
                    cap: ENUMERATION_CAP,
                    detail: "blocks enumerated over 2^20 sign patterns",
                    got: g.len(),
                });
            }
            for b in g.blocks() {
                for &n in b {
                    self.partition.check_index(n)?;
                }
            }
            if tabulated && g.is_covering() {
                plans.push((i, sign_indices(g)));
            }
        }
        let mut out: Vec<Option<RandomisationCheck>> = vec![None; groupings.len()];
        if !plans.is_empty() {
            let table = 1usize << (atoms - 1);
            let d = self.space.dim();
            let starts: Vec<usize> = (0..self.paths).step_by(CHUNK).collect();
            let parts: Vec<Vec<[Moments; 3]>> = starts
                .par_iter()
                .map(|&start| {
                    let end = (start + CHUNK).min(self.paths);
                    let mut acc = vec![[Moments::default(); 3]; plans.len()];
                    let mut values = vec![0.0; SIGN_TABLE_ROWS * table];
                    let mut sum = vec![0.0; d];
                    for rows in (start..end).step_by(SIGN_TABLE_ROWS) {
                        let count = SIGN_TABLE_ROWS.min(end - rows);
                        for r in 0..count {
                            self.tabulate_signs(rows + r, &mut values[r * table..(r + 1) * table], &mut sum);
                        }
                        for ((_, idx), a) in plans.iter().zip(acc.iter_mut()) {
                            let scale = 1.0 / idx.len() as f64;
                            for row in values[..count * table].chunks_exact(table) {
                                let signed = idx.iter().map(|&j| row[j as usize]).sum::<f64>() * scale;
                                let plain = row[0];
                                a[0].push(signed);
                                a[1].push(plain);
                                a[2].push(signed - plain);
                            }
                        }
                    }
                    acc
                })
                .collect();
            for (p, (i, _)) in plans.iter().enumerate() {
                let mut total = [Moments::default(); 3];
                for part in &parts {
                    for (t, m) in total.iter_mut().zip(&part[p]) {
                        t.merge(m);
                    }
                }
                let [signed, plain, diff] = total;
                out[*i] = Some(RandomisationCheck {
                    signed: SumEstimate::from_moments(&signed),
                    plain: SumEstimate::from_moments(&plain),
                    verdict: compare_values(diff.mean, diff.std_error(), 0.0, 0.0, z),
                });
            }
        }
        out.into_iter()
            .zip(groupings)
            .map(|(c, g)| match c {
                Some(c) => Ok(c),
                None => self.randomisation_check(g, z),
            })
            .collect()
    }

    /// `values[j] = ‖Σ_n s_n G(A_n)‖²` on path `m`, where bit `n - 1` of `j`
    /// set means `s_n = -1`. Visits the sign vectors in Gray code order so
    /// each entry costs one vector update.
    fn tabulate_signs(&self, m: usize, values: &mut [f64], sum: &mut [f64]) {
        sum.iter_mut().for_each(|s| *s = 0.0);
        let atoms = self.partition.len();
        for n in 0..atoms {
            for (s, v) in sum.iter_mut().zip(self.contribution(m, n)) {
                *s += v;
            }
        }
        values[0] = self.space.norm_sq(sum);
        let mut prev = 0usize;
        for i in 1..values.len() {
            let gray = i ^ (i >> 1);
            let bit = (gray ^ prev).trailing_zeros() as usize;
            let sign = if gray >> bit & 1 == 1 { -2.0 } else { 2.0 };
            for (s, v) in sum.iter_mut().zip(self.contribution(m, bit + 1)) {
                *s += sign * v;
            }
            values[gray] = self.space.norm_sq(sum);
            prev = gray;
        }
    }

    fn selection(&self) -> (usize, usize) {
        (0, self.paths / 2)
    }

    fn evaluation(&self) -> (usize, usize) {
        (self.paths / 2, self.paths)
    }

    /// Per-path `E_r‖Σ_b r_b G(B_b)‖²` over `[lo, hi)`. Sign patterns are
    /// enumerated for up to [`ENUMERATION_CAP`] blocks; beyond that (outside
    /// Hilbert spaces) one random sign vector per path is drawn.
    fn rademacher_moments(&self, grouping: &Grouping, lo: usize, hi: usize) -> Moments {
        let [m] = self.fold_paths(grouping, lo, hi, |signed, _, _| [signed]);
        m
    }

    /// Signed moment, plain moment `‖Σ_b G(B_b)‖²` and their per-path
    /// difference over all paths.
    fn randomisation_gap(&self, grouping: &Grouping) -> [Moments; 3] {
        let d = self.space.dim();
        self.fold_paths(grouping, 0, self.paths, |signed, sums, total| {
            total.iter_mut().for_each(|t| *t = 0.0);
            for y in sums.chunks_exact(d) {
                for (t, v) in total.iter_mut().zip(y) {
                    *t += v;
                }
            }
            let plain = self.space.norm_sq(total);
            [signed, plain, signed - plain]
        })
    }

    /// Folds `f(signed moment, block sums, scratch)` over paths `[lo, hi)`,
    /// reduced in path chunk order. `scratch` has length `d`.
    fn fold_paths<const K: usize, F>(&self, grouping: &Grouping, lo: usize, hi: usize, f: F) -> [Moments; K]
    where
        F: Fn(f64, &[f64], &mut [f64]) -> [f64; K] + Sync,
    {
        let d = self.space.dim();
        let k = grouping.len();
        let hilbert = self.space.is_hilbert();
        let starts: Vec<usize> = (lo..hi).step_by(CHUNK).collect();
        let parts: Vec<[Moments; K]> = starts
            .par_iter()
            .map(|&start| {
                let end = (start + CHUNK).min(hi);
                let mut rng = self.stream.substream((start / CHUNK) as u64).rng();
                let mut enumerator = (!hilbert && k <= ENUMERATION_CAP).then(|| SignEnumerator::new(k, d));
                let mut sums = vec![0.0; k * d];
                let mut signed_sum = vec![0.0; d];
                let mut scratch = vec![0.0; d];
                let mut acc = [Moments::default(); K];
                for m in start..end {
                    sums.iter_mut().for_each(|s| *s = 0.0);
                    for (b, block) in grouping.blocks().iter().enumerate() {
                        let dst = &mut sums[b * d..(b + 1) * d];
                        for &n in block {
                            for (o, v) in dst.iter_mut().zip(self.contribution(m, n)) {
                                *o += v;
                            }
                        }
                    }
                    let signed = if hilbert {
                        sums.chunks_exact(d).map(|y| self.space.norm_sq(y)).sum()
                    } else if let Some(e) = enumerator.as_mut() {
                        e.moment(&sums, &self.space)
                    } else {
                        signed_sum.iter_mut().for_each(|s| *s = 0.0);
                        for y in sums.chunks_exact(d) {
                            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                            for (s, v) in signed_sum.iter_mut().zip(y) {
                                *s += sign * v;
                            }
                        }
                        self.space.norm_sq(&signed_sum)
                    };
                    for (a, v) in acc.iter_mut().zip(f(signed, &sums, &mut scratch)) {
                        a.push(v);
                    }
                }
                acc
            })
            .collect();
        let mut total = [Moments::default(); K];
        for p in &parts {
            for (t, v) in total.iter_mut().zip(p) {
                t.merge(v);
            }
        }
        total
    }

    fn compute_gram(&self, lo: usize, hi: usize) -> Vec<f64> {
        let n = self.partition.len();
        let starts: Vec<usize> = (lo..hi).step_by(CHUNK).collect();
        let parts: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&start| {
                let end = (start + CHUNK).min(hi);
                let mut g = vec![0.0; n * n];
                for m in start..end {
                    for i in 0..n {
                        let yi = self.contribution(m, i);
                        for j in i..n {
                            let yj = self.contribution(m, j);
                            g[i * n + j] += yi.iter().zip(yj).map(|(a, b)| a * b).sum::<f64>();
                        }
                    }
                }
                g
            })
            .collect();
        let mut gram = vec![0.0; n * n];
        for p in &parts {
            for (g, v) in gram.iter_mut().zip(p) {
                *g += v;
            }
        }
        let count = (hi - lo) as f64;
        for i in 0..n {
            for j in i..n {
                let v = gram[i * n + j] / count;
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        gram
    }
}

impl RademacherFamily for EmpiricalVectorMeasure {
    fn atoms(&self) -> usize {
        self.partition.len()
    }

    fn score(&self, grouping: &Grouping) -> Result<f64> {
        let (lo, hi) = self.selection();
        Ok(self.rademacher_moments(grouping, lo, hi).mean)
    }

    fn moment(&self, grouping: &Grouping) -> Result<SumEstimate> {
        let (lo, hi) = self.evaluation();
        if hi - lo < 2 {
            return Err(Error::InsufficientPaths {
                need: 4,
                got: self.paths,
            });
        }
        Ok(SumEstimate::from_moments(&self.rademacher_moments(grouping, lo, hi)))
    }

    fn full_moment(&self, grouping: &Grouping) -> Result<SumEstimate> {
        Ok(SumEstimate::from_moments(
            &self.rademacher_moments(grouping, 0, self.paths),
        ))
    }

    fn gram(&self) -> Option<Arc<Vec<f64>>> {
        if !self.space.is_hilbert() {
            return None;
        }
        let (lo, hi) = self.selection();
        Some(self.gram.get_or_init(|| Arc::new(self.compute_gram(lo, hi))).clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomisationCheck {
    /// `E_r E‖Σ_b r_b G(B_b)‖²`.
    pub signed: SumEstimate,
    /// `E‖Σ_b G(B_b)‖²`.
    pub plain: SumEstimate,
    /// Paired per-path comparison of the two.
    pub verdict: Verdict,
}

/// Checks `E‖Σ_b r_b G(B_b)‖² = E‖Σ_b G(B_b)‖²` on one path ensemble. Both
/// sides are evaluated on the same paths and compared through the standard
/// error of the per-path difference.
pub fn check_randomisation_identity(
    density: &StepFunction,
    ensemble: &BrownianEnsemble,
    space: &NormedSpace,
    grouping: &Grouping,
    z: f64,
) -> Result<RandomisationCheck> {
    induced_randomized_measure(density, ensemble, space)?.randomisation_check(grouping, z)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryCheck {
    /// Empirical `E‖∫_S φ dW‖²`.
    pub integral: SumEstimate,
    /// `‖T_φ‖²_{γ}` for `T_φ f = ∫ f φ dμ`.
    pub operator: SumEstimate,
    pub verdict: Verdict,
}

/// The Itô isometry `E‖∫_S φ dW‖² = ‖T_φ‖²_γ`, with the paths and the
/// operator's Monte Carlo on independent streams.
pub fn verify_ito_isometry(
    density: &StepFunction,
    space: &NormedSpace,
    paths: usize,
    samples: usize,
    stream: &RandomStream,
    z: f64,
) -> Result<IsometryCheck> {
    let ensemble = sample_brownian(density.partition().clone(), paths, &stream.derive("paths"))?;
    let all: Vec<usize> = (0..density.atoms()).collect();
    let integral = stochastic_integral(density, &ensemble, &all)?.second_moment(space);
    let operator = operator_from_measure(&measure_from_density(density));
    let operator = gamma_summing_norm(&operator, space, &stream.derive("operator"), samples)?.estimate;
    let verdict = compare_estimates(&integral, &operator, z);
    Ok(IsometryCheck {
        integral,
        operator,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleIdentityReport {
    /// `‖F‖_{Vγ(μ;X)}` for `F = ∫ φ dμ`.
    pub gamma_variation: NormReport,
    /// `‖G‖_{V^r(μ;L²(Ω;X))}` for `G = ∫ φ dW`.
    pub randomized_variation: NormReport,
    /// `E‖∫_S φ dW‖²`.
    pub integral: SumEstimate,
    pub gamma_vs_randomized: Verdict,
    pub gamma_vs_integral: Verdict,
    pub randomized_vs_integral: Verdict,
}

impl TripleIdentityReport {
    pub fn passed(&self) -> bool {
        self.gamma_vs_randomized.consistent
            && self.gamma_vs_integral.consistent
            && self.randomized_vs_integral.consistent
    }
}

/// Computes the three sides of
/// `‖F‖_{Vγ} = ‖G‖_{V^r} = (E‖∫_S φ dW‖²)^½` and compares their squares
/// pairwise at `z` combined standard errors.
pub fn verify_triple_identity(
    density: &StepFunction,
    space: &NormedSpace,
    paths: usize,
    samples: usize,
    stream: &RandomStream,
    mode: SearchMode,
    z: f64,
) -> Result<TripleIdentityReport> {
    let measure = measure_from_density(density);
    let gamma_variation =
        gamma_variation_norm(&measure, space, &stream.derive("gamma"), samples, SearchMode::FastPath)?;
    let ensemble = sample_brownian(density.partition().clone(), paths, &stream.derive("paths"))?;
    let g = induced_randomized_measure(density, &ensemble, space)?;
    let randomized_variation = randomized_variation_norm(&g, mode)?;
    let all: Vec<usize> = (0..density.atoms()).collect();
    let integral = g.l2_norm(&all)?;
    let a = &gamma_variation.estimate;
    let b = &randomized_variation.estimate;
    Ok(TripleIdentityReport {
        gamma_vs_randomized: compare_estimates(a, b, z),
        gamma_vs_integral: compare_estimates(a, &integral, z),
        randomized_vs_integral: compare_estimates(b, &integral, z),
        gamma_variation,
        randomized_variation,
        integral,
    })
}

/// Table indices of the sign vectors constant on the blocks of a covering
/// grouping, the block holding atom 0 kept positive.
fn sign_indices(grouping: &Grouping) -> Vec<u32> {
    let masks: Vec<u32> = grouping
        .blocks()
        .iter()
        .filter(|b| !b.contains(&0))
        .map(|b| b.iter().fold(0u32, |m, &n| m | 1 << (n - 1)))
        .collect();
    (0u32..1 << masks.len())
        .map(|p| {
            masks
                .iter()
                .enumerate()
                .filter(|(j, _)| p >> j & 1 == 1)
                .fold(0, |acc, (_, m)| acc | m)
        })
        .collect()
}
