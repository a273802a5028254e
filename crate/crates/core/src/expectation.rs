//! Second moments of Gaussian and Rademacher sums `E‖Σ_n ε_n x_n‖²`.
//!
//! Three routes: closed form in Hilbert spaces (`Σ‖x_n‖²`), exhaustive sign
//! enumeration for Rademacher sums of at most [`ENUMERATION_CAP`] terms, and
//! seeded Monte Carlo with the standard error of the mean.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::NormedSpace;
use crate::rng::RandomStream;

/// Largest Rademacher family evaluated by enumerating all sign patterns.
pub const ENUMERATION_CAP: usize = 20;
/// Monte Carlo draws per substream chunk.
pub const CHUNK: usize = 4096;
/// Agreement required between two exact estimates.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactHilbert,
    ExactEnumeration,
    MonteCarlo,
}

impl Method {
    pub fn is_exact(&self) -> bool {
        !matches!(self, Method::MonteCarlo)
    }
}

/// An estimate of a second moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub method: Method,
}

impl SumEstimate {
    pub fn exact(value: f64, method: Method) -> Self {
        Self {
            value,
            std_error: 0.0,
            samples: 0,
            method,
        }
    }

    pub(crate) fn from_moments(m: &Moments) -> Self {
        Self {
            value: m.mean,
            std_error: m.std_error(),
            samples: m.count,
            method: Method::MonteCarlo,
        }
    }

    /// Root of the moment, with its delta-method standard error.
    pub fn root(&self) -> (f64, f64) {
        let r = self.value.max(0.0).sqrt();
        let se = if r > 0.0 { self.std_error / (2.0 * r) } else { 0.0 };
        (r, se)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            value: self.value * c,
            std_error: self.std_error * c.abs(),
            ..*self
        }
    }
}

/// Running mean and sum of squared deviations (Welford), mergeable in a
/// fixed order (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.count - 1) as f64).max(0.0);
        (var / self.count as f64).sqrt()
    }

    pub fn from_iter(values: impl IntoIterator<Item = f64>) -> Self {
        let mut m = Moments::default();
        for v in values {
            m.push(v);
        }
        m
    }
}

/// Runs `samples` draws in chunks of [`CHUNK`]; chunk `c` uses
/// `stream.substream(c)`. `draw(rng, count, acc)` performs `count` draws.
pub(crate) fn chunked_moments<F>(stream: &RandomStream, samples: usize, draw: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng, usize, &mut Moments) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.substream(c as u64).rng();
            let count = CHUNK.min(samples - c * CHUNK);
            let mut acc = Moments::default();
            draw(&mut rng, count, &mut acc);
            acc
        })
        .collect();
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    total
}

/// Flattens a family of vectors, checking they all live in `space`.
pub(crate) fn flatten(vectors: &[Vec<f64>], space: &NormedSpace) -> Result<Vec<f64>> {
    if vectors.is_empty() {
        return Err(Error::Shape("vector family must be nonempty".into()));
    }
    let mut flat = Vec::with_capacity(vectors.len() * space.dim());
    for v in vectors {
        space.check_vector(v)?;
        flat.extend_from_slice(v);
    }
    Ok(flat)
}

pub(crate) fn hilbert_sum(flat: &[f64]) -> f64 {
    flat.iter().map(|v| v * v).sum()
}

/// `E‖Σ_n γ_n x_n‖²` for independent standard Gaussians `γ_n`.
pub fn gaussian_sum_sq(
    vectors: &[Vec<f64>],
    space: &NormedSpace,
    stream: &RandomStream,
    samples: usize,
) -> Result<SumEstimate> {
    let flat = flatten(vectors, space)?;
    if space.is_hilbert() {
        return Ok(SumEstimate::exact(hilbert_sum(&flat), Method::ExactHilbert));
    }
    gaussian_sum_sq_mc(&flat, space, stream, samples)
}

pub(crate) fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::InsufficientSamples(format!(
            "Monte Carlo needs at least 2 samples, got {samples}"
        )));
    }
    Ok(())
}

/// Monte Carlo route regardless of the norm. Per draw, the `k` Gaussian
/// coefficients are taken in order from the chunk's generator.
pub(crate) fn gaussian_sum_sq_mc(
    flat: &[f64],
    space: &NormedSpace,
    stream: &RandomStream,
    samples: usize,
) -> Result<SumEstimate> {
    check_samples(samples)?;
    let d = space.dim();
    let moments = chunked_moments(stream, samples, |rng, count, acc| {
        let mut sum = vec![0.0; d];
        for _ in 0..count {
            sum.iter_mut().for_each(|s| *s = 0.0);
            for x in flat.chunks_exact(d) {
                let g: f64 = rng.sample(StandardNormal);
                for (s, v) in sum.iter_mut().zip(x) {
                    *s += g * v;
                }
            }
            acc.push(space.norm_sq(&sum));
        }
    });
    Ok(SumEstimate::from_moments(&moments))
}

/// `E‖Σ_n r_n x_n‖²` for independent Rademacher signs `r_n`.
pub fn rademacher_sum_sq(
    vectors: &[Vec<f64>],
    space: &NormedSpace,
    stream: &RandomStream,
    samples: usize,
) -> Result<SumEstimate> {
    let flat = flatten(vectors, space)?;
    let k = vectors.len();
    if k <= ENUMERATION_CAP {
        let value = SignEnumerator::new(k, space.dim()).moment(&flat, space);
        return Ok(SumEstimate::exact(value, Method::ExactEnumeration));
    }
    if space.is_hilbert() {
        return Ok(SumEstimate::exact(hilbert_sum(&flat), Method::ExactHilbert));
    }
    check_samples(samples)?;
    let d = space.dim();
    let moments = chunked_moments(stream, samples, |rng, count, acc| {
        let mut sum = vec![0.0; d];
        for _ in 0..count {
            sum.iter_mut().for_each(|s| *s = 0.0);
            for x in flat.chunks_exact(d) {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                for (s, v) in sum.iter_mut().zip(x) {
                    *s += sign * v;
                }
            }
            acc.push(space.norm_sq(&sum));
        }
    });
    Ok(SumEstimate::from_moments(&moments))
}

/// Exact Rademacher averages by enumerating sign patterns.
///
/// The first sign is fixed to `+1` (the norm is even). The remaining signs
/// are split in two halves whose partial sums are tabulated once, so each
/// pattern costs a single vector addition.
pub(crate) struct SignEnumerator {
    k: usize,
    d: usize,
    low_idx: Vec<usize>,
    high_idx: Vec<usize>,
    low: Vec<f64>,
    high: Vec<f64>,
    scratch: Vec<f64>,
}

impl SignEnumerator {
    pub fn new(k: usize, d: usize) -> Self {
        assert!((1..=ENUMERATION_CAP).contains(&k));
        let free = k - 1;
        let low_bits = free / 2;
        let high_bits = free - low_bits;
        Self {
            k,
            d,
            // low half: vectors 1..=low_bits; high half: vector 0 plus the rest
            low_idx: (1..=low_bits).collect(),
            high_idx: (low_bits + 1..k).collect(),
            low: vec![0.0; (1 << low_bits) * d],
            high: vec![0.0; (1 << high_bits) * d],
            scratch: vec![0.0; d],
        }
    }

    /// `2^{-(k-1)} Σ_patterns ‖x_0 + Σ_{i≥1} r_i x_i‖²` for `k` vectors stored
    /// row-major in `flat`.
    pub fn moment(&mut self, flat: &[f64], space: &NormedSpace) -> f64 {
        let (k, d) = (self.k, self.d);
        debug_assert_eq!(flat.len(), k * d);
        let x = |i: usize| &flat[i * d..(i + 1) * d];
        tabulate(&mut self.low, &self.low_idx, None, &x, d);
        tabulate(&mut self.high, &self.high_idx, Some(x(0)), &x, d);

        let mut total = 0.0;
        for h in self.high.chunks_exact(d) {
            let mut partial = 0.0;
            for l in self.low.chunks_exact(d) {
                for ((s, a), b) in self.scratch.iter_mut().zip(h).zip(l) {
                    *s = a + b;
                }
                partial += space.norm_sq(&self.scratch);
            }
            total += partial;
        }
        total / (1u64 << (k - 1)) as f64
    }
}

/// `table[mask] = base + Σ_j (±1) x_{idx[j]}`, bit j of mask selecting `+`.
fn tabulate<'a>(table: &mut [f64], idx: &[usize], base: Option<&[f64]>, x: &impl Fn(usize) -> &'a [f64], d: usize) {
    let first = &mut table[..d];
    match base {
        Some(b) => first.copy_from_slice(b),
        None => first.iter_mut().for_each(|v| *v = 0.0),
    }
    for &i in idx {
        for (f, v) in first.iter_mut().zip(x(i)) {
            *f -= v;
        }
    }
    for mask in 1usize..(1 << idx.len()) {
        let bit = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let prev = mask ^ (1 << bit);
        let xi = x(idx[bit]);
        let (head, tail) = table.split_at_mut(mask * d);
        let src = &head[prev * d..(prev + 1) * d];
        for ((dst, s), v) in tail[..d].iter_mut().zip(src).zip(xi) {
            *dst = s + 2.0 * v;
        }
    }
}

/// Outcome of a statistical equality test between two estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub consistent: bool,
    pub gap: f64,
    pub combined_error: f64,
    pub z: f64,
}

/// `|a − b| ≤ z·√(σ_a² + σ_b²)`. When both estimates are exact, or the
/// combined error vanishes, they must agree to [`EXACT_TOLERANCE`] (relative
/// to the larger magnitude once it exceeds one).
pub fn compare_estimates(a: &SumEstimate, b: &SumEstimate, z: f64) -> Verdict {
    compare_values(a.value, a.std_error, b.value, b.std_error, z)
}

pub fn compare_values(a: f64, a_se: f64, b: f64, b_se: f64, z: f64) -> Verdict {
    let gap = (a - b).abs();
    let combined_error = (a_se * a_se + b_se * b_se).sqrt();
    let exact_slack = EXACT_TOLERANCE * 1f64.max(a.abs()).max(b.abs());
    let consistent = gap <= (z * combined_error).max(exact_slack);
    Verdict {
        consistent,
        gap,
        combined_error,
        z,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NormKind;
    use std::f64::consts::PI;

    fn space(d: usize, k: NormKind) -> NormedSpace {
        NormedSpace::new(d, k).unwrap()
    }

    fn stream() -> RandomStream {
        RandomStream::new(2024, 0)
    }

    /// Independent oracle: brute-force sign enumeration without the
    /// half-table trick.
    fn brute_rademacher(vectors: &[Vec<f64>], x: &NormedSpace) -> f64 {
        let k = vectors.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << k) {
            let mut s = vec![0.0; x.dim()];
            for (i, v) in vectors.iter().enumerate() {
                let sign = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                for (a, b) in s.iter_mut().zip(v) {
                    *a += sign * b;
                }
            }
            total += x.norm_sq(&s);
        }
        total / f64::from(1u32 << k)
    }

    #[test]
    fn gaussian_hilbert_closed_form() {
        let x = space(2, NormKind::L2);
        let e = gaussian_sum_sq(&[vec![3.0, 4.0]], &x, &stream(), 0).unwrap();
        assert_eq!(e.value, 25.0);
        assert_eq!(e.method, Method::ExactHilbert);
        assert_eq!(e.std_error, 0.0);
        let e = gaussian_sum_sq(&[vec![1.0, 0.0], vec![0.0, 1.0]], &x, &stream(), 0).unwrap();
        assert_eq!(e.value, 2.0);
    }

    #[test]
    fn gaussian_linf_matches_oracle() {
        let x = space(2, NormKind::Linf);
        let e = gaussian_sum_sq(&[vec![1.0, 0.0], vec![0.0, 1.0]], &x, &stream(), 200_000).unwrap();
        let oracle = 1.0 + 2.0 / PI;
        assert_eq!(e.method, Method::MonteCarlo);
        assert!((e.value - oracle).abs() <= 3.0 * e.std_error, "{e:?}");
    }

    #[test]
    fn gaussian_requires_samples_off_hilbert() {
        let x = space(2, NormKind::L1);
        let err = gaussian_sum_sq(&[vec![1.0, 0.0]], &x, &stream(), 0).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples(_)));
    }

    #[test]
    fn gaussian_is_reproducible() {
        let x = space(3, NormKind::Lp(3.0));
        let v = vec![vec![1.0, -2.0, 0.5], vec![0.3, 0.3, 0.3]];
        let a = gaussian_sum_sq(&v, &x, &stream(), 10_000).unwrap();
        let b = gaussian_sum_sq(&v, &x, &stream(), 10_000).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn rademacher_small_cases() {
        let x1 = space(1, NormKind::L1);
        let e = rademacher_sum_sq(&[vec![1.0], vec![1.0]], &x1, &stream(), 0).unwrap();
        assert_eq!(e.value, 2.0);
        assert_eq!(e.method, Method::ExactEnumeration);

        let linf = space(2, NormKind::Linf);
        let e = rademacher_sum_sq(&[vec![1.0, 0.0], vec![0.0, 1.0]], &linf, &stream(), 0).unwrap();
        assert_eq!(e.value, 1.0);

        let e = rademacher_sum_sq(&[vec![3.0, -1.0]], &space(2, NormKind::L1), &stream(), 0).unwrap();
        assert_eq!(e.value, 16.0);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let mut rng = stream().rng();
        for k in 1..=9 {
            for kind in [NormKind::L1, NormKind::Lp(1.5), NormKind::Linf, NormKind::L2] {
                let x = space(3, kind);
                let v: Vec<Vec<f64>> = (0..k)
                    .map(|_| (0..3).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                    .collect();
                let e = rademacher_sum_sq(&v, &x, &stream(), 0).unwrap();
                let b = brute_rademacher(&v, &x);
                assert!(
                    (e.value - b).abs() <= 1e-12 * b.max(1.0),
                    "k={k} {kind}: {} vs {b}",
                    e.value
                );
            }
        }
    }

    #[test]
    fn rademacher_monte_carlo_above_cap() {
        let x = space(2, NormKind::Linf);
        let v: Vec<Vec<f64>> = (0..21)
            .map(|i| vec![1.0, if i % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
        let e = rademacher_sum_sq(&v, &x, &stream(), 50_000).unwrap();
        assert_eq!(e.method, Method::MonteCarlo);
        let h = rademacher_sum_sq(&v, &space(2, NormKind::L2), &stream(), 0).unwrap();
        assert_eq!(h.method, Method::ExactHilbert);
        assert_eq!(h.value, 42.0);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let all = Moments::from_iter(xs.iter().copied());
        let mut a = Moments::from_iter(xs[..37].iter().copied());
        a.merge(&Moments::from_iter(xs[37..].iter().copied()));
        assert!((a.mean - all.mean).abs() < 1e-14);
        assert!((a.m2 - all.m2).abs() < 1e-12);
    }

    #[test]
    fn compare_rules() {
        let ex = |v| SumEstimate::exact(v, Method::ExactHilbert);
        let mc = |v, s| SumEstimate {
            value: v,
            std_error: s,
            samples: 100,
            method: Method::MonteCarlo,
        };
        assert!(compare_estimates(&ex(2.0), &ex(2.0), 3.0).consistent);
        let v = compare_estimates(&mc(2.0, 0.01), &mc(2.02, 0.01), 3.0);
        assert!(v.consistent);
        assert!((v.combined_error - 0.0141421356).abs() < 1e-9);
        assert!(!compare_estimates(&ex(1.0), &mc(2.0, 0.1), 3.0).consistent);
        assert!(!compare_estimates(&ex(1.0), &ex(1.0 + 1e-6), 3.0).consistent);
    }
}
