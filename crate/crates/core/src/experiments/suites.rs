use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::config::{ExperimentConfig, Resolved};
use super::report::{Check, SuiteReport};
use super::svg::{line_chart, Series};
use crate::embeddings::{l2_bochner_norm, run_embedding_trials, Direction};
use crate::error::{Error, Result};
use crate::expectation::{compare_estimates, compare_values, Verdict};
use crate::integration::verify_triple_identity;
use crate::integration::{induced_randomized_measure, sample_brownian, stochastic_integral};
use crate::model::{
    enumerate_groupings, operator_from_measure, AtomPartition, Grouping, GroupingKind, NormKind, NormedSpace,
    StepFunction, VectorMeasure,
};
use crate::norms::{
    brownian_block_moment, gamma_grouping_moments, gamma_summing_norm, gamma_variation_norm, randomized_variation_norm,
    total_variation_norm, verify_duality, VectorFamily,
};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// γ-variation of a measure against the γ-summing norm of its operator.
    Duality,
    /// γ-variation, randomized variation of `∫ φ dW`, and `E‖∫_S φ dW‖²`.
    TripleIdentity,
    /// Largest ratio `‖F‖_{Vγ}/‖φ‖_{L²}`, reported.
    Type2,
    /// Smallest ratio `‖F‖_{Vγ}/‖φ‖_{L²}`, asserted `≥ 1`.
    Cotype2,
    /// Brownian motion: total variation `√N`, randomized variation 1.
    UnboundedVariation,
    /// Every covering grouping is dominated by the finest one.
    FinestPartition,
    /// Signed and plain second moments of independent symmetric blocks agree.
    Randomisation,
}

pub const SUITES: [Suite; 7] = [
    Suite::Duality,
    Suite::TripleIdentity,
    Suite::Type2,
    Suite::Cotype2,
    Suite::UnboundedVariation,
    Suite::FinestPartition,
    Suite::Randomisation,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "thm-2-3",
            Suite::TripleIdentity => "thm-3-3",
            Suite::Type2 => "cor-2-5",
            Suite::Cotype2 => "cor-2-6",
            Suite::UnboundedVariation => "example-3-4",
            Suite::FinestPartition => "finest-partition",
            Suite::Randomisation => "randomisation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SUITES
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownSuite(s.to_owned()))
    }
}

/// Side outputs that do not belong in the JSON report.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub svg: Option<String>,
    pub ensemble: Option<Vec<u8>>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: SuiteReport,
    pub artifacts: Artifacts,
}

fn echo(config: &ExperimentConfig) -> Result<serde_json::Value> {
    let mut c = config.clone();
    c.output = Default::default();
    Ok(serde_json::to_value(c)?)
}

fn stream_for(r: &Resolved, label: &str, i: usize) -> RandomStream {
    r.stream.derive(label).substream(i as u64)
}

/// Every norm of each configured input.
pub fn run_norms(config: &ExperimentConfig) -> Result<SuiteReport> {
    let r = config.resolve()?;
    let space = r.space()?;
    let e = r.engine();
    let mut checks = Vec::new();
    let mut data = Vec::new();
    for (i, input) in r.inputs()?.iter().enumerate() {
        let measure = input.measure();
        let s = stream_for(&r, "norms", i);
        let variation = gamma_variation_norm(&measure, &space, &s.derive("variation"), e.samples, e.mode)?;
        let summing = gamma_summing_norm(
            &operator_from_measure(&measure),
            &space,
            &s.derive("summing"),
            e.samples,
        )?;
        let family = VectorFamily::new(&measure, &space, s.derive("randomized"), e.samples)?;
        let randomized = randomized_variation_norm(&family, e.mode)?;
        let total = total_variation_norm(&measure, &space);
        let mut check = Check::new(format!("norms[{i}]"))
            .with_error("gamma_variation", variation.norm_value, variation.norm_std_error())
            .with_error("gamma_summing", summing.norm_value, summing.norm_std_error())
            .with_error(
                "randomized_variation",
                randomized.norm_value,
                randomized.norm_std_error(),
            )
            .value("total_variation", total)
            .verdict(compare_estimates(&variation.estimate, &summing.estimate, e.z));
        if let super::config::Input::Density(d) = input {
            check = check.value("l2_bochner", l2_bochner_norm(d, &space));
        }
        checks.push(check);
        data.push(json!({
            "gamma_variation": variation,
            "gamma_summing": summing,
            "randomized_variation": randomized,
            "total_variation": total,
        }));
    }
    SuiteReport::new("norms", echo(config)?, checks).with_data(data)
}

pub fn run_suite(name: &str, config: &ExperimentConfig) -> Result<Outcome> {
    let suite: Suite = name.parse()?;
    let r = config.resolve()?;
    let mut artifacts = Artifacts::default();
    let (checks, data) = match suite {
        Suite::Duality => (duality(&r)?, None),
        Suite::TripleIdentity => (triple(&r)?, None),
        Suite::Type2 => embedding(&r, Direction::Type2)?,
        Suite::Cotype2 => embedding(&r, Direction::Cotype2)?,
        Suite::UnboundedVariation => {
            let (checks, rows) = unbounded_variation(&r)?;
            artifacts.svg = Some(divergence_chart(&rows));
            (checks, Some(serde_json::to_value(rows)?))
        }
        Suite::FinestPartition => (finest_partition(&r)?, None),
        Suite::Randomisation => (randomisation(&r)?, None),
    };
    let mut report = SuiteReport::new(suite.name(), echo(config)?, checks);
    report.data = data;
    Ok(Outcome { report, artifacts })
}

fn duality(r: &Resolved) -> Result<Vec<Check>> {
    let space = r.space()?;
    let e = r.engine();
    r.inputs()?
        .iter()
        .enumerate()
        .map(|(i, input)| {
            let d = verify_duality(&input.measure(), &space, &stream_for(r, "thm-2-3", i), e.samples, e.z)?;
            Ok(Check::new(format!("duality[{i}]"))
                .estimate("variation_moment", &d.variation.estimate)
                .estimate("summing_moment", &d.summing.estimate)
                .verdict(d.verdict))
        })
        .collect()
}

fn triple(r: &Resolved) -> Result<Vec<Check>> {
    let space = r.space()?;
    let e = r.engine();
    let mut checks = Vec::new();
    for (i, input) in r.inputs()?.iter().enumerate() {
        let t = verify_triple_identity(
            &input.density(),
            &space,
            e.paths,
            e.samples,
            &stream_for(r, "thm-3-3", i),
            e.mode,
            e.z,
        )?;
        let a = ("gamma_variation", &t.gamma_variation.estimate);
        let b = ("randomized_variation", &t.randomized_variation.estimate);
        let c = ("integral", &t.integral);
        for ((x, y), v) in [(a, b), (a, c), (b, c)].into_iter().zip([
            t.gamma_vs_randomized,
            t.gamma_vs_integral,
            t.randomized_vs_integral,
        ]) {
            checks.push(
                Check::new(format!("triple[{i}] {} vs {}", x.0, y.0))
                    .estimate(x.0, x.1)
                    .estimate(y.0, y.1)
                    .verdict(v),
            );
        }
    }
    Ok(checks)
}

fn embedding(r: &Resolved, direction: Direction) -> Result<(Vec<Check>, Option<serde_json::Value>)> {
    let space = r.space()?;
    let atoms = r.atoms()?;
    let e = r.engine();
    let label = match direction {
        Direction::Type2 => "cor-2-5",
        Direction::Cotype2 => "cor-2-6",
    };
    let report = run_embedding_trials(
        direction,
        &space,
        atoms,
        r.suite().trials,
        &r.stream.derive(label),
        e.samples,
    )?;
    let mut check = Check::new(format!("{direction} ratio"))
        .value("mean_ratio", report.ratio)
        .with_error("worst_ratio", report.worst_ratio_over_trials, report.worst_std_error)
        .value("trials", report.trials as f64);
    if space.is_hilbert() {
        check = check
            .passed((report.worst_ratio_over_trials - 1.0).abs() <= 1e-9)
            .note("Hilbert isometry, ratio 1 to 1e-9");
    } else {
        match direction {
            Direction::Type2 => check = check.note("empirical constant, reported not asserted"),
            Direction::Cotype2 => {
                let shortfall = (1.0 - report.worst_ratio_over_trials).max(0.0);
                check = check
                    .verdict(Verdict {
                        consistent: shortfall <= e.z * report.worst_std_error,
                        gap: shortfall,
                        combined_error: report.worst_std_error,
                        z: e.z,
                    })
                    .note("min ratio >= 1 - z std errors");
            }
        }
    }
    Ok((vec![check], Some(serde_json::to_value(report)?)))
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRow {
    pub atoms: usize,
    pub total_variation: f64,
    pub randomized_variation_analytic: f64,
    pub randomized_variation_empirical: Option<f64>,
    pub randomized_variation_std_error: Option<f64>,
}

fn unbounded_variation(r: &Resolved) -> Result<(Vec<Check>, Vec<DivergenceRow>)> {
    let e = r.engine();
    let line = NormedSpace::new(1, NormKind::L2)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &n in &r.suite().grid {
        let partition = Arc::new(AtomPartition::uniform(n)?);
        // ‖W(A)‖_{L²(Ω)} = √μ(A)
        let roots: Vec<Vec<f64>> = partition.weights().iter().map(|w| vec![w.sqrt()]).collect();
        let tv = total_variation_norm(&VectorMeasure::new(partition.clone(), 1, roots)?, &line);
        let expected = (n as f64).sqrt();
        checks.push(
            Check::new(format!("total variation N={n}"))
                .value("total_variation", tv)
                .value("expected", expected)
                .passed((tv - expected).abs() <= 1e-9 * expected.max(1.0)),
        );
        let analytic = brownian_block_moment(&partition, &Grouping::finest(n)).sqrt();
        checks.push(
            Check::new(format!("randomized variation N={n} analytic"))
                .value("randomized_variation", analytic)
                .value("expected", 1.0)
                .passed((analytic - 1.0).abs() <= 1e-9),
        );
        let mut row = DivergenceRow {
            atoms: n,
            total_variation: tv,
            randomized_variation_analytic: analytic,
            randomized_variation_empirical: None,
            randomized_variation_std_error: None,
        };
        if n <= r.suite().empirical_max_atoms {
            let w = sample_brownian(partition.clone(), e.paths, &stream_for(r, "example-3-4", n))?;
            let one = StepFunction::constant(partition, &[1.0])?;
            let g = induced_randomized_measure(&one, &w, &line)?;
            let rv = randomized_variation_norm(&g, e.mode)?;
            checks.push(
                Check::new(format!("randomized variation N={n} empirical"))
                    .estimate("moment", &rv.estimate)
                    .value("expected", 1.0)
                    .verdict(compare_values(rv.estimate.value, rv.estimate.std_error, 1.0, 0.0, e.z)),
            );
            row.randomized_variation_empirical = Some(rv.norm_value);
            row.randomized_variation_std_error = Some(rv.norm_std_error());
        }
        rows.push(row);
    }
    Ok((checks, rows))
}

/// Total and randomized variation of Brownian motion against N.
pub fn divergence_chart(rows: &[DivergenceRow]) -> String {
    let tv = Series {
        label: "total variation".into(),
        points: rows.iter().map(|r| (r.atoms as f64, r.total_variation)).collect(),
    };
    let rv = Series {
        label: "randomized variation".into(),
        points: rows
            .iter()
            .map(|r| {
                (
                    r.atoms as f64,
                    r.randomized_variation_empirical
                        .unwrap_or(r.randomized_variation_analytic),
                )
            })
            .collect(),
    };
    line_chart("Variation of Brownian motion", "atoms N", "norm", &[tv, rv], true)
}

fn finest_partition(r: &Resolved) -> Result<Vec<Check>> {
    let space = r.space()?;
    let e = r.engine();
    let mut checks = Vec::new();
    for (i, input) in r.inputs()?.iter().enumerate() {
        let measure = input.measure();
        let n = measure.atoms();
        let groupings: Vec<Grouping> = enumerate_groupings(n, GroupingKind::All, true)?.collect();
        let count = groupings.len();
        let moments = gamma_grouping_moments(
            &measure,
            &space,
            groupings,
            &stream_for(r, "finest-partition", i),
            e.samples,
        )?;
        let finest = moments
            .iter()
            .find(|(g, _)| g.len() == n)
            .map(|(_, m)| *m)
            .expect("the finest grouping is enumerated");
        // worst grouping by excess over its tolerance
        let mut worst = None;
        let mut worst_score = f64::NEG_INFINITY;
        for (g, m) in &moments {
            let excess = m.value - finest.value;
            let tol = if space.is_hilbert() {
                1e-12 * finest.value.abs().max(1.0)
            } else {
                e.z * (m.std_error.powi(2) + finest.std_error.powi(2)).sqrt()
            };
            let score = if tol > 0.0 { excess / tol } else { excess };
            if score > worst_score {
                worst_score = score;
                worst = Some((g.clone(), *m, excess, tol));
            }
        }
        let (g, m, excess, tol) = worst.expect("at least one grouping");
        checks.push(
            Check::new(format!("finest dominates[{i}]"))
                .estimate("finest_moment", &finest)
                .estimate("worst_grouping_moment", &m)
                .value("groupings", count as f64)
                .value("excess", excess)
                .value("tolerance", tol)
                .passed(excess <= tol)
                .note(format!("worst grouping {:?}", g.blocks())),
        );
    }
    Ok(checks)
}

fn randomisation(r: &Resolved) -> Result<Vec<Check>> {
    let space = r.space()?;
    let e = r.engine();
    let max_blocks = r.suite().max_blocks;
    let mut checks = Vec::new();
    for (i, input) in r.inputs()?.iter().enumerate() {
        let density = input.density();
        let n = density.atoms();
        let w = sample_brownian(density.partition().clone(), e.paths, &stream_for(r, "randomisation", i))?;
        let g = induced_randomized_measure(&density, &w, &space)?;
        let mut count = 0usize;
        let mut failures = 0usize;
        let mut worst = None;
        let mut worst_z = f64::NEG_INFINITY;
        let groupings: Vec<Grouping> = enumerate_groupings(n, GroupingKind::All, true)?
            .filter(|g| g.len() <= max_blocks)
            .collect();
        let results = g.randomisation_checks(&groupings, e.z)?;
        for (grouping, c) in groupings.into_iter().zip(results) {
            count += 1;
            failures += usize::from(!c.verdict.consistent);
            let z = if c.verdict.combined_error > 0.0 {
                c.verdict.gap / c.verdict.combined_error
            } else {
                0.0
            };
            if z > worst_z {
                worst_z = z;
                worst = Some((grouping, c));
            }
        }
        let (grouping, c) = worst.expect("the coarsest grouping is always checked");
        checks.push(
            Check::new(format!("randomisation[{i}]"))
                .estimate("signed_moment", &c.signed)
                .estimate("plain_moment", &c.plain)
                .value("groupings", count as f64)
                .value("failures", failures as f64)
                .value("worst_z", worst_z)
                .verdict(c.verdict)
                .passed(failures == 0)
                .note(format!("worst grouping {:?}", grouping.blocks())),
        );
    }
    Ok(checks)
}

/// Ensemble statistics of `∫_S φ dW` per input, with the second moment
/// checked against the γ-summing norm of `T_φ`.
pub fn run_integrate(config: &ExperimentConfig) -> Result<Outcome> {
    let r = config.resolve()?;
    let space = r.space()?;
    let e = r.engine();
    let inputs = r.inputs()?;
    if config.output.ensemble.is_some() && inputs.len() != 1 {
        return Err(Error::config("output.ensemble", "a dump needs exactly one input"));
    }
    let mut checks = Vec::new();
    let mut data = Vec::new();
    let mut artifacts = Artifacts::default();
    for (i, input) in inputs.iter().enumerate() {
        let density = input.density();
        let s = stream_for(&r, "integrate", i);
        let w = sample_brownian(density.partition().clone(), e.paths, &s.derive("paths"))?;
        let all: Vec<usize> = (0..density.atoms()).collect();
        let integral = stochastic_integral(&density, &w, &all)?;
        let moment = integral.second_moment(&space);
        let operator = operator_from_measure(&input.measure());
        let summing = gamma_summing_norm(&operator, &space, &s.derive("operator"), e.samples)?;
        checks.push(
            Check::new(format!("isometry[{i}]"))
                .estimate("integral_moment", &moment)
                .estimate("operator_moment", &summing.estimate)
                .verdict(compare_estimates(&moment, &summing.estimate, e.z)),
        );
        data.push(json!({
            "paths": w.paths(),
            "mean": integral.mean(),
            "variance": integral.variance(),
            "second_moment": moment,
        }));
        if config.output.ensemble.is_some() {
            let mut buf = Vec::new();
            w.write_dump(&mut buf)?;
            artifacts.ensemble = Some(buf);
        }
    }
    let report = SuiteReport::new("integrate", echo(config)?, checks).with_data(data)?;
    Ok(Outcome { report, artifacts })
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(json: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(json).unwrap()
    }

    #[test]
    fn suite_names_roundtrip() {
        for s in SUITES {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("thm-9-9".parse::<Suite>(), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn norms_single_atom() {
        let r = run_norms(&config(
            r#"{"partition": {"uniform": 1}, "space": {"dim": 2, "norm": "l2"}, "input": {"measure": [[3, 4]]}}"#,
        ))
        .unwrap();
        let c = &r.checks[0];
        assert_eq!(c.values["gamma_variation"], 5.0);
        assert_eq!(c.values["total_variation"], 5.0);
        assert!(r.passed);
    }

    #[test]
    fn norms_zero_density() {
        let r = run_norms(&config(
            r#"{"partition": {"uniform": 3}, "space": {"dim": 2, "norm": "linf"}, "input": {"density": [[0, 0], [0, 0], [0, 0]]}, "engine": {"samples": 100}}"#,
        ))
        .unwrap();
        assert!(r.checks[0].values.values().all(|&v| v == 0.0));
    }

    #[test]
    fn exhaustive_cap_is_surfaced() {
        let err = run_norms(&config(
            r#"{"partition": {"uniform": 13}, "space": {"dim": 2, "norm": "l1"}, "input": {"generator": {"count": 1}}, "engine": {"mode": "exhaustive", "samples": 100}}"#,
        ))
        .unwrap_err();
        assert!(matches!(err, Error::SizeLimit { cap: 12, .. }), "{err}");
        assert!(err.to_string().contains("Bell"), "{err}");
    }

    #[test]
    fn unbounded_variation_small_grid() {
        let o = run_suite(
            "example-3-4",
            &config(r#"{"engine": {"paths": 20000}, "suite": {"grid": [4, 16, 10000], "empirical_max_atoms": 16}}"#),
        )
        .unwrap();
        assert!(o.report.passed, "{:#?}", o.report.checks);
        let tv: Vec<f64> = o
            .report
            .checks
            .iter()
            .filter(|c| c.name.starts_with("total"))
            .map(|c| c.values["total_variation"])
            .collect();
        assert_eq!(tv.len(), 3);
        assert!((tv[2] - 100.0).abs() < 1e-9);
        assert!(o.artifacts.svg.unwrap().contains("</svg>"));
    }

    #[test]
    fn triple_constant_density() {
        let o = run_suite(
            "thm-3-3",
            &config(r#"{"partition": {"uniform": 3}, "space": {"dim": 2, "norm": "l2"}, "input": {"density": [[3, 4], [3, 4], [3, 4]]}, "engine": {"paths": 20000}}"#),
        )
        .unwrap();
        assert!(o.report.passed);
        assert_eq!(o.report.checks.len(), 3);
    }

    #[test]
    fn finest_partition_linf() {
        let o = run_suite(
            "finest-partition",
            &config(r#"{"partition": {"random": 6}, "space": {"dim": 2, "norm": "linf"}, "input": {"generator": {"count": 2}}, "engine": {"samples": 20000}}"#),
        )
        .unwrap();
        assert!(o.report.passed, "{:#?}", o.report.checks);
        assert_eq!(o.report.checks[0].values["groupings"], 203.0);
    }

    #[test]
    fn randomisation_small() {
        let o = run_suite(
            "randomisation",
            &config(r#"{"partition": {"uniform": 4}, "space": {"dim": 2, "norm": "l1"}, "input": {"generator": {"count": 1}}, "engine": {"paths": 5000}}"#),
        )
        .unwrap();
        assert_eq!(o.report.checks[0].values["groupings"], 15.0);
    }

    #[test]
    fn embedding_suites() {
        let o = run_suite(
            "cor-2-5",
            &config(r#"{"partition": {"random": 3}, "space": {"dim": 3, "norm": "l2"}, "suite": {"trials": 50}}"#),
        )
        .unwrap();
        assert!(o.report.passed);
        let err = run_suite(
            "cor-2-6",
            &config(r#"{"partition": {"random": 3}, "space": {"dim": 3, "norm": "linf"}}"#),
        );
        assert!(matches!(err, Err(Error::DirectionMismatch { .. })));
    }

    #[test]
    fn missing_sections_are_config_errors() {
        let err = run_suite("thm-2-3", &config(r#"{"space": {"dim": 1, "norm": "l2"}}"#)).unwrap_err();
        assert!(
            matches!(err, Error::Config { ref field, .. } if field == "input"),
            "{err}"
        );
    }

    #[test]
    fn reports_are_thread_count_invariant() {
        let c = config(
            r#"{"partition": {"random": 4}, "space": {"dim": 2, "norm": "l1"}, "input": {"generator": {"count": 2}}, "engine": {"samples": 9000, "paths": 9000}}"#,
        );
        let one = with_threads(1, || run_suite("thm-3-3", &c).unwrap().report.to_json().unwrap()).unwrap();
        let four = with_threads(4, || run_suite("thm-3-3", &c).unwrap().report.to_json().unwrap()).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn integrate_dumps_ensemble() {
        let o = run_integrate(&config(
            r#"{"partition": {"uniform": 2}, "space": {"dim": 1, "norm": "l2"}, "input": {"density": [[1], [2]]}, "engine": {"paths": 1000}, "output": {"ensemble": "w.bin"}}"#,
        ))
        .unwrap();
        assert!(o.report.passed);
        assert_eq!(o.artifacts.ensemble.unwrap().len(), 16 + 1000 * 2 * 8);
    }
}
