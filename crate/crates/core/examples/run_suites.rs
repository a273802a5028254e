//! Run every verification suite on a small configuration and print a summary.
//! cor-2-6 fails on l1: the γ-norm can fall below the L² norm there.

use gvar::experiments::{run_suite, ExperimentConfig, SUITES};

fn main() -> gvar::Result<()> {
    for suite in SUITES {
        // type2 needs p >= 2
        let norm = if suite.name() == "cor-2-5" { "linf" } else { "l1" };
        let config = ExperimentConfig::from_json(&format!(
            r#"{{
                "partition": {{"random": 4}},
                "space": {{"dim": 2, "norm": "{norm}"}},
                "input": {{"generator": {{"count": 2, "seed": 9}}}},
                "engine": {{"samples": 20000, "paths": 20000, "seed": 1}},
                "suite": {{"trials": 40, "grid": [4, 16, 100], "empirical_max_atoms": 16}}
            }}"#
        ))?;
        let outcome = run_suite(suite.name(), &config)?;
        let r = &outcome.report;
        println!(
            "{:<17} {} ({} checks)",
            r.suite,
            if r.passed { "pass" } else { "FAIL" },
            r.checks.len()
        );
        for c in r.failures() {
            println!("    {}", c.describe());
        }
    }
    Ok(())
}
