//! Brownian motion on [0,1] as a vector measure into L²(Ω): total variation
//! grows like √N while the randomized variation stays at 1. Writes the chart
//! to divergence.svg in the working directory.

use gvar::experiments::{run_suite, ExperimentConfig};

fn main() -> gvar::Result<()> {
    let config = ExperimentConfig::from_json(
        r#"{
            "engine": {"paths": 20000, "seed": 3},
            "suite": {"grid": [4, 16, 64, 256, 10000], "empirical_max_atoms": 16}
        }"#,
    )?;
    let outcome = run_suite("example-3-4", &config)?;
    for check in &outcome.report.checks {
        println!("{}", check.describe());
    }
    if let Some(svg) = outcome.artifacts.svg {
        std::fs::write("divergence.svg", svg)?;
        println!("wrote divergence.svg");
    }
    Ok(())
}
