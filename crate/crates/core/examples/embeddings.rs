//! Ratio of the γ-norm to the L²(μ;X) norm on random densities.

use std::sync::Arc;

use gvar::embeddings::{embedding_ratio, run_embedding_trials, Direction};
use gvar::model::{AtomPartition, NormKind, NormedSpace, StepFunction};
use gvar::rng::RandomStream;

fn main() -> gvar::Result<()> {
    let stream = RandomStream::new(2024, 0);
    let phi = StepFunction::new(
        Arc::new(AtomPartition::uniform(2)?),
        2,
        vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    )?;
    for norm in [NormKind::L1, NormKind::L2, NormKind::Linf] {
        let r = embedding_ratio(&phi, &NormedSpace::new(2, norm)?, &stream, 200_000)?;
        println!("canonical {norm:>4}: {:.4} ± {:.4}", r.ratio, r.std_error);
    }

    let cases = [
        (Direction::Type2, NormKind::Lp(4.0)),
        (Direction::Type2, NormKind::Linf),
        (Direction::Cotype2, NormKind::L1),
        (Direction::Cotype2, NormKind::L2),
    ];
    for (dir, norm) in cases {
        let r = run_embedding_trials(dir, &NormedSpace::new(3, norm)?, 5, 200, &stream, 5_000)?;
        println!(
            "{dir} {norm:>4}: mean ratio {:.4}, worst {:.4} ± {:.4} (trial {})",
            r.ratio, r.worst_ratio_over_trials, r.worst_std_error, r.worst_trial
        );
    }
    Ok(())
}
