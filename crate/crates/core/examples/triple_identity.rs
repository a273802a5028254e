//! γ-variation of ∫φdμ, randomized variation of ∫φdW and the L² norm of the
//! stochastic integral agree.

use std::sync::Arc;

use gvar::integration::verify_triple_identity;
use gvar::model::{AtomPartition, NormKind, NormedSpace, StepFunction};
use gvar::norms::SearchMode;
use gvar::rng::RandomStream;

fn main() -> gvar::Result<()> {
    let partition = Arc::new(AtomPartition::from_weights(vec![0.1, 0.15, 0.25, 0.5])?);
    let phi = StepFunction::new(
        partition,
        2,
        vec![vec![1.0, 2.0], vec![-1.0, 0.0], vec![0.5, 0.5], vec![0.0, -1.0]],
    )?;
    for norm in [NormKind::L2, NormKind::L1] {
        let space = NormedSpace::new(2, norm)?;
        let r = verify_triple_identity(
            &phi,
            &space,
            40_000,
            100_000,
            &RandomStream::new(5, 0),
            SearchMode::Exhaustive,
            3.0,
        )?;
        println!("{norm}");
        println!(
            "  ‖F‖_Vγ        {:.4} ± {:.4}",
            r.gamma_variation.norm_value,
            r.gamma_variation.norm_std_error()
        );
        println!(
            "  ‖G‖_Vr        {:.4} ± {:.4} on {:?}",
            r.randomized_variation.norm_value,
            r.randomized_variation.norm_std_error(),
            r.randomized_variation.attaining_grouping.blocks()
        );
        let (v, se) = r.integral.root();
        println!("  (E‖∫φdW‖²)^½  {v:.4} ± {se:.4}");
        println!("  passed {}", r.passed());
    }
    Ok(())
}
