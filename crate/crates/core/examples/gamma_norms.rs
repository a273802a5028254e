//! γ-variation, γ-summing and total variation of one measure, and the
//! duality between the first two.

use std::sync::Arc;

use gvar::model::{AtomPartition, NormKind, NormedSpace, VectorMeasure};
use gvar::norms::{gamma_variation_norm, total_variation_norm, verify_duality, SearchMode};
use gvar::rng::RandomStream;

fn main() -> gvar::Result<()> {
    let partition = Arc::new(AtomPartition::from_weights(vec![0.1, 0.2, 0.3, 0.4])?);
    let values = vec![vec![0.3, -0.1], vec![0.0, 0.5], vec![-0.2, 0.2], vec![0.4, 0.4]];
    let f = VectorMeasure::new(partition, 2, values)?;
    let stream = RandomStream::new(1, 0);

    for norm in [NormKind::L2, NormKind::L1, NormKind::Linf] {
        let space = NormedSpace::new(2, norm)?;
        let fast = gamma_variation_norm(&f, &space, &stream, 100_000, SearchMode::FastPath)?;
        let full = gamma_variation_norm(&f, &space, &stream, 100_000, SearchMode::Exhaustive)?;
        let dual = verify_duality(&f, &space, &stream, 100_000, 3.0)?;
        println!("{norm}");
        println!("  total variation   {:.4}", total_variation_norm(&f, &space));
        println!(
            "  γ-variation fast  {:.4} ± {:.4}",
            fast.norm_value,
            fast.norm_std_error()
        );
        println!(
            "  γ-variation best  {:.4} ± {:.4} on {:?}",
            full.norm_value,
            full.norm_std_error(),
            full.attaining_grouping.blocks()
        );
        println!(
            "  γ-summing         {:.4}   duality consistent: {} (gap {:.4})",
            dual.summing.norm_value, dual.verdict.consistent, dual.verdict.gap
        );
    }
    Ok(())
}
