//! Randomized variation of a deterministic measure, searched over groupings.

use std::sync::Arc;

use gvar::model::{AtomPartition, NormKind, NormedSpace, VectorMeasure};
use gvar::norms::{randomized_variation_norm, total_variation_norm, SearchMode, VectorFamily};
use gvar::rng::RandomStream;

fn main() -> gvar::Result<()> {
    let partition = Arc::new(AtomPartition::uniform(6)?);
    let values = vec![
        vec![1.0, 0.0],
        vec![-1.0, 0.5],
        vec![0.5, 0.5],
        vec![0.0, -1.0],
        vec![0.2, 0.1],
        vec![-0.3, 0.9],
    ];
    let f = VectorMeasure::new(partition, 2, values)?;
    for norm in [NormKind::L2, NormKind::L1, NormKind::Linf] {
        let space = NormedSpace::new(2, norm)?;
        let family = VectorFamily::new(&f, &space, RandomStream::new(3, 0), 0)?;
        for mode in [SearchMode::FastPath, SearchMode::Exhaustive, SearchMode::Greedy] {
            let r = randomized_variation_norm(&family, mode)?;
            println!(
                "{norm:>4} {mode:?}: {:.4} on {:?}",
                r.norm_value,
                r.attaining_grouping.blocks()
            );
        }
        println!("{norm:>4} total variation: {:.4}", total_variation_norm(&f, &space));
    }
    Ok(())
}
