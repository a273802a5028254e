//! Build a partition, a vector measure and a density; enumerate groupings and
//! round-trip the measure through its JSON document.

use std::sync::Arc;

use gvar::model::{
    bell, enumerate_groupings, measure_from_density, AtomPartition, GroupingKind, MeasureDocument, NormKind,
    NormedSpace, StepFunction,
};

fn main() -> gvar::Result<()> {
    let partition = Arc::new(AtomPartition::from_boundaries(vec![0.0, 0.2, 0.5, 1.0])?);
    println!("weights {:?}", partition.weights());

    let phi = StepFunction::new(
        partition.clone(),
        2,
        vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![-1.0, 1.0]],
    )?;
    let f = measure_from_density(&phi);
    println!("F(A_0 ∪ A_2) = {:?}", f.evaluate(&[0, 2])?);
    println!("F(S) = {:?}", f.total());

    let groupings: Vec<_> = enumerate_groupings(3, GroupingKind::All, true)?.collect();
    println!("{} covering groupings of 3 atoms (Bell {})", groupings.len(), bell(3));
    for g in &groupings {
        println!("  {:?}", g.blocks());
    }

    let space = NormedSpace::new(2, NormKind::Lp(3.0))?;
    let json = MeasureDocument::from_measure(&f, &space).to_json()?;
    println!("{json}");
    let (back, _) = MeasureDocument::from_json(&json)?.to_measure()?;
    assert_eq!(back.values(), f.values());
    Ok(())
}
