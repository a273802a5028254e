//! Simulate set-indexed Brownian paths, integrate a step function against
//! them and check the Itô isometry.

use std::sync::Arc;

use gvar::integration::{sample_brownian, stochastic_integral, verify_ito_isometry, BrownianEnsemble};
use gvar::model::{AtomPartition, NormKind, NormedSpace, StepFunction};
use gvar::rng::RandomStream;

fn main() -> gvar::Result<()> {
    let partition = Arc::new(AtomPartition::uniform(8)?);
    let values = (0..8).map(|n| vec![(n as f64).sin(), (n as f64).cos()]).collect();
    let phi = StepFunction::new(partition.clone(), 2, values)?;
    let stream = RandomStream::new(11, 0);

    let w = sample_brownian(partition.clone(), 50_000, &stream)?;
    let integral = stochastic_integral(&phi, &w, &[0, 1, 2, 3, 4, 5, 6, 7])?;
    println!("mean {:?}", integral.mean());
    println!("variance {:?}", integral.variance());

    let mut dump = Vec::new();
    w.write_dump(&mut dump)?;
    let back = BrownianEnsemble::read_dump(dump.as_slice(), partition)?;
    assert_eq!(back.path(123), w.path(123));
    println!("dump: {} bytes for {} paths", dump.len(), back.paths());

    for norm in [NormKind::L2, NormKind::L1, NormKind::Linf] {
        let space = NormedSpace::new(2, norm)?;
        let c = verify_ito_isometry(&phi, &space, 50_000, 50_000, &stream.derive(&norm.to_string()), 3.0)?;
        println!(
            "{norm:>4}: E‖∫φdW‖² = {:.4} ± {:.4}, ‖T_φ‖²_γ = {:.4} ± {:.4}, consistent {}",
            c.integral.value, c.integral.std_error, c.operator.value, c.operator.std_error, c.verdict.consistent
        );
    }
    Ok(())
}
