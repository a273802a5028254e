//! Gaussian and Rademacher second moments of a fixed family of vectors.

use gvar::expectation::{gaussian_sum_sq, rademacher_sum_sq};
use gvar::model::{NormKind, NormedSpace};
use gvar::rng::RandomStream;

fn main() -> gvar::Result<()> {
    let vectors = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let stream = RandomStream::new(7, 0);
    for norm in [NormKind::L1, NormKind::L2, NormKind::Lp(3.0), NormKind::Linf] {
        let space = NormedSpace::new(2, norm)?;
        let g = gaussian_sum_sq(&vectors, &space, &stream, 200_000)?;
        let r = rademacher_sum_sq(&vectors, &space, &stream, 0)?;
        println!(
            "{norm:>5}: E‖Σγx‖² = {:.4} ± {:.4} ({:?})   E‖Σrx‖² = {:.4} ({:?})",
            g.value, g.std_error, g.method, r.value, r.method
        );
    }
    // l1 target 2 + 4/π, linf target 1 + 2/π
    println!(
        "2 + 4/π = {:.4}, 1 + 2/π = {:.4}",
        2.0 + 4.0 / std::f64::consts::PI,
        1.0 + 2.0 / std::f64::consts::PI
    );
    Ok(())
}
