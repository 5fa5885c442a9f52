//! Small divisors: the expansion refuses drives whose frequency
//! combinations come too close to zero.

use qflq::magnus::expand;
use qflq::{check_resonances, CMatrix, Error, FrequencyVector, MultiIndex, QPOperator, C64};

fn main() -> qflq::Result<()> {
    let support = [[1, 0], [-1, 0], [0, 1], [0, -1]].map(MultiIndex::from);

    let golden = FrequencyVector::new(vec![1.0, (1.0 + 5f64.sqrt()) / 2.0])?;
    let report = check_resonances(support.iter(), &golden, 1e-6, 4);
    println!("ω = (1, φ), order 4: {} offenders", report.offenders.len());

    let near = FrequencyVector::new(vec![1.0, 1.0 + 1e-8])?;
    let report = check_resonances(support.iter(), &near, 1e-6, 2);
    println!("ω = (1, 1 + 1e-8), order 2:\n{report}");

    let x = CMatrix::from_row_slice(2, 2, &[C64::from(0.0), C64::from(0.1), C64::from(0.1), C64::from(0.0)]);
    let h = QPOperator::from_terms(2, near, support.iter().map(|n| (n.clone(), x.clone())))?;
    match expand(&h, 2, 1e-6) {
        Err(Error::Resonance(r)) => println!("expand refused: {} offending combinations", r.offenders.len()),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
