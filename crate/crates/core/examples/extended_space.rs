//! Propagate a periodically driven qubit through the truncated extended
//! space and list the quasienergies closest to the central zone.

use qflq::propagator::{evolve_exact, TimeGrid};
use qflq::sambe::build_extended;
use qflq::{CMatrix, FrequencyVector, MultiIndex, QPOperator, C64};

fn main() -> qflq::Result<()> {
    let c = C64::from;
    let sz = CMatrix::from_row_slice(2, 2, &[c(0.1), c(0.0), c(0.0), c(-0.1)]);
    let sx = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.05), c(0.05), c(0.0)]);
    let h = QPOperator::from_terms(2, FrequencyVector::periodic(1.0)?, [
        (MultiIndex::from([0]), sz),
        (MultiIndex::from([1]), sx.clone()),
        (MultiIndex::from([-1]), sx),
    ])?;

    let trace = evolve_exact(&h, &TimeGrid::new(0.0, 50.0, 5)?)?;
    for cutoff in [2, 4, 8, 16] {
        let spectrum = build_extended(&h, cutoff)?.diagonalize()?;
        let worst = trace
            .times
            .iter()
            .zip(&trace.unitaries)
            .map(|(t, u)| (spectrum.propagator(*t) - u).norm())
            .fold(0.0, f64::max);
        println!("M = {cutoff:>2}: max ‖U_ext − U‖ = {worst:.2e}");
    }

    let spectrum = build_extended(&h, 8)?.diagonalize()?;
    let mut central: Vec<f64> = spectrum.central_quasienergies(0);
    central.sort_by(f64::total_cmp);
    println!("central quasienergies: {central:?}");
    Ok(())
}
