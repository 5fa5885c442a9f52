//! Build two quasi-periodic operators, combine them and check the result
//! pointwise against ordinary matrix arithmetic.

use qflq::{CMatrix, FrequencyVector, MultiIndex, QPOperator, C64};

fn main() -> qflq::Result<()> {
    let omega = FrequencyVector::new(vec![1.0, 2f64.sqrt()])?;
    let c = C64::from;
    let sx = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let sz = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);

    // a(t) = 2cos(t) σx,  b(t) = σz + 2cos(√2 t) σx
    let a = QPOperator::from_terms(2, omega.clone(), [
        (MultiIndex::from([1, 0]), sx.clone()),
        (MultiIndex::from([-1, 0]), sx.clone()),
    ])?;
    let b = QPOperator::from_terms(2, omega, [
        (MultiIndex::from([0, 0]), sz),
        (MultiIndex::from([0, 1]), sx.clone()),
        (MultiIndex::from([0, -1]), sx),
    ])?;

    let comm = a.commutator(&b)?;
    println!("[a, b] has {} Fourier terms:", comm.num_terms());
    for (n, m) in comm.terms() {
        println!("  {n}: norm {:.3}", m.norm());
    }

    let t = 0.7;
    let direct = a.evaluate(t) * b.evaluate(t) - b.evaluate(t) * a.evaluate(t);
    println!("pointwise check at t = {t}: {:e}", (comm.evaluate(t) - direct).norm());

    let q = a.integrate_from_zero()?;
    println!("∫₀ᵗ a: value at 0 = {:e}, derivative error = {:e}",
        q.evaluate(0.0).norm(),
        q.differentiate().max_distance(&a).unwrap());
    Ok(())
}
