//! Expand a two-tone driven qubit (one linear, one circular tone) to sixth order and print the per-order
//! norms of the effective Hamiltonian.

use qflq::magnus::{closed_form_second_order, expand};
use qflq::{CMatrix, FrequencyVector, MultiIndex, QPOperator, C64};

fn main() -> qflq::Result<()> {
    let c = C64::from;
    let sz = CMatrix::from_row_slice(2, 2, &[c(0.1), c(0.0), c(0.0), c(-0.1)]);
    let sx = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.05), c(0.05), c(0.0)]);
    let raise = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.08), c(0.0), c(0.0)]);
    let h = QPOperator::from_terms(2, FrequencyVector::new(vec![1.0, 2f64.sqrt()])?, [
        (MultiIndex::from([0, 0]), sz),
        (MultiIndex::from([1, 0]), sx.clone()),
        (MultiIndex::from([-1, 0]), sx),
        (MultiIndex::from([0, 1]), raise.adjoint()),
        (MultiIndex::from([0, -1]), raise),
    ])?;

    let series = expand(&h, 6, 1e-9)?;
    for (k, norm) in series.order_norms().iter().enumerate() {
        println!("order {}: ‖H_Q‖ = {norm:.3e}", k + 1);
    }
    println!("H_Q up to order 6:\n{:.6}", series.effective_hamiltonian(6)?);

    let oracle = closed_form_second_order(&h, 1e-9)?;
    let gap = (&series.term(2).unwrap().hq - &oracle.hq2).norm();
    println!("second order vs closed form: {gap:e}");
    Ok(())
}
