//! Compare the exact propagator of the two-tone Lambda system with the
//! reconstruction exp(−iQ(t)) exp(−iH_Q t) at increasing orders.

use qflq::lambda::{build_lambda, two_tone_fast};
use qflq::magnus::expand;
use qflq::propagator::{evolve_exact, reconstruct, TimeGrid};

fn main() -> qflq::Result<()> {
    let h = build_lambda(&two_tone_fast());
    let series = expand(&h, 4, 1e-9)?;
    let grid = TimeGrid::new(0.0, 100.0, 4)?;
    let trace = evolve_exact(&h, &grid)?;

    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "N=1", "N=2", "N=3", "N=4");
    for (t, u) in trace.times.iter().zip(&trace.unitaries) {
        print!("{t:>6.1}");
        for n in 1..=4 {
            print!(" {:>12.3e}", (u - reconstruct(&series, n, *t)?).norm());
        }
        println!();
    }
    Ok(())
}
