//! Effective Hamiltonians for quasi-periodically driven quantum systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`fourier`]: matrix-valued Fourier polynomials over `ℤᵈ` harmonics and
//!   small-divisor diagnostics.
//! * [`magnus`]: the order-by-order Floquet–Magnus engine producing the
//!   effective Hamiltonian `H_Q` and the micromotion generator `Q(t)`.
//! * [`propagator`]: reference time evolution, Hermitian exponentials and
//!   reconstruction of `U(t) = exp(−iQ(t)) exp(−iH_Q t)`.
//! * [`sambe`]: truncated extended-space operator `K = Σ H_n⊗σ_n + 𝟙⊗n̂·ω`,
//!   the propagator it induces, and its quasienergies.
//! * [`lambda`]: the driven three-level Lambda system.
//! * [`cli`]: JSON run configurations and the `qflq` runner.

pub mod cli;
pub mod error;
pub mod fourier;
pub mod lambda;
pub mod magnus;
pub mod propagator;
pub mod sambe;

pub use error::{Error, Result};
pub use fourier::{check_resonances, CombineKind, FrequencyVector, MultiIndex, QPOperator, ResonanceReport};

/// Complex scalar.
pub type C64 = nalgebra::Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// `‖a − b‖_F`
pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

/// `‖m − m†‖_F`
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).norm()
}
