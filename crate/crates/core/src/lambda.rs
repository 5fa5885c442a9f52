//! Driven three-level Lambda system.
//!
//! Two degenerate ground states `|1⟩, |2⟩` couple to an excited state `|3⟩`
//! through a drive `f(t) = Σ_n f_n exp(i n·ω t)`:
//!
//! ```text
//! H(t) = f(t) |3⟩(⟨1| + ⟨2|) + h.c.
//! ```
//!
//! With `f_0 = 0` the first effective order vanishes and the second couples
//! the ground states at the rate `Ω_eff = Σ_n |f_n|²/(n·ω)`. Basis order is
//! `(|1⟩, |2⟩, |3⟩)`, so `|1⟩` is index 0.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use crate::cli::CurveTable;
use crate::error::{Error, Result};
use crate::fourier::{check_resonances, FrequencyVector, MultiIndex, QPOperator};
use crate::propagator::{evolve_exact, transition_probability, TimeGrid};
use crate::{CMatrix, C64};

/// Fourier coefficients of the scalar drive `f(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveSpec {
    omega: FrequencyVector,
    coeffs: BTreeMap<MultiIndex, C64>,
}

impl DriveSpec {
    /// Zero coefficients are dropped; a nonzero static component is rejected.
    pub fn new<I>(omega: FrequencyVector, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, C64)>,
    {
        let mut map = BTreeMap::new();
        for (n, f) in coeffs {
            if n.len() != omega.len() {
                return Err(Error::Structural(format!(
                    "drive harmonic {n} has length {} but there are {} frequencies",
                    n.len(),
                    omega.len()
                )));
            }
            *map.entry(n).or_insert(C64::from(0.0)) += f;
        }
        map.retain(|_, f: &mut C64| *f != C64::from(0.0));
        if let Some(f0) = map.get(&MultiIndex::zero(omega.len())) {
            return Err(Error::Contract(format!("drive must have no static component, got f_0 = {f0}")));
        }
        Ok(DriveSpec { omega, coeffs: map })
    }

    /// `f(t) = amplitude · exp(i ω₁ t)`
    pub fn single_tone(omega1: f64, amplitude: f64) -> Result<Self> {
        Self::new(FrequencyVector::periodic(omega1)?, [(MultiIndex::from([1]), C64::from(amplitude))])
    }

    /// `f(t) = amplitude · (exp(i ω₁ t) + exp(i ratio·ω₁ t))`
    pub fn two_tone(omega1: f64, ratio: f64, amplitude: f64) -> Result<Self> {
        Self::new(
            FrequencyVector::new(vec![omega1, ratio * omega1])?,
            [
                (MultiIndex::from([1, 0]), C64::from(amplitude)),
                (MultiIndex::from([0, 1]), C64::from(amplitude)),
            ],
        )
    }

    pub fn omega(&self) -> &FrequencyVector {
        &self.omega
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.coeffs.iter()
    }

    /// `Σ_n |f_n|`, the largest value `|f(t)|` can reach.
    pub fn peak_amplitude(&self) -> f64 {
        self.coeffs.values().map(|f| f.norm()).sum()
    }
}

/// Periodic single-tone drive with `Ω/ω₁ = 0.1·(1 + √2/2)^{1/2}`.
pub fn periodic_reference() -> DriveSpec {
    DriveSpec::single_tone(1.0, 0.1 * (1.0 + SQRT_2 / 2.0).sqrt()).expect("valid preset")
}

/// Two-tone drive at `ω = (1, √2)` with `Ω/ω₁ = 0.1`. Same `Ω_eff` as
/// [`periodic_reference`].
pub fn two_tone_reference() -> DriveSpec {
    DriveSpec::two_tone(1.0, SQRT_2, 0.1).expect("valid preset")
}

/// Two-tone drive at `ω = (1, √2)` with `Ω/ω₁ = 0.05`, a faster driving
/// regime relative to the coupling.
pub fn two_tone_fast() -> DriveSpec {
    DriveSpec::two_tone(1.0, SQRT_2, 0.05).expect("valid preset")
}

/// `|3⟩(⟨1| + ⟨2|)`
fn raising() -> CMatrix {
    let mut m = CMatrix::zeros(3, 3);
    m[(2, 0)] = C64::from(1.0);
    m[(2, 1)] = C64::from(1.0);
    m
}

/// `H_n = f_n |3⟩(⟨1|+⟨2|) + conj(f_{−n}) (|1⟩+|2⟩)⟨3|`
pub fn build_lambda(drive: &DriveSpec) -> QPOperator {
    let up = raising();
    let down = up.adjoint();
    let terms = drive.coeffs.iter().flat_map(|(n, f)| {
        [(n.clone(), &up * *f), (-n, &down * f.conj())]
    });
    QPOperator::from_terms(3, drive.omega.clone(), terms).expect("lambda terms are 3x3 with matching d")
}

/// `Ω_eff = Σ_n |f_n|²/(n·ω)` with the default resonance threshold.
pub fn omega_eff(drive: &DriveSpec) -> Result<f64> {
    omega_eff_with(drive, drive.omega.default_resonance_threshold())
}

pub fn omega_eff_with(drive: &DriveSpec, threshold: f64) -> Result<f64> {
    let report = check_resonances(drive.coeffs.keys(), &drive.omega, threshold, 1);
    if !report.is_empty() {
        return Err(Error::Resonance(report));
    }
    Ok(drive.coeffs.iter().map(|(n, f)| f.norm_sqr() / n.dot(&drive.omega)).sum())
}

/// `sin²(Ω_eff t)`, the ground-state transfer under the second-order
/// effective Hamiltonian.
pub fn p12_effective(omega_eff: f64, t: f64) -> f64 {
    (omega_eff * t).sin().powi(2)
}

/// One exact-versus-effective comparison run.
#[derive(Clone, Debug)]
pub struct LambdaExperiment {
    pub drive: DriveSpec,
    pub grid: TimeGrid,
}

impl LambdaExperiment {
    pub fn new(drive: DriveSpec, grid: TimeGrid) -> Self {
        LambdaExperiment { drive, grid }
    }

    /// Run over `ω₁t ∈ [0, 300]` with two rows per unit time.
    pub fn short_window(drive: DriveSpec) -> Self {
        let t1 = 300.0 / drive.omega.as_slice()[0];
        Self::new(drive, TimeGrid::new(0.0, t1, 600).expect("valid grid"))
    }

    /// Run over `ω₁t ∈ [0, 1200]` with two rows per unit time.
    pub fn long_window(drive: DriveSpec) -> Self {
        let t1 = 1200.0 / drive.omega.as_slice()[0];
        Self::new(drive, TimeGrid::new(0.0, t1, 2400).expect("valid grid"))
    }
}

pub const CURVE_HEADER: [&str; 3] = ["t", "P12_exact", "P12_eff"];

/// Columns `t`, `P12_exact = |⟨1|U(t)|2⟩|²` from the reference integrator and
/// `P12_eff = sin²(Ω_eff t)`.
pub fn run_experiment(exp: &LambdaExperiment) -> Result<CurveTable> {
    let h = build_lambda(&exp.drive);
    let rate = omega_eff(&exp.drive)?;
    let trace = evolve_exact(&h, &exp.grid)?;
    let mut table = CurveTable::new(CURVE_HEADER.iter().map(|s| s.to_string()).collect());
    for (t, u) in trace.times.iter().zip(&trace.unitaries) {
        table.push_row(vec![*t, transition_probability(u, 0, 1)?, p12_effective(rate, *t)])?;
    }
    Ok(table)
}
