//! Reference and effective time evolution.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::fourier::QPOperator;
use crate::magnus::MagnusSeries;
use crate::{hermiticity_defect, CMatrix, C64};

/// Default number of integrator steps per shortest drive period.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 400;

/// Default bound on the change of any `U(t_k)` when the step is halved.
pub const DEFAULT_STEP_TOLERANCE: f64 = 1e-8;

/// Uniform output grid `t0, t0 + h, …, t1` with `h = (t1 − t0)/steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(Error::Contract(format!("time grid needs finite t1 > t0, got [{t0}, {t1}]")));
        }
        if steps == 0 {
            return Err(Error::Contract("time grid needs at least one step".into()));
        }
        Ok(TimeGrid { t0, t1, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spacing(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    /// `steps + 1` points including both ends.
    pub fn times(&self) -> Vec<f64> {
        let span = self.t1 - self.t0;
        (0..=self.steps)
            .map(|k| self.t0 + span * (k as f64 / self.steps as f64))
            .collect()
    }
}

/// `U(t_k, t0)` on every grid point.
#[derive(Clone, Debug)]
pub struct PropagatorTrace {
    pub times: Vec<f64>,
    pub unitaries: Vec<CMatrix>,
    /// Integrator step actually used.
    pub step: f64,
}

impl PropagatorTrace {
    pub fn last(&self) -> &CMatrix {
        self.unitaries.last().expect("trace is never empty")
    }

    pub fn max_unitarity_residual(&self) -> f64 {
        self.unitaries.iter().map(unitarity_residual).fold(0.0, f64::max)
    }
}

/// Integrator settings for [`evolve_exact_with`].
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub steps_per_period: usize,
    /// Step-doubling tolerance; `None` skips the self check.
    pub tolerance: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            tolerance: Some(DEFAULT_STEP_TOLERANCE),
        }
    }
}

/// `‖U†U − 𝟙‖_F`
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

/// Newton–Schulz iteration towards the unitary polar factor of `u`.
fn reunitarize(u: &mut CMatrix) {
    let n = u.nrows();
    let eye = CMatrix::identity(n, n);
    for _ in 0..4 {
        let gram = u.adjoint() * &*u;
        if (&gram - &eye).norm() < 1e-15 {
            break;
        }
        *u = &*u * (eye.scale(1.5) - gram.scale(0.5));
    }
}

/// Frequency scale that fixes the integrator step: the fastest drive
/// harmonic or four times the coefficient norm bound, whichever is larger.
fn frequency_scale(h: &QPOperator) -> f64 {
    h.max_frequency().max(4.0 * h.coefficient_norm_sum())
}

fn integrate(h: &QPOperator, times: &[f64], substeps: &[usize]) -> Vec<CMatrix> {
    let dim = h.dim();
    let minus_i = C64::new(0.0, -1.0);
    let mut u = CMatrix::identity(dim, dim);
    let mut out = Vec::with_capacity(times.len());
    out.push(u.clone());
    for (k, pair) in times.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let n = substeps[k];
        let dt = (b - a) / n as f64;
        let mut h_start = h.evaluate(a) * minus_i;
        for s in 0..n {
            let t = a + dt * s as f64;
            let h_mid = h.evaluate(t + 0.5 * dt) * minus_i;
            let h_end = h.evaluate(if s + 1 == n { b } else { t + dt }) * minus_i;
            let k1 = &h_start * &u;
            let k2 = &h_mid * (&u + &k1 * C64::from(0.5 * dt));
            let k3 = &h_mid * (&u + &k2 * C64::from(0.5 * dt));
            let k4 = &h_end * (&u + &k3 * C64::from(dt));
            u += (k1 + (k2 + k3) * C64::from(2.0) + k4) * C64::from(dt / 6.0);
            reunitarize(&mut u);
            h_start = h_end;
        }
        out.push(u.clone());
    }
    out
}

/// Solves `i ∂_t U = H(t) U`, `U(t0) = 𝟙` on the grid with default options.
pub fn evolve_exact(h: &QPOperator, grid: &TimeGrid) -> Result<PropagatorTrace> {
    evolve_exact_with(h, grid, &EvolveOptions::default())
}

/// Fixed-step classical Runge–Kutta integration with re-unitarization after
/// every step.
///
/// The step is the largest that divides each grid interval evenly and does
/// not exceed `2π / (scale · steps_per_period)`, where `scale` is the larger
/// of `max |n·ω|` and `4 Σ_n ‖H_n‖_F`. With a tolerance set, the
/// whole run is repeated at half the step and every grid point must agree
/// within it.
pub fn evolve_exact_with(h: &QPOperator, grid: &TimeGrid, opts: &EvolveOptions) -> Result<PropagatorTrace> {
    if opts.steps_per_period == 0 {
        return Err(Error::Contract("steps_per_period must be positive".into()));
    }
    let times = grid.times();
    let scale = frequency_scale(h);
    let max_step = if scale > 0.0 { TAU / (scale * opts.steps_per_period as f64) } else { f64::INFINITY };
    let substeps: Vec<usize> = times
        .windows(2)
        .map(|w| ((w[1] - w[0]) / max_step).ceil().max(1.0) as usize)
        .collect();

    let unitaries = integrate(h, &times, &substeps);

    if let Some(tol) = opts.tolerance {
        let doubled: Vec<usize> = substeps.iter().map(|s| 2 * s).collect();
        let fine = integrate(h, &times, &doubled);
        for ((t, coarse), fine) in times.iter().zip(&unitaries).zip(&fine) {
            let deviation = (coarse - fine).norm();
            if deviation > tol {
                return Err(Error::Accuracy { time: *t, deviation, tolerance: tol });
            }
        }
    }

    Ok(PropagatorTrace {
        times,
        unitaries,
        step: grid.spacing() / substeps[0] as f64,
    })
}

/// `exp(−i·m·t)` for Hermitian `m`, via its spectral decomposition.
pub fn matrix_exp_hermitian(m: &CMatrix, t: f64) -> Result<CMatrix> {
    let defect = hermiticity_defect(m);
    if defect > 1e-12 * m.norm().max(1.0) {
        return Err(Error::Contract(format!("matrix is not Hermitian (‖M − M†‖_F = {defect:e})")));
    }
    Ok(exp_hermitian_unchecked(m, t))
}

fn exp_hermitian_unchecked(m: &CMatrix, t: f64) -> CMatrix {
    if t == 0.0 || m.iter().all(|z| *z == C64::from(0.0)) {
        return CMatrix::identity(m.nrows(), m.ncols());
    }
    let sym = (m + m.adjoint()) * C64::from(0.5);
    let eig = sym.symmetric_eigen();
    let phases = eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t));
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, p) in phases.iter().enumerate() {
        let mut col = scaled.column_mut(j);
        col *= *p;
    }
    scaled * v.adjoint()
}

/// `U(t) ≈ exp(−i Σ_{n≤upto} Q⁽ⁿ⁾(t)) · exp(−i Σ_{n≤upto} H_Q⁽ⁿ⁾ t)`
pub fn reconstruct(series: &MagnusSeries, upto: usize, t: f64) -> Result<CMatrix> {
    let q = series.generator(upto)?.evaluate(t);
    let hq = series.effective_hamiltonian(upto)?;
    let defect = hermiticity_defect(&q);
    if defect > 1e-10 * q.norm().max(1.0) {
        return Err(Error::Contract(format!(
            "Q(t={t}) is not Hermitian (‖Q − Q†‖_F = {defect:e}); check the input for resonances"
        )));
    }
    Ok(exp_hermitian_unchecked(&q, 1.0) * matrix_exp_hermitian(&hq, t)?)
}

/// `|⟨i|U|j⟩|²`
pub fn transition_probability(u: &CMatrix, i: usize, j: usize) -> Result<f64> {
    let dim = u.nrows();
    for index in [i, j] {
        if index >= dim {
            return Err(Error::Index { index, dim });
        }
    }
    Ok(u[(i, j)].norm_sqr())
}
