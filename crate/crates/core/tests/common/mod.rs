#![allow(dead_code)]

use qflq::{CMatrix, FrequencyVector, MultiIndex, QPOperator, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut StdRng, dim: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale))
    })
}

pub fn random_hermitian(rng: &mut StdRng, dim: usize, scale: f64) -> CMatrix {
    let a = random_matrix(rng, dim, scale);
    (&a + a.adjoint()) * C64::from(0.5)
}

/// Incommensurate frequencies for `d` tones: 1, √2, √3 (scaled by `base`).
pub fn omega(d: usize, base: f64) -> FrequencyVector {
    let all = [1.0, std::f64::consts::SQRT_2, 3f64.sqrt()];
    FrequencyVector::new(all[..d].iter().map(|w| w * base).collect()).unwrap()
}

fn random_index(rng: &mut StdRng, d: usize) -> MultiIndex {
    loop {
        let n: Vec<i32> = (0..d).map(|_| rng.random_range(-2..=2)).collect();
        let n = MultiIndex::new(n);
        if !n.is_zero() {
            return n;
        }
    }
}

/// Hermitian drive with a static part and up to `harmonics` positive/negative
/// harmonic pairs (at most 2·harmonics+1 Fourier terms).
pub fn random_drive(rng: &mut StdRng, d: usize, dim: usize, harmonics: usize, scale: f64) -> QPOperator {
    let w = omega(d, 1.0);
    let mut terms = vec![(MultiIndex::zero(d), random_hermitian(rng, dim, scale))];
    for _ in 0..harmonics {
        let n = random_index(rng, d);
        let m = random_matrix(rng, dim, scale);
        terms.push((-&n, m.adjoint()));
        terms.push((n, m));
    }
    QPOperator::from_terms(dim, w, terms).unwrap()
}

/// Generic (non-Hermitian) operator on the same lattice.
pub fn random_operator(rng: &mut StdRng, d: usize, dim: usize, nterms: usize, scale: f64) -> QPOperator {
    let w = omega(d, 1.0);
    let mut terms = vec![(MultiIndex::zero(d), random_matrix(rng, dim, scale))];
    for _ in 0..nterms {
        let n = random_index(rng, d);
        terms.push((n, random_matrix(rng, dim, scale)));
    }
    QPOperator::from_terms(dim, w, terms).unwrap()
}

/// log–log least-squares slope.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Logarithmically spaced points in `[a, b]`.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}
