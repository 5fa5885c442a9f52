//! Floquet–Magnus expansion for quasi-periodic Hamiltonians.
//!
//! The propagator is written as `U(t) = exp(−iQ(t)) exp(−iH_Q t)` with a
//! constant effective Hamiltonian `H_Q = Σ_n H_Q⁽ⁿ⁾` and a quasi-periodic
//! generator `Q(t) = Σ_n Q⁽ⁿ⁾(t)`, `Q⁽ⁿ⁾(0) = 0`. The generator obeys
//!
//! ```text
//! ∂_t Q = Σ_k B_k/k! (−i)^k ad_Q^k (H + (−1)^{k+1} H_Q)
//! ```
//!
//! Collecting orders gives `∂_t Q⁽ⁿ⁾ = A⁽ⁿ⁾(t) − H_Q⁽ⁿ⁾` where `A⁽ⁿ⁾` only
//! involves lower orders. `H_Q⁽ⁿ⁾` is the average of `A⁽ⁿ⁾` and `Q⁽ⁿ⁾` its
//! zero-at-zero antiderivative once that average is removed.

use std::sync::OnceLock;

use num_rational::Ratio;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fourier::{check_resonances, MultiIndex, QPOperator};
use crate::{CMatrix, C64};

/// Largest tabulated Bernoulli index.
pub const BERNOULLI_MAX: usize = 32;

/// Default expansion order.
pub const DEFAULT_ORDER: usize = 6;

fn bernoulli_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_m = −1/(m+1) Σ_{k<m} C(m+1, k) B_k, exact over the rationals.
        let mut exact: Vec<Ratio<i128>> = Vec::with_capacity(BERNOULLI_MAX + 1);
        exact.push(Ratio::from_integer(1));
        for m in 1..=BERNOULLI_MAX {
            let mut acc = Ratio::from_integer(0);
            let mut binom: i128 = 1;
            for (k, b) in exact.iter().enumerate() {
                acc += *b * binom;
                binom = binom * (m as i128 + 1 - k as i128) / (k as i128 + 1);
            }
            exact.push(-acc / (m as i128 + 1));
        }
        exact.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
    })
}

/// Bernoulli number `B_k` in the `B_1 = −1/2` convention.
pub fn bernoulli(k: usize) -> Result<f64> {
    bernoulli_table()
        .get(k)
        .copied()
        .ok_or_else(|| Error::Range(format!("Bernoulli index {k} exceeds {BERNOULLI_MAX}")))
}

/// One order of the expansion.
#[derive(Clone, Debug)]
pub struct MagnusOrderTerm {
    pub order: usize,
    /// `H_Q⁽ⁿ⁾`
    pub hq: CMatrix,
    /// `Q⁽ⁿ⁾(t)`
    pub q: QPOperator,
}

/// Orders `1..=N` of the expansion of one Hamiltonian.
#[derive(Clone, Debug)]
pub struct MagnusSeries {
    terms: Vec<MagnusOrderTerm>,
    input_hash: String,
    resonance_threshold: f64,
}

impl MagnusSeries {
    pub fn terms(&self) -> &[MagnusOrderTerm] {
        &self.terms
    }

    pub fn max_order(&self) -> usize {
        self.terms.len()
    }

    pub fn term(&self, order: usize) -> Option<&MagnusOrderTerm> {
        order.checked_sub(1).and_then(|i| self.terms.get(i))
    }

    /// SHA-256 (hex) of the input operator's dimension, frequencies and
    /// coefficient bit patterns.
    pub fn input_hash(&self) -> &str {
        &self.input_hash
    }

    pub fn resonance_threshold(&self) -> f64 {
        self.resonance_threshold
    }

    fn check_upto(&self, upto: usize) -> Result<()> {
        if upto == 0 || upto > self.max_order() {
            return Err(Error::Range(format!(
                "requested order {upto}, series holds orders 1..={}",
                self.max_order()
            )));
        }
        Ok(())
    }

    /// Partial sum `Σ_{n≤upto} H_Q⁽ⁿ⁾`.
    pub fn effective_hamiltonian(&self, upto: usize) -> Result<CMatrix> {
        self.check_upto(upto)?;
        let mut sum = self.terms[0].hq.clone();
        for t in &self.terms[1..upto] {
            sum += &t.hq;
        }
        Ok(sum)
    }

    /// Partial sum `Σ_{n≤upto} Q⁽ⁿ⁾(t)`.
    pub fn generator(&self, upto: usize) -> Result<QPOperator> {
        self.check_upto(upto)?;
        let mut sum = self.terms[0].q.clone();
        for t in &self.terms[1..upto] {
            sum = sum.add(&t.q)?;
        }
        Ok(sum)
    }

    /// `‖H_Q⁽ⁿ⁾‖_F` for every order, useful for spotting divergence onset.
    pub fn order_norms(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.hq.norm()).collect()
    }
}

fn operator_hash(h: &QPOperator) -> String {
    let mut hasher = Sha256::new();
    hasher.update((h.dim() as u64).to_le_bytes());
    for w in h.omega().as_slice() {
        hasher.update(w.to_bits().to_le_bytes());
    }
    for (n, m) in h.terms() {
        for x in n.entries() {
            hasher.update(x.to_le_bytes());
        }
        for z in m.iter() {
            hasher.update(z.re.to_bits().to_le_bytes());
            hasher.update(z.im.to_bits().to_le_bytes());
        }
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn without_average(op: &QPOperator) -> Result<QPOperator> {
    let zero = MultiIndex::zero(op.d());
    QPOperator::from_terms(
        op.dim(),
        op.omega().clone(),
        op.terms().filter(|(n, _)| **n != zero).map(|(n, m)| (n.clone(), m.clone())),
    )
}

/// Runs the recursion up to `max_order`.
///
/// Before any division the order-`max_order` closure of the support of `h`
/// is screened for `|n·ω| < res_threshold`.
pub fn expand(h: &QPOperator, max_order: usize, res_threshold: f64) -> Result<MagnusSeries> {
    if max_order < 1 {
        return Err(Error::Range("expansion order must be at least 1".into()));
    }
    // Order N uses B_1 … B_{N−1}.
    bernoulli(max_order - 1)?;
    let report = check_resonances(h.support(), h.omega(), res_threshold, max_order);
    if !report.is_empty() {
        return Err(Error::Resonance(report));
    }

    let dim = h.dim();
    let omega = h.omega().clone();
    let zero_op = QPOperator::zero(dim, omega.clone());
    let minus_i = C64::new(0.0, -1.0);

    // x[n][k] and y[n][k] hold (−i)^k ad^k chains at order n+1; the seeds are
    // x[0][0] = H, x[n][0] = 0 and y[n][0] = H_Q⁽ⁿ⁺¹⁾.
    let mut x: Vec<Vec<QPOperator>> = Vec::with_capacity(max_order);
    let mut y: Vec<Vec<QPOperator>> = Vec::with_capacity(max_order);
    let mut terms: Vec<MagnusOrderTerm> = Vec::with_capacity(max_order);

    for n in 1..=max_order {
        let mut xn = vec![if n == 1 { h.clone() } else { zero_op.clone() }];
        let mut yn = vec![zero_op.clone()];
        for k in 1..n {
            let mut xk = zero_op.clone();
            let mut yk = zero_op.clone();
            for m in 1..=(n - k) {
                let q = &terms[m - 1].q;
                xk = xk.add(&q.commutator(&x[n - m - 1][k - 1])?)?;
                yk = yk.add(&q.commutator(&y[n - m - 1][k - 1])?)?;
            }
            xn.push(xk.scale(minus_i));
            yn.push(yk.scale(minus_i));
        }

        let a = if n == 1 {
            h.clone()
        } else {
            let mut a = zero_op.clone();
            let mut factorial = 1.0;
            for k in 1..n {
                factorial *= k as f64;
                let b = bernoulli(k)?;
                if b == 0.0 {
                    continue;
                }
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let contribution = xn[k].add(&yn[k].scale(C64::new(sign, 0.0)))?;
                a = a.add(&contribution.scale(C64::new(b / factorial, 0.0)))?;
            }
            a
        };

        let hq = a.average();
        let q = without_average(&a)?.integrate_from_zero_with(res_threshold)?;
        yn[0] = QPOperator::constant(hq.clone(), omega.clone())?;
        x.push(xn);
        y.push(yn);
        terms.push(MagnusOrderTerm { order: n, hq, q });
    }

    Ok(MagnusSeries {
        terms,
        input_hash: operator_hash(h),
        resonance_threshold: res_threshold,
    })
}

/// Orders one and two written out as explicit sums over Fourier indices.
#[derive(Clone, Debug)]
pub struct SecondOrderTerms {
    pub hq1: CMatrix,
    pub hq2: CMatrix,
    pub q1: QPOperator,
    pub q2: QPOperator,
}

/// Direct evaluation of the first two orders:
///
/// ```text
/// H_Q⁽¹⁾ = H_0
/// H_Q⁽²⁾ = ½ Σ_{n≠0} [H_n, H_{−n}]/(n·ω) + Σ_{n≠0} [H_0, H_n]/(n·ω)
/// Q⁽¹⁾   = −i Σ_{n≠0} H_n/(n·ω) E_n
/// Q⁽²⁾   =  i/2 Σ_{n≠0}        [H_0, H_n]/(n·ω)²            E_n
///         − i/2 Σ_{n≠0, m≠−n}  [H_n, H_m]/(n·ω (n+m)·ω)     E_{n+m}
///         + i/2 Σ_{n≠0, m≠0}   [H_n, H_m]/(n·ω m·ω)         E_m
/// ```
///
/// with `E_k(t) = exp(i k·ω t) − 1`. The sums are independent of the
/// recursion in [`expand`] and serve as its oracle.
pub fn closed_form_second_order(h: &QPOperator, res_threshold: f64) -> Result<SecondOrderTerms> {
    let report = check_resonances(h.support(), h.omega(), res_threshold, 2);
    if !report.is_empty() {
        return Err(Error::Resonance(report));
    }
    let dim = h.dim();
    let omega = h.omega().clone();
    let zero = MultiIndex::zero(h.d());
    let comm = |a: &CMatrix, b: &CMatrix| -> CMatrix { a * b - b * a };
    let h0 = h.average();
    let osc: Vec<(&MultiIndex, &CMatrix, f64)> =
        h.terms().filter(|(n, _)| !n.is_zero()).map(|(n, m)| (n, m, n.dot(&omega))).collect();
    let i = C64::new(0.0, 1.0);
    let half_i = C64::new(0.0, 0.5);

    let mut hq2 = CMatrix::zeros(dim, dim);
    for &(n, hn, wn) in &osc {
        if let Some(hmn) = h.term(&-n) {
            hq2 += comm(hn, hmn) * C64::new(0.5 / wn, 0.0);
        }
        hq2 += comm(&h0, hn) / C64::new(wn, 0.0);
    }

    // Each coefficient c·E_k contributes c at index k and −c at index 0.
    let mut q1_terms: Vec<(MultiIndex, CMatrix)> = Vec::new();
    for &(n, hn, wn) in &osc {
        let c = hn * (-i / wn);
        q1_terms.push((zero.clone(), -&c));
        q1_terms.push((n.clone(), c));
    }

    let mut q2_terms: Vec<(MultiIndex, CMatrix)> = Vec::new();
    let mut push_e = |k: MultiIndex, c: CMatrix| {
        q2_terms.push((zero.clone(), -&c));
        q2_terms.push((k, c));
    };
    for &(n, hn, wn) in &osc {
        push_e(n.clone(), comm(&h0, hn) * (half_i / (wn * wn)));
        for (m, hm) in h.terms() {
            let k = n + m;
            if k.is_zero() {
                continue;
            }
            let wk = k.dot(&omega);
            push_e(k, comm(hn, hm) * (-half_i / (wn * wk)));
        }
        for &(m, hm, wm) in &osc {
            push_e(m.clone(), comm(hn, hm) * (half_i / (wn * wm)));
        }
    }

    Ok(SecondOrderTerms {
        hq1: h0,
        hq2,
        q1: QPOperator::from_terms(dim, omega.clone(), q1_terms)?,
        q2: QPOperator::from_terms(dim, omega, q2_terms)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::FrequencyVector;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0).unwrap(), 1.0);
        assert_eq!(bernoulli(1).unwrap(), -0.5);
        assert_eq!(bernoulli(2).unwrap(), 1.0 / 6.0);
        assert_eq!(bernoulli(3).unwrap(), 0.0);
        assert_eq!(bernoulli(4).unwrap(), -1.0 / 30.0);
        assert!((bernoulli(12).unwrap() - (-691.0 / 2730.0)).abs() < 1e-15);
        let b32 = -7709321041217.0 / 510.0;
        assert!((bernoulli(32).unwrap() - b32).abs() / b32.abs() < 1e-15);
        for k in (3..=BERNOULLI_MAX).step_by(2) {
            assert_eq!(bernoulli(k).unwrap(), 0.0, "B_{k}");
        }
    }

    #[test]
    fn bernoulli_out_of_range() {
        assert!(matches!(bernoulli(BERNOULLI_MAX + 1), Err(Error::Range(_))));
    }

    #[test]
    fn order_zero_is_rejected() {
        let h = QPOperator::zero(2, FrequencyVector::periodic(1.0).unwrap());
        assert!(matches!(expand(&h, 0, 1e-9), Err(Error::Range(_))));
    }

    #[test]
    fn constant_hamiltonian_has_trivial_series() {
        let m = CMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let h = QPOperator::constant(m.clone(), FrequencyVector::new(vec![1.0, 2.0f64.sqrt()]).unwrap()).unwrap();
        let s = expand(&h, 4, 1e-9).unwrap();
        assert_eq!(s.terms()[0].hq, m);
        for t in s.terms() {
            assert!(t.q.is_zero());
        }
        for t in &s.terms()[1..] {
            assert_eq!(t.hq, CMatrix::zeros(3, 3));
        }
        assert_eq!(s.effective_hamiltonian(1).unwrap(), m);
        assert_eq!(s.order_norms()[1..], [0.0, 0.0, 0.0]);

        let c = closed_form_second_order(&h, 1e-9).unwrap();
        assert_eq!(c.hq1, m);
        assert_eq!(c.hq2, CMatrix::zeros(3, 3));
        assert!(c.q1.is_zero() && c.q2.is_zero());
    }

    #[test]
    fn effective_hamiltonian_range() {
        let h = QPOperator::constant(CMatrix::identity(2, 2), FrequencyVector::periodic(1.0).unwrap()).unwrap();
        let s = expand(&h, 2, 1e-9).unwrap();
        assert!(s.effective_hamiltonian(3).is_err());
        assert!(s.effective_hamiltonian(0).is_err());
        assert!(s.generator(2).is_ok());
    }

    #[test]
    fn resonant_input_is_reported() {
        let omega = FrequencyVector::new(vec![1.0, 1.0]).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let h = QPOperator::from_terms(
            2,
            omega,
            [(MultiIndex::from([1, -1]), m.clone()), (MultiIndex::from([-1, 1]), m.adjoint())],
        )
        .unwrap();
        assert!(matches!(expand(&h, 2, 1e-9), Err(Error::Resonance(_))));
        assert!(matches!(closed_form_second_order(&h, 1e-9), Err(Error::Resonance(_))));
    }

    #[test]
    fn input_hash_is_stable_and_discriminating() {
        let w = FrequencyVector::periodic(1.0).unwrap();
        let a = QPOperator::constant(CMatrix::identity(2, 2), w.clone()).unwrap();
        let b = QPOperator::constant(CMatrix::identity(2, 2) * C64::new(2.0, 0.0), w).unwrap();
        let ha = expand(&a, 1, 1e-9).unwrap();
        assert_eq!(ha.input_hash(), expand(&a, 1, 1e-9).unwrap().input_hash());
        assert_ne!(ha.input_hash(), expand(&b, 1, 1e-9).unwrap().input_hash());
        assert_eq!(ha.input_hash().len(), 64);
    }
}
