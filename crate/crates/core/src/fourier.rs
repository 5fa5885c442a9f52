//! Matrix-valued quasi-periodic Fourier polynomials.
//!
//! A [`QPOperator`] stores a finite set of coefficient matrices `H_n` indexed
//! by integer vectors `n ∈ ℤᵈ` together with a frequency vector `ω`, and
//! represents
//!
//! ```text
//! H(t) = Σ_n H_n exp(i n·ω t)
//! ```
//!
//! All arithmetic is exact on the finite support. Coefficients whose Frobenius
//! norm falls below [`DROP_THRESHOLD`] are removed after every operation so the
//! support does not grow without bound through long commutator chains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Coefficients with a smaller Frobenius norm are discarded.
pub const DROP_THRESHOLD: f64 = 1e-14;

/// Relative tolerance used when an operation requires a vanishing average.
pub const ZERO_AVERAGE_TOLERANCE: f64 = 1e-12;

/// Integer harmonic vector `(n_1, …, n_d)`.
///
/// Ordering is lexicographic, which fixes the iteration order of every map
/// keyed by multi-indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: Vec<i32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// The `axis`-th unit vector of length `d`.
    pub fn unit(d: usize, axis: usize) -> Self {
        let mut v = vec![0; d];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// `max_i |n_i|`
    pub fn linf_norm(&self) -> u32 {
        self.0.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    /// `n·ω`. Panics if the lengths differ.
    pub fn dot(&self, omega: &FrequencyVector) -> f64 {
        assert_eq!(self.len(), omega.len(), "multi-index / frequency length mismatch");
        self.0
            .iter()
            .zip(omega.as_slice())
            .map(|(&n, &w)| n as f64 * w)
            .sum()
    }
}

impl From<Vec<i32>> for MultiIndex {
    fn from(v: Vec<i32>) -> Self {
        MultiIndex(v)
    }
}

impl<const N: usize> From<[i32; N]> for MultiIndex {
    fn from(v: [i32; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;

    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.len(), rhs.len(), "multi-index length mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MultiIndex {
    type Output = MultiIndex;

    fn sub(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.len(), rhs.len(), "multi-index length mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;

    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Base angular frequencies `ω = (ω_1, …, ω_d)`.
///
/// Every entry must be finite and strictly positive. Rational dependence
/// between entries cannot be detected in floating point; near-zero
/// combinations `n·ω` are caught by [`check_resonances`] instead.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::Contract("frequency vector must have at least one entry".into()));
        }
        if let Some(w) = omega.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Contract(format!(
                "frequencies must be finite and strictly positive, got {w}"
            )));
        }
        Ok(FrequencyVector(omega))
    }

    /// Single-frequency (periodic) drive.
    pub fn periodic(omega: f64) -> Result<Self> {
        Self::new(vec![omega])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// `1e-9 · max_i ω_i`
    pub fn default_resonance_threshold(&self) -> f64 {
        1e-9 * self.max()
    }
}

/// Frequency combinations that are too small to divide by.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceReport {
    /// `(n, n·ω)` sorted by `|n·ω|` ascending.
    pub offenders: Vec<(MultiIndex, f64)>,
    pub threshold: f64,
}

impl ResonanceReport {
    pub fn is_empty(&self) -> bool {
        self.offenders.is_empty()
    }

    fn into_result(self) -> Result<()> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(Error::Resonance(self))
        }
    }
}

impl fmt::Display for ResonanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "resonance: {} frequency combination(s) with |n·ω| < {:e}",
            self.offenders.len(),
            self.threshold
        )?;
        for (n, v) in &self.offenders {
            write!(f, "\n  n = {n}  n·ω = {v:e}")?;
        }
        Ok(())
    }
}

/// Lists every nonzero `n` reachable as a sum of at most `order` elements of
/// `support` (zero included) whose `|n·ω|` is below `threshold`.
///
/// `order = 1` checks the support itself. The Magnus engine at order `N`
/// divides only by combinations from the order-`N` closure.
pub fn check_resonances<'a, I>(
    support: I,
    omega: &FrequencyVector,
    threshold: f64,
    order: usize,
) -> ResonanceReport
where
    I: IntoIterator<Item = &'a MultiIndex>,
{
    let d = omega.len();
    let mut generators: BTreeSet<MultiIndex> = support.into_iter().cloned().collect();
    generators.insert(MultiIndex::zero(d));

    let mut closure = generators.clone();
    for _ in 1..order.max(1) {
        let mut next = BTreeSet::new();
        for a in &closure {
            for g in &generators {
                next.insert(a + g);
            }
        }
        closure = next;
    }

    let mut offenders: Vec<(MultiIndex, f64)> = closure
        .into_iter()
        .filter(|n| !n.is_zero())
        .map(|n| {
            let v = n.dot(omega);
            (n, v)
        })
        .filter(|(_, v)| v.abs() < threshold)
        .collect();
    offenders.sort_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then_with(|| a.0.cmp(&b.0)));
    ResonanceReport { offenders, threshold }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineKind {
    Add,
    Multiply,
}

/// Finite quasi-periodic Fourier polynomial with `dim × dim` complex
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct QPOperator {
    dim: usize,
    omega: FrequencyVector,
    terms: BTreeMap<MultiIndex, CMatrix>,
}

impl QPOperator {
    /// The zero operator.
    pub fn zero(dim: usize, omega: FrequencyVector) -> Self {
        QPOperator { dim, omega, terms: BTreeMap::new() }
    }

    /// Time-independent operator `H(t) = m`.
    pub fn constant(m: CMatrix, omega: FrequencyVector) -> Result<Self> {
        let dim = m.nrows();
        let d = omega.len();
        Self::from_terms(dim, omega, [(MultiIndex::zero(d), m)])
    }

    /// Builds an operator from `(n, H_n)` pairs. Repeated indices are summed.
    pub fn from_terms<I>(dim: usize, omega: FrequencyVector, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, CMatrix)>,
    {
        let mut op = Self::zero(dim, omega);
        for (n, m) in terms {
            op.check_term(&n, &m)?;
            match op.terms.get_mut(&n) {
                Some(existing) => *existing += m,
                None => {
                    op.terms.insert(n, m);
                }
            }
        }
        op.prune();
        Ok(op)
    }

    fn check_term(&self, n: &MultiIndex, m: &CMatrix) -> Result<()> {
        if n.len() != self.d() {
            return Err(Error::Structural(format!(
                "multi-index {n} has length {} but the operator has d = {}",
                n.len(),
                self.d()
            )));
        }
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::Structural(format!(
                "coefficient at {n} is {}x{} but the operator has dim = {}",
                m.nrows(),
                m.ncols(),
                self.dim
            )));
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, m| m.norm() >= DROP_THRESHOLD);
    }

    fn with_terms(&self, terms: BTreeMap<MultiIndex, CMatrix>) -> Self {
        let mut op = QPOperator { dim: self.dim, omega: self.omega.clone(), terms };
        op.prune();
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of base frequencies.
    pub fn d(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &FrequencyVector {
        &self.omega
    }

    pub fn term(&self, n: &MultiIndex) -> Option<&CMatrix> {
        self.terms.get(n)
    }

    /// Stored `(n, H_n)` pairs in lexicographic order of `n`.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &CMatrix)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.terms.keys()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `max_n ‖n‖_∞` over the support, 0 for the zero operator.
    pub fn max_harmonic(&self) -> u32 {
        self.terms.keys().map(MultiIndex::linf_norm).max().unwrap_or(0)
    }

    /// `max |n·ω|` over the support.
    pub fn max_frequency(&self) -> f64 {
        self.terms.keys().map(|n| n.dot(&self.omega).abs()).fold(0.0, f64::max)
    }

    /// `Σ_n ‖H_n‖_F`, an upper bound on `‖H(t)‖_F` for every `t`.
    pub fn coefficient_norm_sum(&self) -> f64 {
        self.terms.values().map(|m| m.norm()).sum()
    }

    /// `H(t) = Σ_n H_n exp(i n·ω t)`
    pub fn evaluate(&self, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (n, m) in &self.terms {
            let phase = C64::from_polar(1.0, n.dot(&self.omega) * t);
            out += m * phase;
        }
        out
    }

    fn check_compatible(&self, other: &QPOperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Structural(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        if self.omega != other.omega {
            return Err(Error::Structural(format!(
                "frequency mismatch: {:?} vs {:?}",
                self.omega.as_slice(),
                other.omega.as_slice()
            )));
        }
        Ok(())
    }

    pub fn combine(&self, other: &QPOperator, kind: CombineKind) -> Result<QPOperator> {
        match kind {
            CombineKind::Add => self.add(other),
            CombineKind::Multiply => self.multiply(other),
        }
    }

    pub fn add(&self, other: &QPOperator) -> Result<QPOperator> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (n, m) in &other.terms {
            match terms.get_mut(n) {
                Some(existing) => *existing += m,
                None => {
                    terms.insert(n.clone(), m.clone());
                }
            }
        }
        Ok(self.with_terms(terms))
    }

    pub fn sub(&self, other: &QPOperator) -> Result<QPOperator> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: C64) -> QPOperator {
        self.with_terms(self.terms.iter().map(|(n, m)| (n.clone(), m * factor)).collect())
    }

    /// Fourier convolution: `result(k) = Σ_{n+m=k} a(n)·b(m)`.
    pub fn multiply(&self, other: &QPOperator) -> Result<QPOperator> {
        self.check_compatible(other)?;
        let mut terms: BTreeMap<MultiIndex, CMatrix> = BTreeMap::new();
        for (n, a) in &self.terms {
            for (m, b) in &other.terms {
                let prod = a * b;
                let k = n + m;
                match terms.get_mut(&k) {
                    Some(existing) => *existing += prod,
                    None => {
                        terms.insert(k, prod);
                    }
                }
            }
        }
        Ok(self.with_terms(terms))
    }

    /// `[a, b] = ab − ba`
    pub fn commutator(&self, other: &QPOperator) -> Result<QPOperator> {
        self.check_compatible(other)?;
        let mut terms: BTreeMap<MultiIndex, CMatrix> = BTreeMap::new();
        for (n, a) in &self.terms {
            for (m, b) in &other.terms {
                let c = a * b - b * a;
                let k = n + m;
                match terms.get_mut(&k) {
                    Some(existing) => *existing += c,
                    None => {
                        terms.insert(k, c);
                    }
                }
            }
        }
        Ok(self.with_terms(terms))
    }

    /// Pointwise conjugate transpose: `result(n) = op(−n)†`.
    pub fn adjoint(&self) -> QPOperator {
        self.with_terms(self.terms.iter().map(|(n, m)| (-n, m.adjoint())).collect())
    }

    /// The long-time average, i.e. the zero-index coefficient.
    pub fn average(&self) -> CMatrix {
        self.terms
            .get(&MultiIndex::zero(self.d()))
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.dim, self.dim))
    }

    /// Coefficient-wise time derivative, `result(n) = i(n·ω)·op(n)`.
    pub fn differentiate(&self) -> QPOperator {
        self.with_terms(
            self.terms
                .iter()
                .filter(|(n, _)| !n.is_zero())
                .map(|(n, m)| (n.clone(), m * C64::new(0.0, n.dot(&self.omega))))
                .collect(),
        )
    }

    /// Antiderivative vanishing at `t = 0`, using the default resonance
    /// threshold of the frequency vector.
    pub fn integrate_from_zero(&self) -> Result<QPOperator> {
        self.integrate_from_zero_with(self.omega.default_resonance_threshold())
    }

    /// `P(n) = op(n)/(i n·ω)` for `n ≠ 0` and `P(0) = −Σ_{n≠0} P(n)`.
    ///
    /// Requires a vanishing average and `|n·ω| ≥ threshold` on the support.
    pub fn integrate_from_zero_with(&self, threshold: f64) -> Result<QPOperator> {
        let zero = MultiIndex::zero(self.d());
        if let Some(avg) = self.terms.get(&zero) {
            let scale = self.terms.values().map(|m| m.norm()).fold(1.0, f64::max);
            if avg.norm() > ZERO_AVERAGE_TOLERANCE * scale {
                return Err(Error::Contract(format!(
                    "cannot integrate an operator with nonzero average (‖H_0‖_F = {:e})",
                    avg.norm()
                )));
            }
        }
        check_resonances(self.terms.keys(), &self.omega, threshold, 1).into_result()?;

        let mut terms: BTreeMap<MultiIndex, CMatrix> = BTreeMap::new();
        let mut constant = CMatrix::zeros(self.dim, self.dim);
        for (n, m) in self.terms.iter().filter(|(n, _)| !n.is_zero()) {
            let p = m / C64::new(0.0, n.dot(&self.omega));
            constant -= &p;
            terms.insert(n.clone(), p);
        }
        terms.insert(zero, constant);
        Ok(self.with_terms(terms))
    }

    /// True when `op(−n) = op(n)†` for every stored `n` within `tol`
    /// (Frobenius norm per coefficient).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.adjoint().max_distance(self).is_some_and(|d| d <= tol)
    }

    /// `max_n ‖a(n) − b(n)‖_F` over the union of supports, `None` when the
    /// operators are structurally incompatible.
    pub fn max_distance(&self, other: &QPOperator) -> Option<f64> {
        self.check_compatible(other).ok()?;
        let keys: BTreeSet<&MultiIndex> = self.terms.keys().chain(other.terms.keys()).collect();
        let zero = CMatrix::zeros(self.dim, self.dim);
        Some(
            keys.into_iter()
                .map(|k| {
                    let a = self.terms.get(k).unwrap_or(&zero);
                    let b = other.terms.get(k).unwrap_or(&zero);
                    (a - b).norm()
                })
                .fold(0.0, f64::max),
        )
    }
}
