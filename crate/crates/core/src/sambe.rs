//! Truncated extended-space (Sambe) construction.
//!
//! Time dependence is traded for harmonic indices: the operator
//!
//! ```text
//! K = Σ_n H_n ⊗ σ_n + 𝟙 ⊗ n̂·ω,     σ_n |m⟩ = |m + n⟩
//! ```
//!
//! acts on `ℋ ⊗ span{|n⟩ : ‖n‖_∞ ≤ M}`. Its block column at `n = 0` yields
//! the propagator, `U(t) = Σ_n ⟨n| exp(−iKt) |0⟩ exp(i n·ω t)`, and its
//! eigenvalues are quasienergies. Nothing is folded into a Brillouin zone:
//! for `d ≥ 2` the folding lattice `{n·ω}` is dense.

use crate::error::{Error, Result};
use crate::fourier::{FrequencyVector, MultiIndex, QPOperator};
use crate::{hermiticity_defect, CMatrix, C64};

/// Largest extended dimension accepted by [`build_extended`].
pub const MAX_EXTENDED_DIM: usize = 8192;

/// Dense truncated extended operator with a lexicographic block layout.
#[derive(Clone, Debug)]
pub struct ExtendedOperator {
    dim: usize,
    cutoff: u32,
    omega: FrequencyVector,
    matrix: CMatrix,
}

impl ExtendedOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn d(&self) -> usize {
        self.omega.len()
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn omega(&self) -> &FrequencyVector {
        &self.omega
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Number of harmonic blocks, `(2M + 1)^d`.
    pub fn num_blocks(&self) -> usize {
        (2 * self.cutoff as usize + 1).pow(self.d() as u32)
    }

    /// Position of harmonic `n` in the block layout, `None` outside the box.
    pub fn block_index(&self, n: &MultiIndex) -> Option<usize> {
        if n.len() != self.d() || n.linf_norm() > self.cutoff {
            return None;
        }
        let m = self.cutoff as i64;
        let radix = 2 * m + 1;
        Some(n.entries().iter().fold(0i64, |acc, &x| acc * radix + (x as i64 + m)) as usize)
    }

    /// Harmonic stored at block position `p`.
    pub fn block_harmonic(&self, p: usize) -> MultiIndex {
        let m = self.cutoff as usize;
        let radix = 2 * m + 1;
        let mut entries = vec![0i32; self.d()];
        let mut rest = p;
        for e in entries.iter_mut().rev() {
            *e = (rest % radix) as i32 - m as i32;
            rest /= radix;
        }
        MultiIndex::new(entries)
    }

    /// Eigen-decomposition, with eigenvalues in ascending order.
    pub fn diagonalize(&self) -> Result<ExtendedSpectrum> {
        self.check_hermitian()?;
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = CMatrix::from_fn(self.matrix.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(ExtendedSpectrum { operator: self.clone(), eigenvalues, eigenvectors })
    }

    fn check_hermitian(&self) -> Result<()> {
        let defect = hermiticity_defect(&self.matrix);
        if defect > 1e-12 * self.matrix.norm().max(1.0) {
            return Err(Error::Contract(format!(
                "extended operator is not Hermitian (‖K − K†‖_F = {defect:e})"
            )));
        }
        Ok(())
    }
}

/// Assembles `K` for harmonics `‖n‖_∞ ≤ cutoff`.
///
/// Block `(m + n, m)` holds `H_n` whenever both harmonics lie in the box, and
/// diagonal block `m` additionally carries `(m·ω) 𝟙`.
pub fn build_extended(h: &QPOperator, cutoff: u32) -> Result<ExtendedOperator> {
    if h.max_harmonic() > cutoff {
        return Err(Error::Range(format!(
            "cutoff {cutoff} is smaller than the largest harmonic {} of the Hamiltonian",
            h.max_harmonic()
        )));
    }
    let dim = h.dim();
    let blocks = (2 * cutoff as usize + 1)
        .checked_pow(h.d() as u32)
        .filter(|b| b.saturating_mul(dim) <= MAX_EXTENDED_DIM)
        .ok_or_else(|| Error::Range(format!("extended dimension exceeds {MAX_EXTENDED_DIM}")))?;
    let mut k = ExtendedOperator {
        dim,
        cutoff,
        omega: h.omega().clone(),
        matrix: CMatrix::zeros(dim * blocks, dim * blocks),
    };
    for col in 0..blocks {
        let m = k.block_harmonic(col);
        let shift = m.dot(&k.omega);
        for i in 0..dim {
            k.matrix[(col * dim + i, col * dim + i)] += C64::from(shift);
        }
        for (n, hn) in h.terms() {
            if let Some(row) = k.block_index(&(&m + n)) {
                let mut block = k.matrix.view_mut((row * dim, col * dim), (dim, dim));
                block += hn;
            }
        }
    }
    Ok(k)
}

/// Eigenvalues and eigenvectors of an [`ExtendedOperator`].
#[derive(Clone, Debug)]
pub struct ExtendedSpectrum {
    operator: ExtendedOperator,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl ExtendedSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn operator(&self) -> &ExtendedOperator {
        &self.operator
    }

    /// `U(t) = Σ_n ⟨n| exp(−iKt) |0⟩ exp(i n·ω t)`
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.propagator_from_column(t, &MultiIndex::zero(self.operator.d()))
            .expect("zero harmonic is always inside the box")
    }

    /// Same as [`propagator`](Self::propagator) but read off the block column
    /// of harmonic `origin`: `U(t) = Σ_m ⟨m| exp(−iKt) |origin⟩ exp(i m·ω t)`.
    /// Away from the truncation edges the result does not depend on `origin`.
    pub fn propagator_from_column(&self, t: f64, origin: &MultiIndex) -> Result<CMatrix> {
        let k = &self.operator;
        let dim = k.dim;
        let col = k
            .block_index(origin)
            .ok_or_else(|| Error::Range(format!("harmonic {origin} lies outside the cutoff box")))?;
        let v = &self.eigenvectors;
        // Z = diag(exp(−iλt)) · V†[:, origin block]
        let mut z = v.rows(col * dim, dim).adjoint();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            let mut row = z.row_mut(j);
            row *= C64::from_polar(1.0, -lambda * t);
        }
        let column = v * z;
        let mut u = CMatrix::zeros(dim, dim);
        for p in 0..k.num_blocks() {
            let phase = C64::from_polar(1.0, k.block_harmonic(p).dot(&k.omega) * t);
            u += column.rows(p * dim, dim) * phase;
        }
        Ok(u)
    }

    /// Eigenvalues whose eigenvector keeps at least half its weight on
    /// harmonics with `‖n‖_∞ ≤ radius`. These are the ones least affected by
    /// truncation.
    pub fn central_quasienergies(&self, radius: u32) -> Vec<f64> {
        let k = &self.operator;
        let dim = k.dim;
        let inner: Vec<usize> = (0..k.num_blocks()).filter(|&p| k.block_harmonic(p).linf_norm() <= radius).collect();
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                let col = self.eigenvectors.column(*j);
                let weight: f64 = inner.iter().map(|&p| col.rows(p * dim, dim).norm_squared()).sum();
                weight >= 0.5
            })
            .map(|(_, e)| *e)
            .collect()
    }
}

/// Propagator induced by `K` at time `t`. Diagonalizes on every call; use
/// [`ExtendedOperator::diagonalize`] when evaluating many times.
pub fn propagator_from_extended(k: &ExtendedOperator, t: f64) -> Result<CMatrix> {
    Ok(k.diagonalize()?.propagator(t))
}

/// Eigenvalues of `K` in ascending order, without folding.
pub fn quasienergies(k: &ExtendedOperator) -> Result<Vec<f64>> {
    k.check_hermitian()?;
    let mut values: Vec<f64> = k.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_z(scale: f64) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::from(scale);
        m[(1, 1)] = C64::from(-scale);
        m
    }

    #[test]
    fn size_of_truncated_operator() {
        let h = QPOperator::constant(sigma_z(1.0), FrequencyVector::periodic(1.0).unwrap()).unwrap();
        let k = build_extended(&h, 2).unwrap();
        assert_eq!(k.matrix().shape(), (10, 10));
    }

    #[test]
    fn cutoff_below_support_is_rejected() {
        let w = FrequencyVector::periodic(1.0).unwrap();
        let h = QPOperator::from_terms(2, w, [(MultiIndex::from([3]), sigma_z(1.0))]).unwrap();
        assert!(matches!(build_extended(&h, 2), Err(Error::Range(_))));
    }

    #[test]
    fn block_layout_round_trips() {
        let w = FrequencyVector::new(vec![1.0, 2f64.sqrt(), 3f64.sqrt()]).unwrap();
        let h = QPOperator::zero(1, w);
        let k = build_extended(&h, 2).unwrap();
        for p in 0..k.num_blocks() {
            assert_eq!(k.block_index(&k.block_harmonic(p)), Some(p));
        }
        assert_eq!(k.block_harmonic(0), MultiIndex::from([-2, -2, -2]));
        assert_eq!(k.block_index(&MultiIndex::from([0, 0, 3])), None);
        let sorted: Vec<MultiIndex> = (0..k.num_blocks()).map(|p| k.block_harmonic(p)).collect();
        assert!(sorted.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn static_two_level_spectrum_is_shifted_ladder() {
        let (delta, w) = (0.3, 1.0);
        let h = QPOperator::constant(sigma_z(delta / 2.0), FrequencyVector::periodic(w).unwrap()).unwrap();
        let k = build_extended(&h, 1).unwrap();
        let q = quasienergies(&k).unwrap();
        let mut expected = vec![];
        for m in -1..=1 {
            for s in [-1.0, 1.0] {
                expected.push(s * delta / 2.0 + m as f64 * w);
            }
        }
        expected.sort_by(f64::total_cmp);
        for (a, b) in q.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn static_hamiltonian_is_block_diagonal_and_propagates_exactly() {
        let mut m = sigma_z(0.4);
        m[(0, 1)] = C64::new(0.1, 0.2);
        m[(1, 0)] = C64::new(0.1, -0.2);
        let h = QPOperator::constant(m.clone(), FrequencyVector::periodic(1.0).unwrap()).unwrap();
        let k = build_extended(&h, 3).unwrap();
        for r in 0..k.num_blocks() {
            for c in 0..k.num_blocks() {
                if r != c {
                    assert_eq!(k.matrix().view((2 * r, 2 * c), (2, 2)).norm(), 0.0);
                }
            }
        }
        let t = 3.7;
        let u = propagator_from_extended(&k, t).unwrap();
        let exact = crate::propagator::matrix_exp_hermitian(&m, t).unwrap();
        assert!((u - exact).norm() < 1e-12);
    }
}
