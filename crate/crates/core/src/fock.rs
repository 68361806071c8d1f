//! Truncated two-mode density matrices in the Fock basis.
//!
//! Basis ordering is `|n_A, n_B⟩ ↦ n_A·N + n_B` with `N` the per-mode cutoff.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::prelude::*;

/// Largest tolerated trace deficit of a truncated state.
pub const TRACE_DEFICIT_TOL: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    cutoff: usize,
    rho: CMatrix,
}

impl FockDensityMatrix {
    /// Wraps `rho`, checking shape, Hermiticity and the trace window
    /// `[1 - 1e-6, 1]`.
    pub fn new(cutoff: usize, rho: CMatrix) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParameter { name: "cutoff", reason: "must be at least 1" });
        }
        let dim = cutoff * cutoff;
        if rho.shape() != (dim, dim) {
            return Err(Error::InvalidParameter { name: "rho", reason: "shape must be N²×N²" });
        }
        let scale = rho.iter().fold(1.0f64, |m, z| m.max(z.norm_sqr().sqrt()));
        if linalg::hermiticity_defect(&rho) > HERMITIAN_TOL * scale {
            return Err(Error::InvalidParameter { name: "rho", reason: "not Hermitian" });
        }
        let tr = rho.trace();
        if tr.im.abs() > 1e-10 || tr.re > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter { name: "rho", reason: "trace must be real and at most 1" });
        }
        let deficit = 1.0 - tr.re;
        if deficit > TRACE_DEFICIT_TOL {
            return Err(Error::CutoffTooSmall { cutoff, deficit });
        }
        Ok(Self { cutoff, rho })
    }

    /// Skips validation; for operator results that are density-matrix shaped
    /// but may not be states (partial transposes).
    pub(crate) fn from_raw(cutoff: usize, rho: CMatrix) -> Self {
        Self { cutoff, rho }
    }

    /// `|ψ⟩⟨ψ|` from two-mode amplitudes indexed `n_A·N + n_B`.
    pub fn from_pure(cutoff: usize, psi: &[C64]) -> Result<Self> {
        let dim = cutoff * cutoff;
        if psi.len() != dim {
            return Err(Error::InvalidParameter { name: "psi", reason: "length must be N²" });
        }
        let rho = CMatrix::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj());
        Self::new(cutoff, rho)
    }

    /// `ρ_A ⊗ ρ_B` from single-mode matrices of equal size.
    pub fn product(rho_a: &CMatrix, rho_b: &CMatrix) -> Result<Self> {
        if rho_a.shape() != rho_b.shape() || rho_a.nrows() != rho_a.ncols() {
            return Err(Error::InvalidParameter { name: "rho", reason: "single-mode factors must be square and equal-sized" });
        }
        Self::new(rho_a.nrows(), linalg::kron(rho_a, rho_b))
    }

    /// Diagonal mixture `Σ w_k |a_k, b_k⟩⟨a_k, b_k|`.
    pub fn diagonal_mixture(cutoff: usize, terms: &[(f64, usize, usize)]) -> Result<Self> {
        let dim = cutoff * cutoff;
        let mut rho = CMatrix::from_element(dim, dim, ZERO);
        for &(w, a, b) in terms {
            if a >= cutoff || b >= cutoff || w < 0.0 {
                return Err(Error::InvalidParameter { name: "terms", reason: "level beyond cutoff or negative weight" });
            }
            rho[(a * cutoff + b, a * cutoff + b)] += C64::new(w, 0.0);
        }
        Self::new(cutoff, rho)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff * self.cutoff
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> CMatrix {
        self.rho
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.cutoff + b
    }

    /// `⟨a, b| ρ |a', b'⟩`.
    pub fn element(&self, a: usize, b: usize, a2: usize, b2: usize) -> C64 {
        self.rho[(self.index(a, b), self.index(a2, b2))]
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.trace()
    }

    pub fn is_real(&self) -> bool {
        linalg::max_abs_imag(&self.rho) == 0.0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_hermitian_eigenvalue(&self.rho)
    }

    pub fn reduced_a(&self) -> CMatrix {
        let n = self.cutoff;
        CMatrix::from_fn(n, n, |i, j| (0..n).map(|b| self.rho[(i * n + b, j * n + b)]).sum())
    }

    pub fn reduced_b(&self) -> CMatrix {
        let n = self.cutoff;
        CMatrix::from_fn(n, n, |i, j| (0..n).map(|a| self.rho[(a * n + i, a * n + j)]).sum())
    }

    /// Nonzero entries as `(a, b, a', b', value)` tuples.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, usize, usize, C64)> {
        let n = self.cutoff;
        let mut out = Vec::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let v = self.rho[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    out.push((i / n, i % n, j / n, j % n, v));
                }
            }
        }
        out
    }

    /// Re-embeds the state at a larger cutoff, padding with zeros.
    pub fn embed(&self, cutoff: usize) -> Result<Self> {
        if cutoff < self.cutoff {
            return Err(Error::InvalidParameter { name: "cutoff", reason: "embedding must not shrink" });
        }
        let n = self.cutoff;
        let mut rho = CMatrix::from_element(cutoff * cutoff, cutoff * cutoff, ZERO);
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                rho[((i / n) * cutoff + i % n, (j / n) * cutoff + j % n)] = self.rho[(i, j)];
            }
        }
        Ok(Self { cutoff, rho })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_trace_and_shape() {
        let rho = CMatrix::identity(4, 4) * C64::new(0.5, 0.0);
        assert!(FockDensityMatrix::new(2, rho).is_err());
        let rho = CMatrix::identity(3, 3);
        assert!(FockDensityMatrix::new(2, rho).is_err());
        let rho = CMatrix::identity(4, 4) * C64::new(0.2, 0.0);
        assert!(matches!(FockDensityMatrix::new(2, rho), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn reductions_of_product_state() {
        let mut a = CMatrix::from_element(3, 3, ZERO);
        a[(1, 1)] = C64::new(1.0, 0.0);
        let mut b = CMatrix::from_element(3, 3, ZERO);
        b[(0, 0)] = C64::new(0.25, 0.0);
        b[(2, 2)] = C64::new(0.75, 0.0);
        let rho = FockDensityMatrix::product(&a, &b).unwrap();
        assert_eq!(rho.reduced_a(), a);
        assert_eq!(rho.reduced_b(), b);
        assert_eq!(rho.nonzero_entries().len(), 2);
    }
}
