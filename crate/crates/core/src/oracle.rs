//! Brute-force Fock-space machinery: ladder and parity operators, displaced
//! parity, pseudospin operators, partial transpose and the beam splitter.
//!
//! Everything here is built from dense matrices so it stays independent of
//! the closed-form Wigner kernels it is used to check.

use crate::error::{Error, Result};
use crate::fock::{FockDensityMatrix, TRACE_DEFICIT_TOL};
use crate::linalg::{self, CMatrix, C64, ONE, ZERO};
use crate::prelude::*;

/// Extra Fock levels used when building displacement operators, so the
/// truncated exponential is exact on the retained block.
const DISPLACEMENT_PADDING: usize = 40;

/// A dense operator on one mode (`N×N`) or two modes (`N²×N²`).
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    cutoff: usize,
    modes: usize,
    matrix: CMatrix,
    hermitian: bool,
}

impl FockOperator {
    pub fn single(matrix: CMatrix, hermitian: bool) -> Self {
        Self { cutoff: matrix.nrows(), modes: 1, matrix, hermitian }
    }

    pub fn two_mode(cutoff: usize, matrix: CMatrix, hermitian: bool) -> Result<Self> {
        if matrix.shape() != (cutoff * cutoff, cutoff * cutoff) {
            return Err(Error::InvalidParameter { name: "matrix", reason: "two-mode operator must be N²×N²" });
        }
        Ok(Self { cutoff, modes: 2, matrix, hermitian })
    }

    /// `a ⊗ b` of single-mode operators with equal cutoffs.
    pub fn tensor(a: &FockOperator, b: &FockOperator) -> Result<Self> {
        if a.modes != 1 || b.modes != 1 {
            return Err(Error::Unsupported("tensor product of multi-mode operators"));
        }
        if a.cutoff != b.cutoff {
            return Err(Error::CutoffMismatch(a.cutoff, b.cutoff));
        }
        Ok(Self {
            cutoff: a.cutoff,
            modes: 2,
            matrix: linalg::kron(&a.matrix, &b.matrix),
            hermitian: a.hermitian && b.hermitian,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Phase-space point `(x, p)` as a complex displacement `α = (x + ip)/2`.
pub fn alpha_of(x: f64, p: f64) -> C64 {
    C64::new(0.5 * x, 0.5 * p)
}

pub fn annihilation(cutoff: usize) -> CMatrix {
    let mut a = CMatrix::from_element(cutoff, cutoff, ZERO);
    for n in 1..cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn number(cutoff: usize) -> CMatrix {
    CMatrix::from_fn(cutoff, cutoff, |i, j| if i == j { C64::new(i as f64, 0.0) } else { ZERO })
}

/// `Π = Σ (-1)ⁿ |n⟩⟨n|`.
pub fn parity(cutoff: usize) -> CMatrix {
    CMatrix::from_fn(cutoff, cutoff, |i, j| {
        if i != j {
            ZERO
        } else if i % 2 == 0 {
            ONE
        } else {
            -ONE
        }
    })
}

/// `D(α) = exp(α a† - α* a)` on levels `0..cutoff`, from a padded space.
pub fn displacement(alpha: C64, cutoff: usize) -> CMatrix {
    let big = padded_dimension(alpha, cutoff);
    let a = annihilation(big);
    let gen = a.adjoint() * alpha - &a * alpha.conj();
    linalg::expm(&gen).view((0, 0), (cutoff, cutoff)).into_owned()
}

fn padded_dimension(alpha: C64, cutoff: usize) -> usize {
    cutoff + DISPLACEMENT_PADDING + (4.0 * alpha.norm_sqr()).ceil() as usize
}

/// `D(α) Π D†(α)` restricted to levels `0..cutoff`. The product is formed in
/// the padded space before truncation.
pub fn displaced_parity(alpha: C64, cutoff: usize) -> CMatrix {
    let big = padded_dimension(alpha, cutoff);
    let a = annihilation(big);
    let gen = a.adjoint() * alpha - &a * alpha.conj();
    let d = linalg::expm(&gen);
    let rows = d.view((0, 0), (cutoff, big)).into_owned();
    let pi = parity(big);
    &rows * pi * rows.adjoint()
}

/// `Π^z = Σ (-1)ⁿ |n⟩⟨n|`.
pub fn pseudospin_z(cutoff: usize) -> CMatrix {
    parity(cutoff)
}

/// `Π^x = Σ |2n⟩⟨2n+1| + h.c.`.
pub fn pseudospin_x(cutoff: usize) -> CMatrix {
    let mut m = CMatrix::from_element(cutoff, cutoff, ZERO);
    for even in (0..cutoff.saturating_sub(1)).step_by(2) {
        m[(even, even + 1)] = ONE;
        m[(even + 1, even)] = ONE;
    }
    m
}

/// `Π^y = -i Σ (|2n⟩⟨2n+1| - h.c.)`, so that `Π^x Π^y = i Π^z`.
pub fn pseudospin_y(cutoff: usize) -> CMatrix {
    let i = C64::new(0.0, 1.0);
    let mut m = CMatrix::from_element(cutoff, cutoff, ZERO);
    for even in (0..cutoff.saturating_sub(1)).step_by(2) {
        m[(even, even + 1)] = -i;
        m[(even + 1, even)] = i;
    }
    m
}

/// Transpose on mode B: `⟨a, b|ρ^{T_B}|a', b'⟩ = ⟨a, b'|ρ|a', b⟩`.
pub fn partial_transpose_b(rho: &FockDensityMatrix) -> FockDensityMatrix {
    let n = rho.cutoff();
    let m = rho.matrix();
    let pt = CMatrix::from_fn(n * n, n * n, |i, j| {
        let (a, b) = (i / n, i % n);
        let (a2, b2) = (j / n, j % n);
        m[(a * n + b2, a2 * n + b)]
    });
    FockDensityMatrix::from_raw(n, pt)
}

/// Beam-splitter unitary `exp(θ(a_A† a_B - a_A a_B†))` restricted to total
/// photon number `k`, in the basis `|j, k - j⟩`, `j = 0..=k`.
fn beam_splitter_block(theta: f64, k: usize) -> CMatrix {
    let mut g = CMatrix::from_element(k + 1, k + 1, ZERO);
    for j in 0..=k {
        let b = k - j;
        // a_A† a_B |j, b⟩ = √((j+1) b) |j+1, b-1⟩
        if b > 0 {
            g[(j + 1, j)] += C64::new(theta * ((j + 1) as f64 * b as f64).sqrt(), 0.0);
        }
        // a_A a_B† |j, b⟩ = √(j (b+1)) |j-1, b+1⟩
        if j > 0 {
            g[(j - 1, j)] -= C64::new(theta * (j as f64 * (b + 1) as f64).sqrt(), 0.0);
        }
    }
    linalg::expm(&g)
}

/// `U ρ U†` for the beam splitter mapping `a_A → cos θ a_A + sin θ a_B`.
///
/// The unitary conserves total photon number, so it acts blockwise; output
/// levels beyond the cutoff are dropped and the lost weight is checked
/// against the trace window.
pub fn beam_splitter(rho: &FockDensityMatrix, theta: f64) -> Result<FockDensityMatrix> {
    let n = rho.cutoff();
    let m = rho.matrix();
    let max_total = 2 * (n - 1);
    let blocks: Vec<CMatrix> = (0..=max_total).map(|k| beam_splitter_block(theta, k)).collect();
    // Input amplitudes of block k live at (j, k - j) with both below n.
    let members = |k: usize| -> Vec<(usize, usize)> {
        (0..=k).filter(|&j| j < n && k - j < n).map(|j| (j, j * n + (k - j))).collect()
    };
    let mut out = CMatrix::from_element(n * n, n * n, ZERO);
    for k in 0..=max_total {
        let in_k = members(k);
        for k2 in 0..=max_total {
            let in_k2 = members(k2);
            let mut block = CMatrix::from_element(k + 1, k2 + 1, ZERO);
            let mut any = false;
            for &(j, i) in &in_k {
                for &(j2, i2) in &in_k2 {
                    let v = m[(i, i2)];
                    if v != ZERO {
                        block[(j, j2)] = v;
                        any = true;
                    }
                }
            }
            if !any {
                continue;
            }
            let rotated = &blocks[k] * block * blocks[k2].adjoint();
            for j in 0..=k.min(n - 1) {
                if k - j >= n {
                    continue;
                }
                for j2 in 0..=k2.min(n - 1) {
                    if k2 - j2 >= n {
                        continue;
                    }
                    out[(j * n + (k - j), j2 * n + (k2 - j2))] = rotated[(j, j2)];
                }
            }
        }
    }
    let lost = rho.trace() - out.trace().re;
    if lost > TRACE_DEFICIT_TOL {
        return Err(Error::CutoffTooSmall { cutoff: n, deficit: lost });
    }
    Ok(FockDensityMatrix::from_raw(n, out))
}

/// `Tr[ρ O]` for a single-mode density matrix.
pub fn expectation_single(rho: &CMatrix, op: &CMatrix) -> C64 {
    let n = rho.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += rho[(i, j)] * op[(j, i)];
        }
    }
    acc
}

/// `Tr[ρ O]`; for Hermitian operators the imaginary part must vanish.
pub fn expectation(rho: &FockDensityMatrix, op: &FockOperator) -> Result<C64> {
    if op.modes != 2 {
        return Err(Error::Unsupported("two-mode state needs a two-mode operator"));
    }
    if op.cutoff != rho.cutoff() {
        return Err(Error::CutoffMismatch(rho.cutoff(), op.cutoff));
    }
    let v = expectation_single(rho.matrix(), &op.matrix);
    if op.hermitian && v.im.abs() > 1e-10 {
        return Err(Error::NonRealExpectation(v.im));
    }
    Ok(v)
}

/// `Tr[ρ (A ⊗ B)]` without forming the Kronecker product.
pub fn expectation_product(rho: &FockDensityMatrix, a: &CMatrix, b: &CMatrix) -> Result<C64> {
    let n = rho.cutoff();
    if a.nrows() != n || b.nrows() != n {
        return Err(Error::CutoffMismatch(n, a.nrows()));
    }
    let mut acc = ZERO;
    for (ia, ib, ja, jb, v) in rho.nonzero_entries() {
        acc += v * a[(ja, ia)] * b[(jb, ib)];
    }
    Ok(acc)
}

/// `⟨D(ξ_A)ΠD†(ξ_A) ⊗ D(ξ_B)ΠD†(ξ_B)⟩` at phase-space point `z`.
pub fn displaced_parity_correlator(rho: &FockDensityMatrix, z: &[f64; 4]) -> Result<f64> {
    let n = rho.cutoff();
    let pa = displaced_parity(alpha_of(z[0], z[1]), n);
    let pb = displaced_parity(alpha_of(z[2], z[3]), n);
    let v = expectation_product(rho, &pa, &pb)?;
    if v.im.abs() > 1e-10 {
        return Err(Error::NonRealExpectation(v.im));
    }
    Ok(v.re)
}

/// Wigner function as `(1/2π)² Tr[D Π D† ⊗ D Π D† ρ]`.
pub fn displaced_parity_wigner(rho: &FockDensityMatrix, z: &[f64; 4]) -> Result<f64> {
    Ok(displaced_parity_correlator(rho, z)? / (TAU * TAU))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ket(cutoff: usize, levels: &[(usize, usize, f64)]) -> Vec<C64> {
        let mut v = vec![ZERO; cutoff * cutoff];
        for &(a, b, amp) in levels {
            v[a * cutoff + b] = C64::new(amp, 0.0);
        }
        v
    }

    #[test]
    fn parity_of_fock_states() {
        let p = FockOperator::single(parity(4), true);
        let vac = FockOperator::tensor(&p, &FockOperator::single(CMatrix::identity(4, 4), true)).unwrap();
        let rho = FockDensityMatrix::from_pure(4, &ket(4, &[(0, 0, 1.0)])).unwrap();
        assert_abs_diff_eq!(expectation(&rho, &vac).unwrap().re, 1.0, epsilon = 1e-15);
        let rho = FockDensityMatrix::from_pure(4, &ket(4, &[(1, 0, 1.0)])).unwrap();
        assert_abs_diff_eq!(expectation(&rho, &vac).unwrap().re, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn displaced_parity_recenters_coherent_state() {
        let n = 20;
        let amps = crate::states::coherent_amplitudes(1.0, n);
        let rho = CMatrix::from_fn(n, n, |i, j| C64::new(amps[i] * amps[j], 0.0));
        let v = expectation_single(&rho, &displaced_parity(C64::new(1.0, 0.0), n));
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn displacement_is_unitary_on_low_levels() {
        let d = displacement(C64::new(0.7, -0.4), 12);
        let col = d.column(0);
        let norm: f64 = col.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn pseudospin_algebra() {
        let n = 9;
        let (x, y, z) = (pseudospin_x(n), pseudospin_y(n), pseudospin_z(n));
        let i = C64::new(0.0, 1.0);
        for sq in [&x * &x, &y * &y, &z * &z] {
            for k in 0..n - 1 {
                assert_abs_diff_eq!(sq[(k, k)].re, 1.0, epsilon = 1e-15);
            }
        }
        let xy = &x * &y;
        for k in 0..n - 1 {
            assert_eq!(xy[(k, k)], i * z[(k, k)]);
        }
    }

    #[test]
    fn werner_partial_transpose_spectrum() {
        let psi = ket(2, &[(0, 0, FRAC_1_SQRT_2), (1, 1, FRAC_1_SQRT_2)]);
        let rho = FockDensityMatrix::from_pure(2, &psi).unwrap();
        let pt = partial_transpose_b(&rho);
        assert_abs_diff_eq!(pt.min_eigenvalue(), -0.5, epsilon = 1e-12);
        assert_eq!(partial_transpose_b(&pt).matrix(), rho.matrix());
    }

    #[test]
    fn single_photon_splits_evenly() {
        let rho = FockDensityMatrix::from_pure(3, &ket(3, &[(1, 0, 1.0)])).unwrap();
        let out = beam_splitter(&rho, FRAC_PI_4).unwrap();
        let n_a = expectation_single(&out.reduced_a(), &number(3)).re;
        let n_b = expectation_single(&out.reduced_b(), &number(3)).re;
        assert_abs_diff_eq!(n_a, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(n_b, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(out.element(1, 0, 0, 1).norm(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn beam_splitter_moves_mode_a_into_b() {
        // a_A → cos θ a_A + sin θ a_B, so at θ = π/2 mode A's photon ends in B.
        let rho = FockDensityMatrix::from_pure(3, &ket(3, &[(1, 0, 1.0)])).unwrap();
        let out = beam_splitter(&rho, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(out.element(0, 1, 0, 1).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cutoff_mismatch_is_an_error() {
        let rho = FockDensityMatrix::from_pure(2, &ket(2, &[(0, 0, 1.0)])).unwrap();
        let op = FockOperator::two_mode(3, CMatrix::identity(9, 9), true).unwrap();
        assert_eq!(expectation(&rho, &op).unwrap_err(), Error::CutoffMismatch(2, 3));
    }
}
