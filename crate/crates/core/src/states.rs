//! Factories for the state families: two-mode squeezed thermal states,
//! two-qubit Werner states embedded in the lowest Fock levels, and dephased
//! two-mode cat states. Each family is available as a Wigner field and as a
//! truncated Fock density matrix; Gaussian states also as covariance data.

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::fock::{FockDensityMatrix, TRACE_DEFICIT_TOL};
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::prelude::*;
use crate::wigner::WignerField;

const PHYSICAL_TOL: f64 = 1e-10;

/// Two-mode symplectic form `Ω = J ⊕ J` with `J = [[0, 1], [-1, 0]]`.
pub fn symplectic_form() -> Matrix4<C64> {
    let i = C64::new(0.0, 1.0);
    let mut o = Matrix4::from_element(ZERO);
    o[(0, 1)] = i;
    o[(1, 0)] = -i;
    o[(2, 3)] = i;
    o[(3, 2)] = -i;
    o
}

/// Single-mode Gaussian state: mean `(x, p)` and 2×2 covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOneMode {
    pub mean: [f64; 2],
    pub cov: Matrix2<f64>,
}

impl GaussianOneMode {
    pub fn vacuum() -> Self {
        Self { mean: [0.0; 2], cov: Matrix2::identity() }
    }

    /// Displaced squeezed thermal state: thermal variance `nu ≥ 1`, squeeze
    /// `r` along angle `phi`.
    pub fn squeezed_thermal(nu: f64, r: f64, phi: f64, mean: [f64; 2]) -> Result<Self> {
        if !(nu >= 1.0) {
            return Err(Error::InvalidParameter { name: "nu", reason: "thermal variance must be at least 1" });
        }
        let (s, c) = phi.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        let sq = Matrix2::new((-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp());
        Ok(Self { mean, cov: rot * sq * rot.transpose() * nu })
    }

    pub fn purity(&self) -> f64 {
        1.0 / self.cov.determinant().sqrt()
    }

    pub fn wigner(&self, x: f64, p: f64) -> f64 {
        let det = self.cov.determinant();
        let dx = x - self.mean[0];
        let dp = p - self.mean[1];
        let (a, b, d) = (self.cov[(0, 0)], self.cov[(0, 1)], self.cov[(1, 1)]);
        let q = (d * dx * dx - 2.0 * b * dx * dp + a * dp * dp) / det;
        (-0.5 * q).exp() / (TAU * det.sqrt())
    }
}

/// Two-mode Gaussian state in the `(x_A, p_A, x_B, p_B)` ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianTwoMode {
    pub mean: [f64; 4],
    pub cov: Matrix4<f64>,
}

impl GaussianTwoMode {
    /// Validates symmetry and the uncertainty principle `V + iΩ ⪰ 0`.
    pub fn new(mean: [f64; 4], cov: Matrix4<f64>) -> Result<Self> {
        let g = Self { mean, cov };
        if (cov - cov.transpose()).abs().max() > 1e-12 * cov.abs().max().max(1.0) {
            return Err(Error::InvalidParameter { name: "cov", reason: "covariance must be symmetric" });
        }
        let lam = g.physicality_eigenvalue();
        if lam < -PHYSICAL_TOL {
            return Err(Error::InvalidParameter { name: "cov", reason: "violates V + iΩ ⪰ 0" });
        }
        Ok(g)
    }

    pub fn vacuum() -> Self {
        Self { mean: [0.0; 4], cov: Matrix4::identity() }
    }

    /// Standard form with variances `n` (mode A), `m` (mode B) and
    /// correlations `c1` (x) and `c2` (p).
    pub fn standard_form(n: f64, m: f64, c1: f64, c2: f64) -> Result<Self> {
        #[rustfmt::skip]
        let cov = Matrix4::new(
            n, 0.0, c1, 0.0,
            0.0, n, 0.0, c2,
            c1, 0.0, m, 0.0,
            0.0, c2, 0.0, m,
        );
        Self::new([0.0; 4], cov)
    }

    pub fn product(a: &GaussianOneMode, b: &GaussianOneMode) -> Self {
        let mut cov = Matrix4::zeros();
        cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&a.cov);
        cov.fixed_view_mut::<2, 2>(2, 2).copy_from(&b.cov);
        Self { mean: [a.mean[0], a.mean[1], b.mean[0], b.mean[1]], cov }
    }

    pub fn tmsv(s: f64) -> Self {
        tmst_covariance(&TmstParams { s, eta: 1.0, r: 0.0 }).expect("TMSV is always physical")
    }

    /// Smallest eigenvalue of `V + iΩ`; non-negative for physical states.
    pub fn physicality_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue4(&(self.cov.map(|v| C64::new(v, 0.0)) + symplectic_form()))
    }

    /// Standard-form parameters `(n, m, c1, c2)` read off the covariance.
    pub fn standard_params(&self) -> (f64, f64, f64, f64) {
        (self.cov[(0, 0)], self.cov[(2, 2)], self.cov[(0, 2)], self.cov[(1, 3)])
    }

    pub fn reduced_a(&self) -> GaussianOneMode {
        GaussianOneMode { mean: [self.mean[0], self.mean[1]], cov: self.cov.fixed_view::<2, 2>(0, 0).into_owned() }
    }

    pub fn reduced_b(&self) -> GaussianOneMode {
        GaussianOneMode { mean: [self.mean[2], self.mean[3]], cov: self.cov.fixed_view::<2, 2>(2, 2).into_owned() }
    }

    pub fn wigner(&self) -> Result<WignerField> {
        crate::wigner::gaussian_wigner(self)
    }
}

/// Two-mode squeezed vacuum with squeezing `s`, whose mode A passes a
/// quantum-limited attenuator (transmissivity `eta`) and then a
/// quantum-limited amplifier (gain `cosh² r`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmstParams {
    pub s: f64,
    pub eta: f64,
    pub r: f64,
}

impl TmstParams {
    pub fn tmsv(s: f64) -> Self {
        Self { s, eta: 1.0, r: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s >= 0.0 && self.s.is_finite()) {
            return Err(Error::InvalidParameter { name: "s", reason: "squeezing must be non-negative" });
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidParameter { name: "eta", reason: "transmissivity must lie in (0, 1]" });
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter { name: "r", reason: "amplifier gain parameter must be non-negative" });
        }
        Ok(())
    }

    /// Standard-form `(n, m, c)` with `c1 = -c2 = c`.
    pub fn standard_params(&self) -> (f64, f64, f64) {
        let Self { s, eta, r } = *self;
        let ch2 = r.cosh().powi(2);
        let n = eta * ch2 * (2.0 * s).cosh() + (1.0 - eta) * ch2 + r.sinh().powi(2);
        let m = (2.0 * s).cosh();
        let c = eta.sqrt() * r.cosh() * (2.0 * s).sinh();
        (n, m, c)
    }

    /// Entanglement boundary `η = tanh² r`.
    pub fn is_entangled(&self) -> bool {
        self.s > 0.0 && self.eta > self.r.tanh().powi(2)
    }

    pub fn default_cutoff(&self) -> usize {
        (10.0 + 20.0 * self.s).ceil() as usize
    }
}

pub fn tmst_covariance(p: &TmstParams) -> Result<GaussianTwoMode> {
    p.validate()?;
    let (n, m, c) = p.standard_params();
    GaussianTwoMode::standard_form(n, m, c, -c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellState {
    /// `(|00⟩ + |11⟩)/√2`
    PhiPlus,
    /// `(|01⟩ + |10⟩)/√2`
    PsiPlus,
}

/// `ε |ψ⟩⟨ψ| + (1 - ε) 𝟙/4` on the two-qubit subspace spanned by Fock
/// levels 0 and 1 of each mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    pub bell: BellState,
    pub epsilon: f64,
}

impl WernerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter { name: "epsilon", reason: "mixing weight must lie in [0, 1]" });
        }
        Ok(())
    }
}

pub fn werner_wigner(p: &WernerParams) -> Result<WignerField> {
    p.validate()?;
    Ok(WignerField::Werner(*p))
}

/// Closed-form Werner Wigner function.
pub(crate) fn werner_value(p: &WernerParams, z: &[f64; 4]) -> f64 {
    let [xa, pa, xb, pb] = *z;
    let e = p.epsilon;
    let ra = xa * xa + pa * pa;
    let rb = xb * xb + pb * pb;
    let quartic = ra * rb;
    let bracket = match p.bell {
        BellState::PhiPlus => (1.0 + e) * quartic + 4.0 * e * (xa * xb - pa * pb) - 2.0 * e * (ra + rb) + 4.0 * e,
        BellState::PsiPlus => (1.0 - e) * quartic + 4.0 * e * (xa * xb + pa * pb) + 2.0 * e * (ra + rb) - 4.0 * e,
    };
    (-0.5 * (ra + rb)).exp() * bracket / (16.0 * PI * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatSign {
    Plus,
    Minus,
}

/// `ε |ψ±⟩⟨ψ±| + (1 - ε)/2 (|γ,γ⟩⟨γ,γ| + |-γ,-γ⟩⟨-γ,-γ|)` with
/// `|ψ±⟩ ∝ |γ,γ⟩ ± |-γ,-γ⟩` and real amplitude `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatParams {
    pub gamma: f64,
    pub epsilon: f64,
    pub sign: CatSign,
}

impl CatParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter { name: "gamma", reason: "amplitude must be non-negative" });
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParameter { name: "epsilon", reason: "dephasing weight must lie in [0, 1]" });
        }
        if self.sign == CatSign::Minus && self.gamma == 0.0 {
            return Err(Error::SingularNormalization);
        }
        Ok(())
    }

    pub fn default_cutoff(&self) -> usize {
        (self.gamma * self.gamma + 6.0 * self.gamma + 10.0).ceil() as usize
    }
}

pub fn cat_wigner(p: &CatParams) -> Result<WignerField> {
    p.validate()?;
    Ok(WignerField::Cat(*p))
}

/// Closed-form dephased cat Wigner function.
pub(crate) fn cat_value(p: &CatParams, z: &[f64; 4]) -> f64 {
    let [xa, pa, xb, pb] = *z;
    let g = p.gamma;
    let e = p.epsilon;
    let g2 = g * g;
    let r = xa * xa + pa * pa + xb * xb + pb * pb;
    let fringe = (2.0 * g * (pa + pb)).cos();
    let sx = 2.0 * g * (xa + xb);
    // e^{-(r + 8γ²)/2}·cosh(sx) and e^{-(r + 8γ²)/2}·e^{8γ²} written with
    // bounded exponents.
    let lobes = 0.5 * ((-0.5 * r - 4.0 * g2 + sx).exp() + (-0.5 * r - 4.0 * g2 - sx).exp());
    let central = (-0.5 * r).exp() * fringe;
    // q = e^{-4γ²} keeps every exponent bounded.
    let q = (-4.0 * g2).exp();
    let w = match p.sign {
        CatSign::Plus => (e * central + (1.0 + (1.0 - e) * q) * lobes) / (1.0 + q),
        CatSign::Minus => (-e * central + (1.0 + (e - 1.0) * q) * lobes) / (1.0 - q),
    };
    w / (4.0 * PI * PI)
}

/// Any state family with a Fock representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Tmst(TmstParams),
    Werner(WernerParams),
    Cat(CatParams),
}

impl StateSpec {
    pub fn default_cutoff(&self) -> usize {
        match self {
            StateSpec::Tmst(p) => p.default_cutoff(),
            StateSpec::Werner(_) => 2,
            StateSpec::Cat(p) => p.default_cutoff(),
        }
    }

    pub fn wigner(&self) -> Result<WignerField> {
        match self {
            StateSpec::Tmst(p) => tmst_covariance(p)?.wigner(),
            StateSpec::Werner(p) => werner_wigner(p),
            StateSpec::Cat(p) => cat_wigner(p),
        }
    }

    /// The same family with mixing/dephasing weight replaced, when the family
    /// has one.
    pub fn with_epsilon(&self, epsilon: f64) -> Option<Self> {
        match *self {
            StateSpec::Tmst(_) => None,
            StateSpec::Werner(p) => Some(StateSpec::Werner(WernerParams { epsilon, ..p })),
            StateSpec::Cat(p) => Some(StateSpec::Cat(CatParams { epsilon, ..p })),
        }
    }
}

pub fn state_to_fock(spec: &StateSpec, cutoff: usize) -> Result<FockDensityMatrix> {
    let rho = match spec {
        StateSpec::Tmst(p) => tmst_fock(p, cutoff)?,
        StateSpec::Werner(p) => werner_fock(p, cutoff)?,
        StateSpec::Cat(p) => cat_fock(p, cutoff)?,
    };
    let deficit = 1.0 - rho.trace().re;
    if deficit > TRACE_DEFICIT_TOL {
        return Err(Error::CutoffTooSmall { cutoff, deficit });
    }
    FockDensityMatrix::new(cutoff, rho)
}

fn werner_fock(p: &WernerParams, cutoff: usize) -> Result<CMatrix> {
    p.validate()?;
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall { cutoff, deficit: 1.0 });
    }
    let n = cutoff;
    let idx = |a: usize, b: usize| a * n + b;
    let mut rho = CMatrix::from_element(n * n, n * n, ZERO);
    let e = p.epsilon;
    for a in 0..2 {
        for b in 0..2 {
            rho[(idx(a, b), idx(a, b))] += C64::new((1.0 - e) / 4.0, 0.0);
        }
    }
    let (u, v) = match p.bell {
        BellState::PhiPlus => (idx(0, 0), idx(1, 1)),
        BellState::PsiPlus => (idx(0, 1), idx(1, 0)),
    };
    for &i in &[u, v] {
        for &j in &[u, v] {
            rho[(i, j)] += C64::new(e / 2.0, 0.0);
        }
    }
    Ok(rho)
}

/// Fock amplitudes of the coherent state `|γ⟩` for real `γ`.
pub fn coherent_amplitudes(gamma: f64, cutoff: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(cutoff);
    let mut amp = (-0.5 * gamma * gamma).exp();
    for k in 0..cutoff {
        out.push(amp);
        amp *= gamma / ((k + 1) as f64).sqrt();
    }
    out
}

fn cat_fock(p: &CatParams, cutoff: usize) -> Result<CMatrix> {
    p.validate()?;
    let n = cutoff;
    let plus = coherent_amplitudes(p.gamma, n);
    let minus = coherent_amplitudes(-p.gamma, n);
    let pair = |amps: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                v[a * n + b] = amps[a] * amps[b];
            }
        }
        v
    };
    let gg = pair(&plus);
    let mm = pair(&minus);
    let overlap = (-4.0 * p.gamma * p.gamma).exp();
    let (sgn, norm2) = match p.sign {
        CatSign::Plus => (1.0, 1.0 / (2.0 * (1.0 + overlap))),
        CatSign::Minus => (-1.0, 1.0 / (2.0 * (1.0 - overlap))),
    };
    let psi: Vec<f64> = gg.iter().zip(&mm).map(|(a, b)| (a + sgn * b) * norm2.sqrt()).collect();
    let e = p.epsilon;
    let rho = CMatrix::from_fn(n * n, n * n, |i, j| {
        C64::new(e * psi[i] * psi[j] + 0.5 * (1.0 - e) * (gg[i] * gg[j] + mm[i] * mm[j]), 0.0)
    });
    Ok(rho)
}

/// Binomial coefficient as a float, exact for the small arguments used here.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// TMST in the Fock basis: the TMSV Schmidt form followed by attenuator and
/// amplifier Kraus maps on mode A, truncated to `cutoff`.
fn tmst_fock(p: &TmstParams, cutoff: usize) -> Result<CMatrix> {
    p.validate()?;
    let n_out = cutoff;
    let lam = p.s.tanh();
    let coeffs: Vec<f64> = (0..n_out).map(|k| lam.powi(k as i32) / p.s.cosh()).collect();
    let eta = p.eta;
    let inv_g = 1.0 / p.r.cosh().powi(2);

    // Attenuator: |n⟩ → Σ_k √C(n,k) η^{(n-k)/2} (1-η)^{k/2} |n-k⟩ (Kraus index k).
    let att = |n: usize, k: usize| -> f64 {
        if k > n {
            0.0
        } else if eta == 1.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            (binomial(n, k) * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32)).sqrt()
        }
    };
    // Amplifier: |m⟩ → Σ_j √C(m+j,j) g^{-(m+1)/2} (1-1/g)^{j/2} |m+j⟩.
    let amp = |m: usize, j: usize| -> f64 {
        if inv_g == 1.0 {
            if j == 0 { 1.0 } else { 0.0 }
        } else {
            (binomial(m + j, j) * inv_g.powi((m + 1) as i32) * (1.0 - inv_g).powi(j as i32)).sqrt()
        }
    };

    let dim = n_out * n_out;
    let mut rho = CMatrix::from_element(dim, dim, ZERO);
    let max_k = if eta == 1.0 { 1 } else { n_out };
    let max_j = if inv_g == 1.0 { 1 } else { n_out };
    // Mode B keeps the TMSV index, so only indices below the output cutoff
    // contribute; mode A carries n - k + j.
    for k in 0..max_k {
        for j in 0..max_j {
            let weights: Vec<(usize, usize, f64)> = (k..n_out)
                .filter(|&nb| nb - k + j < n_out)
                .map(|nb| (nb - k + j, nb, coeffs[nb] * att(nb, k) * amp(nb - k, j)))
                .filter(|w| w.2 != 0.0)
                .collect();
            for &(a1, b1, w1) in &weights {
                for &(a2, b2, w2) in &weights {
                    rho[(a1 * n_out + b1, a2 * n_out + b2)] += C64::new(w1 * w2, 0.0);
                }
            }
        }
    }
    Ok(rho)
}
