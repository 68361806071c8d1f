//! Entanglement criteria built on Wigner slices, plus the reference
//! criteria (Simon, Duan, PPT, pseudospin steering, CHSH) used to check them.
//!
//! Every check returns a [`CriterionReport`]. A violation is only reported
//! when the value breaches the bound by more than the error estimate.

use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::fock::FockDensityMatrix;
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::oracle;
use crate::phase::{Rect, Region, Transform2};
use crate::prelude::*;
use crate::quadrature::{self, IntegralResult, QuadratureSpec, TensorRules};
use crate::states::GaussianTwoMode;
use crate::wigner::{gaussian_mixture_purity, make_slice, reduced_mode_wigner, LinearMap, SliceField, WignerField};

/// Eigenvalue threshold below which PPT/Simon report entanglement.
pub const EIGEN_TOL: f64 = 1e-10;
/// Margin for the steering and Bell bounds.
pub const CORRELATOR_TOL: f64 = 1e-8;
/// `⟨D Π D† ⊗ D Π D†⟩ = BELL_CORRELATOR_SCALE · W`.
pub const BELL_CORRELATOR_SCALE: f64 = 4.0 * PI * PI;
/// Floor on purity error estimates from closed forms and matrix algebra.
const PURITY_FLOOR: f64 = 1e-10;
/// Largest per-mode cutoff for the Fock purity route.
const FOCK_PURITY_MAX_CUTOFF: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CriterionId {
    C1,
    C2,
    C3,
    PurityS1,
    Simon,
    Duan,
    Ppt,
    PseudospinEpr,
    BellChsh,
}

impl CriterionId {
    pub const ALL: [CriterionId; 9] = [
        CriterionId::C1,
        CriterionId::C2,
        CriterionId::C3,
        CriterionId::PurityS1,
        CriterionId::Simon,
        CriterionId::Duan,
        CriterionId::Ppt,
        CriterionId::PseudospinEpr,
        CriterionId::BellChsh,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CriterionId::C1 => "c1",
            CriterionId::C2 => "c2",
            CriterionId::C3 => "c3",
            CriterionId::PurityS1 => "purity-s1",
            CriterionId::Simon => "simon",
            CriterionId::Duan => "duan",
            CriterionId::Ppt => "ppt",
            CriterionId::PseudospinEpr => "pseudospin-epr",
            CriterionId::BellChsh => "bell-chsh",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: CriterionId,
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
    pub transform: Option<Transform2>,
    pub theta: Option<f64>,
    pub region: Option<Region>,
    pub error_estimate: f64,
}

impl CriterionReport {
    fn new(id: CriterionId, value: f64, bound: f64, violated: bool, error_estimate: f64) -> Self {
        Self { id, value, bound, violated, transform: None, theta: None, region: None, error_estimate }
    }

    /// `value - bound` signed so that positive means violated.
    pub fn margin(&self) -> f64 {
        match self.id {
            CriterionId::C3 | CriterionId::Simon | CriterionId::Duan | CriterionId::Ppt => self.bound - self.value,
            _ => self.value - self.bound,
        }
    }
}

fn check_theta_open(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::DegenerateAngle(theta))
    }
}

fn integrate_slice(slice: &SliceField<'_>, region: &Region, spec: &QuadratureSpec, absolute: bool) -> Result<IntegralResult> {
    let mut spec = *spec;
    if matches!(region, Region::FullPlane) && spec.truncation.is_none() {
        match slice.truncation()? {
            Some(rect) => spec.truncation = Some(rect),
            None => return Ok(IntegralResult::default()),
        }
    }
    let f = |x: f64, p: f64| slice.eval(x, p);
    if absolute {
        quadrature::integrate_abs(f, region, &spec)
    } else {
        quadrature::integrate(f, region, &spec)
    }
}

/// `∫∫ W(x cos θ, p cos θ, x' sin θ, p' sin θ) dx dp ≤ 1/(2π)`.
pub fn criterion1(w: &WignerField, t: &Transform2, theta: f64, spec: &QuadratureSpec) -> Result<CriterionReport> {
    t.validate()?;
    check_theta_open(theta)?;
    if theta.cos().abs() < 1e-9 {
        return Err(Error::DegenerateAngle(theta));
    }
    let slice = make_slice(w, t, theta);
    let res = integrate_slice(&slice, &Region::FullPlane, spec, false)?;
    let bound = 1.0 / TAU;
    let mut r =
        CriterionReport::new(CriterionId::C1, res.value, bound, res.value > bound + res.error_estimate, res.error_estimate);
    r.transform = Some(*t);
    r.theta = Some(theta);
    r.region = Some(Region::FullPlane);
    Ok(r)
}

/// `∫∫_R |W(x cos θ, p cos θ, x' sin θ, p' sin θ)| dx dp ≤ 1/(2π |sin 2θ|)`.
pub fn criterion2(
    w: &WignerField,
    t: &Transform2,
    theta: f64,
    region: &Region,
    spec: &QuadratureSpec,
) -> Result<CriterionReport> {
    t.validate()?;
    check_theta_open(theta)?;
    let s2 = (2.0 * theta).sin().abs();
    if s2 < 1e-9 {
        return Err(Error::DegenerateAngle(theta));
    }
    region.validate()?;
    let slice = make_slice(w, t, theta);
    let res = integrate_slice(&slice, region, spec, true)?;
    let bound = 1.0 / (TAU * s2);
    let mut r =
        CriterionReport::new(CriterionId::C2, res.value, bound, res.value > bound + res.error_estimate, res.error_estimate);
    r.transform = Some(*t);
    r.theta = Some(theta);
    r.region = Some(region.clone());
    Ok(r)
}

/// `∫∫ W(x, p, x', p') dx dp ≥ 0`.
pub fn criterion3(w: &WignerField, t: &Transform2, spec: &QuadratureSpec) -> Result<CriterionReport> {
    t.validate()?;
    let slice = SliceField::new(w, LinearMap::unscaled(t));
    let res = integrate_slice(&slice, &Region::FullPlane, spec, false)?;
    let mut r = CriterionReport::new(CriterionId::C3, res.value, 0.0, res.value < -res.error_estimate, res.error_estimate);
    r.transform = Some(*t);
    r.region = Some(Region::FullPlane);
    Ok(r)
}

/// `4π ∫∫ W'² ≤ 1` for the reduced output mode of the partially transposed
/// state mixed at angle `θ`.
pub fn purity_s1(w: &WignerField, theta: f64, spec: &QuadratureSpec) -> Result<CriterionReport> {
    check_theta_open(theta)?;
    let (value, err) = match w {
        WignerField::Gaussian(_) => {
            let reduced = reduced_mode_wigner(w, theta, &Transform2::P_REFLECT);
            let comps = reduced.gaussian_components().expect("Gaussian backend")?;
            (gaussian_mixture_purity(&comps), PURITY_FLOOR)
        }
        WignerField::Fock(f) if f.rho().cutoff() <= FOCK_PURITY_MAX_CUTOFF => fock_purity(f.rho(), theta)?,
        WignerField::Werner(p) => {
            let rho = crate::states::state_to_fock(&crate::states::StateSpec::Werner(*p), 2)?;
            fock_purity(&rho, theta)?
        }
        _ => quadrature_purity(w, theta, spec)?,
    };
    let bound = 1.0;
    let mut r = CriterionReport::new(CriterionId::PurityS1, value, bound, value > bound + err, err);
    r.theta = Some(theta);
    r.transform = Some(Transform2::P_REFLECT);
    Ok(r)
}

/// Smallest cutoff holding every populated level of `rho`.
fn occupied_levels(rho: &FockDensityMatrix) -> usize {
    rho.nonzero_entries().iter().map(|e| e.0.max(e.1).max(e.2).max(e.3) + 1).max().unwrap_or(1)
}

/// Restricts (or pads) `rho` to `cutoff` levels; entries beyond it must be zero.
fn resize(rho: &FockDensityMatrix, cutoff: usize) -> FockDensityMatrix {
    let mut m = CMatrix::from_element(cutoff * cutoff, cutoff * cutoff, ZERO);
    for (a, b, a2, b2, v) in rho.nonzero_entries() {
        if a < cutoff && b < cutoff && a2 < cutoff && b2 < cutoff {
            m[(a * cutoff + b, a2 * cutoff + b2)] = v;
        }
    }
    FockDensityMatrix::from_raw(cutoff, m)
}

fn fock_purity(rho: &FockDensityMatrix, theta: f64) -> Result<(f64, f64)> {
    // Total photon number k < 2L - 1 survives the beam splitter untruncated
    // at cutoff 2L - 1.
    let levels = occupied_levels(rho);
    let work = resize(rho, 2 * levels - 1);
    let pt = oracle::partial_transpose_b(&work);
    let mixed = oracle::beam_splitter(&pt, theta)?;
    let out = mixed.reduced_b();
    let purity: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    let err = PURITY_FLOOR + rho.trace_deficit().abs();
    Ok((purity, err))
}

/// Nested quadrature: the reduced mode by slice integration at each outer
/// node, then `4π ∫∫ W'²`.
fn quadrature_purity(w: &WignerField, theta: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let reduced = reduced_mode_wigner(w, theta, &Transform2::P_REFLECT);
    let env = w.envelope();
    // The beam splitter is orthogonal, so the output mode stays inside the
    // envelope's reach.
    let reach = (0..4).map(|k| env.center[k].abs() + env.half_width[k]).fold(0.0, f64::max);
    let outer = Rect::centered(reach, reach);
    let inner = TensorRules::new(spec.order);
    let value_at = |bx: f64, bp: f64| -> f64 {
        let slice = reduced.integrand(bx, bp);
        match slice.truncation() {
            Ok(Some(rect)) => inner.integrate_fast(&rect, |x, p| slice.eval(x, p)),
            _ => 0.0,
        }
    };
    let tol = spec.tolerance.max(1e-6);
    let mut last = (f64::NAN, f64::INFINITY);
    for order in [spec.order, 2 * spec.order, 4 * spec.order] {
        let res = TensorRules::new(order).integrate(&outer, |x, p| {
            let v = value_at(x, p);
            v * v
        });
        last = (2.0 * TAU * res.value, 2.0 * TAU * res.error_estimate + PURITY_FLOOR);
        if last.1 <= tol {
            return Ok(last);
        }
    }
    if last.1 > 10.0 * tol {
        return Err(Error::NonConvergence { coarse: last.0 - last.1, fine: last.0 });
    }
    Ok(last)
}

/// Smallest eigenvalue of `V + iΩ̃`, `Ω̃ = J ⊕ (-J)`: negative iff the
/// partial transpose is unphysical.
pub fn simon_check(g: &GaussianTwoMode) -> CriterionReport {
    let i = C64::new(0.0, 1.0);
    let mut m: Matrix4<C64> = g.cov.map(|v| C64::new(v, 0.0));
    m[(0, 1)] += i;
    m[(1, 0)] -= i;
    m[(2, 3)] -= i;
    m[(3, 2)] += i;
    let value = linalg::min_eigenvalue4(&m);
    CriterionReport::new(CriterionId::Simon, value, 0.0, value < -EIGEN_TOL, 0.0)
}

/// `Var(x_A + x_B) + Var(p_A - p_B) ≥ 4`.
pub fn duan_check(g: &GaussianTwoMode) -> CriterionReport {
    let v = &g.cov;
    // Pairing follows the standard-form signs c1 ≥ 0 ≥ c2: Var[x_A−x_B] + Var[p_A+p_B].
    let value = v[(0, 0)] + v[(2, 2)] - 2.0 * v[(0, 2)] + v[(1, 1)] + v[(3, 3)] + 2.0 * v[(1, 3)];
    CriterionReport::new(CriterionId::Duan, value, 4.0, value < 4.0 - EIGEN_TOL, 0.0)
}

/// Smallest eigenvalue of the partial transpose over mode B. The error
/// estimate carries the truncation deficit.
pub fn ppt_check(rho: &FockDensityMatrix) -> CriterionReport {
    let pt = oracle::partial_transpose_b(rho);
    let value = pt.min_eigenvalue();
    let err = rho.trace_deficit().max(0.0);
    CriterionReport::new(CriterionId::Ppt, value, 0.0, value < -(EIGEN_TOL + err), err)
}

/// `M = Σ_k ⟨Π^k ⊗ Π^k⟩² ≤ 1`.
pub fn pseudospin_epr(rho: &FockDensityMatrix) -> Result<CriterionReport> {
    let n = rho.cutoff();
    let mut m = 0.0;
    for op in [oracle::pseudospin_x(n), oracle::pseudospin_y(n), oracle::pseudospin_z(n)] {
        let v = oracle::expectation_product(rho, &op, &op)?;
        if v.im.abs() > 1e-10 {
            return Err(Error::NonRealExpectation(v.im));
        }
        m += v.re * v.re;
    }
    let err = 2.0 * rho.trace_deficit().max(0.0);
    Ok(CriterionReport::new(CriterionId::PseudospinEpr, m, 1.0, m > 1.0 + CORRELATOR_TOL + err, err))
}

/// Displacements `(α_A, α_A', α_B, α_B')` of the CHSH combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSettings {
    pub a: C64,
    pub a2: C64,
    pub b: C64,
    pub b2: C64,
}

impl BellSettings {
    pub const ORIGIN: Self = Self { a: ZERO, a2: ZERO, b: ZERO, b2: ZERO };
}

/// Displaced-parity correlator from the Wigner function at `ξ = 2α`.
pub fn parity_correlator(w: &WignerField, alpha_a: C64, alpha_b: C64) -> f64 {
    let z = [2.0 * alpha_a.re, 2.0 * alpha_a.im, 2.0 * alpha_b.re, 2.0 * alpha_b.im];
    BELL_CORRELATOR_SCALE * w.eval(&z)
}

/// `B = C(a, b) + C(a, b') + C(a', b) - C(a', b')`, signed.
pub fn chsh_value(w: &WignerField, s: &BellSettings) -> f64 {
    parity_correlator(w, s.a, s.b) + parity_correlator(w, s.a, s.b2) + parity_correlator(w, s.a2, s.b)
        - parity_correlator(w, s.a2, s.b2)
}

/// `|B| ≤ 2` for local hidden-variable models.
pub fn bell_chsh(w: &WignerField, settings: &BellSettings) -> CriterionReport {
    let value = chsh_value(w, settings).abs();
    CriterionReport::new(CriterionId::BellChsh, value, 2.0, value > 2.0 + CORRELATOR_TOL, 0.0)
}
