//! Two-mode Wigner fields and the linear slices the criteria integrate.
//!
//! A field is backed by one of three engines: a Gaussian mixture, a closed
//! form (Werner and cat families), or a truncated Fock density matrix
//! evaluated through the single-mode Laguerre kernels.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};

use crate::error::{Error, Result};
use crate::fock::FockDensityMatrix;
use crate::linalg::{CMatrix, C64, ZERO};
use crate::oracle::{annihilation, expectation_single};
use crate::phase::{Rect, Transform2};
use crate::prelude::*;
use crate::states::{cat_value, werner_value, CatParams, GaussianOneMode, GaussianTwoMode, WernerParams};

/// Envelope half-widths are this many standard deviations.
const ENVELOPE_SIGMAS: f64 = 8.0;
const FOCK_TAIL: f64 = 6.0;
const MIN_DET: f64 = 1e-12;

/// Box in which a field is non-negligible: `center ± half_width`, per
/// coordinate `(x_A, p_A, x_B, p_B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub center: [f64; 4],
    pub half_width: [f64; 4],
}

impl Envelope {
    pub fn from_moments(mean: [f64; 4], variance: [f64; 4]) -> Self {
        let mut half_width = [0.0; 4];
        for k in 0..4 {
            half_width[k] = ENVELOPE_SIGMAS * variance[k].max(0.0).sqrt();
        }
        Self { center: mean, half_width }
    }

    /// Smallest envelope containing both.
    pub fn union(&self, other: &Self) -> Self {
        let mut center = [0.0; 4];
        let mut half_width = [0.0; 4];
        for k in 0..4 {
            let lo = (self.center[k] - self.half_width[k]).min(other.center[k] - other.half_width[k]);
            let hi = (self.center[k] + self.half_width[k]).max(other.center[k] + other.half_width[k]);
            center[k] = 0.5 * (lo + hi);
            half_width[k] = 0.5 * (hi - lo);
        }
        Self { center, half_width }
    }

    /// Bounding rectangle of the slice coordinates `u` whose image
    /// `map(u)` stays inside the envelope. `None` when the slice misses the
    /// envelope entirely.
    pub fn slice_box(&self, map: &LinearMap) -> Result<Option<Rect>> {
        // Each coordinate gives a strip |R_k·u + z0_k - c_k| ≤ h_k; the
        // feasible set is a convex polygon whose vertices lie on pairs of
        // strip edges.
        let mut lines: Vec<([f64; 2], f64)> = Vec::with_capacity(8);
        for k in 0..4 {
            let r = map.rows[k];
            let shift = self.center[k] - map.offset[k];
            if r[0] == 0.0 && r[1] == 0.0 {
                if shift.abs() > self.half_width[k] {
                    return Ok(None);
                }
                continue;
            }
            lines.push((r, shift - self.half_width[k]));
            lines.push((r, shift + self.half_width[k]));
        }
        let inside = |u: [f64; 2]| {
            (0..4).all(|k| {
                let r = map.rows[k];
                let z = r[0] * u[0] + r[1] * u[1] + map.offset[k];
                (z - self.center[k]).abs() <= self.half_width[k] * (1.0 + 1e-9) + 1e-9
            })
        };
        let mut found = false;
        let mut bx = Rect::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        let mut any_pair = false;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (ri, ci) = lines[i];
                let (rj, cj) = lines[j];
                let det = ri[0] * rj[1] - ri[1] * rj[0];
                let scale = (ri[0].hypot(ri[1])) * (rj[0].hypot(rj[1]));
                if det.abs() <= 1e-13 * scale {
                    continue;
                }
                any_pair = true;
                let u = [(ci * rj[1] - ri[1] * cj) / det, (ri[0] * cj - ci * rj[0]) / det];
                if inside(u) {
                    found = true;
                    bx.x_min = bx.x_min.min(u[0]);
                    bx.x_max = bx.x_max.max(u[0]);
                    bx.p_min = bx.p_min.min(u[1]);
                    bx.p_max = bx.p_max.max(u[1]);
                }
            }
        }
        if !any_pair {
            return Err(Error::Unsupported("slice map has rank below two"));
        }
        if !found || !bx.is_valid() {
            return Ok(None);
        }
        Ok(Some(bx))
    }
}

/// Affine embedding of the slice plane: `z = R·(u, v) + z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMap {
    pub rows: [[f64; 2]; 4],
    pub offset: [f64; 4],
}

impl LinearMap {
    #[inline]
    pub fn apply(&self, u: f64, v: f64) -> [f64; 4] {
        let mut z = self.offset;
        for k in 0..4 {
            z[k] += self.rows[k][0] * u + self.rows[k][1] * v;
        }
        z
    }

    /// `(x, p) ↦ (x cos θ, p cos θ, x' sin θ, p' sin θ)` with
    /// `(x', p') = t(x, p)`.
    pub fn slice(t: &Transform2, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            rows: [[c, 0.0], [0.0, c], [s * t.a, s * t.b], [s * t.c, s * t.d]],
            offset: [0.0, 0.0, s * t.x0, s * t.p0],
        }
    }

    /// `(x, p) ↦ (x, p, x', p')`.
    pub fn unscaled(t: &Transform2) -> Self {
        Self { rows: [[1.0, 0.0], [0.0, 1.0], [t.a, t.b], [t.c, t.d]], offset: [0.0, 0.0, t.x0, t.p0] }
    }

    /// Integrand of the reduced output mode at `(X, P)`:
    /// `(x, p) ↦ (c x + s X, c p + s P, M(s x - c X, s p - c P) + s·(x0, p0))`.
    pub fn reduced(t: &Transform2, theta: f64, big_x: f64, big_p: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let (qx, qp) = (-c * big_x, -c * big_p);
        Self {
            rows: [[c, 0.0], [0.0, c], [s * t.a, s * t.b], [s * t.c, s * t.d]],
            offset: [
                s * big_x,
                s * big_p,
                t.a * qx + t.b * qp + s * t.x0,
                t.c * qx + t.d * qp + s * t.p0,
            ],
        }
    }
}

/// One weighted Gaussian with cached inverse and normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub state: GaussianTwoMode,
    inv: Matrix4<f64>,
    norm: f64,
}

impl GaussianComponent {
    fn new(weight: f64, state: GaussianTwoMode) -> Result<Self> {
        let det = state.cov.determinant();
        if !(det >= MIN_DET) {
            return Err(Error::SingularCovariance(det));
        }
        let inv = state.cov.try_inverse().ok_or(Error::SingularCovariance(det))?;
        Ok(Self { weight, state, inv, norm: weight / (TAU * TAU * det.sqrt()) })
    }

    #[inline]
    fn eval(&self, z: &[f64; 4]) -> f64 {
        let d = Vector4::new(
            z[0] - self.state.mean[0],
            z[1] - self.state.mean[1],
            z[2] - self.state.mean[2],
            z[3] - self.state.mean[3],
        );
        self.norm * (-0.5 * d.dot(&(self.inv * d))).exp()
    }

    fn envelope(&self) -> Envelope {
        let c = &self.state.cov;
        Envelope::from_moments(self.state.mean, [c[(0, 0)], c[(1, 1)], c[(2, 2)], c[(3, 3)]])
    }

    /// `∫∫ W(R u + z0) du` in closed form.
    fn slice_integral(&self, map: &LinearMap) -> f64 {
        let r = nalgebra::Matrix4x2::from_fn(|i, j| map.rows[i][j]);
        let z0 = Vector4::from_fn(|i, _| map.offset[i] - self.state.mean[i]);
        let vr = self.inv * r;
        let q: Matrix2<f64> = r.transpose() * vr;
        let b: Vector2<f64> = vr.transpose() * z0;
        let c = z0.dot(&(self.inv * z0));
        let det_q = q.determinant();
        if !(det_q > 0.0) {
            return f64::INFINITY;
        }
        let qinv = Matrix2::new(q[(1, 1)], -q[(0, 1)], -q[(1, 0)], q[(0, 0)]) / det_q;
        let expo = -0.5 * (c - b.dot(&(qinv * b)));
        self.norm * TAU / det_q.sqrt() * expo.exp()
    }
}

/// Convex combination of two-mode Gaussian states.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<GaussianComponent>,
}

impl GaussianMixture {
    pub fn new(terms: &[(f64, GaussianTwoMode)]) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter { name: "terms", reason: "mixture needs at least one component" });
        }
        let total: f64 = terms.iter().map(|t| t.0).sum();
        if terms.iter().any(|t| !(t.0 >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter { name: "weights", reason: "weights must be non-negative and sum to 1" });
        }
        let components = terms.iter().map(|&(w, g)| GaussianComponent::new(w, g)).collect::<Result<_>>()?;
        Ok(Self { components })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn single(&self) -> Option<&GaussianTwoMode> {
        match self.components.as_slice() {
            [only] => Some(&only.state),
            _ => None,
        }
    }

    pub fn eval(&self, z: &[f64; 4]) -> f64 {
        self.components.iter().map(|c| c.eval(z)).sum()
    }

    /// Exact `∫∫ W(R u + z0) du` over the whole slice plane.
    pub fn slice_integral(&self, map: &LinearMap) -> f64 {
        self.components.iter().map(|c| c.slice_integral(map)).sum()
    }

    /// Single-mode Gaussian components of the reduced output mode.
    pub fn reduced_mode(&self, t: &Transform2, theta: f64) -> Result<Vec<(f64, GaussianOneMode)>> {
        let (s, c) = theta.sin_cos();
        // w = (x, p, X, P) ↦ z = L w + z0, with |det L| = 1.
        #[rustfmt::skip]
        let l = Matrix4::new(
            c, 0.0, s, 0.0,
            0.0, c, 0.0, s,
            s * t.a, s * t.b, -c * t.a, -c * t.b,
            s * t.c, s * t.d, -c * t.c, -c * t.d,
        );
        let z0 = Vector4::new(0.0, 0.0, s * t.x0, s * t.p0);
        let linv = l.try_inverse().ok_or(Error::DegenerateAngle(theta))?;
        Ok(self
            .components
            .iter()
            .map(|comp| {
                let mu = Vector4::from_row_slice(&comp.state.mean);
                let m = linv * (mu - z0);
                let v = linv * comp.state.cov * linv.transpose();
                let cov = Matrix2::new(v[(2, 2)], v[(2, 3)], v[(3, 2)], v[(3, 3)]);
                (comp.weight, GaussianOneMode { mean: [m[2], m[3]], cov: (cov + cov.transpose()) * 0.5 })
            })
            .collect())
    }

    fn envelope(&self) -> Envelope {
        let mut env = self.components[0].envelope();
        for c in &self.components[1..] {
            env = env.union(&c.envelope());
        }
        env
    }
}

/// `4π ∫∫ W²` for a mixture of single-mode Gaussians.
pub fn gaussian_mixture_purity(terms: &[(f64, GaussianOneMode)]) -> f64 {
    let mut acc = 0.0;
    for (wi, gi) in terms {
        for (wj, gj) in terms {
            let s = gi.cov + gj.cov;
            let det = s.determinant();
            let d = Vector2::new(gi.mean[0] - gj.mean[0], gi.mean[1] - gj.mean[1]);
            let sinv = Matrix2::new(s[(1, 1)], -s[(0, 1)], -s[(1, 0)], s[(0, 0)]) / det;
            acc += wi * wj * (-0.5 * d.dot(&(sinv * d))).exp() / (TAU * det.sqrt());
        }
    }
    2.0 * TAU * acc
}

/// Fock-backed field: density matrix entries summed against the
/// single-mode Laguerre kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct FockWigner {
    rho: FockDensityMatrix,
    entries: Vec<(usize, usize, usize, usize, C64)>,
    levels: usize,
}

impl FockWigner {
    pub fn new(rho: FockDensityMatrix) -> Self {
        let entries = rho.nonzero_entries();
        let levels = entries.iter().map(|e| e.0.max(e.1).max(e.2).max(e.3) + 1).max().unwrap_or(1);
        Self { rho, entries, levels }
    }

    pub fn rho(&self) -> &FockDensityMatrix {
        &self.rho
    }

    pub fn eval(&self, z: &[f64; 4]) -> f64 {
        let l = self.levels;
        let mut ka = Vec::new();
        let mut kb = Vec::new();
        fock_kernel_table(l, z[0], z[1], &mut ka);
        fock_kernel_table(l, z[2], z[3], &mut kb);
        let mut acc = 0.0;
        for &(a, b, a2, b2, v) in &self.entries {
            acc += (v * ka[a * l + a2] * kb[b * l + b2]).re;
        }
        acc
    }

    fn envelope(&self) -> Envelope {
        let n = self.rho.cutoff();
        let a = annihilation(n);
        let ad = a.adjoint();
        let x = &a + &ad;
        let p = (&a - &ad) * C64::new(0.0, -1.0);
        let moments = |r: &CMatrix, q: &CMatrix| {
            let m = expectation_single(r, q).re;
            let m2 = expectation_single(r, &(q * q)).re;
            (m, m2 - m * m)
        };
        let ra = self.rho.reduced_a();
        let rb = self.rho.reduced_b();
        let (xa, vxa) = moments(&ra, &x);
        let (pa, vpa) = moments(&ra, &p);
        let (xb, vxb) = moments(&rb, &x);
        let (pb, vpb) = moments(&rb, &p);
        // Number states have small variance but wide rings, so use the full
        // second moment about the origin. Kernels oscillate inside radius
        // √(2⟨q²⟩) and fall off as e^{-r²/2} beyond it; six more units put
        // every kernel below 1e-15.
        let reach = |m: f64, v: f64| (2.0 * (v.max(1.0) + m * m)).sqrt() + FOCK_TAIL;
        Envelope { center: [0.0; 4], half_width: [reach(xa, vxa), reach(pa, vpa), reach(xb, vxb), reach(pb, vpb)] }
    }
}

/// Single-mode kernels `W_{|m⟩⟨n|}(x, p)` for `m, n < levels`, stored
/// row-major in `out`:
/// `(1/2π) (-1)ⁿ √(n!/m!) (x - ip)^{m-n} e^{-r²/2} L_n^{(m-n)}(r²)` for
/// `m ≥ n`, complex conjugate otherwise.
pub fn fock_kernel_table(levels: usize, x: f64, p: f64, out: &mut Vec<C64>) {
    out.clear();
    out.resize(levels * levels, ZERO);
    let z = x * x + p * p;
    let pref = (-0.5 * z).exp() / TAU;
    let u = C64::new(x, -p);
    let mut upow = C64::new(1.0, 0.0);
    let mut inv_sqrt_fact = 1.0;
    for k in 0..levels {
        if k > 0 {
            upow *= u;
            inv_sqrt_fact /= (k as f64).sqrt();
        }
        let kf = k as f64;
        let mut l_prev = 0.0;
        let mut l_cur = 1.0;
        let mut ratio = inv_sqrt_fact;
        for n in 0..levels - k {
            let nf = n as f64;
            if n == 1 {
                l_prev = 1.0;
                l_cur = 1.0 + kf - z;
            } else if n >= 2 {
                let next = ((2.0 * nf - 1.0 + kf - z) * l_cur - (nf - 1.0 + kf) * l_prev) / nf;
                l_prev = l_cur;
                l_cur = next;
            }
            if n > 0 {
                ratio *= (nf / (nf + kf)).sqrt();
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let v = upow * (pref * sign * ratio * l_cur);
            out[(n + k) * levels + n] = v;
            out[n * levels + n + k] = v.conj();
        }
    }
}

/// Single-mode Wigner function of a density matrix via the Laguerre kernels.
pub fn fock_wigner_single(rho: &CMatrix, x: f64, p: f64) -> f64 {
    let n = rho.nrows();
    let mut k = Vec::new();
    fock_kernel_table(n, x, p, &mut k);
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (rho[(i, j)] * k[i * n + j]).re;
        }
    }
    acc
}

/// Callable two-mode Wigner function `W(x_A, p_A, x_B, p_B)`.
#[derive(Debug, Clone, PartialEq)]
pub enum WignerField {
    Gaussian(GaussianMixture),
    Werner(WernerParams),
    Cat(CatParams),
    Fock(FockWigner),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Gaussian,
    ClosedForm,
    Fock,
}

impl WignerField {
    pub fn backend(&self) -> Backend {
        match self {
            WignerField::Gaussian(_) => Backend::Gaussian,
            WignerField::Werner(_) | WignerField::Cat(_) => Backend::ClosedForm,
            WignerField::Fock(_) => Backend::Fock,
        }
    }

    #[inline]
    pub fn eval(&self, z: &[f64; 4]) -> f64 {
        match self {
            WignerField::Gaussian(g) => g.eval(z),
            WignerField::Werner(p) => werner_value(p, z),
            WignerField::Cat(p) => cat_value(p, z),
            WignerField::Fock(f) => f.eval(z),
        }
    }

    pub fn envelope(&self) -> Envelope {
        match self {
            WignerField::Gaussian(g) => g.envelope(),
            // Both modes carry at most one photon: ⟨x²⟩ ≤ 3.
            WignerField::Werner(_) => Envelope::from_moments([0.0; 4], [3.0; 4]),
            WignerField::Cat(p) => {
                let lobe = 2.0 * p.gamma;
                let h = ENVELOPE_SIGMAS;
                Envelope { center: [0.0; 4], half_width: [lobe + h, h, lobe + h, h] }
            }
            WignerField::Fock(f) => f.envelope(),
        }
    }

    pub fn as_gaussian(&self) -> Option<&GaussianMixture> {
        match self {
            WignerField::Gaussian(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_fock(&self) -> Option<&FockWigner> {
        match self {
            WignerField::Fock(f) => Some(f),
            _ => None,
        }
    }
}

pub fn gaussian_wigner(g: &GaussianTwoMode) -> Result<WignerField> {
    Ok(WignerField::Gaussian(GaussianMixture::new(&[(1.0, *g)])?))
}

pub fn gaussian_mixture_wigner(terms: &[(f64, GaussianTwoMode)]) -> Result<WignerField> {
    Ok(WignerField::Gaussian(GaussianMixture::new(terms)?))
}

pub fn fock_wigner(rho: &FockDensityMatrix) -> WignerField {
    WignerField::Fock(FockWigner::new(rho.clone()))
}

/// The field restricted to a plane `z = R u + z0`.
#[derive(Debug, Clone, Copy)]
pub struct SliceField<'a> {
    pub field: &'a WignerField,
    pub map: LinearMap,
}

impl<'a> SliceField<'a> {
    pub fn new(field: &'a WignerField, map: LinearMap) -> Self {
        Self { field, map }
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        self.field.eval(&self.map.apply(x, p))
    }

    /// Slice-plane box outside of which the field is negligible.
    pub fn truncation(&self) -> Result<Option<Rect>> {
        self.field.envelope().slice_box(&self.map)
    }

    /// Closed-form full-plane integral, available for Gaussian fields.
    pub fn exact_integral(&self) -> Option<f64> {
        self.field.as_gaussian().map(|g| g.slice_integral(&self.map))
    }
}

/// `(x, p) ↦ W(x cos θ, p cos θ, x' sin θ, p' sin θ)`.
pub fn make_slice<'a>(field: &'a WignerField, t: &Transform2, theta: f64) -> SliceField<'a> {
    SliceField::new(field, LinearMap::slice(t, theta))
}

/// Wigner function of the reduced output mode after mixing mode A with the
/// transformed mode B at angle `θ`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedMode<'a> {
    pub field: &'a WignerField,
    pub theta: f64,
    pub transform: Transform2,
}

impl<'a> ReducedMode<'a> {
    pub fn integrand(&self, big_x: f64, big_p: f64) -> SliceField<'a> {
        SliceField::new(self.field, LinearMap::reduced(&self.transform, self.theta, big_x, big_p))
    }

    /// Value at `(X, P)` by quadrature of the integrand.
    pub fn value(&self, big_x: f64, big_p: f64, spec: &crate::quadrature::QuadratureSpec) -> Result<crate::quadrature::IntegralResult> {
        let slice = self.integrand(big_x, big_p);
        match slice.truncation()? {
            None => Ok(crate::quadrature::IntegralResult::default()),
            Some(rect) => {
                let spec = spec.with_truncation(rect);
                crate::quadrature::integrate(|x, p| slice.eval(x, p), &crate::phase::Region::FullPlane, &spec)
            }
        }
    }

    /// Closed-form value for Gaussian fields.
    pub fn exact_value(&self, big_x: f64, big_p: f64) -> Option<f64> {
        self.integrand(big_x, big_p).exact_integral()
    }

    /// Single-mode Gaussian decomposition for Gaussian fields.
    pub fn gaussian_components(&self) -> Option<Result<Vec<(f64, GaussianOneMode)>>> {
        self.field.as_gaussian().map(|g| g.reduced_mode(&self.transform, self.theta))
    }
}

pub fn reduced_mode_wigner<'a>(field: &'a WignerField, theta: f64, t: &Transform2) -> ReducedMode<'a> {
    ReducedMode { field, theta, transform: *t }
}

/// Axis of the `5⁴`-point grid on which the two Wigner engines are compared.
pub const ENGINE_GRID_AXIS: [f64; 5] = [-4.0, -2.0, 0.0, 2.0, 4.0];

/// Largest pointwise gap between the closed-form Wigner function of a state
/// and its Fock-basis one at `cutoff`, over the engine grid.
pub fn engine_disagreement(spec: &crate::states::StateSpec, cutoff: usize) -> Result<f64> {
    let closed = spec.wigner()?;
    let fock = fock_wigner(&crate::states::state_to_fock(spec, cutoff)?);
    let mut worst = 0.0f64;
    for &xa in &ENGINE_GRID_AXIS {
        for &pa in &ENGINE_GRID_AXIS {
            for &xb in &ENGINE_GRID_AXIS {
                for &pb in &ENGINE_GRID_AXIS {
                    let z = [xa, pa, xb, pb];
                    worst = worst.max((closed.eval(&z) - fock.eval(&z)).abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::displaced_parity_wigner;
    use crate::states::{state_to_fock, BellState, StateSpec, TmstParams};
    use approx::assert_abs_diff_eq;

    const VAC_PEAK: f64 = 1.0 / (4.0 * PI * PI);

    #[test]
    fn gaussian_vacuum_values() {
        let w = gaussian_wigner(&GaussianTwoMode::vacuum()).unwrap();
        assert_abs_diff_eq!(w.eval(&[0.0; 4]), VAC_PEAK, epsilon = 1e-16);
        assert_abs_diff_eq!(w.eval(&[2.0, 0.0, 0.0, 0.0]), (-2.0f64).exp() * VAC_PEAK, epsilon = 1e-16);
        let t = gaussian_wigner(&GaussianTwoMode::tmsv(0.5)).unwrap();
        assert_abs_diff_eq!(t.eval(&[0.0; 4]), VAC_PEAK, epsilon = 1e-14);
    }

    #[test]
    fn singular_covariance_rejected() {
        let g = GaussianTwoMode { mean: [0.0; 4], cov: Matrix4::zeros() };
        assert!(matches!(gaussian_wigner(&g), Err(Error::SingularCovariance(_))));
    }

    #[test]
    fn kernel_calibration_vacuum_and_one_photon() {
        let mut k = Vec::new();
        fock_kernel_table(2, 0.0, 0.0, &mut k);
        assert_abs_diff_eq!(k[0].re, 1.0 / TAU, epsilon = 1e-16);
        assert_abs_diff_eq!(k[3].re, -1.0 / TAU, epsilon = 1e-16);
        let rho = FockDensityMatrix::diagonal_mixture(2, &[(1.0, 1, 0)]).unwrap();
        assert_abs_diff_eq!(fock_wigner(&rho).eval(&[0.0; 4]), -VAC_PEAK, epsilon = 1e-16);
    }

    #[test]
    fn fock_kernel_matches_displaced_parity() {
        let spec = StateSpec::Tmst(TmstParams { s: 0.3, eta: 0.8, r: 0.2 });
        let rho = state_to_fock(&spec, 14).unwrap();
        let w = fock_wigner(&rho);
        for z in [[0.3, -0.2, 0.5, 0.1], [-1.0, 0.4, 0.2, -0.7], [1.2, 0.9, -0.4, 0.6]] {
            assert_abs_diff_eq!(w.eval(&z), displaced_parity_wigner(&rho, &z).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn werner_fock_matches_closed_form() {
        let p = WernerParams { bell: BellState::PsiPlus, epsilon: 1.0 };
        let rho = state_to_fock(&StateSpec::Werner(p), 2).unwrap();
        let f = fock_wigner(&rho);
        let c = WignerField::Werner(p);
        for z in [[0.1, 0.2, -0.3, 0.4], [1.5, -0.5, 0.7, 0.0], [0.0, 2.0, -1.0, 1.0]] {
            assert_abs_diff_eq!(f.eval(&z), c.eval(&z), epsilon = 1e-14);
        }
    }

    #[test]
    fn vacuum_slice_identity_quarter_turn() {
        let w = gaussian_wigner(&GaussianTwoMode::vacuum()).unwrap();
        let s = make_slice(&w, &Transform2::IDENTITY, FRAC_PI_4);
        let (x, p) = (0.7, -1.1);
        assert_abs_diff_eq!(s.eval(x, p), (-(x * x + p * p) / 2.0).exp() * VAC_PEAK, epsilon = 1e-16);
    }

    #[test]
    fn gaussian_slice_integral_tmsv() {
        let s = 0.5f64;
        let w = gaussian_wigner(&GaussianTwoMode::tmsv(s)).unwrap();
        let v = make_slice(&w, &Transform2::P_REFLECT, FRAC_PI_4).exact_integral().unwrap();
        assert_abs_diff_eq!(v, (2.0 * s).exp() / TAU, epsilon = 1e-13);
    }

    #[test]
    fn reduced_vacuum_is_vacuum() {
        let w = gaussian_wigner(&GaussianTwoMode::vacuum()).unwrap();
        let r = reduced_mode_wigner(&w, FRAC_PI_4, &Transform2::IDENTITY);
        assert_abs_diff_eq!(r.exact_value(0.0, 0.0).unwrap(), 1.0 / TAU, epsilon = 1e-15);
        let comps = r.gaussian_components().unwrap().unwrap();
        assert_abs_diff_eq!(gaussian_mixture_purity(&comps), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn envelope_box_of_axis_slice() {
        let env = Envelope { center: [0.0; 4], half_width: [8.0; 4] };
        let bx = env.slice_box(&LinearMap::unscaled(&Transform2::IDENTITY)).unwrap().unwrap();
        assert_abs_diff_eq!(bx.x_max, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bx.p_min, -8.0, epsilon = 1e-12);
        let far = LinearMap { offset: [0.0, 0.0, 100.0, 0.0], ..LinearMap::unscaled(&Transform2::IDENTITY) };
        assert!(env.slice_box(&far).unwrap().is_none());
    }
}
