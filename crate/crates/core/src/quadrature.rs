//! Deterministic 2D integration over rectangles, truncated full planes and
//! unions of disks.
//!
//! Every region is reduced to one or more parameter rectangles. Smooth
//! integrands use a tensor Gauss–Legendre rule whose error estimate is the
//! difference to the half-order rule; integrands with kinks (absolute values
//! of sign-changing functions) or poor tensor convergence go through a
//! global adaptive subdivision with a fixed panel order.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::phase::{Disk, Rect, Region};
use crate::prelude::*;

pub const DEFAULT_ORDER: usize = 80;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Panel order of the adaptive rule (compared against half of it).
const PANEL_ORDER: usize = 10;
const ADAPTIVE_MAX_EVALS: usize = 6_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    TensorGaussLegendre,
    AdaptiveSubdivision,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    /// Points per axis of the tensor rule.
    pub order: usize,
    /// Absolute error target.
    pub tolerance: f64,
    /// Box standing in for the full plane.
    pub truncation: Option<Rect>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::TensorGaussLegendre,
            order: DEFAULT_ORDER,
            tolerance: DEFAULT_TOLERANCE,
            truncation: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_order(order: usize) -> Self {
        Self { order, ..Self::default() }
    }

    pub fn with_truncation(mut self, rect: Rect) -> Self {
        self.truncation = Some(rect);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 8 {
            return Err(Error::InvalidParameter { name: "order", reason: "quadrature order must be at least 8" });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter { name: "tolerance", reason: "tolerance must be positive" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl core::ops::Add for IntegralResult {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            value: self.value + o.value,
            error_estimate: self.error_estimate + o.error_estimate,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Tensor rule over `rect`; returns `(value, Σ|w f|, evaluations)`.
    pub fn tensor<F: FnMut(f64, f64) -> f64>(&self, rect: &Rect, mut f: F) -> (f64, f64, usize) {
        let hx = 0.5 * (rect.x_max - rect.x_min);
        let cx = 0.5 * (rect.x_max + rect.x_min);
        let hp = 0.5 * (rect.p_max - rect.p_min);
        let cp = 0.5 * (rect.p_max + rect.p_min);
        let mut total = 0.0;
        let mut mag = 0.0;
        for (xi, wi) in self.nodes.iter().zip(&self.weights) {
            let x = cx + hx * xi;
            let mut row = 0.0;
            let mut row_mag = 0.0;
            for (pj, wj) in self.nodes.iter().zip(&self.weights) {
                let v = f(x, cp + hp * pj);
                row += wj * v;
                row_mag += wj * v.abs();
            }
            total += wi * row;
            mag += wi * row_mag;
        }
        let jac = hx * hp;
        (total * jac, mag * jac, self.order() * self.order())
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Floor on the error estimate from accumulated rounding.
fn roundoff_floor(magnitude: f64) -> f64 {
    64.0 * f64::EPSILON * magnitude
}

/// A pair of tensor rules at `order` and `order / 2`, reusable across calls.
#[derive(Debug, Clone)]
pub struct TensorRules {
    fine: GaussLegendre,
    coarse: GaussLegendre,
}

impl TensorRules {
    pub fn new(order: usize) -> Self {
        Self { fine: GaussLegendre::new(order), coarse: GaussLegendre::new((order / 2).max(1)) }
    }

    pub fn order(&self) -> usize {
        self.fine.order()
    }

    /// Fine-rule value with the coarse/fine difference as error estimate.
    pub fn integrate<F: FnMut(f64, f64) -> f64>(&self, rect: &Rect, mut f: F) -> IntegralResult {
        let (fine, mag, n1) = self.fine.tensor(rect, &mut f);
        let (coarse, _, n2) = self.coarse.tensor(rect, &mut f);
        IntegralResult {
            value: fine,
            error_estimate: (fine - coarse).abs().max(roundoff_floor(mag)),
            evaluations: n1 + n2,
        }
    }

    /// Fine rule only; for inner loops of optimizers.
    pub fn integrate_fast<F: FnMut(f64, f64) -> f64>(&self, rect: &Rect, f: F) -> f64 {
        self.fine.tensor(rect, f).0
    }
}

struct Panel {
    rect: Rect,
    value: f64,
    error: f64,
    id: usize,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error).then_with(|| o.id.cmp(&self.id))
    }
}

/// Global adaptive subdivision: repeatedly splits the panel with the largest
/// error estimate into four.
fn adaptive<F: FnMut(f64, f64) -> f64>(rect: &Rect, tolerance: f64, mut f: F) -> IntegralResult {
    let fine = GaussLegendre::new(PANEL_ORDER);
    let coarse = GaussLegendre::new(PANEL_ORDER / 2);
    let mut evaluations = 0usize;
    let mut next_id = 0usize;
    let mut eval_panel = |r: Rect, evaluations: &mut usize, next_id: &mut usize| {
        let (v1, mag, n1) = fine.tensor(&r, &mut f);
        let (v2, _, n2) = coarse.tensor(&r, &mut f);
        *evaluations += n1 + n2;
        let id = *next_id;
        *next_id += 1;
        Panel { rect: r, value: v1, error: (v1 - v2).abs().max(roundoff_floor(mag)), id }
    };
    let mut heap = BinaryHeap::new();
    let first = eval_panel(*rect, &mut evaluations, &mut next_id);
    let mut total_err = first.error;
    heap.push(first);
    while total_err > tolerance && evaluations < ADAPTIVE_MAX_EVALS {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        total_err -= worst.error;
        let r = worst.rect;
        let xm = 0.5 * (r.x_min + r.x_max);
        let pm = 0.5 * (r.p_min + r.p_max);
        let children = [
            Rect::new(r.x_min, xm, r.p_min, pm),
            Rect::new(xm, r.x_max, r.p_min, pm),
            Rect::new(r.x_min, xm, pm, r.p_max),
            Rect::new(xm, r.x_max, pm, r.p_max),
        ];
        for c in children {
            let p = eval_panel(c, &mut evaluations, &mut next_id);
            total_err += p.error;
            heap.push(p);
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by_key(|p| p.id);
    let value = panels.iter().map(|p| p.value).sum();
    let error_estimate = panels.iter().map(|p| p.error).sum::<f64>().max(0.0);
    IntegralResult { value, error_estimate, evaluations }
}

/// One parameter rectangle with the integrand expressed on it.
fn integrate_rect<G: FnMut(f64, f64) -> f64>(
    rect: &Rect,
    spec: &QuadratureSpec,
    absolute: bool,
    mut g: G,
) -> Result<IntegralResult> {
    let tol = spec.tolerance;
    let mut force_adaptive = spec.rule == QuadratureRule::AdaptiveSubdivision;
    let mut tensor_result = None;
    if !force_adaptive {
        let mut spent = 0;
        // Oscillatory slices may need more nodes; double twice before
        // switching rules.
        for order in [spec.order, 2 * spec.order, 4 * spec.order] {
            let rules = TensorRules::new(order);
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            let mut res = rules.integrate(rect, |x, p| {
                let v = g(x, p);
                lo = lo.min(v);
                hi = hi.max(v);
                if absolute { v.abs() } else { v }
            });
            spent += res.evaluations;
            res.evaluations = spent;
            let scale = hi.max(-lo);
            let sign_change = lo < -1e-10 * scale && hi > 1e-10 * scale;
            if absolute && sign_change {
                break;
            }
            if res.error_estimate <= tol {
                return Ok(res);
            }
            tensor_result = Some(res);
        }
        if let Some(res) = tensor_result {
            if res.error_estimate <= 10.0 * tol {
                return Ok(res);
            }
        }
        force_adaptive = true;
    }
    debug_assert!(force_adaptive);
    let res = adaptive(rect, tol, |x, p| {
        let v = g(x, p);
        if absolute { v.abs() } else { v }
    });
    if res.error_estimate > 10.0 * tol {
        let coarse = tensor_result.map(|r| r.value).unwrap_or(res.value - res.error_estimate);
        return Err(Error::NonConvergence { coarse, fine: res.value });
    }
    Ok(res)
}

/// Angular sub-intervals of disk `i` on which the set of earlier disks cut
/// by a ray from its centre does not change.
fn ownership_breakpoints(disks: &[Disk], i: usize) -> Vec<f64> {
    let di = disks[i];
    let mut cuts = vec![0.0, TAU];
    for dj in &disks[..i] {
        let (dx, dp) = (dj.center.x - di.center.x, dj.center.p - di.center.p);
        let dist = (dx * dx + dp * dp).sqrt();
        if dist < 1e-14 {
            continue;
        }
        let psi = dp.atan2(dx);
        let mut push = |c: f64| {
            if c.abs() <= 1.0 {
                let a = c.acos();
                cuts.push(modulo(psi + a, TAU));
                cuts.push(modulo(psi - a, TAU));
            }
        };
        // circle-circle intersections
        push((dist * dist + di.radius * di.radius - dj.radius * dj.radius) / (2.0 * dist * di.radius));
        // rays tangent to disk j
        if dist > dj.radius {
            push((dist * dist - dj.radius * dj.radius).sqrt() / dist);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    cuts
}

/// Radial intervals of disk `i` along direction `(ux, up)` not covered by
/// any earlier disk; each point of the union is owned by exactly one disk.
fn owned_intervals(disks: &[Disk], i: usize, ux: f64, up: f64, out: &mut Vec<(f64, f64)>) {
    let di = disks[i];
    out.clear();
    let mut covered: Vec<(f64, f64)> = Vec::new();
    for dj in &disks[..i] {
        let (dx, dp) = (dj.center.x - di.center.x, dj.center.p - di.center.p);
        let b = ux * dx + up * dp;
        let disc = b * b - (dx * dx + dp * dp) + dj.radius * dj.radius;
        if disc > 0.0 {
            let h = disc.sqrt();
            let (lo, hi) = ((b - h).max(0.0), (b + h).min(di.radius));
            if hi > lo {
                covered.push((lo, hi));
            }
        }
    }
    covered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut r = 0.0;
    for (lo, hi) in covered {
        if lo > r {
            out.push((r, lo));
        }
        r = r.max(hi);
    }
    if di.radius > r {
        out.push((r, di.radius));
    }
}

/// Quintic smoothstep; its vanishing first two derivatives at the ends
/// tame square-root behaviour at tangency angles.
fn smoothstep(t: f64) -> (f64, f64) {
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    (s, ds)
}

/// Tensor rule over the union in polar coordinates about each disk centre.
/// Returns `(value, Σ|w f|, evaluations, min f, max f)`.
fn union_tensor<F: Fn(f64, f64) -> f64>(
    f: &F,
    disks: &[Disk],
    gl: &GaussLegendre,
    absolute: bool,
) -> (f64, f64, usize, f64, f64) {
    let (mut val, mut mag, mut evals) = (0.0, 0.0, 0usize);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut intervals = Vec::new();
    for i in 0..disks.len() {
        let d = disks[i];
        let cuts = ownership_breakpoints(disks, i);
        let graded = cuts.len() > 2;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < 1e-14 {
                continue;
            }
            for (&tn, &tw) in gl.nodes.iter().zip(&gl.weights) {
                let t = 0.5 * (tn + 1.0);
                let (phi, jac) = if graded {
                    let (s, ds) = smoothstep(t);
                    (a + (b - a) * s, (b - a) * ds * 0.5 * tw)
                } else {
                    (a + (b - a) * t, (b - a) * 0.5 * tw)
                };
                let (up, ux) = phi.sin_cos();
                owned_intervals(disks, i, ux, up, &mut intervals);
                for &(r0, r1) in &intervals {
                    let half = 0.5 * (r1 - r0);
                    for (&rn, &rw) in gl.nodes.iter().zip(&gl.weights) {
                        let r = r0 + half * (rn + 1.0);
                        let v = f(d.center.x + r * ux, d.center.p + r * up);
                        lo = lo.min(v);
                        hi = hi.max(v);
                        let v = if absolute { v.abs() } else { v };
                        let wv = jac * half * rw * r * v;
                        val += wv;
                        mag += wv.abs();
                        evals += 1;
                    }
                }
            }
        }
    }
    (val, mag, evals, lo, hi)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error.total_cmp(&o.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// One-dimensional global adaptive bisection with the panel pair used by
/// the 2D rule. Returns `(value, error, evaluations)`.
fn adaptive_1d<G: FnMut(f64) -> f64>(a: f64, b: f64, tolerance: f64, budget: usize, mut g: G) -> (f64, f64, usize) {
    let fine = GaussLegendre::new(PANEL_ORDER);
    let coarse = GaussLegendre::new(PANEL_ORDER / 2);
    let mut evals = 0usize;
    let mut panel = |a: f64, b: f64, evals: &mut usize| {
        let half = 0.5 * (b - a);
        let mut rule = |gl: &GaussLegendre| {
            let mut v = 0.0;
            let mut m = 0.0;
            for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                let t = w * half * g(a + half * (x + 1.0));
                v += t;
                m += t.abs();
            }
            (v, m)
        };
        let (v1, m) = rule(&fine);
        let (v2, _) = rule(&coarse);
        *evals += PANEL_ORDER + PANEL_ORDER / 2;
        Segment { a, b, value: v1, error: (v1 - v2).abs().max(roundoff_floor(m)) }
    };
    let mut heap = BinaryHeap::new();
    let first = panel(a, b, &mut evals);
    let mut total = first.error;
    heap.push(first);
    while total > tolerance && evals < budget {
        let Some(s) = heap.pop() else { break };
        total -= s.error;
        let m = 0.5 * (s.a + s.b);
        for (lo, hi) in [(s.a, m), (m, s.b)] {
            let c = panel(lo, hi, &mut evals);
            total += c.error;
            heap.push(c);
        }
    }
    let segs = heap.into_vec();
    let value = segs.iter().map(|s| s.value).sum();
    let error = segs.iter().map(|s| s.error).sum::<f64>();
    (value, error, evals)
}

/// Nested adaptive rule over the union: outer in angle, inner in radius.
fn union_adaptive<F: Fn(f64, f64) -> f64>(f: &F, disks: &[Disk], tolerance: f64, absolute: bool) -> IntegralResult {
    let mut total = IntegralResult::default();
    let inner_tol = 0.1 * tolerance / (TAU * disks.len() as f64);
    let mut intervals = Vec::new();
    for i in 0..disks.len() {
        let d = disks[i];
        let cuts = ownership_breakpoints(disks, i);
        for w in cuts.windows(2) {
            if w[1] - w[0] < 1e-14 {
                continue;
            }
            let mut inner_evals = 0usize;
            let mut inner_err = 0.0f64;
            let (v, e, n) = adaptive_1d(w[0], w[1], tolerance, ADAPTIVE_MAX_EVALS / 64, |phi| {
                let (up, ux) = phi.sin_cos();
                owned_intervals(disks, i, ux, up, &mut intervals);
                let mut acc = 0.0;
                for &(r0, r1) in intervals.iter() {
                    let (rv, re, rn) = adaptive_1d(r0, r1, inner_tol, ADAPTIVE_MAX_EVALS / 64, |r| {
                        let v = f(d.center.x + r * ux, d.center.p + r * up);
                        r * if absolute { v.abs() } else { v }
                    });
                    acc += rv;
                    inner_err = inner_err.max(re);
                    inner_evals += rn;
                }
                acc
            });
            total = total
                + IntegralResult { value: v, error_estimate: e + inner_err * (w[1] - w[0]), evaluations: n + inner_evals };
        }
    }
    total
}

fn integrate_disk_union<F: Fn(f64, f64) -> f64>(
    f: &F,
    disks: &[Disk],
    spec: &QuadratureSpec,
    absolute: bool,
) -> Result<IntegralResult> {
    let tol = spec.tolerance;
    let mut last = None;
    if spec.rule == QuadratureRule::TensorGaussLegendre {
        let mut spent = 0;
        for order in [spec.order, 2 * spec.order, 4 * spec.order] {
            let (v1, mag, n1, lo, hi) = union_tensor(f, disks, &GaussLegendre::new(order), absolute);
            let (v2, _, n2, _, _) = union_tensor(f, disks, &GaussLegendre::new(order / 2), absolute);
            spent += n1 + n2;
            let res = IntegralResult {
                value: v1,
                error_estimate: (v1 - v2).abs().max(roundoff_floor(mag)),
                evaluations: spent,
            };
            let scale = hi.max(-lo);
            if absolute && lo < -1e-10 * scale && hi > 1e-10 * scale {
                break;
            }
            if res.error_estimate <= tol {
                return Ok(res);
            }
            last = Some(res);
        }
        if let Some(res) = last {
            if res.error_estimate <= 10.0 * tol {
                return Ok(res);
            }
        }
    }
    let res = union_adaptive(f, disks, tol, absolute);
    if res.error_estimate > 10.0 * tol {
        let coarse = last.map(|r| r.value).unwrap_or(res.value - res.error_estimate);
        return Err(Error::NonConvergence { coarse, fine: res.value });
    }
    Ok(res)
}

fn integrate_region<F: Fn(f64, f64) -> f64>(
    f: F,
    region: &Region,
    spec: &QuadratureSpec,
    absolute: bool,
) -> Result<IntegralResult> {
    spec.validate()?;
    region.validate()?;
    match region {
        Region::FullPlane => {
            let rect = spec.truncation.ok_or(Error::MissingTruncation)?;
            if !rect.is_valid() {
                return Err(Error::BadRegion("truncation box is empty"));
            }
            integrate_rect(&rect, spec, absolute, |x, p| f(x, p))
        }
        Region::Rectangle(rect) => integrate_rect(rect, spec, absolute, |x, p| f(x, p)),
        Region::DiskUnion(disks) => integrate_disk_union(&f, disks, spec, absolute),
    }
}

/// `∫∫_R f dx dp`; the full plane is truncated to `spec.truncation`.
pub fn integrate<F: Fn(f64, f64) -> f64>(f: F, region: &Region, spec: &QuadratureSpec) -> Result<IntegralResult> {
    integrate_region(f, region, spec, false)
}

/// `∫∫_R |f| dx dp`; switches to adaptive subdivision when `f` changes sign.
pub fn integrate_abs<F: Fn(f64, f64) -> f64>(f: F, region: &Region, spec: &QuadratureSpec) -> Result<IntegralResult> {
    integrate_region(f, region, spec, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::PhasePoint;
    use approx::assert_abs_diff_eq;

    fn vacuum(x: f64, p: f64) -> f64 {
        (-(x * x + p * p) / 2.0).exp() / TAU
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(7);
        let sum: f64 = gl.weights.iter().sum();
        assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-14);
        // degree 13 is exact for 7 nodes
        let v: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(12)).sum();
        assert_abs_diff_eq!(v, 2.0 / 13.0, epsilon = 1e-14);
    }

    #[test]
    fn vacuum_full_plane_normalized() {
        let spec = QuadratureSpec::default().with_truncation(Rect::centered(8.0, 8.0));
        let r = integrate(vacuum, &Region::FullPlane, &spec).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
        assert!(r.error_estimate < 1e-10);
    }

    #[test]
    fn disk_radial_integral() {
        let disk = Disk { center: PhasePoint::ORIGIN, radius: 1.0 };
        let r = integrate(vacuum, &Region::DiskUnion(vec![disk]), &QuadratureSpec::default()).unwrap();
        // closed form 1 - e^{-1/2}
        assert_abs_diff_eq!(r.value, 1.0 - (-0.5f64).exp(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.value, 0.393469340287, epsilon = 1e-9);
    }

    #[test]
    fn constant_on_rectangle() {
        let r = integrate(|_, _| 1.0, &Region::Rectangle(Rect::new(0.0, 2.0, 0.0, 3.0)), &QuadratureSpec::default())
            .unwrap();
        assert_abs_diff_eq!(r.value, 6.0, epsilon = 1e-13);
    }

    #[test]
    fn absolute_value_of_odd_function() {
        let region = Region::Rectangle(Rect::new(-1.0, 1.0, 0.0, 1.0));
        let spec = QuadratureSpec::default();
        let signed = integrate(|x, _| x, &region, &spec).unwrap();
        let abs = integrate_abs(|x, _| x, &region, &spec).unwrap();
        assert_abs_diff_eq!(signed.value, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(abs.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn positive_integrand_abs_matches_signed() {
        let spec = QuadratureSpec::default().with_truncation(Rect::centered(8.0, 8.0));
        let a = integrate(vacuum, &Region::FullPlane, &spec).unwrap();
        let b = integrate_abs(vacuum, &Region::FullPlane, &spec).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn overlapping_disks_count_union_once() {
        let d1 = Disk { center: PhasePoint::new(-0.5, 0.0), radius: 1.0 };
        let d2 = Disk { center: PhasePoint::new(0.5, 0.0), radius: 1.0 };
        let r = integrate(|_, _| 1.0, &Region::DiskUnion(vec![d1, d2]), &QuadratureSpec::with_order(120));
        // lens area of two unit disks at distance 1: 2π/3 - √3/2
        let union = 2.0 * PI - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0);
        let r = r.unwrap();
        assert_abs_diff_eq!(r.value, union, epsilon = 1e-9);
    }

    #[test]
    fn full_plane_needs_truncation() {
        let err = integrate(vacuum, &Region::FullPlane, &QuadratureSpec::default()).unwrap_err();
        assert_eq!(err, Error::MissingTruncation);
    }

    #[test]
    fn low_order_rejected() {
        let spec = QuadratureSpec { order: 4, ..QuadratureSpec::default() };
        assert!(integrate(vacuum, &Region::Rectangle(Rect::centered(1.0, 1.0)), &spec).is_err());
    }
}
