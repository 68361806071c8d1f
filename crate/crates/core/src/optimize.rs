//! Searches over transforms and mixing angles for maximal criterion
//! violation, region shrinking for criterion II, the purity angle scan and
//! the Bell-threshold search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::criteria::{self, chsh_value, BellSettings, CriterionId, CriterionReport};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::phase::{Disk, PhasePoint, Rect, Region, SymplecticParam, Transform2};
use crate::prelude::*;
use crate::quadrature::{QuadratureSpec, TensorRules};
use crate::states::StateSpec;
use crate::wigner::{make_slice, LinearMap, SliceField, WignerField};

/// Nelder–Mead outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Derivative-free minimization from `x0` with initial edge lengths `step`.
/// Stops after `max_iter` iterations or once the simplex values spread less
/// than `ftol` and its vertices lie within `xtol` of the best one.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    max_iter: usize,
    ftol: f64,
    xtol: f64,
) -> Simplex {
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evaluations)).collect();
    let mut iterations = 0;
    let mut order: Vec<usize> = (0..=n).collect();
    while iterations < max_iter {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        let spread = vals[worst] - vals[best];
        let diam = pts
            .iter()
            .map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= ftol && diam <= xtol {
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for k in 0..n {
                centroid[k] += pts[i][k] / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (pts[worst][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evaluations);
        if fr < vals[best] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evaluations);
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[worst] {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        };
        if fc < vals[worst].min(fr) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for i in 0..=n {
            if i == best {
                continue;
            }
            for k in 0..n {
                pts[i][k] = anchor[k] + 0.5 * (pts[i][k] - anchor[k]);
            }
            vals[i] = eval(&pts[i], &mut evaluations);
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b))).unwrap_or(0);
    Simplex { x: pts[best].clone(), value: vals[best], iterations, evaluations }
}

/// Runs `f(i)` for `i in 0..n`, optionally across threads; results keep
/// index order.
fn run_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "std")]
    if workers > 1 && n > 1 {
        let chunk = n.div_ceil(workers);
        let f = &f;
        return std::thread::scope(|scope| {
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|start| scope.spawn(move || (start..(start + chunk).min(n)).map(f).collect::<Vec<T>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("optimizer worker panicked")).collect()
        });
    }
    let _ = workers;
    (0..n).map(f).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Nelder–Mead iterations per start.
    pub iterations: usize,
    /// Simplex value spread at which a start stops.
    pub simplex_tolerance: f64,
    /// Tensor Gauss–Legendre order used while searching non-Gaussian fields.
    pub search_order: usize,
    /// Quadrature for the final, reported evaluation.
    pub report_spec: QuadratureSpec,
    /// Best lattice seeds refined by Nelder–Mead, per reflection branch.
    pub refined_per_branch: usize,
    /// Region for criterion II.
    pub region: Region,
    pub workers: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            iterations: 200,
            simplex_tolerance: 1e-9,
            search_order: 40,
            report_spec: QuadratureSpec::with_order(120),
            refined_per_branch: 8,
            region: Region::FullPlane,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best_param: SymplecticParam,
    /// `None` for criterion III, which has no mixing angle.
    pub best_theta: Option<f64>,
    pub best_value: f64,
    pub report: CriterionReport,
    /// `(iteration, lowest objective so far)` across all refinement runs.
    pub trace: Vec<(usize, f64)>,
    /// Criterion values at every lattice seed, in lattice order.
    pub seed_values: Vec<f64>,
    pub restarts: usize,
}

const ANGLE_SEEDS: [f64; 3] = [0.0, PI / 3.0, 2.0 * PI / 3.0];
const LOG_T_SEEDS: [f64; 3] = [-0.7, 0.0, 0.7];
const OFFSET_SEEDS: [f64; 3] = [-1.0, 0.0, 1.0];
const THETA_SEEDS: [f64; 3] = [PI / 6.0, PI / 4.0, PI / 3.0];
const THETA_FLOOR: f64 = 1e-6;
const SEARCH_TOLERANCE: f64 = 1e-8;

fn wrap_theta(theta: f64) -> f64 {
    let t = modulo(theta, PI);
    t.clamp(THETA_FLOOR, PI - THETA_FLOOR)
}

fn params_of(v: &[f64], reflect: bool) -> SymplecticParam {
    SymplecticParam {
        phi1: modulo(v[0], TAU),
        phi2: modulo(v[1], TAU),
        t: v[2].exp(),
        reflect,
        x0: v[3],
        p0: v[4],
    }
}

/// Criterion value for search purposes: exact for Gaussian fields, a fixed
/// tensor rule otherwise.
struct SearchEvaluator<'a> {
    field: &'a WignerField,
    which: CriterionId,
    rules: TensorRules,
    region: &'a Region,
}

impl<'a> SearchEvaluator<'a> {
    fn slice_value(&self, slice: &SliceField<'_>, absolute: bool) -> f64 {
        if !absolute {
            if let Some(v) = slice.exact_integral() {
                return v;
            }
        }
        match self.region {
            Region::FullPlane => match slice.truncation() {
                Ok(Some(rect)) => {
                    if absolute {
                        self.escalate(&rect, |x, p| slice.eval(x, p).abs())
                    } else {
                        self.escalate(&rect, |x, p| slice.eval(x, p))
                    }
                }
                Ok(None) => 0.0,
                Err(_) => f64::NAN,
            },
            region => {
                let spec = QuadratureSpec::with_order(self.rules.order());
                crate::quadrature::integrate_abs(|x, p| slice.eval(x, p), region, &spec).map(|r| r.value).unwrap_or(f64::NAN)
            }
        }
    }

    /// Doubles the tensor order until two successive estimates agree, up to
    /// four times the base order. Wide boxes around narrow fields need it.
    fn escalate<F: Fn(f64, f64) -> f64>(&self, rect: &Rect, f: F) -> f64 {
        let base = self.rules.order();
        let mut prev = self.rules.integrate_fast(rect, &f);
        for order in [2 * base, 4 * base] {
            let next = TensorRules::new(order).integrate_fast(rect, &f);
            if (next - prev).abs() <= SEARCH_TOLERANCE * prev.abs().max(1.0) {
                return next;
            }
            prev = next;
        }
        prev
    }

    /// `(criterion value, objective to minimize)`.
    fn evaluate(&self, v: &[f64], reflect: bool) -> (f64, f64) {
        let t = match params_of(v, reflect).to_transform() {
            Ok(t) => t,
            Err(_) => return (f64::NAN, f64::INFINITY),
        };
        match self.which {
            CriterionId::C1 => {
                let value = self.slice_value(&make_slice(self.field, &t, wrap_theta(v[5])), false);
                (value, -value)
            }
            CriterionId::C2 => {
                let theta = wrap_theta(v[5]);
                let value = self.slice_value(&make_slice(self.field, &t, theta), true);
                // Bound 1/(2π|sin 2θ|) varies with θ; rank by value/bound.
                (value, -value * TAU * (2.0 * theta).sin().abs())
            }
            _ => {
                let value = self.slice_value(&SliceField::new(self.field, LinearMap::unscaled(&t)), false);
                (value, value)
            }
        }
    }
}

fn lattice(dims: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(dims as u32);
    for idx in 0..total {
        let mut k = idx;
        let mut digit = || {
            let d = k % 3;
            k /= 3;
            d
        };
        let mut v = vec![ANGLE_SEEDS[digit()], ANGLE_SEEDS[digit()], LOG_T_SEEDS[digit()]];
        v.push(OFFSET_SEEDS[digit()]);
        v.push(OFFSET_SEEDS[digit()]);
        if dims == 6 {
            v.push(THETA_SEEDS[digit()]);
        }
        out.push(v);
    }
    out
}

/// Multi-start search over `(φ1, φ2, log t, x0, p0[, θ])` for both
/// reflection branches.
///
/// Every lattice seed is scored; the best `refined_per_branch` seeds of each
/// branch are refined by Nelder–Mead, and the overall best is polished once
/// more. The reported value is a fresh criterion evaluation at the result.
pub fn optimize_criterion(w: &WignerField, which: CriterionId, cfg: &OptimizerConfig) -> Result<OptimizationResult> {
    if !matches!(which, CriterionId::C1 | CriterionId::C2 | CriterionId::C3) {
        return Err(Error::Unsupported("only criteria I, II and III are optimized over transforms"));
    }
    let dims = if which == CriterionId::C3 { 5 } else { 6 };
    let ev = SearchEvaluator { field: w, which, rules: TensorRules::new(cfg.search_order), region: &cfg.region };
    let seeds = lattice(dims);
    // Start index i < seeds.len() is the unreflected branch, the rest reflected.
    let starts: Vec<(Vec<f64>, bool)> =
        seeds.iter().map(|s| (s.clone(), false)).chain(seeds.iter().map(|s| (s.clone(), true))).collect();
    let scored = run_indexed(starts.len(), cfg.workers, |i| ev.evaluate(&starts[i].0, starts[i].1));
    let seed_values: Vec<f64> = scored.iter().map(|s| s.0).collect();

    let mut chosen = Vec::new();
    for branch in [false, true] {
        let mut idx: Vec<usize> = (0..starts.len()).filter(|&i| starts[i].1 == branch).collect();
        idx.sort_by(|&a, &b| scored[a].1.total_cmp(&scored[b].1).then(a.cmp(&b)));
        chosen.extend(idx.into_iter().take(cfg.refined_per_branch));
    }
    let step: Vec<f64> = [0.4, 0.4, 0.3, 0.5, 0.5, 0.2][..dims].to_vec();
    let runs = run_indexed(chosen.len(), cfg.workers, |k| {
        let (x0, reflect) = &starts[chosen[k]];
        nelder_mead(|v| ev.evaluate(v, *reflect).1, x0, &step, cfg.iterations, cfg.simplex_tolerance, 1e-7)
    });

    let mut trace = Vec::new();
    let mut best_so_far = f64::INFINITY;
    let mut iteration = 0;
    for run in &runs {
        iteration += run.iterations;
        best_so_far = best_so_far.min(run.value);
        trace.push((iteration, best_so_far));
    }
    // Lexicographic reduction on (objective, start index); near-ties go to
    // the reflected branch.
    let better = |a: (f64, bool, usize), b: (f64, bool, usize)| -> bool {
        let tie = 1e-12 * a.0.abs().max(b.0.abs()).max(1.0);
        if (a.0 - b.0).abs() > tie {
            a.0 < b.0
        } else if a.1 != b.1 {
            a.1
        } else {
            a.2 < b.2
        }
    };
    let mut best = (f64::INFINITY, false, usize::MAX);
    let mut best_x = starts[chosen[0]].0.clone();
    for (k, run) in runs.iter().enumerate() {
        let cand = (run.value, starts[chosen[k]].1, chosen[k]);
        if better(cand, best) {
            best = cand;
            best_x = run.x.clone();
        }
    }
    let reflect = best.1;
    let mut restarts = runs.len();
    for polish_step in [0.1, 0.02] {
        let steps: Vec<f64> = step.iter().map(|s| s * polish_step / 0.4).collect();
        let run = nelder_mead(|v| ev.evaluate(v, reflect).1, &best_x, &steps, 2 * cfg.iterations, cfg.simplex_tolerance, 1e-9);
        restarts += 1;
        iteration += run.iterations;
        if run.value < best.0 {
            best.0 = run.value;
            best_x = run.x;
        }
        best_so_far = best_so_far.min(best.0);
        trace.push((iteration, best_so_far));
    }

    let param = params_of(&best_x, reflect);
    let t = param.to_transform()?;
    let (theta, report) = match which {
        CriterionId::C3 => (None, criteria::criterion3(w, &t, &cfg.report_spec)?),
        _ => {
            let mut theta = wrap_theta(best_x[5]);
            if theta.cos().abs() < 1e-9 || (2.0 * theta).sin().abs() < 1e-9 {
                theta += 1e-6;
            }
            let rep = if which == CriterionId::C1 {
                criteria::criterion1(w, &t, theta, &cfg.report_spec)?
            } else {
                criteria::criterion2(w, &t, theta, &cfg.region, &cfg.report_spec)?
            };
            (Some(theta), rep)
        }
    };
    Ok(OptimizationResult {
        best_param: param,
        best_theta: theta,
        best_value: report.value,
        report,
        trace,
        seed_values,
        restarts,
    })
}

/// Purity criterion maximized over the mixing angle: a coarse scan
/// followed by golden-section refinement.
pub fn maximize_purity(w: &WignerField, spec: &QuadratureSpec) -> Result<CriterionReport> {
    const SCAN: usize = 48;
    let eval = |theta: f64| criteria::purity_s1(w, theta, spec);
    let mut best_i = 1;
    let mut best_v = f64::NEG_INFINITY;
    let step = PI / SCAN as f64;
    for i in 1..SCAN {
        let v = eval(i as f64 * step)?.value;
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let (mut lo, mut hi) = ((best_i as f64 - 1.0) * step, (best_i as f64 + 1.0) * step);
    lo = lo.max(THETA_FLOOR);
    hi = hi.min(PI - THETA_FLOOR);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let mut fa = eval(a)?.value;
    let mut fb = eval(b)?.value;
    while hi - lo > 1e-9 {
        if fa > fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = eval(a)?.value;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = eval(b)?.value;
        }
    }
    eval(0.5 * (lo + hi))
}

/// Fine grid of `|slice|` used for cheap region estimates while shrinking.
struct SliceGrid {
    xs: Vec<f64>,
    ps: Vec<f64>,
    cell: f64,
    abs: Vec<f64>,
}

impl SliceGrid {
    fn new(slice: &SliceField<'_>, rect: &crate::phase::Rect, n: usize) -> Self {
        let dx = (rect.x_max - rect.x_min) / n as f64;
        let dp = (rect.p_max - rect.p_min) / n as f64;
        let xs: Vec<f64> = (0..n).map(|i| rect.x_min + (i as f64 + 0.5) * dx).collect();
        let ps: Vec<f64> = (0..n).map(|j| rect.p_min + (j as f64 + 0.5) * dp).collect();
        let mut abs = Vec::with_capacity(n * n);
        for &x in &xs {
            for &p in &ps {
                abs.push(slice.eval(x, p).abs());
            }
        }
        Self { xs, ps, cell: dx * dp, abs }
    }

    /// `(∫ |f|, area)` over the union of `disks`, cell-centre rule.
    fn estimate(&self, disks: &[Disk]) -> (f64, f64) {
        let mut val = 0.0;
        let mut cells = 0usize;
        for (i, &x) in self.xs.iter().enumerate() {
            for (j, &p) in self.ps.iter().enumerate() {
                if disks.iter().any(|d| d.contains(PhasePoint::new(x, p))) {
                    val += self.abs[i * self.ps.len() + j];
                    cells += 1;
                }
            }
        }
        (val * self.cell, cells as f64 * self.cell)
    }

    /// Local maxima of `|f|`, one per plateau, largest first.
    fn peaks(&self, floor: f64) -> Vec<PhasePoint> {
        let (nx, np) = (self.xs.len(), self.ps.len());
        let at = |i: usize, j: usize| self.abs[i * np + j];
        let mut out: Vec<(f64, PhasePoint)> = Vec::new();
        for i in 1..nx - 1 {
            for j in 1..np - 1 {
                let v = at(i, j);
                if v < floor {
                    continue;
                }
                let mut is_max = true;
                for di in [-1i64, 0, 1] {
                    for dj in [-1i64, 0, 1] {
                        if (di, dj) == (0, 0) {
                            continue;
                        }
                        let nb = at((i as i64 + di) as usize, (j as i64 + dj) as usize);
                        // Ties go to the later cell so symmetric plateaus keep one peak.
                        let later = (di, dj) > (0, 0);
                        if nb > v || (later && nb == v) {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    out.push((v, PhasePoint::new(self.xs[i], self.ps[j])));
                }
            }
        }
        out.sort_by(|a, b| b.0.total_cmp(&a.0));
        out.into_iter().map(|(_, p)| p).collect()
    }
}

/// Smallest disk union (by total area, greedily) on which criterion II is
/// still violated at `(t, θ)`.
///
/// Disks grow from local maxima of `|slice|`, choosing at each step the move
/// with the best integral gain per added area, until the estimate exceeds
/// the bound. Radii are then cut by 5% while the criterion, re-evaluated by
/// quadrature, stays violated.
pub fn shrink_region(w: &WignerField, t: &Transform2, theta: f64, spec: &QuadratureSpec) -> Result<Region> {
    let full = criteria::criterion2(w, t, theta, &Region::FullPlane, spec)?;
    if !full.violated {
        return Err(Error::NotViolated { value: full.value, bound: full.bound });
    }
    let slice = make_slice(w, t, theta);
    let rect = slice.truncation()?.ok_or(Error::NotViolated { value: full.value, bound: full.bound })?;
    let grid = SliceGrid::new(&slice, &rect, 240);
    let gmax = grid.abs.iter().copied().fold(0.0, f64::max);
    let mut peaks = grid.peaks(1e-3 * gmax);
    peaks.truncate(8);
    if peaks.is_empty() {
        return Err(Error::NotViolated { value: full.value, bound: full.bound });
    }
    let target = full.bound * (1.0 + 1e-3);
    let dr = 0.01 * (rect.x_max - rect.x_min).hypot(rect.p_max - rect.p_min);
    let mut disks = vec![Disk { center: peaks[0], radius: dr }];
    let mut used = vec![false; peaks.len()];
    used[0] = true;
    let (mut cur_val, mut cur_area) = grid.estimate(&disks);
    let mut guard = 0;
    while cur_val <= target && guard < 4000 {
        guard += 1;
        let mut best: Option<(f64, Vec<Disk>, usize)> = None;
        let consider = |cand: Vec<Disk>, peak: usize, best: &mut Option<(f64, Vec<Disk>, usize)>| {
            let (v, a) = grid.estimate(&cand);
            let gain = (v - cur_val) / (a - cur_area).max(1e-12);
            if best.as_ref().map_or(true, |b| gain > b.0) {
                *best = Some((gain, cand, peak));
            }
        };
        for k in 0..disks.len() {
            let mut cand = disks.clone();
            cand[k].radius += dr;
            consider(cand, usize::MAX, &mut best);
        }
        for (k, peak) in peaks.iter().enumerate() {
            if !used[k] {
                let mut cand = disks.clone();
                cand.push(Disk { center: *peak, radius: dr });
                consider(cand, k, &mut best);
            }
        }
        let (_, cand, peak) = best.expect("at least one move");
        if peak != usize::MAX {
            used[peak] = true;
        }
        disks = cand;
        let (v, a) = grid.estimate(&disks);
        cur_val = v;
        cur_area = a;
    }

    let verify = |d: &[Disk]| -> Result<bool> {
        Ok(criteria::criterion2(w, t, theta, &Region::DiskUnion(d.to_vec()), spec)?.violated)
    };
    // The grid estimate can be optimistic; grow until quadrature agrees.
    let mut tries = 0;
    while !verify(&disks)? {
        tries += 1;
        if tries > 40 {
            return Err(Error::NotViolated { value: full.value, bound: full.bound });
        }
        for d in &mut disks {
            d.radius *= 1.05;
        }
    }
    // Single-disk 5% reductions until none keeps the violation.
    loop {
        let mut improved = false;
        for k in 0..disks.len() {
            let mut cand = disks.clone();
            cand[k].radius *= 0.95;
            if verify(&cand)? {
                disks = cand;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(Region::DiskUnion(disks))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellConfig {
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Standard deviation scale of the random starting displacements.
    pub spread: f64,
}

impl Default for BellConfig {
    fn default() -> Self {
        Self { starts: 300, iterations: 4000, seed: 1, spread: 0.6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellOptimization {
    /// Smallest mixing weight for which the CHSH bound is violated at the
    /// found displacements; above 1 when no violation was found.
    pub epsilon_min: f64,
    pub settings: BellSettings,
    /// CHSH value of the pure (`ε = 1`) member at those displacements.
    pub chsh_pure: f64,
    pub starts: usize,
}

fn settings_of(v: &[f64]) -> BellSettings {
    BellSettings {
        a: C64::new(v[0], v[1]),
        a2: C64::new(v[2], v[3]),
        b: C64::new(v[4], v[5]),
        b2: C64::new(v[6], v[7]),
    }
}

/// Threshold weight at fixed displacements. The CHSH value is affine in the
/// mixing weight, so it is fixed by its values at `ε = 1` and `ε = 0`.
/// Infeasible displacements score `1 + (2 - |B(1)|)`.
pub fn bell_threshold_at(pure: &WignerField, mixed: &WignerField, s: &BellSettings) -> f64 {
    let s1 = chsh_value(pure, s);
    let s0 = chsh_value(mixed, s);
    let mut best = f64::INFINITY;
    for sign in [1.0, -1.0] {
        if sign * s1 > 2.0 {
            let e = (2.0 - sign * s0) / (sign * s1 - sign * s0);
            best = best.min(e.max(0.0));
        }
    }
    if best.is_finite() { best } else { 1.0 + (2.0 - s1.abs()) }
}

/// Minimal mixing weight at which the family violates the CHSH bound,
/// minimized over the four displacements.
pub fn bell_epsilon_min(family: &StateSpec, cfg: &BellConfig) -> Result<BellOptimization> {
    let pure = family.with_epsilon(1.0).ok_or(Error::Unsupported("family has no mixing weight"))?.wigner()?;
    let mixed = family.with_epsilon(0.0).ok_or(Error::Unsupported("family has no mixing weight"))?.wigner()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let step = [0.1; 8];
    let mut best = (f64::INFINITY, vec![0.0; 8]);
    for _ in 0..cfg.starts {
        let x0: Vec<f64> = (0..8).map(|_| cfg.spread * standard_normal(&mut rng)).collect();
        let run = nelder_mead(|v| bell_threshold_at(&pure, &mixed, &settings_of(v)), &x0, &step, cfg.iterations, 1e-12, 1e-10);
        if run.value < best.0 {
            best = (run.value, run.x);
        }
    }
    let settings = settings_of(&best.1);
    Ok(BellOptimization {
        epsilon_min: best.0,
        settings,
        chsh_pure: chsh_value(&pure, &settings),
        starts: cfg.starts,
    })
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box–Muller; u1 is kept away from zero.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let r = nelder_mead(|v| (v[0] - 1.0).powi(2) + 3.0 * (v[1] + 2.0).powi(2), &[0.0, 0.0], &[0.5, 0.5], 500, 1e-14, 1e-8);
        assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.x[1], -2.0, epsilon = 1e-6);
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(lattice(6).len(), 729);
        assert_eq!(lattice(5).len(), 243);
        assert_eq!(lattice(6)[0], vec![0.0, 0.0, -0.7, -1.0, -1.0, PI / 6.0]);
    }

    #[test]
    fn tmsv_c1_optimum() {
        let w = crate::states::GaussianTwoMode::tmsv(0.5).wigner().unwrap();
        let r = optimize_criterion(&w, CriterionId::C1, &OptimizerConfig::default()).unwrap();
        assert_abs_diff_eq!(r.best_value, 1f64.exp() / TAU, epsilon = 1e-4);
        assert!(r.report.violated);
    }

    #[test]
    fn separable_input_has_no_region() {
        let w = crate::states::GaussianTwoMode::vacuum().wigner().unwrap();
        let err = shrink_region(&w, &Transform2::P_REFLECT, FRAC_PI_4, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, Error::NotViolated { .. }));
    }
}
