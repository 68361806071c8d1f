use std::f64::consts::FRAC_PI_4;

use approx::assert_abs_diff_eq;
use wigent_core::criteria::{self, BellSettings};
use wigent_core::linalg::C64;
use wigent_core::optimize::{self, BellConfig, OptimizerConfig};
use wigent_core::phase::Region;
use wigent_core::quadrature::{self, QuadratureSpec};
use wigent_core::states::{self, tmst_covariance};
use wigent_core::wigner::make_slice;
use wigent_core::{BellState, CatParams, CatSign, CriterionId, StateSpec, TmstParams, Transform2, WernerParams};

#[test]
fn nelder_mead_on_rosenbrock() {
    let r = optimize::nelder_mead(
        |v| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2),
        &[-1.2, 1.0],
        &[0.3, 0.3],
        5000,
        1e-16,
        1e-12,
    );
    assert_abs_diff_eq!(r.x[0], 1.0, epsilon = 1e-5);
    assert_abs_diff_eq!(r.x[1], 1.0, epsilon = 1e-5);
}

#[test]
fn optimum_dominates_every_seed_and_is_confirmed() {
    let w = states::werner_wigner(&WernerParams { bell: BellState::PhiPlus, epsilon: 0.8 }).unwrap();
    let cfg = OptimizerConfig::default();
    let r = optimize::optimize_criterion(&w, CriterionId::C1, &cfg).unwrap();
    let best_seed = r.seed_values.iter().copied().filter(|v| v.is_finite()).fold(f64::MIN, f64::max);
    assert!(r.best_value >= best_seed - 1e-8, "{} < {}", r.best_value, best_seed);
    assert!(r.best_value >= (1.0 + 3.0 * 0.8) / (4.0 * std::f64::consts::PI) - 1e-6);
    let t = r.best_param.to_transform().unwrap();
    let direct = criteria::criterion1(&w, &t, r.best_theta.unwrap(), &cfg.report_spec).unwrap();
    assert_eq!(direct.value, r.report.value);
    assert_eq!(direct.violated, r.report.violated);
    assert!(r.report.violated);
    assert!(r.trace.windows(2).all(|p| p[1].1 <= p[0].1));
}

#[test]
fn criterion_three_is_minimized() {
    let w = states::werner_wigner(&WernerParams { bell: BellState::PsiPlus, epsilon: 1.0 }).unwrap();
    let r = optimize::optimize_criterion(&w, CriterionId::C3, &OptimizerConfig::default()).unwrap();
    assert!(r.best_theta.is_none());
    assert!(r.best_value <= -1.0 / (4.0 * std::f64::consts::PI) + 1e-6);
    assert!(r.report.violated);
}

#[test]
fn parallel_search_is_deterministic() {
    let w = tmst_covariance(&TmstParams { s: 0.5, eta: 0.7, r: 0.3 }).unwrap().wigner().unwrap();
    let serial = optimize::optimize_criterion(&w, CriterionId::C1, &OptimizerConfig::default()).unwrap();
    let parallel =
        optimize::optimize_criterion(&w, CriterionId::C1, &OptimizerConfig { workers: 4, ..OptimizerConfig::default() }).unwrap();
    assert_eq!(serial, parallel);
}

#[test]
fn tmst_boundary_on_a_coarse_grid() {
    let cfg = OptimizerConfig::default();
    for i in 0..6 {
        let r = 0.1 + 0.25 * i as f64;
        for j in 0..6 {
            let eta = 0.05 + 0.19 * j as f64;
            let p = TmstParams { s: 0.5, eta, r };
            let g = tmst_covariance(&p).unwrap();
            let simon = criteria::simon_check(&g);
            if simon.value.abs() <= 1e-4 {
                continue;
            }
            let opt = optimize::optimize_criterion(&g.wigner().unwrap(), CriterionId::C1, &cfg).unwrap();
            assert_eq!(opt.report.violated, simon.violated, "r = {r}, η = {eta}");
            if (eta - r.tanh().powi(2)).abs() > 0.02 {
                assert_eq!(opt.report.violated, eta > r.tanh().powi(2));
            }
        }
    }
}

#[test]
fn criterion_two_optimization_respects_region() {
    let w = states::cat_wigner(&CatParams { gamma: 1.0, epsilon: 1.0, sign: CatSign::Plus }).unwrap();
    let r = optimize::optimize_criterion(&w, CriterionId::C2, &OptimizerConfig::default()).unwrap();
    assert!(r.report.violated);
    assert_eq!(r.report.region, Some(Region::FullPlane));
}

#[test]
fn purity_maximum_for_standard_form() {
    let (n, m, c): (f64, f64, f64) = (2.0, 1.5, 1.2);
    let g = wigent_core::GaussianTwoMode::standard_form(n, m, c, -c).unwrap();
    let r = optimize::maximize_purity(&g.wigner().unwrap(), &QuadratureSpec::default()).unwrap();
    let expected = 2.0 / (m + n - (4.0 * c * c + (n - m).powi(2)).sqrt());
    assert_abs_diff_eq!(r.value, expected, epsilon = 1e-6);
    assert_eq!(r.violated, c * c > (n - 1.0) * (m - 1.0));
}

#[test]
fn shrunk_region_keeps_violation() {
    let w = states::cat_wigner(&CatParams { gamma: 1.5, epsilon: 1.0, sign: CatSign::Plus }).unwrap();
    let spec = QuadratureSpec::default();
    let region = optimize::shrink_region(&w, &Transform2::P_REFLECT, FRAC_PI_4, &spec).unwrap();
    let r = criteria::criterion2(&w, &Transform2::P_REFLECT, FRAC_PI_4, &region, &spec).unwrap();
    assert!(r.violated);
    let slice = make_slice(&w, &Transform2::P_REFLECT, FRAC_PI_4);
    let area = quadrature::integrate(|_, _| 1.0, &region, &spec).unwrap().value;
    assert!(area < slice.truncation().unwrap().unwrap().area());
}

#[test]
fn bell_threshold_is_affine_in_the_weight() {
    let pure = states::werner_wigner(&WernerParams { bell: BellState::PhiPlus, epsilon: 1.0 }).unwrap();
    let mixed = states::werner_wigner(&WernerParams { bell: BellState::PhiPlus, epsilon: 0.0 }).unwrap();
    let s = BellSettings {
        a: C64::new(0.05, 0.0),
        a2: C64::new(-0.3, 0.1),
        b: C64::new(0.05, 0.0),
        b2: C64::new(-0.3, -0.1),
    };
    let e = optimize::bell_threshold_at(&pure, &mixed, &s);
    if e <= 1.0 {
        let at = states::werner_wigner(&WernerParams { bell: BellState::PhiPlus, epsilon: e }).unwrap();
        assert_abs_diff_eq!(criteria::chsh_value(&at, &s).abs(), 2.0, epsilon = 1e-9);
    }
    // origin: B = 2 for every ε, never feasible
    assert!(optimize::bell_threshold_at(&pure, &mixed, &BellSettings::ORIGIN) >= 1.0);
}

#[test]
fn bell_search_finds_violation_for_pure_werner() {
    let cfg = BellConfig { starts: 20, iterations: 2000, ..BellConfig::default() };
    let r = optimize::bell_epsilon_min(&StateSpec::Werner(WernerParams { bell: BellState::PhiPlus, epsilon: 1.0 }), &cfg).unwrap();
    assert!(r.epsilon_min < 1.0);
    assert!(r.chsh_pure.abs() > 2.0);
    let same = optimize::bell_epsilon_min(&StateSpec::Werner(WernerParams { bell: BellState::PhiPlus, epsilon: 1.0 }), &cfg).unwrap();
    assert_eq!(r, same);
}

#[test]
fn tmst_family_has_no_mixing_weight() {
    let err = optimize::bell_epsilon_min(&StateSpec::Tmst(TmstParams::tmsv(0.5)), &BellConfig::default()).unwrap_err();
    assert!(matches!(err, wigent_core::Error::Unsupported(_)));
}
