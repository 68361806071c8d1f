use approx::assert_abs_diff_eq;
use nalgebra::Matrix4;
use wigent_core::fock::FockDensityMatrix;
use wigent_core::linalg::{CMatrix, C64};
use wigent_core::phase::Rect;
use wigent_core::quadrature::TensorRules;
use wigent_core::states::{self, tmst_covariance};
use wigent_core::wigner::{fock_wigner, fock_wigner_single};
use wigent_core::{BellState, CatParams, CatSign, GaussianTwoMode, StateSpec, TmstParams, WernerParams, WignerField};

/// `∫ W d⁴z` as an iterated tensor rule over the field's envelope.
fn total_integral(w: &WignerField, order: usize) -> f64 {
    let env = w.envelope();
    let rect = |k: usize| {
        Rect::new(
            env.center[k] - env.half_width[k],
            env.center[k] + env.half_width[k],
            env.center[k + 1] - env.half_width[k + 1],
            env.center[k + 1] + env.half_width[k + 1],
        )
    };
    let (outer, inner) = (rect(0), rect(2));
    let rules = TensorRules::new(order);
    rules.integrate_fast(&outer, |xa, pa| rules.integrate_fast(&inner, |xb, pb| w.eval(&[xa, pa, xb, pb])))
}

#[test]
fn every_factory_is_normalized() {
    let fields = [
        GaussianTwoMode::tmsv(0.5).wigner().unwrap(),
        tmst_covariance(&TmstParams { s: 0.4, eta: 0.6, r: 0.3 }).unwrap().wigner().unwrap(),
        states::werner_wigner(&WernerParams { bell: BellState::PhiPlus, epsilon: 0.7 }).unwrap(),
        states::werner_wigner(&WernerParams { bell: BellState::PsiPlus, epsilon: 0.2 }).unwrap(),
        states::cat_wigner(&CatParams { gamma: 1.0, epsilon: 1.0, sign: CatSign::Plus }).unwrap(),
        states::cat_wigner(&CatParams { gamma: 0.7, epsilon: 0.5, sign: CatSign::Minus }).unwrap(),
    ];
    for w in &fields {
        assert_abs_diff_eq!(total_integral(w, 48), 1.0, epsilon = 1e-6);
    }
    let rho = states::state_to_fock(&StateSpec::Tmst(TmstParams::tmsv(0.3)), 12).unwrap();
    assert_abs_diff_eq!(total_integral(&fock_wigner(&rho), 48), 1.0, epsilon = 1e-6);
}

#[test]
fn tmst_reduces_to_tmsv() {
    let s: f64 = 0.65;
    let g = tmst_covariance(&TmstParams::tmsv(s)).unwrap();
    let (n, m, c1, c2) = g.standard_params();
    assert_abs_diff_eq!(n, (2.0 * s).cosh(), epsilon = 1e-14);
    assert_abs_diff_eq!(m, (2.0 * s).cosh(), epsilon = 1e-14);
    assert_abs_diff_eq!(c1, (2.0 * s).sinh(), epsilon = 1e-14);
    assert_abs_diff_eq!(c2, -(2.0 * s).sinh(), epsilon = 1e-14);
    // pure: det V = 1
    assert_abs_diff_eq!(g.cov.determinant(), 1.0, epsilon = 1e-10);
}

#[test]
fn tmst_standard_params_at_sample_point() {
    let p = TmstParams { s: 0.5, eta: 0.5, r: 0.4 };
    let (n, m, c) = p.standard_params();
    let ch2 = 0.4f64.cosh().powi(2);
    assert_abs_diff_eq!(n, 0.5 * ch2 * 1f64.cosh() + 0.5 * ch2 + 0.4f64.sinh().powi(2), epsilon = 1e-14);
    assert_abs_diff_eq!(m, 1f64.cosh(), epsilon = 1e-14);
    assert_abs_diff_eq!(c, 0.5f64.sqrt() * 0.4f64.cosh() * 1f64.sinh(), epsilon = 1e-14);
    assert!(p.is_entangled());
    assert!(!TmstParams { s: 0.5, eta: 0.1, r: 0.4 }.is_entangled());
}

#[test]
fn unphysical_covariance_is_rejected() {
    assert!(GaussianTwoMode::standard_form(1.0, 1.0, 0.5, -0.5).is_err());
    assert!(GaussianTwoMode::new([0.0; 4], Matrix4::identity() * 0.5).is_err());
    assert!(GaussianTwoMode::standard_form(2.0, 2.0, 1.0, -1.0).is_ok());
}

#[test]
fn invalid_family_parameters() {
    assert!(states::werner_wigner(&WernerParams { bell: BellState::PhiPlus, epsilon: 1.5 }).is_err());
    assert!(states::cat_wigner(&CatParams { gamma: 0.0, epsilon: 1.0, sign: CatSign::Minus }).is_err());
    assert!(tmst_covariance(&TmstParams { s: 0.5, eta: 0.0, r: 0.0 }).is_err());
}

#[test]
fn maximally_mixed_werner_is_a_product() {
    let w = states::werner_wigner(&WernerParams { bell: BellState::PhiPlus, epsilon: 0.0 }).unwrap();
    let half = CMatrix::from_fn(2, 2, |i, j| if i == j { C64::new(0.5, 0.0) } else { C64::new(0.0, 0.0) });
    for &(xa, pa, xb, pb) in &[(0.3, -0.2, 1.1, 0.4), (-1.5, 0.7, 0.0, -0.9), (2.0, 2.0, -1.0, 0.5)] {
        let product = fock_wigner_single(&half, xa, pa) * fock_wigner_single(&half, xb, pb);
        assert_abs_diff_eq!(w.eval(&[xa, pa, xb, pb]), product, epsilon = 1e-14);
    }
    let rules = TensorRules::new(60);
    let one = rules.integrate_fast(&Rect::centered(10.0, 10.0), |x, p| fock_wigner_single(&half, x, p));
    assert_abs_diff_eq!(one, 1.0, epsilon = 1e-10);
}

#[test]
fn tmsv_schmidt_coefficients() {
    let s: f64 = 0.5;
    let rho = states::state_to_fock(&StateSpec::Tmst(TmstParams::tmsv(s)), 20).unwrap();
    assert!(rho.trace_deficit() < 1e-8);
    for n in 0..6 {
        let lam = s.tanh().powi(n as i32) / s.cosh();
        assert_abs_diff_eq!(rho.element(n, n, n, n).re, lam * lam, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.element(0, 0, n, n).re, lam / s.cosh(), epsilon = 1e-12);
    }
    assert_abs_diff_eq!(rho.element(1, 0, 1, 0).norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn werner_bell_state_entries() {
    let rho = states::state_to_fock(&StateSpec::Werner(WernerParams { bell: BellState::PhiPlus, epsilon: 1.0 }), 2).unwrap();
    for &(a, b) in &[((0, 0), (0, 0)), ((0, 0), (1, 1)), ((1, 1), (0, 0)), ((1, 1), (1, 1))] {
        assert_abs_diff_eq!(rho.element(a.0, a.1, b.0, b.1).re, 0.5, epsilon = 1e-15);
    }
    assert_abs_diff_eq!(rho.element(0, 1, 0, 1).re, 0.0, epsilon = 1e-15);
}

#[test]
fn cutoff_too_small_is_reported() {
    let err = states::state_to_fock(&StateSpec::Tmst(TmstParams::tmsv(1.0)), 4).unwrap_err();
    assert!(matches!(err, wigent_core::Error::CutoffTooSmall { .. }));
}

#[test]
fn cat_fock_expansion_matches_closed_form() {
    for sign in [CatSign::Plus, CatSign::Minus] {
        let p = CatParams { gamma: 1.2, epsilon: 0.6, sign };
        let spec = StateSpec::Cat(p);
        let rho = states::state_to_fock(&spec, spec.default_cutoff()).unwrap();
        assert!(rho.trace_deficit().abs() < 1e-6);
        let fock = fock_wigner(&rho);
        let closed = spec.wigner().unwrap();
        for &z in &[[0.0, 0.0, 0.0, 0.0], [1.0, -0.5, 0.8, 0.3], [2.4, 0.1, 2.4, -0.1], [-1.3, 1.3, 0.2, -2.0]] {
            assert_abs_diff_eq!(fock.eval(&z), closed.eval(&z), epsilon = 1e-7);
        }
    }
}

#[test]
fn werner_fock_matches_closed_form() {
    for bell in [BellState::PhiPlus, BellState::PsiPlus] {
        let spec = StateSpec::Werner(WernerParams { bell, epsilon: 0.45 });
        let fock = fock_wigner(&states::state_to_fock(&spec, 2).unwrap());
        let closed = spec.wigner().unwrap();
        for &z in &[[0.0, 0.0, 0.0, 0.0], [0.4, -1.0, 1.2, 0.3], [-2.0, 0.5, 0.1, 1.7]] {
            assert_abs_diff_eq!(fock.eval(&z), closed.eval(&z), epsilon = 1e-13);
        }
    }
}

#[test]
fn default_cutoffs() {
    assert_eq!(StateSpec::Tmst(TmstParams::tmsv(0.5)).default_cutoff(), 20);
    assert_eq!(StateSpec::Werner(WernerParams { bell: BellState::PsiPlus, epsilon: 0.5 }).default_cutoff(), 2);
    assert_eq!(StateSpec::Cat(CatParams { gamma: 2.0, epsilon: 1.0, sign: CatSign::Plus }).default_cutoff(), 26);
}

#[test]
fn product_of_fock_states_is_separable_product() {
    let a = CMatrix::from_fn(3, 3, |i, j| if i == j { C64::new([0.5, 0.3, 0.2][i], 0.0) } else { C64::new(0.0, 0.0) });
    let b = CMatrix::from_fn(3, 3, |i, j| if i == j { C64::new([0.1, 0.6, 0.3][i], 0.0) } else { C64::new(0.0, 0.0) });
    let rho = FockDensityMatrix::product(&a, &b).unwrap();
    let w = fock_wigner(&rho);
    let z = [0.4, -0.3, 1.0, 0.2];
    assert_abs_diff_eq!(w.eval(&z), fock_wigner_single(&a, z[0], z[1]) * fock_wigner_single(&b, z[2], z[3]), epsilon = 1e-14);
}
