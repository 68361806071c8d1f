use std::f64::consts::{FRAC_PI_4, PI, TAU};

use approx::assert_abs_diff_eq;
use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wigent_core::linalg::{CMatrix, C64};
use wigent_core::phase::{Rect, Region};
use wigent_core::quadrature::{self, QuadratureSpec};
use wigent_core::states::{self, GaussianOneMode};
use wigent_core::wigner::{fock_wigner, fock_wigner_single, gaussian_mixture_purity, make_slice, reduced_mode_wigner};
use wigent_core::{GaussianTwoMode, StateSpec, SymplecticParam, TmstParams, Transform2};

/// Plain multivariate normal density, written independently of the engine.
fn normal_density(mean: &Vector4<f64>, cov: &Matrix4<f64>, z: &Vector4<f64>) -> f64 {
    let d = z - mean;
    let q = d.dot(&(cov.try_inverse().unwrap() * d));
    (-0.5 * q).exp() / (4.0 * PI * PI * cov.determinant().sqrt())
}

fn random_transform(rng: &mut ChaCha8Rng) -> Transform2 {
    SymplecticParam {
        phi1: rng.gen_range(0.0..TAU),
        phi2: rng.gen_range(0.0..TAU),
        t: rng.gen_range(-0.8f64..0.8).exp(),
        reflect: rng.gen(),
        x0: rng.gen_range(-1.0..1.0),
        p0: rng.gen_range(-1.0..1.0),
    }
    .to_transform()
    .unwrap()
}

#[test]
fn transform_law_for_gaussian_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = states::tmst_covariance(&TmstParams { s: 0.6, eta: 0.7, r: 0.2 }).unwrap();
    let g = GaussianTwoMode { mean: [0.3, -0.2, 0.5, 0.1], ..g };
    let w = g.wigner().unwrap();
    for _ in 0..20 {
        let t = random_transform(&mut rng);
        let theta = rng.gen_range(0.1..3.0);
        let (s, c) = f64::sin_cos(theta);
        // W'(z_A, z_B) = W(z_A, M z_B + s·off) is Gaussian with mode B pulled
        // back through M.
        let minv = nalgebra::Matrix2::new(t.a, t.b, t.c, t.d).try_inverse().unwrap();
        let mut big = Matrix4::identity();
        big.fixed_view_mut::<2, 2>(2, 2).copy_from(&minv);
        let cov = big * g.cov * big.transpose();
        let mb = minv * nalgebra::Vector2::new(g.mean[2] - s * t.x0, g.mean[3] - s * t.p0);
        let mean = Vector4::new(g.mean[0], g.mean[1], mb[0], mb[1]);
        let slice = make_slice(&w, &t, theta);
        for _ in 0..5 {
            let (x, p) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let direct = normal_density(&mean, &cov, &Vector4::new(c * x, c * p, s * x, s * p));
            assert_abs_diff_eq!(slice.eval(x, p), direct, epsilon = 1e-10);
        }
    }
}

#[test]
fn pure_single_mode_purity_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = QuadratureSpec::default();
    for k in 0..200 {
        let mixed = k % 2 == 1;
        let nu = if mixed { rng.gen_range(1.05..3.0) } else { 1.0 };
        let g = GaussianOneMode::squeezed_thermal(
            nu,
            rng.gen_range(0.0..0.8),
            rng.gen_range(0.0..PI),
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        )
        .unwrap();
        let half = 9.0 * g.cov.abs().max().sqrt();
        let rect = Rect::new(g.mean[0] - half, g.mean[0] + half, g.mean[1] - half, g.mean[1] + half);
        let v = quadrature::integrate(|x, p| g.wigner(x, p).powi(2), &Region::Rectangle(rect), &spec).unwrap();
        let purity = 4.0 * PI * v.value;
        if mixed {
            assert!(purity < 1.0 - 1e-3, "mixed purity {purity}");
        } else {
            assert_abs_diff_eq!(purity, 1.0, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(purity, gaussian_mixture_purity(&[(1.0, g)]), epsilon = 1e-6);
    }
}

fn random_density(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

#[test]
fn trace_product_is_non_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = QuadratureSpec::default();
    let region = Region::Rectangle(Rect::centered(9.0, 9.0));
    for _ in 0..20 {
        let (a, b) = (random_density(&mut rng, 4), random_density(&mut rng, 4));
        let overlap = quadrature::integrate(|x, p| fock_wigner_single(&a, x, p) * fock_wigner_single(&b, x, p), &region, &spec)
            .unwrap()
            .value;
        assert!(overlap >= -1e-9);
        // ∫ W_A W_B = Tr[ρ_A ρ_B]/(4π)
        let tr = (&a * &b).trace().re;
        assert_abs_diff_eq!(overlap, tr / (4.0 * PI), epsilon = 1e-9);
    }
}

#[test]
fn fock_and_gaussian_engines_agree_on_tmsv() {
    // At s = 1 the levels above 30 still carry 2.7e-6 of W at the grid
    // corners, so that case runs at 40.
    for (s, cutoff) in [(0.3, 30), (0.6, 30), (0.9, 30), (1.0, 40)] {
        let gauss = GaussianTwoMode::tmsv(s).wigner().unwrap();
        let fock = fock_wigner(&states::state_to_fock(&StateSpec::Tmst(TmstParams::tmsv(s)), cutoff).unwrap());
        let axis: Vec<f64> = (0..5).map(|i| -4.0 + 2.0 * i as f64).collect();
        let mut worst = 0.0f64;
        for &xa in &axis {
            for &pa in &axis {
                for &xb in &axis {
                    for &pb in &axis {
                        let z = [xa, pa, xb, pb];
                        worst = worst.max((gauss.eval(&z) - fock.eval(&z)).abs());
                    }
                }
            }
        }
        assert!(worst < 1e-6, "s = {s}: {worst}");
    }
}

#[test]
fn vacuum_peak_value() {
    let w = GaussianTwoMode::vacuum().wigner().unwrap();
    assert_abs_diff_eq!(w.eval(&[0.0; 4]), 1.0 / (4.0 * PI * PI), epsilon = 1e-15);
    let tmsv = GaussianTwoMode::tmsv(0.5).wigner().unwrap();
    assert_abs_diff_eq!(tmsv.eval(&[0.0; 4]), 1.0 / (4.0 * PI * PI), epsilon = 1e-14);
}

#[test]
fn tmsv_slice_integral_closed_form() {
    for s in [0.1f64, 0.5, 1.0] {
        let w = GaussianTwoMode::tmsv(s).wigner().unwrap();
        let slice = make_slice(&w, &Transform2::P_REFLECT, FRAC_PI_4);
        assert_abs_diff_eq!(slice.exact_integral().unwrap(), (2.0 * s).exp() / TAU, epsilon = 1e-12);
    }
}

#[test]
fn reduced_mode_halves_criterion_three() {
    let fields = [
        GaussianTwoMode::tmsv(0.4).wigner().unwrap(),
        states::werner_wigner(&wigent_core::WernerParams { bell: wigent_core::BellState::PsiPlus, epsilon: 0.8 }).unwrap(),
        states::cat_wigner(&wigent_core::CatParams { gamma: 0.8, epsilon: 0.9, sign: wigent_core::CatSign::Minus })
            .unwrap(),
    ];
    let spec = QuadratureSpec::default();
    for w in &fields {
        let reduced = reduced_mode_wigner(w, FRAC_PI_4, &Transform2::NEG_IDENTITY);
        for &(xp, pp) in &[(0.0, 0.0), (0.4, -0.3)] {
            let shift = Transform2::NEG_IDENTITY.with_offset(2f64.sqrt() * xp, 2f64.sqrt() * pp);
            let c3 = wigent_core::criteria::criterion3(w, &shift, &spec).unwrap().value;
            let w_plus = reduced.value(xp, pp, &spec).unwrap().value;
            assert_abs_diff_eq!(c3, 0.5 * w_plus, epsilon = 1e-7);
            if let Some(exact) = reduced.exact_value(xp, pp) {
                assert_abs_diff_eq!(exact, w_plus, epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn werner_psi_plus_reduced_mode_at_origin() {
    let w = states::werner_wigner(&wigent_core::WernerParams { bell: wigent_core::BellState::PsiPlus, epsilon: 1.0 }).unwrap();
    let reduced = reduced_mode_wigner(&w, FRAC_PI_4, &Transform2::NEG_IDENTITY);
    let v = reduced.value(0.0, 0.0, &QuadratureSpec::default()).unwrap().value;
    assert_abs_diff_eq!(v, -1.0 / TAU, epsilon = 1e-9);
}

#[test]
fn envelope_contains_the_mass() {
    let w = GaussianTwoMode::tmsv(0.8).wigner().unwrap();
    let env = w.envelope();
    for k in 0..4 {
        assert!(env.half_width[k] >= 8.0 * (1.6f64).cosh().sqrt() - 1e-12);
    }
}
