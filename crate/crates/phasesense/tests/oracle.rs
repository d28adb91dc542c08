//! Cross-checks between the closed-form layer and the Fock-space oracle
//! through the public API only.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use num_complex::Complex64 as C64;

use phasesense::analytic::{
    budget_from_input, fisher_budget, fisher_information, input_from_budget, InputSpec,
    SqueezingMode,
};
use phasesense::fock::{
    self, analyze, coherent_state, derivative, generator_h, loss_channel, lossy_pair,
    partial_trace, qfi, sld, two_mode_product, FockOperator, FockState, OracleOptions,
};

#[test]
fn generator_matrix_element() {
    // <1,0| h |0,1> = -i/2 in mode-1-major ordering
    let d = 4;
    let h = generator_h(d);
    let elem = h.matrix()[(d, 1)];
    assert_abs_diff_eq!(elem.re, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(elem.im, -0.5, epsilon = 1e-15);
}

#[test]
fn budget_round_trip_and_consistency() {
    let spec = InputSpec::new(1.3, 0.7, 0.25).unwrap();
    let budget = budget_from_input(&spec).unwrap();
    let back = input_from_budget(&budget).unwrap();
    assert_relative_eq!(back.alpha(), spec.alpha(), max_relative = 1e-12);
    assert_relative_eq!(back.r(), spec.r(), max_relative = 1e-12);
    assert_relative_eq!(back.sigma(), spec.sigma(), max_relative = 1e-12);

    let f = fisher_information(&spec);
    let fb = fisher_budget(&budget, SqueezingMode::Consistent).unwrap();
    assert_relative_eq!(f, fb, max_relative = 1e-12);
}

#[test]
fn loss_channel_shrinks_coherent_amplitude() {
    let d = 24;
    let c = coherent_state(1.0, d, 1e-10).unwrap();
    let lossy = loss_channel(&c, 0.36).unwrap();
    let x = fock::quadrature_x(d);
    assert_relative_eq!(lossy.expectation(&x), 0.8, max_relative = 1e-9);
    assert_relative_eq!(lossy.trace(), 1.0, max_relative = 1e-12);
}

#[test]
fn lossy_pair_marginals_match_direct_channels() {
    let spec = InputSpec::new(0.8, 0.5, 0.3).unwrap();
    let cutoff = 16;
    let (r1, r2) = lossy_pair(&spec, cutoff).unwrap();
    let joint = two_mode_product(&r1, &r2).unwrap();
    let m1 = partial_trace(&joint, 0).unwrap();
    let m2 = partial_trace(&joint, 1).unwrap();
    // the cropped factors carry a small trace deficit, so each marginal is
    // the other factor scaled by the partner's trace
    let dev1 = (m1.matrix() - &r1.matrix().mapv(|v| v * r2.trace()))
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.norm()));
    let dev2 = (m2.matrix() - &r2.matrix().mapv(|v| v * r1.trace()))
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.norm()));
    assert!(dev1 < 1e-14 && dev2 < 1e-14, "dev1 {dev1:.3e} dev2 {dev2:.3e}");
}

#[test]
fn analyze_off_grid_point() {
    let spec = InputSpec::new(0.7, 0.8, 0.25).unwrap();
    let report = analyze(&spec, &OracleOptions::default()).unwrap();
    let f = fisher_information(&spec);
    assert_relative_eq!(report.qfi, f, max_relative = 1e-4);
    assert_relative_eq!(
        report.estimator_sensitivity,
        report.qfi,
        max_relative = 1e-6
    );
    assert!(report.sld_residual < 1e-9);
    assert!(report.tail_mass < 1e-6);
}

#[test]
fn generic_sld_on_a_non_product_state() {
    // mixture of two product states; no closed form, but the SLD must
    // satisfy its defining equation and Tr{G drho} = Tr{G^2 rho}
    let d = 8;
    let a = two_mode_product(
        &coherent_state(0.5, d, 1e-8).unwrap(),
        &coherent_state(0.3, d, 1e-8).unwrap(),
    )
    .unwrap();
    let b = two_mode_product(
        &coherent_state(0.0, d, 1e-8).unwrap(),
        &coherent_state(0.6, d, 1e-8).unwrap(),
    )
    .unwrap();
    let mix = a.matrix().mapv(|v| v * 0.6) + b.matrix().mapv(|v| v * 0.4);
    let tail = 0.6 * a.tail_mass() + 0.4 * b.tail_mass();
    let rho = FockState::from_matrix(mix, d, 2, tail).unwrap();

    let h = generator_h(d);
    let drho = derivative(&rho, &h).unwrap();
    let solved = sld(&rho, &drho).unwrap();
    assert!(solved.residual < 1e-9, "residual {:.3e}", solved.residual);

    let f_sq = qfi(&rho, &solved.operator);
    let f_tr = {
        let gd = solved.operator.matrix().dot(drho.matrix());
        gd.diag().iter().map(|v| v.re).sum::<f64>()
    };
    assert_relative_eq!(f_sq, f_tr, max_relative = 1e-8);
}

#[test]
fn matrix_dump_round_trip() {
    let spec = InputSpec::new(0.6, 0.4, 0.1).unwrap();
    let (r1, _) = lossy_pair(&spec, 10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho1.bin");
    fock::write_matrix(&path, r1.matrix()).unwrap();
    let back = fock::read_matrix(&path).unwrap();
    assert_eq!(r1.matrix(), &back);
}

#[test]
fn operators_compose_as_expected() {
    // n = a^dag a below the cutoff rim
    let d = 9;
    let a = fock::annihilation(d);
    let n = fock::number(d);
    let composed = a.adjoint().matrix().dot(a.matrix());
    for i in 0..d {
        for j in 0..d {
            let expected = if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) };
            assert!((composed[(i, j)] - expected).norm() < 1e-14);
            let _ = &n;
        }
    }

    // lifting commutes with products
    let x = fock::quadrature_x(d);
    let lifted_sq = fock::on_mode2(&FockOperator::from_matrix(
        x.matrix().dot(x.matrix()),
        d,
        1,
    )
    .unwrap());
    let sq_lifted = fock::on_mode2(&x);
    let prod = sq_lifted.matrix().dot(sq_lifted.matrix());
    let dev = (lifted_sq.matrix() - &prod)
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.norm()));
    assert!(dev < 1e-13);
}
