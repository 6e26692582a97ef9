use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use pttrap::modes::{mode, normalize, shifted_potential, ConjMode, ModeField, ModeSpec, ShiftConfig};
use pttrap::observables::{
    apply_h, expectation_report, hermitian_reality_check, inner, shift_identity, ObservableError, QUAD_TOL,
};
use pttrap::trapdyn::{solve_scale, FrequencySchedule, TrapSchedule};

const FD8: [f64; 9] = [
    -1.0 / 560.0,
    8.0 / 315.0,
    -1.0 / 5.0,
    8.0 / 5.0,
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

fn static_box() -> TrapSchedule {
    TrapSchedule::static_wall(1.0, 1.0).unwrap()
}

fn sinusoidal() -> TrapSchedule {
    let f = FrequencySchedule::from_fn("0.2 + 0.1 sin 3t", |t| 0.2 + 0.1 * (3.0 * t).sin());
    solve_scale(&f, 1.0, 0.2, 1.0, 1e-11).unwrap()
}

fn normalized(g: f64, k: usize, ts: &TrapSchedule, shift: &ShiftConfig, t: f64) -> ModeSpec {
    normalize(&mode(g, k).unwrap(), ts, shift, t).unwrap()
}

#[test]
fn shifted_norm_integrand_is_real() {
    let ts = static_box();
    let shift = ShiftConfig::shifted(0.1);
    let m = normalized(0.0, 1, &ts, &shift, 0.0);
    let f = ModeField::new(&m, &ts, 0.0).unwrap();
    let psi = |x: f64| f.psi(shift.point(x)).unwrap();
    let q = inner(psi, psi, 1.0, QUAD_TOL).unwrap();
    assert!(q.value.re > 0.0 && q.value.im.abs() < 1e-10);
}

#[test]
fn free_box_eigenrelation_survives_shift() {
    let ts = static_box();
    for c in [0.0, 0.1] {
        let shift = ShiftConfig::shifted(c);
        let m = normalized(0.0, 1, &ts, &shift, 0.0);
        for i in 1..20 {
            let x = i as f64 / 20.0;
            let h = apply_h(&m, &ts, &shift, 0.0, x).unwrap();
            let psi = ModeField::new(&m, &ts, 0.0).unwrap().psi(shift.point(x)).unwrap();
            assert!((h - PI * PI * psi).norm() < 1e-10, "c={c} x={x}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn analytic_h_matches_eighth_order_differences(x in 0.1f64..0.9) {
        let ts = sinusoidal();
        let shift = ShiftConfig::shifted(0.1);
        let m = normalized(2.0, 2, &ts, &shift, 0.4);
        let f = ModeField::new(&m, &ts, 0.4).unwrap();
        let l = f.state().l;
        let z = shift.point(x * l);
        let h = 1e-2;
        let d2: Complex64 = FD8
            .iter()
            .enumerate()
            .map(|(i, w)| f.psi(z + (i as f64 - 4.0) * h).unwrap() * *w)
            .sum::<Complex64>()
            / (h * h);
        let psi = f.psi(z).unwrap();
        let fd = -d2 + shifted_potential(f.state().omega2, 2.0, 0.1, x * l) * psi;
        let analytic = f.h_psi(z).unwrap();
        prop_assert!((fd - analytic).norm() < 1e-7 * analytic.norm().max(psi.norm()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn shift_identity_is_exact(omega2 in 0.0f64..4.0, c in -1.0f64..1.0, x in -3.0f64..3.0) {
        prop_assert!(shift_identity(omega2, c, x).norm() < 1e-13);
    }
}

#[test]
fn integrand_identity_holds_pointwise() {
    let ts = sinusoidal();
    let c = 0.3;
    let shift = ShiftConfig::shifted(c);
    let m = normalized(0.0, 1, &ts, &shift, 0.5);
    let f = ModeField::new(&m, &ts, 0.5).unwrap();
    let w2 = f.state().omega2;
    let l = f.state().l;
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let x = l * (i as f64 + 0.5) / 200.0;
        let z = shift.point(x);
        let [psi, _, d2] = f.derivatives(z).unwrap();
        let bra = f.continued_conjugate(z).unwrap();
        let plus = bra * (-d2 + shifted_potential(w2, 0.0, -c, x) * psi);
        let minus = bra * (-d2 + shifted_potential(w2, 0.0, c, x) * psi);
        let rhs = minus + Complex64::new(0.0, 4.0 * w2 * c * x) * bra * psi;
        worst = worst.max((plus - rhs).norm() / plus.norm().max(1e-300));
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn hermitian_box_expectations() {
    let ts = static_box();
    let shift = ShiftConfig::unshifted();
    let m = normalized(0.0, 1, &ts, &shift, 0.0);
    let r = expectation_report(&m, &ts, &shift, 0.0).unwrap();
    assert!((r.exp_h - PI * PI).norm() < 1e-8);
    assert!((r.exp_x - 0.5).norm() < 1e-10);
    assert!(r.combo().im.abs() < 1e-10);
    assert!(r.quad_change < 1e-10);
}

#[test]
fn free_hamiltonian_stays_real_under_shift() {
    let ts = static_box();
    for c in [0.1, 0.5, 1.0] {
        for conj in [ConjMode::ShiftThenConjugate, ConjMode::ContinuedConjugate] {
            let shift = ShiftConfig::new(c, conj).unwrap();
            let m = normalized(0.0, 1, &ts, &shift, 0.6);
            let r = expectation_report(&m, &ts, &shift, 0.6).unwrap();
            assert!(r.exp_h.im.abs() < 1e-8 * r.exp_h.norm(), "{conj:?} c={c}: {}", r.exp_h);
        }
    }
}

#[test]
fn moving_free_wall_breaks_reality_when_shifted() {
    // with c != 0 the field no longer vanishes at the real endpoints, so the
    // boundary terms of −∂² survive once α = L̇/(2L) is non-zero
    let moving = solve_scale(&FrequencySchedule::zero(), 1.0, 0.3, 1.0, 1e-11).unwrap();
    let shift = ShiftConfig::shifted(0.5);
    let m = normalized(0.0, 1, &moving, &shift, 0.6);
    let r = expectation_report(&m, &moving, &shift, 0.6).unwrap();
    assert!(r.exp_h.im.abs() > 1e-3);
    let unshifted = ShiftConfig::unshifted();
    let m = normalized(0.0, 1, &moving, &unshifted, 0.6);
    assert!(expectation_report(&m, &moving, &unshifted, 0.6).unwrap().exp_h.im.abs() < 1e-10);
}

#[test]
fn report_covers_both_conjugations() {
    let ts = solve_scale(&FrequencySchedule::constant(1.0), 1.0, 0.0, 0.5, 1e-11).unwrap();
    for conj in [ConjMode::ShiftThenConjugate, ConjMode::ContinuedConjugate] {
        let shift = ShiftConfig::new(0.1, conj).unwrap();
        let m = normalized(0.0, 1, &ts, &shift, 0.2);
        let r = expectation_report(&m, &ts, &shift, 0.2).unwrap();
        assert!(r.combo().re.is_finite() && r.im_residual().is_finite());
        if conj == ConjMode::ShiftThenConjugate {
            assert!(r.norm.im.abs() <= QUAD_TOL && r.norm.re > 0.0);
        }
        let v: serde_json::Value = serde_json::from_str(&r.to_json().render()).unwrap();
        let keys = [
            "mode", "t", "c", "conj_mode", "norm_re", "norm_im", "H_re", "H_im", "x_re", "x_im", "combo_re",
            "combo_im", "im_residual",
        ];
        assert_eq!(v.as_object().unwrap().len(), keys.len());
        for key in keys {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["conj_mode"], conj.as_str());
    }
}

#[test]
fn unnormalized_input_is_rejected() {
    let ts = static_box();
    let err = expectation_report(&mode(0.0, 1).unwrap(), &ts, &ShiftConfig::unshifted(), 0.0).unwrap_err();
    assert!(matches!(err, ObservableError::Unnormalized(_)));
}

#[test]
fn hermitian_reality_examples() {
    let ts = static_box();
    let m = normalized(0.0, 1, &ts, &ShiftConfig::unshifted(), 0.0);
    assert!(hermitian_reality_check(&m, &ts, 0.0).unwrap() < 1e-12);

    let sw = sinusoidal();
    let m = normalized(0.0, 1, &sw, &ShiftConfig::unshifted(), 0.3);
    assert!(hermitian_reality_check(&m, &sw, 0.3).unwrap() < 1e-9);
    let m = normalized(2.0, 1, &sw, &ShiftConfig::unshifted(), 0.3);
    assert!(hermitian_reality_check(&m, &sw, 0.3).unwrap() < 1e-9);
}
