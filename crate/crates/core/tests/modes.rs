// Reference values are quoted to more digits than f64 keeps.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use num_complex::Complex64;
use pttrap::modes::{
    density, density_closed_half, eigen_residual_reduced, mode, normalize, quantize, r_density, shifted_potential,
    wall_density, wavefunction, ConjMode, Derivative, GridField, ModeField, ShiftConfig,
};
use pttrap::quadrature::composite;
use pttrap::specfun::{bessel_j, bessel_j_prime};
use pttrap::trapdyn::{solve_scale, FrequencySchedule, TrapSchedule};

// mpmath besseljzero(1.5, 1)
const J_THREE_HALVES_1: f64 = 4.4934094579090641753;

fn static_box() -> TrapSchedule {
    TrapSchedule::static_wall(1.0, 1.0).unwrap()
}

fn sinusoidal() -> TrapSchedule {
    let f = FrequencySchedule::from_fn("0.2 + 0.1 sin 3t", |t| 0.2 + 0.1 * (3.0 * t).sin());
    solve_scale(&f, 1.0, 0.2, 1.0, 1e-11).unwrap()
}

#[test]
fn quantized_energies_hit_bessel_zeros() {
    for g in [0.0, 2.0, 6.0] {
        for m in quantize(g, 5).unwrap() {
            let j = bessel_j(m.nu, Complex64::new(m.energy.sqrt(), 0.0)).unwrap();
            assert!(j.norm() < 1e-10, "g={g} k={} J={j}", m.k);
        }
    }
    let m = mode(2.0, 1).unwrap();
    assert!((m.energy.sqrt() - J_THREE_HALVES_1).abs() < 1e-9);
}

#[test]
fn energy_is_independent_of_schedule() {
    let m = mode(2.0, 3).unwrap();
    let schedules = [static_box(), sinusoidal(), TrapSchedule::static_wall(2.5, 0.5).unwrap()];
    let energies: Vec<u64> = schedules
        .iter()
        .map(|ts| normalize(&m, ts, &ShiftConfig::shifted(0.1), 0.2).unwrap().energy.to_bits())
        .collect();
    assert!(energies.iter().all(|&e| e == m.energy.to_bits()));
}

#[test]
fn reduced_residual_examples() {
    let qs: Vec<f64> = (1..=101).map(|i| i as f64 / 102.0).collect();
    let free = mode(0.0, 1).unwrap();
    assert!(eigen_residual_reduced(&free, &qs, Derivative::Analytic).unwrap() < 1e-8);

    let h = 1.0 / 512.0;
    let interior: Vec<f64> = qs.iter().copied().filter(|q| q - 3.0 * h > 0.0).collect();
    let m = mode(2.0, 1).unwrap();
    let fd = eigen_residual_reduced(&m, &interior, Derivative::FiniteDifference { h }).unwrap();
    assert!(fd < 1e-6, "{fd}");

    let shifted = free.with_energy(free.energy + 0.1);
    assert!(eigen_residual_reduced(&shifted, &qs, Derivative::Analytic).unwrap() >= 0.05);
}

#[test]
fn unshifted_static_mode_is_a_sine() {
    let m = mode(0.0, 1).unwrap();
    let ts = static_box();
    let shift = ShiftConfig::unshifted();
    let ratio0 = wavefunction(&m, &ts, &shift, 0.0, 0.1).unwrap() / (0.1 * PI).sin();
    for i in 1..=9 {
        let x = i as f64 / 10.0;
        let r = wavefunction(&m, &ts, &shift, 0.0, x).unwrap() / (PI * x).sin();
        assert!((r - ratio0).norm() < 1e-10 * ratio0.norm());
    }
}

#[test]
fn shifted_endpoint_follows_sine_continuation() {
    let m = mode(0.0, 1).unwrap();
    let ts = static_box();
    let at_wall = wavefunction(&m, &ts, &ShiftConfig::shifted(0.1), 0.0, 0.0).unwrap();
    let mid = wavefunction(&m, &ts, &ShiftConfig::unshifted(), 0.0, 0.5).unwrap();
    let expected = Complex64::new(0.0, -(0.1 * PI).sinh());
    assert!((at_wall / mid - expected).norm() < 1e-12);
}

#[test]
fn field_vanishes_at_complex_wall_points() {
    let ts = sinusoidal();
    for g in [-0.25, 0.0, 2.0, 6.0] {
        for m in quantize(g, 5).unwrap() {
            let m = normalize(&m, &ts, &ShiftConfig::shifted(0.1), 0.6).unwrap();
            let f = ModeField::new(&m, &ts, 0.6).unwrap();
            let l = f.state().l;
            assert!(f.psi(Complex64::new(0.0, 0.0)).unwrap().norm() < 1e-12);
            let end = f.psi(Complex64::new(l, 0.0)).unwrap().norm();
            assert!(end < 1e-12, "g={g} k={} |Ψ(L)|={end}", m.k);
        }
    }
}

#[test]
fn unshifted_reduces_to_hermitian_construction() {
    let ts = sinusoidal();
    let m = mode(2.0, 2).unwrap();
    let t = 0.7;
    let s = ts.state(t).unwrap();
    let theta = m.energy * ts.inverse_square_integral(t).unwrap();
    for i in 1..10 {
        let x = s.l * i as f64 / 10.0;
        let q = x / s.l;
        let direct = (Complex64::i() * (0.5 * s.alpha * x * x - theta)).exp() * (q.sqrt() / s.l.sqrt())
            * bessel_j(m.nu, Complex64::new(m.energy.sqrt() * q, 0.0)).unwrap();
        let got = wavefunction(&m, &ts, &ShiftConfig::unshifted(), t, x).unwrap();
        assert!((got - direct).norm() < 1e-13, "x={x}");
    }
}

#[test]
fn closed_form_density_matches_product() {
    let m = mode(0.0, 1).unwrap();
    let mut worst: f64 = 0.0;
    for c in [0.0, 0.1, 0.5] {
        for i in 0..1000 {
            let x = i as f64 / 999.0;
            let a = density_closed_half(m.energy, 1.0, c, x);
            let b = r_density(m.nu, m.energy, 1.0, c, x).unwrap();
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn wall_density_examples() {
    let m = mode(0.0, 1).unwrap();
    let ts = static_box();
    let zero = wall_density(&m, &ts, &ShiftConfig::unshifted(), 0.0).unwrap();
    assert!(zero.r_part.0 < 1e-12 && zero.r_part.1 < 1e-12);
    assert!(zero.psi.0 < 1e-12 && zero.psi.1 < 1e-12);

    let small = wall_density(&m, &ts, &ShiftConfig::shifted(0.1), 0.0).unwrap();
    assert!((small.r_part.0 - 6.579e-3).abs() < 1e-6);
    assert!((small.r_part.0 - small.r_part.1).abs() < 1e-14);
    let large = wall_density(&m, &ts, &ShiftConfig::shifted(0.5), 0.0).unwrap();
    assert!(large.r_part.0 > small.r_part.0 && large.psi.1 > small.psi.1);
}

#[test]
fn density_is_even_in_shift() {
    let m = normalize(&mode(2.0, 1).unwrap(), &static_box(), &ShiftConfig::unshifted(), 0.0).unwrap();
    let ts = static_box();
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        let up = density(&m, &ts, &ShiftConfig::shifted(0.3), 0.4, x).unwrap();
        let down = density(&m, &ts, &ShiftConfig::shifted(-0.3), 0.4, x).unwrap();
        assert!((up - down).abs() < 1e-13, "x={x}");
    }
}

#[test]
fn unshifted_density_vanishes_at_walls() {
    let ts = static_box();
    let m = normalize(&mode(0.0, 1).unwrap(), &ts, &ShiftConfig::unshifted(), 0.0).unwrap();
    let shift = ShiftConfig::unshifted();
    assert!(density(&m, &ts, &shift, 0.0, 0.0).unwrap() < 1e-24);
    assert!(density(&m, &ts, &shift, 0.0, 1.0).unwrap() < 1e-24);
    let mid = density(&m, &ts, &shift, 0.0, 0.3).unwrap();
    assert!((mid - 2.0 * (0.3 * PI).sin().powi(2)).abs() < 1e-12);
}

#[test]
fn normalization_is_idempotent_and_unit() {
    let ts = sinusoidal();
    let shift = ShiftConfig::shifted(0.1);
    let once = normalize(&mode(6.0, 2).unwrap(), &ts, &shift, 0.5).unwrap();
    let twice = normalize(&once, &ts, &shift, 0.5).unwrap();
    assert!((once.norm - twice.norm).norm() < 1e-12 * once.norm.norm());

    let l = ts.length(0.5).unwrap();
    let f = |x: f64| Complex64::new(density(&once, &ts, &shift, 0.5, x).unwrap(), 0.0);
    let integral = composite(&f, 0.0, l, 64).unwrap().re;
    assert!((integral - 1.0).abs() < 1e-10, "{integral}");
}

#[test]
fn shifted_potential_is_pt_symmetric() {
    for i in 0..100 {
        let x = -3.0 + 6.0 * i as f64 / 99.0 + 1e-3;
        let v = shifted_potential(0.7, 2.0, 0.25, x);
        let mirrored = shifted_potential(0.7, 2.0, 0.25, -x).conj();
        assert!((v - mirrored).norm() <= 1e-14 * v.norm().max(1.0));
    }
}

#[test]
fn bessel_derivative_consistent_with_mode_derivatives() {
    let m = mode(0.0, 1).unwrap();
    let f = ModeField::new(&m, &static_box(), 0.0).unwrap();
    let z = Complex64::new(0.25, -0.1);
    let [_, d1, _] = f.derivatives(z).unwrap();
    let k = m.energy.sqrt();
    let w = z * k;
    let expected = 0.5 / z.sqrt() * bessel_j(m.nu, w).unwrap() + z.sqrt() * k * bessel_j_prime(m.nu, w).unwrap();
    assert!((d1 - expected).norm() < 1e-13);
}

#[test]
fn grid_field_json_mirror() {
    let m = mode(0.0, 1).unwrap();
    let g = GridField::sample(&m, &static_box(), &ShiftConfig::shifted(0.1), 0.0, 5).unwrap();
    let v: serde_json::Value = serde_json::from_str(&g.to_json().render()).unwrap();
    for key in ["t", "L", "c", "g", "k", "E", "x", "re_psi", "im_psi", "density"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["x"].as_array().unwrap().len(), 5);
    assert!(g.to_csv().starts_with("t,L,c,g,k,E\n"));
}

#[test]
fn conj_mode_names() {
    assert_eq!(ConjMode::ShiftThenConjugate.as_str(), "SHIFT_THEN_CONJUGATE");
    assert_eq!(ConjMode::ContinuedConjugate.as_str(), "CONTINUED_CONJUGATE");
}
