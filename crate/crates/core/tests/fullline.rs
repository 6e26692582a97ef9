// Reference values are quoted to more digits than f64 keeps.
#![allow(clippy::excessive_precision)]

use std::collections::BTreeSet;

use num_complex::Complex64;
use pttrap::fullline::{eigen_residual, znojil_energy, znojil_psi, FullLineMode, QuasiParity};
use pttrap::modes::Derivative;

const WINDOW: (f64, f64) = (-6.0, 6.0);

fn parities() -> [QuasiParity; 2] {
    [QuasiParity::Plus, QuasiParity::Minus]
}

#[test]
fn symbolic_oracle_value() {
    // mpmath: z^{-1} e^{-z²/2} L_1^{-3/2}(z²) at z = 1 − 0.5i
    let m = FullLineMode::new(1, QuasiParity::Plus, 1.5).unwrap();
    let got = znojil_psi(&m, Complex64::new(1.0, -0.5)).unwrap();
    let want = Complex64::new(-0.94326553025601200667, -0.28035971991340811591);
    assert!((got - want).norm() < 1e-12, "{got}");
}

#[test]
fn free_coupling_ladder_is_odd_integers() {
    let ladder = |nmax: usize| -> BTreeSet<i64> {
        (0..=nmax)
            .flat_map(|n| parities().map(|q| znojil_energy(n, q, 0.5)))
            .map(|e| {
                assert_eq!(e.fract(), 0.0);
                e as i64
            })
            .collect()
    };
    let low: Vec<i64> = ladder(2).into_iter().take(5).collect();
    assert_eq!(low, vec![1, 3, 5, 7, 9]);
    assert_eq!(ladder(4), (0..10).map(|m| 2 * m + 1).collect());
}

#[test]
fn analytic_residual_is_small() {
    for n in 0..=3 {
        for q in parities() {
            for beta in [0.5, 1.5] {
                let m = FullLineMode::new(n, q, beta).unwrap();
                let r = eigen_residual(&m, 0.5, WINDOW, 241, Derivative::Analytic).unwrap();
                assert!(r < 1e-8, "n={n} q={q:?} beta={beta} r={r}");
            }
        }
    }
}

#[test]
fn finite_difference_residual_is_small() {
    let m = FullLineMode::new(3, QuasiParity::Minus, 1.5).unwrap();
    let r = eigen_residual(&m, 0.5, WINDOW, 241, Derivative::FiniteDifference { h: 1.0 / 256.0 }).unwrap();
    assert!(r < 1e-6, "{r}");
}

#[test]
fn wrong_energy_is_detected() {
    let m = FullLineMode::new(0, QuasiParity::Plus, 0.5).unwrap();
    let good = eigen_residual(&m, 0.5, WINDOW, 241, Derivative::Analytic).unwrap();
    let bad = eigen_residual(&m.with_energy(m.energy + 0.5), 0.5, WINDOW, 241, Derivative::Analytic).unwrap();
    assert!(bad - good >= 0.1, "{bad}");
}

#[test]
fn residual_is_flat_in_shift() {
    let m = FullLineMode::new(2, QuasiParity::Minus, 1.5).unwrap();
    let rs: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&c| eigen_residual(&m, c, WINDOW, 241, Derivative::Analytic).unwrap().max(1e-16))
        .collect();
    let hi = rs.iter().cloned().fold(f64::MIN, f64::max);
    let lo = rs.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi < 1e-8 && hi / lo < 10.0, "{rs:?}");
}
