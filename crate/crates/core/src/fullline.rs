//! Untrapped reference solutions of the shifted oscillator
//! `−ψ″ + (z² + g/z²)ψ = Eψ`, `g = β² − ¼`, on the line `z = x − ic`:
//!
//! ```text
//! ψ(z) = z^{1/2 − qβ} e^{−z²/2} L_n^{−qβ}(z²),   E = 4n + 2 − 2qβ
//! ```

use num_complex::Complex64;
use thiserror::Error;

use crate::modes::{Derivative, FD6};
use crate::specfun::{laguerre, laguerre_prime, laguerre_second};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FullLineError {
    #[error("beta must be finite and >= 0, got {0}")]
    InvalidBeta(f64),
    #[error("quasi-parity must be +1 or -1, got {0}")]
    InvalidParity(i64),
    #[error("z = {0} lies on the branch cut")]
    Branch(Complex64),
    #[error("invalid window: {0}")]
    Window(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuasiParity {
    Plus,
    Minus,
}

impl QuasiParity {
    pub fn sign(self) -> f64 {
        match self {
            QuasiParity::Plus => 1.0,
            QuasiParity::Minus => -1.0,
        }
    }
}

impl TryFrom<i64> for QuasiParity {
    type Error = FullLineError;

    fn try_from(q: i64) -> Result<Self, Self::Error> {
        match q {
            1 => Ok(QuasiParity::Plus),
            -1 => Ok(QuasiParity::Minus),
            other => Err(FullLineError::InvalidParity(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullLineMode {
    pub n: usize,
    pub qp: QuasiParity,
    pub beta: f64,
    pub energy: f64,
}

impl FullLineMode {
    pub fn new(n: usize, qp: QuasiParity, beta: f64) -> Result<Self, FullLineError> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(FullLineError::InvalidBeta(beta));
        }
        Ok(FullLineMode { n, qp, beta, energy: znojil_energy(n, qp, beta) })
    }

    /// `g = β² − ¼`.
    pub fn coupling(&self) -> f64 {
        self.beta * self.beta - 0.25
    }

    /// Laguerre parameter `−qβ`.
    fn lag_beta(&self) -> f64 {
        -self.qp.sign() * self.beta
    }

    /// Power `1/2 − qβ`.
    fn exponent(&self) -> f64 {
        0.5 + self.lag_beta()
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = energy;
        self
    }
}

/// `E = 4n + 2 − 2qβ`.
pub fn znojil_energy(n: usize, qp: QuasiParity, beta: f64) -> f64 {
    4.0 * n as f64 + 2.0 - 2.0 * qp.sign() * beta
}

fn check(z: Complex64) -> Result<(), FullLineError> {
    if z.im == 0.0 && z.re <= 0.0 {
        Err(FullLineError::Branch(z))
    } else {
        Ok(())
    }
}

pub fn znojil_psi(mode: &FullLineMode, z: Complex64) -> Result<Complex64, FullLineError> {
    check(z)?;
    let u = z * z;
    Ok(z.powf(mode.exponent()) * (-0.5 * u).exp() * laguerre(mode.n, mode.lag_beta(), u))
}

/// `[ψ, ψ′, ψ″]` by the product rule with Laguerre derivative identities.
pub fn znojil_derivatives(mode: &FullLineMode, z: Complex64) -> Result<[Complex64; 3], FullLineError> {
    check(z)?;
    let s = mode.exponent();
    let b = mode.lag_beta();
    let u = z * z;
    let p = z.powf(s);
    let p1 = p * s / z;
    let p2 = p * (s * (s - 1.0)) / u;
    let g = (-0.5 * u).exp();
    let g1 = -z * g;
    let g2 = (u - 1.0) * g;
    let f = laguerre(mode.n, b, u);
    let fu = laguerre_prime(mode.n, b, u);
    let f1 = 2.0 * z * fu;
    let f2 = 2.0 * fu + 4.0 * u * laguerre_second(mode.n, b, u);
    let psi = p * g * f;
    let d1 = p1 * g * f + p * g1 * f + p * g * f1;
    let d2 = p2 * g * f + p * g2 * f + p * g * f2 + 2.0 * (p1 * g1 * f + p1 * g * f1 + p * g1 * f1);
    Ok([psi, d1, d2])
}

/// `sup |−ψ″ + (z² + g/z²)ψ − Eψ| / max|ψ|` over `points` evenly spaced
/// abscissae of the window on the line `z = x − ic`.
pub fn eigen_residual(
    mode: &FullLineMode,
    c: f64,
    window: (f64, f64),
    points: usize,
    derivative: Derivative,
) -> Result<f64, FullLineError> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && b > a) || points < 2 {
        return Err(FullLineError::Window(format!("[{a}, {b}] with {points} points")));
    }
    let g = mode.coupling();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..points {
        let x = a + (b - a) * i as f64 / (points - 1) as f64;
        let z = Complex64::new(x, -c);
        let (psi, d2) = match derivative {
            Derivative::Analytic => {
                let [p, _, dd] = znojil_derivatives(mode, z)?;
                (p, dd)
            }
            Derivative::FiniteDifference { h } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, w) in FD6.iter().enumerate() {
                    acc += znojil_psi(mode, z + (j as f64 - 3.0) * h)? * *w;
                }
                (znojil_psi(mode, z)?, acc / (h * h))
            }
        };
        let r = -d2 + (z * z + g / (z * z) - mode.energy) * psi;
        worst = worst.max(r.norm());
        scale = scale.max(psi.norm());
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_states() {
        let plus = FullLineMode::new(0, QuasiParity::Plus, 0.5).unwrap();
        let minus = FullLineMode::new(0, QuasiParity::Minus, 0.5).unwrap();
        let z = Complex64::new(0.7, -0.5);
        let gauss = (-0.5 * z * z).exp();
        assert!((znojil_psi(&plus, z).unwrap() - gauss).norm() < 1e-15);
        assert!((znojil_psi(&minus, z).unwrap() - z * gauss).norm() < 1e-15);
        assert_eq!(plus.energy, 1.0);
        assert_eq!(minus.energy, 3.0);
        assert_eq!(znojil_energy(2, QuasiParity::Plus, 0.5), 9.0);
    }

    #[test]
    fn derivatives_match_differences() {
        let m = FullLineMode::new(3, QuasiParity::Minus, 1.5).unwrap();
        let z = Complex64::new(-1.3, -0.5);
        let [_, d1, _] = znojil_derivatives(&m, z).unwrap();
        let h = 1e-6;
        let fd = (znojil_psi(&m, z + h).unwrap() - znojil_psi(&m, z - h).unwrap()) / (2.0 * h);
        assert!((d1 - fd).norm() < 1e-7 * d1.norm().max(1.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(FullLineMode::new(0, QuasiParity::Plus, -1.0).is_err());
        assert!(QuasiParity::try_from(0).is_err());
        let m = FullLineMode::new(0, QuasiParity::Plus, 0.5).unwrap();
        assert!(znojil_psi(&m, Complex64::new(-1.0, 0.0)).is_err());
    }
}
