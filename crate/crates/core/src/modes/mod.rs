//! Trapped modes of the generalized oscillator `ω²(t)x² + g/x²` in a box
//! with a moving wall, and their complex-shifted continuation `x → x − ic`.
//!
//! A mode is fixed by the coupling g (order `ν = ½√(1+4g)`) and a root index
//! k; its separation constant is `E = j_{ν,k}²`. The time-dependent field is
//!
//! ```text
//! Ψ(z, t) = N · exp(iα z²/2 − i∫E/L²) · L^{−1/2} · (z/L)^{1/2} J_ν(√E z/L),   z = x − ic
//! ```
//!
//! which vanishes at the complex wall points z = 0 and z = L(t).

mod density;
mod field;
mod grid;

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::QuadratureError;
use crate::specfun::{bessel_j, bessel_roots, BesselOrder, SpecFunError};
use crate::trapdyn::{ScaleError, TrapSchedule};

pub use density::{
    density, density_closed_general, density_closed_half, normalize, r_density, r_part, wall_density, WallDensity,
};
pub use field::{wavefunction, ModeField};
pub use grid::{GridField, GridMeta};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error("g below -1/4 (got {0}); the Bessel order would be imaginary")]
    CouplingBelowBound(f64),
    #[error("mode count must be at least 1")]
    EmptyCount,
    #[error("z = {0} lies on the branch cut of the principal square root")]
    Branch(Complex64),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid mode: {0}")]
    InvalidMode(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// `ν = ½√(1+4g)`.
pub fn order_from_coupling(g: f64) -> Result<BesselOrder, ModeError> {
    if !g.is_finite() {
        return Err(ModeError::InvalidMode(format!("g must be finite, got {g}")));
    }
    if g < -0.25 {
        return Err(ModeError::CouplingBelowBound(g));
    }
    Ok(BesselOrder::new(0.5 * (1.0 + 4.0 * g).sqrt())?)
}

/// One trapped mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub g: f64,
    pub nu: BesselOrder,
    /// Root index, starting at 1.
    pub k: usize,
    /// Zero `j_{ν,k}` fixing the spatial profile.
    pub root: f64,
    /// Separation constant, `j_{ν,k}²` for a quantized mode.
    pub energy: f64,
    pub norm: Complex64,
}

impl ModeSpec {
    pub fn id(&self) -> String {
        format!("g={},k={}", self.g, self.k)
    }

    /// `j_{ν,k}`, the wavenumber of the profile in box units.
    pub fn wavenumber(&self) -> f64 {
        self.root
    }

    /// Same profile with a different claimed separation constant; the result
    /// is no longer a solution unless `energy = root²`.
    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = energy;
        self
    }

    pub fn with_norm(mut self, norm: Complex64) -> Self {
        self.norm = norm;
        self
    }
}

/// `E_k = j_{ν,k}²` for k = 1..=count, with N = 1 (see [`normalize`]).
pub fn quantize(g: f64, count: usize) -> Result<Vec<ModeSpec>, ModeError> {
    if count == 0 {
        return Err(ModeError::EmptyCount);
    }
    let nu = order_from_coupling(g)?;
    let table = bessel_roots(nu, count)?;
    Ok(table
        .roots
        .iter()
        .enumerate()
        .map(|(i, &j)| ModeSpec { g, nu, k: i + 1, root: j, energy: j * j, norm: Complex64::new(1.0, 0.0) })
        .collect())
}

/// The single mode `(g, k)`.
pub fn mode(g: f64, k: usize) -> Result<ModeSpec, ModeError> {
    if k == 0 {
        return Err(ModeError::InvalidMode("root index starts at 1".into()));
    }
    Ok(quantize(g, k)?[k - 1])
}

pub(crate) fn check_branch(z: Complex64) -> Result<(), ModeError> {
    if z.im == 0.0 && z.re < 0.0 {
        Err(ModeError::Branch(z))
    } else {
        Ok(())
    }
}

/// Reduced stationary mode `Φ(q) = q^{1/2} J_ν(√E q)` (principal branch).
pub fn reduced_mode(mode: &ModeSpec, q: Complex64) -> Result<Complex64, ModeError> {
    check_branch(q)?;
    Ok(q.sqrt() * bessel_j(mode.nu, q * mode.wavenumber())?)
}

/// `Φ, Φ′, Φ″` of the reduced mode from Bessel recurrences (no use of the
/// eigen-equation itself).
pub fn reduced_derivatives(mode: &ModeSpec, q: Complex64) -> Result<[Complex64; 3], ModeError> {
    check_branch(q)?;
    if q == Complex64::new(0.0, 0.0) {
        return Err(ModeError::Branch(q));
    }
    let k = mode.wavenumber();
    let [j, jp, jpp] = field::bessel_with_derivatives(mode.nu, q * k)?;
    let rq = q.sqrt();
    let phi = rq * j;
    let d1 = 0.5 * j / rq + rq * k * jp;
    let d2 = -0.25 * j / (rq * q) + k * jp / rq + rq * k * k * jpp;
    Ok([phi, d1, d2])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Derivative {
    /// Bessel-recurrence derivatives.
    Analytic,
    /// Sixth-order central differences at spacing `h`.
    FiniteDifference { h: f64 },
}

pub(crate) const FD6: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];

/// `sup_q |−Φ″ + (g/q²)Φ − EΦ| / max|Φ|` over the sample points.
pub fn eigen_residual_reduced(mode: &ModeSpec, qs: &[f64], derivative: Derivative) -> Result<f64, ModeError> {
    if qs.is_empty() {
        return Err(ModeError::Grid("no sample points".into()));
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &q in qs {
        if !(q > 0.0) {
            return Err(ModeError::Grid(format!("q = {q} is not interior")));
        }
        let qc = Complex64::new(q, 0.0);
        let (phi, d2) = match derivative {
            Derivative::Analytic => {
                let [p, _, dd] = reduced_derivatives(mode, qc)?;
                (p, dd)
            }
            Derivative::FiniteDifference { h } => {
                if q - 3.0 * h <= 0.0 {
                    return Err(ModeError::Grid(format!("stencil at q = {q} leaves the domain")));
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, w) in FD6.iter().enumerate() {
                    let qi = q + (i as f64 - 3.0) * h;
                    acc += reduced_mode(mode, Complex64::new(qi, 0.0))? * *w;
                }
                (reduced_mode(mode, qc)?, acc / (h * h))
            }
        };
        let r = -d2 + phi * (mode.g / (q * q) - mode.energy);
        worst = worst.max(r.norm());
        scale = scale.max(phi.norm());
    }
    Ok(worst / scale)
}

/// Complex-shifted generalized oscillator potential `ω²z² + g/z²`.
pub fn potential(omega2: f64, g: f64, z: Complex64) -> Complex64 {
    let z2 = z * z;
    z2 * omega2 + g / z2
}

/// `V(x) = ω²(x − ic)² + g/(x − ic)²` on the real line.
pub fn shifted_potential(omega2: f64, g: f64, c: f64, x: f64) -> Complex64 {
    potential(omega2, g, Complex64::new(x, -c))
}

/// How `Ψ*` is read on the shifted line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjMode {
    /// Conjugate the sampled values: `conj(Ψ(x − ic))`.
    ShiftThenConjugate,
    /// Analytic continuation of the real-axis conjugate: `conj(Ψ(x + ic))`.
    ContinuedConjugate,
}

impl ConjMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ConjMode::ShiftThenConjugate => "SHIFT_THEN_CONJUGATE",
            ConjMode::ContinuedConjugate => "CONTINUED_CONJUGATE",
        }
    }
}

impl std::str::FromStr for ConjMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "SHIFT_THEN_CONJUGATE" | "SHIFT" => Ok(ConjMode::ShiftThenConjugate),
            "CONTINUED_CONJUGATE" | "CONTINUED" => Ok(ConjMode::ContinuedConjugate),
            other => Err(format!("unknown conjugation mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftConfig {
    pub c: f64,
    pub conj_mode: ConjMode,
}

impl ShiftConfig {
    pub fn new(c: f64, conj_mode: ConjMode) -> Result<Self, ModeError> {
        if !c.is_finite() {
            return Err(ModeError::InvalidMode(format!("shift c must be finite, got {c}")));
        }
        Ok(ShiftConfig { c, conj_mode })
    }

    pub fn unshifted() -> Self {
        ShiftConfig { c: 0.0, conj_mode: ConjMode::ShiftThenConjugate }
    }

    pub fn shifted(c: f64) -> Self {
        ShiftConfig { c, conj_mode: ConjMode::ShiftThenConjugate }
    }

    /// `z = x − ic`.
    pub fn point(&self, x: f64) -> Complex64 {
        Complex64::new(x, -self.c)
    }
}

/// Box walls in the complex x-plane, at `x = ic` and `x = L + ic`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapBox {
    pub left: Complex64,
    pub right: Complex64,
}

impl TrapBox {
    pub fn at(ts: &TrapSchedule, shift: &ShiftConfig, t: f64) -> Result<Self, ModeError> {
        let l = ts.length(t)?;
        Ok(TrapBox { left: Complex64::new(0.0, shift.c), right: Complex64::new(l, shift.c) })
    }

    /// `(L + ic) − (0 + ic)`; the imaginary part cancels exactly.
    pub fn length(&self) -> Complex64 {
        self.right - self.left
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn order_from_coupling_values() {
        assert_eq!(order_from_coupling(0.0).unwrap().value(), 0.5);
        assert_eq!(order_from_coupling(2.0).unwrap().value(), 1.5);
        assert_eq!(order_from_coupling(-0.25).unwrap().value(), 0.0);
        let err = order_from_coupling(-0.5).unwrap_err();
        assert!(err.to_string().contains("g below -1/4"));
    }

    #[test]
    fn quantize_free_coupling() {
        let modes = quantize(0.0, 2).unwrap();
        assert!((modes[0].energy - PI * PI).abs() < 1e-11);
        assert!((modes[1].energy - 4.0 * PI * PI).abs() < 1e-11);
        let phi1 = reduced_mode(&modes[0], Complex64::new(1.0, 0.0)).unwrap();
        assert!(phi1.norm() < 1e-12);
        assert!(matches!(quantize(0.0, 0), Err(ModeError::EmptyCount)));
        assert!(matches!(mode(0.0, 0), Err(ModeError::InvalidMode(_))));
    }

    #[test]
    fn reduced_mode_values() {
        let m = mode(0.0, 1).unwrap();
        let v = reduced_mode(&m, Complex64::new(0.5, 0.0)).unwrap();
        // √(1/2)·√(2/(π·π/2))·sin(π/2) = √2/π
        assert!((v.re - 2f64.sqrt() / PI).abs() < 1e-10 && v.im.abs() < 1e-15);
        let tiny = reduced_mode(&m, Complex64::new(1e-8, 0.0)).unwrap();
        assert!(tiny.norm() < 1e-3);
        assert!(matches!(reduced_mode(&m, Complex64::new(-0.5, 0.0)), Err(ModeError::Branch(_))));
    }

    #[test]
    fn residual_detects_wrong_energy() {
        let m = mode(0.0, 1).unwrap();
        let qs: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let good = eigen_residual_reduced(&m, &qs, Derivative::Analytic).unwrap();
        assert!(good < 1e-8, "{good}");
        let bad = eigen_residual_reduced(&m.with_energy(m.energy + 0.1), &qs, Derivative::Analytic).unwrap();
        assert!(bad >= 0.05, "{bad}");
    }

    #[test]
    fn box_length_is_real() {
        let ts = TrapSchedule::static_wall(1.7, 1.0).unwrap();
        let b = TrapBox::at(&ts, &ShiftConfig::shifted(0.37), 0.5).unwrap();
        assert_eq!(b.length().im, 0.0);
        assert_eq!(b.length().re, 1.7);
    }

    #[test]
    fn conj_mode_parses() {
        assert_eq!("continued".parse::<ConjMode>().unwrap(), ConjMode::ContinuedConjugate);
        assert_eq!("SHIFT_THEN_CONJUGATE".parse::<ConjMode>().unwrap(), ConjMode::ShiftThenConjugate);
        assert!("other".parse::<ConjMode>().is_err());
    }
}
