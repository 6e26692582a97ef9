use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_branch, ModeError, ModeField, ModeSpec, ShiftConfig};
use crate::quadrature::integrate_adaptive;
use crate::specfun::{bessel_j, BesselOrder};
use crate::trapdyn::TrapSchedule;

/// Panel cap for the normalization integral.
pub(crate) const NORM_MAX_PANELS: usize = 1 << 12;

/// Relative accuracy of the normalization integral.
pub(crate) const NORM_REL_TOL: f64 = 1e-14;

/// `|Ψ(x − ic)|²`, by direct product with the conjugate.
pub fn density(mode: &ModeSpec, ts: &TrapSchedule, shift: &ShiftConfig, t: f64, x: f64) -> Result<f64, ModeError> {
    let psi = ModeField::new(mode, ts, t)?.psi(shift.point(x))?;
    Ok((psi * psi.conj()).re)
}

/// Unnormalized radial part `w^{1/2} J_ν(w) / √E` with `w = √E z / L`.
pub fn r_part(nu: BesselOrder, energy: f64, l: f64, z: Complex64) -> Result<Complex64, ModeError> {
    check_branch(z)?;
    let k = energy.sqrt();
    let w = z * (k / l);
    Ok(w.sqrt() * bessel_j(nu, w)? / k)
}

/// `|R(x − ic)|²` by direct product.
pub fn r_density(nu: BesselOrder, energy: f64, l: f64, c: f64, x: f64) -> Result<f64, ModeError> {
    let r = r_part(nu, energy, l, Complex64::new(x, -c))?;
    Ok((r * r.conj()).re)
}

/// `(cosh(2√E c/L) − cos(2√E x/L)) / (Eπ)`, the ν = ½ radial density.
pub fn density_closed_half(energy: f64, l: f64, c: f64, x: f64) -> f64 {
    let k = energy.sqrt();
    ((2.0 * k * c / l).cosh() - (2.0 * k * x / l).cos()) / (energy * PI)
}

/// `(√(x²+c²)/L) · J_ν(√E(x−ic)/L) · J_ν(√E(x+ic)/L)` for general ν.
pub fn density_closed_general(nu: BesselOrder, energy: f64, l: f64, c: f64, x: f64) -> Result<f64, ModeError> {
    let k = energy.sqrt() / l;
    let a = bessel_j(nu, Complex64::new(x, -c) * k)?;
    let b = bessel_j(nu, Complex64::new(x, c) * k)?;
    Ok((x.hypot(c) / l * (a * b)).re)
}

/// Densities at the two real-axis endpoints `x = 0` and `x = L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallDensity {
    /// Unnormalized radial part `|R|²`.
    pub r_part: (f64, f64),
    /// Full wavefunction `|Ψ|²` with the mode's current N.
    pub psi: (f64, f64),
}

pub fn wall_density(mode: &ModeSpec, ts: &TrapSchedule, shift: &ShiftConfig, t: f64) -> Result<WallDensity, ModeError> {
    let field = ModeField::new(mode, ts, t)?;
    let l = field.state().l;
    let at = |x: f64| -> Result<(f64, f64), ModeError> {
        let z = shift.point(x);
        let r = r_part(mode.nu, mode.energy, l, z)?;
        let p = field.psi(z)?;
        Ok((r.norm_sqr(), p.norm_sqr()))
    };
    let (r0, p0) = at(0.0)?;
    let (r1, p1) = at(l)?;
    Ok(WallDensity { r_part: (r0, r1), psi: (p0, p1) })
}

/// `∫₀ᴸ |Ψ(x − ic)|² dx` for a frozen field.
pub(crate) fn norm_integral(field: &ModeField, c: f64) -> Result<f64, ModeError> {
    let l = field.state().l;
    let f = |x: f64| {
        let p = field.psi(Complex64::new(x, -c)).unwrap_or(Complex64::new(f64::NAN, 0.0));
        Complex64::new(p.norm_sqr(), 0.0)
    };
    let coarse = crate::quadrature::composite(&f, 0.0, l, 1)?.re.abs();
    let tol = NORM_REL_TOL * coarse.max(f64::MIN_POSITIVE);
    Ok(integrate_adaptive(&f, 0.0, l, tol, NORM_MAX_PANELS)?.value.re)
}

/// The mode rescaled so that `∫₀ᴸ |Ψ(x − ic)|² dx = 1`, with N real and positive.
pub fn normalize(mode: &ModeSpec, ts: &TrapSchedule, shift: &ShiftConfig, t: f64) -> Result<ModeSpec, ModeError> {
    let unit = mode.with_norm(Complex64::new(1.0, 0.0));
    let field = ModeField::new(&unit, ts, t)?;
    let integral = norm_integral(&field, shift.c)?;
    if !(integral > 0.0) {
        return Err(ModeError::InvalidMode(format!("norm integral {integral} is not positive")));
    }
    Ok(mode.with_norm(Complex64::new(integral.sqrt().recip(), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::mode;

    #[test]
    fn closed_half_examples() {
        assert_eq!(density_closed_half(PI * PI, 1.0, 0.0, 0.0), 0.0);
        let expected = ((0.2 * PI).cosh() - 1.0) / (PI * PI * PI);
        assert!((density_closed_half(PI * PI, 1.0, 0.1, 0.0) - expected).abs() < 1e-15);
        assert!((expected - 6.579e-3).abs() < 1e-6);
        let mid = ((0.2 * PI).cosh() + 1.0) / (PI * PI * PI);
        assert!((density_closed_half(PI * PI, 1.0, 0.1, 0.5) - mid).abs() < 1e-15);
        assert!((mid - 7.108e-2).abs() < 1e-5);
    }

    #[test]
    fn closed_general_matches_half() {
        let nu = BesselOrder::new(0.5).unwrap();
        for &x in &[0.0, 0.3, 0.77] {
            let a = density_closed_general(nu, PI * PI, 1.0, 0.2, x).unwrap();
            let b = r_density(nu, PI * PI, 1.0, 0.2, x).unwrap() * PI;
            assert!((a - b).abs() < 1e-13, "{a} {b}");
        }
    }

    #[test]
    fn normalize_sine_mode() {
        let m = mode(0.0, 1).unwrap();
        let ts = TrapSchedule::static_wall(2.0, 1.0).unwrap();
        let n = normalize(&m, &ts, &ShiftConfig::unshifted(), 0.0).unwrap();
        // Ψ = N L^{-1/2} (√2/π) sin(πx/L), so the sine amplitude is N√2/(π√L)
        let amp = n.norm.re * 2f64.sqrt() / (PI * 2f64.sqrt());
        assert!((amp - 1.0).abs() < 1e-12, "{amp}");
        assert!(n.norm.im == 0.0);
    }
}
