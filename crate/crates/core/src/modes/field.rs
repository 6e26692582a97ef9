use num_complex::Complex64;

use super::{check_branch, ModeError, ModeSpec, ShiftConfig};
use crate::specfun::{bessel_j, BesselOrder};
use crate::trapdyn::{phase_integral, ScaleState, TrapSchedule};

/// `[J_ν(w), J_ν′(w), J_ν″(w)]` from `J_ν` and `J_{ν+1}` by the recurrences
/// `J_ν′ = (ν/w)J_ν − J_{ν+1}` and `J_{ν+1}′ = J_ν − ((ν+1)/w)J_{ν+1}`.
pub(crate) fn bessel_with_derivatives(nu: BesselOrder, w: Complex64) -> Result<[Complex64; 3], ModeError> {
    let v = nu.value();
    let j = bessel_j(nu, w)?;
    let j1 = bessel_j(nu.raised(1), w)?;
    let jp = j * v / w - j1;
    let j1p = j - j1 * (v + 1.0) / w;
    let jpp = -j * v / (w * w) + jp * v / w - j1p;
    Ok([j, jp, jpp])
}

/// A mode frozen at one instant: the scale state and accumulated phase are
/// evaluated once, after which `Ψ(z)` and its derivatives are cheap.
#[derive(Debug, Clone)]
pub struct ModeField {
    mode: ModeSpec,
    state: ScaleState,
    theta: f64,
}

impl ModeField {
    pub fn new(mode: &ModeSpec, ts: &TrapSchedule, t: f64) -> Result<Self, ModeError> {
        let state = ts.state(t)?;
        let theta = phase_integral(ts, mode.energy, t)?;
        Ok(ModeField { mode: *mode, state, theta })
    }

    pub fn mode(&self) -> &ModeSpec {
        &self.mode
    }

    pub fn state(&self) -> &ScaleState {
        &self.state
    }

    /// `∫₀ᵗ E/L²`.
    pub fn phase(&self) -> f64 {
        self.theta
    }

    /// `N·L^{−1/2}·e^{−iθ}·exp(iαz²/2)`.
    fn envelope(&self, z: Complex64) -> Complex64 {
        let s = &self.state;
        let global = self.mode.norm * Complex64::from_polar(s.l.powf(-0.5), -self.theta);
        global * (Complex64::i() * 0.5 * s.alpha * z * z).exp()
    }

    /// `Ψ(z, t)` at a complex point.
    pub fn psi(&self, z: Complex64) -> Result<Complex64, ModeError> {
        check_branch(z)?;
        let l = self.state.l;
        let k = self.mode.wavenumber();
        let s = z / l;
        Ok(self.envelope(z) * s.sqrt() * bessel_j(self.mode.nu, s * k)?)
    }

    /// `conj(Ψ(conj z))`, the analytic continuation of `Ψ*` off the real axis.
    pub fn continued_conjugate(&self, z: Complex64) -> Result<Complex64, ModeError> {
        Ok(self.psi(z.conj())?.conj())
    }

    /// `[Ψ, ∂zΨ, ∂z²Ψ]`.
    pub fn derivatives(&self, z: Complex64) -> Result<[Complex64; 3], ModeError> {
        check_branch(z)?;
        if z == Complex64::new(0.0, 0.0) {
            return Err(ModeError::Branch(z));
        }
        let l = self.state.l;
        let alpha = self.state.alpha;
        let k = self.mode.wavenumber();
        let s = z / l;
        let [j, jp, jpp] = bessel_with_derivatives(self.mode.nu, s * k)?;
        let rs = s.sqrt();
        // R(z) = s^{1/2} J_ν(ks), s = z/L
        let r = rs * j;
        let r1 = (0.5 * j / rs + rs * k * jp) / l;
        let r2 = (-0.25 * j / (rs * s) + k * jp / rs + rs * k * k * jpp) / (l * l);
        let iaz = Complex64::i() * alpha * z;
        let g1 = iaz;
        let g2 = Complex64::i() * alpha + iaz * iaz;
        let env = self.envelope(z);
        Ok([env * r, env * (g1 * r + r1), env * (g2 * r + 2.0 * g1 * r1 + r2)])
    }

    /// `HΨ = −∂z²Ψ + (ω²z² + g/z²)Ψ`.
    pub fn h_psi(&self, z: Complex64) -> Result<Complex64, ModeError> {
        let [p, _, p2] = self.derivatives(z)?;
        Ok(-p2 + super::potential(self.state.omega2, self.mode.g, z) * p)
    }

    /// `∂tΨ` at fixed z, from the scale-state derivatives.
    pub fn dt_psi(&self, z: Complex64) -> Result<Complex64, ModeError> {
        check_branch(z)?;
        if z == Complex64::new(0.0, 0.0) {
            return Err(ModeError::Branch(z));
        }
        let st = &self.state;
        let k = self.mode.wavenumber();
        let s = z / st.l;
        let [j, jp, _] = bessel_with_derivatives(self.mode.nu, s * k)?;
        let rs = s.sqrt();
        let r = rs * j;
        let dr_ds = 0.5 * j / rs + rs * k * jp;
        let log_rate = Complex64::i() * (0.5 * st.alpha_dot * z * z - self.mode.energy / (st.l * st.l))
            - 0.5 * st.ldot / st.l;
        let dr_dt = dr_ds * (-s * st.ldot / st.l);
        Ok(self.envelope(z) * (log_rate * r + dr_dt))
    }

    /// `iΨ_t − HΨ`; zero for an exact solution.
    pub fn schrodinger_defect(&self, z: Complex64) -> Result<Complex64, ModeError> {
        Ok(Complex64::i() * self.dt_psi(z)? - self.h_psi(z)?)
    }
}

/// `Ψ(x − ic, t)`.
pub fn wavefunction(
    mode: &ModeSpec,
    ts: &TrapSchedule,
    shift: &ShiftConfig,
    t: f64,
    x: f64,
) -> Result<Complex64, ModeError> {
    ModeField::new(mode, ts, t)?.psi(shift.point(x))
}
