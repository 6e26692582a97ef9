//! Inner products and expectation values on the shifted line `z = x − ic`,
//! `x ∈ [0, L]`.

use num_complex::Complex64;
use thiserror::Error;

use crate::io::Json;
use crate::modes::{ConjMode, ModeError, ModeField, ModeSpec, ShiftConfig};
use crate::quadrature::{integrate_adaptive, Quadrature, QuadratureError};
use crate::trapdyn::TrapSchedule;

/// Absolute tolerance between successive panel doublings.
pub const QUAD_TOL: f64 = 1e-10;

pub const MAX_PANELS: usize = 1 << 12;

/// Accepted deviation of `∫|Ψ|²` from 1 for a normalized mode.
pub const NORM_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObservableError {
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("mode is not normalized: integral of |psi|^2 = {0}")]
    Unnormalized(f64),
}

/// `∫₀ᴸ conj(f)·g dx`, panel-doubled until successive estimates differ by `< tol`.
pub fn inner<F, G>(f: F, g: G, l: f64, tol: f64) -> Result<Quadrature, QuadratureError>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    pairing(|x| f(x).conj(), g, l, tol)
}

/// `∫₀ᴸ bra·ket dx` with `bra` already conjugated.
pub fn pairing<F, G>(bra: F, ket: G, l: f64, tol: f64) -> Result<Quadrature, QuadratureError>
where
    F: Fn(f64) -> Complex64,
    G: Fn(f64) -> Complex64,
{
    integrate_adaptive(&|x: f64| bra(x) * ket(x), 0.0, l, tol, MAX_PANELS)
}

fn or_nan(v: Result<Complex64, ModeError>) -> Complex64 {
    v.unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// `[−∂x² + ω²z² + g/z²]Ψ` at `z = x − ic`, with analytic derivatives.
pub fn apply_h(mode: &ModeSpec, ts: &TrapSchedule, shift: &ShiftConfig, t: f64, x: f64) -> Result<Complex64, ModeError> {
    ModeField::new(mode, ts, t)?.h_psi(shift.point(x))
}

/// `V(x+ic) − V(x−ic) − 4iω²cx` for g = 0.
pub fn shift_identity(omega2: f64, c: f64, x: f64) -> Complex64 {
    let up = crate::modes::shifted_potential(omega2, 0.0, -c, x);
    let down = crate::modes::shifted_potential(omega2, 0.0, c, x);
    up - down - Complex64::new(0.0, 4.0 * omega2 * c * x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableReport {
    pub mode: String,
    pub t: f64,
    pub c: f64,
    pub omega2: f64,
    pub conj_mode: ConjMode,
    pub norm: Complex64,
    pub exp_h: Complex64,
    pub exp_x: Complex64,
    /// Largest change at the accepted panel doubling over the three integrals.
    pub quad_change: f64,
}

impl ObservableReport {
    /// `⟨H⟩ + 4iω²c⟨x⟩`.
    pub fn combo(&self) -> Complex64 {
        self.exp_h + Complex64::new(0.0, 4.0 * self.omega2 * self.c) * self.exp_x
    }

    pub fn im_residual(&self) -> f64 {
        let combo = self.combo();
        combo.im.abs() / combo.norm().max(1e-30)
    }

    pub fn to_json(&self) -> Json {
        let combo = self.combo();
        Json::object()
            .with("mode", self.mode.as_str())
            .with("t", self.t)
            .with("c", self.c)
            .with("conj_mode", self.conj_mode.as_str())
            .with("norm_re", self.norm.re)
            .with("norm_im", self.norm.im)
            .with("H_re", self.exp_h.re)
            .with("H_im", self.exp_h.im)
            .with("x_re", self.exp_x.re)
            .with("x_im", self.exp_x.im)
            .with("combo_re", combo.re)
            .with("combo_im", combo.im)
            .with("im_residual", self.im_residual())
    }
}

/// Norm, `⟨H⟩` and `⟨x⟩` with the bra chosen by `shift.conj_mode`.
pub fn expectation_report(
    mode: &ModeSpec,
    ts: &TrapSchedule,
    shift: &ShiftConfig,
    t: f64,
) -> Result<ObservableReport, ObservableError> {
    let field = ModeField::new(mode, ts, t)?;
    let l = field.state().l;
    let c = shift.c;
    let psi = |x: f64| or_nan(field.psi(Complex64::new(x, -c)));

    let sampled = pairing(|x| psi(x).conj(), psi, l, QUAD_TOL)?;
    if (sampled.value.re - 1.0).abs() > NORM_CHECK_TOL {
        return Err(ObservableError::Unnormalized(sampled.value.re));
    }

    let bra = |x: f64| match shift.conj_mode {
        ConjMode::ShiftThenConjugate => psi(x).conj(),
        ConjMode::ContinuedConjugate => or_nan(field.continued_conjugate(Complex64::new(x, -c))),
    };
    let norm = match shift.conj_mode {
        ConjMode::ShiftThenConjugate => sampled,
        ConjMode::ContinuedConjugate => pairing(bra, psi, l, QUAD_TOL)?,
    };
    let h = pairing(bra, |x| or_nan(field.h_psi(Complex64::new(x, -c))), l, QUAD_TOL)?;
    let xq = pairing(bra, |x| psi(x) * x, l, QUAD_TOL)?;
    Ok(ObservableReport {
        mode: mode.id(),
        t,
        c,
        omega2: field.state().omega2,
        conj_mode: shift.conj_mode,
        norm: norm.value,
        exp_h: h.value / norm.value,
        exp_x: xq.value / norm.value,
        quad_change: norm.change.max(h.change).max(xq.change),
    })
}

/// `|Im ∫₀ᴸ conj(Ψ)·HΨ dx|` on the unshifted line.
pub fn hermitian_reality_check(mode: &ModeSpec, ts: &TrapSchedule, t: f64) -> Result<f64, ObservableError> {
    let field = ModeField::new(mode, ts, t)?;
    let real = |x: f64| Complex64::new(x, 0.0);
    let q = inner(|x| or_nan(field.psi(real(x))), |x| or_nan(field.h_psi(real(x))), field.state().l, QUAD_TOL)?;
    Ok(q.value.im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_inner_products() {
        let s = |k: f64| move |x: f64| Complex64::new(2f64.sqrt() * (k * PI * x).sin(), 0.0);
        let one = inner(s(1.0), s(1.0), 1.0, 1e-13).unwrap().value;
        assert!((one - 1.0).norm() < 1e-12);
        let zero = inner(s(1.0), s(2.0), 1.0, 1e-13).unwrap().value;
        assert!(zero.norm() < 1e-12);
    }

    #[test]
    fn shift_identity_is_exact_example() {
        assert!(shift_identity(1.0, 0.5, 2.0).norm() < 1e-15);
        assert_eq!(shift_identity(0.0, 0.3, -1.2), Complex64::new(0.0, 0.0));
    }
}
