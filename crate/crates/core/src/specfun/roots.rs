//! Positive real zeros of `J_ν`.

use num_complex::Complex64;

use super::bessel::{bessel_j, bessel_j_prime};
use super::{BesselOrder, SpecFunError};

pub const MAX_ROOT_COUNT: usize = 1000;

/// Target for both |J_ν(root)| and the final bracket width.
pub const ROOT_TOL: f64 = 1e-12;

/// Scan step. Consecutive zeros of J_ν (ν ≥ 0) are more than 2.9 apart, so
/// a step below that isolates each root in its own bracket.
const SCAN_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct RootTable {
    pub nu: f64,
    pub roots: Vec<f64>,
    pub refine_tol: f64,
}

impl RootTable {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

fn j_real(nu: BesselOrder, x: f64) -> Result<f64, SpecFunError> {
    Ok(bessel_j(nu, Complex64::new(x, 0.0))?.re)
}

/// First `count` positive zeros `j_{ν,1} < j_{ν,2} < …`.
pub fn bessel_roots(nu: BesselOrder, count: usize) -> Result<RootTable, SpecFunError> {
    if count == 0 || count > MAX_ROOT_COUNT {
        return Err(SpecFunError::RootCount(count));
    }
    let mut roots = Vec::with_capacity(count);
    // J_ν has no zero in (0, ν], and is positive just above the origin
    let mut a = nu.value().max(SCAN_STEP);
    let mut fa = j_real(nu, a)?;
    while roots.len() < count {
        let b = a + SCAN_STEP;
        let fb = j_real(nu, b)?;
        if fb == 0.0 {
            roots.push(b);
            a = b + 1e-9;
            fa = j_real(nu, a)?;
            continue;
        }
        if fa.signum() != fb.signum() {
            roots.push(refine(nu, a, b, fa)?);
        }
        a = b;
        fa = fb;
    }
    Ok(RootTable { nu: nu.value(), roots, refine_tol: ROOT_TOL })
}

/// Newton iteration safeguarded by the sign-change bracket `[a, b]`.
fn refine(nu: BesselOrder, mut a: f64, mut b: f64, fa: f64) -> Result<f64, SpecFunError> {
    let sign_a = fa.signum();
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = j_real(nu, x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == sign_a {
            a = x;
        } else {
            b = x;
        }
        let slope = bessel_j_prime(nu, Complex64::new(x, 0.0))?.re;
        let step = fx / slope;
        let mut next = x - step;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        let converged = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() || b - a < ROOT_TOL;
        x = next;
        if converged {
            let fx = j_real(nu, x)?;
            if fx.abs() < ROOT_TOL {
                return Ok(x);
            }
        }
    }
    Err(SpecFunError::RootConvergence { lo: a, hi: b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn half_order_roots_are_multiples_of_pi() {
        let table = bessel_roots(BesselOrder::new(0.5).unwrap(), 3).unwrap();
        for (k, r) in table.roots.iter().enumerate() {
            assert!((r - (k + 1) as f64 * PI).abs() < 1e-10);
        }
    }

    #[test]
    fn count_bounds() {
        let nu = BesselOrder::new(0.0).unwrap();
        assert!(matches!(bessel_roots(nu, 0), Err(SpecFunError::RootCount(0))));
        assert!(matches!(bessel_roots(nu, 1001), Err(SpecFunError::RootCount(1001))));
    }

    #[test]
    fn thousand_roots_stay_accurate() {
        let nu = BesselOrder::new(0.0).unwrap();
        let t = bessel_roots(nu, MAX_ROOT_COUNT).unwrap();
        assert_eq!(t.len(), MAX_ROOT_COUNT);
        let last = *t.roots.last().unwrap();
        // McMahon: j_{0,k} ≈ (k − 1/4)π + 1/(8(k − 1/4)π)
        let beta = (MAX_ROOT_COUNT as f64 - 0.25) * PI;
        assert!((last - (beta + 1.0 / (8.0 * beta))).abs() < 1e-8);
        for r in &t.roots {
            assert!(j_real(nu, *r).unwrap().abs() < ROOT_TOL);
        }
    }
}
