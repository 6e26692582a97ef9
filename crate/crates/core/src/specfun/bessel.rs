//! Bessel functions of the first kind, real order ν ≥ 0, complex argument.
//!
//! Evaluation strategy (`BesselMethod::Auto`):
//!
//! * ν = n + ½ with n ≤ 12 and |z| ≥ 2n: spherical-Bessel closed form
//!   `J_{n+½}(z) = √(2z/π)·j_n(z)`, upward recurrence from `sin`/`cos`.
//! * |z| ≤ 35: ascending power series accumulated in double-double. The
//!   largest term is bounded by `e^{|z|}`, so the ~1e-32 working precision
//!   leaves better than 1e-16 relative accuracy for every |z| in range.
//! * |z| > 35 and ν² ≤ |z|: Hankel asymptotic expansion truncated at its
//!   smallest term.
//! * |z| > 35 and ν < |z|: Hankel expansion at the two lowest orders of the
//!   same fractional part, then forward recurrence (stable below |z|).
//! * otherwise: the double-double series again (terms fall off quickly once
//!   ν exceeds |z|).
//!
//! All branches use the principal branch of `z^ν`, with the cut on the
//! negative real axis.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;

use super::dd::{Dd, DdComplex};
use super::{BesselOrder, SpecFunError};

/// Largest |z| accepted by the evaluator.
pub const MAX_ARGUMENT: f64 = 1e4;

/// Crossover between the ascending series and the large-argument paths.
pub const SERIES_CROSSOVER: f64 = 35.0;

const MAX_CLOSED_FORM_ORDER: u32 = 12;
const MAX_SERIES_TERMS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BesselMethod {
    #[default]
    Auto,
    /// Ascending series in double-double, regardless of |z|.
    Series,
    /// Spherical-Bessel closed form; only valid for half-integer orders.
    HalfInteger,
    /// Hankel asymptotic expansion at the requested order.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// Principal branch; arguments on the negative real axis are accepted.
    #[default]
    Principal,
    /// Reject arguments lying on the negative real axis for non-integer ν.
    Strict,
}

/// `J_ν(z)` with the automatic strategy and principal branch.
pub fn bessel_j(nu: BesselOrder, z: Complex64) -> Result<Complex64, SpecFunError> {
    bessel_j_with(nu, z, BesselMethod::Auto, Branch::Principal)
}

pub fn bessel_j_with(
    nu: BesselOrder,
    z: Complex64,
    method: BesselMethod,
    branch: Branch,
) -> Result<Complex64, SpecFunError> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(SpecFunError::NonFiniteArgument(z));
    }
    let r = z.norm();
    if r > MAX_ARGUMENT {
        return Err(SpecFunError::OutOfRange(r));
    }
    let v = nu.value();
    if branch == Branch::Strict && !nu.is_integer() && z.im == 0.0 && z.re < 0.0 {
        return Err(SpecFunError::BranchCut(z));
    }
    if r == 0.0 {
        return Ok(if v == 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    }
    match method {
        BesselMethod::Series => Ok(series(v, z)),
        BesselMethod::Asymptotic => Ok(hankel_asymptotic(v, z)),
        BesselMethod::HalfInteger => match nu.half_integer_index() {
            Some(n) => Ok(half_integer(n, z)),
            None => Err(SpecFunError::NotHalfInteger(v)),
        },
        BesselMethod::Auto => Ok(auto(nu, z)),
    }
}

/// `J_ν'(z) = (ν/z)·J_ν(z) − J_{ν+1}(z)`.
pub fn bessel_j_prime(nu: BesselOrder, z: Complex64) -> Result<Complex64, SpecFunError> {
    let j = bessel_j(nu, z)?;
    let j1 = bessel_j(nu.raised(1), z)?;
    if z == Complex64::new(0.0, 0.0) {
        // only ν = 1 has a non-zero slope at the origin
        return Ok(if nu.value() == 1.0 { Complex64::new(0.5, 0.0) } else { -j1 });
    }
    Ok(j * (nu.value() / z) - j1)
}

fn auto(nu: BesselOrder, z: Complex64) -> Complex64 {
    let v = nu.value();
    let r = z.norm();
    if let Some(n) = nu.half_integer_index() {
        if n <= MAX_CLOSED_FORM_ORDER && (n == 0 || r >= 2.0 * n as f64) {
            return half_integer(n, z);
        }
    }
    if r <= SERIES_CROSSOVER {
        return series(v, z);
    }
    if v * v <= r {
        return hankel_asymptotic(v, z);
    }
    if v < r {
        return upward_from_asymptotic(v, z);
    }
    series(v, z)
}

/// `(z/2)^ν / Γ(ν+1)` on the principal branch.
fn series_prefactor(v: f64, z: Complex64) -> Complex64 {
    let half = z * 0.5;
    if v.fract() == 0.0 && v <= 170.0 {
        let n = v as i32;
        return half.powi(n) / libm::tgamma(v + 1.0);
    }
    if v + 1.0 < 170.0 {
        (half.ln() * v).exp() / libm::tgamma(v + 1.0)
    } else {
        (half.ln() * v - libm::lgamma(v + 1.0)).exp()
    }
}

/// Ascending series `Σ (−z²/4)^k / (k! (ν+1)_k)`, accumulated in double-double.
fn series(v: f64, z: Complex64) -> Complex64 {
    let zd = DdComplex::from_c64(z);
    let quarter = Dd::from_f64(-0.25);
    let zz = zd * zd;
    let w = DdComplex { re: zz.re * quarter, im: zz.im * quarter };
    let wmag = z.norm_sqr() * 0.25;
    let nu = Dd::from_f64(v);

    let mut term = DdComplex::ONE;
    let mut sum = DdComplex::ONE;
    for k in 1..MAX_SERIES_TERMS {
        let kd = Dd::from_f64(k as f64);
        let denom = kd * (nu + kd);
        term = (term * w).div_real(denom);
        sum = sum + term;
        let kf = k as f64;
        if kf * (kf + v) > wmag && term.norm_inf() <= 1e-34 * sum.norm_inf() {
            break;
        }
    }
    series_prefactor(v, z) * sum.to_c64()
}

/// Hankel expansion, DLMF 10.17.3, truncated at the smallest term.
fn hankel_asymptotic(v: f64, z: Complex64) -> Complex64 {
    let (p, q) = hankel_pq(v, z);
    let chi = z - (0.5 * v + 0.25) * PI;
    (Complex64::new(FRAC_2_PI, 0.0) / z).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn hankel_pq(v: f64, z: Complex64) -> (Complex64, Complex64) {
    let mu = 4.0 * v * v;
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = Complex64::new(0.0, 0.0);
    let mut a = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..200usize {
        let odd = (2 * k - 1) as f64;
        let next = a * ((mu - odd * odd) / (k as f64 * 8.0)) / z;
        let mag = next.norm();
        if mag > prev && k > 2 {
            break;
        }
        a = next;
        prev = mag;
        // sign pattern (−1)^{⌊k/2⌋}: +Q, −P, −Q, +P, ...
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += a * sign;
        } else {
            p += a * sign;
        }
        if mag < 1e-18 * (p.norm() + q.norm()) {
            break;
        }
    }
    (p, q)
}

/// Forward recurrence `J_{μ+1} = (2μ/z) J_μ − J_{μ−1}` seeded by Hankel values
/// at the two lowest orders sharing ν's fractional part.
fn upward_from_asymptotic(v: f64, z: Complex64) -> Complex64 {
    let base = v.fract();
    let steps = (v - base).round() as usize;
    let mut prev = hankel_asymptotic(base, z);
    if steps == 0 {
        return prev;
    }
    let mut cur = hankel_asymptotic(base + 1.0, z);
    for m in 1..steps {
        let order = base + m as f64;
        let next = cur * (2.0 * order / z) - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `J_{n+½}(z) = √(2/π)·√z·j_n(z)` with `j_n` from the upward recurrence.
fn half_integer(n: u32, z: Complex64) -> Complex64 {
    let s = z.sin();
    let root = (2.0 / PI).sqrt();
    if n == 0 {
        return root * s / z.sqrt();
    }
    let c = z.cos();
    let mut jm1 = s / z;
    let mut j = s / (z * z) - c / z;
    for k in 1..n {
        let next = j * ((2 * k + 1) as f64) / z - jm1;
        jm1 = j;
        j = next;
    }
    root * z.sqrt() * j
}
