//! Composite Gauss–Legendre quadrature for smooth complex integrands on a
//! real interval, with Neumaier-compensated accumulation so results do not
//! depend on summation order.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

/// Nodes per panel for the observables quadrature.
pub const PANEL_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge after {panels} panels: last two estimates {previous} and {last}")]
    NonConvergence { panels: usize, previous: Complex64, last: Complex64 },
    #[error("integrand is not finite at x = {0}")]
    NonFinite(f64),
}

/// Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared 16-point rule.
    pub fn panel_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(PANEL_NODES))
    }

    /// Shared 8-point rule, used for per-segment integrals of dense output.
    pub fn segment_rule() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(8))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Fixed composite rule: `panels` equal panels of the 16-point rule.
pub fn composite<F>(f: &F, a: f64, b: f64, panels: usize) -> Result<Complex64, QuadratureError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let rule = GaussLegendre::panel_rule();
    let width = (b - a) / panels as f64;
    let mut acc = CompensatedComplexSum::default();
    for p in 0..panels {
        let lo = a + width * p as f64;
        let hi = if p + 1 == panels { b } else { lo + width };
        for (x, w) in rule.mapped(lo, hi) {
            let v = f(x);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(QuadratureError::NonFinite(x));
            }
            acc.add(v * w);
        }
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub panels: usize,
    /// |last − previous| at acceptance.
    pub change: f64,
}

/// Panel doubling from one panel until two successive estimates differ by
/// less than `tol`.
pub fn integrate_adaptive<F>(f: &F, a: f64, b: f64, tol: f64, max_panels: usize) -> Result<Quadrature, QuadratureError>
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let mut panels = 1;
    let mut previous = composite(f, a, b, panels)?;
    loop {
        panels *= 2;
        let last = composite(f, a, b, panels)?;
        let change = (last - previous).norm();
        if change < tol {
            return Ok(Quadrature { value: last, panels, change });
        }
        if panels >= max_panels {
            return Err(QuadratureError::NonConvergence { panels, previous, last });
        }
        previous = last;
    }
}
