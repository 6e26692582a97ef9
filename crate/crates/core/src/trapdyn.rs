//! Time-dependent trap scale: `L̈ = −4ω²(t) L`, the gauge parameter
//! `α = L̇/(2L)`, the Riccati check `ω² + α̇/2 + α² = 0`, and the
//! separation phase `∫ E/L² dt`.
//!
//! The integrator is classical RK4 at a fixed step, with the step halved
//! until a Richardson estimate of the global error falls below the caller's
//! tolerance. The accepted nodes carry `(L, L̇, L̈)` and are joined by
//! quintic Hermite segments; α and α̇ are derivatives of that interpolant.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::io::fmt17;
use crate::quadrature::{CompensatedSum, GaussLegendre};

/// Wall collapse threshold relative to `L0`.
pub const COLLAPSE_FRACTION: f64 = 1e-6;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MIN_TOL: f64 = 1e-12;
const INITIAL_STEPS: usize = 32;
const MAX_STEPS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScaleError {
    #[error("invalid scale problem: {0}")]
    InvalidInput(String),
    #[error("wall collapsed (L <= L0*1e-6) at t = {0}")]
    WallCollapse(f64),
    #[error("step control could not reach tol {tol:e}; last error estimate {estimate:e}")]
    ToleranceFailure { tol: f64, estimate: f64 },
    #[error("t = {t} outside schedule window [{start}, {end}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },
}

/// The frequency schedule ω²(t).
#[derive(Clone)]
pub struct FrequencySchedule {
    omega2: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    description: String,
}

impl fmt::Debug for FrequencySchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrequencySchedule").field("description", &self.description).finish()
    }
}

impl FrequencySchedule {
    pub fn constant(omega2: f64) -> Self {
        FrequencySchedule {
            omega2: Arc::new(move |_| omega2),
            description: format!("constant({omega2})"),
        }
    }

    pub fn zero() -> Self {
        FrequencySchedule { omega2: Arc::new(|_| 0.0), description: "zero".into() }
    }

    pub fn from_fn<F>(description: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        FrequencySchedule { omega2: Arc::new(f), description: description.into() }
    }

    /// Piecewise-linear table of `(t, ω²)` pairs, held constant outside the
    /// tabulated range.
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self, ScaleError> {
        if points.len() < 2 {
            return Err(ScaleError::InvalidInput("omega2 table needs at least two rows".into()));
        }
        if points.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
            return Err(ScaleError::InvalidInput("omega2 table has non-finite entries".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(ScaleError::InvalidInput("omega2 table times must increase strictly".into()));
        }
        let description = format!("table({} rows)", points.len());
        let f = move |t: f64| {
            let idx = points.partition_point(|(pt, _)| *pt <= t);
            if idx == 0 {
                return points[0].1;
            }
            if idx == points.len() {
                return points[points.len() - 1].1;
            }
            let (t0, w0) = points[idx - 1];
            let (t1, w1) = points[idx];
            w0 + (w1 - w0) * (t - t0) / (t1 - t0)
        };
        Ok(FrequencySchedule { omega2: Arc::new(f), description })
    }

    pub fn omega2(&self, t: f64) -> f64 {
        (self.omega2)(t)
    }

    pub fn description(&self) -> &str {
        &self.description
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    t: f64,
    l: f64,
    ldot: f64,
    lddot: f64,
}

/// Interpolated scale quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleState {
    pub t: f64,
    pub omega2: f64,
    pub l: f64,
    pub ldot: f64,
    pub lddot: f64,
    pub alpha: f64,
    pub alpha_dot: f64,
}

/// Solved wall trajectory with dense output. Immutable once built.
#[derive(Debug, Clone)]
pub struct TrapSchedule {
    schedule: FrequencySchedule,
    nodes: Vec<Node>,
    /// ∫ 1/L² from the first node up to each node.
    cum_inv_l2: Vec<f64>,
    /// ∫ α from the first node up to each node.
    cum_alpha: Vec<f64>,
    tol: f64,
    error_estimate: f64,
}

type State = (f64, f64);

/// `(t, L, L̇)` samples of one integration run.
type Trajectory = Vec<(f64, f64, f64)>;

fn rk4_run(
    schedule: &FrequencySchedule,
    t0: f64,
    y0: State,
    t1: f64,
    steps: usize,
    collapse_below: f64,
) -> Result<Trajectory, ScaleError> {
    let h = (t1 - t0) / steps as f64;
    let rhs = |t: f64, (l, v): State| (v, -4.0 * schedule.omega2(t) * l);
    let mut out = Vec::with_capacity(steps + 1);
    let (mut l, mut v) = y0;
    out.push((t0, l, v));
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let k1 = rhs(t, (l, v));
        let k2 = rhs(t + 0.5 * h, (l + 0.5 * h * k1.0, v + 0.5 * h * k1.1));
        let k3 = rhs(t + 0.5 * h, (l + 0.5 * h * k2.0, v + 0.5 * h * k2.1));
        let k4 = rhs(t + h, (l + h * k3.0, v + h * k3.1));
        l += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        let tn = if i + 1 == steps { t1 } else { t0 + h * (i + 1) as f64 };
        if !l.is_finite() || !v.is_finite() {
            return Err(ScaleError::InvalidInput(format!("non-finite wall state at t = {tn}")));
        }
        if l <= collapse_below {
            let &(tp, lp, _) = out.last().expect("initial node");
            let crossing = tp + (tn - tp) * (lp - collapse_below) / (lp - l);
            return Err(ScaleError::WallCollapse(crossing));
        }
        out.push((tn, l, v));
    }
    Ok(out)
}

fn validate(l0: f64, ldot0: f64, t0: f64, t1: f64, tol: f64) -> Result<(), ScaleError> {
    if !(l0.is_finite() && l0 > 0.0) {
        return Err(ScaleError::InvalidInput(format!("L0 must be positive, got {l0}")));
    }
    if !ldot0.is_finite() || !t0.is_finite() || !t1.is_finite() {
        return Err(ScaleError::InvalidInput("non-finite initial data".into()));
    }
    if t1 == t0 {
        return Err(ScaleError::InvalidInput("empty time window".into()));
    }
    if !(tol >= MIN_TOL) {
        return Err(ScaleError::InvalidInput(format!("tol must be >= {MIN_TOL:e}, got {tol}")));
    }
    Ok(())
}

/// Richardson-controlled RK4 from `t0` to `t1` (either direction). Returns
/// the accepted trajectory and its error estimate.
fn controlled(
    schedule: &FrequencySchedule,
    t0: f64,
    y0: State,
    t1: f64,
    tol: f64,
) -> Result<(Trajectory, f64), ScaleError> {
    validate(y0.0, y0.1, t0, t1, tol)?;
    let collapse = y0.0 * COLLAPSE_FRACTION;
    let mut steps = INITIAL_STEPS;
    let mut coarse = rk4_run(schedule, t0, y0, t1, steps, collapse)?;
    let mut estimate = f64::INFINITY;
    while steps < MAX_STEPS {
        let fine = rk4_run(schedule, t0, y0, t1, 2 * steps, collapse)?;
        // RK4: err(h/2) ≈ (y_h − y_{h/2}) / 15
        estimate = coarse
            .iter()
            .zip(fine.iter().step_by(2))
            .map(|(c, f)| (c.1 - f.1).abs().max((c.2 - f.2).abs()))
            .fold(0.0, f64::max)
            / 15.0;
        if estimate <= tol {
            // Richardson-extrapolated values on the coarse grid; L and L̇
            // are then consistent to well below tol, which the quintic
            // dense output needs for its second derivative
            let extrapolated = coarse
                .iter()
                .zip(fine.iter().step_by(2))
                .map(|(c, f)| (f.0, f.1 + (f.1 - c.1) / 15.0, f.2 + (f.2 - c.2) / 15.0))
                .collect();
            return Ok((extrapolated, estimate));
        }
        coarse = fine;
        steps *= 2;
    }
    Err(ScaleError::ToleranceFailure { tol, estimate })
}

/// Integrate the wall trajectory on `[0, t_end]` from `(L0, L̇0)`.
pub fn solve_scale(
    schedule: &FrequencySchedule,
    l0: f64,
    ldot0: f64,
    t_end: f64,
    tol: f64,
) -> Result<TrapSchedule, ScaleError> {
    if !(t_end > 0.0) {
        return Err(ScaleError::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    let (traj, estimate) = controlled(schedule, 0.0, (l0, ldot0), t_end, tol)?;
    Ok(TrapSchedule::from_trajectory(schedule.clone(), traj, tol, estimate))
}

/// Fixed-step RK4 run with exactly `steps` steps, no error control.
pub fn solve_scale_fixed(
    schedule: &FrequencySchedule,
    l0: f64,
    ldot0: f64,
    t_end: f64,
    steps: usize,
) -> Result<TrapSchedule, ScaleError> {
    validate(l0, ldot0, 0.0, t_end, MIN_TOL)?;
    if steps == 0 {
        return Err(ScaleError::InvalidInput("steps must be positive".into()));
    }
    let traj = rk4_run(schedule, 0.0, (l0, ldot0), t_end, steps, l0 * COLLAPSE_FRACTION)?;
    Ok(TrapSchedule::from_trajectory(schedule.clone(), traj, f64::NAN, f64::NAN))
}

/// Propagate `(L, L̇)` from `t0` to `t1`, which may lie before `t0`.
pub fn propagate(
    schedule: &FrequencySchedule,
    t0: f64,
    state: (f64, f64),
    t1: f64,
    tol: f64,
) -> Result<(f64, f64), ScaleError> {
    let (traj, _) = controlled(schedule, t0, state, t1, tol)?;
    let &(_, l, v) = traj.last().expect("trajectory has nodes");
    Ok((l, v))
}

/// Quintic Hermite segment in the local variable `s ∈ [0, 1]`.
struct Segment {
    t0: f64,
    h: f64,
    c: [f64; 6],
}

impl Segment {
    fn new(a: &Node, b: &Node) -> Self {
        let h = b.t - a.t;
        let (d0, d1) = (h * a.ldot, h * b.ldot);
        let (s0, s1) = (h * h * a.lddot, h * h * b.lddot);
        // defects of the left-node Taylor quadratic at the right node; keeps
        // the cubic-and-higher coefficients free of O(1) cancellation
        let dy = (b.l - a.l) - d0 - 0.5 * s0;
        let dd = d1 - d0 - s0;
        let ds = s1 - s0;
        let c3 = 10.0 * dy - 4.0 * dd + 0.5 * ds;
        let c4 = -15.0 * dy + 7.0 * dd - ds;
        let c5 = 6.0 * dy - 3.0 * dd + 0.5 * ds;
        Segment { t0: a.t, h, c: [a.l, d0, 0.5 * s0, c3, c4, c5] }
    }

    /// (L, L̇, L̈) at `t`.
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let s = (t - self.t0) / self.h;
        let c = &self.c;
        let p = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
        let dp = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
        let ddp = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
        (p, dp / self.h, ddp / (self.h * self.h))
    }
}

impl TrapSchedule {
    fn from_trajectory(
        schedule: FrequencySchedule,
        traj: Trajectory,
        tol: f64,
        error_estimate: f64,
    ) -> Self {
        let nodes: Vec<Node> = traj
            .into_iter()
            .map(|(t, l, ldot)| Node { t, l, ldot, lddot: -4.0 * schedule.omega2(t) * l })
            .collect();
        let mut ts = TrapSchedule {
            schedule,
            nodes,
            cum_inv_l2: Vec::new(),
            cum_alpha: Vec::new(),
            tol,
            error_estimate,
        };
        let rule = GaussLegendre::segment_rule();
        let mut inv = CompensatedSum::default();
        let mut alpha = CompensatedSum::default();
        ts.cum_inv_l2.push(0.0);
        ts.cum_alpha.push(0.0);
        for w in ts.nodes.windows(2) {
            let seg = Segment::new(&w[0], &w[1]);
            inv.add(rule.integrate(|t| seg.eval(t).0.powi(-2), w[0].t, w[1].t));
            alpha.add(rule.integrate(
                |t| {
                    let (l, ld, _) = seg.eval(t);
                    0.5 * ld / l
                },
                w[0].t,
                w[1].t,
            ));
            ts.cum_inv_l2.push(inv.value());
            ts.cum_alpha.push(alpha.value());
        }
        ts
    }

    /// Static wall of length `l0` on `[0, t_end]` (ω² = 0, L̇ = 0).
    pub fn static_wall(l0: f64, t_end: f64) -> Result<Self, ScaleError> {
        solve_scale(&FrequencySchedule::zero(), l0, 0.0, t_end, DEFAULT_TOL)
    }

    pub fn frequency(&self) -> &FrequencySchedule {
        &self.schedule
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }

    pub fn window(&self) -> (f64, f64) {
        (self.nodes[0].t, self.nodes[self.nodes.len() - 1].t)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(|n| n.t)
    }

    pub fn initial_length(&self) -> f64 {
        self.nodes[0].l
    }

    fn locate(&self, t: f64) -> Result<usize, ScaleError> {
        let (start, end) = self.window();
        if !(t >= start && t <= end) {
            return Err(ScaleError::OutOfWindow { t, start, end });
        }
        let idx = self.nodes.partition_point(|n| n.t <= t);
        Ok(idx.saturating_sub(1).min(self.nodes.len() - 2))
    }

    /// Interpolated (L, L̇, L̈), α and α̇ at `t`.
    pub fn state(&self, t: f64) -> Result<ScaleState, ScaleError> {
        let i = self.locate(t)?;
        let seg = Segment::new(&self.nodes[i], &self.nodes[i + 1]);
        let (l, ldot, lddot) = seg.eval(t);
        let alpha = 0.5 * ldot / l;
        let alpha_dot = 0.5 * (lddot * l - ldot * ldot) / (l * l);
        Ok(ScaleState { t, omega2: self.schedule.omega2(t), l, ldot, lddot, alpha, alpha_dot })
    }

    pub fn length(&self, t: f64) -> Result<f64, ScaleError> {
        Ok(self.state(t)?.l)
    }

    fn partial<F: Fn(&Segment, f64) -> f64>(&self, cum: &[f64], t: f64, f: F) -> Result<f64, ScaleError> {
        let i = self.locate(t)?;
        let seg = Segment::new(&self.nodes[i], &self.nodes[i + 1]);
        let t0 = self.nodes[i].t;
        let tail = if t > t0 {
            GaussLegendre::segment_rule().integrate(|s| f(&seg, s), t0, t)
        } else {
            0.0
        };
        Ok(cum[i] + tail)
    }

    /// `∫₀ᵗ dt′ / L²(t′)`.
    pub fn inverse_square_integral(&self, t: f64) -> Result<f64, ScaleError> {
        self.partial(&self.cum_inv_l2, t, |seg, s| seg.eval(s).0.powi(-2))
    }

    /// `∫₀ᵗ α dt′`, by quadrature of the interpolated α.
    pub fn alpha_integral(&self, t: f64) -> Result<f64, ScaleError> {
        self.partial(&self.cum_alpha, t, |seg, s| {
            let (l, ld, _) = seg.eval(s);
            0.5 * ld / l
        })
    }

    /// Evenly spaced dense-output rows `(t, L, L̇, α)`.
    pub fn sample(&self, points: usize) -> Vec<ScaleState> {
        let (start, end) = self.window();
        let points = points.max(2);
        (0..points)
            .map(|i| {
                let t = if i + 1 == points { end } else { start + (end - start) * i as f64 / (points - 1) as f64 };
                self.state(t).expect("sample inside window")
            })
            .collect()
    }

    /// CSV with columns `t,L,Ldot,alpha`, 17 significant digits.
    pub fn to_csv(&self, points: usize) -> String {
        let mut out = String::from("t,L,Ldot,alpha\n");
        for s in self.sample(points) {
            out.push_str(&format!("{},{},{},{}\n", fmt17(s.t), fmt17(s.l), fmt17(s.ldot), fmt17(s.alpha)));
        }
        out
    }
}

/// `α(t) = L̇/(2L)` from the dense output.
pub fn alpha_of(ts: &TrapSchedule, t: f64) -> Result<f64, ScaleError> {
    Ok(ts.state(t)?.alpha)
}

/// `ω²(t) + α̇(t)/2 + α²(t)`, with α̇ from differentiating the dense output.
pub fn riccati_residual(ts: &TrapSchedule, t: f64) -> Result<f64, ScaleError> {
    let s = ts.state(t)?;
    Ok(s.omega2 + 0.5 * s.alpha_dot + s.alpha * s.alpha)
}

/// `∫₀ᵗ E / L²(t′) dt′`.
pub fn phase_integral(ts: &TrapSchedule, energy: f64, t: f64) -> Result<f64, ScaleError> {
    if !(energy >= 0.0) {
        return Err(ScaleError::InvalidInput(format!("E must be non-negative, got {energy}")));
    }
    if energy == 0.0 {
        ts.locate(t)?;
        return Ok(0.0);
    }
    Ok(energy * ts.inverse_square_integral(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sinusoidal() -> TrapSchedule {
        solve_scale(&FrequencySchedule::constant(1.0), 1.0, 0.0, 0.7, 1e-11).unwrap()
    }

    #[test]
    fn unit_frequency_gives_cos_2t() {
        let ts = sinusoidal();
        for s in ts.sample(141) {
            assert!((s.l - (2.0 * s.t).cos()).abs() < 1e-8, "t={}", s.t);
        }
    }

    #[test]
    fn free_expansion_is_linear() {
        let ts = solve_scale(&FrequencySchedule::zero(), 1.0, 0.5, 3.0, 1e-10).unwrap();
        for s in ts.sample(31) {
            assert!((s.l - (1.0 + 0.5 * s.t)).abs() < 1e-14);
        }
        assert!(riccati_residual(&ts, 1.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn alpha_matches_closed_form() {
        let ts = sinusoidal();
        assert!(alpha_of(&ts, 0.0).unwrap().abs() < 1e-14);
        let t = std::f64::consts::PI / 8.0;
        assert!((alpha_of(&ts, t).unwrap() + 1.0).abs() < 1e-8);
        let flat = TrapSchedule::static_wall(1.0, 2.0).unwrap();
        assert_eq!(alpha_of(&flat, 1.3).unwrap(), 0.0);
    }

    #[test]
    fn residuals_and_phases() {
        let flat = TrapSchedule::static_wall(1.0, 1.0).unwrap();
        assert_eq!(riccati_residual(&flat, 0.5).unwrap(), 0.0);
        let e = std::f64::consts::PI.powi(2);
        assert!((phase_integral(&flat, e, 0.2).unwrap() - e * 0.2).abs() < 1e-14);
        assert_eq!(phase_integral(&flat, 0.0, 0.7).unwrap(), 0.0);

        let ts = sinusoidal();
        assert!(riccati_residual(&ts, 0.3).unwrap().abs() < 1e-8);

        let lin = solve_scale(&FrequencySchedule::zero(), 1.0, 0.5, 2.0, 1e-10).unwrap();
        assert!((phase_integral(&lin, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn errors() {
        let ts = sinusoidal();
        assert!(matches!(alpha_of(&ts, 0.8), Err(ScaleError::OutOfWindow { .. })));
        assert!(matches!(riccati_residual(&ts, -0.1), Err(ScaleError::OutOfWindow { .. })));
        assert!(matches!(phase_integral(&ts, 1.0, 1.0), Err(ScaleError::OutOfWindow { .. })));
        let w1 = FrequencySchedule::constant(1.0);
        // cos 2t reaches zero at π/4
        let err = solve_scale(&w1, 1.0, 0.0, 1.0, 1e-10).unwrap_err();
        match err {
            ScaleError::WallCollapse(t) => assert!((t - std::f64::consts::FRAC_PI_4).abs() < 1e-3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(solve_scale(&w1, -1.0, 0.0, 1.0, 1e-10), Err(ScaleError::InvalidInput(_))));
        assert!(matches!(solve_scale(&w1, 1.0, 0.0, 0.5, 1e-14), Err(ScaleError::InvalidInput(_))));
        assert!(matches!(solve_scale(&w1, 1.0, 0.0, -0.5, 1e-10), Err(ScaleError::InvalidInput(_))));
    }

    #[test]
    fn table_schedule_interpolates() {
        let s = FrequencySchedule::table(vec![(0.0, 1.0), (1.0, 3.0)]).unwrap();
        assert_eq!(s.omega2(0.5), 2.0);
        assert_eq!(s.omega2(-1.0), 1.0);
        assert_eq!(s.omega2(5.0), 3.0);
        assert!(FrequencySchedule::table(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }
}
