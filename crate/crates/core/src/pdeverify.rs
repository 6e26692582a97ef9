//! Crank–Nicolson evolution of `iΨ_t = −Ψ_xx + V(x − ic)Ψ` on the moving
//! box, and the residual of the closed-form solution.
//!
//! The stepper works on the fixed interval `q = x/L ∈ [0, 1]` with
//! `u(q, t) = √L · Ψ(qL, t)`, for which
//!
//! ```text
//! i u_t = −u_qq / L² + V(Lq − ic) u + i (L̇/L) (q ∂q + ½) u
//! ```
//!
//! With centered differences `q∂q + ½ → ½(Q D₁ + D₁ Q)` is skew-symmetric, so
//! for c = 0 the discrete step is unitary in `h Σ|u_j|² = ∫₀ᴸ|Ψ|² dx`.

use num_complex::Complex64;
use thiserror::Error;

use crate::modes::{potential, GridField, GridMeta, ModeError, ModeField, ModeSpec, ShiftConfig};
use crate::trapdyn::{ScaleError, TrapSchedule};

pub const MIN_POINTS: usize = 64;
pub const MAX_DT: f64 = 1e-3;

/// Per-step relative norm growth that flags an unstable Hermitian run.
pub const INSTABILITY_THRESHOLD: f64 = 1e-6;

/// Endpoint magnitude, relative to the field maximum, accepted as zero.
pub const DIRICHLET_TOL: f64 = 1e-8;

const DRIFT_BLOCK: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolveError {
    #[error("invalid evolution config: {0}")]
    Config(String),
    #[error("initial field violates the Dirichlet condition (|endpoint| = {0:e})")]
    Boundary(f64),
    #[error("norm grew by {growth:e} in one step at t = {t}")]
    Unstable { t: f64, growth: f64 },
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Mode(#[from] ModeError),
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    /// Number of q-intervals; the grid has `m + 1` nodes.
    pub m: usize,
    pub dt: f64,
    pub t_end: f64,
    pub schedule: TrapSchedule,
    pub g: f64,
    pub c: f64,
    /// Record a snapshot every this many steps (and at the end).
    pub snapshot_every: Option<usize>,
}

impl EvolutionConfig {
    pub fn new(m: usize, dt: f64, t_end: f64, schedule: TrapSchedule, g: f64, c: f64) -> Result<Self, EvolveError> {
        let cfg = EvolutionConfig { m, dt, t_end, schedule, g, c, snapshot_every: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = Some(every.max(1));
        self
    }

    fn validate(&self) -> Result<(), EvolveError> {
        if self.m < MIN_POINTS {
            return Err(EvolveError::Config(format!("M = {} below {MIN_POINTS}", self.m)));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            return Err(EvolveError::Config(format!("dt = {} outside (0, {MAX_DT}]", self.dt)));
        }
        if !self.g.is_finite() || !self.c.is_finite() {
            return Err(EvolveError::Config("g and c must be finite".into()));
        }
        let (start, end) = self.schedule.window();
        if !(self.t_end >= start && self.t_end <= end) {
            return Err(EvolveError::Config(format!("t_end = {} outside schedule [{start}, {end}]", self.t_end)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub field: GridField,
    pub snapshots: Vec<GridField>,
    pub steps: usize,
    /// Step actually used, `(t_end − t0) / steps`.
    pub dt: f64,
    /// Largest `|N(end) − N(start)| / N₀` over consecutive blocks of 1000 steps.
    pub norm_drift_per_kstep: f64,
    pub initial_norm: f64,
    pub final_norm: f64,
}

struct Stepper<'a> {
    cfg: &'a EvolutionConfig,
    h: f64,
    // interior tridiagonal of A: lower[j], diag[j], upper[j] for j = 1..m-1
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    scratch_c: Vec<Complex64>,
    scratch_d: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    fn new(cfg: &'a EvolutionConfig) -> Self {
        let n = cfg.m - 1;
        let zero = Complex64::new(0.0, 0.0);
        Stepper {
            cfg,
            h: 1.0 / cfg.m as f64,
            lower: vec![zero; n],
            diag: vec![zero; n],
            upper: vec![zero; n],
            scratch_c: vec![zero; n],
            scratch_d: vec![zero; n],
        }
    }

    fn assemble(&mut self, t: f64) -> Result<(), EvolveError> {
        let s = self.cfg.schedule.state(t)?;
        let h = self.h;
        let lap = 1.0 / (s.l * s.l * h * h);
        let adv = Complex64::new(0.0, s.ldot / s.l / (4.0 * h));
        for i in 0..self.diag.len() {
            let j = i + 1;
            let q = j as f64 * h;
            let z = Complex64::new(s.l * q, -self.cfg.c);
            self.diag[i] = 2.0 * lap + potential(s.omega2, self.cfg.g, z);
            self.lower[i] = -lap - adv * (q + q - h);
            self.upper[i] = -lap + adv * (q + q + h);
        }
        Ok(())
    }

    /// One CN step over `dt` in place on the interior values.
    fn step(&mut self, u: &mut [Complex64], t: f64, dt: f64) -> Result<(), EvolveError> {
        self.assemble(t + 0.5 * dt)?;
        let n = self.diag.len();
        let k = Complex64::new(0.0, 0.5 * dt);
        // rhs = (I − k A) u, interior only (u[0] = u[m] = 0)
        for i in 0..n {
            let j = i + 1;
            let mut au = self.diag[i] * u[j];
            if i > 0 {
                au += self.lower[i] * u[j - 1];
            }
            if i + 1 < n {
                au += self.upper[i] * u[j + 1];
            }
            self.scratch_d[i] = u[j] - k * au;
        }
        // Thomas on (I + k A)
        let one = Complex64::new(1.0, 0.0);
        let mut denom = one + k * self.diag[0];
        self.scratch_c[0] = k * self.upper[0] / denom;
        self.scratch_d[0] /= denom;
        for i in 1..n {
            let a = k * self.lower[i];
            denom = one + k * self.diag[i] - a * self.scratch_c[i - 1];
            self.scratch_c[i] = if i + 1 < n { k * self.upper[i] / denom } else { Complex64::new(0.0, 0.0) };
            self.scratch_d[i] = (self.scratch_d[i] - a * self.scratch_d[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            let next = self.scratch_d[i + 1];
            self.scratch_d[i] -= self.scratch_c[i] * next;
        }
        u[1..=n].copy_from_slice(&self.scratch_d);
        Ok(())
    }
}

fn norm_of(u: &[Complex64], h: f64) -> f64 {
    let mut acc = crate::quadrature::CompensatedSum::default();
    for v in u {
        acc.add(v.norm_sqr());
    }
    acc.value() * h
}

fn to_grid(u: &[Complex64], t: f64, l: f64, c: f64, meta: &GridMeta) -> Result<GridField, ModeError> {
    let m = u.len() - 1;
    let scale = l.sqrt().recip();
    let x = (0..=m).map(|j| if j == m { l } else { l * j as f64 / m as f64 }).collect();
    let values = u.iter().map(|v| v * scale).collect();
    GridField::new(x, c, values, GridMeta { t, l, ..*meta })
}

/// Evolve `initial` (sampled on `x_j = L(t₀)·j/M`) from its time to `t_end`.
pub fn evolve_cn(cfg: &EvolutionConfig, initial: &GridField) -> Result<Evolution, EvolveError> {
    cfg.validate()?;
    let m = cfg.m;
    if initial.len() != m + 1 {
        return Err(EvolveError::Config(format!("initial field has {} nodes, expected {}", initial.len(), m + 1)));
    }
    let t0 = initial.meta.t;
    if !(cfg.t_end >= t0) {
        return Err(EvolveError::Config(format!("t_end = {} precedes the initial time {t0}", cfg.t_end)));
    }
    let l0 = cfg.schedule.length(t0)?;
    let peak = initial.values.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let edge = initial.values[0].norm().max(initial.values[m].norm());
    if edge > DIRICHLET_TOL * peak.max(f64::MIN_POSITIVE) {
        return Err(EvolveError::Boundary(edge));
    }

    let mut u: Vec<Complex64> = initial.values.iter().map(|v| v * l0.sqrt()).collect();
    u[0] = Complex64::new(0.0, 0.0);
    u[m] = Complex64::new(0.0, 0.0);

    let span = cfg.t_end - t0;
    let steps = if span == 0.0 { 0 } else { ((span / cfg.dt).round() as usize).max(1) };
    let dt = if steps == 0 { cfg.dt } else { span / steps as f64 };
    let mut stepper = Stepper::new(cfg);
    let h = stepper.h;
    let hermitian = cfg.c == 0.0;

    let n0 = norm_of(&u, h);
    let mut prev = n0;
    let mut block_start = n0;
    let mut drift: f64 = 0.0;
    let mut snapshots = Vec::new();
    for s in 0..steps {
        let t = t0 + dt * s as f64;
        stepper.step(&mut u, t, dt)?;
        let n = norm_of(&u, h);
        if hermitian && n > prev * (1.0 + INSTABILITY_THRESHOLD) {
            return Err(EvolveError::Unstable { t: t + dt, growth: n / prev - 1.0 });
        }
        prev = n;
        let done = s + 1;
        if done % DRIFT_BLOCK == 0 || done == steps {
            drift = drift.max((n - block_start).abs() / n0.max(f64::MIN_POSITIVE));
            block_start = n;
        }
        if let Some(every) = cfg.snapshot_every {
            if done % every == 0 && done != steps {
                let tn = t0 + dt * done as f64;
                snapshots.push(to_grid(&u, tn, cfg.schedule.length(tn)?, cfg.c, &initial.meta)?);
            }
        }
    }
    let l_end = cfg.schedule.length(cfg.t_end)?;
    let field = to_grid(&u, cfg.t_end, l_end, cfg.c, &initial.meta)?;
    if cfg.snapshot_every.is_some() {
        snapshots.push(field.clone());
    }
    Ok(Evolution { field, snapshots, steps, dt, norm_drift_per_kstep: drift, initial_norm: n0, final_norm: prev })
}

/// `√(∫|a − b|² dx)` by the trapezoid rule; both fields must share abscissae.
pub fn l2_error(a: &GridField, b: &GridField) -> Result<f64, EvolveError> {
    if a.x != b.x {
        return Err(EvolveError::Config("fields are sampled on different grids".into()));
    }
    let mut acc = crate::quadrature::CompensatedSum::default();
    for i in 1..a.len() {
        let dx = a.x[i] - a.x[i - 1];
        let d0 = (a.values[i - 1] - b.values[i - 1]).norm_sqr();
        let d1 = (a.values[i] - b.values[i]).norm_sqr();
        acc.add(0.5 * dx * (d0 + d1));
    }
    Ok(acc.value().sqrt())
}

/// `sup |iΨ_t + Ψ_xx − VΨ| / max|Ψ|` over `z = x − ic`, all derivatives analytic.
pub fn analytic_residual(
    mode: &ModeSpec,
    ts: &TrapSchedule,
    shift: &ShiftConfig,
    t: f64,
    xs: &[f64],
) -> Result<f64, ModeError> {
    if xs.is_empty() {
        return Err(ModeError::Grid("no sample points".into()));
    }
    let field = ModeField::new(mode, ts, t)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &x in xs {
        let z = shift.point(x);
        worst = worst.max(field.schrodinger_defect(z)?.norm());
        scale = scale.max(field.psi(z)?.norm());
    }
    Ok(worst / scale)
}

/// Phase `φ` with `⟨Ψ(t₀), Ψ(t)⟩ = |…| e^{−iφ}`, unwrapped against `reference`.
pub fn accumulated_phase(initial: &GridField, evolved: &GridField, reference: f64) -> Result<f64, EvolveError> {
    if initial.len() != evolved.len() {
        return Err(EvolveError::Config("fields differ in size".into()));
    }
    let mut overlap = Complex64::new(0.0, 0.0);
    for (a, b) in initial.values.iter().zip(&evolved.values) {
        overlap += a.conj() * b;
    }
    let raw = -overlap.arg();
    let turns = ((reference - raw) / std::f64::consts::TAU).round();
    Ok(raw + turns * std::f64::consts::TAU)
}
