use std::path::{Path, PathBuf};

use pttrap::fullline::{FullLineMode, QuasiParity};
use pttrap::io::{fmt17, Json};
use pttrap::modes::{mode, normalize, quantize, r_density, wall_density, ConjMode, GridField, ModeError, ModeSpec, ShiftConfig};
use pttrap::observables::{expectation_report, ObservableError, ObservableReport};
use pttrap::pdeverify::{evolve_cn, l2_error, EvolutionConfig, EvolveError};
use pttrap::trapdyn::{solve_scale, FrequencySchedule, ScaleError, TrapSchedule};
use pttrap::verify::{run_suite, SuiteOptions};

use crate::config::{numerical, CliError, Format, RunConfig, ScheduleSpec};

/// Window used when the requested time is 0; the scale solver needs a
/// non-empty interval.
const MIN_HORIZON: f64 = 1e-3;

/// Result of a command: its body and the summary echoed into the manifest.
pub struct Outcome {
    pub body: String,
    pub results: Json,
    pub passed: bool,
}

impl Outcome {
    fn ok(body: String, results: Json) -> Self {
        Outcome { body, results, passed: true }
    }
}

fn scale_error(e: ScaleError) -> CliError {
    match e {
        ScaleError::InvalidInput(m) => CliError::Config(m),
        other => numerical(other),
    }
}

fn mode_error(e: ModeError) -> CliError {
    match e {
        ModeError::CouplingBelowBound(_) | ModeError::EmptyCount | ModeError::Grid(_) => CliError::Config(e.to_string()),
        ModeError::Scale(s) => scale_error(s),
        other => numerical(other),
    }
}

fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read schedule table {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cells.as_slice() {
            [t, w] => t.parse::<f64>().ok().zip(w.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(row) => rows.push(row),
            // A non-numeric first line is a header.
            None if n == 0 => continue,
            None => return Err(CliError::Config(format!("{}:{}: expected t,omega2", path.display(), n + 1))),
        }
    }
    Ok(rows)
}

fn frequency(cfg: &RunConfig) -> Result<FrequencySchedule, CliError> {
    match &cfg.schedule {
        ScheduleSpec::Constant => Ok(FrequencySchedule::constant(cfg.omega2)),
        ScheduleSpec::Zero => Ok(FrequencySchedule::zero()),
        ScheduleSpec::Table(p) => FrequencySchedule::table(read_table(p)?).map_err(scale_error),
    }
}

fn trap(cfg: &RunConfig) -> Result<TrapSchedule, CliError> {
    solve_scale(&frequency(cfg)?, cfg.l0, cfg.ldot0, cfg.t.max(MIN_HORIZON), cfg.tol).map_err(scale_error)
}

fn unit_mode(cfg: &RunConfig, ts: &TrapSchedule, shift: &ShiftConfig, t: f64) -> Result<ModeSpec, CliError> {
    let m = mode(cfg.g, cfg.k).map_err(mode_error)?;
    normalize(&m, ts, shift, t).map_err(mode_error)
}

fn mode_json(m: &ModeSpec) -> Json {
    Json::object()
        .with("id", m.id())
        .with("nu", m.nu.value())
        .with("E", m.energy)
        .with("norm_re", m.norm.re)
        .with("norm_im", m.norm.im)
}

fn csv_row(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let trapped = quantize(cfg.g, cfg.count).map_err(mode_error)?;
    let mut rows: Vec<(&str, usize, Option<QuasiParity>, f64)> =
        trapped.iter().map(|m| ("trapped", m.k, None, m.energy)).collect();
    if cfg.fullline {
        let beta = (cfg.g + 0.25).sqrt();
        let mut line = Vec::new();
        for n in 0..=cfg.nmax {
            for qp in [QuasiParity::Plus, QuasiParity::Minus] {
                let m = FullLineMode::new(n, qp, beta).map_err(numerical)?;
                line.push(("fullline", n, Some(qp), m.energy));
            }
        }
        line.sort_by(|a, b| a.3.total_cmp(&b.3).then(a.1.cmp(&b.1)));
        rows.extend(line);
    }
    let qp_str = |q: Option<QuasiParity>| match q {
        Some(QuasiParity::Plus) => "+1",
        Some(QuasiParity::Minus) => "-1",
        None => "",
    };
    let body = match cfg.format {
        Format::Csv => {
            let mut s = String::from("kind,n_or_k,qp,E\n");
            for (kind, idx, qp, e) in &rows {
                s.push_str(&csv_row(&[kind.to_string(), idx.to_string(), qp_str(*qp).into(), fmt17(*e)]));
            }
            s
        }
        Format::Json => {
            let items = rows
                .iter()
                .map(|(kind, idx, qp, e)| {
                    let qp = qp.map_or(Json::Null, |q| Json::Int(q.sign() as i64));
                    Json::object().with("kind", *kind).with("n_or_k", *idx).with("qp", qp).with("E", *e)
                })
                .collect::<Vec<_>>();
            Json::object().with("g", cfg.g).with("rows", items).render()
        }
    };
    let results = Json::object()
        .with("nu", trapped[0].nu.value())
        .with("rows", rows.len())
        .with("lowest_E", trapped[0].energy);
    Ok(Outcome::ok(body, results))
}

pub fn scale(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if !(cfg.t > 0.0) {
        return Err(CliError::Config("scale needs t > 0".into()));
    }
    let ts = trap(cfg)?;
    let body = match cfg.format {
        Format::Csv => ts.to_csv(cfg.grid),
        Format::Json => {
            let rows = ts.sample(cfg.grid);
            Json::object()
                .with("t", Json::numbers(rows.iter().map(|s| s.t)))
                .with("L", Json::numbers(rows.iter().map(|s| s.l)))
                .with("Ldot", Json::numbers(rows.iter().map(|s| s.ldot)))
                .with("alpha", Json::numbers(rows.iter().map(|s| s.alpha)))
                .render()
        }
    };
    let end = ts.state(cfg.t).map_err(scale_error)?;
    let results = Json::object()
        .with("nodes", ts.node_count())
        .with("error_estimate", ts.error_estimate())
        .with("L_end", end.l)
        .with("Ldot_end", end.ldot);
    Ok(Outcome::ok(body, results))
}

pub fn wavefunction(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ts = trap(cfg)?;
    let shift = ShiftConfig::shifted(cfg.c);
    let m = unit_mode(cfg, &ts, &shift, cfg.t)?;
    let field = GridField::sample(&m, &ts, &shift, cfg.t, cfg.grid).map_err(mode_error)?;
    let body = match cfg.format {
        Format::Csv => field.to_csv(),
        Format::Json => field.to_json().render(),
    };
    Ok(Outcome::ok(body, Json::object().with("mode", mode_json(&m)).with("L", field.meta.l)))
}

pub fn density(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ts = trap(cfg)?;
    let shift = ShiftConfig::shifted(cfg.c);
    let m = unit_mode(cfg, &ts, &shift, cfg.t)?;
    let field = GridField::sample(&m, &ts, &shift, cfg.t, cfg.grid).map_err(mode_error)?;
    let l = field.meta.l;
    let rho: Vec<f64> = field.densities().collect();
    let r: Vec<f64> = field
        .x
        .iter()
        .map(|&x| r_density(m.nu, m.energy, l, cfg.c, x))
        .collect::<Result<_, _>>()
        .map_err(mode_error)?;
    let wall = wall_density(&m, &ts, &shift, cfg.t).map_err(mode_error)?;
    let body = match cfg.format {
        Format::Csv => {
            let mut s = String::from("t,L,c,g,k,E\n");
            s.push_str(&csv_row(&[fmt17(cfg.t), fmt17(l), fmt17(cfg.c), fmt17(cfg.g), m.k.to_string(), fmt17(m.energy)]));
            s.push_str("x,density,r_density\n");
            for ((x, a), b) in field.x.iter().zip(&rho).zip(&r) {
                s.push_str(&csv_row(&[fmt17(*x), fmt17(*a), fmt17(*b)]));
            }
            s
        }
        Format::Json => Json::object()
            .with("t", cfg.t)
            .with("L", l)
            .with("c", cfg.c)
            .with("g", cfg.g)
            .with("k", m.k)
            .with("E", m.energy)
            .with("x", Json::numbers(field.x.iter().copied()))
            .with("density", Json::numbers(rho.iter().copied()))
            .with("r_density", Json::numbers(r.iter().copied()))
            .render(),
    };
    let results = Json::object()
        .with("mode", mode_json(&m))
        .with("wall_r_density", Json::numbers([wall.r_part.0, wall.r_part.1]))
        .with("wall_density", Json::numbers([wall.psi.0, wall.psi.1]));
    Ok(Outcome::ok(body, results))
}

const REPORT_COLUMNS: [&str; 13] = [
    "mode", "t", "c", "conj_mode", "norm_re", "norm_im", "H_re", "H_im", "x_re", "x_im", "combo_re", "combo_im",
    "im_residual",
];

pub fn observables(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ts = trap(cfg)?;
    let conj_modes = match cfg.conj.as_str() {
        "shift" => vec![ConjMode::ShiftThenConjugate],
        "continued" => vec![ConjMode::ContinuedConjugate],
        _ => vec![ConjMode::ShiftThenConjugate, ConjMode::ContinuedConjugate],
    };
    let m = unit_mode(cfg, &ts, &ShiftConfig::shifted(cfg.c), cfg.t)?;
    let reports = conj_modes
        .into_iter()
        .map(|cm| {
            let shift = ShiftConfig::new(cfg.c, cm).map_err(mode_error)?;
            expectation_report(&m, &ts, &shift, cfg.t).map_err(|e| match e {
                ObservableError::Mode(me) => mode_error(me),
                other => numerical(other),
            })
        })
        .collect::<Result<Vec<ObservableReport>, _>>()?;
    let body = match cfg.format {
        Format::Csv => {
            let mut s = REPORT_COLUMNS.join(",");
            s.push('\n');
            for r in &reports {
                let (norm, h, x, combo) = (r.norm, r.exp_h, r.exp_x, r.combo());
                let mut cells = vec![format!("\"{}\"", r.mode), fmt17(r.t), fmt17(r.c), r.conj_mode.as_str().into()];
                for v in [norm.re, norm.im, h.re, h.im, x.re, x.im, combo.re, combo.im, r.im_residual()] {
                    cells.push(fmt17(v));
                }
                s.push_str(&csv_row(&cells));
            }
            s
        }
        Format::Json => {
            Json::object().with("reports", reports.iter().map(|r| r.to_json()).collect::<Vec<_>>()).render()
        }
    };
    let worst = reports.iter().map(|r| r.im_residual()).fold(0.0, f64::max);
    let results = Json::object().with("mode", mode_json(&m)).with("max_im_residual", worst);
    Ok(Outcome::ok(body, results))
}

fn evolve_error(e: EvolveError) -> CliError {
    match e {
        EvolveError::Config(_) | EvolveError::Boundary(_) => CliError::Config(e.to_string()),
        EvolveError::Scale(s) => scale_error(s),
        EvolveError::Mode(m) => mode_error(m),
        other => numerical(other),
    }
}

fn render_field(field: &GridField, format: Format) -> String {
    match format {
        Format::Csv => field.to_csv(),
        Format::Json => field.to_json().render(),
    }
}

/// `<out>.snapNNNN.<ext>` next to the main output.
fn snapshot_path(out: &Path, index: usize, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    PathBuf::from(format!("{}.snap{index:04}.{ext}", out.display()))
}

pub fn evolve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if !(cfg.t > 0.0) {
        return Err(CliError::Config("evolve needs t > 0".into()));
    }
    if cfg.snapshot_every > 0 && cfg.out.is_none() {
        return Err(CliError::Config("snapshots are written beside --out; set --out".into()));
    }
    let ts = trap(cfg)?;
    let shift = ShiftConfig::shifted(cfg.c);
    let m = unit_mode(cfg, &ts, &shift, 0.0)?;
    let init = GridField::sample(&m, &ts, &shift, 0.0, cfg.grid + 1).map_err(mode_error)?;
    let ecfg = EvolutionConfig::new(cfg.grid, cfg.dt, cfg.t, ts.clone(), cfg.g, cfg.c)
        .map_err(evolve_error)?
        .with_snapshots(cfg.snapshot_every);
    let run = evolve_cn(&ecfg, &init).map_err(evolve_error)?;
    let exact = GridField::sample(&m, &ts, &shift, cfg.t, cfg.grid + 1).map_err(mode_error)?;
    let err = l2_error(&run.field, &exact).map_err(evolve_error)?;

    let mut snapshot_files = Vec::new();
    if let Some(out) = &cfg.out {
        for (i, snap) in run.snapshots.iter().enumerate() {
            let path = snapshot_path(out, i + 1, cfg.format);
            write_file(&path, &render_field(snap, cfg.format))?;
            snapshot_files.push(Json::from(path.display().to_string()));
        }
    }
    let results = Json::object()
        .with("mode", mode_json(&m))
        .with("steps", run.steps)
        .with("dt_used", run.dt)
        .with("initial_norm", run.initial_norm)
        .with("final_norm", run.final_norm)
        .with("norm_drift_per_kstep", run.norm_drift_per_kstep)
        .with("l2_error_vs_closed_form", err)
        .with("snapshots", snapshot_files);
    Ok(Outcome::ok(render_field(&run.field, cfg.format), results))
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let report = run_suite(&SuiteOptions { perturb_energy: cfg.inject_fault });
    let json = report.to_json().render();
    if let Some(path) = &cfg.report {
        write_file(path, &json)?;
    }
    let body = match (cfg.format, &cfg.report) {
        (Format::Json, None) => json,
        _ => report.criteria.iter().map(|c| c.summary_line() + "\n").collect(),
    };
    let failed: Vec<Json> = report.failed_ids().into_iter().map(|id| Json::Int(id as i64)).collect();
    let results = Json::object().with("passed", report.passed()).with("failed", failed);
    Ok(Outcome { body, results, passed: report.passed() })
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}
