use num_complex::Complex64;

use super::{ModeError, ModeField, ModeSpec, ShiftConfig};
use crate::io::{fmt17, Json};
use crate::trapdyn::TrapSchedule;

const META_HEADER: &str = "t,L,c,g,k,E";
const DATA_HEADER: &str = "x,re_psi,im_psi,density";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    pub t: f64,
    pub l: f64,
    pub g: f64,
    pub k: usize,
    pub energy: f64,
}

/// Field samples `Ψ(x_i − ic)` on real abscissae `x_i ∈ [0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub x: Vec<f64>,
    pub c: f64,
    pub values: Vec<Complex64>,
    pub meta: GridMeta,
}

impl GridField {
    pub fn new(x: Vec<f64>, c: f64, values: Vec<Complex64>, meta: GridMeta) -> Result<Self, ModeError> {
        if x.len() != values.len() {
            return Err(ModeError::Grid(format!("{} abscissae but {} values", x.len(), values.len())));
        }
        if x.is_empty() {
            return Err(ModeError::Grid("empty grid".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(ModeError::Grid("abscissae must be strictly increasing".into()));
        }
        if x.iter().any(|v| !v.is_finite()) || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(ModeError::Grid("non-finite sample".into()));
        }
        Ok(GridField { x, c, values, meta })
    }

    /// `points` evenly spaced samples on `[0, L(t)]`, endpoints included.
    pub fn sample(
        mode: &ModeSpec,
        ts: &TrapSchedule,
        shift: &ShiftConfig,
        t: f64,
        points: usize,
    ) -> Result<Self, ModeError> {
        if points < 2 {
            return Err(ModeError::Grid(format!("need at least 2 points, got {points}")));
        }
        let field = ModeField::new(mode, ts, t)?;
        let l = field.state().l;
        let x: Vec<f64> = (0..points)
            .map(|i| if i + 1 == points { l } else { l * i as f64 / (points - 1) as f64 })
            .collect();
        let values = x.iter().map(|&xi| field.psi(shift.point(xi))).collect::<Result<Vec<_>, _>>()?;
        let meta = GridMeta { t, l, g: mode.g, k: mode.k, energy: mode.energy };
        GridField::new(x, shift.c, values, meta)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn densities(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v.norm_sqr())
    }

    pub fn to_csv(&self) -> String {
        let m = &self.meta;
        let mut out = format!(
            "{META_HEADER}\n{},{},{},{},{},{}\n{DATA_HEADER}\n",
            fmt17(m.t),
            fmt17(m.l),
            fmt17(self.c),
            fmt17(m.g),
            m.k,
            fmt17(m.energy)
        );
        for (x, v) in self.x.iter().zip(&self.values) {
            out.push_str(&format!("{},{},{},{}\n", fmt17(*x), fmt17(v.re), fmt17(v.im), fmt17(v.norm_sqr())));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, ModeError> {
        let bad = |msg: &str| ModeError::Grid(msg.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some(META_HEADER) {
            return Err(bad("missing metadata header"));
        }
        let meta_row: Vec<&str> = lines.next().ok_or_else(|| bad("missing metadata row"))?.split(',').collect();
        if meta_row.len() != 6 {
            return Err(bad("metadata row needs 6 fields"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| ModeError::Grid(format!("bad number {s:?}")));
        let k = meta_row[4].trim().parse::<usize>().map_err(|_| bad("bad root index"))?;
        let meta = GridMeta { t: num(meta_row[0])?, l: num(meta_row[1])?, g: num(meta_row[3])?, k, energy: num(meta_row[5])? };
        let c = num(meta_row[2])?;
        if lines.next() != Some(DATA_HEADER) {
            return Err(bad("missing data header"));
        }
        let mut x = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(ModeError::Grid(format!("data row needs 4 fields: {line:?}")));
            }
            x.push(num(f[0])?);
            values.push(Complex64::new(num(f[1])?, num(f[2])?));
        }
        GridField::new(x, c, values, meta)
    }

    pub fn to_json(&self) -> Json {
        let m = &self.meta;
        Json::object()
            .with("t", m.t)
            .with("L", m.l)
            .with("c", self.c)
            .with("g", m.g)
            .with("k", m.k)
            .with("E", m.energy)
            .with("x", Json::numbers(self.x.iter().copied()))
            .with("re_psi", Json::numbers(self.values.iter().map(|v| v.re)))
            .with("im_psi", Json::numbers(self.values.iter().map(|v| v.im)))
            .with("density", Json::numbers(self.densities()))
    }
}
