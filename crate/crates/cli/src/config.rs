//! Run configuration: a TOML file with a schema version.

use std::fmt;
use std::path::PathBuf;

use maxbloch::lightcone_asym::BandParams;
use maxbloch::numerics::{Rect, Tolerances};
use maxbloch::pulse::Pulse;
use maxbloch::scattering::ScatteringOptions;
use maxbloch::soliton_spectrum::SearchOptions;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Invalid input, reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKindConfig {
    Zero,
    Box,
    SmoothBump,
    PowerStart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub kind: PulseKindConfig,
    #[serde(default)]
    pub amplitude_re: f64,
    #[serde(default)]
    pub amplitude_im: f64,
    /// Start exponent; ignored for `box`.
    #[serde(default = "default_m")]
    pub m: f64,
    pub support_end: f64,
}

fn default_m() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesConfig {
    pub ode_rel: f64,
    pub ode_abs: f64,
    pub quad_tol: f64,
    pub root_tol: f64,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            ode_rel: t.ode_rel,
            ode_abs: t.ode_abs,
            quad_tol: t.quad_tol,
            root_tol: t.root_tol,
        }
    }
}

/// Either an explicit box or the automatic enlargement parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    pub delta0: f64,
    pub k_start: f64,
    pub k_max: f64,
    pub edge_ratio: f64,
    /// `[re_min, re_max, im_min, im_max]`.
    pub rect: Option<[f64; 4]>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let s = SearchOptions::default();
        Self {
            delta0: s.delta0,
            k_start: s.k_start,
            k_max: s.k_max,
            edge_ratio: s.edge_ratio,
            rect: None,
        }
    }
}

/// Missing entries take the defaults for the pulse's start exponent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsConfig {
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub k_big: Option<f64>,
    pub c_cap: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// `t0:t1:nt,x0:x1:nx`, both ends included.
    pub lattice: Option<String>,
    /// Oracle spacing.
    pub h: f64,
    /// Extents of `simulate`.
    pub t_max: f64,
    pub x_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lattice: None,
            h: 0.01,
            t_max: 10.0,
            x_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterConfig {
    /// `k0:k1:n` on the line `Im k = k_im`.
    pub k_re: String,
    pub k_im: f64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            k_re: "-20:20:401".into(),
            k_im: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from(".") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub pulse: PulseConfig,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub bands: BandsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub scatter: ScatterConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Inclusive uniform axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Axis {
    pub fn parse(s: &str) -> Result<Self, UsageError> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, n] = parts[..] else {
            return usage(format!("axis `{s}` must read start:end:count"));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| UsageError(format!("`{v}` in `{s}` is not a number")));
        let (start, end) = (num(a)?, num(b)?);
        let n: usize = n.parse().map_err(|_| UsageError(format!("count `{n}` in `{s}` is not an integer")))?;
        if !(start.is_finite() && end.is_finite()) || n == 0 || (n == 1 && start != end) || end < start {
            return usage(format!("axis `{s}` needs finite start <= end and a count >= 1 (1 only if start = end)"));
        }
        Ok(Self { start, end, n })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let d = (self.end - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.start + d * i as f64).collect()
    }
}

/// The `(t, x)` lattice, iterated with `t` outermost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub t: Axis,
    pub x: Axis,
}

impl Lattice {
    pub fn parse(s: &str) -> Result<Self, UsageError> {
        let Some((t, x)) = s.split_once(',') else {
            return usage(format!("grid `{s}` must read t0:t1:nt,x0:x1:nx"));
        };
        let lat = Self {
            t: Axis::parse(t)?,
            x: Axis::parse(x)?,
        };
        if lat.x.start < 0.0 || lat.t.start < 0.0 {
            return usage(format!("grid `{s}` must lie in t, x >= 0"));
        }
        Ok(lat)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let xs = self.x.values();
        self.t.values().into_iter().flat_map(|t| xs.iter().map(move |&x| (t, x))).collect()
    }
}

fn positive(name: &str, v: f64) -> Result<(), UsageError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        usage(format!("{name} = {v} must be positive and finite"))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, UsageError> {
        let cfg: Self = toml::from_str(text).map_err(|e| UsageError(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return usage(format!(
                "config schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            ));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("RunConfig serializes")
    }

    /// A nontrivial pulse; the zero pulse is a usage error.
    pub fn pulse(&self) -> Result<Pulse, UsageError> {
        let p = &self.pulse;
        let c = C64::new(p.amplitude_re, p.amplitude_im);
        let built = match p.kind {
            PulseKindConfig::Zero => return usage("pulse must be nontrivial (kind = \"zero\")"),
            PulseKindConfig::Box => Pulse::boxcar(c, p.support_end),
            PulseKindConfig::SmoothBump => Pulse::smooth_bump(c, p.m, p.support_end),
            PulseKindConfig::PowerStart => Pulse::power_start(c, p.m, p.support_end),
        };
        built.map_err(|e| UsageError(format!("pulse: {e}")))
    }

    pub fn tolerances(&self, tol_scale: f64) -> Result<Tolerances, UsageError> {
        positive("--tol-scale", tol_scale)?;
        let t = &self.tolerances;
        let tol = Tolerances {
            ode_rel: t.ode_rel,
            ode_abs: t.ode_abs,
            quad_tol: t.quad_tol,
            root_tol: t.root_tol,
        }
        .scaled(tol_scale);
        tol.validate().map_err(|e| UsageError(format!("tolerances: {e}")))?;
        Ok(tol)
    }

    pub fn scattering_options(&self, tol_scale: f64) -> Result<ScatteringOptions, UsageError> {
        Ok(ScatteringOptions {
            tol: self.tolerances(tol_scale)?,
            ..ScatteringOptions::default()
        })
    }

    pub fn search_options(&self) -> Result<SearchOptions, UsageError> {
        let s = &self.search;
        for (name, v) in [("search.delta0", s.delta0), ("search.k_start", s.k_start), ("search.edge_ratio", s.edge_ratio)] {
            positive(name, v)?;
        }
        if !(s.k_max >= s.k_start) {
            return usage(format!("search.k_max = {} must be at least k_start = {}", s.k_max, s.k_start));
        }
        Ok(SearchOptions {
            delta0: s.delta0,
            k_start: s.k_start,
            k_max: s.k_max,
            edge_ratio: s.edge_ratio,
        })
    }

    pub fn search_rect(&self) -> Result<Option<Rect>, UsageError> {
        let Some([a, b, c, d]) = self.search.rect else {
            return Ok(None);
        };
        if !(a < b && 0.0 < c && c < d) {
            return usage(format!("search.rect = [{a}, {b}, {c}, {d}] needs re_min < re_max and 0 < im_min < im_max"));
        }
        Ok(Some(Rect::new(a, b, c, d)))
    }

    pub fn band_params(&self, m: f64) -> Result<BandParams, UsageError> {
        let d = BandParams::for_order(m);
        let b = &self.bands;
        let p = BandParams {
            eps1: b.eps1.unwrap_or(d.eps1),
            eps2: b.eps2.unwrap_or(d.eps2),
            k_big: b.k_big.unwrap_or(d.k_big),
            c_cap: b.c_cap.unwrap_or(d.c_cap),
            sigma: b.sigma.unwrap_or(d.sigma),
        };
        p.validate(m).map_err(|e| UsageError(format!("bands: {e}")))?;
        Ok(p)
    }

    /// The `--grid` flag wins over `grid.lattice`.
    pub fn lattice(&self, flag: Option<&str>) -> Result<Lattice, UsageError> {
        match flag.or(self.grid.lattice.as_deref()) {
            Some(s) => Lattice::parse(s),
            None => usage("no (t, x) lattice: pass --grid t0:t1:nt,x0:x1:nx or set grid.lattice"),
        }
    }

    pub fn k_axis(&self) -> Result<Axis, UsageError> {
        if !self.scatter.k_im.is_finite() {
            return usage("scatter.k_im must be finite");
        }
        Axis::parse(&self.scatter.k_re)
    }
}
