//! Subcommands. Each one computes its rows in parallel, collects them in
//! lattice order and writes a CSV with a fixed header.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use log::info;
use maxbloch::lightcone_asym::{classify, eval_lightcone, BandParams, Region, RegionTag};
use maxbloch::mb_oracle::{check_invariants, simulate, simulate_columns, SimGrid};
use maxbloch::pulse::Pulse;
use maxbloch::scattering::ScatteringData;
use maxbloch::soliton_spectrum::{default_search_box, find_zeros, SolitonSpectrum};
use maxbloch::tail_asym::eval_tail;
use maxbloch::FieldTriple;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::config::{Lattice, RunConfig, UsageError};

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub out: Option<PathBuf>,
    pub grid: Option<String>,
    pub tol_scale: f64,
}

/// Everything derived from the config once.
pub struct RunContext {
    pub cfg: RunConfig,
    pub flags: Flags,
    pub pulse: Pulse,
    pub sd: ScatteringData,
    pub m: f64,
    pub params: BandParams,
}

impl RunContext {
    pub fn new(cfg: RunConfig, flags: Flags) -> Result<Self> {
        let pulse = cfg.pulse()?;
        let sd = ScatteringData::new(pulse, cfg.scattering_options(flags.tol_scale)?);
        let m = pulse.start_exponent();
        let params = cfg.band_params(m)?;
        Ok(Self {
            cfg,
            flags,
            pulse,
            sd,
            m,
            params,
        })
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.flags.out.clone().unwrap_or_else(|| self.cfg.output.dir.clone());
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    fn lattice(&self) -> Result<Lattice> {
        Ok(self.cfg.lattice(self.flags.grid.as_deref())?)
    }

    fn spectrum(&self) -> Result<SolitonSpectrum> {
        let rect = match self.cfg.search_rect()? {
            Some(r) => r,
            None => default_search_box(&self.sd, &self.cfg.search_options()?),
        };
        Ok(find_zeros(&self.sd, rect)?)
    }
}

pub fn dump_config(ctx: &RunContext) -> Result<PathBuf> {
    let path = ctx.out_dir()?.join("config.toml");
    fs::write(&path, ctx.cfg.to_toml()).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// A CSV table with a fixed header; missing values are empty cells.
struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        info!("wrote {} rows to {}", self.rows.len(), path.display());
        Ok(())
    }
}

/// Shortest round-trip text; scientific notation outside `[1e-4, 1e7)`.
trait Cell {
    fn cell(&self) -> String;
}

impl Cell for f64 {
    fn cell(&self) -> String {
        let a = self.abs();
        if *self == 0.0 || !self.is_finite() || (1e-4..1e7).contains(&a) {
            format!("{self}")
        } else {
            format!("{self:e}")
        }
    }
}

macro_rules! display_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            fn cell(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_cell!(u32, u64, usize, &str, String, Region);

fn cell<T: Cell>(v: T) -> String {
    v.cell()
}

fn opt<T: Cell>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.cell())
}

fn field_cells(f: &FieldTriple) -> [String; 5] {
    [cell(f.e.re), cell(f.e.im), cell(f.n), cell(f.rho.re), cell(f.rho.im)]
}

pub fn scatter(ctx: &RunContext) -> Result<PathBuf> {
    let axis = ctx.cfg.k_axis()?;
    let k_im = ctx.cfg.scatter.k_im;
    let rows = axis
        .values()
        .par_iter()
        .map(|&kr| -> Result<Vec<String>> {
            let k = C64::new(kr, k_im);
            let (a, b) = ctx.sd.ab_coeffs(k)?;
            let r = ctx.sd.reflection(k)?;
            // |a|^2 + |b|^2 = 1 holds on the real line only.
            let defect = (k_im == 0.0).then(|| (a.norm_sqr() + b.norm_sqr() - 1.0).abs());
            Ok(vec![
                cell(k.re),
                cell(k.im),
                cell(a.re),
                cell(a.im),
                cell(b.re),
                cell(b.im),
                cell(r.re),
                cell(r.im),
                opt(defect),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let path = ctx.out_dir()?.join("scatter.csv");
    Table {
        header: &["k_re", "k_im", "a_re", "a_im", "b_re", "b_im", "r_re", "r_im", "unitarity_defect"],
        rows,
    }
    .write(&path)?;
    Ok(path)
}

pub fn zeros(ctx: &RunContext) -> Result<PathBuf> {
    let spec = ctx.spectrum()?;
    let rows = spec
        .zeros
        .iter()
        .enumerate()
        .map(|(j, z)| {
            vec![
                cell(j + 1),
                cell(z.k.re),
                cell(z.k.im),
                cell(z.gamma.re),
                cell(z.gamma.im),
                cell(z.velocity),
            ]
        })
        .collect();
    let path = ctx.out_dir()?.join("zeros.csv");
    Table {
        header: &["j", "kj_re", "kj_im", "gamma_re", "gamma_im", "velocity"],
        rows,
    }
    .write(&path)?;
    Ok(path)
}

/// One asymptotic evaluation; `field` is `None` for unsupported points.
#[derive(Debug, Clone)]
pub struct AsymPoint {
    pub tag: RegionTag,
    pub field: Option<FieldTriple>,
    pub error_scale: Option<f64>,
    /// `(j, |w|, arg w)` near a soliton line, `j` counted from 1.
    pub soliton: Option<(usize, f64, f64)>,
}

fn part_index(r: Region) -> Option<u32> {
    match r {
        Region::PartIV(n) => Some(n),
        _ => None,
    }
}

fn asym_point(ctx: &RunContext, spec: Option<&SolitonSpectrum>, t: f64, x: f64) -> Result<AsymPoint> {
    let tag = classify(t, x, ctx.m, &ctx.params);
    let mut out = AsymPoint {
        tag,
        field: None,
        error_scale: None,
        soliton: None,
    };
    match tag.region {
        Region::Causal => {
            out.field = Some(FieldTriple::trivial());
            out.error_scale = Some(0.0);
        }
        Region::Unsupported => {}
        Region::Tail => {
            let spec = spec.expect("spectrum is computed when tail points exist");
            let v = eval_tail(&ctx.sd, spec, t, x, spec.default_match_eps())?;
            out.field = Some(v.field);
            out.error_scale = Some(v.error_scale);
            out.soliton = v.soliton.map(|s| (s.j + 1, s.w_abs, s.w_arg));
        }
        _ => {
            let v = eval_lightcone(&tag, t, x, &ctx.sd, &ctx.params)?;
            out.field = Some(v.field);
            out.error_scale = Some(v.error.nominal);
        }
    }
    Ok(out)
}

fn asym_points(ctx: &RunContext, pts: &[(f64, f64)]) -> Result<Vec<AsymPoint>> {
    let needs_spectrum = pts.iter().any(|&(t, x)| classify(t, x, ctx.m, &ctx.params).region == Region::Tail);
    let spec = if needs_spectrum { Some(ctx.spectrum()?) } else { None };
    pts.par_iter().map(|&(t, x)| asym_point(ctx, spec.as_ref(), t, x)).collect()
}

pub fn asym(ctx: &RunContext) -> Result<PathBuf> {
    let pts = ctx.lattice()?.points();
    let vals = asym_points(ctx, &pts)?;
    let rows = pts
        .iter()
        .zip(&vals)
        .map(|(&(t, x), v)| {
            let mut row = vec![cell(t), cell(x), cell(v.tag.region), opt(part_index(v.tag.region))];
            match &v.field {
                Some(f) => row.extend(field_cells(f)),
                None => row.extend(std::iter::repeat(String::new()).take(5)),
            }
            row.push(opt(v.error_scale));
            row.push(opt(v.soliton.map(|s| s.0)));
            row.push(opt(v.soliton.map(|s| s.1)));
            row.push(opt(v.soliton.map(|s| s.2)));
            row
        })
        .collect();
    let path = ctx.out_dir()?.join("asym.csv");
    Table {
        header: &[
            "t", "x", "region", "n", "E_re", "E_im", "N", "rho_re", "rho_im", "error_scale", "soliton_j", "w_abs", "w_arg",
        ],
        rows,
    }
    .write(&path)?;
    Ok(path)
}

pub fn regions(ctx: &RunContext) -> Result<PathBuf> {
    let rows = ctx
        .lattice()?
        .points()
        .into_iter()
        .map(|(t, x)| {
            let tag = classify(t, x, ctx.m, &ctx.params);
            vec![
                cell(t),
                cell(x),
                cell(tag.region),
                opt(part_index(tag.region)),
                cell(tag.k0),
                cell(tag.xi),
                cell(tag.band.0),
                cell(tag.band.1),
            ]
        })
        .collect();
    let path = ctx.out_dir()?.join("regions.csv");
    Table {
        header: &["t", "x", "region", "n", "k0", "xi", "band_lo", "band_hi"],
        rows,
    }
    .write(&path)?;
    Ok(path)
}

fn slice_table(grid: &SimGrid, lat: &Lattice) -> Result<Table> {
    let rows = lat
        .points()
        .into_iter()
        .map(|(t, x)| -> Result<Vec<String>> {
            let f = grid.probe(t, x)?;
            let mut row = vec![cell(t), cell(x)];
            row.extend(field_cells(&f));
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        header: &["t", "x", "E_re", "E_im", "N", "rho_re", "rho_im"],
        rows,
    })
}

/// Runs the oracle on `[0, t_max] x [0, x_max]`, writes `simulate.bin`, the
/// invariant report and, when a lattice is given, `simulate.csv`.
pub fn simulate_cmd(ctx: &RunContext) -> Result<PathBuf> {
    let g = &ctx.cfg.grid;
    let grid = simulate(&ctx.pulse, g.t_max, g.x_max, g.h)?;
    let report = check_invariants(&grid, &ctx.pulse);
    info!("oracle invariants: {report:?}");
    let dir = ctx.out_dir()?;
    let bin = dir.join("simulate.bin");
    grid.write_to(BufWriter::new(File::create(&bin)?))?;
    Table {
        header: &["nodes", "max_conservation_defect", "max_causality_defect", "boundary_error"],
        rows: vec![vec![
            cell(report.nodes),
            cell(report.max_conservation_defect),
            cell(report.max_causality_defect),
            cell(report.boundary_error),
        ]],
    }
    .write(&dir.join("simulate_invariants.csv"))?;
    if ctx.flags.grid.is_some() || ctx.cfg.grid.lattice.is_some() {
        slice_table(&grid, &ctx.lattice()?)?.write(&dir.join("simulate.csv"))?;
    }
    Ok(bin)
}

/// Reads a grid written by `simulate` and probes it on the lattice.
pub fn slice(ctx: &RunContext, input: &Path) -> Result<PathBuf> {
    let f = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let grid = SimGrid::read_from(BufReader::new(f), &ctx.pulse)?;
    let path = ctx.out_dir()?.join("slice.csv");
    slice_table(&grid, &ctx.lattice()?)?.write(&path)?;
    Ok(path)
}

/// Least-squares slope of `ln y` against `ln v`.
fn log_slope(pairs: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(v, y)| *v > 0.0 && *y > 0.0)
        .map(|(v, y)| (v.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || !(sxx > 0.0) {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct CompareRow {
    t: f64,
    x: f64,
    tag: RegionTag,
    oracle: FieldTriple,
    asym: Option<(FieldTriple, f64)>,
}

impl CompareRow {
    fn abs_dev(&self) -> Option<f64> {
        self.asym.map(|(a, _)| (self.oracle.e - a.e).norm())
    }

    fn rel_dev(&self) -> Option<f64> {
        let (a, _) = self.asym?;
        let d = (self.oracle.e - a.e).norm();
        Some(if a.e.norm() > 0.0 { d / a.e.norm() } else { d })
    }

    /// Relative deviation times `k0^m` on the near-cone parts.
    fn scaled_dev(&self) -> Option<f64> {
        self.tag.region.is_near_cone().then(|| self.rel_dev().map(|d| d * self.tag.k0.powf(self.tag.m))).flatten()
    }
}

/// Oracle against asymptotics on the lattice. Lattice `x` values must be
/// multiples of `grid.h`.
pub fn compare(ctx: &RunContext) -> Result<PathBuf> {
    let pts = ctx.lattice()?.points();
    let h = ctx.cfg.grid.h;
    let mut xs: Vec<f64> = Vec::new();
    for &(_, x) in &pts {
        let j = (x / h).round();
        if (j * h - x).abs() > 1e-9 * x.max(h) {
            return Err(UsageError(format!("lattice x = {x} is not a multiple of grid.h = {h}")).into());
        }
        if !xs.contains(&(j * h)) {
            xs.push(j * h);
        }
    }
    let tau_max = pts.iter().map(|&(t, x)| t - x).fold(0.0, f64::max);
    // Room for the cubic stencil above the highest point.
    let s_max = ((tau_max / h).ceil() + 4.0) * h;
    let x_max = xs.iter().copied().fold(h, f64::max);
    let (cols, report) = simulate_columns(&ctx.pulse, s_max, x_max, h, &xs)?;
    info!("oracle band run: {report:?}");
    let vals = asym_points(ctx, &pts)?;
    let rows = pts
        .iter()
        .zip(vals)
        .map(|(&(t, x), v)| -> Result<CompareRow> {
            Ok(CompareRow {
                t,
                x,
                tag: v.tag,
                oracle: cols.probe(t - x, x)?,
                asym: v.field.zip(v.error_scale),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let dir = ctx.out_dir()?;
    let table = Table {
        header: &[
            "t", "x", "region", "n", "status", "E_oracle_re", "E_oracle_im", "N_oracle", "E_asym_re", "E_asym_im", "N_asym",
            "abs_dev", "rel_dev", "scaled_dev", "error_scale",
        ],
        rows: rows
            .iter()
            .map(|r| {
                let status = if r.asym.is_some() { "ok" } else { "skipped" };
                vec![
                    cell(r.t),
                    cell(r.x),
                    cell(r.tag.region),
                    opt(part_index(r.tag.region)),
                    cell(status),
                    cell(r.oracle.e.re),
                    cell(r.oracle.e.im),
                    cell(r.oracle.n),
                    opt(r.asym.map(|a| a.0.e.re)),
                    opt(r.asym.map(|a| a.0.e.im)),
                    opt(r.asym.map(|a| a.0.n)),
                    opt(r.abs_dev()),
                    opt(r.rel_dev()),
                    opt(r.scaled_dev()),
                    opt(r.asym.map(|a| a.1)),
                ]
            })
            .collect(),
    };
    let path = dir.join("compare.csv");
    table.write(&path)?;

    let mut names: Vec<String> = Vec::new();
    for r in &rows {
        let name = r.tag.region.to_string();
        if r.asym.is_some() && !names.contains(&name) {
            names.push(name);
        }
    }
    let summary = names
        .iter()
        .map(|name| {
            let group: Vec<&CompareRow> = rows
                .iter()
                .filter(|r| r.asym.is_some() && &r.tag.region.to_string() == name)
                .collect();
            let mut rel: Vec<f64> = group.iter().filter_map(|r| r.rel_dev()).collect();
            let max = rel.iter().copied().fold(0.0, f64::max);
            let med = median(&mut rel);
            let tail = group[0].tag.region == Region::Tail;
            let (var, fit) = match group[0].tag.region {
                Region::Causal | Region::Unsupported => ("", None),
                _ => {
                    let pairs: Vec<(f64, f64)> = group
                        .iter()
                        .filter_map(|r| r.rel_dev().map(|d| (if tail { r.t - r.x } else { r.tag.k0 }, d)))
                        .collect();
                    (if tail { "tau" } else { "k0" }, log_slope(&pairs))
                }
            };
            vec![name.clone(), cell(group.len()), cell(max), cell(med), cell(var), opt(fit)]
        })
        .collect();
    Table {
        header: &["region", "count", "max_rel_dev", "median_rel_dev", "fit_variable", "decay_exponent"],
        rows: summary,
    }
    .write(&dir.join("compare_summary.csv"))?;
    Ok(path)
}
