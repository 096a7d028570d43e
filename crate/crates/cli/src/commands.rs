use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use rbf_field::adaptive::{default_offsets, reports_to_csv, ParentRule};
use rbf_field::darcy::{convergence_slope, field_rel_error, pressure_rel_error, solve_darcy, DarcyProblem, Face, PressureSolution};
use rbf_field::field::{box_field, smooth_field};
use rbf_field::io::{grid_points, read_field_path, write_grid_csv};
use rbf_field::partition::{load_from_path, save_to_path, Metadata, ParallelFit};
use rbf_field::theory::{l1_error, StepInterfaceSpec};
use rbf_field::{fit_parallel, make_partition, Error, FieldData, GlobalSurrogate, Mesh, Point, Result, Transform};

use crate::presets::{FieldSource, FitSettings, Layout, Preset};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `rbf-field <version> <command> <settings>` — first line of every output.
pub fn provenance(command: &str, settings: &str) -> String {
    format!("rbf-field {VERSION} {command} {settings}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Log,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParentArg {
    /// Nearest existing center to the marked cell's centroid.
    Cell,
    /// Nearest existing center to the new center (narrowest on ties).
    Center,
}

fn parse_offsets(s: &str) -> std::result::Result<Vec<[f64; 2]>, String> {
    s.split(';')
        .map(|pair| {
            let v: Vec<f64> = pair
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad offset {t:?}")))
                .collect::<std::result::Result<_, _>>()?;
            match v.as_slice() {
                [dx] => Ok([*dx, 0.0]),
                [dx, dy] => Ok([*dx, *dy]),
                _ => Err(format!("offset {pair:?} needs one or two components")),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Named experiment supplying the field and default settings.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Field file (`dim nx [ny]`, bounds, then cell values).
    #[arg(long, conflicts_with = "spe10")]
    pub field: Option<PathBuf>,
    /// SPE10 permeability dump; the layer is chosen with --layer.
    #[arg(long)]
    pub spe10: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub layer: usize,
    #[arg(long)]
    pub px: Option<usize>,
    #[arg(long)]
    pub py: Option<usize>,
    /// Cell-centered lattice per subdomain, `G` or `GX,GY`.
    #[arg(long, value_delimiter = ',', conflicts_with = "per_cell")]
    pub lattice: Option<Vec<usize>>,
    /// One initial basis per cell centroid.
    #[arg(long)]
    pub per_cell: bool,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// One value, or one per subdomain (comma separated, row-major).
    #[arg(long, value_delimiter = ',')]
    pub l1: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub l2: Option<Vec<f64>>,
    #[arg(long)]
    pub ktop: Option<usize>,
    /// Keep the first M_q offsets.
    #[arg(long)]
    pub mq: Option<usize>,
    /// Offsets as fractions of the cell size: `dx,dy;dx,dy;...`.
    #[arg(long, value_parser = parse_offsets, allow_hyphen_values = true)]
    pub offsets: Option<Vec<[f64; 2]>>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eps_tol: Option<f64>,
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Coordinate-descent stopping tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub transform: Option<TransformArg>,
    #[arg(long, value_enum)]
    pub parent: Option<ParentArg>,
    #[arg(long)]
    pub quad_order: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Surrogate file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Round-report CSV to write.
    #[arg(long)]
    pub reports: Option<PathBuf>,
}

impl FitArgs {
    /// The field source and settings after applying preset defaults and then
    /// explicit flags.
    pub fn resolve(&self) -> Result<(FieldSource, FitSettings)> {
        let source = if let Some(p) = &self.field {
            FieldSource::File(p.clone())
        } else if let Some(p) = &self.spe10 {
            FieldSource::Spe10 { path: p.clone(), layer: self.layer }
        } else if let Some(s) = self.preset.and_then(FitSettings::default_source) {
            s
        } else {
            return Err(Error::Config(match self.preset {
                Some(p) => format!("preset {} needs its data file (--spe10 or --field)", p.name()),
                None => "no field given: use --field, --spe10 or --preset".into(),
            }));
        };
        let dim = match &source {
            FieldSource::Step1d { .. } => 1,
            FieldSource::Box { .. } | FieldSource::Spe10 { .. } => 2,
            FieldSource::File(_) => 0,
        };
        let mut s = match self.preset {
            Some(p) => FitSettings::for_preset(p),
            None => FitSettings::generic(dim.max(1)),
        };
        if let Some(v) = self.px {
            s.px = v;
        }
        if let Some(v) = self.py {
            s.py = v;
        }
        if self.per_cell {
            s.layout = Layout::PerCell;
        }
        if let Some(g) = &self.lattice {
            s.layout = match g.as_slice() {
                [g] => Layout::Lattice { gx: *g, gy: *g },
                [gx, gy] => Layout::Lattice { gx: *gx, gy: *gy },
                _ => return Err(Error::Config("--lattice takes G or GX,GY".into())),
            };
        }
        if self.sigma.is_some() {
            s.sigma = self.sigma;
        }
        if let Some(v) = &self.l1 {
            s.l1 = v.clone();
        }
        if let Some(v) = &self.l2 {
            s.l2 = v.clone();
        }
        if let Some(v) = self.ktop {
            s.k_top = v;
        }
        if let Some(v) = &self.offsets {
            s.offsets = v.clone();
        }
        if let Some(v) = self.eta {
            s.eta = v;
        }
        if let Some(v) = self.eps_tol {
            s.eps_tol = v;
        }
        if self.m_max.is_some() {
            s.m_max = self.m_max;
        }
        if let Some(v) = self.max_rounds {
            s.max_rounds = v;
        }
        if let Some(v) = self.tol {
            s.tol = v;
        }
        if let Some(v) = self.max_iters {
            s.max_iters = v;
        }
        if let Some(v) = self.transform {
            s.transform = match v {
                TransformArg::Log => Transform::Log,
                TransformArg::Identity => Transform::Identity,
            };
        }
        if let Some(v) = self.parent {
            s.parent = match v {
                ParentArg::Cell => ParentRule::NearestToCell,
                ParentArg::Center => ParentRule::NearestToCenter,
            };
        }
        if let Some(v) = self.quad_order {
            s.quad_order = v;
        }
        Ok((source, s))
    }
}

#[derive(Debug)]
pub struct FitOutcome {
    pub fit: ParallelFit,
    pub field: FieldData,
    pub global_rel_l2: f64,
}

/// Runs a fit for resolved settings without touching the file system.
pub fn run_fit(field: &FieldData, settings: &FitSettings, source: &str, workers: usize) -> Result<ParallelFit> {
    let mut s = settings.clone();
    if field.mesh.dim() == 1 {
        s.py = 1;
        if s.offsets.iter().any(|o| o[1] != 0.0) {
            return Err(Error::Config("1D fields take offsets without a y component".into()));
        }
    }
    let configs = s.subdomain_configs(field)?;
    let partition = make_partition(&field.mesh, s.px, s.py)?;
    let metadata = Metadata {
        config: format!("{} field={source}", s.describe()),
        field_checksum: field.checksum(),
    };
    fit_parallel(field, &partition, &configs, workers, s.quad_order, metadata)
}

pub fn cmd_fit(args: &FitArgs, log: &mut impl Write) -> Result<FitOutcome> {
    let (source, mut settings) = args.resolve()?;
    let field = source.load()?;
    if args.preset.is_none() && args.offsets.is_none() {
        settings.offsets = default_offsets(field.mesh.dim());
    }
    if let Some(m) = args.mq {
        if m == 0 || m > settings.offsets.len() {
            return Err(Error::Config(format!(
                "mq must be in 1..={} for the chosen offsets, got {m}",
                settings.offsets.len()
            )));
        }
        settings.offsets.truncate(m);
    }
    if field.mesh.dim() == 1 {
        settings.py = 1;
    }
    let fit = run_fit(&field, &settings, &source.describe(), args.workers)?;
    save_to_path(&fit.surrogate, &args.out)?;

    let header = provenance(
        "fit",
        &format!("{} field={} workers={}", settings.describe(), source.describe(), args.workers),
    );
    if let Some(path) = &args.reports {
        let rows: Vec<_> = fit
            .subdomains
            .iter()
            .enumerate()
            .flat_map(|(i, o)| o.reports.iter().map(move |r| (Some(i), r)))
            .collect();
        let mut w = create(path)?;
        writeln!(w, "# {header}")?;
        w.write_all(reports_to_csv(&rows).as_bytes())?;
        finish(w, path)?;
    }

    let s = &fit.surrogate;
    let global_rel_l2 = field_rel_error(&field, |x| s.eval(x).unwrap_or(f64::NAN), settings.quad_order)?;
    writeln!(log, "# {header}")?;
    for (i, o) in fit.subdomains.iter().enumerate() {
        let last = o.reports.last().expect("every fit has a round-0 report");
        writeln!(
            log,
            "subdomain {i}: rounds={} centers={} rel_L2={:.6e} stop={:?} seconds={:.3}",
            o.reports.len() - 1,
            last.centers,
            last.rel_l2,
            o.stop,
            o.seconds
        )?;
    }
    writeln!(
        log,
        "global: subdomains={} centers={} rel_L2={:.6e} seconds={:.3} peak_workers={}",
        s.locals.len(),
        s.total_centers(),
        global_rel_l2,
        fit.total_seconds,
        fit.max_concurrency
    )?;
    Ok(FitOutcome { fit, field, global_rel_l2 })
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub surrogate: PathBuf,
    /// Evaluation grid `NX` (1D) or `NX,NY`; points are cell centers.
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<usize>,
    /// Grid bounds `x0,x1[,y0,y1]`; defaults to the surrogate's domain.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bounds: Option<Vec<f64>>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_eval(args: &EvalArgs, stdout: &mut impl Write) -> Result<()> {
    let s = load_from_path(&args.surrogate)?;
    let (nx, ny) = match (s.dim, args.grid.as_slice()) {
        (1, [nx]) => (*nx, 1),
        (2, [nx, ny]) => (*nx, *ny),
        (d, g) => {
            return Err(Error::Config(format!(
                "a {d}D surrogate needs {d} grid counts, got {}",
                g.len()
            )))
        }
    };
    let default_bounds = if s.dim == 1 {
        vec![s.global.lo[0], s.global.hi[0]]
    } else {
        vec![s.global.lo[0], s.global.hi[0], s.global.lo[1], s.global.hi[1]]
    };
    let bounds = args.bounds.clone().unwrap_or(default_bounds);
    let points = grid_points(s.dim, nx, ny, &bounds)?;
    let values = s.evaluate(&points)?;
    let comments = vec![
        provenance(
            "eval",
            &format!(
                "surrogate={} grid={} bounds={}",
                args.surrogate.display(),
                args.grid.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
                bounds.iter().map(|b| format!("{b:e}")).collect::<Vec<_>>().join(",")
            ),
        ),
        format!("surrogate config: {}", s.metadata.config),
    ];
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_grid_csv(&points, &values, &comments, &mut w)?;
            finish(w, path)
        }
        None => write_grid_csv(&points, &values, &comments, stdout),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    /// Rectangular inclusions on the unit square.
    Box,
    /// Smooth log-normal-looking field on the unit square.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryPreset {
    /// p = 1 on the left face, p = 0 on the right face.
    UnitDrop,
    /// p = 100 at the start of the long axis, p = 0 at its end.
    ReservoirDrop,
}

#[derive(Debug, Clone, Args)]
pub struct DarcyArgs {
    /// Reference coefficient from a field file.
    #[arg(long, conflicts_with_all = ["builtin", "constant", "spe10"])]
    pub field: Option<PathBuf>,
    /// Reference coefficient from a built-in 32x32 field.
    #[arg(long, value_enum, conflicts_with_all = ["constant", "spe10"])]
    pub builtin: Option<Builtin>,
    /// Reference coefficient from an SPE10 layer.
    #[arg(long, conflicts_with = "constant")]
    pub spe10: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub layer: usize,
    /// Spatially constant reference coefficient.
    #[arg(long)]
    pub constant: Option<f64>,
    /// Surrogate coefficient; compared against the reference when both are
    /// given.
    #[arg(long)]
    pub surrogate: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BoundaryPreset::UnitDrop)]
    pub preset: BoundaryPreset,
    /// Mesh `NX,NY`; defaults to the reference field's grid, else 32x32.
    #[arg(long, value_delimiter = ',')]
    pub mesh: Option<Vec<usize>>,
    /// Refinement sweep, e.g. `16,32,64`: the surrogate is solved on every
    /// `N x N` mesh and compared with the reference on the finest one.
    #[arg(long, value_delimiter = ',', conflicts_with = "mesh")]
    pub sweep: Option<Vec<usize>>,
    /// Nodal pressure CSV of the last solve.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Error report CSV; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

type Coefficient = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

fn field_coefficient(field: FieldData) -> Coefficient {
    let f = Arc::new(field);
    Arc::new(move |x: &Point| f.value_at(x).unwrap_or(f64::NAN))
}

fn surrogate_coefficient(s: GlobalSurrogate) -> Coefficient {
    let s = Arc::new(s);
    Arc::new(move |x: &Point| s.eval(x).unwrap_or(f64::NAN))
}

fn solve(preset: BoundaryPreset, mesh: Mesh, k: &Coefficient) -> Result<PressureSolution> {
    let k = k.clone();
    let coef = move |x: &Point| k(x);
    solve_darcy(&match preset {
        BoundaryPreset::UnitDrop => DarcyProblem::unit_drop(mesh, coef),
        BoundaryPreset::ReservoirDrop => DarcyProblem::reservoir_drop(mesh, coef),
    })
}

/// One line of the Darcy report.
#[derive(Debug, Clone, PartialEq)]
pub struct DarcyRow {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub iterations: usize,
    pub residual: f64,
    pub inflow: f64,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarcyReport {
    pub rows: Vec<DarcyRow>,
    pub slope: Option<f64>,
}

pub const DARCY_CSV_HEADER: &str = "nx,ny,h,cg_iterations,cg_residual,inflow,rel_error";

pub fn cmd_darcy(args: &DarcyArgs, stdout: &mut impl Write) -> Result<DarcyReport> {
    let reference_field = if let Some(p) = &args.field {
        Some(read_field_path(p)?)
    } else if let Some(p) = &args.spe10 {
        Some(rbf_field::io::read_spe10_path(p, args.layer)?)
    } else {
        match args.builtin {
            Some(Builtin::Box) => Some(box_field(32, 32)?),
            Some(Builtin::Smooth) => Some(smooth_field(32, 32)?),
            None => None,
        }
    };
    let surrogate = args.surrogate.as_deref().map(load_from_path).transpose()?;
    let bounds = match (&reference_field, &surrogate) {
        (Some(f), _) => f.mesh.bounds(),
        (None, Some(s)) => [s.global.lo[0], s.global.hi[0], s.global.lo[1], s.global.hi[1]],
        (None, None) => [0.0, 1.0, 0.0, 1.0],
    };
    let dim = reference_field
        .as_ref()
        .map(|f| f.mesh.dim())
        .or(surrogate.as_ref().map(|s| s.dim))
        .unwrap_or(2);
    if dim != 2 {
        return Err(Error::Config("the darcy command works on 2D domains".into()));
    }
    let default_counts = reference_field
        .as_ref()
        .map(|f| (f.mesh.nx(), f.mesh.ny()))
        .unwrap_or((32, 32));

    let reference: Option<Coefficient> = match (reference_field, args.constant) {
        (Some(f), _) => Some(field_coefficient(f)),
        (None, Some(c)) => Some(Arc::new(move |_: &Point| c)),
        (None, None) => None,
    };
    let test = surrogate.map(surrogate_coefficient);
    if reference.is_none() && test.is_none() {
        return Err(Error::Config(
            "give a coefficient: --field, --builtin, --spe10, --constant and/or --surrogate".into(),
        ));
    }
    let mesh_of = |nx: usize, ny: usize| Mesh::new_2d(nx, ny, bounds);
    let row = |sol: &PressureSolution, rel_error: Option<f64>| DarcyRow {
        nx: sol.mesh.nx(),
        ny: sol.mesh.ny(),
        h: sol.mesh.spacing()[0],
        iterations: sol.iterations,
        residual: sol.residual,
        inflow: match args.preset {
            BoundaryPreset::UnitDrop => sol.face_flux(Face::Left),
            BoundaryPreset::ReservoirDrop if bounds[3] - bounds[2] > bounds[1] - bounds[0] => sol.face_flux(Face::Bottom),
            BoundaryPreset::ReservoirDrop => sol.face_flux(Face::Left),
        },
        rel_error,
    };

    let mut rows = Vec::new();
    let mut last = None;
    let mut slope = None;
    if let Some(ns) = &args.sweep {
        let (Some(r), Some(t)) = (&reference, &test) else {
            return Err(Error::Config("--sweep needs a reference coefficient and --surrogate".into()));
        };
        if ns.len() < 2 || ns.contains(&0) {
            return Err(Error::Config("--sweep needs at least two positive sizes".into()));
        }
        let finest = *ns.iter().max().unwrap();
        if let Some(n) = ns.iter().find(|&&n| finest % n != 0) {
            return Err(Error::Config(format!("sweep size {n} does not divide the finest size {finest}")));
        }
        let reference_sol = solve(args.preset, mesh_of(finest, finest)?, r)?;
        for &n in ns {
            let sol = solve(args.preset, mesh_of(n, n)?, t)?;
            let e = pressure_rel_error(&reference_sol, &sol)?;
            rows.push(row(&sol, Some(e)));
            last = Some(sol);
        }
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let es: Vec<f64> = rows.iter().map(|r| r.rel_error.unwrap()).collect();
        slope = Some(convergence_slope(&hs, &es));
    } else {
        let (nx, ny) = match args.mesh.as_deref() {
            None => default_counts,
            Some([nx, ny]) => (*nx, *ny),
            Some(_) => return Err(Error::Config("--mesh takes NX,NY".into())),
        };
        let reference_sol = reference.as_ref().map(|r| solve(args.preset, mesh_of(nx, ny)?, r)).transpose()?;
        let test_sol = test.as_ref().map(|t| solve(args.preset, mesh_of(nx, ny)?, t)).transpose()?;
        match (reference_sol, test_sol) {
            (Some(r), Some(t)) => {
                let e = pressure_rel_error(&r, &t)?;
                rows.push(row(&r, None));
                rows.push(row(&t, Some(e)));
                last = Some(t);
            }
            (Some(s), None) | (None, Some(s)) => {
                rows.push(row(&s, None));
                last = Some(s);
            }
            (None, None) => unreachable!(),
        }
    }

    let header = provenance(
        "darcy",
        &format!(
            "preset={:?} field={} surrogate={} constant={} mesh={} sweep={}",
            args.preset,
            args.field
                .as_ref()
                .map(|p| p.display().to_string())
                .or(args.spe10.as_ref().map(|p| format!("spe10:{}:layer{}", p.display(), args.layer)))
                .or(args.builtin.map(|b| format!("builtin:{b:?}")))
                .unwrap_or_else(|| "none".into()),
            args.surrogate.as_ref().map_or("none".into(), |p| p.display().to_string()),
            args.constant.map_or("none".into(), |c| c.to_string()),
            args.mesh.as_ref().map_or("default".into(), |m| format!("{m:?}")),
            args.sweep.as_ref().map_or("none".into(), |m| format!("{m:?}")),
        ),
    );
    if let (Some(path), Some(sol)) = (&args.out, &last) {
        let points: Vec<Point> = (0..sol.node_count()).map(|v| sol.node_position(v)).collect();
        let mut w = create(path)?;
        write_grid_csv(&points, &sol.values, &[header.clone()], &mut w)?;
        finish(w, path)?;
    }
    let mut text = format!("# {header}\n{DARCY_CSV_HEADER}\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{:.16e},{},{:.6e},{:.16e},{}\n",
            r.nx,
            r.ny,
            r.h,
            r.iterations,
            r.residual,
            r.inflow,
            r.rel_error.map_or(String::new(), |e| format!("{e:.16e}"))
        ));
    }
    if let Some(s) = slope {
        text.push_str(&format!("# slope={s:.6}\n"));
    }
    match &args.report {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            finish(w, path)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(DarcyReport { rows, slope })
}

#[derive(Debug, Clone, Args)]
pub struct TheoryArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.5,1,2")]
    pub c: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    pub b: Vec<f64>,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const THEORY_CSV_HEADER: &str = "c,sigma,b,numeric,analytic,rel_diff";

pub fn cmd_verify_theory(args: &TheoryArgs, stdout: &mut impl Write) -> Result<Vec<(f64, f64, f64, f64)>> {
    let mut specs = Vec::new();
    let mut problems = Vec::new();
    for &c in &args.c {
        for &sigma in &args.sigma {
            for &b in &args.b {
                match StepInterfaceSpec::along_x(b, c, sigma) {
                    Ok(s) => specs.push(s),
                    Err(e) => problems.push(format!("c={c}, sigma={sigma}, b={b}: {e}")),
                }
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::Config(problems.join("; ")));
    }
    let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let mut text = format!(
        "# {}\n{THEORY_CSV_HEADER}\n",
        provenance(
            "verify-theory",
            &format!("c={} sigma={} b={}", list(&args.c), list(&args.sigma), list(&args.b))
        )
    );
    let mut out = Vec::new();
    for s in &specs {
        let e = l1_error(s)?;
        text.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{:.6e}\n",
            s.scale,
            s.sigma,
            s.offset,
            e.numeric,
            e.analytic,
            e.rel_diff()
        ));
        out.push((s.scale, s.sigma, s.offset, e.rel_diff()));
    }
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(text.as_bytes())?;
            finish(w, path)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(out)
}
