//! Residual-driven fit / mark / enrich loop on a single subdomain.

use std::fmt::Write as _;
use std::time::Instant;

use crate::dictionary::{assemble_normalized, shepard_eval, RbfDictionary, RbfEntry};
use crate::error::{Error, Result};
use crate::field::FieldData;
use crate::geometry::{dist2, Aabb, Point, QuadratureRule};
use crate::solver::{fit_warm, log_targets, ElasticNetConfig, Transform};

/// One mesh cell as seen by a subdomain fit.
#[derive(Debug, Clone, PartialEq)]
pub struct CellData {
    /// Index of the cell in the global mesh.
    pub index: usize,
    pub centroid: Point,
    /// `[dx, dy]`; `dy` is zero in 1D.
    pub spacing: [f64; 2],
    pub quad: QuadratureRule,
    pub value: f64,
}

/// Cellwise-constant data restricted to one subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainField {
    pub region: Aabb,
    pub cells: Vec<CellData>,
}

impl SubdomainField {
    /// The whole field as a single subdomain.
    pub fn whole(field: &FieldData, quad_order: usize) -> Result<Self> {
        let all: Vec<usize> = (0..field.mesh.n_cells()).collect();
        Self::from_cells(field, field.mesh.bounding_box(), &all, quad_order)
    }

    pub fn from_cells(
        field: &FieldData,
        region: Aabb,
        cells: &[usize],
        quad_order: usize,
    ) -> Result<Self> {
        let mesh = &field.mesh;
        let spacing = mesh.spacing();
        let cells = cells
            .iter()
            .map(|&c| {
                Ok(CellData {
                    index: c,
                    centroid: mesh.centroid(c),
                    spacing,
                    quad: mesh.quadrature(c, quad_order)?,
                    value: field.values[c],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { region, cells })
    }

    pub fn sampling_points(&self) -> Vec<Point> {
        self.cells.iter().map(|c| c.centroid).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.value).collect()
    }

    /// `sum_T int_T K_T^2`, the denominator of the relative L2 error.
    pub fn data_norm2(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| c.value * c.value * c.quad.weights.iter().sum::<f64>())
            .sum()
    }
}

/// Fitted surrogate on one subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSurrogate {
    pub dict: RbfDictionary,
    pub beta: Vec<f64>,
    pub transform: Transform,
}

impl LocalSurrogate {
    pub fn new(dict: RbfDictionary, beta: Vec<f64>, transform: Transform) -> Result<Self> {
        if dict.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        if dict.len() != beta.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} bases",
                beta.len(),
                dict.len()
            )));
        }
        Ok(Self {
            dict,
            beta,
            transform,
        })
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let v = shepard_eval(x, &self.dict, &self.beta).expect("validated at construction");
        self.transform.inverse(v)
    }
}

/// Offsets of new centers, as fractions of the marked cell's `[dx, dy]`.
pub fn default_offsets(dim: usize) -> Vec<[f64; 2]> {
    if dim == 1 {
        vec![[-0.25, 0.0], [0.25, 0.0], [0.0, 0.0]]
    } else {
        vec![[-0.5, 0.0], [0.5, 0.0], [0.0, 0.5]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveConfig {
    /// Cells marked per round.
    pub k_top: usize,
    /// Maximum number of bases added over all rounds.
    pub m_max: usize,
    /// Stop once `max R_T < eps_tol`.
    pub eps_tol: f64,
    /// Width shrink factor for new bases, in (0, 1).
    pub eta: f64,
    /// One new center per offset (so `M_q = offsets.len()`).
    pub offsets: Vec<[f64; 2]>,
    /// Number of enrichment rounds allowed.
    pub max_rounds: usize,
    pub elastic: ElasticNetConfig,
    /// Space the regression works in; `Log` keeps the surrogate positive.
    pub transform: Transform,
    pub parent: ParentRule,
}

impl AdaptiveConfig {
    pub fn new(dim: usize, elastic: ElasticNetConfig) -> Self {
        Self {
            k_top: 1,
            m_max: usize::MAX,
            eps_tol: 0.0,
            eta: 0.5,
            offsets: default_offsets(dim),
            max_rounds: 10,
            elastic,
            transform: Transform::Log,
            parent: ParentRule::NearestToCell,
        }
    }

    /// Keeps the first `m_q` default offsets.
    pub fn with_mq(mut self, dim: usize, m_q: usize) -> Result<Self> {
        let all = default_offsets(dim);
        if m_q == 0 || m_q > all.len() {
            return Err(Error::Config(format!(
                "M_q must be in 1..={} with the default offsets, got {m_q}",
                all.len()
            )));
        }
        self.offsets = all[..m_q].to_vec();
        Ok(self)
    }

    pub fn m_q(&self) -> usize {
        self.offsets.len()
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.k_top == 0 {
            problems.push("K_top must be >= 1".to_string());
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            problems.push(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if self.offsets.is_empty() {
            problems.push("M_q must be >= 1".to_string());
        }
        if !(self.eps_tol >= 0.0) {
            problems.push(format!("eps_tol must be >= 0, got {}", self.eps_tol));
        }
        if let Err(e) = self.elastic.validate() {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: usize,
    /// Total dictionary size for this round's fit.
    pub centers: usize,
    /// Bases added since round 0.
    pub added: usize,
    pub max_rt: f64,
    pub rel_l2: f64,
    pub abs_l2: f64,
    pub objective: f64,
    pub converged: bool,
    pub seconds: f64,
}

pub const REPORT_CSV_HEADER: &str = "round,centers,max_RT,rel_L2,objective,seconds,added,abs_L2";

impl RoundReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.6},{},{:.16e}",
            self.round,
            self.centers,
            self.max_rt,
            self.rel_l2,
            self.objective,
            self.seconds,
            self.added,
            self.abs_l2
        )
    }
}

/// Renders reports as CSV; `subdomain` adds a leading column when present.
pub fn reports_to_csv(reports: &[(Option<usize>, &RoundReport)]) -> String {
    let mut out = String::new();
    let with_sub = reports.iter().any(|(s, _)| s.is_some());
    if with_sub {
        out.push_str("subdomain,");
    }
    out.push_str(REPORT_CSV_HEADER);
    out.push('\n');
    for (s, r) in reports {
        if with_sub {
            let _ = write!(out, "{},", s.unwrap_or(0));
        }
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    BudgetExhausted,
    NothingMarked,
    NothingAdded,
    MaxRounds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveFit {
    pub surrogate: LocalSurrogate,
    pub reports: Vec<RoundReport>,
    pub stop: StopReason,
}

/// `sum_l w_l (K*(x_l) - K_T)^2` over the cell's quadrature points.
pub fn residual_indicator(eval: impl Fn(&Point) -> f64, value: f64, quad: &QuadratureRule) -> f64 {
    quad.points
        .iter()
        .zip(&quad.weights)
        .map(|(p, w)| {
            let d = eval(p) - value;
            w * d * d
        })
        .sum()
}

/// Indices of the `k_top` largest positive indicators, ordered by value
/// descending then index ascending.
pub fn mark(indicators: &[f64], k_top: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..indicators.len())
        .filter(|&i| indicators[i] > 0.0)
        .collect();
    idx.sort_by(|&a, &b| indicators[b].total_cmp(&indicators[a]).then(a.cmp(&b)));
    idx.truncate(k_top);
    idx
}

const DUPLICATE_TOL: f64 = 1e-12;

fn same_basis(a: &RbfEntry, center: &Point, width: f64) -> bool {
    (a.center[0] - center[0]).abs() <= DUPLICATE_TOL
        && (a.center[1] - center[1]).abs() <= DUPLICATE_TOL
        && (a.width - width).abs() <= DUPLICATE_TOL
}

/// Which existing basis a new one inherits (and shrinks) its width from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParentRule {
    /// The basis nearest to the marked cell's centroid.
    #[default]
    NearestToCell,
    /// The basis nearest to the new center itself (the narrowest one on
    /// ties), so a cell marked again yields progressively narrower bases
    /// instead of repeats.
    NearestToCenter,
}

fn nearest_narrowest(dict: &RbfDictionary, x: &Point) -> Option<usize> {
    let d = |i: usize| dist2(&dict.get(i).center, x);
    let best = (0..dict.len()).map(d).fold(f64::INFINITY, f64::min);
    (0..dict.len())
        .filter(|&i| d(i) <= best + DUPLICATE_TOL * DUPLICATE_TOL)
        .min_by(|&a, &b| dict.get(a).width.total_cmp(&dict.get(b).width).then(a.cmp(&b)))
}

/// New bases around each marked cell.
///
/// Each center is the cell centroid shifted by an offset (scaled by the cell
/// size) and clamped into `region`; its width is `eta` times the width of the
/// parent basis chosen by `parent`. Exact duplicates of existing or already
/// proposed bases are dropped.
pub fn enrich(
    dict: &RbfDictionary,
    marked: &[&CellData],
    region: &Aabb,
    eta: f64,
    offsets: &[[f64; 2]],
    parent: ParentRule,
    generation: u32,
) -> Vec<RbfEntry> {
    let mut out: Vec<RbfEntry> = Vec::with_capacity(marked.len() * offsets.len());
    for cell in marked {
        let Some(cell_parent) = dict.nearest(&cell.centroid) else {
            continue;
        };
        for off in offsets {
            let raw = [
                cell.centroid[0] + off[0] * cell.spacing[0],
                cell.centroid[1] + off[1] * cell.spacing[1],
            ];
            let center = region.clamp(&raw);
            let p = match parent {
                ParentRule::NearestToCell => cell_parent,
                ParentRule::NearestToCenter => nearest_narrowest(dict, &center).unwrap_or(cell_parent),
            };
            let width = eta * dict.get(p).width;
            let dup = dict.entries().iter().any(|e| same_basis(e, &center, width))
                || out.iter().any(|e| same_basis(e, &center, width));
            if !dup {
                out.push(RbfEntry {
                    center,
                    width,
                    generation,
                });
            }
        }
    }
    out
}

/// Runs the adaptive loop: fit (on log data by default) through Shepard-normalized
/// features, score cells by `R_T`, mark, enrich, extend the coefficients by
/// zeros and refit, until a stopping rule fires.
pub fn fit_adaptive(
    field: &SubdomainField,
    initial: RbfDictionary,
    cfg: &AdaptiveConfig,
) -> Result<AdaptiveFit> {
    cfg.validate()?;
    if initial.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if field.cells.is_empty() {
        return Err(Error::Config("subdomain holds no cells".into()));
    }
    let values = field.values();
    let y = match cfg.transform {
        Transform::Log => log_targets(&values)?,
        Transform::Identity => values.clone(),
    };
    let samples = field.sampling_points();
    let quad_points: Vec<Point> = field
        .cells
        .iter()
        .flat_map(|c| c.quad.points.iter().copied())
        .collect();
    let quad_is_sampling = quad_points == samples;
    let norm = field.data_norm2().sqrt();

    let m0 = initial.len();
    let mut dict = initial;
    let mut beta = vec![0.0; m0];
    let mut reports = Vec::new();
    let mut round = 0usize;

    let stop = loop {
        let started = Instant::now();
        let w = assemble_normalized(&samples, &dict)?;
        let fit = fit_warm(&w, &y, &cfg.elastic, &beta)?;
        beta = fit.beta;

        let log_at_quad = if quad_is_sampling {
            w.mul_vec(&beta)
        } else {
            assemble_normalized(&quad_points, &dict)?.mul_vec(&beta)
        };
        let mut indicators = Vec::with_capacity(field.cells.len());
        let mut offset = 0;
        for cell in &field.cells {
            let n = cell.quad.len();
            let vals = &log_at_quad[offset..offset + n];
            let rt: f64 = vals
                .iter()
                .zip(&cell.quad.weights)
                .map(|(v, w)| {
                    let d = cfg.transform.inverse(*v) - cell.value;
                    w * d * d
                })
                .sum();
            indicators.push(rt);
            offset += n;
        }
        let max_rt = indicators.iter().copied().fold(0.0, f64::max);
        let abs_l2 = indicators.iter().sum::<f64>().sqrt();
        let added = dict.len() - m0;
        reports.push(RoundReport {
            round,
            centers: dict.len(),
            added,
            max_rt,
            rel_l2: abs_l2 / norm,
            abs_l2,
            objective: fit.objective,
            converged: fit.converged,
            seconds: started.elapsed().as_secs_f64(),
        });

        if max_rt < cfg.eps_tol {
            break StopReason::Tolerance;
        }
        if added >= cfg.m_max {
            break StopReason::BudgetExhausted;
        }
        if round >= cfg.max_rounds {
            break StopReason::MaxRounds;
        }
        let marked = mark(&indicators, cfg.k_top);
        if marked.is_empty() {
            break StopReason::NothingMarked;
        }
        let marked_cells: Vec<&CellData> = marked.iter().map(|&i| &field.cells[i]).collect();
        let mut new = enrich(
            &dict,
            &marked_cells,
            &field.region,
            cfg.eta,
            &cfg.offsets,
            cfg.parent,
            (round + 1) as u32,
        );
        new.truncate(cfg.m_max - added);
        if new.is_empty() {
            break StopReason::NothingAdded;
        }
        for e in new {
            dict.push(e)?;
            beta.push(0.0);
        }
        round += 1;
    };

    Ok(AdaptiveFit {
        surrogate: LocalSurrogate::new(dict, beta, cfg.transform)?,
        reports,
        stop,
    })
}
