//! Named experiment setups and the resolved fit configuration they feed.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::ValueEnum;
use rbf_field::adaptive::{default_offsets, ParentRule};
use rbf_field::field::{box_field, step_1d};
use rbf_field::io::{read_field_path, read_spe10_path};
use rbf_field::{
    AdaptiveConfig, ElasticNetConfig, Error, FieldData, InitialDictionary, Result, SubdomainConfig, Transform,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 1D step on 16 cells, two initial centers, one cell marked per round.
    Step1d,
    /// 32x32 box field, one basis per cell, no enrichment.
    CaseUniform,
    /// 32x32 box field, three rounds of 204 marked cells.
    CaseAdaptive,
    /// 32x32 box field split into 2x2 subdomains, no enrichment.
    CaseParallel,
    /// One SPE10 layer split into 2x4 subdomains, 660 marked cells per round.
    Spe10,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Step1d => "step1d",
            Preset::CaseUniform => "case-uniform",
            Preset::CaseAdaptive => "case-adaptive",
            Preset::CaseParallel => "case-parallel",
            Preset::Spe10 => "spe10",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Step1d { nx: usize },
    Box { nx: usize, ny: usize },
    File(PathBuf),
    Spe10 { path: PathBuf, layer: usize },
}

impl FieldSource {
    pub fn load(&self) -> Result<FieldData> {
        match self {
            FieldSource::Step1d { nx } => step_1d(*nx),
            FieldSource::Box { nx, ny } => box_field(*nx, *ny),
            FieldSource::File(p) => read_field_path(p),
            FieldSource::Spe10 { path, layer } => read_spe10_path(path, *layer),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            FieldSource::Step1d { nx } => format!("builtin:step1d:{nx}"),
            FieldSource::Box { nx, ny } => format!("builtin:box:{nx}x{ny}"),
            FieldSource::File(p) => format!("file:{}", p.display()),
            FieldSource::Spe10 { path, layer } => format!("spe10:{}:layer{layer}", path.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Layout {
    PerCell,
    Lattice { gx: usize, gy: usize },
}

/// Every knob of a fit, fully resolved. `sigma: None` means "the larger
/// cell spacing of the field".
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub px: usize,
    pub py: usize,
    pub layout: Layout,
    pub sigma: Option<f64>,
    /// One value for all subdomains or one per subdomain.
    pub l1: Vec<f64>,
    pub l2: Vec<f64>,
    pub k_top: usize,
    pub offsets: Vec<[f64; 2]>,
    pub eta: f64,
    pub eps_tol: f64,
    pub m_max: Option<usize>,
    pub max_rounds: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub transform: Transform,
    pub parent: ParentRule,
    pub quad_order: usize,
}

/// Interior offsets used by the 2D enrichment presets: the new centers stay
/// inside the marked cell, so neighbouring marked cells never produce the
/// same center.
pub const INTERIOR_OFFSETS_2D: [[f64; 2]; 3] = [[-0.25, 0.0], [0.25, 0.0], [0.0, 0.25]];

impl FitSettings {
    /// Library defaults: one subdomain, one basis per cell, width equal to
    /// the cell spacing, no enrichment.
    pub fn generic(dim: usize) -> Self {
        Self {
            px: 1,
            py: 1,
            layout: Layout::PerCell,
            sigma: None,
            l1: vec![1e-6],
            l2: vec![1e-4],
            k_top: 1,
            offsets: default_offsets(dim),
            eta: 0.5,
            eps_tol: 0.0,
            m_max: None,
            max_rounds: 0,
            tol: 1e-10,
            max_iters: 100_000,
            transform: Transform::Log,
            parent: ParentRule::NearestToCell,
            quad_order: 1,
        }
    }

    pub fn for_preset(p: Preset) -> Self {
        match p {
            Preset::Step1d => Self {
                layout: Layout::Lattice { gx: 2, gy: 1 },
                sigma: Some(0.0019),
                l1: vec![4.59e-4],
                l2: vec![4.64e-6],
                max_rounds: 6,
                ..Self::generic(1)
            },
            Preset::CaseUniform => Self {
                layout: Layout::Lattice { gx: 32, gy: 32 },
                sigma: Some(1.0 / 32.0),
                ..Self::generic(2)
            },
            Preset::CaseAdaptive => Self {
                k_top: 204,
                offsets: INTERIOR_OFFSETS_2D.to_vec(),
                parent: ParentRule::NearestToCenter,
                max_rounds: 3,
                ..Self::for_preset(Preset::CaseUniform)
            },
            Preset::CaseParallel => Self {
                px: 2,
                py: 2,
                layout: Layout::Lattice { gx: 16, gy: 16 },
                ..Self::for_preset(Preset::CaseUniform)
            },
            Preset::Spe10 => Self {
                px: 2,
                py: 4,
                sigma: Some(0.00159),
                k_top: 660,
                offsets: INTERIOR_OFFSETS_2D.to_vec(),
                parent: ParentRule::NearestToCenter,
                max_rounds: 1,
                ..Self::generic(2)
            },
        }
    }

    pub fn default_source(p: Preset) -> Option<FieldSource> {
        match p {
            Preset::Step1d => Some(FieldSource::Step1d { nx: 16 }),
            Preset::CaseUniform | Preset::CaseAdaptive | Preset::CaseParallel => {
                Some(FieldSource::Box { nx: 32, ny: 32 })
            }
            Preset::Spe10 => None,
        }
    }

    pub fn subdomains(&self) -> usize {
        self.px * self.py
    }

    /// Checks everything at once and reports every problem found.
    pub fn validate(&self, field: &FieldData) -> Result<()> {
        let mut problems = Vec::new();
        let mesh = &field.mesh;
        let py = if mesh.dim() == 1 { 1 } else { self.py };
        if self.px == 0 || self.py == 0 {
            problems.push("px and py must be positive".to_string());
        } else {
            if mesh.nx() % self.px != 0 {
                problems.push(format!("px = {} does not divide nx = {}", self.px, mesh.nx()));
            }
            if mesh.ny() % py != 0 {
                problems.push(format!("py = {} does not divide ny = {}", py, mesh.ny()));
            }
        }
        let n = self.px.max(1) * py.max(1);
        for (name, list) in [("l1", &self.l1), ("l2", &self.l2)] {
            if list.len() != 1 && list.len() != n {
                problems.push(format!(
                    "{name} needs 1 or {n} values (one per subdomain), got {}",
                    list.len()
                ));
            }
            if let Some(v) = list.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                problems.push(format!("{name} values must be finite and >= 0, got {v}"));
            }
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                problems.push(format!("sigma must be positive, got {s}"));
            }
        }
        if let Layout::Lattice { gx, gy } = self.layout {
            if gx == 0 || gy == 0 {
                problems.push("lattice size must be positive".to_string());
            }
        }
        if self.k_top == 0 {
            problems.push("ktop must be >= 1".to_string());
        }
        if self.offsets.is_empty() {
            problems.push("at least one offset (mq >= 1) is required".to_string());
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            problems.push(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.eps_tol >= 0.0) {
            problems.push(format!("eps-tol must be >= 0, got {}", self.eps_tol));
        }
        if !(self.tol > 0.0) {
            problems.push(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iters == 0 {
            problems.push("max-iters must be positive".to_string());
        }
        if !(1..=2).contains(&self.quad_order) {
            problems.push(format!("quad-order must be 1 or 2, got {}", self.quad_order));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn resolved_sigma(&self, field: &FieldData) -> f64 {
        self.sigma.unwrap_or_else(|| {
            let [dx, dy] = field.mesh.spacing();
            if field.mesh.dim() == 1 {
                dx
            } else {
                dx.max(dy)
            }
        })
    }

    pub fn subdomain_configs(&self, field: &FieldData) -> Result<Vec<SubdomainConfig>> {
        self.validate(field)?;
        let dim = field.mesh.dim();
        let sigma = self.resolved_sigma(field);
        let initial = match self.layout {
            Layout::PerCell => InitialDictionary::PerCell { sigma },
            Layout::Lattice { gx, gy } => InitialDictionary::Lattice { gx, gy, sigma },
        };
        let n = if self.l1.len() == 1 && self.l2.len() == 1 { 1 } else { self.px * if dim == 1 { 1 } else { self.py } };
        let pick = |v: &[f64], i: usize| if v.len() == 1 { v[0] } else { v[i] };
        (0..n)
            .map(|i| {
                let mut el = ElasticNetConfig::new(pick(&self.l1, i), pick(&self.l2, i));
                el.tol = self.tol;
                el.max_iters = self.max_iters;
                let mut a = AdaptiveConfig::new(dim, el);
                a.k_top = self.k_top;
                a.offsets = self.offsets.clone();
                a.eta = self.eta;
                a.eps_tol = self.eps_tol;
                a.m_max = self.m_max.unwrap_or(usize::MAX);
                a.max_rounds = self.max_rounds;
                a.transform = self.transform;
                a.parent = self.parent;
                a.validate()?;
                Ok(SubdomainConfig { initial, adaptive: a })
            })
            .collect()
    }

    /// `key=value` echo of every setting, in a fixed order. Worker count and
    /// output paths are deliberately not part of it, so a surrogate file
    /// does not depend on how it was scheduled or where it was written.
    pub fn describe(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        let mut s = format!("px={} py={} ", self.px, self.py);
        match self.layout {
            Layout::PerCell => s.push_str("layout=per-cell "),
            Layout::Lattice { gx, gy } => {
                let _ = write!(s, "layout=lattice:{gx}x{gy} ");
            }
        }
        match self.sigma {
            Some(v) => {
                let _ = write!(s, "sigma={v:e} ");
            }
            None => s.push_str("sigma=cell "),
        }
        let offsets = self
            .offsets
            .iter()
            .map(|o| format!("{}:{}", o[0], o[1]))
            .collect::<Vec<_>>()
            .join(",");
        let _ = write!(
            s,
            "l1={} l2={} ktop={} offsets={} eta={} eps_tol={:e} m_max={} max_rounds={} tol={:e} max_iters={} transform={} parent={} quad_order={}",
            list(&self.l1),
            list(&self.l2),
            self.k_top,
            offsets,
            self.eta,
            self.eps_tol,
            self.m_max.map_or("none".to_string(), |m| m.to_string()),
            self.max_rounds,
            self.tol,
            self.max_iters,
            match self.transform {
                Transform::Log => "log",
                Transform::Identity => "identity",
            },
            match self.parent {
                ParentRule::NearestToCell => "cell",
                ParentRule::NearestToCenter => "center",
            },
            self.quad_order
        );
        s
    }
}
