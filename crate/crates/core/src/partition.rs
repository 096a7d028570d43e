//! Half-open domain decomposition, independent per-subdomain fitting, and
//! the assembled global surrogate with its text file format.

use std::io::{BufRead, BufReader, Read, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::adaptive::{fit_adaptive, AdaptiveConfig, LocalSurrogate, RoundReport, StopReason, SubdomainField};
use crate::dictionary::{RbfDictionary, RbfEntry};
use crate::error::{Error, Result};
use crate::field::FieldData;
use crate::geometry::{locate, Aabb, Mesh, Point};
use crate::solver::Transform;

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub dim: usize,
    pub px: usize,
    pub py: usize,
    pub global: Aabb,
    /// Subdomain boxes, x index fastest.
    pub boxes: Vec<Aabb>,
    /// Owning subdomain of every mesh cell.
    pub cell_owner: Vec<usize>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn cells_of(&self, sub: usize) -> Vec<usize> {
        (0..self.cell_owner.len())
            .filter(|&c| self.cell_owner[c] == sub)
            .collect()
    }
}

/// Splits the mesh into `px x py` equal boxes whose internal upper faces are
/// open, so every point (and every cell) has exactly one owner.
pub fn make_partition(mesh: &Mesh, px: usize, py: usize) -> Result<Partition> {
    if px == 0 || py == 0 {
        return Err(Error::Config(format!("partition shape must be positive, got {px}x{py}")));
    }
    if mesh.dim() == 1 && py != 1 {
        return Err(Error::Config(format!("1D partitions need py = 1, got {py}")));
    }
    if mesh.nx() % px != 0 || mesh.ny() % py != 0 {
        return Err(Error::Config(format!(
            "partition {px}x{py} does not divide the {}x{} mesh",
            mesh.nx(),
            mesh.ny()
        )));
    }
    let [dx, dy] = mesh.spacing();
    let (lo, hi) = (mesh.lo(), mesh.hi());
    let (cx, cy) = (mesh.nx() / px, mesh.ny() / py);
    let mut boxes = Vec::with_capacity(px * py);
    for j in 0..py {
        for i in 0..px {
            let b_lo = [lo[0] + (i * cx) as f64 * dx, lo[1] + (j * cy) as f64 * dy];
            let b_hi = [
                if i + 1 == px { hi[0] } else { lo[0] + ((i + 1) * cx) as f64 * dx },
                if mesh.dim() == 1 || j + 1 == py {
                    hi[1]
                } else {
                    lo[1] + ((j + 1) * cy) as f64 * dy
                },
            ];
            boxes.push(Aabb {
                dim: mesh.dim(),
                lo: b_lo,
                hi: b_hi,
                upper_closed: [i + 1 == px, mesh.dim() == 1 || j + 1 == py],
            });
        }
    }
    let cell_owner = (0..mesh.n_cells())
        .map(|c| locate(&mesh.centroid(c), &boxes))
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition {
        dim: mesh.dim(),
        px,
        py,
        global: mesh.bounding_box(),
        boxes,
        cell_owner,
    })
}

/// How the initial dictionary of a subdomain is laid out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDictionary {
    /// One basis at each cell centroid.
    PerCell { sigma: f64 },
    /// Cell-centered `gx x gy` lattice over the subdomain box.
    Lattice { gx: usize, gy: usize, sigma: f64 },
}

impl InitialDictionary {
    pub fn build(&self, sub: &SubdomainField) -> Result<RbfDictionary> {
        match *self {
            InitialDictionary::PerCell { sigma } => {
                RbfDictionary::uniform(&sub.sampling_points(), sigma)
            }
            InitialDictionary::Lattice { gx, gy, sigma } => {
                let r = &sub.region;
                let gy = if r.dim == 1 { 1 } else { gy };
                if gx == 0 || gy == 0 {
                    return Err(Error::Config("lattice size must be positive".into()));
                }
                let mut centers = Vec::with_capacity(gx * gy);
                for j in 0..gy {
                    for i in 0..gx {
                        let x = r.lo[0] + (i as f64 + 0.5) * r.extent(0) / gx as f64;
                        let y = if r.dim == 2 {
                            r.lo[1] + (j as f64 + 0.5) * r.extent(1) / gy as f64
                        } else {
                            0.0
                        };
                        centers.push([x, y]);
                    }
                }
                RbfDictionary::uniform(&centers, sigma)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainConfig {
    pub initial: InitialDictionary,
    pub adaptive: AdaptiveConfig,
}

/// Provenance carried by a surrogate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metadata {
    /// Free-form single-line description of the run that produced it.
    pub config: String,
    /// Checksum of the fitted field data.
    pub field_checksum: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSurrogate {
    pub dim: usize,
    pub global: Aabb,
    pub px: usize,
    pub py: usize,
    pub boxes: Vec<Aabb>,
    pub locals: Vec<LocalSurrogate>,
    pub metadata: Metadata,
}

impl GlobalSurrogate {
    pub fn eval(&self, x: &Point) -> Result<f64> {
        let sub = locate(x, &self.boxes)?;
        Ok(self.locals[sub].eval(x))
    }

    /// Order-preserving batch evaluation; reports the first point outside
    /// the domain.
    pub fn evaluate(&self, points: &[Point]) -> Result<Vec<f64>> {
        points
            .par_iter()
            .enumerate()
            .map(|(index, p)| {
                let sub = locate(p, &self.boxes).map_err(|_| Error::OutOfDomainAt {
                    index,
                    point: *p,
                })?;
                Ok(self.locals[sub].eval(p))
            })
            .collect()
    }

    pub fn total_centers(&self) -> usize {
        self.locals.iter().map(|l| l.dict.len()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SubdomainOutcome {
    pub reports: Vec<RoundReport>,
    pub stop: StopReason,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ParallelFit {
    pub surrogate: GlobalSurrogate,
    pub subdomains: Vec<SubdomainOutcome>,
    pub total_seconds: f64,
    /// Largest number of subdomain fits observed running at once.
    pub max_concurrency: usize,
}

/// Fits every subdomain independently on a pool of `workers` threads.
///
/// `configs` holds one entry per subdomain or a single entry used for all.
/// Results are gathered by subdomain index, so the output does not depend on
/// the worker count.
pub fn fit_parallel(
    field: &FieldData,
    partition: &Partition,
    configs: &[SubdomainConfig],
    workers: usize,
    quad_order: usize,
    metadata: Metadata,
) -> Result<ParallelFit> {
    let n = partition.len();
    if configs.len() != 1 && configs.len() != n {
        return Err(Error::Config(format!(
            "{} subdomain configs for {n} subdomains",
            configs.len()
        )));
    }
    if workers == 0 {
        return Err(Error::Config("worker count must be positive".into()));
    }
    if field.mesh.n_cells() != partition.cell_owner.len() {
        return Err(Error::DimensionMismatch("partition was built for another mesh".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    let running = AtomicUsize::new(0);
    let peak = AtomicUsize::new(0);
    let started = Instant::now();
    let results: Vec<Result<(LocalSurrogate, SubdomainOutcome)>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let now = running.fetch_add(1, Ordering::SeqCst) + 1;
                peak.fetch_max(now, Ordering::SeqCst);
                let t = Instant::now();
                let cfg = if configs.len() == 1 { &configs[0] } else { &configs[i] };
                let out = (|| {
                    let sub = SubdomainField::from_cells(
                        field,
                        partition.boxes[i],
                        &partition.cells_of(i),
                        quad_order,
                    )?;
                    let dict = cfg.initial.build(&sub)?;
                    fit_adaptive(&sub, dict, &cfg.adaptive)
                })();
                running.fetch_sub(1, Ordering::SeqCst);
                let fit = out.map_err(|e| Error::Subdomain {
                    index: i,
                    source: Box::new(e),
                })?;
                Ok((
                    fit.surrogate,
                    SubdomainOutcome {
                        reports: fit.reports,
                        stop: fit.stop,
                        seconds: t.elapsed().as_secs_f64(),
                    },
                ))
            })
            .collect()
    });
    let total_seconds = started.elapsed().as_secs_f64();

    let mut locals = Vec::with_capacity(n);
    let mut subdomains = Vec::with_capacity(n);
    for r in results {
        let (l, o) = r?;
        locals.push(l);
        subdomains.push(o);
    }
    Ok(ParallelFit {
        surrogate: GlobalSurrogate {
            dim: partition.dim,
            global: partition.global,
            px: partition.px,
            py: partition.py,
            boxes: partition.boxes.clone(),
            locals,
            metadata,
        },
        subdomains,
        total_seconds,
        max_concurrency: peak.load(Ordering::SeqCst),
    })
}

pub const FORMAT_MAGIC: &str = "rbf-field-surrogate";
pub const FORMAT_VERSION: u32 = 1;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the surrogate as a line-oriented text document. Every real is
/// printed with 17 significant digits so reading it back is lossless.
pub fn save(s: &GlobalSurrogate, mut sink: impl Write) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{FORMAT_MAGIC} {FORMAT_VERSION}\n"));
    out.push_str(&format!("dim {}\n", s.dim));
    out.push_str(&format!(
        "bounds {} {} {} {}\n",
        num(s.global.lo[0]),
        num(s.global.hi[0]),
        num(s.global.lo[1]),
        num(s.global.hi[1])
    ));
    out.push_str(&format!("grid {} {}\n", s.px, s.py));
    out.push_str(&format!("checksum {:016x}\n", s.metadata.field_checksum));
    out.push_str(&format!("config {}\n", s.metadata.config.replace('\n', " ")));
    for (i, (b, l)) in s.boxes.iter().zip(&s.locals).enumerate() {
        out.push_str(&format!("subdomain {i}\n"));
        out.push_str(&format!(
            "box {} {} {} {} {} {}\n",
            num(b.lo[0]),
            num(b.hi[0]),
            num(b.lo[1]),
            num(b.hi[1]),
            b.upper_closed[0] as u8,
            b.upper_closed[1] as u8
        ));
        out.push_str(match l.transform {
            Transform::Log => "transform log\n",
            Transform::Identity => "transform identity\n",
        });
        out.push_str(&format!("bases {}\n", l.dict.len()));
        for (e, beta) in l.dict.entries().iter().zip(&l.beta) {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                num(e.center[0]),
                num(e.center[1]),
                num(e.width),
                num(*beta),
                e.generation
            ));
        }
    }
    out.push_str("end\n");
    sink.write_all(out.as_bytes())?;
    Ok(())
}

struct Lines<R: BufRead> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-comment line split into tokens.
    fn next_tokens(&mut self, what: &str) -> Result<Vec<String>> {
        loop {
            let Some(l) = self.inner.next() else {
                return Err(Error::Truncated(format!("expected {what} after line {}", self.line)));
            };
            let l = l?;
            self.line += 1;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(t.split_whitespace().map(str::to_string).collect());
        }
    }

    fn keyed(&mut self, key: &str, n: usize) -> Result<Vec<String>> {
        let t = self.next_tokens(key)?;
        if t.first().map(String::as_str) != Some(key) || t.len() != n + 1 {
            return Err(self.err(format!("expected `{key}` with {n} values, got {:?}", t.join(" "))));
        }
        Ok(t[1..].to_vec())
    }

    fn keyed_usize(&mut self, key: &str) -> Result<usize> {
        let v = self.keyed(key, 1)?;
        self.usize(&v[0])
    }

    fn err(&self, message: String) -> Error {
        Error::Parse {
            line: self.line,
            message,
        }
    }

    fn f64(&self, s: &str) -> Result<f64> {
        s.parse()
            .map_err(|_| self.err(format!("cannot parse {s:?} as a real")))
    }

    fn usize(&self, s: &str) -> Result<usize> {
        s.parse()
            .map_err(|_| self.err(format!("cannot parse {s:?} as a count")))
    }
}

pub fn load(source: impl Read) -> Result<GlobalSurrogate> {
    let mut lines = Lines {
        inner: BufReader::new(source).lines(),
        line: 0,
    };
    let head = lines.next_tokens("header")?;
    if head.len() != 2 || head[0] != FORMAT_MAGIC {
        return Err(lines.err(format!("not a surrogate file (header {:?})", head.join(" "))));
    }
    if head[1] != FORMAT_VERSION.to_string() {
        return Err(Error::Version {
            found: head[1].clone(),
            expected: FORMAT_VERSION,
        });
    }
    let dim = lines.keyed_usize("dim")?;
    if dim != 1 && dim != 2 {
        return Err(lines.err(format!("dimension must be 1 or 2, got {dim}")));
    }
    let b = lines.keyed("bounds", 4)?;
    let b: Vec<f64> = b.iter().map(|s| lines.f64(s)).collect::<Result<_>>()?;
    let global = Aabb::new(dim, [b[0], b[2]], [b[1], b[3]], [true, true])
        .map_err(|e| lines.err(e.to_string()))?;
    let g = lines.keyed("grid", 2)?;
    let (px, py) = (lines.usize(&g[0])?, lines.usize(&g[1])?);
    let ck = lines.keyed("checksum", 1)?;
    let field_checksum =
        u64::from_str_radix(&ck[0], 16).map_err(|_| lines.err("bad checksum".into()))?;
    let cfg_line = lines.next_tokens("config")?;
    if cfg_line.first().map(String::as_str) != Some("config") {
        return Err(lines.err("expected `config`".into()));
    }
    let config = cfg_line[1..].join(" ");

    let n = px
        .checked_mul(py)
        .filter(|&n| n > 0)
        .ok_or_else(|| lines.err(format!("bad grid {px}x{py}")))?;
    let mut boxes = Vec::with_capacity(n);
    let mut locals = Vec::with_capacity(n);
    for i in 0..n {
        let idx = lines.keyed_usize("subdomain")?;
        if idx != i {
            return Err(lines.err(format!("expected subdomain {i}, found {idx}")));
        }
        let bx = lines.keyed("box", 6)?;
        let v: Vec<f64> = bx[..4].iter().map(|s| lines.f64(s)).collect::<Result<_>>()?;
        let flag = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(lines.err(format!("bad face flag {s:?}"))),
        };
        let closed = [flag(&bx[4])?, flag(&bx[5])?];
        let bb = if dim == 1 {
            Aabb::new(1, [v[0], v[2]], [v[1], v[3]], closed)
        } else {
            Aabb::new(2, [v[0], v[2]], [v[1], v[3]], closed)
        }
        .map_err(|e| lines.err(e.to_string()))?;
        let tr = lines.keyed("transform", 1)?;
        let transform = match tr[0].as_str() {
            "log" => Transform::Log,
            "identity" => Transform::Identity,
            other => return Err(lines.err(format!("unknown transform {other:?}"))),
        };
        let m = lines.keyed_usize("bases")?;
        let mut entries = Vec::with_capacity(m);
        let mut beta = Vec::with_capacity(m);
        for _ in 0..m {
            let t = lines.next_tokens("basis row")?;
            if t.len() != 5 {
                return Err(lines.err(format!("basis row needs 5 fields, got {}", t.len())));
            }
            entries.push(RbfEntry {
                center: [lines.f64(&t[0])?, lines.f64(&t[1])?],
                width: lines.f64(&t[2])?,
                generation: t[4]
                    .parse()
                    .map_err(|_| lines.err(format!("bad generation {:?}", t[4])))?,
            });
            beta.push(lines.f64(&t[3])?);
        }
        let dict = RbfDictionary::from_entries(entries).map_err(|e| lines.err(e.to_string()))?;
        locals.push(LocalSurrogate::new(dict, beta, transform).map_err(|e| lines.err(e.to_string()))?);
        boxes.push(bb);
    }
    let end = lines.next_tokens("end")?;
    if end != ["end"] {
        return Err(lines.err(format!("expected `end`, got {:?}", end.join(" "))));
    }
    Ok(GlobalSurrogate {
        dim,
        global,
        px,
        py,
        boxes,
        locals,
        metadata: Metadata {
            config,
            field_checksum,
        },
    })
}

pub fn save_to_path(s: &GlobalSurrogate, path: &std::path::Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    save(s, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_from_path(path: &std::path::Path) -> Result<GlobalSurrogate> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::ElasticNetConfig;

    #[test]
    fn partition_shapes() {
        let mesh = Mesh::new_2d(32, 32, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let p = make_partition(&mesh, 1, 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.cells_of(0).len(), 1024);
        let p = make_partition(&mesh, 2, 2).unwrap();
        assert_eq!(p.len(), 4);
        for i in 0..4 {
            assert_eq!(p.cells_of(i).len(), 256);
        }
        let p = make_partition(&mesh, 2, 1).unwrap();
        assert_eq!(p.boxes[0].hi, [0.5, 1.0]);
        assert_eq!(p.cells_of(1).len(), 16 * 32);
        assert!(!p.boxes[0].upper_closed[0] && p.boxes[1].upper_closed[0]);
        assert!(make_partition(&mesh, 3, 1).is_err());
        assert!(make_partition(&mesh, 0, 1).is_err());
    }

    #[test]
    fn partition_is_half_open() {
        let mesh = Mesh::new_2d(4, 4, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let p = make_partition(&mesh, 2, 2).unwrap();
        assert_eq!(locate(&[0.5, 0.5], &p.boxes).unwrap(), 3);
        assert_eq!(locate(&[0.5, 0.25], &p.boxes).unwrap(), 1);
        assert_eq!(locate(&[1.0, 1.0], &p.boxes).unwrap(), 3);
        assert_eq!(locate(&[0.0, 1.0], &p.boxes).unwrap(), 2);
    }

    #[test]
    fn lattice_dictionary() {
        let mesh = Mesh::new_2d(4, 4, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let field = FieldData::constant(mesh.clone(), 1.0).unwrap();
        let sub = SubdomainField::whole(&field, 1).unwrap();
        let d = InitialDictionary::Lattice { gx: 2, gy: 2, sigma: 0.3 }.build(&sub).unwrap();
        let c: Vec<Point> = d.entries().iter().map(|e| e.center).collect();
        assert_eq!(c, vec![[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]]);
    }

    #[test]
    fn constant_field_2x2() {
        let mesh = Mesh::new_2d(8, 8, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let field = FieldData::constant(mesh.clone(), 2.0).unwrap();
        let part = make_partition(&mesh, 2, 2).unwrap();
        let mut adaptive = AdaptiveConfig::new(2, ElasticNetConfig::new(0.0, 0.0));
        adaptive.eps_tol = 1e-12;
        let cfg = SubdomainConfig {
            initial: InitialDictionary::PerCell { sigma: 0.125 },
            adaptive,
        };
        let fit = fit_parallel(&field, &part, &[cfg], 2, 1, Metadata::default()).unwrap();
        for p in [[0.1, 0.1], [0.5, 0.5], [0.99, 0.01], [1.0, 1.0]] {
            let v = fit.surrogate.eval(&p).unwrap();
            assert!((v - 2.0).abs() < 1e-6, "{p:?} {v} {:?}", fit.subdomains[0].reports);
        }
        assert!(fit.surrogate.evaluate(&[[0.2, 0.2], [1.5, 0.2]]).is_err());
    }

    #[test]
    fn config_count_must_match() {
        let mesh = Mesh::new_2d(4, 4, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let field = FieldData::constant(mesh.clone(), 2.0).unwrap();
        let part = make_partition(&mesh, 2, 2).unwrap();
        let cfg = SubdomainConfig {
            initial: InitialDictionary::PerCell { sigma: 0.25 },
            adaptive: AdaptiveConfig::new(2, ElasticNetConfig::default()),
        };
        let two = vec![cfg.clone(), cfg.clone()];
        assert!(fit_parallel(&field, &part, &two, 1, 1, Metadata::default()).is_err());
        assert!(fit_parallel(&field, &part, &[cfg], 0, 1, Metadata::default()).is_err());
    }

    #[test]
    fn subdomain_failure_carries_index() {
        let mesh = Mesh::new_2d(4, 4, [0.0, 1.0, 0.0, 1.0]).unwrap();
        let mut field = FieldData::constant(mesh.clone(), 2.0).unwrap();
        field.values[15] = -1.0;
        let part = make_partition(&mesh, 2, 2).unwrap();
        let cfg = SubdomainConfig {
            initial: InitialDictionary::PerCell { sigma: 0.25 },
            adaptive: AdaptiveConfig::new(2, ElasticNetConfig::default()),
        };
        let err = fit_parallel(&field, &part, &[cfg], 2, 1, Metadata::default()).unwrap_err();
        assert!(matches!(err, Error::Subdomain { index: 3, .. }), "{err}");
    }

    #[test]
    fn load_rejects_truncated_and_foreign_payloads() {
        let mesh = Mesh::new_1d(4, 0.0, 1.0).unwrap();
        let field = FieldData::constant(mesh.clone(), 2.0).unwrap();
        let part = make_partition(&mesh, 2, 1).unwrap();
        let cfg = SubdomainConfig {
            initial: InitialDictionary::PerCell { sigma: 0.25 },
            adaptive: AdaptiveConfig {
                max_rounds: 0,
                ..AdaptiveConfig::new(1, ElasticNetConfig::default())
            },
        };
        let fit = fit_parallel(&field, &part, &[cfg], 1, 1, Metadata::default()).unwrap();
        let mut buf = Vec::new();
        save(&fit.surrogate, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = load(text.as_bytes()).unwrap();
        assert_eq!(back, fit.surrogate);

        let cut = &text[..text.len() / 2];
        assert!(load(cut.as_bytes()).is_err());
        let no_end = text.trim_end().trim_end_matches("end");
        assert!(matches!(load(no_end.as_bytes()), Err(Error::Truncated(_))));
        let v2 = text.replacen("rbf-field-surrogate 1", "rbf-field-surrogate 2", 1);
        assert!(matches!(load(v2.as_bytes()), Err(Error::Version { .. })));
        assert!(load("hello world\n".as_bytes()).is_err());
        let garbled = text.replacen("transform log", "transform cubic", 1);
        assert!(matches!(load(garbled.as_bytes()), Err(Error::Parse { .. })));
    }
}
