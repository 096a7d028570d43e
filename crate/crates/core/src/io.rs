//! Text formats: cellwise field files, the SPE10 permeability dump, and
//! plot-ready CSV grids.
//!
//! Field file layout (lines starting with `#` are ignored anywhere):
//!
//! ```text
//! dim nx [ny]
//! x0 x1 [y0 y1]
//! v_0 v_1 ...          (nx * ny values, x fastest)
//! ```

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::darcy::PressureSolution;
use crate::error::{Error, Result};
use crate::field::FieldData;
use crate::geometry::{build_mesh, Mesh, Point};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads a field file without the positivity check (used for exported
/// pressures, which may take any sign).
pub fn read_grid_values(source: impl Read) -> Result<(Mesh, Vec<f64>)> {
    let reader = BufReader::new(source);
    let mut header: Vec<(usize, String)> = Vec::new();
    let mut body = String::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if header.len() < 2 {
            header.push((n + 1, t.to_string()));
        } else {
            body.push_str(t);
            body.push('\n');
        }
    }
    if header.len() < 2 {
        return Err(Error::Truncated("field header needs two lines".into()));
    }
    let (l1, first) = &header[0];
    let counts: Vec<usize> = first
        .split_whitespace()
        .map(|s| {
            s.parse().map_err(|_| Error::Parse {
                line: *l1,
                message: format!("expected integer, found {s:?}"),
            })
        })
        .collect::<Result<_>>()?;
    let Some((&dim, counts)) = counts.split_first() else {
        return Err(Error::Parse {
            line: *l1,
            message: "empty header".into(),
        });
    };
    if !(dim == 1 || dim == 2) || counts.len() != dim {
        return Err(Error::Parse {
            line: *l1,
            message: format!("expected `dim nx [ny]` with dim 1 or 2, got {first:?}"),
        });
    }
    let (l2, second) = &header[1];
    let bounds: Vec<f64> = second
        .split_whitespace()
        .map(|s| {
            s.parse().map_err(|_| Error::Parse {
                line: *l2,
                message: format!("expected real, found {s:?}"),
            })
        })
        .collect::<Result<_>>()?;
    if bounds.len() != 2 * dim {
        return Err(Error::Parse {
            line: *l2,
            message: format!("expected {} bounds, got {}", 2 * dim, bounds.len()),
        });
    }
    let mesh = build_mesh(dim, counts, &bounds)?;
    let values = parse_reals(&body)?;
    if values.len() != mesh.n_cells() {
        return Err(Error::DimensionMismatch(format!(
            "header announces {} values, file holds {}",
            mesh.n_cells(),
            values.len()
        )));
    }
    Ok((mesh, values))
}

fn parse_reals(text: &str) -> Result<Vec<f64>> {
    text.split_ascii_whitespace()
        .enumerate()
        .map(|(offset, t)| {
            t.parse::<f64>().map_err(|_| Error::BadToken {
                offset,
                token: t.to_string(),
            })
        })
        .collect()
}

pub fn read_field(source: impl Read) -> Result<FieldData> {
    let (mesh, values) = read_grid_values(source)?;
    FieldData::new(mesh, values)
}

pub fn read_field_path(path: &Path) -> Result<FieldData> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_field(f)
}

/// Writes values on a structured grid in field-file layout, preceded by
/// optional `#` comment lines.
pub fn write_grid_values(mesh: &Mesh, values: &[f64], comments: &[String], mut sink: impl Write) -> Result<()> {
    if values.len() != mesh.n_cells() {
        return Err(Error::DimensionMismatch(format!(
            "{} values for {} cells",
            values.len(),
            mesh.n_cells()
        )));
    }
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {}\n", c.replace('\n', " ")));
    }
    let b = mesh.bounds();
    if mesh.dim() == 1 {
        out.push_str(&format!("1 {}\n{} {}\n", mesh.nx(), fmt(b[0]), fmt(b[1])));
    } else {
        out.push_str(&format!(
            "2 {} {}\n{} {} {} {}\n",
            mesh.nx(),
            mesh.ny(),
            fmt(b[0]),
            fmt(b[1]),
            fmt(b[2]),
            fmt(b[3])
        ));
    }
    for row in values.chunks(mesh.nx()) {
        let line: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_field(field: &FieldData, comments: &[String], sink: impl Write) -> Result<()> {
    write_grid_values(&field.mesh, &field.values, comments, sink)
}

/// Nodal pressure in field-file layout: one "cell" per node, on a grid
/// whose cell centers coincide with the nodes.
pub fn write_pressure_field(sol: &PressureSolution, comments: &[String], sink: impl Write) -> Result<()> {
    let m = &sol.mesh;
    let [dx, dy] = m.spacing();
    let [x0, x1, y0, y1] = m.bounds();
    let nodal = if m.dim() == 1 {
        Mesh::new_1d(m.nx() + 1, x0 - 0.5 * dx, x1 + 0.5 * dx)?
    } else {
        Mesh::new_2d(
            m.nx() + 1,
            m.ny() + 1,
            [x0 - 0.5 * dx, x1 + 0.5 * dx, y0 - 0.5 * dy, y1 + 0.5 * dy],
        )?
    };
    write_grid_values(&nodal, &sol.values, comments, sink)
}

/// Layers, rows and columns of the SPE10 permeability dump.
pub const SPE10_LAYERS: usize = 85;
pub const SPE10_NX: usize = 60;
pub const SPE10_NY: usize = 220;
pub const SPE10_LAYER_LEN: usize = SPE10_NX * SPE10_NY;
pub const SPE10_TOKENS: usize = 3 * SPE10_LAYERS * SPE10_LAYER_LEN;

/// Extracts the x-permeability of `layer` from the standard dump (kx, ky,
/// kz blocks of 85 layers, each 220 rows of 60 values, x fastest) onto a
/// 60 x 220 mesh over `[0, 60] x [0, 220]`, in native units.
///
/// The whole file is tokenized: any unparsable token, and any total count
/// other than the expected one, is an error.
pub fn read_spe10(source: impl Read, layer: usize) -> Result<FieldData> {
    if layer >= SPE10_LAYERS {
        return Err(Error::Config(format!(
            "layer {layer} out of range 0..{SPE10_LAYERS}"
        )));
    }
    let mut text = String::new();
    BufReader::new(source).read_to_string(&mut text)?;
    let start = layer * SPE10_LAYER_LEN;
    let mut values = Vec::with_capacity(SPE10_LAYER_LEN);
    let mut count = 0usize;
    for (offset, t) in text.split_ascii_whitespace().enumerate() {
        let v: f64 = t.parse().map_err(|_| Error::BadToken {
            offset,
            token: t.to_string(),
        })?;
        if (start..start + SPE10_LAYER_LEN).contains(&offset) {
            values.push(v);
        }
        count += 1;
    }
    if count < SPE10_TOKENS {
        return Err(Error::Truncated(format!(
            "SPE10 file holds {count} values, expected {SPE10_TOKENS}"
        )));
    }
    if count > SPE10_TOKENS {
        return Err(Error::DimensionMismatch(format!(
            "SPE10 file holds {count} values, expected {SPE10_TOKENS}"
        )));
    }
    let mesh = Mesh::new_2d(SPE10_NX, SPE10_NY, [0.0, SPE10_NX as f64, 0.0, SPE10_NY as f64])?;
    FieldData::new(mesh, values)
}

pub fn read_spe10_path(path: &Path, layer: usize) -> Result<FieldData> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_spe10(f, layer)
}

pub const GRID_CSV_HEADER: &str = "x,y,value";

/// `x,y,value` rows in the given order, 17 significant digits, preceded by
/// optional `#` comment lines.
pub fn write_grid_csv(points: &[Point], values: &[f64], comments: &[String], mut sink: impl Write) -> Result<()> {
    if points.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} points, {} values",
            points.len(),
            values.len()
        )));
    }
    let mut out = String::with_capacity(64 * (points.len() + 1));
    for c in comments {
        out.push_str(&format!("# {}\n", c.replace('\n', " ")));
    }
    out.push_str(GRID_CSV_HEADER);
    out.push('\n');
    for (p, v) in points.iter().zip(values) {
        out.push_str(&format!("{},{},{}\n", fmt(p[0]), fmt(p[1]), fmt(*v)));
    }
    sink.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_grid_csv_path(path: &Path, points: &[Point], values: &[f64], comments: &[String]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_grid_csv(points, values, comments, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_grid_csv(source: impl Read) -> Result<(Vec<Point>, Vec<f64>)> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut seen_header = false;
    for (n, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if !seen_header {
            if t != GRID_CSV_HEADER {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("expected header {GRID_CSV_HEADER:?}"),
                });
            }
            seen_header = true;
            continue;
        }
        let f: Vec<f64> = t
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: n + 1,
                message: format!("bad row {t:?}"),
            })?;
        if f.len() != 3 {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected 3 columns, got {}", f.len()),
            });
        }
        points.push([f[0], f[1]]);
        values.push(f[2]);
    }
    if !seen_header {
        return Err(Error::Truncated("missing CSV header".into()));
    }
    Ok((points, values))
}

/// Cell centers of an `nx x ny` grid over `bounds`, x fastest.
pub fn grid_points(dim: usize, nx: usize, ny: usize, bounds: &[f64]) -> Result<Vec<Point>> {
    let counts: Vec<usize> = if dim == 1 { vec![nx] } else { vec![nx, ny] };
    Ok(build_mesh(dim, &counts, bounds)?.centroids())
}
