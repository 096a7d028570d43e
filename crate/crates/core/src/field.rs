//! Cellwise-constant coefficient data and the built-in synthetic test fields.

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point};

/// Strictly positive values attached to the cells of a structured mesh
/// (row-major, x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldData {
    pub mesh: Mesh,
    pub values: Vec<f64>,
}

impl FieldData {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} cells",
                values.len(),
                mesh.n_cells()
            )));
        }
        if let Some((cell, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::NonPositiveValue { cell, value });
        }
        Ok(Self { mesh, values })
    }

    pub fn from_fn(mesh: Mesh, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = mesh.centroids().iter().map(f).collect();
        Self::new(mesh, values)
    }

    pub fn constant(mesh: Mesh, value: f64) -> Result<Self> {
        let n = mesh.n_cells();
        Self::new(mesh, vec![value; n])
    }

    /// Piecewise-constant lookup by owning cell (upper faces belong to the
    /// upper cell, the global upper boundary to the last cell).
    pub fn value_at(&self, p: &Point) -> Option<f64> {
        let m = &self.mesh;
        if !m.bounding_box().contains_closed(p) {
            return None;
        }
        let [dx, dy] = m.spacing();
        let i = (((p[0] - m.lo()[0]) / dx).floor() as usize).min(m.nx() - 1);
        let j = if m.dim() == 2 {
            (((p[1] - m.lo()[1]) / dy).floor() as usize).min(m.ny() - 1)
        } else {
            0
        };
        Some(self.values[m.cell_index(i, j)])
    }

    /// FNV-1a over the mesh parameters and value bit patterns.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bits: u64| {
            for b in bits.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        feed(self.mesh.dim() as u64);
        feed(self.mesh.nx() as u64);
        feed(self.mesh.ny() as u64);
        for b in self.mesh.bounds() {
            feed(b.to_bits());
        }
        for v in &self.values {
            feed(v.to_bits());
        }
        h
    }
}

/// Left end, right end and jump location of the 1D step test field.
pub const STEP_DOMAIN: [f64; 2] = [0.0, 0.03125];
pub const STEP_JUMP: f64 = 0.015625;
pub const STEP_LOW: f64 = 1e-4;
pub const STEP_HIGH: f64 = 1e-1;

/// `1e-4` left of the jump, `1e-1` from the jump on, sampled at centroids.
pub fn step_1d(nx: usize) -> Result<FieldData> {
    let mesh = Mesh::new_1d(nx, STEP_DOMAIN[0], STEP_DOMAIN[1])?;
    FieldData::from_fn(mesh, |p| if p[0] < STEP_JUMP { STEP_LOW } else { STEP_HIGH })
}

/// Rectangular inclusions with sharp contrast on `[0,1]^2`.
///
/// Inclusion edges sit on multiples of 1/16, so any mesh with a multiple of
/// 16 cells per axis resolves them exactly.
pub fn box_field(nx: usize, ny: usize) -> Result<FieldData> {
    let mesh = Mesh::new_2d(nx, ny, [0.0, 1.0, 0.0, 1.0])?;
    FieldData::from_fn(mesh, box_value)
}

pub fn box_value(p: &Point) -> f64 {
    let inside = |x0: f64, x1: f64, y0: f64, y1: f64| {
        p[0] >= x0 / 16.0 && p[0] < x1 / 16.0 && p[1] >= y0 / 16.0 && p[1] < y1 / 16.0
    };
    if inside(3.0, 7.0, 3.0, 11.0) {
        10.0
    } else if inside(9.0, 13.0, 7.0, 13.0) {
        0.1
    } else if inside(10.0, 14.0, 2.0, 4.0) {
        5.0
    } else {
        1.0
    }
}

/// Smoothly varying log-normal-looking field on `[0,1]^2`.
pub fn smooth_field(nx: usize, ny: usize) -> Result<FieldData> {
    let mesh = Mesh::new_2d(nx, ny, [0.0, 1.0, 0.0, 1.0])?;
    FieldData::from_fn(mesh, smooth_value)
}

pub fn smooth_value(p: &Point) -> f64 {
    use std::f64::consts::PI;
    let (x, y) = (p[0], p[1]);
    let g = 0.8 * (2.0 * PI * x).sin() * (1.5 * PI * y).cos()
        + 0.5 * (3.0 * PI * (x + 0.7 * y)).sin()
        + 0.3 * (5.0 * PI * x * y).cos();
    g.exp()
}
