//! Structured 1D/2D cell meshes, per-cell quadrature, and half-open boxes.
//!
//! Points are always stored as `[f64; 2]`; one-dimensional meshes keep the
//! second coordinate at zero so that distances and kernels need no special
//! casing.

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Axis-aligned box with a per-axis flag saying whether the upper face is
/// part of the box. Lower faces are always included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub dim: usize,
    pub lo: Point,
    pub hi: Point,
    pub upper_closed: [bool; 2],
}

impl Aabb {
    pub fn new(dim: usize, lo: Point, hi: Point, upper_closed: [bool; 2]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Mesh(format!("dimension must be 1 or 2, got {dim}")));
        }
        for axis in 0..dim {
            if !(lo[axis] < hi[axis]) || !lo[axis].is_finite() || !hi[axis].is_finite() {
                return Err(Error::Mesh(format!(
                    "inverted or degenerate bounds on axis {axis}: [{}, {}]",
                    lo[axis], hi[axis]
                )));
            }
        }
        Ok(Self {
            dim,
            lo,
            hi,
            upper_closed,
        })
    }

    /// Half-open membership test.
    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| {
            p[a] >= self.lo[a]
                && (p[a] < self.hi[a] || (self.upper_closed[a] && p[a] <= self.hi[a]))
        })
    }

    /// Closed membership test (ignores the half-open flags).
    pub fn contains_closed(&self, p: &Point) -> bool {
        (0..self.dim).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }

    pub fn clamp(&self, p: &Point) -> Point {
        let mut q = *p;
        for a in 0..self.dim {
            q[a] = q[a].clamp(self.lo[a], self.hi[a]);
        }
        q
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }
}

/// Returns the index of the unique box owning `point`.
///
/// Boxes are scanned in order; with a proper half-open partition at most one
/// matches.
pub fn locate(point: &Point, boxes: &[Aabb]) -> Result<usize> {
    boxes
        .iter()
        .position(|b| b.contains(point))
        .ok_or(Error::OutOfDomain { point: *point })
}

/// Uniform structured mesh of intervals (1D) or rectangles (2D).
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    nx: usize,
    ny: usize,
    lo: Point,
    hi: Point,
}

impl Mesh {
    pub fn new_1d(nx: usize, x0: f64, x1: f64) -> Result<Self> {
        build_mesh(1, &[nx], &[x0, x1])
    }

    pub fn new_2d(nx: usize, ny: usize, bounds: [f64; 4]) -> Result<Self> {
        build_mesh(2, &[nx, ny], &bounds)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    /// Number of cells along y; always 1 for 1D meshes.
    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    /// Bounds as `[x0, x1, y0, y1]` (y entries are zero in 1D).
    pub fn bounds(&self) -> [f64; 4] {
        [self.lo[0], self.hi[0], self.lo[1], self.hi[1]]
    }

    /// Cell sizes `[dx, dy]`; `dy` is zero in 1D.
    pub fn spacing(&self) -> [f64; 2] {
        let dx = (self.hi[0] - self.lo[0]) / self.nx as f64;
        let dy = if self.dim == 2 {
            (self.hi[1] - self.lo[1]) / self.ny as f64
        } else {
            0.0
        };
        [dx, dy]
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        let [dx, dy] = self.spacing();
        dx.hypot(dy)
    }

    pub fn cell_measure(&self) -> f64 {
        let [dx, dy] = self.spacing();
        if self.dim == 2 {
            dx * dy
        } else {
            dx
        }
    }

    pub fn domain_measure(&self) -> f64 {
        self.bounding_box().measure()
    }

    /// Row-major index: x varies fastest.
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_ij(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    pub fn centroid(&self, cell: usize) -> Point {
        let (i, j) = self.cell_ij(cell);
        let [dx, dy] = self.spacing();
        let x = self.lo[0] + (i as f64 + 0.5) * dx;
        let y = if self.dim == 2 {
            self.lo[1] + (j as f64 + 0.5) * dy
        } else {
            0.0
        };
        [x, y]
    }

    pub fn centroids(&self) -> Vec<Point> {
        (0..self.n_cells()).map(|c| self.centroid(c)).collect()
    }

    pub fn cell_box(&self, cell: usize) -> Aabb {
        let (i, j) = self.cell_ij(cell);
        let [dx, dy] = self.spacing();
        let lo = [
            self.lo[0] + i as f64 * dx,
            if self.dim == 2 { self.lo[1] + j as f64 * dy } else { 0.0 },
        ];
        let hi = [
            if i + 1 == self.nx { self.hi[0] } else { lo[0] + dx },
            if self.dim == 2 {
                if j + 1 == self.ny {
                    self.hi[1]
                } else {
                    lo[1] + dy
                }
            } else {
                0.0
            },
        ];
        Aabb {
            dim: self.dim,
            lo,
            hi,
            upper_closed: [true, true],
        }
    }

    pub fn bounding_box(&self) -> Aabb {
        Aabb {
            dim: self.dim,
            lo: self.lo,
            hi: self.hi,
            upper_closed: [true, true],
        }
    }

    pub fn quadrature(&self, cell: usize, order: usize) -> Result<QuadratureRule> {
        quadrature(&self.cell_box(cell), order)
    }
}

/// Builds a structured mesh. `counts` holds `[nx]` or `[nx, ny]` and
/// `bounds` holds `[x0, x1]` or `[x0, x1, y0, y1]`.
pub fn build_mesh(dim: usize, counts: &[usize], bounds: &[f64]) -> Result<Mesh> {
    if dim != 1 && dim != 2 {
        return Err(Error::Mesh(format!("dimension must be 1 or 2, got {dim}")));
    }
    if counts.len() != dim || bounds.len() != 2 * dim {
        return Err(Error::Mesh(format!(
            "expected {dim} counts and {} bounds, got {} and {}",
            2 * dim,
            counts.len(),
            bounds.len()
        )));
    }
    if counts.iter().any(|&n| n == 0) {
        return Err(Error::Mesh(format!("cell counts must be positive: {counts:?}")));
    }
    let lo = [bounds[0], if dim == 2 { bounds[2] } else { 0.0 }];
    let hi = [bounds[1], if dim == 2 { bounds[3] } else { 0.0 }];
    // validates the bounds
    Aabb::new(dim, lo, hi, [true, true])?;
    Ok(Mesh {
        dim,
        nx: counts[0],
        ny: if dim == 2 { counts[1] } else { 1 },
        lo,
        hi,
    })
}

/// Quadrature points and positive weights on one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}

/// Order 1 is the midpoint rule, order 2 the tensor two-point Gauss rule.
pub fn quadrature(cell: &Aabb, order: usize) -> Result<QuadratureRule> {
    let nodes: &[(f64, f64)] = match order {
        1 => &[(0.0, 2.0)],
        2 => {
            const G: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)
            &[(-G, 1.0), (G, 1.0)]
        }
        _ => return Err(Error::QuadratureOrder(order)),
    };
    let map = |axis: usize, t: f64| {
        let mid = 0.5 * (cell.lo[axis] + cell.hi[axis]);
        let half = 0.5 * (cell.hi[axis] - cell.lo[axis]);
        (mid + half * t, half)
    };
    let mut points = Vec::new();
    let mut weights = Vec::new();
    if cell.dim == 1 {
        for &(t, w) in nodes {
            let (x, hx) = map(0, t);
            points.push([x, 0.0]);
            weights.push(w * hx);
        }
    } else {
        for &(ty, wy) in nodes {
            for &(tx, wx) in nodes {
                let (x, hx) = map(0, tx);
                let (y, hy) = map(1, ty);
                points.push([x, y]);
                weights.push(wx * hx * wy * hy);
            }
        }
    }
    Ok(QuadratureRule { points, weights })
}

pub(crate) fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}
