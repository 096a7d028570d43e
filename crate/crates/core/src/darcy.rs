//! Continuous P1 finite elements for `-div(K grad p) = f` on structured
//! triangulations (linear elements in 1D), plus error norms for comparing
//! pressures and coefficient fields.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldData;
use crate::geometry::{Mesh, Point};

pub type ScalarFn = Box<dyn Fn(&Point) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    Left,
    Right,
    Bottom,
    Top,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Left, Face::Right, Face::Bottom, Face::Top];

    fn slot(self) -> usize {
        self as usize
    }
}

/// Boundary data on one face. Neumann data is the normal flux
/// `K grad p . n` (outward normal).
pub enum BoundaryCondition {
    Dirichlet(ScalarFn),
    Neumann(ScalarFn),
}

impl BoundaryCondition {
    pub fn dirichlet(v: f64) -> Self {
        BoundaryCondition::Dirichlet(Box::new(move |_| v))
    }

    pub fn no_flow() -> Self {
        BoundaryCondition::Neumann(Box::new(|_| 0.0))
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryCondition::Dirichlet(_))
    }
}

/// Disk of removed material; its staircase boundary is no-flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hole {
    pub center: Point,
    pub radius: f64,
}

pub struct DarcyProblem {
    pub mesh: Mesh,
    pub coefficient: ScalarFn,
    pub source: ScalarFn,
    /// Indexed by [`Face`]; in 1D only left and right are used.
    pub faces: [BoundaryCondition; 4],
    pub holes: Vec<Hole>,
}

impl DarcyProblem {
    /// No source, no-flow on every face.
    pub fn new(mesh: Mesh, coefficient: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            mesh,
            coefficient: Box::new(coefficient),
            source: Box::new(|_| 0.0),
            faces: [
                BoundaryCondition::no_flow(),
                BoundaryCondition::no_flow(),
                BoundaryCondition::no_flow(),
                BoundaryCondition::no_flow(),
            ],
            holes: Vec::new(),
        }
    }

    pub fn with_source(mut self, f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Box::new(f);
        self
    }

    pub fn with_face(mut self, face: Face, bc: BoundaryCondition) -> Self {
        self.faces[face.slot()] = bc;
        self
    }

    pub fn with_hole(mut self, hole: Hole) -> Self {
        self.holes.push(hole);
        self
    }

    /// `p = p_in` on the left face, `p = p_out` on the right face, no flow
    /// elsewhere.
    pub fn left_to_right(
        mesh: Mesh,
        coefficient: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        p_in: f64,
        p_out: f64,
    ) -> Self {
        Self::new(mesh, coefficient)
            .with_face(Face::Left, BoundaryCondition::dirichlet(p_in))
            .with_face(Face::Right, BoundaryCondition::dirichlet(p_out))
    }

    /// `p = p_in` on the bottom face, `p = p_out` on the top face, no flow
    /// elsewhere.
    pub fn bottom_to_top(
        mesh: Mesh,
        coefficient: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        p_in: f64,
        p_out: f64,
    ) -> Self {
        Self::new(mesh, coefficient)
            .with_face(Face::Bottom, BoundaryCondition::dirichlet(p_in))
            .with_face(Face::Top, BoundaryCondition::dirichlet(p_out))
    }

    /// Unit pressure drop across the domain along x.
    pub fn unit_drop(mesh: Mesh, coefficient: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        Self::left_to_right(mesh, coefficient, 1.0, 0.0)
    }

    /// Pressure 100 at the start of the long axis, 0 at its end, no flow on
    /// the long sides.
    pub fn reservoir_drop(mesh: Mesh, coefficient: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        let [x0, x1, y0, y1] = mesh.bounds();
        if mesh.dim() == 2 && (y1 - y0) > (x1 - x0) {
            Self::bottom_to_top(mesh, coefficient, 100.0, 0.0)
        } else {
            Self::left_to_right(mesh, coefficient, 100.0, 0.0)
        }
    }
}

/// Nodal P1 pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSolution {
    pub mesh: Mesh,
    /// Node `(i, j)` is stored at `j * (nx + 1) + i`.
    pub values: Vec<f64>,
    /// Nodes touched by at least one kept element.
    pub active: Vec<bool>,
    pub dirichlet: Vec<bool>,
    /// Kept elements (all of them unless holes were cut).
    pub elements: Vec<bool>,
    /// `A p - b` of the unconstrained system; nonzero only on Dirichlet
    /// nodes, where it is the discrete boundary flux.
    pub reactions: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Symmetric Gauss rule of degree 5 on the reference triangle
/// (barycentric coordinates, weights summing to one).
const TRI_RULE: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_82;
    const B1: f64 = 0.470_142_064_105_115_1;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W0: f64 = 0.225;
    const W1: f64 = 0.132_394_152_788_506_2;
    const W2: f64 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W0),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Three-point Gauss-Legendre on [0, 1].
const SEG_RULE: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

fn node_count(mesh: &Mesh) -> usize {
    if mesh.dim() == 1 {
        mesh.nx() + 1
    } else {
        (mesh.nx() + 1) * (mesh.ny() + 1)
    }
}

pub fn node_position(mesh: &Mesh, node: usize) -> Point {
    let [dx, dy] = mesh.spacing();
    let lo = mesh.lo();
    if mesh.dim() == 1 {
        [lo[0] + node as f64 * dx, 0.0]
    } else {
        let n = mesh.nx() + 1;
        [lo[0] + (node % n) as f64 * dx, lo[1] + (node / n) as f64 * dy]
    }
}

/// Vertices of element `e`: segments in 1D; in 2D cell `c` yields the
/// lower-right triangle `2c` and the upper-left triangle `2c + 1`, split
/// along the lower-left to upper-right diagonal.
fn element_nodes(mesh: &Mesh, e: usize) -> ([usize; 3], usize) {
    if mesh.dim() == 1 {
        return ([e, e + 1, 0], 2);
    }
    let (i, j) = mesh.cell_ij(e / 2);
    let n = mesh.nx() + 1;
    let n00 = j * n + i;
    let (n10, n01, n11) = (n00 + 1, n00 + n, n00 + n + 1);
    if e % 2 == 0 {
        ([n00, n10, n11], 3)
    } else {
        ([n00, n11, n01], 3)
    }
}

fn element_count(mesh: &Mesh) -> usize {
    if mesh.dim() == 1 {
        mesh.nx()
    } else {
        2 * mesh.n_cells()
    }
}

struct Element {
    nodes: [usize; 3],
    nv: usize,
    pts: [Point; 3],
    measure: f64,
    /// Gradients of the local shape functions.
    grads: [Point; 3],
}

fn element(mesh: &Mesh, e: usize) -> Element {
    let (nodes, nv) = element_nodes(mesh, e);
    let mut pts = [[0.0; 2]; 3];
    for k in 0..nv {
        pts[k] = node_position(mesh, nodes[k]);
    }
    if nv == 2 {
        let h = pts[1][0] - pts[0][0];
        return Element {
            nodes,
            nv,
            pts,
            measure: h,
            grads: [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0; 2]],
        };
    }
    let [a, b, c] = pts;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let mut grads = [[0.0; 2]; 3];
    for k in 0..3 {
        let p = pts[(k + 1) % 3];
        let q = pts[(k + 2) % 3];
        grads[k] = [(p[1] - q[1]) / det, (q[0] - p[0]) / det];
    }
    Element {
        nodes,
        nv,
        pts,
        measure: 0.5 * det.abs(),
        grads,
    }
}

impl Element {
    fn centroid(&self) -> Point {
        let n = self.nv as f64;
        let mut c = [0.0; 2];
        for p in &self.pts[..self.nv] {
            c[0] += p[0] / n;
            c[1] += p[1] / n;
        }
        c
    }

    /// Quadrature points as (shape values, position, weight).
    fn rule(&self) -> Vec<([f64; 3], Point, f64)> {
        if self.nv == 2 {
            SEG_RULE
                .iter()
                .map(|&(t, w)| {
                    let x = self.pts[0][0] + t * (self.pts[1][0] - self.pts[0][0]);
                    ([1.0 - t, t, 0.0], [x, 0.0], w * self.measure)
                })
                .collect()
        } else {
            TRI_RULE
                .iter()
                .map(|&(l, w)| {
                    let x = [
                        l[0] * self.pts[0][0] + l[1] * self.pts[1][0] + l[2] * self.pts[2][0],
                        l[0] * self.pts[0][1] + l[1] * self.pts[1][1] + l[2] * self.pts[2][1],
                    ];
                    (l, x, w * self.measure)
                })
                .collect()
        }
    }
}

fn on_face(mesh: &Mesh, node: usize, face: Face) -> bool {
    if mesh.dim() == 1 {
        return match face {
            Face::Left => node == 0,
            Face::Right => node == mesh.nx(),
            _ => false,
        };
    }
    let n = mesh.nx() + 1;
    let (i, j) = (node % n, node / n);
    match face {
        Face::Left => i == 0,
        Face::Right => i == mesh.nx(),
        Face::Bottom => j == 0,
        Face::Top => j == mesh.ny(),
    }
}

fn faces_used(mesh: &Mesh) -> &'static [Face] {
    if mesh.dim() == 1 {
        &Face::ALL[..2]
    } else {
        &Face::ALL
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.vals[k] * x[self.cols[k]])
                    .sum()
            })
            .collect()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        (self.row_ptr[r]..self.row_ptr[r + 1])
            .find(|&k| self.cols[k] == c)
            .map_or(0.0, |k| self.vals[k])
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                worst = worst.max((self.vals[k] - self.get(self.cols[k], r)).abs());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }
}

/// Full (unconstrained) stiffness matrix and load vector.
pub struct Assembly {
    pub matrix: CsrMatrix,
    pub load: Vec<f64>,
    pub elements: Vec<bool>,
    pub active: Vec<bool>,
}

pub fn assemble(problem: &DarcyProblem) -> Result<Assembly> {
    let mesh = &problem.mesh;
    let n_nodes = node_count(mesh);
    let n_el = element_count(mesh);

    let kept: Vec<bool> = (0..n_el)
        .map(|e| {
            let c = element(mesh, e).centroid();
            !problem.holes.iter().any(|h| {
                (c[0] - h.center[0]).powi(2) + (c[1] - h.center[1]).powi(2) < h.radius * h.radius
            })
        })
        .collect();

    let coeff: Vec<f64> = (0..n_el)
        .into_par_iter()
        .map(|e| {
            if !kept[e] {
                return Ok(0.0);
            }
            let c = element(mesh, e).centroid();
            let k = (problem.coefficient)(&c);
            if k > 0.0 && k.is_finite() {
                Ok(k)
            } else {
                Err(Error::NonPositiveCoefficient { value: k, point: c })
            }
        })
        .collect::<Result<_>>()?;

    let mut node_elements: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for e in (0..n_el).filter(|&e| kept[e]) {
        let (nodes, nv) = element_nodes(mesh, e);
        for &v in &nodes[..nv] {
            node_elements[v].push(e);
        }
    }
    let active: Vec<bool> = node_elements.iter().map(|l| !l.is_empty()).collect();

    // Each row gathers contributions from its own elements, so rows can be
    // built independently and the result does not depend on scheduling.
    let rows: Vec<(Vec<(usize, f64)>, f64)> = (0..n_nodes)
        .into_par_iter()
        .map(|r| {
            let mut entries: Vec<(usize, f64)> = Vec::with_capacity(8);
            let mut load = 0.0;
            for &e in &node_elements[r] {
                let el = element(mesh, e);
                let a = el.nodes[..el.nv].iter().position(|&v| v == r).unwrap();
                for b in 0..el.nv {
                    let g = el.grads[a][0] * el.grads[b][0] + el.grads[a][1] * el.grads[b][1];
                    entries.push((el.nodes[b], coeff[e] * el.measure * g));
                }
                for (shape, x, w) in el.rule() {
                    load += w * shape[a] * (problem.source)(&x);
                }
            }
            entries.sort_by_key(|p| p.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
            for (c, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            (merged, load)
        })
        .collect();

    let mut load: Vec<f64> = rows.iter().map(|r| r.1).collect();
    neumann_load(problem, &kept, &mut load);

    let mut row_ptr = Vec::with_capacity(n_nodes + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for (entries, _) in rows {
        for (c, v) in entries {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(Assembly {
        matrix: CsrMatrix {
            n: n_nodes,
            row_ptr,
            cols,
            vals,
        },
        load,
        elements: kept,
        active,
    })
}

/// Adds `int_{face} g phi_i` for Neumann faces; edges of removed cells
/// are skipped.
fn neumann_load(problem: &DarcyProblem, kept: &[bool], load: &mut [f64]) {
    let mesh = &problem.mesh;
    for &face in faces_used(mesh) {
        let BoundaryCondition::Neumann(g) = &problem.faces[face.slot()] else {
            continue;
        };
        if mesh.dim() == 1 {
            let node = if face == Face::Left { 0 } else { mesh.nx() };
            let el = if face == Face::Left { 0 } else { mesh.nx() - 1 };
            if kept[el] {
                load[node] += g(&node_position(mesh, node));
            }
            continue;
        }
        let (nx, ny) = (mesh.nx(), mesh.ny());
        let n = nx + 1;
        // (node a, node b, element owning the edge)
        let edges: Vec<(usize, usize, usize)> = match face {
            Face::Bottom => (0..nx).map(|i| (i, i + 1, 2 * mesh.cell_index(i, 0))).collect(),
            Face::Top => (0..nx)
                .map(|i| (ny * n + i, ny * n + i + 1, 2 * mesh.cell_index(i, ny - 1) + 1))
                .collect(),
            Face::Left => (0..ny).map(|j| (j * n, (j + 1) * n, 2 * mesh.cell_index(0, j) + 1)).collect(),
            Face::Right => (0..ny)
                .map(|j| (j * n + nx, (j + 1) * n + nx, 2 * mesh.cell_index(nx - 1, j)))
                .collect(),
        };
        for (a, b, e) in edges {
            if !kept[e] {
                continue;
            }
            let (pa, pb) = (node_position(mesh, a), node_position(mesh, b));
            let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            for &(t, w) in &SEG_RULE {
                let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                let gv = g(&x) * w * len;
                load[a] += gv * (1.0 - t);
                load[b] += gv * t;
            }
        }
    }
}

/// Jacobi-preconditioned conjugate gradients until `|r| <= tol |b|`.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], tol: f64, max_iters: usize) -> Result<(Vec<f64>, usize, f64)> {
    let n = a.n;
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Singular("nonpositive diagonal entry".into()));
    }
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iters {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Singular("matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            return Ok((x, it, rel));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged {
        iterations: max_iters,
        residual: dot(&r, &r).sqrt() / bnorm,
    })
}

/// Relative CG residual target. Tighter than the 1e-10 that nodal accuracy
/// needs: `|b|` is dominated by the Dirichlet lift, and with large coefficient
/// contrast a 1e-10 residual can leave a 1e-8 inflow/outflow imbalance.
pub const CG_TOLERANCE: f64 = 1e-12;

pub fn solve_darcy(problem: &DarcyProblem) -> Result<PressureSolution> {
    let mesh = &problem.mesh;
    let asm = assemble(problem)?;
    let n = asm.matrix.n;

    let mut dirichlet = vec![false; n];
    let mut values = vec![0.0; n];
    for &face in faces_used(mesh) {
        if let BoundaryCondition::Dirichlet(g) = &problem.faces[face.slot()] {
            for v in (0..n).filter(|&v| asm.active[v] && on_face(mesh, v, face)) {
                if !dirichlet[v] {
                    dirichlet[v] = true;
                    values[v] = g(&node_position(mesh, v));
                }
            }
        }
    }
    if !dirichlet.iter().any(|&d| d) {
        return Err(Error::Singular("no Dirichlet boundary nodes".into()));
    }

    // Reduced system on the free active nodes.
    let free: Vec<usize> = (0..n).filter(|&v| asm.active[v] && !dirichlet[v]).collect();
    let mut local = vec![usize::MAX; n];
    for (k, &v) in free.iter().enumerate() {
        local[v] = k;
    }
    let a = &asm.matrix;
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    let mut rhs = Vec::with_capacity(free.len());
    for &v in &free {
        let mut b = asm.load[v];
        for k in a.row_ptr[v]..a.row_ptr[v + 1] {
            let c = a.cols[k];
            if dirichlet[c] {
                b -= a.vals[k] * values[c];
            } else {
                cols.push(local[c]);
                vals.push(a.vals[k]);
            }
        }
        rhs.push(b);
        row_ptr.push(cols.len());
    }
    let reduced = CsrMatrix {
        n: free.len(),
        row_ptr,
        cols,
        vals,
    };
    let (x, iterations, residual) = if free.is_empty() {
        (Vec::new(), 0, 0.0)
    } else {
        conjugate_gradient(&reduced, &rhs, CG_TOLERANCE, 20 * free.len() + 1000)?
    };
    for (k, &v) in free.iter().enumerate() {
        values[v] = x[k];
    }

    let ap = a.mul_vec(&values);
    let reactions = (0..n)
        .map(|v| if dirichlet[v] { ap[v] - asm.load[v] } else { 0.0 })
        .collect();
    Ok(PressureSolution {
        mesh: mesh.clone(),
        values,
        active: asm.active,
        dirichlet,
        elements: asm.elements,
        reactions,
        iterations,
        residual,
    })
}

impl PressureSolution {
    pub fn node_position(&self, node: usize) -> Point {
        node_position(&self.mesh, node)
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    /// Discrete Darcy inflow `K grad p . n` through the Dirichlet nodes of
    /// `face`, negative for outflow (nodes on two Dirichlet faces count
    /// toward the first in [`Face::ALL`] order).
    pub fn face_flux(&self, face: Face) -> f64 {
        let mesh = &self.mesh;
        (0..self.values.len())
            .filter(|&v| self.dirichlet[v] && on_face(mesh, v, face))
            .filter(|&v| {
                !faces_used(mesh)
                    .iter()
                    .take_while(|&&f| f != face)
                    .any(|&f| on_face(mesh, v, f))
            })
            .map(|v| self.reactions[v])
            .sum()
    }

    /// P1 interpolation at any point of the closed domain.
    pub fn value_at(&self, p: &Point) -> Option<f64> {
        let mesh = &self.mesh;
        if !mesh.bounding_box().contains_closed(p) {
            return None;
        }
        let [dx, dy] = mesh.spacing();
        let lo = mesh.lo();
        let fx = (p[0] - lo[0]) / dx;
        let i = (fx.floor().max(0.0) as usize).min(mesh.nx() - 1);
        let s = fx - i as f64;
        if mesh.dim() == 1 {
            return Some((1.0 - s) * self.values[i] + s * self.values[i + 1]);
        }
        let fy = (p[1] - lo[1]) / dy;
        let j = (fy.floor().max(0.0) as usize).min(mesh.ny() - 1);
        let t = fy - j as f64;
        let n = mesh.nx() + 1;
        let v = |a: usize, b: usize| self.values[(j + b) * n + i + a];
        Some(if s >= t {
            v(0, 0) + s * (v(1, 0) - v(0, 0)) + t * (v(1, 1) - v(1, 0))
        } else {
            v(0, 0) + t * (v(0, 1) - v(0, 0)) + s * (v(1, 1) - v(0, 1))
        })
    }

    /// `int (p_h - exact)^2` over the kept elements, square-rooted.
    pub fn l2_error(&self, exact: impl Fn(&Point) -> f64) -> f64 {
        let mut acc = 0.0;
        for e in (0..self.elements.len()).filter(|&e| self.elements[e]) {
            let el = element(&self.mesh, e);
            for (shape, x, w) in el.rule() {
                let ph: f64 = (0..el.nv).map(|k| shape[k] * self.values[el.nodes[k]]).sum();
                let d = ph - exact(&x);
                acc += w * d * d;
            }
        }
        acc.sqrt()
    }
}

/// `||p - p*|| / ||p||` by quadrature on the reference mesh, with the test
/// pressure interpolated at the reference quadrature points.
pub fn pressure_rel_error(reference: &PressureSolution, test: &PressureSolution) -> Result<f64> {
    if reference.mesh.dim() != test.mesh.dim() {
        return Err(Error::DimensionMismatch("pressures live in different dimensions".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for e in (0..reference.elements.len()).filter(|&e| reference.elements[e]) {
        let el = element(&reference.mesh, e);
        for (shape, x, w) in el.rule() {
            let p: f64 = (0..el.nv).map(|k| shape[k] * reference.values[el.nodes[k]]).sum();
            let q = test.value_at(&x).ok_or(Error::OutOfDomain { point: x })?;
            num += w * (p - q) * (p - q);
            den += w * p * p;
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

/// Relative L2 distance between cellwise data and a continuous surrogate by
/// cellwise quadrature of `(K_T - K*(x))^2`.
pub fn field_rel_error(field: &FieldData, surrogate: impl Fn(&Point) -> f64 + Sync, quad_order: usize) -> Result<f64> {
    let mesh = &field.mesh;
    let parts: Vec<(f64, f64)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let q = mesh.quadrature(c, quad_order)?;
            let k = field.values[c];
            let num = q.integrate(|x| (k - surrogate(x)).powi(2));
            let den = q.integrate(|_| k * k);
            Ok((num, den))
        })
        .collect::<Result<_>>()?;
    let (num, den) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn convergence_slope(hs: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
