//! Test-only reference implementations shared by integration tests.

#![allow(dead_code)]

use rand::Rng;

/// Dense `rows x cols` design stored row by row.
#[derive(Debug, Clone)]
pub struct Instance {
    pub rows: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub l1: f64,
    pub l2: f64,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.rows[0].len()
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        let rss: f64 = self
            .rows
            .iter()
            .zip(&self.y)
            .map(|(r, y)| {
                let p: f64 = r.iter().zip(beta).map(|(a, b)| a * b).sum();
                (y - p) * (y - p)
            })
            .sum();
        0.5 * rss
            + self.l1 * beta.iter().map(|b| b.abs()).sum::<f64>()
            + 0.5 * self.l2 * beta.iter().map(|b| b * b).sum::<f64>()
    }

    /// Column-major copy of the design.
    pub fn columns(&self) -> Vec<f64> {
        let (n, m) = (self.n(), self.m());
        let mut out = vec![0.0; n * m];
        for (i, r) in self.rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                out[j * n + i] = *v;
            }
        }
        out
    }
}

/// Random instance with `N, M <= 20`, nonnegative row-normalized design (like
/// a Shepard matrix) and a strictly convex objective.
pub fn random_instance(rng: &mut impl Rng) -> Instance {
    let n = rng.gen_range(1..=20);
    let m = rng.gen_range(1..=20);
    let rows = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0f64).powi(3)).collect();
            let s: f64 = r.iter().sum::<f64>().max(1e-3);
            r.iter().map(|v| v / s).collect()
        })
        .collect();
    let y = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
    Instance {
        rows,
        y,
        l1: 10f64.powf(rng.gen_range(-4.0..-0.5)),
        l2: 10f64.powf(rng.gen_range(-2.0..0.0)),
    }
}

fn soft(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// Accelerated proximal gradient (FISTA with adaptive restart) on
/// `1/2 |y - X b|^2 + l2/2 |b|^2 + l1 |b|_1`, run to a fixed point.
pub fn proximal_gradient(inst: &Instance) -> Vec<f64> {
    let (n, m) = (inst.n(), inst.m());
    // Frobenius norm bounds the spectral norm, so 1/lip is a safe step.
    let frob: f64 = inst.rows.iter().flatten().map(|v| v * v).sum();
    let lip = frob + inst.l2;
    let step = 1.0 / lip;
    let grad = |b: &[f64]| -> Vec<f64> {
        let r: Vec<f64> = (0..n)
            .map(|i| inst.rows[i].iter().zip(b).map(|(a, c)| a * c).sum::<f64>() - inst.y[i])
            .collect();
        (0..m)
            .map(|j| (0..n).map(|i| inst.rows[i][j] * r[i]).sum::<f64>() + inst.l2 * b[j])
            .collect()
    };
    let mut x = vec![0.0; m];
    let mut z = x.clone();
    let mut t = 1.0f64;
    for _ in 0..2_000_000 {
        let g = grad(&z);
        let next: Vec<f64> = (0..m).map(|j| soft(z[j] - step * g[j], step * inst.l1)).collect();
        let moved = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // restart momentum when it points uphill
        let uphill: f64 = (0..m).map(|j| (z[j] - next[j]) * (next[j] - x[j])).sum();
        let t_next = if uphill > 0.0 { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
        let mom = if uphill > 0.0 { 0.0 } else { (t - 1.0) / t_next };
        z = (0..m).map(|j| next[j] + mom * (next[j] - x[j])).collect();
        x = next;
        t = t_next;
        if moved < 1e-15 {
            break;
        }
    }
    x
}
