//! Gaussian RBF dictionaries, feature matrices and Shepard normalization.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dist2, Point};

/// One Gaussian basis: center, width, and the adaptive round that created it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfEntry {
    pub center: Point,
    pub width: f64,
    pub generation: u32,
}

impl RbfEntry {
    #[inline]
    fn exponent(&self, x: &Point) -> f64 {
        -dist2(x, &self.center) / (2.0 * self.width * self.width)
    }
}

/// Ordered collection of Gaussian bases. Appends never reorder entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RbfDictionary {
    entries: Vec<RbfEntry>,
}

impl RbfDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<RbfEntry>) -> Result<Self> {
        let mut d = Self::new();
        for e in entries {
            d.push(e)?;
        }
        Ok(d)
    }

    /// Same width for every center, generation 0.
    pub fn uniform(centers: &[Point], width: f64) -> Result<Self> {
        let mut d = Self::new();
        for &center in centers {
            d.push(RbfEntry {
                center,
                width,
                generation: 0,
            })?;
        }
        Ok(d)
    }

    pub fn push(&mut self, entry: RbfEntry) -> Result<()> {
        if !(entry.width > 0.0) || !entry.width.is_finite() {
            return Err(Error::NonPositiveWidth(entry.width));
        }
        if !entry.center.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("RBF center"));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[RbfEntry] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &RbfEntry {
        &self.entries[i]
    }

    /// Index of the entry whose center is closest to `x` (lowest index on ties).
    pub fn nearest(&self, x: &Point) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in self.entries.iter().enumerate() {
            let d = dist2(x, &e.center);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Shepard weights at `x`, written into `out`.
    ///
    /// Uses the max-exponent shift, so the weights are well defined even when
    /// every raw Gaussian underflows.
    pub fn shepard_weights_into(&self, x: &Point, out: &mut Vec<f64>) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        out.clear();
        out.extend(self.entries.iter().map(|e| e.exponent(x)));
        let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in out.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in out.iter_mut() {
            *v /= sum;
        }
        Ok(())
    }

    pub fn shepard_weights(&self, x: &Point) -> Result<Vec<f64>> {
        let mut w = Vec::with_capacity(self.len());
        self.shepard_weights_into(x, &mut w)?;
        Ok(w)
    }
}

/// `exp(-|x - c|^2 / (2 sigma^2))`.
pub fn gaussian_eval(x: &Point, c: &Point, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::NonPositiveWidth(sigma));
    }
    Ok((-dist2(x, c) / (2.0 * sigma * sigma)).exp())
}

/// Dense `rows x cols` matrix of basis evaluations, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    normalized: bool,
}

impl FeatureMatrix {
    pub fn from_column_major(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        normalized: bool,
    ) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            normalized,
        })
    }

    /// Builds from row slices; convenient for small hand-written matrices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut data = vec![0.0; n * m];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                data[j * n + i] = v;
            }
        }
        Self::from_column_major(n, m, data, false)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    /// `W * beta`.
    pub fn mul_vec(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (c, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (o, &w) in out.iter_mut().zip(self.column(c)) {
                    *o += w * b;
                }
            }
        }
        out
    }

    /// `W^T v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|c| self.column(c).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn from_row_major(rows: usize, cols: usize, row_major: &[f64], normalized: bool) -> Self {
        let mut data = vec![0.0; rows * cols];
        for r in 0..rows {
            let src = &row_major[r * cols..(r + 1) * cols];
            for (c, &v) in src.iter().enumerate() {
                data[c * rows + r] = v;
            }
        }
        Self {
            rows,
            cols,
            data,
            normalized,
        }
    }
}

/// Raw feature matrix `Phi[j, m] = phi_m(x_j)`.
pub fn assemble_features(points: &[Point], dict: &RbfDictionary) -> Result<FeatureMatrix> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let m = dict.len();
    let mut buf = vec![0.0; points.len() * m];
    buf.par_chunks_mut(m)
        .zip(points.par_iter())
        .for_each(|(row, x)| {
            for (v, e) in row.iter_mut().zip(dict.entries()) {
                *v = e.exponent(x).exp();
            }
        });
    Ok(FeatureMatrix::from_row_major(points.len(), m, &buf, false))
}

/// Row-wise Shepard scaling of a raw feature matrix.
pub fn shepard_normalize(raw: &FeatureMatrix) -> Result<FeatureMatrix> {
    let (n, m) = (raw.rows, raw.cols);
    let mut sums = vec![0.0; n];
    for c in 0..m {
        for (s, &v) in sums.iter_mut().zip(raw.column(c)) {
            *s += v;
        }
    }
    if let Some(row) = sums.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::RowUnderflow { row });
    }
    let mut data = raw.data.clone();
    for c in 0..m {
        for (v, s) in data[c * n..(c + 1) * n].iter_mut().zip(&sums) {
            *v /= s;
        }
    }
    FeatureMatrix::from_column_major(n, m, data, true)
}

/// Shepard-normalized feature matrix computed directly with the
/// max-exponent shift; never underflows.
pub fn assemble_normalized(points: &[Point], dict: &RbfDictionary) -> Result<FeatureMatrix> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let m = dict.len();
    let mut buf = vec![0.0; points.len() * m];
    buf.par_chunks_mut(m)
        .zip(points.par_iter())
        .for_each(|(row, x)| {
            let mut max = f64::NEG_INFINITY;
            for (v, e) in row.iter_mut().zip(dict.entries()) {
                *v = e.exponent(x);
                max = max.max(*v);
            }
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
                // Subnormal weights carry no information but make every
                // later pass over the matrix much slower.
                if *v < f64::MIN_POSITIVE {
                    *v = 0.0;
                }
            }
        });
    Ok(FeatureMatrix::from_row_major(points.len(), m, &buf, true))
}

/// `sum_m beta_m w_m(x)` with Shepard weights `w`.
pub fn shepard_eval(x: &Point, dict: &RbfDictionary, beta: &[f64]) -> Result<f64> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if beta.len() != dict.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} bases",
            beta.len(),
            dict.len()
        )));
    }
    let mut max = f64::NEG_INFINITY;
    for e in dict.entries() {
        max = max.max(e.exponent(x));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, b) in dict.entries().iter().zip(beta) {
        let w = (e.exponent(x) - max).exp();
        num += b * w;
        den += w;
    }
    Ok(num / den)
}
