//! Elastic Net regression by cyclic coordinate descent.
//!
//! Minimizes
//!
//! ```text
//! 1/2 |y - W b|^2 + l1 |b|_1 + l2/2 |b|^2
//! ```
//!
//! with no intercept and no column standardization.

use crate::dictionary::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetConfig {
    pub l1: f64,
    pub l2: f64,
    /// Stop when `max |db| / max(1, max |b|)` over a full sweep drops to this.
    pub tol: f64,
    /// Maximum number of full sweeps.
    pub max_iters: usize,
    /// Record the objective after every sweep in [`FitResult::trace`].
    pub record_trace: bool,
}

impl Default for ElasticNetConfig {
    fn default() -> Self {
        Self {
            l1: 0.0,
            l2: 0.0,
            tol: 1e-10,
            max_iters: 100_000,
            record_trace: false,
        }
    }
}

impl ElasticNetConfig {
    pub fn new(l1: f64, l2: f64) -> Self {
        Self {
            l1,
            l2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l1 >= 0.0) || !self.l1.is_finite() {
            return Err(Error::Config(format!("l1 must be >= 0, got {}", self.l1)));
        }
        if !(self.l2 >= 0.0) || !self.l2.is_finite() {
            return Err(Error::Config(format!("l2 must be >= 0, got {}", self.l2)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub objective: f64,
    /// Full sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Number of nonzero coefficients.
    pub active: usize,
    /// Objective after each sweep (empty unless requested).
    pub trace: Vec<f64>,
}

/// `sign(z) * max(|z| - lambda, 0)`.
#[inline]
pub fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

pub fn objective(w: &FeatureMatrix, y: &[f64], beta: &[f64], cfg: &ElasticNetConfig) -> f64 {
    let pred = w.mul_vec(beta);
    let rss: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum();
    objective_from_residual(rss, beta, cfg)
}

fn objective_from_residual(rss: f64, beta: &[f64], cfg: &ElasticNetConfig) -> f64 {
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    let l2: f64 = beta.iter().map(|b| b * b).sum();
    0.5 * rss + cfg.l1 * l1 + 0.5 * cfg.l2 * l2
}

fn check_inputs(w: &FeatureMatrix, y: &[f64]) -> Result<()> {
    if w.rows() == 0 || w.cols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "empty design matrix {}x{}",
            w.rows(),
            w.cols()
        )));
    }
    if y.len() != w.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} targets for {} rows",
            y.len(),
            w.rows()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("targets"));
    }
    if (0..w.cols()).any(|c| w.column(c).iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("design matrix"));
    }
    Ok(())
}

/// Fits from a zero start.
pub fn fit(w: &FeatureMatrix, y: &[f64], cfg: &ElasticNetConfig) -> Result<FitResult> {
    fit_warm(w, y, cfg, &vec![0.0; w.cols()])
}

/// Fits starting from `beta0` (e.g. the previous round's coefficients padded
/// with zeros).
pub fn fit_warm(
    w: &FeatureMatrix,
    y: &[f64],
    cfg: &ElasticNetConfig,
    beta0: &[f64],
) -> Result<FitResult> {
    cfg.validate()?;
    check_inputs(w, y)?;
    if beta0.len() != w.cols() {
        return Err(Error::DimensionMismatch(format!(
            "warm start has {} entries for {} columns",
            beta0.len(),
            w.cols()
        )));
    }
    let m = w.cols();
    let denom: Vec<f64> = (0..m)
        .map(|c| w.column(c).iter().map(|v| v * v).sum::<f64>() + cfg.l2)
        .collect();
    let mut beta = beta0.to_vec();
    let pred = w.mul_vec(&beta);
    let mut r: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();

    let mut trace = Vec::new();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.max_iters {
        sweeps += 1;
        let mut max_delta = 0.0f64;
        let mut max_beta = 0.0f64;
        for c in 0..m {
            let col = w.column(c);
            let old = beta[c];
            let new = if denom[c] > 0.0 {
                let z = dot(col, &r) + (denom[c] - cfg.l2) * old;
                soft_threshold(z, cfg.l1) / denom[c]
            } else {
                0.0
            };
            let delta = new - old;
            if delta != 0.0 {
                for (ri, &wi) in r.iter_mut().zip(col) {
                    *ri -= delta * wi;
                }
                beta[c] = new;
            }
            max_delta = max_delta.max(delta.abs());
            max_beta = max_beta.max(new.abs());
        }
        if cfg.record_trace {
            let rss = r.iter().map(|v| v * v).sum();
            trace.push(objective_from_residual(rss, &beta, cfg));
        }
        if max_delta / max_beta.max(1.0) <= cfg.tol {
            converged = true;
            break;
        }
    }

    let obj = objective(w, y, &beta, cfg);
    if !obj.is_finite() {
        return Err(Error::NonFinite("objective"));
    }
    Ok(FitResult {
        active: beta.iter().filter(|b| **b != 0.0).count(),
        beta,
        objective: obj,
        iterations: sweeps,
        converged,
        trace,
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize without reassociation
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// Largest violation of the optimality conditions at `beta`.
///
/// With `g = W^T (y - W b)`: for `b_m = 0` the condition is `|g_m| <= l1`;
/// otherwise `g_m - l2 b_m - l1 sign(b_m) = 0`.
pub fn kkt_violation(w: &FeatureMatrix, y: &[f64], beta: &[f64], cfg: &ElasticNetConfig) -> f64 {
    let pred = w.mul_vec(beta);
    let r: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
    let g = w.tr_mul_vec(&r);
    g.iter()
        .zip(beta)
        .map(|(&gm, &bm)| {
            if bm == 0.0 {
                (gm.abs() - cfg.l1).max(0.0)
            } else {
                (gm - cfg.l2 * bm - cfg.l1 * bm.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// How fitted values map back to field values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// Fit on `ln K`; evaluate as `exp`.
    Log,
}

impl Transform {
    #[inline]
    pub fn inverse(self, v: f64) -> f64 {
        match self {
            Transform::Identity => v,
            Transform::Log => v.exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogFit {
    pub result: FitResult,
    pub transform: Transform,
}

/// Natural-log targets for strictly positive data.
pub fn log_targets(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(cell, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(Error::NonPositiveValue { cell, value })
            }
        })
        .collect()
}

/// Fits `ln(values)`; evaluation must exponentiate.
pub fn fit_log_field(values: &[f64], w: &FeatureMatrix, cfg: &ElasticNetConfig) -> Result<LogFit> {
    let y = log_targets(values)?;
    Ok(LogFit {
        result: fit(w, &y, cfg)?,
        transform: Transform::Log,
    })
}
