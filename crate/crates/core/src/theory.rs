//! Two-center Shepard construction of a logistic interface profile and the
//! closed-form L1 error of that profile against a sharp step.

use crate::error::{Error, Result};
use crate::geometry::Point;

/// A planar step `H(<v, x> + b)` together with the scale `c` and width
/// `sigma` of the two Gaussians that approximate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInterfaceSpec {
    pub normal: Point,
    pub offset: f64,
    pub scale: f64,
    pub sigma: f64,
}

impl StepInterfaceSpec {
    pub fn new(normal: Point, offset: f64, scale: f64, sigma: f64) -> Result<Self> {
        let s = Self {
            normal,
            offset,
            scale,
            sigma,
        };
        s.validate()?;
        Ok(s)
    }

    /// 1D spec along the first axis.
    pub fn along_x(offset: f64, scale: f64, sigma: f64) -> Result<Self> {
        Self::new([1.0, 0.0], offset, scale, sigma)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.normal[0].hypot(self.normal[1]);
        if !((n - 1.0).abs() <= 1e-12) {
            return Err(Error::Config(format!("normal must have unit length, got {n}")));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::NonPositiveWidth(self.sigma));
        }
        if !(self.scale + self.offset > 0.0) || !self.scale.is_finite() || !self.offset.is_finite() || self.scale == 0.0 {
            return Err(Error::Config(format!(
                "need c + b > 0 and c != 0, got c = {}, b = {}",
                self.scale, self.offset
            )));
        }
        Ok(())
    }

    /// Ratio placing the second center so the Shepard blend switches exactly
    /// on the interface.
    pub fn gamma(&self) -> f64 {
        let v2 = self.normal[0] * self.normal[0] + self.normal[1] * self.normal[1];
        -1.0 - 2.0 * self.offset / (self.scale * v2)
    }

    pub fn centers(&self) -> [Point; 2] {
        let (c, g, v) = (self.scale, self.gamma(), self.normal);
        [[c * v[0], c * v[1]], [g * c * v[0], g * c * v[1]]]
    }

    /// Rate `2(b + c) / sigma^2` of the logistic profile.
    fn rate(&self) -> f64 {
        2.0 * (self.offset + self.scale) / (self.sigma * self.sigma)
    }
}

/// Step with the half-maximum convention.
pub fn heaviside(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else if y < 0.0 {
        0.0
    } else {
        0.5
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub fn logistic_profile(spec: &StepInterfaceSpec, y: f64) -> f64 {
    logistic(spec.rate() * y)
}

/// `w_1(x)` of the normalized pair of Gaussians (amplitudes 1 and 0),
/// evaluated from the actual center distances.
pub fn two_center_shepard(spec: &StepInterfaceSpec, x: &Point) -> f64 {
    let [c1, c2] = spec.centers();
    let d = |c: Point| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
    let s2 = 2.0 * spec.sigma * spec.sigma;
    // w1 = phi1 / (phi1 + phi2) = 1 / (1 + exp((d1 - d2) / (2 sigma^2)))
    logistic((d(c2) - d(c1)) / s2)
}

/// Distance to the interface along its normal.
pub fn normal_coordinate(spec: &StepInterfaceSpec, x: &Point) -> f64 {
    spec.normal[0] * x[0] + spec.normal[1] * x[1] + spec.offset
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Error {
    pub numeric: f64,
    pub analytic: f64,
}

impl L1Error {
    pub fn rel_diff(&self) -> f64 {
        (self.numeric - self.analytic).abs() / self.analytic
    }
}

pub const L1_TAIL: f64 = 1e-14;
pub const L1_ABS_TOL: f64 = 1e-14;

/// Integrates `|H - K|` over `[-L, L]`, split at the kink, next to the
/// closed form `ln 2 * sigma^2 / (c + b)`.
pub fn l1_error(spec: &StepInterfaceSpec) -> Result<L1Error> {
    spec.validate()?;
    let a = spec.rate();
    let half = 1.0 / a; // sigma^2 / (2 (b + c))
    let l = (half * (half / L1_TAIL).ln()).max(half);
    let f = |y: f64| logistic(-a * y.abs());
    let right = integrate_adaptive(&f, 0.0, l, L1_ABS_TOL / 2.0)?;
    let left = integrate_adaptive(&f, -l, 0.0, L1_ABS_TOL / 2.0)?;
    Ok(L1Error {
        numeric: left + right,
        analytic: std::f64::consts::LN_2 * spec.sigma * spec.sigma / (spec.scale + spec.offset),
    })
}

/// One-sided integrals `(int_{-inf}^0, int_0^inf)` of `|H - K|`.
pub fn l1_error_halves(spec: &StepInterfaceSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let a = spec.rate();
    let half = 1.0 / a;
    let l = (half * (half / L1_TAIL).ln()).max(half);
    let f = |y: f64| (heaviside(y) - logistic(a * y)).abs();
    Ok((
        integrate_adaptive(&f, -l, 0.0, L1_ABS_TOL / 2.0)?,
        integrate_adaptive(&f, 0.0, l, L1_ABS_TOL / 2.0)?,
    ))
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature: bisects the interval with
/// the largest error estimate until the summed estimate meets `tol`.
pub fn integrate_adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= tol {
            return Ok(parts.iter().map(|p| p.2).sum());
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature(format!(
                "error estimate {total_err:e} above {tol:e} after {MAX_INTERVALS} subintervals"
            )));
        }
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn profile_values() {
        let s = StepInterfaceSpec::along_x(0.0, 1.0, 1.0).unwrap();
        assert_eq!(logistic_profile(&s, 0.0), 0.5);
        assert_relative_eq!(logistic_profile(&s, 1.0), 1.0 / (1.0 + (-2.0f64).exp()), max_relative = 1e-15);
        assert_eq!(logistic_profile(&s, 1e6), 1.0);
        assert_eq!(logistic_profile(&s, -1e6), 0.0);
    }

    #[test]
    fn symmetric_centers_when_unshifted() {
        let s = StepInterfaceSpec::new([0.6, 0.8], 0.0, 2.0, 0.5).unwrap();
        assert_eq!(s.gamma(), -1.0);
        let [a, b] = s.centers();
        assert_eq!(a, [1.2, 1.6]);
        assert_eq!(b, [-1.2, -1.6]);
    }

    #[test]
    fn shepard_pair_is_half_on_interface() {
        let s = StepInterfaceSpec::new([0.6, 0.8], 0.3, 1.0, 0.4).unwrap();
        // <v, x> + b = 0 for x = -b v + t v_perp
        for t in [-2.0, 0.0, 1.5] {
            let x = [-0.3 * 0.6 - 0.8 * t, -0.3 * 0.8 + 0.6 * t];
            assert!((two_center_shepard(&s, &x) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(StepInterfaceSpec::new([1.0, 1.0], 0.0, 1.0, 1.0).is_err());
        assert!(StepInterfaceSpec::along_x(-1.0, 1.0, 1.0).is_err());
        assert!(StepInterfaceSpec::along_x(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn unit_spec_error_is_ln2() {
        let s = StepInterfaceSpec::along_x(0.0, 1.0, 1.0).unwrap();
        let e = l1_error(&s).unwrap();
        assert_relative_eq!(e.analytic, std::f64::consts::LN_2, max_relative = 1e-15);
        assert!(e.rel_diff() < 1e-10, "{e:?}");
    }

    #[test]
    fn halves_agree() {
        let s = StepInterfaceSpec::along_x(0.2, 0.7, 0.1).unwrap();
        let (l, r) = l1_error_halves(&s).unwrap();
        assert!((l - r).abs() <= 1e-12 * l.max(r), "{l} {r}");
    }

    #[test]
    fn kronrod_integrates_polynomials_and_exponentials() {
        let v = integrate_adaptive(&|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(v, 64.0 / 6.0 - 4.0, max_relative = 1e-14);
        let v = integrate_adaptive(&|x: f64| (-x).exp(), 0.0, 40.0, 1e-14).unwrap();
        assert_relative_eq!(v, 1.0 - (-40.0f64).exp(), max_relative = 1e-13);
    }
}
