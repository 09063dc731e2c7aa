//! Gauss-Legendre panels, adaptive bisection and the edge substitution
//! `t = p + (q - p) sin^2(theta/2)` for integrands with inverse square-root
//! endpoint singularities.

use crate::cx::C64;
use crate::error::{Error, Result};
use gauss_quad::legendre::GaussLegendre;
use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

pub const DEFAULT_TOL: f64 = 1e-13;
const PANEL: usize = 20;
const MAX_PANELS: usize = 4000;

pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Nodes and weights on [-1, 1], nodes ascending. Cached per degree.
pub fn gl_rule(n: usize) -> Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("degree > 0"));
            let mut v: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            v.sort_by(|x, y| x.0.total_cmp(&y.0));
            Arc::new(v)
        })
        .clone()
}

/// Fixed n-point rule on [a, b].
pub fn gl_fixed<T: Scalar, F: FnMut(f64) -> T>(a: f64, b: f64, n: usize, mut f: F) -> T {
    let rule = gl_rule(n);
    let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
    let mut s = T::zero();
    for &(x, w) in rule.iter() {
        s = s + f(m + h * x) * (w * h);
    }
    s
}

/// Adaptive bisection with 20-point panels; `tol` is relative to the
/// integral of |f| over [a, b].
pub fn adaptive<T: Scalar, F: FnMut(f64) -> T>(a: f64, b: f64, tol: f64, mut f: F) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let whole = gl_fixed(a, b, PANEL, &mut f);
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut total = T::zero();
    let mut panels = 0usize;
    let scale = gl_fixed(a, b, PANEL, |x| f(x).magnitude()).max(whole.magnitude()).max(1e-300);
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl_fixed(lo, mid, PANEL, &mut f);
        let right = gl_fixed(mid, hi, PANEL, &mut f);
        let refined = left + right;
        let err = (refined - est).magnitude();
        let frac = ((hi - lo) / (b - a)).abs();
        let allowed = tol * scale * frac.sqrt();
        panels += 1;
        if !refined.magnitude().is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        if err <= allowed || depth >= 48 {
            total = total + refined;
        } else {
            if panels > MAX_PANELS {
                return Err(Error::QuadratureFailure(format!(
                    "panel budget exhausted on [{a}, {b}] (local error {err:e})"
                )));
            }
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(total)
}

/// Integral over [p, q] of an integrand with at most inverse square-root
/// singularities at both ends. The closure receives `(t, t - p, q - t)`
/// with the two distances computed without cancellation.
pub fn edge_segment<T: Scalar, F: FnMut(f64, f64, f64) -> T>(
    p: f64,
    q: f64,
    tol: f64,
    f: F,
) -> Result<T> {
    edge_segment_partial(p, q, 0.0, std::f64::consts::PI, tol, f)
}

/// Same substitution restricted to theta in [th0, th1] (theta = 0 at p, pi at q).
pub fn edge_segment_partial<T: Scalar, F: FnMut(f64, f64, f64) -> T>(
    p: f64,
    q: f64,
    th0: f64,
    th1: f64,
    tol: f64,
    mut f: F,
) -> Result<T> {
    let len = q - p;
    adaptive(th0, th1, tol, |th| {
        let s = (0.5 * th).sin();
        let c = (0.5 * th).cos();
        let dp = len * s * s;
        let dq = len * c * c;
        let t = if dp <= dq { p + dp } else { q - dq };
        f(t, dp, dq) * (len * s * c)
    })
}

/// theta coordinate of x in [p, q] for the edge substitution.
pub fn edge_theta(p: f64, q: f64, x: f64) -> f64 {
    let u = ((x - p) / (q - p)).clamp(0.0, 1.0);
    2.0 * u.sqrt().asin()
}

/// Three-point Richardson extrapolation to h = 0 for samples at h, h/r, h/r^2
/// of a quantity with a regular expansion in h.
pub fn richardson3<T: Scalar>(v0: T, v1: T, v2: T, r: f64) -> T {
    let a1 = v1 * (r / (r - 1.0)) - v0 * (1.0 / (r - 1.0));
    let a2 = v2 * (r / (r - 1.0)) - v1 * (1.0 / (r - 1.0));
    let r2 = r * r;
    a2 * (r2 / (r2 - 1.0)) - a1 * (1.0 / (r2 - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gl_integrates_polynomials() {
        let v = gl_fixed(0.0, 2.0, 5, |x| x.powi(9));
        assert!((v - 102.4).abs() < 1e-11);
        assert_eq!(gl_rule(200).len(), 200);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let v: f64 = adaptive(-1.0, 1.0, 1e-13, |x| 1.0 / (1e-4 + x * x)).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn edge_substitution_arcsine() {
        let v: f64 = edge_segment(-0.5, -0.25, 1e-14, |_, dp, dq| 1.0 / (dp * dq).sqrt()).unwrap();
        assert!((v - PI).abs() < 1e-13);
        let w: f64 = edge_segment(2.0, 3.0, 1e-14, |t, dp, dq| t * (dp * dq).sqrt()).unwrap();
        assert!((w - 2.5 * PI / 8.0).abs() < 1e-13);
    }

    #[test]
    fn partial_edge_integral() {
        let th = edge_theta(0.0, 1.0, 0.5);
        assert!((th - PI / 2.0).abs() < 1e-15);
        let v: f64 = edge_segment_partial(0.0, 1.0, 0.0, th, 1e-14, |_, dp, dq| 1.0 / (dp * dq).sqrt()).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let f = |h: f64| 3.0 + 2.0 * h - 5.0 * h * h;
        let v = richardson3(f(1e-3), f(1e-4), f(1e-5), 10.0);
        assert!((v - 3.0).abs() < 1e-13);
    }
}
