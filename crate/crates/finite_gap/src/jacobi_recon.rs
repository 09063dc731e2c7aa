//! Spectral measures of r±, their Jacobi coefficients, the two-sided operator,
//! the product formula for R₀₀ and divisor extraction.

use crate::cx::{csqrt, C64, I};
use crate::domain::{JacobiOperator, ZDivisor, ZPoint, ZSet};
use crate::error::{Error, Result};
use crate::quad::{gl_rule, richardson3};
use crate::schrodinger_jacobi::TransformContext;
use crate::weyl_m::{Side, ETA_SCHEDULE};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use std::f64::consts::PI;

pub const BAND_NODES: usize = 200;
pub const MAX_COEFFS: usize = 60;
const ATOM_SCAN: usize = 400;

/// A function Herglotz in z (Im z > 0 ⇒ Im r > 0).
pub trait HerglotzFn {
    fn eval(&self, z: C64) -> Result<C64>;

    /// r(x + i0); defaults to Richardson extrapolation over η.
    fn boundary(&self, x: f64) -> Result<C64> {
        let v: Vec<C64> = ETA_SCHEDULE
            .iter()
            .map(|&e| self.eval(C64::new(x, e)))
            .collect::<Result<_>>()?;
        Ok(richardson3(v[0], v[1], v[2], 10.0))
    }
}

/// r₊ or r₋ of a transform context, with exact boundary values.
pub struct JacobiWeyl<'a> {
    pub ctx: &'a TransformContext,
    pub side: Side,
}

impl HerglotzFn for JacobiWeyl<'_> {
    fn eval(&self, z: C64) -> Result<C64> {
        self.ctx.r(self.side, z)
    }

    fn boundary(&self, x: f64) -> Result<C64> {
        self.ctx.r_boundary(self.side, x)
    }
}

impl<F: Fn(C64) -> Result<C64>> HerglotzFn for F {
    fn eval(&self, z: C64) -> Result<C64> {
        self(z)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasureNode {
    pub x: f64,
    pub density: f64,
    /// quadrature weight including the density
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BandMeasure {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<MeasureNode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralMeasure {
    pub bands: Vec<BandMeasure>,
    pub atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        let b: f64 = self.bands.iter().flat_map(|b| b.nodes.iter()).map(|n| n.weight).sum();
        b + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    /// Discrete nodes and weights (band nodes then atoms).
    pub fn discrete(&self) -> (Vec<f64>, Vec<f64>) {
        let mut x = Vec::new();
        let mut w = Vec::new();
        for b in &self.bands {
            for n in &b.nodes {
                x.push(n.x);
                w.push(n.weight);
            }
        }
        for &(a, m) in &self.atoms {
            x.push(a);
            w.push(m);
        }
        (x, w)
    }

    /// Pure point measure.
    pub fn atomic(atoms: &[(f64, f64)]) -> Self {
        SpectralMeasure { bands: Vec::new(), atoms: atoms.to_vec() }
    }
}

/// Density on the bands of Ẽ, atoms in the gaps.
pub fn herglotz_to_measure<H: HerglotzFn>(r: &H, zset: &ZSet) -> Result<SpectralMeasure> {
    herglotz_to_measure_with(r, zset, BAND_NODES)
}

/// Same with a custom number of Gauss nodes per band.
pub fn herglotz_to_measure_with<H: HerglotzFn>(r: &H, zset: &ZSet, per_band: usize) -> Result<SpectralMeasure> {
    let rule = gl_rule(per_band);
    let mut bands = Vec::new();
    for (p, q) in zset.bands() {
        let len = q - p;
        let mut nodes = Vec::with_capacity(per_band);
        for &(u, w) in rule.iter() {
            let th = 0.5 * PI * (u + 1.0);
            let s = (0.5 * th).sin();
            let c = (0.5 * th).cos();
            let dp = len * s * s;
            let x = if s <= c { p + dp } else { q - len * c * c };
            let density = r.boundary(x)?.im / PI;
            if density < -1e-12 {
                return Err(Error::InvariantViolation(format!("negative density {density} at {x}")));
            }
            let density = density.max(0.0);
            let weight = density * len * s * c * w * 0.5 * PI;
            nodes.push(MeasureNode { x, density, weight });
        }
        bands.push(BandMeasure { lo: p, hi: q, nodes });
    }
    let mut atoms = Vec::new();
    for (p, q) in zset.sorted_gaps() {
        atoms.extend(gap_atoms(r, p, q)?);
    }
    let m = SpectralMeasure { bands, atoms };
    let deficit = (m.total_mass() - 1.0).abs();
    if deficit > 1e-6 {
        return Err(Error::MassDeficit(deficit));
    }
    Ok(m)
}

fn inv_r<H: HerglotzFn>(r: &H, x: f64) -> Option<f64> {
    match r.eval(C64::new(x, 0.0)) {
        Ok(v) => Some(1.0 / v.re),
        Err(Error::EvalAtPole(_)) | Err(Error::SingularMatrix(_)) => Some(0.0),
        Err(_) => None,
    }
}

/// Poles of r in (p, q): 1/r decreases through zero there.
fn gap_atoms<H: HerglotzFn>(r: &H, p: f64, q: f64) -> Result<Vec<(f64, f64)>> {
    let node = |i: usize| {
        let t = PI * i as f64 / ATOM_SCAN as f64;
        let u = (0.5 * (1.0 - t.cos())).clamp(1e-13, 1.0 - 1e-13);
        p + (q - p) * u
    };
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=ATOM_SCAN {
        let x = node(i);
        let Some(v) = inv_r(r, x) else {
            prev = None;
            continue;
        };
        if let Some((xp, vp)) = prev {
            if vp > 0.0 && v <= 0.0 {
                let (mut lo, mut hi) = (xp, x);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    match inv_r(r, mid) {
                        Some(f) if f > 0.0 => lo = mid,
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                let x0 = 0.5 * (lo + hi);
                let w = residue_weight(r, x0, p, q)?;
                if w > 0.0 {
                    out.push((x0, w));
                }
            }
        }
        prev = Some((x, v));
    }
    Ok(out)
}

/// −(1/2πi)∮ r dz on a circle inside the gap (trapezoid rule).
fn residue_weight<H: HerglotzFn>(r: &H, x0: f64, p: f64, q: f64) -> Result<f64> {
    let rad = 0.5 * (x0 - p).min(q - x0);
    let n = 128;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..n {
        let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        let w = C64::new(t.cos(), t.sin()) * rad;
        acc += r.eval(C64::new(x0, 0.0) + w)? * w;
    }
    // ∮ r dz = i Σ r w Δt
    let integral = acc * I * (2.0 * PI / n as f64);
    Ok((-integral / (2.0 * PI * I)).re)
}

/// One-sided coefficients; `a[n]` couples n and n+1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiCoeffs {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl JacobiCoeffs {
    pub fn free(n: usize, a: f64, b: f64) -> Self {
        JacobiCoeffs { a: vec![a; n], b: vec![b; n] }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

/// Lanczos with full reorthogonalization on the discretized measure.
pub fn measure_to_jacobi(measure: &SpectralMeasure, n: usize) -> Result<JacobiCoeffs> {
    if n > MAX_COEFFS {
        return Err(Error::WindowMismatch(format!("N = {n} exceeds the cap {MAX_COEFFS}")));
    }
    let (x, w) = measure.discrete();
    let keep: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
    let x: Vec<f64> = keep.iter().map(|&i| x[i]).collect();
    let w: Vec<f64> = keep.iter().map(|&i| w[i]).collect();
    let m = x.len();
    let total: f64 = w.iter().sum();
    let scale = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let mut qs: Vec<Vec<f64>> = Vec::new();
    let mut q: Vec<f64> = w.iter().map(|wi| (wi / total).sqrt()).collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let steps = n.min(m);
    for k in 0..steps {
        let bk: f64 = (0..m).map(|i| x[i] * q[i] * q[i]).sum();
        b.push(bk);
        qs.push(q.clone());
        if k + 1 == m {
            break;
        }
        let mut r: Vec<f64> = (0..m).map(|i| (x[i] - bk) * q[i]).collect();
        if k > 0 {
            let prev = &qs[k - 1];
            for i in 0..m {
                r[i] -= a[k - 1] * prev[i];
            }
        }
        for _ in 0..2 {
            for v in &qs {
                let d: f64 = (0..m).map(|i| r[i] * v[i]).sum();
                for i in 0..m {
                    r[i] -= d * v[i];
                }
            }
        }
        let ak = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !ak.is_finite() || ak <= 1e-13 * scale {
            if k + 1 < steps {
                return Err(Error::LostPositivity { index: k, value: ak * ak });
            }
            break;
        }
        a.push(ak);
        if b.len() == steps {
            break;
        }
        q = r.iter().map(|v| v / ak).collect();
    }
    Ok(JacobiCoeffs { a, b })
}

/// Two-sided window: J₊ on sites 0.., J₋ reflected onto −1, −2, …, joined by a₀.
pub fn assemble_two_sided(jm: &JacobiCoeffs, jp: &JacobiCoeffs, a0: f64) -> Result<JacobiOperator> {
    let n = jp.len();
    if jm.len() != n || n == 0 {
        return Err(Error::WindowMismatch(format!("J- has {} sites, J+ has {}", jm.len(), n)));
    }
    if jm.a.len() + 1 < n || jp.a.len() + 1 < n {
        return Err(Error::WindowMismatch("off-diagonal sequences too short".into()));
    }
    if !(a0 > 0.0) {
        return Err(Error::InvariantViolation(format!("a0 = {a0} must be positive")));
    }
    let mut b = Vec::with_capacity(2 * n);
    for k in (0..n).rev() {
        b.push(jm.b[k]);
    }
    b.extend_from_slice(&jp.b);
    let mut a = Vec::with_capacity(2 * n - 1);
    for k in (0..n - 1).rev() {
        a.push(jm.a[k]);
    }
    a.push(a0);
    a.extend_from_slice(&jp.a[..n - 1]);
    JacobiOperator::new(-(n as i64), b, a)
}

/// R₀₀(z) = −1/√((z−z₀⁻)(z−z₀⁺)) ∏ (z − x_k)/√((z−z_k⁻)(z−z_k⁺)).
pub fn r00_product(zset: &ZSet, div: &ZDivisor, z: C64) -> Result<C64> {
    if z.im == 0.0 && zset.contains(z.re) {
        return Err(Error::EvalOnSpectrum(z.re));
    }
    let mut v = -1.0 / (csqrt(z - zset.lo) * csqrt(z - zset.hi));
    for (k, &(lo, hi)) in zset.gaps.iter().enumerate() {
        v *= (z - div.points[k].x) / (csqrt(z - lo) * csqrt(z - hi));
    }
    Ok(v)
}

/// Residue threshold below which a pole counts as absent.
const RESIDUE_FLOOR: f64 = 1e-6;

/// Divisor from the r± evaluators: x_k is the zero of R₀₀ in z-gap k,
/// ε_k = +1 if it is a pole of 1/r₊ and −1 if a pole of a₀² r₋.
pub fn extract_divisor(ctx: &TransformContext) -> Result<ZDivisor> {
    let zset = ctx.zset();
    let a2 = ctx.coupling_a0().powi(2);
    let mut points = Vec::with_capacity(zset.genus());
    for (k, &(p, q)) in zset.gaps.iter().enumerate() {
        let f = |x: f64| -> Result<f64> { Ok(ctx.r00(C64::new(x, 0.0))?.re) };
        let d = 1e-12 * (q - p);
        let (fa, fb) = (f(p + d)?, f(q - d)?);
        let x = if fa < 0.0 && fb > 0.0 {
            let (mut lo, mut hi) = (p + d, q - d);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if f(mid)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        } else if fa >= 0.0 {
            p
        } else {
            q
        };
        if x == p || x == q {
            points.push(ZPoint { x, eps: 1 });
            continue;
        }
        // residue sizes of 1/r₊ and a₀² r₋ at x
        let h = 1e-7 * (q - p);
        let z = C64::new(x, h);
        let plus = h * (1.0 / ctx.r(Side::Plus, z)?).norm();
        let minus = h * (a2 * ctx.r(Side::Minus, z)?).norm();
        let big = plus.max(minus);
        let eps = if plus > RESIDUE_FLOOR * 1e3 * minus.max(1e-300) && minus < 1e-3 * big {
            1
        } else if minus > RESIDUE_FLOOR * 1e3 * plus.max(1e-300) && plus < 1e-3 * big {
            -1
        } else {
            return Err(Error::AmbiguousPole { gap: k, plus, minus });
        };
        points.push(ZPoint { x, eps });
    }
    Ok(ZDivisor { points })
}

/// Divisor read off a finite two-sided window: eigenvalues of the blocks left
/// and right of site 0 lying in each z-gap, picking the eigenvector with the
/// largest weight next to site 0. Left block ⇒ ε = −1, right block ⇒ ε = +1.
pub fn extract_divisor_window(j: &JacobiOperator, zset: &ZSet) -> Result<ZDivisor> {
    if j.lo() > -2 || j.hi() < 2 {
        return Err(Error::WindowMismatch("window must contain sites -2..=2".into()));
    }
    let left = j.window(j.lo(), -1)?;
    let right = j.window(1, j.hi())?;
    let eig = |w: &JacobiOperator, adjacent_last: bool| -> Vec<(f64, f64)> {
        let n = w.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = w.diag()[i];
            if i + 1 < n {
                m[(i, i + 1)] = w.offdiag()[i];
                m[(i + 1, i)] = w.offdiag()[i];
            }
        }
        let se = SymmetricEigen::new(m);
        let site = if adjacent_last { n - 1 } else { 0 };
        (0..n)
            .map(|k| (se.eigenvalues[k], se.eigenvectors[(site, k)].powi(2)))
            .collect()
    };
    let le = eig(&left, true);
    let re = eig(&right, false);
    let mut points = Vec::with_capacity(zset.genus());
    for (k, &(p, q)) in zset.gaps.iter().enumerate() {
        let best = |v: &[(f64, f64)]| -> Option<(f64, f64)> {
            v.iter()
                .filter(|(x, _)| *x > p && *x < q)
                .cloned()
                .max_by(|a, b| a.1.total_cmp(&b.1))
        };
        let bl = best(&le);
        let br = best(&re);
        let wl = bl.map(|v| v.1).unwrap_or(0.0);
        let wr = br.map(|v| v.1).unwrap_or(0.0);
        let point = if wl < 1e-6 && wr < 1e-6 {
            // nothing localized at site 0: the divisor sits on a gap edge
            let r = crate::oracle::two_sided_r00(j, C64::new(p, 1e-9))
                .map(|v| v.norm())
                .unwrap_or(f64::INFINITY);
            let s = crate::oracle::two_sided_r00(j, C64::new(q, 1e-9))
                .map(|v| v.norm())
                .unwrap_or(f64::INFINITY);
            ZPoint { x: if r < s { p } else { q }, eps: 1 }
        } else if wl > 1e-3 && wr > 1e-3 {
            return Err(Error::AmbiguousPole { gap: k, plus: wr, minus: wl });
        } else if wr >= wl {
            ZPoint { x: br.unwrap().0, eps: 1 }
        } else {
            ZPoint { x: bl.unwrap().0, eps: -1 }
        };
        points.push(point);
    }
    Ok(ZDivisor { points })
}

/// Full pipeline: measures of r±, N coefficients each side, two-sided window.
pub fn reconstruct_operator(ctx: &TransformContext, n: usize) -> Result<JacobiOperator> {
    let zset = ctx.zset();
    let mp = herglotz_to_measure(&JacobiWeyl { ctx, side: Side::Plus }, zset)?;
    let mm = herglotz_to_measure(&JacobiWeyl { ctx, side: Side::Minus }, zset)?;
    let jp = measure_to_jacobi(&mp, n)?;
    let jm = measure_to_jacobi(&mm, n)?;
    assemble_two_sided(&jm, &jp, ctx.coupling_a0())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;
    use crate::domain::{ChangeOfVariables, Divisor, FiniteGapSet};
    use crate::weyl_m::WeylPair;
    use proptest::prelude::*;

    fn ctx(gaps: &[(f64, f64)], div: &[(f64, i8)], s: f64) -> TransformContext {
        let set = FiniteGapSet::new(gaps).unwrap();
        let d = if gaps.is_empty() { Divisor::left_edges(&set) } else { Divisor::new(&set, div).unwrap() };
        TransformContext::new(ChangeOfVariables::new(s).unwrap(), WeylPair::new(&set, &d).unwrap()).unwrap()
    }

    #[test]
    fn free_measure_density() {
        let t = ctx(&[], &[], -2.0);
        let r = JacobiWeyl { ctx: &t, side: Side::Plus };
        let w = r.boundary(0.5).unwrap().im / PI;
        assert!((w - 4.0 / PI).abs() < 1e-12);
        // (8/π)√(x(1−x)) elsewhere
        for &x in &[0.1, 0.37, 0.9] {
            let w = r.boundary(x).unwrap().im / PI;
            assert!((w - 8.0 / PI * (x * (1.0 - x)).sqrt()).abs() < 1e-12);
        }
        let m = herglotz_to_measure(&r, t.zset()).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-10);
        assert!(m.atoms.is_empty());
    }

    #[test]
    fn free_coefficients() {
        let t = ctx(&[], &[], -2.0);
        let m = herglotz_to_measure(&JacobiWeyl { ctx: &t, side: Side::Plus }, t.zset()).unwrap();
        let j = measure_to_jacobi(&m, 21).unwrap();
        for n in 0..=20 {
            let ea = if n < j.a.len() { (j.a[n] - 0.25).abs() } else { 0.0 };
            assert!(ea + (j.b[n] - 0.5).abs() <= 1e-8, "n = {n}");
        }
    }

    #[test]
    fn atoms_terminate_recurrence() {
        let m = SpectralMeasure::atomic(&[(0.1, 0.25), (0.4, 0.25), (0.6, 0.25), (0.95, 0.25)]);
        let j = measure_to_jacobi(&m, 10).unwrap();
        assert_eq!(j.b.len(), 4);
        assert_eq!(j.a.len(), 3);
    }

    #[test]
    fn symmetric_measure_has_constant_diagonal() {
        let m = SpectralMeasure::atomic(&[(0.1, 0.2), (0.3, 0.3), (0.7, 0.3), (0.9, 0.2), (0.5, 0.1)]);
        let j = measure_to_jacobi(&m, 5).unwrap();
        for b in j.b {
            assert!((b - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn one_gap_atom_control() {
        let t = ctx(&[(-0.5, -0.25)], &[(-0.4, 1)], -2.0);
        let mp = herglotz_to_measure(&JacobiWeyl { ctx: &t, side: Side::Plus }, t.zset()).unwrap();
        let mm = herglotz_to_measure(&JacobiWeyl { ctx: &t, side: Side::Minus }, t.zset()).unwrap();
        let (lo, hi) = t.zset().gaps[0];
        assert_eq!(mp.atoms.len() + mm.atoms.len(), 1);
        for a in mp.atoms.iter().chain(&mm.atoms) {
            assert!(a.0 > lo && a.0 < hi && a.1 > 0.0);
        }
        for m in [&mp, &mm] {
            assert!((m.total_mass() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_gap_two_sided_is_constant() {
        let t = ctx(&[], &[], -2.0);
        let j = reconstruct_operator(&t, 20).unwrap();
        for n in j.lo()..=j.hi() {
            assert!((j.b(n) - 0.5).abs() < 1e-8);
            if n > j.lo() {
                assert!((j.a(n) - 0.25).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn product_formula_zero_gap() {
        let zs = ChangeOfVariables::new(-2.0).unwrap().map_set(&FiniteGapSet::empty());
        let v = r00_product(&zs, &ZDivisor { points: vec![] }, c(2.0, 0.0)).unwrap();
        assert!((v.re + 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn product_formula_matches_matrix_formula() {
        let t = ctx(&[(-0.7, -0.5), (-0.3, -0.1)], &[(-0.6, 1), (-0.2, -1)], -2.5);
        let d = t.jacobi_divisor().unwrap();
        for k in 0..50 {
            let th = 2.0 * PI * (k as f64 + 0.3) / 50.0;
            let z = c(0.25 + 0.4 * th.cos(), 0.4 * th.sin());
            let a = r00_product(t.zset(), &d, z).unwrap();
            let b = t.r00(z).unwrap();
            assert!((a - b).norm() <= 1e-6 * b.norm(), "{z} {a} {b}");
        }
        let v = r00_product(t.zset(), &d, c(d.points[0].x, 0.0)).unwrap();
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn r00_imaginary_on_bands() {
        let t = ctx(&[(-0.5, -0.25)], &[(-0.3, -1)], -2.0);
        for (p, q) in t.zset().bands() {
            for i in 1..20 {
                let x = p + (q - p) * i as f64 / 20.0;
                let v = t.r00(c(x, 1e-6)).unwrap();
                assert!(v.re.abs() <= 1e-4 * v.norm().max(1.0), "{x} {v}");
            }
        }
    }

    #[test]
    fn extraction_agrees_with_prediction_and_flips() {
        for &(l, e) in &[(-0.4, 1i8), (-0.4, -1), (-0.3, 1), (-0.3, -1), (-0.45, 1)] {
            let t = ctx(&[(-0.5, -0.25)], &[(l, e)], -2.0);
            let pred = t.jacobi_divisor().unwrap();
            let ext = extract_divisor(&t).unwrap();
            assert!((pred.points[0].x - ext.points[0].x).abs() < 1e-9);
            assert_eq!(pred.points[0].eps, ext.points[0].eps, "l = {l} e = {e}");
        }
    }

    #[test]
    fn window_extraction() {
        for &(l, e) in &[(-0.4, 1i8), (-0.3, -1), (-0.35, -1)] {
            let t = ctx(&[(-0.5, -0.25)], &[(l, e)], -2.0);
            let pred = t.jacobi_divisor().unwrap().points[0];
            let d60 = extract_divisor_window(&reconstruct_operator(&t, 60).unwrap(), t.zset()).unwrap().points[0];
            let d40 = extract_divisor_window(&reconstruct_operator(&t, 40).unwrap(), t.zset()).unwrap().points[0];
            assert_eq!(d60.eps, pred.eps);
            let (e60, e40) = ((d60.x - pred.x).abs(), (d40.x - pred.x).abs());
            assert!(e60 < e40 && e60 < 1e-3, "{d60:?} {d40:?} {pred:?}");
        }
    }

    #[test]
    fn edge_divisor_canonical() {
        let t = ctx(&[(-0.5, -0.25)], &[(-0.5, 1)], -2.0);
        let d = extract_divisor(&t).unwrap();
        assert_eq!(d.points[0].eps, 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]
        #[test]
        fn coefficient_bounds(u in 0.05f64..0.95, e in prop::bool::ANY) {
            let t = ctx(&[(-0.5, -0.25)], &[(-0.5 + 0.25 * u, if e { 1 } else { -1 })], -2.0);
            let j = reconstruct_operator(&t, 20).unwrap();
            let diam = t.zset().diameter();
            for &a in j.offdiag() {
                prop_assert!(a > 0.0 && a <= diam / 2.0 + 1e-9);
            }
            for &b in j.diag() {
                prop_assert!(b >= t.zset().lo - 1e-9 && b <= t.zset().hi + 1e-9);
            }
        }
    }
}
