//! Unit-circle counterparts: Schur functions of Verblunsky sequences, the
//! extended-CMV reflectionless defect, and the conformal map Θ₂ of a periodic
//! comb onto which the upper half plane is mapped.
//!
//! Schur recursion: s(φ) = (υ₀ + φ s⁽¹⁾(φ)) / (1 + φ ῡ₀ s⁽¹⁾(φ)).
//! The minus side runs the same recursion on υ′_k = −conj(υ_{−1−k}).

use crate::cx::{csqrt, C64, I};
use crate::error::{Error, Result};
use crate::quad::{adaptive, edge_segment, richardson3, DEFAULT_TOL};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Verblunsky coefficients υ_n on the window [lo, lo + len).
#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySeq {
    lo: i64,
    values: Vec<C64>,
}

impl VerblunskySeq {
    pub fn new(lo: i64, values: Vec<C64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            let m = v.norm();
            if !(m < 1.0) {
                return Err(Error::InvalidVerblunsky { index: lo + i as i64, modulus: m });
            }
        }
        Ok(VerblunskySeq { lo, values })
    }

    /// Two-sided sequence on [−n, n) from a generator.
    pub fn from_fn<F: Fn(i64) -> C64>(n: usize, f: F) -> Result<Self> {
        let n = n as i64;
        Self::new(-n, (-n..n).map(f).collect())
    }

    pub fn constant(n: usize, c: C64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, C64::new(0.0, 0.0)).expect("zero is admissible")
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64
    }

    pub fn get(&self, n: i64) -> Option<C64> {
        if n < self.lo || n >= self.hi() {
            None
        } else {
            Some(self.values[(n - self.lo) as usize])
        }
    }

    pub fn rho(&self, n: i64) -> Option<f64> {
        self.get(n).map(|v| (1.0 - v.norm_sqr()).sqrt())
    }

    /// Coefficients seen by the Schur recursion on one side.
    fn side_coeffs(&self, side: Side, depth: usize) -> Result<Vec<C64>> {
        let available = match side {
            Side::Plus => self.hi().max(0) as usize,
            Side::Minus => (-self.lo).max(0) as usize,
        };
        if depth > available {
            return Err(Error::DepthExceedsWindow { depth, available });
        }
        Ok((0..depth as i64)
            .map(|k| match side {
                Side::Plus => self.get(k).expect("in window"),
                Side::Minus => -self.get(-1 - k).expect("in window").conj(),
            })
            .collect())
    }

    /// Largest admissible depth on a side.
    pub fn max_depth(&self, side: Side) -> usize {
        match side {
            Side::Plus => self.hi().max(0) as usize,
            Side::Minus => (-self.lo).max(0) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

fn schur_backward(coeffs: &[C64], phi: C64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for &v in coeffs.iter().rev() {
        s = (v + phi * s) / (1.0 + phi * v.conj() * s);
    }
    s
}

/// Depth-truncated Schur continued fraction s₊ or s₋ at φ (|φ| ≤ 1).
pub fn schur_function(seq: &VerblunskySeq, side: Side, phi: C64, depth: usize) -> Result<C64> {
    if phi.norm() > 1.0 {
        return Err(Error::InvariantViolation(format!("Schur function needs |φ| ≤ 1, got {phi}")));
    }
    Ok(schur_backward(&seq.side_coeffs(side, depth)?, phi))
}

/// Fixed point of s ↦ (c + φ s)/(1 + φ c̄ s) in the closed disk.
pub fn constant_schur_limit(c: C64, phi: C64) -> C64 {
    // φ c̄ s² + (1 − φ) s − c = 0
    let qa = phi * c.conj();
    let qb = 1.0 - phi;
    if qa.norm() < 1e-300 {
        return c / qb;
    }
    let disc = csqrt(qb * qb + 4.0 * qa * c);
    let r1 = (-qb + disc) / (2.0 * qa);
    let r2 = (-qb - disc) / (2.0 * qa);
    if r1.norm() <= r2.norm() {
        r1
    } else {
        r2
    }
}

/// Observed geometric rate of |s^{(n)} − s| over the given depths, from a
/// least-squares fit of the log error.
pub fn truncation_rate(seq: &VerblunskySeq, side: Side, phi: C64, limit: C64, depths: &[usize]) -> Result<f64> {
    let mut pts = Vec::with_capacity(depths.len());
    for &d in depths {
        let e = (schur_function(seq, side, phi, d)? - limit).norm();
        if e > 0.0 {
            pts.push((d as f64, e.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::InvariantViolation("truncation errors vanish; no rate to fit".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((sxy / sxx).exp())
}

/// Radial schedule for boundary values: r_j = 1 − eps0 / 2^j.
#[derive(Debug, Clone, Copy)]
pub struct RadialSchedule {
    pub eps0: f64,
    pub depth: usize,
    pub tol: f64,
}

impl Default for RadialSchedule {
    fn default() -> Self {
        RadialSchedule { eps0: 0.02, depth: 4000, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DefectPoint {
    pub angle: f64,
    pub s_plus: C64,
    pub s_minus: C64,
    pub defect: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct DefectReport {
    pub points: Vec<DefectPoint>,
    pub max_defect: f64,
    pub flagged: usize,
}

fn boundary_pair(seq: &VerblunskySeq, angle: f64, eps: f64, depth: usize) -> Result<(C64, C64)> {
    let phi = C64::from_polar(1.0 - eps, angle);
    let sp = schur_function(seq, Side::Plus, phi, depth)?;
    let sm = schur_function(seq, Side::Minus, phi, depth)?;
    Ok((sp, sm))
}

/// max |conj(φ s₊(φ)) − s₋(φ)| over boundary angles, each value the
/// Richardson limit r ↑ 1 of three radii. Points whose limit moves by more
/// than `tol` between the last two extrapolations, or between depth and
/// depth/2, are flagged.
pub fn cmv_reflectionless_defect(seq: &VerblunskySeq, angles: &[f64], sched: RadialSchedule) -> Result<DefectReport> {
    let depth = sched.depth.min(seq.max_depth(Side::Plus)).min(seq.max_depth(Side::Minus));
    let points: Vec<Result<DefectPoint>> = angles
        .par_iter()
        .map(|&angle| {
            let diff = |eps: f64, d: usize| -> Result<(C64, C64, C64)> {
                let (sp, sm) = boundary_pair(seq, angle, eps, d)?;
                let phi = C64::from_polar(1.0 - eps, angle);
                Ok(((phi * sp).conj() - sm, sp, sm))
            };
            let e = sched.eps0;
            let v: Vec<(C64, C64, C64)> =
                (0..4).map(|j| diff(e / f64::powi(2.0, j), depth)).collect::<Result<_>>()?;
            let d1 = richardson3(v[0].0, v[1].0, v[2].0, 2.0);
            let d2 = richardson3(v[1].0, v[2].0, v[3].0, 2.0);
            let sp = richardson3(v[1].1, v[2].1, v[3].1, 2.0);
            let sm = richardson3(v[1].2, v[2].2, v[3].2, 2.0);
            let half = diff(e / 8.0, depth / 2)?.0;
            let converged = (d1 - d2).norm() <= sched.tol && (half - v[3].0).norm() <= sched.tol;
            Ok(DefectPoint { angle, s_plus: sp, s_minus: sm, defect: d2.norm(), converged })
        })
        .collect();
    let points: Vec<DefectPoint> = points.into_iter().collect::<Result<_>>()?;
    let max_defect = points.iter().map(|p| p.defect).fold(0.0, f64::max);
    let flagged = points.iter().filter(|p| !p.converged).count();
    Ok(DefectReport { points, max_defect, flagged })
}

/// Tooth of a 2π-periodic comb: slit {ω + 2πj + i t : 0 ≤ t ≤ h}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicTooth {
    pub omega: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicComb {
    teeth: Vec<PeriodicTooth>,
}

impl PeriodicComb {
    pub fn new(teeth: &[(f64, f64)]) -> Result<Self> {
        let mut prev = f64::NEG_INFINITY;
        for &(w, h) in teeth {
            if !(0.0..TWO_PI).contains(&w) {
                return Err(Error::InvalidComb(format!("ω = {w} outside [0, 2π)")));
            }
            if w <= prev {
                return Err(Error::InvalidComb("ω must be strictly increasing".into()));
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidComb(format!("height {h} must be positive")));
            }
            prev = w;
        }
        Ok(PeriodicComb {
            teeth: teeth.iter().map(|&(omega, height)| PeriodicTooth { omega, height }).collect(),
        })
    }

    pub fn empty() -> Self {
        PeriodicComb { teeth: Vec::new() }
    }

    pub fn teeth(&self) -> &[PeriodicTooth] {
        &self.teeth
    }

    pub fn len(&self) -> usize {
        self.teeth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teeth.is_empty()
    }
}

/// One-tooth map: cos(Θ₂ − ω) = C cos(ψ − ω) + D with C = (cosh h + 1)/2,
/// D = (cosh h − 1)/2. Returns cos(Θ₂ − ω).
pub fn one_tooth_relation(omega: f64, height: f64, psi: C64) -> C64 {
    let ch = height.cosh();
    (psi - omega).cos() * (0.5 * (ch + 1.0)) + 0.5 * (ch - 1.0)
}

/// Half-width δ of the one-tooth gap: sin(δ/2) = tanh(h/2).
pub fn one_tooth_half_width(height: f64) -> f64 {
    2.0 * (0.5 * height).tanh().asin()
}

/// 1 − e^{iw} without cancellation.
fn one_minus_exp(w: C64) -> C64 {
    -2.0 * I * (0.5 * w).sin() * (0.5 * w * I).exp()
}

/// Trigonometric differential with branch points a_k, b_k and zeros c_k,
/// normalized to Θ₂′ → 1 as Im ψ → ∞.
#[derive(Debug, Clone)]
struct TrigDifferential {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl TrigDifferential {
    fn prime(&self, psi: C64) -> C64 {
        let mut v = C64::new(1.0, 0.0);
        for k in 0..self.a.len() {
            let num = one_minus_exp(psi - self.c[k]);
            let den = csqrt(one_minus_exp(psi - self.a[k])) * csqrt(one_minus_exp(psi - self.b[k]));
            v *= num / den;
        }
        v
    }

    /// Real form on gap k; `dp`, `dq` are the exact distances to a_k, b_k.
    fn gap_real(&self, k: usize, x: f64, dp: f64, dq: f64, c: &[f64], deriv: Option<usize>) -> f64 {
        let mut v = 1.0;
        for j in 0..self.a.len() {
            let (sa, sb) = if j == k {
                ((0.5 * dp).sin(), (0.5 * dq).sin())
            } else {
                ((0.5 * (x - self.a[j])).sin(), (0.5 * (x - self.b[j])).sin())
            };
            let num = if deriv == Some(j) { -0.5 * (0.5 * (x - c[j])).cos() } else { (0.5 * (x - c[j])).sin() };
            v *= num / (sa * sb).abs().sqrt();
        }
        v
    }

    fn gap_residuals(&self, c: &[f64]) -> Result<Vec<f64>> {
        (0..self.a.len())
            .map(|k| edge_segment(self.a[k], self.b[k], DEFAULT_TOL, |x, dp, dq| self.gap_real(k, x, dp, dq, c, None)))
            .collect()
    }

    fn gap_jacobian(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.a.len();
        let mut jac = DMatrix::zeros(g, g);
        for k in 0..g {
            for j in 0..g {
                jac[(k, j)] = edge_segment(self.a[k], self.b[k], DEFAULT_TOL, |x, dp, dq| {
                    self.gap_real(k, x, dp, dq, c, Some(j))
                })?;
            }
        }
        Ok(jac)
    }

    fn solve_critical(&mut self) -> Result<()> {
        let g = self.a.len();
        let mut c: Vec<f64> = (0..g).map(|k| 0.5 * (self.a[k] + self.b[k])).collect();
        let scale: f64 = (0..g).map(|k| self.b[k] - self.a[k]).fold(0.0, f64::max);
        let mut r = self.gap_residuals(&c)?;
        let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for _ in 0..60 {
            if norm(&r) < 1e-14 * scale.max(1e-3) {
                self.c = c;
                return Ok(());
            }
            let jac = self.gap_jacobian(&c)?;
            let step = jac
                .lu()
                .solve(&DVector::from_column_slice(&r))
                .ok_or_else(|| Error::SolverFailure("singular critical-point Jacobian".into()))?;
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let trial: Vec<f64> = (0..g).map(|k| c[k] - alpha * step[k]).collect();
                let inside = (0..g).all(|k| trial[k] > self.a[k] && trial[k] < self.b[k]);
                if inside {
                    let rt = self.gap_residuals(&trial)?;
                    if norm(&rt) < norm(&r) {
                        c = trial;
                        r = rt;
                        improved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if norm(&r) < 1e-11 * scale.max(1e-3) {
            self.c = c;
            Ok(())
        } else {
            Err(Error::SolverFailure(format!("critical points: residual {:e}", norm(&r))))
        }
    }
}

/// Θ₂ for a periodic comb, built from gap endpoints a_k < b_k inside one
/// period window and the critical points c_k.
#[derive(Debug, Clone)]
pub struct PeriodicCombMap {
    diff: TrigDifferential,
    kappa: f64,
}

const VERTICAL_REACH: f64 = 40.0;

impl PeriodicCombMap {
    /// Map with prescribed gaps on the circle parameter ψ.
    pub fn from_gaps(gaps: &[(f64, f64)]) -> Result<Self> {
        for (k, &(a, b)) in gaps.iter().enumerate() {
            if !(a < b) {
                return Err(Error::GapOrdering(format!("periodic gap {k} inverted")));
            }
            if k + 1 < gaps.len() && b >= gaps[k + 1].0 {
                return Err(Error::GapOrdering(format!("periodic gaps {k} and {} overlap", k + 1)));
            }
        }
        if let (Some(f), Some(l)) = (gaps.first(), gaps.last()) {
            if l.1 >= f.0 + TWO_PI {
                return Err(Error::GapOrdering("gaps exceed one period".into()));
            }
        }
        let mut diff = TrigDifferential {
            a: gaps.iter().map(|g| g.0).collect(),
            b: gaps.iter().map(|g| g.1).collect(),
            c: Vec::new(),
        };
        diff.solve_critical()?;
        let mut map = PeriodicCombMap { diff, kappa: 0.0 };
        if let (Some(f), Some(l)) = (gaps.first(), gaps.last()) {
            let x0 = 0.5 * (l.1 + f.0 + TWO_PI);
            map.kappa = -map.vertical(C64::new(x0, 0.0))?.im;
        }
        Ok(map)
    }

    /// Solves for the gaps whose image is the given comb.
    pub fn new(comb: &PeriodicComb) -> Result<Self> {
        let teeth = comb.teeth();
        let g = teeth.len();
        if g == 0 {
            return Self::from_gaps(&[]);
        }
        let target: Vec<f64> = teeth.iter().flat_map(|t| [t.omega, t.height]).collect();
        let mut x = Vec::with_capacity(2 * g);
        for (k, t) in teeth.iter().enumerate() {
            let prev = if k == 0 { teeth[g - 1].omega - TWO_PI } else { teeth[k - 1].omega };
            let next = if k + 1 == g { teeth[0].omega + TWO_PI } else { teeth[k + 1].omega };
            let room = 0.45 * (t.omega - prev).min(next - t.omega);
            let d = one_tooth_half_width(t.height).min(room);
            x.push(t.omega - d);
            x.push(t.omega + d);
        }
        let forward = |x: &[f64]| -> Result<(Self, Vec<f64>)> {
            let gaps: Vec<(f64, f64)> = x.chunks(2).map(|p| (p[0], p[1])).collect();
            let map = Self::from_gaps(&gaps)?;
            let img = map.comb_image()?;
            Ok((map, img))
        };
        let resid = |f: &[f64]| f.iter().zip(&target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let (mut map, mut f) = forward(&x)?;
        let mut r = resid(&f);
        let n = 2 * g;
        for _ in 0..40 {
            if r < 1e-12 {
                return Ok(map);
            }
            let mut jac = DMatrix::zeros(n, n);
            for j in 0..n {
                let h = 1e-7;
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let fp = forward(&xp)?.1;
                let fm = forward(&xm)?.1;
                for i in 0..n {
                    jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            let rhs = DVector::from_iterator(n, (0..n).map(|i| target[i] - f[i]));
            let step = jac
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::SolverFailure("singular comb Jacobian".into()))?;
            let mut alpha = 1.0;
            let mut improved = false;
            for _ in 0..30 {
                let trial: Vec<f64> = (0..n).map(|i| x[i] + alpha * step[i]).collect();
                if let Ok((m, ft)) = forward(&trial) {
                    let rt = resid(&ft);
                    if rt < r {
                        x = trial;
                        map = m;
                        f = ft;
                        r = rt;
                        improved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if r < 1e-10 {
            Ok(map)
        } else {
            Err(Error::SolverFailure(format!("periodic comb: residual {r:e}")))
        }
    }

    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.diff.a.iter().zip(&self.diff.b).map(|(&a, &b)| (a, b)).collect()
    }

    pub fn critical_points(&self) -> &[f64] {
        &self.diff.c
    }

    /// Θ₂(iy) − iy → i·kappa as y → ∞.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn theta2_prime(&self, psi: C64) -> C64 {
        self.diff.prime(psi)
    }

    /// ∫ from ψ + i∞ down to ψ of (Θ₂′ − 1), with t = Im ψ + u².
    fn vertical(&self, psi: C64) -> Result<C64> {
        if self.diff.a.is_empty() {
            return Ok(C64::new(0.0, 0.0));
        }
        let (x, y) = (psi.re, psi.im);
        let up = adaptive(0.0, VERTICAL_REACH.sqrt(), DEFAULT_TOL, |u| {
            (self.diff.prime(C64::new(x, y + u * u)) - 1.0) * (2.0 * u)
        })?;
        Ok(-I * up)
    }

    /// Θ₂(ψ) for Im ψ ≥ 0.
    pub fn theta2(&self, psi: C64) -> Result<C64> {
        if psi.im < 0.0 {
            return Err(Error::InvariantViolation(format!("Θ₂ needs Im ψ ≥ 0, got {psi}")));
        }
        Ok(psi + self.vertical(psi)? + I * self.kappa)
    }

    /// (ω_k, h_k) of the image comb, flattened.
    pub fn comb_image(&self) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(2 * self.diff.a.len());
        for k in 0..self.diff.a.len() {
            out.push(self.theta2(C64::new(self.diff.a[k], 0.0))?.re);
            out.push(self.theta2(C64::new(self.diff.c[k], 0.0))?.im);
        }
        Ok(out)
    }

    /// Θ₂(ψ + 2π) continued from Θ₂(ψ) along the horizontal segment.
    pub fn continue_period(&self, psi: C64) -> Result<C64> {
        let base = self.theta2(psi)?;
        let inc = adaptive(0.0, TWO_PI, DEFAULT_TOL, |s| self.diff.prime(psi + s))?;
        Ok(base + inc)
    }

    /// sup over points of |Θ₂(ψ+2π) − Θ₂(ψ) − 2π|, using both the direct
    /// evaluation at ψ + 2π and continuation along the period.
    pub fn periodicity_check(&self, points: &[C64]) -> Result<f64> {
        let defects: Vec<Result<f64>> = points
            .par_iter()
            .map(|&psi| {
                let t0 = self.theta2(psi)?;
                let direct = self.theta2(psi + TWO_PI)?;
                let along = self.continue_period(psi)?;
                Ok((direct - t0 - TWO_PI).norm().max((along - t0 - TWO_PI).norm()))
            })
            .collect();
        defects.into_iter().try_fold(0.0, |m, d| Ok(f64::max(m, d?)))
    }

    /// max |Im Θ₂| at `n` real points per band, kept `margin` away from the
    /// teeth bases.
    pub fn boundary_defect(&self, n: usize, margin: f64) -> Result<f64> {
        let g = self.diff.a.len();
        if g == 0 {
            return Ok(0.0);
        }
        let mut xs = Vec::new();
        for k in 0..g {
            let lo = self.diff.b[k] + margin;
            let hi = if k + 1 < g { self.diff.a[k + 1] } else { self.diff.a[0] + TWO_PI } - margin;
            for i in 0..n {
                xs.push(lo + (hi - lo) * (i as f64 + 0.5) / n as f64);
            }
        }
        let vals: Vec<Result<f64>> = xs.par_iter().map(|&x| Ok(self.theta2(C64::new(x, 0.0))?.im.abs())).collect();
        vals.into_iter().try_fold(0.0, |m, d| Ok(f64::max(m, d?)))
    }
}

/// Θ₂(ψ) of a comb (solves the map on every call).
pub fn theta2_eval(comb: &PeriodicComb, psi: C64) -> Result<C64> {
    PeriodicCombMap::new(comb)?.theta2(psi)
}

/// Periodicity defect of a comb's map at the given points.
pub fn periodicity_check(comb: &PeriodicComb, points: &[C64]) -> Result<f64> {
    PeriodicCombMap::new(comb)?.periodicity_check(points)
}

/// Ten test points in the upper half plane spread over one period.
pub fn default_test_points() -> Vec<C64> {
    (0..10)
        .map(|k| C64::new(-1.0 + 0.83 * k as f64, 0.05 + 0.2 * (k % 5) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn angles(n: usize) -> Vec<f64> {
        (0..n).map(|k| -PI + TWO_PI * (k as f64 + 0.5) / n as f64).collect()
    }

    #[test]
    fn zero_sequence_gives_zero() {
        let seq = VerblunskySeq::zero(50);
        for z in [c(0.3, 0.1), c(-0.9, 0.0), c(0.0, 0.99)] {
            assert_eq!(schur_function(&seq, Side::Plus, z, 50).unwrap(), c(0.0, 0.0));
            assert_eq!(schur_function(&seq, Side::Minus, z, 50).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn single_coefficient_is_constant() {
        let v0 = c(0.3, -0.2);
        let seq = VerblunskySeq::from_fn(20, |n| if n == 0 { v0 } else { c(0.0, 0.0) }).unwrap();
        for z in [c(0.5, 0.5), c(-0.2, 0.1)] {
            assert!((schur_function(&seq, Side::Plus, z, 20).unwrap() - v0).norm() < 1e-15);
        }
    }

    #[test]
    fn depth_is_bounded_by_window() {
        let seq = VerblunskySeq::zero(10);
        assert!(matches!(
            schur_function(&seq, Side::Plus, c(0.1, 0.0), 11),
            Err(Error::DepthExceedsWindow { depth: 11, available: 10 })
        ));
        assert!(VerblunskySeq::new(0, vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn constant_sequence_fixed_point_and_rate() {
        let cc = c(0.1, 0.0);
        let phi = c(0.6, 0.0);
        let seq = VerblunskySeq::constant(100, cc).unwrap();
        let s = constant_schur_limit(cc, phi);
        let fp = (cc + phi * s) / (1.0 + phi * cc.conj() * s);
        assert!((fp - s).norm() < 1e-15);
        assert!((schur_function(&seq, Side::Plus, phi, 100).unwrap() - s).norm() < 1e-14);
        let rate = truncation_rate(&seq, Side::Plus, phi, s, &[4, 8, 12, 16, 20, 24]).unwrap();
        let exact = (phi * (1.0 - cc.norm_sqr()) / (1.0 + phi * cc.conj() * s).powi(2)).norm();
        assert!((rate - exact).abs() < 1e-3 * exact, "{rate} vs {exact}");
        assert!((rate - phi.norm()).abs() < 0.1 * phi.norm());
    }

    #[test]
    fn schur_functions_are_contractive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let seq = VerblunskySeq::from_fn(40, |n| {
            let t = n as f64;
            C64::from_polar(0.9 * (0.5 + 0.5 * (1.3 * t).sin()).abs(), 0.7 * t)
        })
        .unwrap();
        for _ in 0..1000 {
            let r: f64 = rng.random::<f64>().sqrt();
            let phi = C64::from_polar(r, rng.random_range(-PI..PI));
            for side in [Side::Plus, Side::Minus] {
                let s = schur_function(&seq, side, phi, 40).unwrap();
                assert!(s.norm() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn zero_sequence_is_reflectionless() {
        let seq = VerblunskySeq::zero(500);
        let rep = cmv_reflectionless_defect(&seq, &angles(16), RadialSchedule { depth: 500, ..Default::default() }).unwrap();
        assert_eq!(rep.max_defect, 0.0);
        assert_eq!(rep.flagged, 0);
    }

    #[test]
    fn constant_sequence_is_reflectionless_on_its_arc() {
        let cc = c(0.3, 0.4);
        let seq = VerblunskySeq::constant(6000, cc).unwrap();
        let edge = 2.0 * cc.norm().asin();
        let arc: Vec<f64> = (0..12).map(|k| edge + 0.2 + (PI - edge - 0.4) * k as f64 / 11.0).collect();
        let rep = cmv_reflectionless_defect(&seq, &arc, RadialSchedule { depth: 6000, ..Default::default() }).unwrap();
        assert!(rep.max_defect < 1e-5, "{}", rep.max_defect);
    }

    #[test]
    fn random_sequence_is_not_reflectionless() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<C64> = (0..400).map(|_| C64::from_polar(0.5 * rng.random::<f64>(), rng.random_range(-PI..PI))).collect();
        let seq = VerblunskySeq::new(-200, vals).unwrap();
        let rep = cmv_reflectionless_defect(&seq, &angles(24), RadialSchedule { depth: 200, ..Default::default() }).unwrap();
        assert!(rep.max_defect >= 1e-2, "{}", rep.max_defect);
    }

    #[test]
    fn decaying_sequence_truncation_stable() {
        let seq = VerblunskySeq::from_fn(400, |n| C64::from_polar(0.5 * 0.9f64.powi(n.abs() as i32), 0.3 * n as f64)).unwrap();
        let a = angles(12);
        let r200 = cmv_reflectionless_defect(&seq, &a, RadialSchedule { depth: 200, ..Default::default() }).unwrap();
        let r400 = cmv_reflectionless_defect(&seq, &a, RadialSchedule { depth: 400, ..Default::default() }).unwrap();
        assert!((r200.max_defect - r400.max_defect).abs() <= 1e-3);
    }

    #[test]
    fn empty_comb_is_identity() {
        let comb = PeriodicComb::empty();
        let map = PeriodicCombMap::new(&comb).unwrap();
        for p in default_test_points() {
            assert_eq!(map.theta2(p).unwrap(), p);
        }
        assert!(map.periodicity_check(&default_test_points()).unwrap() < 1e-14);
    }

    #[test]
    fn comb_validation() {
        assert!(PeriodicComb::new(&[(7.0, 1.0)]).is_err());
        assert!(PeriodicComb::new(&[(1.0, 1.0), (0.5, 1.0)]).is_err());
        assert!(PeriodicComb::new(&[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn one_tooth_matches_closed_form() {
        let (w, h) = (1.3, 0.7);
        let map = PeriodicCombMap::new(&PeriodicComb::new(&[(w, h)]).unwrap()).unwrap();
        let (a, b) = map.gaps()[0];
        let d = one_tooth_half_width(h);
        assert!((a - (w - d)).abs() < 1e-10 && (b - (w + d)).abs() < 1e-10);
        assert!((map.critical_points()[0] - w).abs() < 1e-12);
        for p in default_test_points() {
            let lhs = (map.theta2(p).unwrap() - w).cos();
            assert!((lhs - one_tooth_relation(w, h, p)).norm() < 1e-10, "{p}");
        }
        assert!((map.kappa() - (0.5 * (h.cosh() + 1.0)).ln()).abs() < 1e-10);
    }

    #[test]
    fn one_tooth_periodicity() {
        let map = PeriodicCombMap::new(&PeriodicComb::new(&[(2.0, 1.1)]).unwrap()).unwrap();
        let d = map.periodicity_check(&default_test_points()).unwrap();
        assert!(d <= 1e-8, "{d}");
    }

    #[test]
    fn boundary_is_real_off_the_teeth() {
        let map = PeriodicCombMap::new(&PeriodicComb::new(&[(0.8, 0.5), (3.5, 1.2)]).unwrap()).unwrap();
        assert!(map.boundary_defect(8, 1e-3).unwrap() < 1e-10);
        let img = map.comb_image().unwrap();
        let want = [0.8, 0.5, 3.5, 1.2];
        for (x, y) in img.iter().zip(want) {
            assert!((x - y).abs() < 1e-10);
        }
        let shift: f64 = map.critical_points().iter().zip(map.gaps()).map(|(c, g)| c - 0.5 * (g.0 + g.1)).sum();
        let wrapped = (shift / TWO_PI).round() * TWO_PI;
        assert!((shift - wrapped).abs() < 1e-10);
        assert!(map.periodicity_check(&default_test_points()).unwrap() <= 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn schur_contractive(re in -0.95f64..0.95, im in -0.95f64..0.95, r in 0.0f64..0.999, t in -PI..PI) {
            let v = C64::new(re, im);
            prop_assume!(v.norm() < 0.99);
            let seq = VerblunskySeq::constant(30, v).unwrap();
            let s = schur_function(&seq, Side::Minus, C64::from_polar(r, t), 30).unwrap();
            prop_assert!(s.norm() <= 1.0 + 1e-12);
        }
    }
}
