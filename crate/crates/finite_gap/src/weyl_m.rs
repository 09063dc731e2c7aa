//! Closed-form reflectionless Weyl pair of a finite-gap set and divisor.
//!
//! With F(λ) = −i √(λ+1) ∏ √(λ−λ_k⁻)√(λ−λ_k⁺) (principal roots, upper half
//! plane, boundary values from above):
//!
//!   m₊(λ) = −F(λ)/∏(λ−λ_k) + Σ_interior ρ_k ε_k/(λ_k − λ),
//!   ρ_j   = F(λ_j)/∏_{k≠j}(λ_j − λ_k),
//!
//! and m₋ is the same expression with every ε_k reversed.

use crate::cx::{complex_step, sqrt_upper, C64};
use crate::domain::{Divisor, FiniteGapSet};
use crate::error::{Error, Result};
use crate::quad::richardson3;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MSample {
    pub lambda: C64,
    pub value: C64,
    pub side: Side,
}

#[derive(Debug, Clone)]
pub struct WeylPair {
    set: FiniteGapSet,
    divisor: Divisor,
    edges: Vec<f64>,
    rho: Vec<f64>,
    interior: Vec<bool>,
}

impl WeylPair {
    pub fn new(set: &FiniteGapSet, divisor: &Divisor) -> Result<Self> {
        if divisor.len() != set.genus() {
            return Err(Error::InvalidDivisor(format!(
                "{} points for {} gaps",
                divisor.len(),
                set.genus()
            )));
        }
        for (k, p) in divisor.points().iter().enumerate() {
            let (a, b) = set.gap(k);
            if p.lambda < a || p.lambda > b {
                return Err(Error::InvalidDivisor(format!("point {k} not in its gap")));
            }
        }
        let mut edges = vec![-1.0];
        for &(a, b) in set.gaps() {
            edges.push(a);
            edges.push(b);
        }
        let mut pair = WeylPair {
            set: set.clone(),
            divisor: divisor.clone(),
            edges,
            rho: vec![0.0; set.genus()],
            interior: (0..set.genus()).map(|k| !divisor.at_edge(set, k)).collect(),
        };
        for j in 0..set.genus() {
            if !pair.interior[j] {
                continue;
            }
            let lj = divisor.points()[j].lambda;
            let r = pair.g_j(j, C64::new(lj, 0.0)).re;
            // positive branch of the local root
            pair.rho[j] = r.abs();
        }
        Ok(pair)
    }

    pub fn set(&self) -> &FiniteGapSet {
        &self.set
    }

    pub fn divisor(&self) -> &Divisor {
        &self.divisor
    }

    /// Residue weights ρ_j (zero for edge points).
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// F(λ) on the closed upper half plane; extended by F(λ̄) = conj F(λ).
    pub fn f(&self, lambda: C64) -> C64 {
        if lambda.im < 0.0 {
            return self.f(lambda.conj()).conj();
        }
        let mut p = C64::new(0.0, -1.0);
        for &e in &self.edges {
            p *= sqrt_upper(lambda - e);
        }
        p
    }

    /// F(λ)/∏_{k≠j}(λ − λ_k).
    fn g_j(&self, j: usize, lambda: C64) -> C64 {
        let mut den = C64::new(1.0, 0.0);
        for (k, p) in self.divisor.points().iter().enumerate() {
            if k != j {
                den *= lambda - p.lambda;
            }
        }
        self.f(lambda) / den
    }

    fn eps_side(&self, side: Side, k: usize) -> f64 {
        side.sign() * self.divisor.points()[k].eps as f64
    }

    /// True if λ_k is a pole of m_side.
    pub fn has_pole(&self, side: Side, k: usize) -> bool {
        self.interior[k] && self.eps_side(side, k) > 0.0
    }

    fn raw(&self, side: Side, lambda: C64) -> C64 {
        let pts = self.divisor.points();
        let mut den = C64::new(1.0, 0.0);
        for p in pts {
            den *= lambda - p.lambda;
        }
        let mut m = -self.f(lambda) / den;
        for (k, p) in pts.iter().enumerate() {
            if self.interior[k] {
                m += self.rho[k] * self.eps_side(side, k) / (p.lambda - lambda);
            }
        }
        m
    }

    /// m_side(λ) for λ off E and off the poles of that side.
    pub fn m(&self, side: Side, lambda: C64) -> Result<C64> {
        if lambda.im < 0.0 {
            return Ok(self.m(side, lambda.conj())?.conj());
        }
        if lambda.im == 0.0 {
            let x = lambda.re;
            if self.set.contains(x) {
                return Err(Error::EvalOnSpectrum(x));
            }
            for (k, p) in self.divisor.points().iter().enumerate() {
                if self.interior[k] && x == p.lambda {
                    if self.has_pole(side, k) {
                        return Err(Error::EvalAtPole(x));
                    }
                    return Ok(self.removable_value(side, k));
                }
            }
        }
        Ok(self.raw(side, lambda))
    }

    /// Value at λ_k where the two pole terms of m_side cancel.
    fn removable_value(&self, side: Side, k: usize) -> C64 {
        let lk = self.divisor.points()[k].lambda;
        let dg = complex_step(|z| self.g_j(k, z), lk);
        let mut m = -dg;
        for (j, p) in self.divisor.points().iter().enumerate() {
            if j != k && self.interior[j] {
                m += self.rho[j] * self.eps_side(side, j) / (p.lambda - lk);
            }
        }
        C64::new(m, 0.0)
    }

    /// Boundary value m_side(x + i0) for x on E.
    pub fn m_boundary(&self, side: Side, x: f64) -> C64 {
        self.raw(side, C64::new(x, 0.0))
    }

    /// Real derivative at a real point off E (complex step).
    pub fn m_prime_real(&self, side: Side, x: f64) -> f64 {
        complex_step(|z| self.raw(side, z), x)
    }

    /// Diagonal Green function −1/(m₊ + m₋) = ∏(λ − λ_k)/(2F(λ)).
    pub fn green_diagonal(&self, lambda: C64) -> Result<C64> {
        if lambda.im == 0.0 && self.set.contains(lambda.re) {
            return Err(Error::EvalOnSpectrum(lambda.re));
        }
        let mut num = C64::new(1.0, 0.0);
        for p in self.divisor.points() {
            num *= lambda - p.lambda;
        }
        Ok(num / (self.f(lambda) * 2.0))
    }

    /// q(0) by the trace formula.
    pub fn trace_q0(&self) -> f64 {
        trace_q0(&self.set, &self.divisor)
    }

    pub fn sample(&self, side: Side, lambda: C64) -> Result<MSample> {
        Ok(MSample { lambda, value: self.m(side, lambda)?, side })
    }
}

pub fn weyl_m(side: Side, set: &FiniteGapSet, divisor: &Divisor, lambda: C64) -> Result<C64> {
    WeylPair::new(set, divisor)?.m(side, lambda)
}

pub fn green_diagonal(set: &FiniteGapSet, divisor: &Divisor, lambda: C64) -> Result<C64> {
    WeylPair::new(set, divisor)?.green_diagonal(lambda)
}

/// q(0) = −1 + Σ (λ_k⁻ + λ_k⁺ − 2λ_k).
pub fn trace_q0(set: &FiniteGapSet, divisor: &Divisor) -> f64 {
    set.gaps()
        .iter()
        .zip(divisor.points())
        .fold(-1.0, |acc, (&(a, b), p)| acc + a + b - 2.0 * p.lambda)
}

/// `n` interior points spread over the bands, the last band cut at `right`.
pub fn band_grid(set: &FiniteGapSet, n: usize, right: f64) -> Vec<f64> {
    let bands: Vec<(f64, f64)> = set
        .bands()
        .into_iter()
        .map(|(a, b)| (a, if b.is_finite() { b } else { right.max(a + 1.0) }))
        .collect();
    let total: f64 = bands.iter().map(|(a, b)| b - a).sum();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = total * (i as f64 + 0.5) / n as f64;
        for &(a, b) in &bands {
            let w = b - a;
            if s < w {
                let x = a + s;
                let margin = 1e-3 * w;
                out.push(x.clamp(a + margin, b - margin));
                break;
            }
            s -= w;
        }
    }
    out
}

pub const ETA_SCHEDULE: [f64; 3] = [1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub max: f64,
    /// (x, extrapolated defect)
    pub table: Vec<(f64, f64)>,
    pub nan_points: Vec<f64>,
}

/// max_x |m₊(x+iη) + conj m₋(x+iη)| extrapolated to η = 0, with m₊ taken
/// from `plus` and m₋ from `minus` (the same pair for the identity itself).
pub fn reflectionless_defect_between(plus: &WeylPair, minus: &WeylPair, grid: &[f64]) -> DefectReport {
    let rows: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&x| {
            let s: Vec<C64> = ETA_SCHEDULE
                .iter()
                .map(|&eta| {
                    let l = C64::new(x, eta);
                    let a = plus.m(Side::Plus, l).unwrap_or(C64::new(f64::NAN, 0.0));
                    let b = minus.m(Side::Minus, l).unwrap_or(C64::new(f64::NAN, 0.0));
                    a + b.conj()
                })
                .collect();
            (x, richardson3(s[0], s[1], s[2], 10.0).norm())
        })
        .collect();
    let nan_points: Vec<f64> = rows.iter().filter(|r| !r.1.is_finite()).map(|r| r.0).collect();
    let max = rows.iter().filter(|r| r.1.is_finite()).map(|r| r.1).fold(0.0, f64::max);
    DefectReport { max, table: rows, nan_points }
}

pub fn reflectionless_defect(pair: &WeylPair, grid: &[f64]) -> DefectReport {
    reflectionless_defect_between(pair, pair, grid)
}
