//! Brute-force references: transfer matrices, backward Riccati integration,
//! the energy-variation identity, J-monotonicity and finite sections.

use crate::cx::{csqrt, C64, I};
use crate::domain::JacobiOperator;
use crate::error::{Error, Result};
use crate::ode::{self, State, Tolerance};
use serde::Serialize;
use std::f64::consts::PI;

pub type Mat2 = [[C64; 2]; 2];

/// 𝔍 = [[0, −1], [1, 0]].
pub const J_FORM: Mat2 = [
    [C64 { re: 0.0, im: 0.0 }, C64 { re: -1.0, im: 0.0 }],
    [C64 { re: 1.0, im: 0.0 }, C64 { re: 0.0, im: 0.0 }],
];

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// 𝔄(ℓ, λ) = [[u₁, u₁′], [u₂, u₂′]] at x = ℓ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransferMatrix {
    pub lambda: C64,
    pub ell: f64,
    pub m: Mat2,
}

impl TransferMatrix {
    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

/// Integrates −u″ + qu = λu for the basis u₁(0)=1, u₁′(0)=0, u₂(0)=0, u₂′(0)=1.
pub fn integrate_schrodinger<Q: Fn(f64) -> f64>(q: Q, lambda: C64, ell: f64) -> Result<TransferMatrix> {
    let f = |x: f64, y: &State, dy: &mut State| {
        let v = C64::new(q(x), 0.0) - lambda;
        for k in 0..2 {
            let o = 4 * k;
            let u = C64::new(y[o], y[o + 1]);
            let up = v * u;
            dy[o] = y[o + 2];
            dy[o + 1] = y[o + 3];
            dy[o + 2] = up.re;
            dy[o + 3] = up.im;
        }
    };
    let y0 = State::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let y = ode::solve(f, 0.0, ell, y0, Tolerance::default())?;
    let m = [
        [C64::new(y[0], y[1]), C64::new(y[2], y[3])],
        [C64::new(y[4], y[5]), C64::new(y[6], y[7])],
    ];
    Ok(TransferMatrix { lambda, ell, m })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RiccatiResult {
    pub m: C64,
    /// |m(X) − m(3X/4)|
    pub error: f64,
    pub x: f64,
}

fn riccati_once<Q: Fn(f64) -> f64>(q: &Q, lambda: C64, x: f64) -> Result<C64> {
    let seed = I * csqrt(lambda - q(x));
    let f = |t: f64, y: &State, dy: &mut State| {
        let m = C64::new(y[0], y[1]);
        let d = C64::new(q(t), 0.0) - lambda - m * m;
        dy[0] = d.re;
        dy[1] = d.im;
    };
    let y = ode::solve(f, x, 0.0, State::from_vec(vec![seed.re, seed.im]), Tolerance::default())
        .map_err(|_| Error::BlowUp(x))?;
    let m = C64::new(y[0], y[1]);
    if !(m.norm() < 1e8) {
        return Err(Error::BlowUp(x));
    }
    Ok(m)
}

/// m₊(λ) = u₊′(0)/u₊(0) by backward Riccati integration from X with seed i√(λ − q(X)).
pub fn riccati_m<Q: Fn(f64) -> f64>(q: Q, lambda: C64, x: f64) -> Result<RiccatiResult> {
    if !(lambda.im > 0.0) {
        return Err(Error::InvariantViolation(format!("Riccati needs Im λ > 0, got {lambda}")));
    }
    let mut last = Error::BlowUp(x);
    for k in 0..4 {
        let xx = x * (1.0 + 0.05 * k as f64);
        let a = riccati_once(&q, lambda, xx);
        let b = riccati_once(&q, lambda, 0.75 * xx);
        match (a, b) {
            (Ok(m), Ok(m2)) => return Ok(RiccatiResult { m, error: (m - m2).norm(), x: xx }),
            (Err(e), _) | (_, Err(e)) => last = e,
        }
    }
    Err(last)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyVariation {
    /// ∫₀^X u₊(λ₁)u₊(λ₂)
    pub integral: C64,
    /// divided difference, or m₊′ when λ₁ = λ₂
    pub reference: C64,
    pub defect: f64,
}

/// Joint backward integration of m(λ₁), m(λ₂) and K = ∫_x^X u₁u₂ / (u₁u₂)(x).
fn product_integral<Q: Fn(f64) -> f64>(q: &Q, l1: C64, l2: C64, x: f64) -> Result<(C64, C64, C64)> {
    let s1 = I * csqrt(l1 - q(x));
    let s2 = I * csqrt(l2 - q(x));
    let f = |t: f64, y: &State, dy: &mut State| {
        let m1 = C64::new(y[0], y[1]);
        let m2 = C64::new(y[2], y[3]);
        let k = C64::new(y[4], y[5]);
        let qt = C64::new(q(t), 0.0);
        let d1 = qt - l1 - m1 * m1;
        let d2 = qt - l2 - m2 * m2;
        let dk = -1.0 - (m1 + m2) * k;
        dy[0] = d1.re;
        dy[1] = d1.im;
        dy[2] = d2.re;
        dy[3] = d2.im;
        dy[4] = dk.re;
        dy[5] = dk.im;
    };
    let y0 = State::from_vec(vec![s1.re, s1.im, s2.re, s2.im, 0.0, 0.0]);
    let y = ode::solve(f, x, 0.0, y0, Tolerance::default()).map_err(|_| Error::BlowUp(x))?;
    Ok((C64::new(y[0], y[1]), C64::new(y[2], y[3]), C64::new(y[4], y[5])))
}

/// Checks ∫₀^∞ u₊(λ₁)u₊(λ₂) = (m₊(λ₁) − m₊(λ₂))/(λ₁ − λ₂) with u₊(0) = 1.
/// For λ₁ = λ₂ the right side is m₊′(λ₁), computed by a Cauchy integral of `riccati_m`.
pub fn energy_variation_check<Q: Fn(f64) -> f64>(q: Q, l1: C64, l2: C64, x: f64) -> Result<EnergyVariation> {
    if !(l1.im > 0.0 && l2.im > 0.0) {
        return Err(Error::InvariantViolation("energies must lie in the upper half plane".into()));
    }
    let (m1, m2, k) = product_integral(&q, l1, l2, x)?;
    let reference = if (l1 - l2).norm() > 1e-12 * l1.norm().max(1.0) {
        (m1 - m2) / (l1 - l2)
    } else {
        let r = 0.5 * l1.im;
        let n = 48;
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            let w = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let m = riccati_once(&q, l1 + w * r, x)?;
            acc += m / w;
        }
        acc / (n as f64 * r)
    };
    Ok(EnergyVariation { integral: k, reference, defect: (k - reference).norm() })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JClassification {
    pub real_energy: bool,
    /// ‖𝔄𝔍𝔄* − 𝔍‖ (Frobenius)
    pub norm: f64,
    /// eigenvalues of (𝔄𝔍𝔄* − 𝔍)/(λ − λ̄), ascending; zero for real λ
    pub eigenvalues: [f64; 2],
    pub negative_semidefinite: bool,
}

pub fn j_monotonicity_check(a: &Mat2, lambda: C64) -> JClassification {
    let aj = mul(&mul(a, &J_FORM), &adjoint(a));
    let mut d = [[C64::new(0.0, 0.0); 2]; 2];
    let mut norm = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d[i][j] = aj[i][j] - J_FORM[i][j];
            norm += d[i][j].norm_sqr();
        }
    }
    let norm = norm.sqrt();
    if lambda.im == 0.0 {
        return JClassification { real_energy: true, norm, eigenvalues: [0.0; 2], negative_semidefinite: true };
    }
    let s = 1.0 / (2.0 * lambda.im);
    // d/(2i Im λ) is Hermitian
    let h00 = (d[0][0] / I).re * s;
    let h11 = (d[1][1] / I).re * s;
    let off = d[0][1] / I * s;
    let tr = h00 + h11;
    let det = h00 * h11 - off.norm_sqr();
    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
    let e = [0.5 * tr - disc, 0.5 * tr + disc];
    let scale = e[0].abs().max(e[1].abs()).max(1e-300);
    JClassification {
        real_energy: false,
        norm,
        eigenvalues: e,
        negative_semidefinite: e[1] <= 1e-10 * scale,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FiniteSection {
    pub value: C64,
    /// |r(N) − r(N/2)|
    pub error: f64,
}

fn continued_fraction(j: &JacobiOperator, from: i64, to: i64, z: C64, step: i64) -> Result<C64> {
    // ⟨(J_[from..to] − z)⁻¹ δ_from, δ_from⟩, sites walked from `to` back to `from`
    let mut f = C64::new(j.b(to), 0.0) - z;
    let mut n = to;
    while n != from {
        if f.norm() < 1e-300 {
            return Err(Error::SingularSection((n - from).unsigned_abs() as usize));
        }
        let next = n - step;
        let coupling = if step > 0 { j.a(n) } else { j.a(next) };
        f = C64::new(j.b(next), 0.0) - z - coupling * coupling / f;
        n = next;
    }
    if f.norm() < 1e-300 {
        return Err(Error::SingularSection(0));
    }
    Ok(1.0 / f)
}

/// ⟨(J_N − z)⁻¹δ₀, δ₀⟩ for the truncation to sites 0..N−1 of the window.
pub fn finite_section_r(j: &JacobiOperator, z: C64, n: usize) -> Result<FiniteSection> {
    if n == 0 || j.lo() > 0 || j.hi() < n as i64 - 1 {
        return Err(Error::DepthExceedsWindow { depth: n, available: (j.hi() + 1).max(0) as usize });
    }
    let v = continued_fraction(j, 0, n as i64 - 1, z, 1)?;
    let half = continued_fraction(j, 0, (n as i64 / 2 - 1).max(0), z, 1)?;
    Ok(FiniteSection { value: v, error: (v - half).norm() })
}

/// ⟨(J − z)⁻¹δ₀, δ₀⟩ on the whole two-sided window.
pub fn two_sided_r00(j: &JacobiOperator, z: C64) -> Result<C64> {
    Ok(two_sided_section(j, z, j.lo(), j.hi())?)
}

fn two_sided_section(j: &JacobiOperator, z: C64, lo: i64, hi: i64) -> Result<C64> {
    if lo > 0 || hi < 0 {
        return Err(Error::WindowMismatch("window must contain site 0".into()));
    }
    let mut f = C64::new(j.b(0), 0.0) - z;
    if lo < 0 {
        let g = continued_fraction(j, -1, lo, z, -1)?;
        f -= j.a(0) * j.a(0) * g;
    }
    if hi > 0 {
        let g = continued_fraction(j, 1, hi, z, 1)?;
        f -= j.a(1) * j.a(1) * g;
    }
    if f.norm() < 1e-300 {
        return Err(Error::SingularSection(0));
    }
    Ok(1.0 / f)
}

/// Two-sided section with the half-window comparison as error estimate.
pub fn two_sided_section_r00(j: &JacobiOperator, z: C64) -> Result<FiniteSection> {
    let v = two_sided_section(j, z, j.lo(), j.hi())?;
    let half = two_sided_section(j, z, j.lo() / 2, j.hi() / 2)?;
    Ok(FiniteSection { value: v, error: (v - half).norm() })
}
