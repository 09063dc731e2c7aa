//! From the Weyl pair (m₊, m₋) at the base point λ* to the Jacobi side:
//! the connecting coefficient a₀, the half-line Jacobi Weyl functions r± in
//! z = 1/(λ − λ*) and the 2×2 resolvent block at sites (−1, 0).

use crate::cx::{C64, I};
use crate::domain::{ChangeOfVariables, ZDivisor, ZPoint, ZSet};
use crate::error::{Error, Result};
use crate::quad::richardson3;
use crate::weyl_m::{Side, WeylPair, ETA_SCHEDULE};
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct TransformContext {
    cov: ChangeOfVariables,
    pair: WeylPair,
    zset: ZSet,
    /// m±(λ*), indexed [plus, minus]
    m_star: [f64; 2],
    /// m±′(λ*)
    dm_star: [f64; 2],
    a0: f64,
}

fn idx(side: Side) -> usize {
    match side {
        Side::Plus => 0,
        Side::Minus => 1,
    }
}

impl TransformContext {
    pub fn new(cov: ChangeOfVariables, pair: WeylPair) -> Result<Self> {
        let s = cov.lambda_star();
        let l = C64::new(s, 0.0);
        let mp = pair.m(Side::Plus, l)?.re;
        let mm = pair.m(Side::Minus, l)?.re;
        let dp = pair.m_prime_real(Side::Plus, s);
        let dm = pair.m_prime_real(Side::Minus, s);
        let sum = mp + mm;
        if !(sum < 0.0) {
            return Err(Error::InvariantViolation(format!(
                "m+(λ*) + m-(λ*) = {sum} must be negative"
            )));
        }
        if !(dp > 0.0 && dm > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "m±′(λ*) = ({dp}, {dm}) must be positive"
            )));
        }
        let a0 = -(dp * dm).sqrt() / sum;
        let zset = cov.map_set(pair.set());
        Ok(TransformContext { cov, pair, zset, m_star: [mp, mm], dm_star: [dp, dm], a0 })
    }

    pub fn cov(&self) -> &ChangeOfVariables {
        &self.cov
    }

    pub fn pair(&self) -> &WeylPair {
        &self.pair
    }

    pub fn zset(&self) -> &ZSet {
        &self.zset
    }

    pub fn m_star(&self, side: Side) -> f64 {
        self.m_star[idx(side)]
    }

    pub fn dm_star(&self, side: Side) -> f64 {
        self.dm_star[idx(side)]
    }

    /// a₀ = −√(m₊′ m₋′)/(m₊ + m₋) at λ*.
    pub fn coupling_a0(&self) -> f64 {
        self.a0
    }

    fn r_from_m(&self, side: Side, m: Option<C64>) -> Result<C64> {
        let o = side.other();
        let big_m = self.m_star[0] + self.m_star[1];
        let pref = big_m / self.dm_star[idx(side)];
        let ms = self.m_star[idx(side)];
        let mo = self.m_star[idx(o)];
        match m {
            // m_side has a pole: (m* − m)/(m_o* + m) → −1
            None => Ok(C64::new(-pref, 0.0)),
            Some(m) => {
                let den = mo + m;
                if den.norm() == 0.0 {
                    return Err(Error::EvalAtPole(m.re));
                }
                Ok((ms - m) / den * pref)
            }
        }
    }

    /// r_side(z) for z off Ẽ.
    pub fn r(&self, side: Side, z: C64) -> Result<C64> {
        if z.im == 0.0 && self.zset.contains(z.re) {
            return Err(Error::EvalOnSpectrum(z.re));
        }
        let lambda = self.cov.from_z(z)?;
        let m = match self.pair.m(side, lambda) {
            Ok(v) => Some(v),
            Err(Error::EvalAtPole(_)) => None,
            Err(e) => return Err(e),
        };
        self.r_from_m(side, m)
    }

    /// Boundary value r_side(x + i0) for x in the interior of Ẽ.
    /// z + i0 corresponds to λ − i0, hence the conjugated m.
    pub fn r_boundary(&self, side: Side, x: f64) -> Result<C64> {
        let lambda = self.cov.from_z_real(x);
        let m = self.pair.m_boundary(side, lambda).conj();
        self.r_from_m(side, Some(m))
    }

    /// R(z) = [[1/r₋, a₀], [a₀, 1/r₊]]⁻¹, rows/columns ordered (−1, 0).
    pub fn resolvent_matrix(&self, z: C64) -> Result<[[C64; 2]; 2]> {
        let rp = self.r(Side::Plus, z)?;
        let rm = self.r(Side::Minus, z)?;
        resolvent_from_r(rp, rm, self.a0, z)
    }

    /// R₀₀(z) = 1/(1/r₊ − a₀² r₋).
    pub fn r00(&self, z: C64) -> Result<C64> {
        let rp = self.r(Side::Plus, z)?;
        let rm = self.r(Side::Minus, z)?;
        Ok(1.0 / (1.0 / rp - self.a0 * self.a0 * rm))
    }

    /// Divisor of the Jacobi operator in z: per gap, the point μ where either
    /// m₊(μ) = m₊(λ*) (pole of 1/r₊, ε = +1) or m₋(μ) = −m₊(λ*) (pole of a₀² r₋, ε = −1),
    /// mapped to x = 1/(μ − λ*).
    pub fn jacobi_divisor(&self) -> Result<ZDivisor> {
        let set = self.pair.set();
        let mut points = Vec::with_capacity(set.genus());
        for k in 0..set.genus() {
            let (a, b) = set.gap(k);
            let fp = |l: f64| -> Option<f64> {
                match self.pair.m(Side::Plus, C64::new(l, 0.0)) {
                    Ok(v) => Some(v.re - self.m_star[0]),
                    Err(_) => None,
                }
            };
            let fm = |l: f64| -> Option<f64> {
                match self.pair.m(Side::Minus, C64::new(l, 0.0)) {
                    Ok(v) => Some(v.re + self.m_star[0]),
                    Err(_) => None,
                }
            };
            let mut found: Vec<(f64, i8)> = Vec::new();
            for (f, eps) in [(&fp as &dyn Fn(f64) -> Option<f64>, 1i8), (&fm, -1i8)] {
                if let Some(root) = increasing_root(f, a, b) {
                    found.push((root, eps));
                }
            }
            let (mu, eps) = match found.len() {
                0 => {
                    // the zero sits on an edge: pick the edge where R₀₀ vanishes
                    let ta = self.cov.to_z_real(a);
                    let tb = self.cov.to_z_real(b);
                    let ra = self.r00(C64::new(ta, 1e-9)).map(|v| v.norm()).unwrap_or(f64::INFINITY);
                    let rb = self.r00(C64::new(tb, 1e-9)).map(|v| v.norm()).unwrap_or(f64::INFINITY);
                    (if ra < rb { a } else { b }, 1)
                }
                1 => found[0],
                _ => {
                    return Err(Error::AmbiguousPole {
                        gap: k,
                        plus: found[0].0,
                        minus: found[1].0,
                    })
                }
            };
            points.push(ZPoint { x: self.cov.to_z_real(mu), eps });
        }
        Ok(ZDivisor { points })
    }

    /// max |1/r₊(x+i0) − conj(a₀² r₋(x+i0))| over the grid, boundary values
    /// by Richardson extrapolation over η.
    pub fn jacobi_defect(&self, grid: &[f64]) -> JacobiDefect {
        let a2 = self.a0 * self.a0;
        let table: Vec<(f64, f64)> = grid
            .iter()
            .map(|&x| {
                let s: Vec<C64> = ETA_SCHEDULE
                    .iter()
                    .map(|&eta| {
                        let z = C64::new(x, eta);
                        match (self.r(Side::Plus, z), self.r(Side::Minus, z)) {
                            (Ok(p), Ok(m)) => 1.0 / p - (m * a2).conj(),
                            _ => C64::new(f64::NAN, 0.0),
                        }
                    })
                    .collect();
                (x, richardson3(s[0], s[1], s[2], 10.0).norm())
            })
            .collect();
        let max = table.iter().map(|r| r.1).fold(0.0, f64::max);
        JacobiDefect { max, table }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JacobiDefect {
    pub max: f64,
    pub table: Vec<(f64, f64)>,
}

/// Inverse of [[1/r₋, a₀],[a₀, 1/r₊]].
pub fn resolvent_from_r(rp: C64, rm: C64, a0: f64, z: C64) -> Result<[[C64; 2]; 2]> {
    let ip = 1.0 / rp;
    let im = 1.0 / rm;
    let det = im * ip - a0 * a0;
    let scale = im.norm() * ip.norm() + a0 * a0;
    if det.norm() <= 1e-14 * scale || !crate::cx::is_finite(det) {
        return Err(Error::SingularMatrix(format!("{z}")));
    }
    let inv = 1.0 / det;
    Ok([[ip * inv, -a0 * inv], [-a0 * inv, im * inv]])
}

/// Unique point in (a, b) where f crosses zero upwards (f is increasing between
/// its poles, so downward sign changes are poles). Bisection after bracketing.
fn increasing_root(f: &dyn Fn(f64) -> Option<f64>, a: f64, b: f64) -> Option<f64> {
    let n = 400;
    let node = |i: usize| {
        let t = std::f64::consts::PI * i as f64 / n as f64;
        let u = 0.5 * (1.0 - t.cos());
        a + (b - a) * u.clamp(1e-12, 1.0 - 1e-12)
    };
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=n {
        let x = node(i);
        let v = match f(x) {
            Some(v) if v.is_finite() => v,
            _ => {
                prev = None;
                continue;
            }
        };
        if v == 0.0 {
            return Some(x);
        }
        if let Some((xp, vp)) = prev {
            if vp < 0.0 && v > 0.0 {
                let (mut lo, mut hi) = (xp, x);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    match f(mid) {
                        Some(fm) if fm < 0.0 => lo = mid,
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                return Some(0.5 * (lo + hi));
            }
        }
        prev = Some((x, v));
    }
    None
}

/// i·Im helper for Herglotz-matrix checks: (R − R*)/(2i Im z).
pub fn herglotz_part(r: &[[C64; 2]; 2], z: C64) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (r[i][j] - r[j][i].conj()) / (2.0 * I * z.im);
        }
    }
    out
}

/// Eigenvalues of a Hermitian 2×2 matrix, ascending.
pub fn hermitian_eigs(m: &[[C64; 2]; 2]) -> [f64; 2] {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let b = m[0][1].norm();
    let tr = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [tr - disc, tr + disc]
}
