//! Spectral sets, divisors, comb data, the change of variables and Jacobi windows.

use crate::cx::C64;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Points within this relative distance of a gap edge count as the edge.
pub const EDGE_TOL: f64 = 1e-14;

/// E = [-1, inf) minus finitely many open gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGapSet {
    gaps: Vec<(f64, f64)>,
}

impl FiniteGapSet {
    /// The half line [-1, inf).
    pub fn empty() -> Self {
        FiniteGapSet { gaps: Vec::new() }
    }

    /// Validates a raw gap list. Gaps are sorted; overlap, inversion and
    /// endpoints at or below -1 are rejected.
    pub fn new(raw: &[(f64, f64)]) -> Result<Self> {
        let mut gaps = raw.to_vec();
        for &(a, b) in &gaps {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::GapOrdering(format!("non-finite endpoint in ({a}, {b})")));
            }
            if a >= b {
                return Err(Error::GapOrdering(format!("inverted or empty gap ({a}, {b})")));
            }
            if a <= -1.0 {
                return Err(Error::GapOutOfRange(a));
            }
        }
        gaps.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in gaps.windows(2) {
            if w[0].1 >= w[1].0 {
                return Err(Error::GapOrdering(format!(
                    "gaps ({}, {}) and ({}, {}) overlap or touch",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(FiniteGapSet { gaps })
    }

    pub fn genus(&self) -> usize {
        self.gaps.len()
    }

    pub fn gaps(&self) -> &[(f64, f64)] {
        &self.gaps
    }

    pub fn gap(&self, k: usize) -> (f64, f64) {
        self.gaps[k]
    }

    /// Finite bands in increasing order; the last band is [b_g, inf).
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        let mut left = -1.0;
        for &(a, b) in &self.gaps {
            out.push((left, a));
            left = b;
        }
        out.push((left, f64::INFINITY));
        out
    }

    /// Closed-set membership for real points.
    pub fn contains(&self, x: f64) -> bool {
        x >= -1.0 && !self.gaps.iter().any(|&(a, b)| x > a && x < b)
    }

    /// Index of the open gap containing x.
    pub fn gap_of(&self, x: f64) -> Option<usize> {
        self.gaps.iter().position(|&(a, b)| x > a && x < b)
    }

    /// R(x) = (x+1) prod (x-a_k)(x-b_k).
    pub fn r_poly(&self, x: f64) -> f64 {
        self.gaps.iter().fold(x + 1.0, |acc, &(a, b)| acc * (x - a) * (x - b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivisorPoint {
    pub lambda: f64,
    pub eps: i8,
}

/// One point per gap with a sheet sign; edge points carry eps = +1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    points: Vec<DivisorPoint>,
}

impl Divisor {
    pub fn new(set: &FiniteGapSet, points: &[(f64, i8)]) -> Result<Self> {
        if points.len() != set.genus() {
            return Err(Error::InvalidDivisor(format!(
                "{} points for {} gaps",
                points.len(),
                set.genus()
            )));
        }
        let mut out = Vec::with_capacity(points.len());
        for (k, &(lambda, eps)) in points.iter().enumerate() {
            let (a, b) = set.gap(k);
            if eps != 1 && eps != -1 {
                return Err(Error::InvalidDivisor(format!("eps must be +1 or -1, got {eps}")));
            }
            if !(lambda >= a && lambda <= b) {
                return Err(Error::InvalidDivisor(format!(
                    "lambda_{k} = {lambda} outside [{a}, {b}]"
                )));
            }
            let tol = EDGE_TOL * (b - a).max(1.0);
            let (lambda, eps) = if (lambda - a).abs() <= tol {
                (a, 1)
            } else if (b - lambda).abs() <= tol {
                (b, 1)
            } else {
                (lambda, eps)
            };
            out.push(DivisorPoint { lambda, eps });
        }
        Ok(Divisor { points: out })
    }

    /// All points at the left gap edges.
    pub fn left_edges(set: &FiniteGapSet) -> Self {
        Divisor {
            points: set
                .gaps()
                .iter()
                .map(|&(a, _)| DivisorPoint { lambda: a, eps: 1 })
                .collect(),
        }
    }

    pub fn points(&self) -> &[DivisorPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points with every sign reversed (edge points stay at +1).
    pub fn flipped(&self, set: &FiniteGapSet) -> Self {
        let pts: Vec<(f64, i8)> = self.points.iter().map(|p| (p.lambda, -p.eps)).collect();
        Divisor::new(set, &pts).expect("flip of a valid divisor")
    }

    /// True if point k sits at an endpoint of its gap.
    pub fn at_edge(&self, set: &FiniteGapSet, k: usize) -> bool {
        let (a, b) = set.gap(k);
        let l = self.points[k].lambda;
        l == a || l == b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tooth {
    pub omega: f64,
    pub height: f64,
}

/// Slit positions and heights of a comb domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombData {
    teeth: Vec<Tooth>,
}

impl CombData {
    pub fn new(teeth: &[(f64, f64)]) -> Result<Self> {
        let mut prev = 0.0;
        for &(w, h) in teeth {
            if !(w > prev) || !w.is_finite() {
                return Err(Error::InvalidComb(format!(
                    "frequencies must be positive and strictly increasing (got {w} after {prev})"
                )));
            }
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidComb(format!("height {h} must be positive")));
            }
            prev = w;
        }
        Ok(CombData {
            teeth: teeth.iter().map(|&(omega, height)| Tooth { omega, height }).collect(),
        })
    }

    pub fn teeth(&self) -> &[Tooth] {
        &self.teeth
    }

    pub fn genus(&self) -> usize {
        self.teeth.len()
    }

    pub fn widom_sum(&self) -> f64 {
        self.teeth.iter().map(|t| t.height).sum()
    }
}

/// z = 1/(lambda - lambda_star) with lambda_star < -1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangeOfVariables {
    lambda_star: f64,
}

impl ChangeOfVariables {
    pub fn new(lambda_star: f64) -> Result<Self> {
        if !(lambda_star < -1.0) || !lambda_star.is_finite() {
            return Err(Error::InvalidLambdaStar(lambda_star));
        }
        Ok(ChangeOfVariables { lambda_star })
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    pub fn to_z(&self, lambda: C64) -> Result<C64> {
        let d = lambda - self.lambda_star;
        if d.norm() == 0.0 {
            return Err(Error::PoleAtLambdaStar);
        }
        Ok(d.inv())
    }

    pub fn from_z(&self, z: C64) -> Result<C64> {
        if z.norm() == 0.0 {
            return Err(Error::PoleAtZero);
        }
        Ok(z.inv() + self.lambda_star)
    }

    pub fn to_z_real(&self, lambda: f64) -> f64 {
        if lambda.is_infinite() {
            0.0
        } else {
            1.0 / (lambda - self.lambda_star)
        }
    }

    pub fn from_z_real(&self, z: f64) -> f64 {
        1.0 / z + self.lambda_star
    }

    /// Image of E. Gap k keeps its index, so z-gaps come out in decreasing
    /// order of z; `z_k- = 1/(b_k - s)`, `z_k+ = 1/(a_k - s)`.
    pub fn map_set(&self, set: &FiniteGapSet) -> ZSet {
        ZSet {
            lo: 0.0,
            hi: self.to_z_real(-1.0),
            gaps: set
                .gaps()
                .iter()
                .map(|&(a, b)| (self.to_z_real(b), self.to_z_real(a)))
                .collect(),
        }
    }

    /// Coordinate image (x_k, eps_k) of a divisor, x_k = 1/(lambda_k - s).
    pub fn map_divisor(&self, div: &Divisor) -> ZDivisor {
        ZDivisor {
            points: div
                .points()
                .iter()
                .map(|p| ZPoint { x: self.to_z_real(p.lambda), eps: p.eps })
                .collect(),
        }
    }
}

/// Bounded image set [lo, hi] minus gaps, gap k being the image of lambda-gap k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZSet {
    pub lo: f64,
    pub hi: f64,
    pub gaps: Vec<(f64, f64)>,
}

impl ZSet {
    pub fn genus(&self) -> usize {
        self.gaps.len()
    }

    /// Gaps in increasing order of z.
    pub fn sorted_gaps(&self) -> Vec<(f64, f64)> {
        let mut g = self.gaps.clone();
        g.sort_by(|x, y| x.0.total_cmp(&y.0));
        g
    }

    /// Bands in increasing order of z.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut left = self.lo;
        for (a, b) in self.sorted_gaps() {
            out.push((left, a));
            left = b;
        }
        out.push((left, self.hi));
        out
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi && !self.gaps.iter().any(|&(a, b)| x > a && x < b)
    }

    pub fn diameter(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZPoint {
    pub x: f64,
    pub eps: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZDivisor {
    pub points: Vec<ZPoint>,
}

/// Two-sided Jacobi coefficients on an index window.
///
/// `b(n)` is the diagonal at site n, `a(n)` couples sites n-1 and n, so
/// `a(0)` is the connecting term between the negative and positive halves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiOperator {
    lo: i64,
    b: Vec<f64>,
    a: Vec<f64>,
}

impl JacobiOperator {
    /// `b` lives on sites lo..lo+b.len(); `a[i]` couples sites lo+i and lo+i+1.
    pub fn new(lo: i64, b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if b.is_empty() || a.len() + 1 != b.len() {
            return Err(Error::WindowMismatch(format!(
                "{} diagonal and {} off-diagonal entries",
                b.len(),
                a.len()
            )));
        }
        if let Some(i) = a.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::InvariantViolation(format!(
                "off-diagonal entry a({}) = {} is not positive",
                lo + i as i64 + 1,
                a[i]
            )));
        }
        Ok(JacobiOperator { lo, b, a })
    }

    /// Constant coefficients a, b on sites lo..=hi.
    pub fn constant(lo: i64, hi: i64, a: f64, b: f64) -> Self {
        let n = (hi - lo + 1) as usize;
        JacobiOperator { lo, b: vec![b; n], a: vec![a; n - 1] }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.b.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn b(&self, n: i64) -> f64 {
        self.b[(n - self.lo) as usize]
    }

    /// Coupling between n-1 and n.
    pub fn a(&self, n: i64) -> f64 {
        self.a[(n - self.lo - 1) as usize]
    }

    pub fn diag(&self) -> &[f64] {
        &self.b
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.a
    }

    /// Sub-window lo..=hi.
    pub fn window(&self, lo: i64, hi: i64) -> Result<JacobiOperator> {
        if lo < self.lo || hi > self.hi() || lo > hi {
            return Err(Error::WindowMismatch(format!(
                "[{lo}, {hi}] not inside [{}, {}]",
                self.lo,
                self.hi()
            )));
        }
        let i0 = (lo - self.lo) as usize;
        let i1 = (hi - self.lo) as usize;
        Ok(JacobiOperator {
            lo,
            b: self.b[i0..=i1].to_vec(),
            a: self.a[i0..i1].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;
    use proptest::prelude::*;

    #[test]
    fn validate_examples() {
        assert_eq!(FiniteGapSet::new(&[]).unwrap().genus(), 0);
        assert_eq!(FiniteGapSet::new(&[(-0.5, -0.25)]).unwrap().genus(), 1);
        assert!(matches!(FiniteGapSet::new(&[(-0.25, -0.5)]), Err(Error::GapOrdering(_))));
        assert!(matches!(FiniteGapSet::new(&[(-1.0, -0.5)]), Err(Error::GapOutOfRange(_))));
        assert!(matches!(
            FiniteGapSet::new(&[(-0.5, -0.2), (-0.3, 0.0)]),
            Err(Error::GapOrdering(_))
        ));
        let s = FiniteGapSet::new(&[(0.5, 1.0), (-0.5, -0.25)]).unwrap();
        assert_eq!(s.gap(0), (-0.5, -0.25));
    }

    #[test]
    fn change_of_variables_examples() {
        let cov = ChangeOfVariables::new(-2.0).unwrap();
        assert_eq!(cov.to_z(c(-1.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(cov.to_z_real(f64::INFINITY), 0.0);
        let z = cov.to_z(c(-2.0, 1.0)).unwrap();
        assert!((z - c(0.0, -1.0)).norm() < 1e-16);
        assert_eq!(cov.to_z(c(-2.0, 0.0)), Err(Error::PoleAtLambdaStar));
        assert_eq!(cov.from_z(c(0.0, 0.0)), Err(Error::PoleAtZero));
        assert!(matches!(ChangeOfVariables::new(-0.5), Err(Error::InvalidLambdaStar(_))));
        assert!(matches!(ChangeOfVariables::new(-1.0), Err(Error::InvalidLambdaStar(_))));
    }

    #[test]
    fn map_set_examples() {
        let cov = ChangeOfVariables::new(-2.0).unwrap();
        let z0 = cov.map_set(&FiniteGapSet::empty());
        assert_eq!((z0.lo, z0.hi), (0.0, 1.0));
        let set = FiniteGapSet::new(&[(-0.5, -0.25)]).unwrap();
        let zs = cov.map_set(&set);
        assert!((zs.gaps[0].0 - 1.0 / 1.75).abs() < 1e-15);
        assert!((zs.gaps[0].1 - 1.0 / 1.5).abs() < 1e-15);
        let div = Divisor::new(&set, &[(-0.4, 1)]).unwrap();
        let zd = cov.map_divisor(&div);
        assert!((zd.points[0].x - 0.625).abs() < 1e-15);
        assert_eq!(zd.points[0].eps, 1);
    }

    #[test]
    fn map_set_reverses_gap_order() {
        let cov = ChangeOfVariables::new(-3.0).unwrap();
        let set = FiniteGapSet::new(&[(-0.7, -0.5), (-0.3, -0.1), (0.4, 2.0)]).unwrap();
        let zs = cov.map_set(&set);
        assert_eq!(zs.genus(), 3);
        for w in zs.gaps.windows(2) {
            assert!(w[0].0 > w[1].1);
        }
        let bands = zs.bands();
        assert_eq!(bands.len(), 4);
        assert_eq!(bands[0].0, 0.0);
    }

    #[test]
    fn edge_divisor_is_canonical() {
        let set = FiniteGapSet::new(&[(-0.5, -0.25)]).unwrap();
        let d = Divisor::new(&set, &[(-0.25, -1)]).unwrap();
        assert_eq!(d.points()[0].eps, 1);
        assert!(Divisor::new(&set, &[(-0.6, 1)]).is_err());
        assert!(Divisor::new(&set, &[(-0.4, 0)]).is_err());
    }

    #[test]
    fn jacobi_window_indexing() {
        let j = JacobiOperator::new(-2, vec![1.0, 2.0, 3.0, 4.0], vec![0.1, 0.2, 0.3]).unwrap();
        assert_eq!(j.hi(), 1);
        assert_eq!(j.b(0), 3.0);
        assert_eq!(j.a(0), 0.2);
        let w = j.window(-1, 1).unwrap();
        assert_eq!(w.a(0), 0.2);
        assert_eq!(w.len(), 3);
        assert!(JacobiOperator::new(0, vec![1.0], vec![0.5]).is_err());
    }

    proptest! {
        #[test]
        fn z_round_trip(s in -10.0f64..-1.001, x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let cov = ChangeOfVariables::new(s).unwrap();
            let l = c(x, y);
            prop_assume!((l - s).norm() > 1e-3);
            let back = cov.from_z(cov.to_z(l).unwrap()).unwrap();
            prop_assert!((back - l).norm() <= 1e-12 * l.norm().max(1.0));
        }

        #[test]
        fn upper_half_plane_maps_to_lower(s in -10.0f64..-1.001, x in -50.0f64..50.0, y in 1e-6f64..50.0) {
            let cov = ChangeOfVariables::new(s).unwrap();
            prop_assert!(cov.to_z(c(x, y)).unwrap().im < 0.0);
        }
    }
}
