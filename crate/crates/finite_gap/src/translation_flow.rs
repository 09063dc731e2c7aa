//! Translation flow of the divisor, potential sampling by the trace formula,
//! Abel phases and the frequency law.
//!
//! Each divisor point moves in the angle chart λ = c + d cos θ over its gap
//! (c the midpoint, d the half-width) with ε = sign(sin θ). The angle obeys
//! θ′ = 2H(λ) with H > 0, so edge reflections are regular points of the chart.
//! The divisor at position ℓ belongs to the shifted potential q(· − ℓ).

use crate::comb_map::{AbelianBasis, MartinMap};
use crate::cx::{C64, I};
use crate::domain::{Divisor, FiniteGapSet};
use crate::error::{Error, Result};
use crate::ode::{self, State, Tolerance};
use crate::quad::{edge_segment_partial, edge_theta, DEFAULT_TOL};
use serde::Serialize;
use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;
const FLOW_TOL: Tolerance = Tolerance { rtol: 1e-12, atol: 1e-13 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Edge {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeEvent {
    pub ell: f64,
    pub gap: usize,
    pub edge: Edge,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowState {
    pub divisor: Divisor,
    pub position: f64,
    pub events: Vec<EdgeEvent>,
    /// chart angles in [0, 2π)
    pub theta: Vec<f64>,
}

fn chart(set: &FiniteGapSet, k: usize) -> (f64, f64) {
    let (a, b) = set.gap(k);
    (0.5 * (a + b), 0.5 * (b - a))
}

fn lambda_of(set: &FiniteGapSet, k: usize, th: f64) -> f64 {
    let (a, b) = set.gap(k);
    let (c, d) = chart(set, k);
    (c + d * th.cos()).clamp(a, b)
}

fn eps_of(th: f64) -> i8 {
    if th.sin() < 0.0 {
        -1
    } else {
        1
    }
}

fn divisor_of(set: &FiniteGapSet, theta: &[f64]) -> Result<Divisor> {
    let pts: Vec<(f64, i8)> = theta
        .iter()
        .enumerate()
        .map(|(k, &t)| (lambda_of(set, k, t), eps_of(t)))
        .collect();
    Divisor::new(set, &pts)
}

fn angles_of(set: &FiniteGapSet, div: &Divisor) -> Vec<f64> {
    div.points()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let (c, d) = chart(set, k);
            let t = ((p.lambda - c) / d).clamp(-1.0, 1.0).acos();
            if p.eps < 0 {
                (TWO_PI - t).rem_euclid(TWO_PI)
            } else {
                t
            }
        })
        .collect()
}

/// Angular speeds 2H_j.
fn speeds(set: &FiniteGapSet, theta: &[f64], out: &mut [f64]) {
    let g = theta.len();
    let lam: Vec<f64> = (0..g).map(|k| lambda_of(set, k, theta[k])).collect();
    for j in 0..g {
        let mut h = (1.0 + lam[j]).sqrt();
        for k in 0..g {
            if k != j {
                let (a, b) = set.gap(k);
                h *= ((lam[j] - a) * (lam[j] - b)).sqrt() / (lam[j] - lam[k]).abs();
            }
        }
        out[j] = 2.0 * h;
    }
}

fn integrate_angles(set: &FiniteGapSet, theta: &[f64], dl: f64) -> Result<Vec<f64>> {
    if dl == 0.0 {
        return Ok(theta.to_vec());
    }
    let f = |_x: f64, y: &State, dy: &mut State| {
        let mut s = vec![0.0; y.len()];
        speeds(set, y.as_slice(), &mut s);
        for (d, v) in dy.iter_mut().zip(s) {
            *d = v;
        }
    };
    let y = ode::solve(f, 0.0, dl, State::from_column_slice(theta), FLOW_TOL)?;
    Ok(y.iter().cloned().collect())
}

impl FlowState {
    pub fn new(set: &FiniteGapSet, divisor: &Divisor) -> Self {
        FlowState { divisor: divisor.clone(), position: 0.0, events: Vec::new(), theta: angles_of(set, divisor) }
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.divisor.points().iter().map(|p| p.lambda).collect()
    }

    /// q at x = −position, by the trace formula.
    pub fn potential(&self, set: &FiniteGapSet) -> f64 {
        trace_potential(set, &self.divisor)
    }
}

/// −1 + Σ (λ_k⁻ + λ_k⁺ − 2λ_k).
pub fn trace_potential(set: &FiniteGapSet, div: &Divisor) -> f64 {
    -1.0 + set
        .gaps()
        .iter()
        .zip(div.points())
        .map(|(&(a, b), p)| a + b - 2.0 * p.lambda)
        .sum::<f64>()
}

const MAX_CHUNK: f64 = 0.05;

/// Flows the state by Δℓ (either sign), logging edge hits in order.
pub fn dubrovin_flow(set: &FiniteGapSet, state: &FlowState, dl: f64) -> Result<FlowState> {
    if !dl.is_finite() {
        return Err(Error::StepFailure(format!("non-finite flow increment {dl}")));
    }
    let g = set.genus();
    let mut out = state.clone();
    out.position += dl;
    if g == 0 || dl == 0.0 {
        return Ok(out);
    }
    let n = (dl.abs() / MAX_CHUNK).ceil().max(1.0) as usize;
    let h = dl / n as f64;
    let mut th = state.theta.clone();
    let mut pos = state.position;
    for _ in 0..n {
        let next = integrate_angles(set, &th, h)?;
        for k in 0..g {
            let (m0, m1) = ((th[k] / PI).floor(), (next[k] / PI).floor());
            if m0 == m1 {
                continue;
            }
            if (m1 - m0).abs() > 1.0 {
                return Err(Error::StepFailure(format!("gap {k}: several edge hits in one step")));
            }
            let target = m0.max(m1) * PI;
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let t = integrate_angles(set, &th, mid)?[k];
                if (t - target) * (th[k] - target) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let edge = if (target / PI).rem_euclid(2.0) < 0.5 { Edge::Upper } else { Edge::Lower };
            out.events.push(EdgeEvent { ell: pos + 0.5 * (lo + hi), gap: k, edge });
        }
        th = next.iter().map(|t| t.rem_euclid(TWO_PI)).collect();
        pos += h;
    }
    out.events[state.events.len()..].sort_by(|a, b| {
        if dl > 0.0 {
            a.ell.total_cmp(&b.ell)
        } else {
            b.ell.total_cmp(&a.ell)
        }
    });
    out.divisor = divisor_of(set, &th)?;
    out.theta = th;
    Ok(out)
}

const PANEL_NODES: usize = 21;
const PANEL_LEN: f64 = 0.25;

#[derive(Debug, Clone)]
struct Panel {
    x0: f64,
    x1: f64,
    values: Vec<f64>,
}

fn lobatto(n: usize) -> Vec<f64> {
    // ascending on [-1, 1]
    (0..n).map(|j| -(PI * j as f64 / (n - 1) as f64).cos()).collect()
}

impl Panel {
    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (2.0 * x - self.x0 - self.x1) / (self.x1 - self.x0);
        static NODES: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
        let nodes = NODES.get_or_init(|| lobatto(PANEL_NODES));
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..n {
            let d = t - nodes[j];
            if d == 0.0 {
                return self.values[j];
            }
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 } * if j % 2 == 0 { 1.0 } else { -1.0 };
            num += w * self.values[j] / d;
            den += w / d;
        }
        num / den
    }
}

/// q(x) on [x_min, x_max] by piecewise Chebyshev interpolation of the flow.
#[derive(Debug, Clone)]
pub struct PotentialSampler {
    panels: Vec<Panel>,
    constant: Option<f64>,
    pub x_min: f64,
    pub x_max: f64,
}

impl PotentialSampler {
    pub fn new(set: &FiniteGapSet, state0: &FlowState, x_min: f64, x_max: f64) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(Error::InvariantViolation(format!("empty sampling window [{x_min}, {x_max}]")));
        }
        if set.genus() == 0 {
            return Ok(PotentialSampler { panels: Vec::new(), constant: Some(-1.0), x_min, x_max });
        }
        // x = −ℓ relative to the state's own position
        let x_ref = -state0.position;
        let mut panels = Vec::new();
        let mut cursor_state = state0.clone();
        let mut cursor_x = x_ref;
        let move_to = |x: f64, st: &mut FlowState, cx: &mut f64| -> Result<f64> {
            let next = dubrovin_flow(set, st, -(x - *cx))?;
            *st = FlowState { events: Vec::new(), ..next };
            *cx = x;
            Ok(trace_potential(set, &st.divisor))
        };
        // rightward from the reference point, then leftward
        let mut edges = Vec::new();
        let start = x_ref.clamp(x_min, x_max);
        let mut x = start;
        while x < x_max {
            let x1 = (x + PANEL_LEN).min(x_max);
            edges.push((x, x1));
            x = x1;
        }
        let mut x = start;
        let mut left = Vec::new();
        while x > x_min {
            let x0 = (x - PANEL_LEN).max(x_min);
            left.push((x0, x));
            x = x0;
        }
        let build = |(x0, x1): (f64, f64), reverse: bool, st: &mut FlowState, cx: &mut f64| -> Result<Vec<Panel>> {
            let mut stack = vec![(x0, x1, 0usize)];
            let mut out = Vec::new();
            while let Some((a, b, depth)) = stack.pop() {
                let nodes = lobatto(PANEL_NODES);
                let mut order: Vec<usize> = (0..PANEL_NODES).collect();
                if reverse {
                    order.reverse();
                }
                let mut values = vec![0.0; PANEL_NODES];
                for &j in &order {
                    let xj = 0.5 * (a + b) + 0.5 * (b - a) * nodes[j];
                    values[j] = move_to(xj, st, cx)?;
                }
                let panel = Panel { x0: a, x1: b, values };
                // check at an off-node point
                let xc = a + 0.37 * (b - a);
                let mut probe = st.clone();
                let mut px = *cx;
                let direct = move_to(xc, &mut probe, &mut px)?;
                if (panel.eval(xc) - direct).abs() > 1e-11 && depth < 6 {
                    let m = 0.5 * (a + b);
                    if reverse {
                        stack.push((a, m, depth + 1));
                        stack.push((m, b, depth + 1));
                    } else {
                        stack.push((m, b, depth + 1));
                        stack.push((a, m, depth + 1));
                    }
                    continue;
                }
                out.push(panel);
            }
            Ok(out)
        };
        for e in edges {
            panels.extend(build(e, false, &mut cursor_state, &mut cursor_x)?);
        }
        let mut st = state0.clone();
        let mut cx = x_ref;
        for e in left {
            panels.extend(build(e, true, &mut st, &mut cx)?);
        }
        panels.sort_by(|a, b| a.x0.total_cmp(&b.x0));
        Ok(PotentialSampler { panels, constant: None, x_min, x_max })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        let x = x.clamp(self.x_min, self.x_max);
        let i = self.panels.partition_point(|p| p.x1 < x).min(self.panels.len() - 1);
        self.panels[i].eval(x)
    }
}

/// q at each grid point (grid sorted ascending).
pub fn sample_potential(set: &FiniteGapSet, state0: &FlowState, xs: &[f64]) -> Result<Vec<f64>> {
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvariantViolation("sampling grid must be sorted".into()));
    }
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let lo = xs[0];
    let hi = xs[xs.len() - 1];
    if lo == hi {
        let st = dubrovin_flow(set, state0, -(lo + state0.position))?;
        return Ok(vec![trace_potential(set, &st.divisor); xs.len()]);
    }
    let s = PotentialSampler::new(set, state0, lo, hi)?;
    Ok(xs.iter().map(|&x| s.eval(x)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct AbelPhases {
    pub phi: Vec<f64>,
}

fn branch_sign(g: usize, j: usize) -> f64 {
    if (g - 1 - j) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// ½ Σ_j ε_j ∫_{λ_j⁻}^{λ_j} η_k without reduction mod 1. On gap j, η_k is
/// taken with the sign of the real branch of √R there.
pub fn raw_abel_phases(set: &FiniteGapSet, basis: &AbelianBasis, div: &Divisor) -> Result<Vec<f64>> {
    let g = set.genus();
    if g == 0 {
        return Ok(Vec::new());
    }
    let mut phi = vec![0.0; g];
    for (j, p) in div.points().iter().enumerate() {
        let (a, b) = set.gap(j);
        if p.lambda == a {
            continue;
        }
        let th = edge_theta(a, b, p.lambda);
        let sj = branch_sign(g, j);
        for k in 0..g {
            let sk = branch_sign(g, k);
            let v: f64 = edge_segment_partial(a, b, 0.0, th, DEFAULT_TOL, |t, dp, dq| {
                let mut r = (1.0 + t) * dp * dq;
                for (m, &(am, bm)) in set.gaps().iter().enumerate() {
                    if m != j {
                        r *= (t - am) * (t - bm);
                    }
                }
                basis.eval_q(k, t) / r.sqrt()
            })?;
            phi[k] += 0.5 * f64::from(p.eps) * sj * sk * v;
        }
    }
    Ok(phi)
}

pub fn abel_phases(set: &FiniteGapSet, basis: &AbelianBasis, div: &Divisor) -> Result<AbelPhases> {
    let raw = raw_abel_phases(set, basis, div)?;
    Ok(AbelPhases { phi: raw.iter().map(|v| v.rem_euclid(1.0)).collect() })
}

/// Unwraps a sequence of values defined mod 1.
pub fn unwrap_mod1(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut shift = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if i > 0 {
            let d = x + shift - out[i - 1];
            shift -= (d as f64).round();
        }
        out.push(x + shift);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct FrequencyFit {
    pub gap: usize,
    /// slope of the unwrapped 2πφ_k(ℓ)
    pub slope: f64,
    pub expected: f64,
    pub rel_error: f64,
    /// max deviation of 2πφ_k from the fitted line
    pub residual: f64,
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - icpt - slope * a).abs())
        .fold(0.0, f64::max);
    (slope, icpt, res)
}

/// Phases along the ℓ grid (unwrapped, per gap).
pub fn phase_trajectory(set: &FiniteGapSet, basis: &AbelianBasis, state0: &FlowState, grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    let g = set.genus();
    let mut st = state0.clone();
    let mut per_gap: Vec<Vec<f64>> = vec![Vec::with_capacity(grid.len()); g];
    for &l in grid {
        let step = l - st.position;
        // keep steps short enough for unwrapping
        let n = (step.abs() / 0.2).ceil().max(1.0) as usize;
        for _ in 0..n {
            st = dubrovin_flow(set, &st, step / n as f64)?;
            st.events.clear();
        }
        let ph = abel_phases(set, basis, &st.divisor)?;
        for k in 0..g {
            per_gap[k].push(ph.phi[k]);
        }
    }
    Ok(per_gap.iter().map(|v| unwrap_mod1(v)).collect())
}

/// Line fit of 2πφ_k(ℓ) against the expected rate −2ω_k.
pub fn frequency_check(set: &FiniteGapSet, state0: &FlowState, grid: &[f64]) -> Result<Vec<FrequencyFit>> {
    let g = set.genus();
    if g == 0 || grid.len() < 2 {
        return Ok(Vec::new());
    }
    let basis = crate::comb_map::abelian_basis(set)?;
    let comb = crate::comb_map::comb_data(set)?;
    let traj = phase_trajectory(set, &basis, state0, grid)?;
    let mut out = Vec::with_capacity(g);
    for k in 0..g {
        let y: Vec<f64> = traj[k].iter().map(|v| TWO_PI * v).collect();
        let (slope, _, residual) = line_fit(grid, &y);
        let expected = -2.0 * comb.teeth()[k].omega;
        out.push(FrequencyFit { gap: k, slope, expected, rel_error: (slope - expected).abs() / expected.abs(), residual });
    }
    Ok(out)
}

/// Position increment after which chart angle k has advanced by exactly 2π.
/// For one gap this is the period of the flow.
pub fn return_time(set: &FiniteGapSet, state0: &FlowState, k: usize) -> Result<f64> {
    if k >= set.genus() {
        return Err(Error::InvariantViolation(format!("no gap {k}")));
    }
    let th0 = state0.theta[k];
    let target = th0 + TWO_PI;
    // march in unwrapped angles, then bisect the last step
    let step = 0.05;
    let mut th = state0.theta.clone();
    let mut l = 0.0;
    loop {
        let next = integrate_angles(set, &th, step)?;
        if next[k] >= target {
            break;
        }
        th = next;
        l += step;
        if l > 1e4 {
            return Err(Error::StepFailure("no return within ℓ = 1e4".into()));
        }
    }
    let (mut lo, mut hi) = (0.0, step);
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        if integrate_angles(set, &th, mid)?[k] < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(l + 0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceProfile {
    pub shifts: Vec<f64>,
    pub d: Vec<f64>,
    /// local minima (shift, d)
    pub minima: Vec<(f64, f64)>,
    /// smallest d among positive shifts beyond the first local maximum
    pub best: Option<(f64, f64)>,
}

/// d(ℓ) = sup over the window of |q(x − ℓ) − q(x)|.
pub fn almost_periodicity_scan(
    set: &FiniteGapSet,
    state0: &FlowState,
    shifts: &[f64],
    window: (f64, f64),
    points: usize,
) -> Result<RecurrenceProfile> {
    let xs: Vec<f64> = (0..points)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (points.max(2) - 1) as f64)
        .collect();
    let smax = shifts.iter().cloned().fold(0.0f64, f64::max);
    let smin = shifts.iter().cloned().fold(0.0f64, f64::min);
    let sampler = PotentialSampler::new(set, state0, window.0 - smax, window.1 - smin)?;
    let base: Vec<f64> = xs.iter().map(|&x| sampler.eval(x)).collect();
    let d: Vec<f64> = shifts
        .iter()
        .map(|&s| {
            xs.iter()
                .zip(&base)
                .map(|(&x, &b)| (sampler.eval(x - s) - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let mut minima = Vec::new();
    for i in 1..d.len().saturating_sub(1) {
        if d[i] <= d[i - 1] && d[i] <= d[i + 1] {
            minima.push((shifts[i], d[i]));
        }
    }
    let first_max = (1..d.len().saturating_sub(1)).find(|&i| d[i] >= d[i - 1] && d[i] >= d[i + 1] && shifts[i] > 0.0);
    let best = first_max.and_then(|m| {
        minima
            .iter()
            .filter(|p| p.0 > shifts[m])
            .cloned()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    });
    Ok(RecurrenceProfile { shifts: shifts.to_vec(), d, minima, best })
}

/// s_ℓ(λ) = exp(iℓΘ(λ)) for λ in the closed upper half plane.
pub fn translation_phase(map: &MartinMap, ell: f64, lambda: C64) -> Result<C64> {
    if ell == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok((I * ell * map.theta(lambda)?).exp())
}
