//! Thin wrapper over the order-8 Dormand-Prince integrator of `ode_solvers`.

use crate::error::{Error, Result};
use ode_solvers::dop853::Dop853;
use ode_solvers::{DVector, OutputType, System};

pub type State = DVector<f64>;

struct FnSystem<F>(F);

impl<F> System<f64, State> for FnSystem<F>
where
    F: Fn(f64, &State, &mut State),
{
    fn system(&self, x: f64, y: &State, dy: &mut State) {
        (self.0)(x, y, dy)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-12, atol: 1e-14 }
    }
}

fn build<F>(f: F, x0: f64, x1: f64, y0: State, tol: Tolerance) -> Dop853<f64, State, FnSystem<F>>
where
    F: Fn(f64, &State, &mut State),
{
    Dop853::from_param(
        FnSystem(f),
        x0,
        x1,
        (x1 - x0).abs(),
        y0,
        tol.rtol,
        tol.atol,
        0.9,
        0.0,
        0.333,
        6.0,
        (x1 - x0).abs(),
        0.0,
        2_000_000,
        u32::MAX,
        OutputType::Sparse,
    )
}

/// Integrates from x0 to x1 (either direction) and returns y(x1).
pub fn solve<F>(f: F, x0: f64, x1: f64, y0: State, tol: Tolerance) -> Result<State>
where
    F: Fn(f64, &State, &mut State),
{
    if x0 == x1 {
        return Ok(y0);
    }
    let n = y0.len();
    let dir = if x1 > x0 { 1.0 } else { -1.0 };
    // x is carried as an extra component; the library's stage abscissae are
    // unreliable for non-autonomous systems
    let g = move |_s: f64, y: &State, dy: &mut State| {
        let x = y[n];
        let head = State::from_iterator(n, y.iter().take(n).cloned());
        let mut d = State::zeros(n);
        f(x, &head, &mut d);
        for i in 0..n {
            dy[i] = dir * d[i];
        }
        dy[n] = dir;
    };
    let mut aug = State::zeros(n + 1);
    aug.rows_mut(0, n).copy_from(&y0);
    aug[n] = x0;
    let mut s = build(g, 0.0, (x1 - x0).abs(), aug, tol);
    s.integrate()
        .map_err(|e| Error::StepFailure(e.to_string()))?;
    let y = s.y_out().last().cloned().ok_or_else(|| Error::StepFailure("empty output".into()))?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::StepFailure(format!("non-finite state reached near x = {x1}")));
    }
    Ok(State::from_iterator(n, y.iter().take(n).cloned()))
}

/// Solution at each of the points `xs` (monotone, starting direction from x0).
pub fn solve_at<F>(f: F, x0: f64, y0: State, xs: &[f64], tol: Tolerance) -> Result<Vec<State>>
where
    F: Fn(f64, &State, &mut State) + Clone,
{
    let mut out = Vec::with_capacity(xs.len());
    let (mut x, mut y) = (x0, y0);
    for &xn in xs {
        y = solve(f.clone(), x, xn, y, tol)?;
        x = xn;
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_both_directions() {
        let f = |_x: f64, y: &State, dy: &mut State| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let y0 = State::from_vec(vec![1.0, 0.0]);
        let y = solve(f, 0.0, 10.0, y0.clone(), Tolerance::default()).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-11);
        let back = solve(f, 10.0, 0.0, y, Tolerance::default()).unwrap();
        assert!((back[0] - 1.0).abs() < 1e-10);
        let ys = solve_at(f, 0.0, y0, &[-1.0, -2.0], Tolerance::default()).unwrap();
        assert!((ys[1][0] - 2f64.cos()).abs() < 1e-11);
    }
}
