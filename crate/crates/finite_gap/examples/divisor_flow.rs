//! Translation flow of the divisor: potential samples, edge events,
//! Abel-phase frequencies and the period of a one-gap potential.

use finite_gap::comb_map::comb_data;
use finite_gap::domain::{Divisor, FiniteGapSet};
use finite_gap::translation_flow::{almost_periodicity_scan, dubrovin_flow, frequency_check, return_time, sample_potential, FlowState};

fn main() -> finite_gap::error::Result<()> {
    let set = FiniteGapSet::new(&[(-0.5, -0.25)])?;
    let st = FlowState::new(&set, &Divisor::new(&set, &[(-0.4, 1)])?);
    let xs: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
    for (x, q) in xs.iter().zip(sample_potential(&set, &st, &xs)?) {
        println!("q({x:.1}) = {q:.12}");
    }
    let run = dubrovin_flow(&set, &st, 6.0)?;
    for e in &run.events {
        println!("edge event at ℓ = {:.9}: gap {} {:?}", e.ell, e.gap, e.edge);
    }

    let p = return_time(&set, &st, 0)?;
    let w = comb_data(&set)?.teeth()[0].omega;
    println!("period P = {p:.12}, ω·P = {:.12} (π = {:.12})", w * p, std::f64::consts::PI);
    let prof = almost_periodicity_scan(&set, &st, &[0.5 * p, p], (0.0, 4.0), 80)?;
    println!("sup |q(x − P/2) − q(x)| = {:e}, sup |q(x − P) − q(x)| = {:e}", prof.d[0], prof.d[1]);

    let two = FiniteGapSet::new(&[(-0.7, -0.5), (-0.3, -0.1)])?;
    let st2 = FlowState::new(&two, &Divisor::new(&two, &[(-0.6, -1), (-0.2, 1)])?);
    let grid: Vec<f64> = (0..=150).map(|i| 0.2 * i as f64).collect();
    for f in frequency_check(&two, &st2, &grid)? {
        println!("gap {}: slope {:.10}, −2ω = {:.10}, residual {:e}", f.gap, f.slope, f.expected, f.residual);
    }
    Ok(())
}
