//! Independent ODE checks on a flow-sampled potential: Riccati m-function,
//! the energy-variation integral, and the transfer-matrix J-form.

use finite_gap::cx::C64;
use finite_gap::domain::{Divisor, FiniteGapSet};
use finite_gap::oracle::{energy_variation_check, integrate_schrodinger, j_monotonicity_check, riccati_m};
use finite_gap::translation_flow::{FlowState, PotentialSampler};
use finite_gap::weyl_m::{Side, WeylPair};

fn main() -> finite_gap::error::Result<()> {
    let set = FiniteGapSet::new(&[(-0.5, -0.25)])?;
    let div = Divisor::new(&set, &[(-0.4, 1)])?;
    let pair = WeylPair::new(&set, &div)?;
    let sampler = PotentialSampler::new(&set, &FlowState::new(&set, &div), -1.0, 40.0)?;
    let q = |x: f64| sampler.eval(x);

    for l in [C64::new(-0.8, 0.5), C64::new(-0.3, 0.4), C64::new(1.0, 1.0)] {
        let r = riccati_m(q, l, 30.0)?;
        println!("λ = {l}: Riccati {:.10} (±{:.1e}), closed form {:.10}", r.m, r.error, pair.m(Side::Plus, l)?);
    }

    let ev = energy_variation_check(q, C64::new(-0.6, 0.7), C64::new(0.4, 0.9), 30.0)?;
    println!("∫u₁u₂ = {:.12}, divided difference {:.12}", ev.integral, ev.reference);
    let conf = energy_variation_check(q, C64::new(0.2, 0.8), C64::new(0.2, 0.8), 30.0)?;
    println!("confluent: ∫u² = {:.12}, m′ = {:.12}", conf.integral, conf.reference);

    for l in [C64::new(-0.4, 0.0), C64::new(0.3, 0.4)] {
        let a = integrate_schrodinger(q, l, 2.5)?;
        let c = j_monotonicity_check(&a.m, l);
        println!("λ = {l}: det = {:.15}, ‖AJA* − J‖ = {:.3e}, eigenvalues {:?}", a.det(), c.norm, c.eigenvalues);
    }
    Ok(())
}
