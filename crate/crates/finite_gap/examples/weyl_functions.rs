//! Reflectionless Weyl pair of a one-gap set: values in the upper half
//! plane, boundary values on the bands, and a mismatched pair as control.

use finite_gap::cx::C64;
use finite_gap::domain::{Divisor, FiniteGapSet};
use finite_gap::weyl_m::{band_grid, reflectionless_defect, reflectionless_defect_between, Side, WeylPair};

fn main() -> finite_gap::error::Result<()> {
    let set = FiniteGapSet::new(&[(-0.5, -0.25)])?;
    let pair = WeylPair::new(&set, &Divisor::new(&set, &[(-0.4, 1)])?)?;
    println!("ρ = {:?}, q(0) = {}", pair.rho(), pair.trace_q0());
    for l in [C64::new(-0.8, 0.5), C64::new(0.5, 0.5), C64::new(-1.5, 0.3)] {
        println!("λ = {l}: m+ = {:.12}, m- = {:.12}", pair.m(Side::Plus, l)?, pair.m(Side::Minus, l)?);
    }

    let grid = band_grid(&set, 50, 3.0);
    println!("defect |m+ + conj m-| on 50 band points: {:e}", reflectionless_defect(&pair, &grid).max);

    let other = WeylPair::new(&set, &Divisor::new(&set, &[(-0.3, -1)])?)?;
    println!("mismatched divisors: {:e}", reflectionless_defect_between(&pair, &other, &grid).max);
    Ok(())
}
