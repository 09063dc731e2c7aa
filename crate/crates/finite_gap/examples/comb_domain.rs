//! Comb map of a two-gap set: critical points, slit data, the inverse
//! problem and the Widom sum of a growing family.

use finite_gap::comb_map::{comb_data, set_from_comb, widom_diagnostic, MartinMap};
use finite_gap::cx::C64;
use finite_gap::domain::{ChangeOfVariables, FiniteGapSet};

fn main() -> finite_gap::error::Result<()> {
    let set = FiniteGapSet::new(&[(-0.7, -0.5), (-0.3, -0.1)])?;
    let map = MartinMap::new(&set)?;
    println!("critical points {:?}", map.critical_points());
    println!("gap residuals   {:?}", map.gap_residuals()?);
    for l in [C64::new(-1.0, 0.0), C64::new(-0.6, 0.0), C64::new(2.0, 1.0)] {
        println!("Θ({l}) = {}", map.theta(l)?);
    }

    let comb = comb_data(&set)?;
    for (k, t) in comb.teeth().iter().enumerate() {
        println!("tooth {k}: ω = {:.15}  h = {:.15}", t.omega, t.height);
    }
    let back = set_from_comb(&comb)?;
    println!("recovered gaps {:?}", back.gaps());

    // gaps (−1/2 − 4^{-k}, −1/2 − 4^{-k} + 8^{-k}) accumulating at −1/2
    let family = |g: usize| -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = (1..=g)
            .map(|k| {
                let a = -0.5 - 0.25f64.powi(k as i32);
                (a, a + 0.125f64.powi(k as i32))
            })
            .collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        v
    };
    let report = widom_diagnostic(family, &[1, 2, 3, 4], &ChangeOfVariables::new(-2.0)?)?;
    for lvl in &report.levels {
        println!("g = {}  Widom partial sum {:.12e}", lvl.genus, lvl.sum);
    }
    Ok(())
}
