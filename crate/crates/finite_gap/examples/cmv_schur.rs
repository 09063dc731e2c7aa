//! Unit-circle side: Schur functions of a constant Verblunsky sequence, the
//! reflectionless defect on its arc, and the periodic comb map Θ₂.

use finite_gap::cmv::{
    cmv_reflectionless_defect, constant_schur_limit, default_test_points, one_tooth_relation, truncation_rate,
    PeriodicComb, PeriodicCombMap, RadialSchedule, Side, VerblunskySeq,
};
use finite_gap::cx::C64;

fn main() -> finite_gap::error::Result<()> {
    let c = C64::new(0.1, 0.0);
    let phi = C64::new(0.6, 0.0);
    let seq = VerblunskySeq::constant(200, c)?;
    let s = constant_schur_limit(c, phi);
    let rate = truncation_rate(&seq, Side::Plus, phi, s, &[4, 8, 12, 16, 20])?;
    println!("s+(0.6) = {s}, truncation rate {rate:.6} (|φ| = 0.6)");

    let arc_seq = VerblunskySeq::constant(6000, C64::new(0.3, 0.4))?;
    let angles: Vec<f64> = (0..8).map(|k| 1.3 + 0.2 * k as f64).collect();
    let rep = cmv_reflectionless_defect(&arc_seq, &angles, RadialSchedule { depth: 6000, ..Default::default() })?;
    println!("defect on the arc {:e} ({} flagged)", rep.max_defect, rep.flagged);

    let (w, h) = (1.3, 0.7);
    let map = PeriodicCombMap::new(&PeriodicComb::new(&[(w, h)])?)?;
    println!("gap {:?}, critical point {:?}", map.gaps(), map.critical_points());
    for p in default_test_points().into_iter().take(3) {
        let t = map.theta2(p)?;
        println!("Θ₂({p}) = {t}; cos(Θ₂ − ω) − closed form = {:e}", ((t - w).cos() - one_tooth_relation(w, h, p)).norm());
    }
    println!("periodicity defect {:e}", map.periodicity_check(&default_test_points())?);

    let two = PeriodicCombMap::new(&PeriodicComb::new(&[(0.8, 0.5), (3.5, 1.2)])?)?;
    println!("two teeth: gaps {:?}", two.gaps());
    println!("boundary |Im Θ₂| {:e}", two.boundary_defect(8, 1e-3)?);
    Ok(())
}
