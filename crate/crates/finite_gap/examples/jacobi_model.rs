//! From a Schrödinger pair to its two-sided Jacobi model: coupling a₀,
//! reconstructed coefficients, R₀₀ three ways and the recovered divisor.

use finite_gap::cx::C64;
use finite_gap::domain::{ChangeOfVariables, Divisor, FiniteGapSet};
use finite_gap::jacobi_recon::{extract_divisor, r00_product, reconstruct_operator};
use finite_gap::oracle::two_sided_section_r00;
use finite_gap::schrodinger_jacobi::TransformContext;
use finite_gap::weyl_m::WeylPair;

fn main() -> finite_gap::error::Result<()> {
    let free = FiniteGapSet::empty();
    for s in [-2.0, -5.0] {
        let ctx = TransformContext::new(ChangeOfVariables::new(s)?, WeylPair::new(&free, &Divisor::left_edges(&free))?)?;
        let j = reconstruct_operator(&ctx, 10)?;
        println!("λ* = {s}: a0 = {}, b_0 = {}, a_5 = {}", ctx.coupling_a0(), j.b(0), j.a(5));
    }

    let set = FiniteGapSet::new(&[(-0.7, -0.5), (-0.3, -0.1)])?;
    let div = Divisor::new(&set, &[(-0.6, -1), (-0.2, 1)])?;
    let ctx = TransformContext::new(ChangeOfVariables::new(-2.5)?, WeylPair::new(&set, &div)?)?;
    println!("z-image {:?}", ctx.zset());
    let jdiv = ctx.jacobi_divisor()?;
    println!("Jacobi divisor {:?}", jdiv.points);
    println!("extracted      {:?}", extract_divisor(&ctx)?.points);

    let j = reconstruct_operator(&ctx, 60)?;
    for n in -3..=3 {
        println!("n = {n:>2}: a = {:.15}  b = {:.15}", j.a(n), j.b(n));
    }
    let z = C64::new(0.3, 0.4);
    println!("R00 matrix formula  {}", ctx.r00(z)?);
    println!("R00 product formula {}", r00_product(ctx.zset(), &jdiv, z)?);
    println!("R00 finite section  {}", two_sided_section_r00(&j, z)?.value);
    Ok(())
}
