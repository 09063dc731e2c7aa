//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use finite_gap::cmv::{
    cmv_reflectionless_defect, constant_schur_limit, default_test_points, truncation_rate, PeriodicComb,
    PeriodicCombMap, RadialSchedule, Side as CmvSide, VerblunskySeq,
};
use finite_gap::comb_map::{comb_data, set_from_comb};
use finite_gap::cx::C64;
use finite_gap::domain::{ChangeOfVariables, Divisor, FiniteGapSet};
use finite_gap::error::Result;
use finite_gap::jacobi_recon::{extract_divisor, r00_product, reconstruct_operator};
use finite_gap::oracle::{energy_variation_check, integrate_schrodinger, j_monotonicity_check, riccati_m, two_sided_section_r00};
use finite_gap::schrodinger_jacobi::TransformContext;
use finite_gap::translation_flow::{almost_periodicity_scan, frequency_check, return_time, FlowState, PotentialSampler};
use finite_gap::weyl_m::{band_grid, reflectionless_defect, reflectionless_defect_between, Side, WeylPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn ctx(set: &FiniteGapSet, div: &Divisor, s: f64) -> Result<TransformContext> {
    TransformContext::new(ChangeOfVariables::new(s)?, WeylPair::new(set, div)?)
}

fn one_gap() -> (FiniteGapSet, Divisor) {
    let set = FiniteGapSet::new(&[(-0.5, -0.25)]).unwrap();
    let d = Divisor::new(&set, &[(-0.4, 1)]).unwrap();
    (set, d)
}

fn two_gap() -> (FiniteGapSet, Divisor) {
    let set = FiniteGapSet::new(&[(-0.7, -0.5), (-0.3, -0.1)]).unwrap();
    let d = Divisor::new(&set, &[(-0.6, -1), (-0.2, 1)]).unwrap();
    (set, d)
}

fn z_band_grid(t: &TransformContext, n: usize) -> Vec<f64> {
    let bands = t.zset().bands();
    let per = n / bands.len();
    let mut out = Vec::new();
    for (i, (p, q)) in bands.iter().enumerate() {
        let m = if i + 1 == bands.len() { n - per * (bands.len() - 1) } else { per };
        for k in 0..m {
            out.push(p + (q - p) * (0.02 + 0.96 * (k as f64 + 0.5) / m as f64));
        }
    }
    out
}

fn criterion_1() -> Result<Outcome> {
    let free = FiniteGapSet::empty();
    let div = Divisor::left_edges(&free);
    let mut worst_a0 = 0.0f64;
    let mut worst_coef = 0.0f64;
    for (s, a0, len) in [(-2.0, 0.25, 1.0), (-5.0, 1.0 / 16.0, 0.25)] {
        let t = ctx(&free, &div, s)?;
        worst_a0 = worst_a0.max((t.coupling_a0() - a0).abs());
        let j = reconstruct_operator(&t, 24)?;
        for n in 0..=20 {
            worst_coef = worst_coef.max((j.a(n) - len / 4.0).abs() + (j.b(n) - len / 2.0).abs());
        }
    }
    outcome(
        worst_a0 <= 1e-12 && worst_coef <= 1e-8,
        format!("a0 error {worst_a0:.2e} (tol 1e-12), |a_n - L/4| + |b_n - L/2| {worst_coef:.2e} (tol 1e-8)"),
    )
}

fn criterion_2() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let g = 1 + i % 2;
        let mut pts: Vec<f64> = (0..2 * g).map(|_| rng.random_range(-0.95..1.5)).collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        let ok = pts.windows(2).all(|w| w[1] - w[0] > 0.05);
        if !ok {
            pts = (0..2 * g).map(|k| -0.9 + 0.3 * k as f64 + rng.random_range(0.0..0.1)).collect();
        }
        let gaps: Vec<(f64, f64)> = pts.chunks(2).map(|p| (p[0], p[1])).collect();
        let set = FiniteGapSet::new(&gaps)?;
        let back = set_from_comb(&comb_data(&set)?)?;
        for (p, q) in back.gaps().iter().zip(set.gaps()) {
            worst = worst.max((p.0 - q.0).abs()).max((p.1 - q.1).abs());
        }
    }
    outcome(worst <= 1e-8, format!("max endpoint error {worst:.2e} over 10 sets (tol 1e-8)"))
}

fn criterion_3() -> Result<Outcome> {
    let (set, d) = one_gap();
    let pair = WeylPair::new(&set, &d)?;
    let sampler = PotentialSampler::new(&set, &FlowState::new(&set, &d), -1.0, 40.0)?;
    let mut worst = 0.0f64;
    for l in [C64::new(-0.8, 0.5), C64::new(-0.3, 0.4), C64::new(0.5, 0.5), C64::new(-1.5, 0.3), C64::new(1.0, 1.0)] {
        let r = riccati_m(|x| sampler.eval(x), l, 30.0)?;
        worst = worst.max((r.m - pair.m(Side::Plus, l)?).norm() + r.error);
    }
    outcome(worst <= 1e-4, format!("|riccati - weyl| + error estimate {worst:.2e} at 5 energies (tol 1e-4)"))
}

fn criterion_4() -> Result<Outcome> {
    let mut cont = 0.0f64;
    let mut jac = 0.0f64;
    for ((set, d), s) in [(one_gap(), -2.0), (two_gap(), -2.5)] {
        let pair = WeylPair::new(&set, &d)?;
        cont = cont.max(reflectionless_defect(&pair, &band_grid(&set, 50, 3.0)).max);
        let t = ctx(&set, &d, s)?;
        jac = jac.max(t.jacobi_defect(&z_band_grid(&t, 50)).max);
    }
    outcome(cont <= 1e-6 && jac <= 1e-6, format!("continuum {cont:.2e}, Jacobi {jac:.2e} on 50 band points (tol 1e-6)"))
}

fn criterion_5() -> Result<Outcome> {
    let mut pair_worst = 0.0f64;
    let mut div_worst = 0.0f64;
    for ((set, d), s) in [(one_gap(), -2.0), (two_gap(), -2.5)] {
        let t = ctx(&set, &d, s)?;
        let zs = t.zset().clone();
        let jdiv = t.jacobi_divisor()?;
        let j = reconstruct_operator(&t, 60)?;
        let (c, r) = (0.5 * (zs.lo + zs.hi), 0.75 * zs.diameter());
        for k in 0..50 {
            let th = 2.0 * PI * (k as f64 + 0.3) / 50.0;
            let z = C64::new(c + r * th.cos(), r * th.sin());
            let m = t.r00(z)?;
            let p = r00_product(&zs, &jdiv, z)?;
            let f = two_sided_section_r00(&j, z)?.value;
            pair_worst = pair_worst.max((m - p).norm()).max((m - f).norm()).max((p - f).norm());
        }
        let ext = extract_divisor(&t)?;
        for (a, b) in ext.points.iter().zip(&jdiv.points) {
            div_worst = div_worst.max(if a.eps == b.eps { (a.x - b.x).abs() } else { f64::INFINITY });
        }
    }
    outcome(
        pair_worst <= 1e-5 && div_worst <= 1e-6,
        format!("pairwise R00 {pair_worst:.2e} (tol 1e-5), divisor {div_worst:.2e} (tol 1e-6)"),
    )
}

fn criterion_6() -> Result<Outcome> {
    let (set, d) = one_gap();
    let st = FlowState::new(&set, &d);
    let grid: Vec<f64> = (0..=200).map(|i| 0.2 * i as f64).collect();
    let f1 = frequency_check(&set, &st, &grid)?;
    let (set2, d2) = two_gap();
    let grid2: Vec<f64> = (0..=150).map(|i| 0.2 * i as f64).collect();
    let f2 = frequency_check(&set2, &FlowState::new(&set2, &d2), &grid2)?;
    let rel1 = f1.iter().map(|f| f.rel_error).fold(0.0, f64::max);
    let rel2 = f2.iter().map(|f| f.rel_error).fold(0.0, f64::max);
    let res = f1.iter().chain(&f2).map(|f| f.residual).fold(0.0, f64::max);
    let p = return_time(&set, &st, 0)?;
    let w = comb_data(&set)?.teeth()[0].omega;
    let per = (w * p - PI).abs();
    let shift = almost_periodicity_scan(&set, &st, &[p], (0.0, 2.0 * p), 200)?.d[0];
    outcome(
        rel1 <= 1e-4 && rel2 <= 1e-3 && res <= 1e-6 && per <= 1e-4 && shift <= 1e-5,
        format!(
            "rel one-gap {rel1:.2e} (1e-4), two-gap {rel2:.2e} (1e-3), residual {res:.2e} (1e-6), |ωP - π| {per:.2e} (1e-4), ‖T_P q - q‖ {shift:.2e} (1e-5)"
        ),
    )
}

fn criterion_7() -> Result<Outcome> {
    let (set, d) = two_gap();
    let sampler = PotentialSampler::new(&set, &FlowState::new(&set, &d), -1.0, 40.0)?;
    let q = |x: f64| sampler.eval(x);
    let ev = energy_variation_check(q, C64::new(-0.6, 0.7), C64::new(0.4, 0.9), 30.0)?
        .defect
        .max(energy_variation_check(q, C64::new(0.2, 0.8), C64::new(0.2, 0.8), 30.0)?.defect);
    let mut det = 0.0f64;
    let mut jreal = 0.0f64;
    let mut semidef = true;
    for l in [C64::new(-0.4, 0.0), C64::new(-2.0, 0.0), C64::new(0.7, 0.0)] {
        let a = integrate_schrodinger(q, l, 2.5)?;
        det = det.max((a.det() - 1.0).norm());
        jreal = jreal.max(j_monotonicity_check(&a.m, l).norm);
    }
    for l in [C64::new(-0.4, 0.2), C64::new(0.7, 0.5), C64::new(-1.5, 1.0)] {
        let a = integrate_schrodinger(q, l, 2.5)?;
        det = det.max((a.det() - 1.0).norm());
        semidef &= j_monotonicity_check(&a.m, l).negative_semidefinite;
    }
    outcome(
        ev <= 1e-6 && det <= 1e-10 && jreal <= 1e-10 && semidef,
        format!("energy variation {ev:.2e} (1e-6), det {det:.2e} (1e-10), J-form {jreal:.2e} (1e-10), semidefinite {semidef}"),
    )
}

fn criterion_8() -> Result<Outcome> {
    let c = C64::new(0.1, 0.0);
    let phi = C64::new(0.6, 0.0);
    let seq = VerblunskySeq::constant(100, c)?;
    let rate = truncation_rate(&seq, CmvSide::Plus, phi, constant_schur_limit(c, phi), &[4, 8, 12, 16, 20, 24])?;
    let rate_rel = (rate - phi.norm()).abs() / phi.norm();
    let pts = default_test_points();
    let empty = PeriodicCombMap::new(&PeriodicComb::empty())?.periodicity_check(&pts)?;
    let one = PeriodicCombMap::new(&PeriodicComb::new(&[(2.0, 1.1)])?)?.periodicity_check(&pts)?;
    let angles: Vec<f64> = (0..16).map(|k| -PI + 2.0 * PI * (k as f64 + 0.5) / 16.0).collect();
    let zero = cmv_reflectionless_defect(&VerblunskySeq::zero(500), &angles, RadialSchedule { depth: 500, ..Default::default() })?
        .max_defect;
    outcome(
        rate_rel <= 0.1 && empty <= 1e-8 && one <= 1e-8 && zero == 0.0,
        format!("rate {rate:.4} vs |φ| 0.6 ({:.1}%), periodicity empty {empty:.1e} one-tooth {one:.1e} (1e-8), υ≡0 defect {zero}", 100.0 * rate_rel),
    )
}

fn criterion_9() -> Result<Outcome> {
    let (set, d) = one_gap();
    let other = Divisor::new(&set, &[(-0.3, -1)])?;
    let pa = WeylPair::new(&set, &d)?;
    let pb = WeylPair::new(&set, &other)?;
    let cont = reflectionless_defect_between(&pa, &pb, &band_grid(&set, 50, 3.0)).max;
    let ta = ctx(&set, &d, -2.0)?;
    let tb = ctx(&set, &other, -2.0)?;
    let a2 = ta.coupling_a0().powi(2);
    let mut jac = 0.0f64;
    for x in z_band_grid(&ta, 50) {
        let v = 1.0 / ta.r_boundary(Side::Plus, x)? - (tb.r_boundary(Side::Minus, x)? * a2).conj();
        jac = jac.max(v.norm());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let vals: Vec<C64> = (0..400).map(|_| C64::from_polar(0.5 * rng.random::<f64>(), rng.random_range(-PI..PI))).collect();
    let seq = VerblunskySeq::new(-200, vals)?;
    let angles: Vec<f64> = (0..24).map(|k| -PI + 2.0 * PI * (k as f64 + 0.5) / 24.0).collect();
    let cmv = cmv_reflectionless_defect(&seq, &angles, RadialSchedule { depth: 200, ..Default::default() })?.max_defect;
    outcome(
        cont >= 1e-2 && jac >= 1e-2 && cmv >= 1e-2,
        format!("mismatched continuum {cont:.2e}, mismatched Jacobi {jac:.2e}, random Verblunsky {cmv:.2e} (each >= 1e-2)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>, Duration); 9] = [
        ("1 zero-gap pipeline", criterion_1, Duration::from_secs(10)),
        ("2 comb round trip", criterion_2, Duration::from_secs(60)),
        ("3 oracle m-function", criterion_3, Duration::from_secs(60)),
        ("4 reflectionless identities", criterion_4, Duration::from_secs(300)),
        ("5 resolvent consistency", criterion_5, Duration::from_secs(300)),
        ("6 flow frequency law", criterion_6, Duration::from_secs(300)),
        ("7 energy variation and J-form", criterion_7, Duration::from_secs(300)),
        ("8 Schur functions and periodic comb", criterion_8, Duration::from_secs(300)),
        ("9 negative controls", criterion_9, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (name, f, budget) in criteria {
        let t0 = Instant::now();
        let res = f();
        let dt = t0.elapsed();
        let (ok, detail) = match res {
            Ok(o) => (o.passed && dt <= budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "{} criterion {name}: {detail}; {:.2}s (budget {}s)",
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
