//! Complex helpers with careful handling of tiny imaginary parts.
//!
//! `num_complex::Complex::sqrt` goes through polar form, which loses an
//! imaginary perturbation of size 1e-20 next to a negative real part. The
//! complex-step derivatives used throughout need that perturbation intact.

use num_complex::Complex;

pub type C64 = Complex<f64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Principal square root, cut along the negative real axis.
/// A signed zero imaginary part selects the side of the cut.
pub fn csqrt(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    if x == 0.0 && y == 0.0 {
        return C64::new(0.0, y);
    }
    let r = x.hypot(y);
    if x >= 0.0 {
        let t = ((r + x) * 0.5).sqrt();
        C64::new(t, y / (2.0 * t))
    } else {
        let t = ((r - x) * 0.5).sqrt();
        C64::new(y.abs() / (2.0 * t), t.copysign(y))
    }
}

/// Square root with boundary values taken from the upper half plane:
/// for real negative input returns `+i sqrt(|x|)` regardless of the zero sign.
pub fn sqrt_upper(z: C64) -> C64 {
    if z.im == 0.0 {
        csqrt(C64::new(z.re, 0.0))
    } else {
        csqrt(z)
    }
}

/// Complex-step derivative of a real-analytic function at a real point.
pub fn complex_step<F: Fn(C64) -> C64>(f: F, x: f64) -> f64 {
    let h = 1e-20 * x.abs().max(1.0);
    f(C64::new(x, h)).im / h
}

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_matches_principal_branch() {
        for &(x, y) in &[(4.0, 0.0), (-4.0, 1e-3), (-4.0, -1e-3), (0.3, -2.0), (-1.0, 5.0)] {
            let z = c(x, y);
            let a = csqrt(z);
            let b = z.sqrt();
            assert!((a - b).norm() < 1e-14, "{z} {a} {b}");
        }
    }

    #[test]
    fn sqrt_keeps_tiny_imaginary_part() {
        let s = csqrt(c(-4.0, 1e-20));
        assert!((s.re - 1e-20 / 4.0).abs() < 1e-35);
        assert_eq!(s.im, 2.0);
    }

    #[test]
    fn upper_boundary_value_on_negative_axis() {
        assert_eq!(sqrt_upper(c(-9.0, -0.0)), c(0.0, 3.0));
        assert_eq!(csqrt(c(-9.0, -0.0)), c(0.0, -3.0));
    }

    #[test]
    fn complex_step_of_sqrt() {
        let d = complex_step(|z| csqrt(z), 2.0);
        assert!((d - 0.5 / 2f64.sqrt()).abs() < 1e-15);
    }
}
