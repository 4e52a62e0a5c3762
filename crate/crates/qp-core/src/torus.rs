//! Torus norms.
//!
//! For real `a` the norm is `dist(a, Z)`; for `z = a + ib` it is
//! `sqrt(b² + dist(a, Z)²)`. Both are 1-periodic and even in the real part.

use num_complex::Complex64;

/// Distance from a real number to the nearest integer.
pub fn torus_norm(a: f64) -> f64 {
    let f = a.rem_euclid(1.0);
    f.min(1.0 - f)
}

/// Signed representative of `a` in `[-1/2, 1/2)`.
pub fn torus_rep(a: f64) -> f64 {
    let f = a.rem_euclid(1.0);
    if f >= 0.5 {
        f - 1.0
    } else {
        f
    }
}

/// Torus norm of a complex number: `sqrt(Im² + dist(Re, Z)²)`.
pub fn torus_norm_c(z: Complex64) -> f64 {
    let re = torus_norm(z.re);
    (re * re + z.im * z.im).sqrt()
}

/// Representative of `z` with real part in `[-1/2, 1/2)`.
pub fn torus_rep_c(z: Complex64) -> Complex64 {
    Complex64::new(torus_rep(z.re), z.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_of_unit_interval() {
        assert_eq!(torus_norm(0.5), 0.5);
    }

    #[test]
    fn periodicity() {
        assert!((torus_norm(1.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn complex_direct_evaluation() {
        let z = Complex64::new(0.75, 0.1);
        let expect = (0.25f64 * 0.25 + 0.1 * 0.1).sqrt();
        assert!((torus_norm_c(z) - expect).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn integer_shift_invariance(a in -50.0..50.0f64, m in -20i64..20) {
            let shifted = torus_norm(a + m as f64);
            prop_assert!((torus_norm(a) - shifted).abs() < 1e-12);
        }

        #[test]
        fn evenness(a in -50.0..50.0f64) {
            prop_assert!((torus_norm(a) - torus_norm(-a)).abs() < 1e-12);
        }

        #[test]
        fn rep_consistent(a in -50.0..50.0f64) {
            let r = torus_rep(a);
            prop_assert!((-0.5..0.5).contains(&r));
            prop_assert!((torus_norm(a) - r.abs()).abs() < 1e-12);
        }
    }
}
