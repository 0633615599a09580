//! Trigonometric helpers with exact values at quarter-period arguments.
//!
//! Structural claims about the compiled cluster graphs (which edges exist at
//! pump angles like 0 or pi/4) only hold if `cos(2 theta)` vanishes exactly
//! there. Plain `f64::cos` applied to the double nearest pi/2 returns ~6e-17,
//! which would leave phantom edges of that weight in every graph. The rule
//! used here: when `4*theta/pi` lands on an integer without rounding, the
//! angle is treated as that exact multiple of pi/4 and the trig values are
//! read from a table. Every other input goes through libm untouched.
//!
//! Doubles written as `0.25 * PI`, `PI / 4.0`, `FRAC_PI_4`, `PI / 2.0` and
//! integer multiples thereof all satisfy the exactness test, so angles that
//! enter in units of pi keep their special values end to end.

use std::f64::consts::PI;

/// (cos 2θ, sin 2θ) with exact values when θ is an exact multiple of π/4.
pub(crate) fn cos_sin_2theta(theta: f64) -> (f64, f64) {
    let k = 4.0 * theta / PI;
    if k.is_finite() && k == k.round() {
        // 2θ = k·(π/2); reduce k mod 4.
        match (k as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        ((2.0 * theta).cos(), (2.0 * theta).sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_2};

    #[test]
    fn quarter_angles_are_exact() {
        assert_eq!(cos_sin_2theta(0.0), (1.0, 0.0));
        assert_eq!(cos_sin_2theta(FRAC_PI_4), (0.0, 1.0));
        assert_eq!(cos_sin_2theta(0.25 * PI), (0.0, 1.0));
        assert_eq!(cos_sin_2theta(PI / 4.0), (0.0, 1.0));
        assert_eq!(cos_sin_2theta(FRAC_PI_2), (-1.0, 0.0));
        assert_eq!(cos_sin_2theta(-FRAC_PI_4), (0.0, -1.0));
    }

    #[test]
    fn generic_angles_use_libm() {
        let t = 0.3;
        assert_eq!(cos_sin_2theta(t), ((2.0 * t).cos(), (2.0 * t).sin()));
        // pi/8 is not a multiple of pi/4; it must not be snapped.
        let (c, s) = cos_sin_2theta(PI / 8.0);
        assert!((c - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((s - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn huge_arguments_do_not_panic() {
        let (c, s) = cos_sin_2theta(1e300);
        assert!(c.is_finite() && s.is_finite());
    }
}
