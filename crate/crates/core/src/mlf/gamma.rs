//! Gamma function family on the real line (Lanczos, g = 7, 9 terms).

use crate::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument whose factorial fits in an `f64`.
const MAX_FACTORIAL_ARG: f64 = 171.0;

/// Above this the Lanczos base is shifted down and the rising product restored,
/// which avoids the rounding amplification of `t^(x-1/2) e^-t` at large `t`.
const LANCZOS_MAX_ARG: f64 = 12.0;

fn lanczos_sum<T: Real>(z: T) -> T {
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::from_count(i));
    }
    acc
}

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.floor()
}

/// `sin(pi * x)` with exact argument reduction, so zeros at integers are exact.
pub fn sin_pi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    // r in [-1, 1], sin(pi x) = sin(pi r)
    let mut r = x - two * (x / two).round();
    let half = T::lit(0.5);
    if r > half {
        r = T::one() - r;
    } else if r < -half {
        r = -T::one() - r;
    }
    (T::PI() * r).sin()
}

/// Gamma function. Returns NaN at the poles (non-positive integers).
pub fn gamma<T: Real>(x: T) -> T {
    if x.is_nan() || is_nonpositive_integer(x) {
        return T::nan();
    }
    if x < T::lit(0.5) {
        // reflection: Γ(x) Γ(1 - x) = π / sin(πx)
        return T::PI() / (sin_pi(x) * gamma(T::one() - x));
    }
    if x == x.floor() && x <= T::lit(MAX_FACTORIAL_ARG) {
        let n = x.to_usize().unwrap_or(0);
        let mut acc = T::one();
        for k in 2..n {
            acc = acc * T::from_count(k);
        }
        return acc;
    }
    if x > T::lit(LANCZOS_MAX_ARG) && x <= T::lit(MAX_FACTORIAL_ARG + 1.0) {
        let shift = (x - T::lit(LANCZOS_MAX_ARG)).ceil();
        let mut base = x - shift;
        let mut acc = lanczos(base);
        while base < x {
            acc = acc * base;
            base = base + T::one();
        }
        return acc;
    }
    lanczos(x)
}

fn lanczos<T: Real>(x: T) -> T {
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    // split the power so t^(z+1/2) does not overflow before e^-t scales it back
    let p = t.powf((z + T::lit(0.5)) / T::lit(2.0));
    (T::TAU()).sqrt() * p * (p * (-t).exp()) * lanczos_sum(z)
}

/// Natural log of |Γ(x)|. Returns +inf at the poles.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if is_nonpositive_integer(x) {
        return T::infinity();
    }
    if x < T::lit(0.5) {
        return (T::PI() / sin_pi(x).abs()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * T::TAU().ln() + (z + T::lit(0.5)) * t.ln() - t + lanczos_sum(z).ln()
}

/// Reciprocal gamma `1/Γ(x)`, entire: exactly zero at the poles of Γ.
pub fn recip_gamma<T: Real>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if is_nonpositive_integer(x) {
        return T::zero();
    }
    if x < T::lit(0.5) {
        // 1/Γ(x) = Γ(1 - x) sin(πx) / π
        return gamma(T::one() - x) * sin_pi(x) / T::PI();
    }
    if x > T::lit(171.5) {
        return (-ln_gamma(x)).exp();
    }
    T::one() / gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn factorials_are_exact() {
        assert_eq!(gamma(1.0_f64), 1.0);
        assert_eq!(gamma(5.0_f64), 24.0);
        assert_eq!(gamma(11.0_f64), 3_628_800.0);
    }

    #[test]
    fn half_integers() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert_relative_eq!(gamma(0.5_f64), sqrt_pi, max_relative = 1e-14);
        assert_relative_eq!(gamma(1.5_f64), sqrt_pi / 2.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(-0.5_f64), -2.0 * sqrt_pi, max_relative = 1e-14);
    }

    #[test]
    fn poles_and_reciprocal() {
        assert!(gamma(0.0_f64).is_nan());
        assert!(gamma(-3.0_f64).is_nan());
        assert_eq!(recip_gamma(-3.0_f64), 0.0);
        assert_eq!(recip_gamma(0.0_f64), 0.0);
        assert_relative_eq!(recip_gamma(-2.5_f64), 1.0 / gamma(-2.5), max_relative = 1e-13);
        assert!(ln_gamma(-2.0_f64).is_infinite());
    }

    #[test]
    fn near_overflow_edge() {
        // Γ(171.5) ~ 9.5e307; must be finite and consistent with ln Γ
        let g = gamma(171.5_f64);
        assert!(g.is_finite());
        assert_relative_eq!(g.ln(), ln_gamma(171.5_f64), max_relative = 1e-13);
    }

    #[test]
    fn single_precision_is_usable() {
        assert_relative_eq!(gamma(4.5_f32), 11.631_728_f32, max_relative = 1e-5);
    }

    #[test]
    fn sin_pi_zeros() {
        assert_eq!(sin_pi(3.0_f64), 0.0);
        assert_eq!(sin_pi(-7.0_f64), 0.0);
        assert_relative_eq!(sin_pi(0.5_f64), 1.0);
        assert_relative_eq!(sin_pi(2.25_f64), (std::f64::consts::PI * 0.25).sin(), max_relative = 1e-15);
    }
}
