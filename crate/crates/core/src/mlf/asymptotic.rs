//! Algebraic asymptotic expansion on the negative real axis, `0 < α < 1`:
//! `E_{α,β}(-x) ≈ -Σ_{k≥1} (-x)^{-k} / Γ(β - αk)`.

use super::gamma::recip_gamma;
use crate::Real;

const MAX_TERMS: usize = 200;

/// Sums the expansion at `-x` (`x > 0`) until the terms fall below
/// `tol / 100` or start growing. Returns (value, truncation error estimate).
pub(crate) fn negative_axis<T: Real>(alpha: T, beta: T, x: T, tol: T) -> (T, T) {
    let target = tol * T::lit(1e-2);
    let inv = -T::one() / x; // (-x)^{-1}
    let mut power = T::one();
    let mut acc = T::zero();
    let mut last_nonzero = T::infinity();
    for k in 1..=MAX_TERMS {
        power = power * inv;
        let term = -power * recip_gamma(beta - alpha * T::from_count(k));
        if term == T::zero() {
            continue;
        }
        let mag = term.abs();
        if mag > last_nonzero {
            // divergent tail: the smallest term bounds the truncation error
            return (acc, last_nonzero);
        }
        acc = acc + term;
        last_nonzero = mag;
        if mag < target {
            return (acc, mag);
        }
    }
    (acc, last_nonzero)
}
