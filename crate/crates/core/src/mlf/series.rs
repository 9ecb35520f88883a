//! Truncated Taylor series `Σ z^k / Γ(αk + β)` for small arguments.

use num_complex::Complex;

use super::gamma::{ln_gamma, recip_gamma};
use crate::Real;

/// Largest gamma argument the series is allowed to touch.
const MAX_GAMMA_ARG: f64 = 170.0;

/// Outcome of scanning the term magnitudes before summing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesPlan {
    /// Number of terms to sum (k = 0 .. terms-1).
    pub terms: usize,
}

/// Decides whether the series is usable at `|z| = abs_z` for accuracy `tol`.
///
/// Returns `None` when the terms would overflow the gamma range before the
/// tail drops below `tol`, or when rounding on the largest terms would exceed
/// `tol` (the cancellation limit).
pub(crate) fn plan<T: Real>(
    alpha: T,
    beta: T,
    abs_z: T,
    tol: T,
    cancellation_free: bool,
) -> Option<SeriesPlan> {
    let eps = T::epsilon();
    let ln_z = abs_z.ln();
    let ln_tail = (tol * T::lit(1e-2)).ln();
    let mut abs_sum = T::zero();
    let mut prev = T::infinity();
    let mut k = 0usize;
    loop {
        let arg = alpha * T::from_count(k) + beta;
        if arg > T::lit(MAX_GAMMA_ARG) {
            return None;
        }
        let ln_term = T::from_count(k) * ln_z - ln_gamma(arg);
        if ln_term.is_finite() {
            abs_sum = abs_sum + ln_term.exp();
        }
        k += 1;
        // positive terms only need a tail small relative to the sum
        let ln_stop = if cancellation_free {
            ln_tail + abs_sum.max(T::one()).ln()
        } else {
            ln_tail
        };
        if ln_term < prev && arg > T::one() && ln_term < ln_stop {
            break;
        }
        if ln_term.is_finite() {
            prev = ln_term;
        }
        if k > 10_000 {
            return None;
        }
    }
    if !cancellation_free && T::lit(4.0) * eps * abs_sum > T::lit(0.5) * tol {
        return None;
    }
    Some(SeriesPlan { terms: k })
}

/// Sums the first `terms` terms in complex arithmetic; returns (value, error bound).
pub(crate) fn sum_complex<T: Real>(alpha: T, beta: T, z: Complex<T>, terms: usize) -> (Complex<T>, T) {
    let mut power = Complex::new(T::one(), T::zero());
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut abs_acc = T::zero();
    let mut last = T::zero();
    for k in 0..terms {
        let term = power * recip_gamma(alpha * T::from_count(k) + beta);
        acc = acc + term;
        last = term.norm();
        abs_acc = abs_acc + last;
        power = power * z;
    }
    let err = T::lit(4.0) * T::epsilon() * abs_acc + last;
    (acc, err)
}

/// Real-arithmetic counterpart of [`sum_complex`].
pub(crate) fn sum_real<T: Real>(alpha: T, beta: T, x: T, terms: usize) -> (T, T) {
    let mut power = T::one();
    let mut acc = T::zero();
    let mut abs_acc = T::zero();
    let mut last = T::zero();
    for k in 0..terms {
        let term = power * recip_gamma(alpha * T::from_count(k) + beta);
        acc = acc + term;
        last = term.abs();
        abs_acc = abs_acc + last;
        power = power * x;
    }
    let err = T::lit(4.0) * T::epsilon() * abs_acc + last;
    (acc, err)
}
