//! Two-parameter Mittag-Leffler function `E_{α,β}(z) = Σ z^k / Γ(αk + β)`.
//!
//! Three regimes:
//! - Taylor series while rounding on the largest term stays below the tolerance,
//! - the algebraic asymptotic expansion on the negative real axis (`α < 1`,
//!   `|z| ≥ 15`) when its smallest term certifies the tolerance,
//! - otherwise inversion of the Laplace transform on a parabolic contour.
//!
//! Real arguments never produce an imaginary part. Accuracy is absolute for
//! `|E| ≤ 1` and relative beyond.

mod asymptotic;
pub mod gamma;
mod kernel;
mod laplace;
pub mod oracle;
mod series;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Real;

pub use kernel::RelaxationKernel;

/// Smallest |z| at which the asymptotic expansion is tried.
const ASYMPTOTIC_RADIUS: f64 = 15.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlfError {
    #[error("order alpha must be positive and finite, got {0}")]
    Order(f64),
    #[error("beta must be finite, got {0}")]
    Beta(f64),
    #[error("tolerance must lie in [1e-15, 1e-6], got {0}")]
    Tolerance(f64),
    #[error("argument is not finite")]
    NonFiniteArgument,
    #[error("relaxation kernel needs 0 < alpha < 2, got {0}")]
    KernelOrder(f64),
}

/// Orders of `E_{α,β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlParams<T> {
    alpha: T,
    beta: T,
}

impl<T: Real> MlParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self, MlfError> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(MlfError::Order(alpha.to_f64().unwrap_or(f64::NAN)));
        }
        if !beta.is_finite() {
            return Err(MlfError::Beta(beta.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { alpha, beta })
    }

    /// `E_{α,1}`, the relaxation function.
    pub fn relaxation(alpha: T) -> Result<Self, MlfError> {
        Self::new(alpha, T::one())
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }
}

/// Which algorithm produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Origin,
    Series,
    Asymptotic,
    ContourInversion,
}

/// A Mittag-Leffler value with its provenance and accuracy flag.
///
/// `certified == false` means the algorithm could not guarantee the requested
/// tolerance; `value` is still the best available estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlValue<V> {
    pub value: V,
    pub regime: Regime,
    pub certified: bool,
}

fn check_tol<T: Real>(tol: T) -> Result<(), MlfError> {
    if tol >= T::lit(1e-15) && tol <= T::lit(1e-6) {
        Ok(())
    } else {
        Err(MlfError::Tolerance(tol.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Accuracy aimed at internally: a decade below `tol`, floored near round-off.
fn internal_target<T: Real>(tol: T) -> T {
    (tol * T::lit(0.1)).max(T::lit(4.0) * T::epsilon())
}

fn supported_order<T: Real>(alpha: T) -> bool {
    alpha <= T::lit(2.0)
}

/// `E_{α,β}(z)` for complex `z`. Arguments with zero imaginary part take the
/// real path and return an imaginary part of exactly zero.
pub fn mlf_eval<T: Real>(params: &MlParams<T>, z: Complex<T>, tol: T) -> Result<MlValue<Complex<T>>, MlfError> {
    check_tol(tol)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(MlfError::NonFiniteArgument);
    }
    if z.im == T::zero() {
        let r = mlf_eval_real(params, z.re, tol)?;
        return Ok(MlValue {
            value: Complex::new(r.value, T::zero()),
            regime: r.regime,
            certified: r.certified,
        });
    }
    let (alpha, beta) = (params.alpha, params.beta);
    let abs_z = z.norm();
    if let Some(plan) = series::plan(alpha, beta, abs_z, tol, false) {
        let (value, err) = series::sum_complex(alpha, beta, z, plan.terms);
        return Ok(MlValue {
            value,
            regime: Regime::Series,
            certified: err <= tol * value.norm().max(T::one()),
        });
    }
    let inv = laplace::invert(alpha, beta, z, internal_target(tol), false);
    Ok(MlValue {
        value: inv.value,
        regime: Regime::ContourInversion,
        certified: inv.certified && supported_order(alpha),
    })
}

/// `E_{α,β}(x)` for real `x`, computed without complex rounding in the result.
pub fn mlf_eval_real<T: Real>(params: &MlParams<T>, x: T, tol: T) -> Result<MlValue<T>, MlfError> {
    check_tol(tol)?;
    if !x.is_finite() {
        return Err(MlfError::NonFiniteArgument);
    }
    let (alpha, beta) = (params.alpha, params.beta);
    if x == T::zero() {
        return Ok(MlValue {
            value: gamma::recip_gamma(beta),
            regime: Regime::Origin,
            certified: true,
        });
    }
    let cancellation_free = x > T::zero() && beta > T::zero();
    if let Some(plan) = series::plan(alpha, beta, x.abs(), tol, cancellation_free) {
        let (value, err) = series::sum_real(alpha, beta, x, plan.terms);
        return Ok(MlValue {
            value,
            regime: Regime::Series,
            certified: err <= tol * value.abs().max(T::one()),
        });
    }
    if x <= -T::lit(ASYMPTOTIC_RADIUS) && alpha < T::one() {
        let (value, err) = asymptotic::negative_axis(alpha, beta, -x, tol);
        if err <= T::lit(0.1) * tol {
            return Ok(MlValue {
                value,
                regime: Regime::Asymptotic,
                certified: true,
            });
        }
    }
    let inv = laplace::invert(alpha, beta, Complex::new(x, T::zero()), internal_target(tol), true);
    Ok(MlValue {
        value: inv.value.re,
        regime: Regime::ContourInversion,
        certified: inv.certified && supported_order(alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn real(alpha: f64, beta: f64, x: f64) -> MlValue<f64> {
        mlf_eval_real(&MlParams::new(alpha, beta).unwrap(), x, 1e-14).unwrap()
    }

    #[test]
    fn exponential_and_cosh() {
        assert_abs_diff_eq!(real(1.0, 1.0, 1.0).value, std::f64::consts::E, epsilon = 1e-13);
        assert_abs_diff_eq!(real(2.0, 1.0, 1.0).value, 1.543_080_634_815_244, epsilon = 1e-13);
    }

    #[test]
    fn origin_is_reciprocal_gamma() {
        let v = real(0.7, 1.0, 0.0);
        assert_eq!(v.value, 1.0);
        assert_eq!(v.regime, Regime::Origin);
        assert_abs_diff_eq!(real(0.7, 2.5, 0.0).value, 1.0 / gamma::gamma(2.5), epsilon = 1e-15);
    }

    #[test]
    fn half_order_erfc_identity() {
        // E_{1/2,1}(-1) = e * erfc(1)
        assert_abs_diff_eq!(real(0.5, 1.0, -1.0).value, 0.427_583_576_155_807, epsilon = 1e-12);
    }

    #[test]
    fn regimes_are_selected() {
        assert_eq!(real(0.5, 1.0, -0.5).regime, Regime::Series);
        assert_eq!(real(0.5, 1.0, -40.0).regime, Regime::Asymptotic);
        assert_eq!(real(0.9, 1.0, -8.0).regime, Regime::ContourInversion);
        // near α = 1 the algebraic expansion cannot certify the tolerance
        assert_eq!(real(0.99, 1.0, -20.0).regime, Regime::ContourInversion);
    }

    #[test]
    fn complex_real_axis_has_no_imaginary_dust() {
        let p = MlParams::new(0.6, 1.0).unwrap();
        let v = mlf_eval(&p, Complex::new(-7.3, 0.0), 1e-12).unwrap();
        assert_eq!(v.value.im, 0.0);
        let v = mlf_eval(&p, Complex::new(-7.3, -0.0), 1e-12).unwrap();
        assert_eq!(v.value.im, 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(MlParams::new(0.0, 1.0), Err(MlfError::Order(_))));
        assert!(matches!(MlParams::new(-1.0, 1.0), Err(MlfError::Order(_))));
        assert!(matches!(MlParams::new(1.0, f64::NAN), Err(MlfError::Beta(_))));
        let p = MlParams::new(1.0, 1.0).unwrap();
        assert!(matches!(mlf_eval_real(&p, 1.0, 1e-3), Err(MlfError::Tolerance(_))));
        assert!(matches!(mlf_eval_real(&p, 1.0, 1e-16), Err(MlfError::Tolerance(_))));
        assert_eq!(mlf_eval_real(&p, f64::INFINITY, 1e-10), Err(MlfError::NonFiniteArgument));
    }

    #[test]
    fn large_order_is_flagged() {
        // beyond α = 2 the contour result carries no guarantee
        let p = MlParams::new(3.0, 1.0).unwrap();
        let v = mlf_eval_real(&p, -5000.0, 1e-10).unwrap();
        assert_eq!(v.regime, Regime::ContourInversion);
        assert!(!v.certified);
    }

    #[test]
    fn kernel_matches_general_path() {
        for &alpha in &[0.2, 0.5, 0.83, 1.0, 1.0 + 1e-9, 1.001, 1.2, 1.5, 1.9] {
            let params = MlParams::relaxation(alpha).unwrap();
            let k = RelaxationKernel::new(params, 1e-14).unwrap();
            for &x in &[0.0, 1e-9, 1e-3, 0.4, 2.0, 9.0, 31.0, 100.0, 1e4] {
                let g = mlf_eval_real(&params, -x, 1e-14).unwrap().value;
                assert_abs_diff_eq!(k.eval(x), g, epsilon = 1e-13);
            }
        }
        assert!(RelaxationKernel::new(MlParams::relaxation(2.0).unwrap(), 1e-12).is_err());
    }

    #[test]
    fn single_precision() {
        let p = MlParams::new(1.0_f32, 1.0).unwrap();
        let v = mlf_eval_real(&p, -2.0_f32, 1e-6).unwrap();
        assert!((v.value - (-2.0_f32).exp()).abs() < 1e-5);
    }
}
