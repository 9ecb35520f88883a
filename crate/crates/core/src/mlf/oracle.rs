//! Extended-precision truncated series, used as an independent reference for
//! [`mlf_eval`](super::mlf_eval) on moderate arguments.

use num_complex::Complex;
use rug::ops::Pow;
use rug::Float;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("n_terms must be at least 1")]
    NoTerms,
    #[error("working precision must be at least 30 digits, got {0}")]
    Precision(u32),
    #[error("alpha must be positive and finite, got {0}")]
    Alpha(f64),
    #[error("term {0} left the representable range of the working precision")]
    Overflow(usize),
}

fn bits_for(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

/// Writes `alpha = p/q` exactly, with `q` a small power of two (the only
/// denominators a binary float represents exactly).
fn rational(alpha: f64) -> Option<(u32, usize)> {
    (0..=6).map(|e| 1usize << e).find_map(|q| {
        // scaling by a power of two is exact
        let p = alpha * q as f64;
        (p == p.round() && p > 0.0 && p < 64.0).then_some((p as u32, q))
    })
}

fn is_pole(x: &Float) -> bool {
    *x <= 0 && x.is_integer()
}

/// `Σ_{k<n_terms} z^k / Γ(αk + β)` evaluated with `working_precision`
/// decimal digits, rounded to `f64` at the end.
pub fn mlf_series_oracle(
    alpha: f64,
    beta: f64,
    z: Complex<f64>,
    n_terms: usize,
    working_precision: u32,
) -> Result<Complex<f64>, OracleError> {
    if n_terms == 0 {
        return Err(OracleError::NoTerms);
    }
    if working_precision < 30 {
        return Err(OracleError::Precision(working_precision));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(OracleError::Alpha(alpha));
    }
    let prec = bits_for(working_precision);
    let a = Float::with_val(prec, alpha);
    let b = Float::with_val(prec, beta);

    // Γ(αk+β) for rational α = p/q reuses Γ(α(k-q)+β) times a rising product
    let recurrence = rational(alpha);
    let mut gammas: Vec<Float> = Vec::with_capacity(n_terms);

    let mut re_pow = Float::with_val(prec, 1);
    let mut im_pow = Float::with_val(prec, 0);
    let zr = Float::with_val(prec, z.re);
    let zi = Float::with_val(prec, z.im);
    let mut sum_re = Float::with_val(prec, 0);
    let mut sum_im = Float::with_val(prec, 0);

    for k in 0..n_terms {
        let arg = Float::with_val(prec, &a * k as u32) + &b;
        let gamma = match recurrence {
            Some((p, q)) if k >= q => {
                let prev_arg = Float::with_val(prec, &a * (k - q) as u32) + &b;
                if is_pole(&prev_arg) {
                    Float::with_val(prec, arg.gamma_ref())
                } else {
                    let mut g = gammas[k - q].clone();
                    for i in 0..p {
                        g *= Float::with_val(prec, &prev_arg + i);
                    }
                    g
                }
            }
            _ => {
                if is_pole(&arg) {
                    Float::with_val(prec, f64::INFINITY)
                } else {
                    Float::with_val(prec, arg.gamma_ref())
                }
            }
        };
        if !is_pole(&arg) {
            let tr = Float::with_val(prec, &re_pow / &gamma);
            let ti = Float::with_val(prec, &im_pow / &gamma);
            if !(tr.is_finite() && ti.is_finite()) {
                return Err(OracleError::Overflow(k));
            }
            sum_re += tr;
            sum_im += ti;
        }
        gammas.push(gamma);

        let nr = Float::with_val(prec, &re_pow * &zr) - Float::with_val(prec, &im_pow * &zi);
        let ni = Float::with_val(prec, &re_pow * &zi) + Float::with_val(prec, &im_pow * &zr);
        re_pow = nr;
        im_pow = ni;
        if !(re_pow.is_finite() && im_pow.is_finite()) {
            return Err(OracleError::Overflow(k + 1));
        }
    }
    Ok(Complex::new(sum_re.to_f64(), sum_im.to_f64()))
}

/// Γ(x) with `working_precision` digits, rounded to `f64`.
pub fn gamma_oracle(x: f64, working_precision: u32) -> f64 {
    Float::with_val(bits_for(working_precision), x).gamma().to_f64()
}

/// `exp(x²)·erfc(-x)` with `working_precision` digits; equals `E_{1/2,1}(x)`.
pub fn erfc_identity_oracle(x: f64, working_precision: u32) -> f64 {
    let prec = bits_for(working_precision);
    let v = Float::with_val(prec, x);
    let sq = Float::with_val(prec, (&v).pow(2u32));
    let erfc = Float::with_val(prec, -v).erfc();
    (sq.exp() * erfc).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_series() {
        let v = mlf_series_oracle(1.0, 1.0, Complex::new(1.0, 0.0), 50, 40).unwrap();
        assert!((v.re - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn rational_detection() {
        assert_eq!(rational(0.25), Some((1, 4)));
        assert_eq!(rational(0.75), Some((3, 4)));
        assert_eq!(rational(1.25), Some((5, 4)));
        // 0.7 is not 7/10 in binary
        assert_eq!(rational(0.7), None);
        assert_eq!(rational(std::f64::consts::PI), None);
    }

    #[test]
    fn recurrence_matches_direct_gamma() {
        // 0.5 takes the rising-product path, 0.5 + 2^-40 does not
        let z = Complex::new(-2.0, 0.5);
        let fast = mlf_series_oracle(0.5, 1.0, z, 120, 40).unwrap();
        let slow = mlf_series_oracle(0.5 + 2f64.powi(-40), 1.0, z, 120, 40).unwrap();
        assert!((fast - slow).norm() < 1e-10);
    }

    #[test]
    fn argument_errors() {
        let z = Complex::new(1.0, 0.0);
        assert_eq!(mlf_series_oracle(1.0, 1.0, z, 0, 40), Err(OracleError::NoTerms));
        assert_eq!(mlf_series_oracle(1.0, 1.0, z, 5, 20), Err(OracleError::Precision(20)));
        assert!(matches!(mlf_series_oracle(-1.0, 1.0, z, 5, 40), Err(OracleError::Alpha(_))));
    }

    #[test]
    fn poles_in_denominator_contribute_zero() {
        // β = 0: the k = 0 term is 1/Γ(0) = 0, so E_{1,0}(z) = z e^z
        let v = mlf_series_oracle(1.0, 0.0, Complex::new(0.5, 0.0), 60, 40).unwrap();
        assert!((v.re - 0.5 * 0.5f64.exp()).abs() < 1e-15);
    }
}
