//! Impedance of ladder networks by right-to-left continued-fraction evaluation.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{LadderSpec, ShuntElement};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FreqError {
    #[error("s must be nonzero")]
    ZeroFrequency,
    #[error("continued fraction hit an exactly zero denominator at step {0}")]
    Singular(usize),
    #[error("ladder has no steps")]
    EmptyLadder,
    #[error("need 0 < omega_min <= omega_max, got [{0}, {1}]")]
    Range(f64, f64),
    #[error("points_per_decade must be at least 4, got {0}")]
    Density(usize),
    #[error("response has no samples")]
    EmptyResponse,
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("order must lie in (0, 1] and coefficient be positive")]
    IdealParameters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKind {
    Impedance,
    Gain,
}

/// Complex response sampled on increasing angular frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse<T> {
    pub omega: Vec<T>,
    pub value: Vec<Complex<T>>,
    pub kind: ResponseKind,
}

impl<T: Real> FrequencyResponse<T> {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn magnitude_db(&self) -> Vec<T> {
        self.value.iter().map(|z| T::lit(20.0) * z.norm().log10()).collect()
    }

    pub fn phase_deg(&self) -> Vec<T> {
        self.value.iter().map(|z| z.arg().to_degrees()).collect()
    }
}

fn check_s<T: Real>(s: Complex<T>) -> Result<(), FreqError> {
    if s.re == T::zero() && s.im == T::zero() {
        Err(FreqError::ZeroFrequency)
    } else {
        Ok(())
    }
}

fn inv<T: Real>(z: Complex<T>, step: usize) -> Result<Complex<T>, FreqError> {
    if z.re == T::zero() && z.im == T::zero() {
        Err(FreqError::Singular(step))
    } else {
        Ok(z.inv())
    }
}

/// `Z(s)` seen at the ladder terminal with nothing connected beyond the last shunt.
pub fn impedance<T: Real>(spec: &LadderSpec<T>, s: Complex<T>) -> Result<Complex<T>, FreqError> {
    check_s(s)?;
    let mut z: Option<Complex<T>> = None;
    for (k, step) in spec.steps.iter().enumerate().rev() {
        let y = match &step.shunt {
            ShuntElement::Capacitor(c) => s * *c,
            ShuntElement::SubLadder(sub) => inv(impedance(sub, s)?, k)?,
        };
        let y_total = match z {
            Some(z) => y + inv(z, k)?,
            None => y,
        };
        z = Some(inv(y_total, k)? + step.r);
    }
    z.ok_or(FreqError::EmptyLadder)
}

/// Admittance of each outer shunt at `s`.
pub fn shunt_admittances<T: Real>(spec: &LadderSpec<T>, s: Complex<T>) -> Result<Vec<Complex<T>>, FreqError> {
    check_s(s)?;
    spec.steps
        .iter()
        .enumerate()
        .map(|(k, step)| match &step.shunt {
            ShuntElement::Capacitor(c) => Ok(s * *c),
            ShuntElement::SubLadder(sub) => inv(impedance(sub, s)?, k),
        })
        .collect()
}

/// `R_1 + 1/(Y_1 + 1/(R_2 + 1/(Y_2 + …)))` from given series resistances and
/// shunt admittances.
pub fn continued_fraction<T: Real>(series: &[T], shunt: &[Complex<T>]) -> Result<Complex<T>, FreqError> {
    assert_eq!(series.len(), shunt.len(), "one admittance per series resistor");
    if series.is_empty() {
        return Err(FreqError::EmptyLadder);
    }
    let last = series.len() - 1;
    let mut z = inv(shunt[last], last)? + series[last];
    for k in (0..last).rev() {
        z = inv(shunt[k] + inv(z, k)?, k)? + series[k];
    }
    Ok(z)
}

/// `1 / (coefficient · s^order)` on the principal branch.
pub fn ideal_fractance<T: Real>(order: T, coefficient: T, s: Complex<T>) -> Result<Complex<T>, FreqError> {
    check_s(s)?;
    if !(order > T::zero() && order <= T::one() && coefficient > T::zero()) {
        return Err(FreqError::IdealParameters);
    }
    Ok((s.powf(order) * coefficient).inv())
}

/// `n` log-spaced points from `omega_min` to `omega_max` inclusive, about
/// `points_per_decade` per decade.
pub fn log_grid<T: Real>(omega_min: T, omega_max: T, points_per_decade: usize) -> Result<Vec<T>, FreqError> {
    if !(omega_min > T::zero() && omega_min <= omega_max && omega_max.is_finite()) {
        return Err(FreqError::Range(
            omega_min.to_f64().unwrap_or(f64::NAN),
            omega_max.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if points_per_decade < 4 {
        return Err(FreqError::Density(points_per_decade));
    }
    if omega_min == omega_max {
        return Ok(vec![omega_min]);
    }
    let (lo, hi) = (omega_min.log10(), omega_max.log10());
    let intervals = ((hi - lo) * T::from_count(points_per_decade) - T::lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
    let step = (hi - lo) / T::from_count(intervals);
    let mut grid: Vec<T> = (0..=intervals).map(|i| T::lit(10.0).powf(lo + step * T::from_count(i))).collect();
    grid[0] = omega_min;
    grid[intervals] = omega_max;
    Ok(grid)
}

/// `gain · Z(jω)` on a given frequency grid; points are independent.
pub fn sweep<T: Real>(spec: &LadderSpec<T>, omega: &[T], gain: T) -> Result<FrequencyResponse<T>, FreqError> {
    let value = omega
        .par_iter()
        .map(|&w| impedance(spec, Complex::new(T::zero(), w)).map(|z| z * gain))
        .collect::<Result<Vec<_>, _>>()?;
    let kind = if gain == T::one() { ResponseKind::Impedance } else { ResponseKind::Gain };
    Ok(FrequencyResponse {
        omega: omega.to_vec(),
        value,
        kind,
    })
}

/// Bode data of `gain · Z(jω)`; `gain = 1/R_in` models an ideal op-amp
/// integrator with the ladder in its feedback path.
pub fn bode_sweep<T: Real>(
    spec: &LadderSpec<T>,
    omega_min: T,
    omega_max: T,
    points_per_decade: usize,
    gain: T,
) -> Result<FrequencyResponse<T>, FreqError> {
    sweep(spec, &log_grid(omega_min, omega_max, points_per_decade)?, gain)
}

/// Widest run of consecutive samples whose phase is within `tol` degrees of
/// `target_phase`, as `(omega_lo, omega_hi)`; `None` if no sample qualifies.
/// Width is measured in decades.
pub fn constant_phase_band<T: Real>(
    resp: &FrequencyResponse<T>,
    target_phase: T,
    tol: T,
) -> Result<Option<(T, T)>, FreqError> {
    if resp.is_empty() {
        return Err(FreqError::EmptyResponse);
    }
    if !(tol > T::zero()) {
        return Err(FreqError::Tolerance(tol.to_f64().unwrap_or(f64::NAN)));
    }
    let phase = resp.phase_deg();
    let mut best: Option<(usize, usize)> = None;
    let mut start: Option<usize> = None;
    let width = |a: usize, b: usize| resp.omega[b].log10() - resp.omega[a].log10();
    for i in 0..=phase.len() {
        let inside = i < phase.len() && (phase[i] - target_phase).abs() <= tol;
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                let b = i - 1;
                if best.is_none_or(|(p, q)| width(a, b) > width(p, q)) {
                    best = Some((a, b));
                }
                start = None;
            }
            _ => {}
        }
    }
    Ok(best.map(|(a, b)| (resp.omega[a], resp.omega[b])))
}

/// Width of a band in decades; zero for an absent band.
pub fn band_decades<T: Real>(band: Option<(T, T)>) -> T {
    band.map_or(T::zero(), |(lo, hi)| hi.log10() - lo.log10())
}

/// Least-squares slope of magnitude in dB against `log10 ω` over samples in
/// `[omega_lo, omega_hi]`, in dB per decade. `None` with fewer than 2 samples.
pub fn magnitude_slope<T: Real>(resp: &FrequencyResponse<T>, omega_lo: T, omega_hi: T) -> Option<T> {
    let pts: Vec<(T, T)> = resp
        .omega
        .iter()
        .zip(resp.magnitude_db())
        .filter(|(w, _)| **w >= omega_lo && **w <= omega_hi)
        .map(|(w, db)| (w.log10(), db))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_count(pts.len());
    let mx = pts.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = pts.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    Some(sxy / sxx)
}

/// Input impedance of the uniform semi-infinite ladder with per-step `r`, `c`:
/// the fixed point `Z = r + 1/(sc + 1/Z)`.
pub fn infinite_ladder_impedance<T: Real>(r: T, c: T, s: Complex<T>) -> Complex<T> {
    let half = r / T::lit(2.0);
    // principal root keeps Re Z > 0 for Re s >= 0
    (Complex::new(half * half, T::zero()) + (s * c).inv() * r).sqrt() + half
}
