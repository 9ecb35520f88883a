//! Apparent order as a function of the fit window: the model is fitted on
//! `[0, t]` for a growing sequence of window ends `t`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlfit::{fit_ml, FitError, FitOptions, InitialGuess, MlFitResult, MIN_WINDOW_SAMPLES};
use crate::timesim::TimeSeries;
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarOrderError {
    #[error("window schedule must be non-empty, positive and strictly increasing")]
    Schedule,
    #[error("series ends at {have} s but the schedule needs {need} s")]
    Coverage { have: f64, need: f64 },
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// α(t), a(t) and y0(t) over the window ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VarOrderProfile<T> {
    pub window_ends: Vec<T>,
    pub alphas: Vec<T>,
    pub rates: Vec<T>,
    pub amplitudes: Vec<T>,
    pub converged_flags: Vec<bool>,
}

impl<T: Real> VarOrderProfile<T> {
    pub fn len(&self) -> usize {
        self.window_ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window_ends.is_empty()
    }

    /// α at the given window end, if it is on the schedule.
    pub fn alpha_at(&self, t: T) -> Option<T> {
        self.window_ends
            .iter()
            .position(|&w| (w - t).abs() <= T::lit(1e-9) * t.abs().max(T::one()))
            .map(|i| self.alphas[i])
    }

    fn from_fits(window_ends: &[T], fits: &[MlFitResult<T>]) -> Self {
        Self {
            window_ends: window_ends.to_vec(),
            alphas: fits.iter().map(|f| f.alpha).collect(),
            rates: fits.iter().map(|f| f.a).collect(),
            amplitudes: fits.iter().map(|f| f.y0).collect(),
            converged_flags: fits.iter().map(|f| f.converged).collect(),
        }
    }
}

/// 1 s steps up to 5 s, then 5 s steps up to 100 s.
pub fn default_window_schedule<T: Real>() -> Vec<T> {
    (1..=5).chain((10..=100).step_by(5)).map(T::from_count).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarOrderOptions<T> {
    pub fit: FitOptions<T>,
    /// Seed each window with the previous optimum. Without it the windows are
    /// independent and fitted in parallel.
    pub warm_start: bool,
}

impl<T: Real> Default for VarOrderOptions<T> {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            warm_start: true,
        }
    }
}

fn check_schedule<T: Real>(schedule: &[T]) -> Result<(), VarOrderError> {
    let increasing = schedule.windows(2).all(|w| w[0] < w[1]);
    if schedule.is_empty() || !increasing || !(schedule[0] > T::zero()) || !schedule.iter().all(|t| t.is_finite()) {
        Err(VarOrderError::Schedule)
    } else {
        Ok(())
    }
}

fn fit_window<T: Real>(ts: &TimeSeries<T>, end: T, init: Option<InitialGuess<T>>, opts: &FitOptions<T>) -> MlFitResult<T> {
    fit_ml(ts, end, init, opts).unwrap_or_else(|err| {
        log::warn!("window ending at {:?} s: {err}", end.to_f64());
        MlFitResult {
            alpha: T::nan(),
            a: T::nan(),
            y0: T::nan(),
            sse: T::nan(),
            n_samples: ts.window_indices(end).len(),
            iterations: 0,
            converged: false,
        }
    })
}

/// Fit every window `[0, t]` of the schedule.
///
/// Windows whose fit fails or does not converge stay in the profile with their
/// flag cleared; a failed window has NaN parameters.
pub fn estimate_variable_order<T: Real>(
    ts: &TimeSeries<T>,
    schedule: &[T],
    opts: &VarOrderOptions<T>,
) -> Result<VarOrderProfile<T>, VarOrderError> {
    check_schedule(schedule)?;
    let last = schedule[schedule.len() - 1];
    if ts.t_end() < last - ts.dt * T::lit(1e-6) {
        return Err(VarOrderError::Coverage {
            have: ts.t_end().to_f64().unwrap_or(f64::NAN),
            need: last.to_f64().unwrap_or(f64::NAN),
        });
    }
    let first = ts.window_indices(schedule[0]).len();
    if first < MIN_WINDOW_SAMPLES {
        return Err(FitError::Window {
            end: schedule[0].to_f64().unwrap_or(f64::NAN),
            have: first,
        }
        .into());
    }

    let fits: Vec<MlFitResult<T>> = if opts.warm_start {
        let mut fits = Vec::with_capacity(schedule.len());
        let mut prev: Option<InitialGuess<T>> = None;
        for &end in schedule {
            let fit = fit_window(ts, end, prev, &opts.fit);
            if fit.converged || prev.is_none() {
                prev = Some(fit.guess()).filter(|g| g.alpha.is_finite());
            }
            fits.push(fit);
        }
        fits
    } else {
        schedule.par_iter().map(|&end| fit_window(ts, end, None, &opts.fit)).collect()
    };
    Ok(VarOrderProfile::from_fits(schedule, &fits))
}
