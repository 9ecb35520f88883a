//! Least-squares fit of `y(t) = y0 · E_{α,1}(a tᵅ)` to a sampled signal.
//!
//! This is the solution of `D^α y = a y`, `y(0) = y0` (Caputo derivative,
//! `0 < α ≤ 1`), so a fit identifies the order and rate of a two-term
//! fractional relaxation together with its initial value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mlf::{mlf_eval_real, MlParams, MlfError, RelaxationKernel};
use crate::timesim::TimeSeries;
use crate::Real;

/// Fewest samples a fit window may hold.
pub const MIN_WINDOW_SAMPLES: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("window [0, {end}] holds {have} samples, need at least {MIN_WINDOW_SAMPLES}")]
    Window { end: f64, have: usize },
    #[error("model parameters out of range: alpha = {alpha}, a = {a}, y0 = {y0}")]
    Parameters { alpha: f64, a: f64, y0: f64 },
    #[error("time {0} is negative or not finite")]
    Time(f64),
    #[error(transparent)]
    Mlf(#[from] MlfError),
    #[error("Mittag-Leffler value at t = {0} could not be certified")]
    Accuracy(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions<T> {
    /// Largest vertex distance (max norm) from the best vertex at convergence.
    pub xtol: T,
    /// Largest spread of objective values at convergence, relative once the
    /// best value exceeds 1.
    pub ftol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for NelderMeadOptions<T> {
    fn default() -> Self {
        Self {
            xtol: T::lit(1e-8),
            ftol: T::lit(1e-12),
            max_iter: 5000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult<T> {
    pub x: Vec<T>,
    pub f: T,
    pub iterations: usize,
    pub converged: bool,
}

fn sanitize<T: Real>(v: T) -> T {
    if v.is_nan() {
        T::infinity()
    } else {
        v
    }
}

/// Simplex around `x0` with offsets of 5 % per coordinate (0.00025 for zeros).
pub fn default_steps<T: Real>(x0: &[T]) -> Vec<T> {
    x0.iter()
        .map(|&x| if x == T::zero() { T::lit(0.000_25) } else { T::lit(0.05) * x })
        .collect()
}

/// Nelder–Mead with reflection 1, expansion 2, contraction 0.5 and shrink 0.5.
/// NaN objective values count as `+∞`.
pub fn nelder_mead<T: Real>(
    mut objective: impl FnMut(&[T]) -> T,
    x0: &[T],
    steps: &[T],
    opts: &NelderMeadOptions<T>,
) -> NelderMeadResult<T> {
    let n = x0.len();
    assert_eq!(steps.len(), n, "one initial step per coordinate");
    let mut f = |x: &[T]| sanitize(objective(x));
    let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] = v[i] + steps[i];
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let order = |s: &mut Vec<(Vec<T>, T)>| s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    let along = |from: &[T], to: &[T], t: T| -> Vec<T> { from.iter().zip(to).map(|(&a, &b)| a + t * (b - a)).collect() };

    let mut iterations = 0;
    let mut converged = false;
    loop {
        order(&mut simplex);
        let best = &simplex[0];
        let diameter = simplex[1..].iter().fold(T::zero(), |d, (v, _)| {
            v.iter().zip(&best.0).fold(d, |d, (&a, &b)| d.max((a - b).abs()))
        });
        let spread = simplex[n].1 - best.1;
        if diameter < opts.xtol && spread <= opts.ftol * best.1.abs().max(T::one()) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let mut centroid = vec![T::zero(); n];
        for (v, _) in &simplex[..n] {
            for (c, &x) in centroid.iter_mut().zip(v) {
                *c = *c + x;
            }
        }
        let inv_n = T::one() / T::from_count(n);
        centroid.iter_mut().for_each(|c| *c = *c * inv_n);

        let worst = simplex[n].clone();
        let xr = along(&centroid, &worst.0, -T::one());
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(&centroid, &worst.0, -T::lit(2.0));
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        // outside contraction towards the reflected point, inside towards the worst
        let outside = fr < worst.1;
        let xc = along(&centroid, if outside { &xr } else { &worst.0 }, T::lit(0.5));
        let fc = f(&xc);
        if (outside && fc <= fr) || (!outside && fc < worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v = along(&anchor, &vertex.0, T::lit(0.5));
            let fv = f(&v);
            *vertex = (v, fv);
        }
    }
    let (x, f) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        f,
        iterations,
        converged,
    }
}

/// Starting point for [`fit_ml`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess<T> {
    pub alpha: T,
    pub a: T,
    pub y0: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    pub simplex: NelderMeadOptions<T>,
    /// Retry from other orders when the first fit is poor.
    pub multistart: bool,
    /// Accuracy of the Mittag-Leffler evaluations inside the objective.
    pub mlf_tol: T,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            simplex: NelderMeadOptions {
                xtol: T::lit(1e-9),
                ftol: T::lit(1e-12),
                max_iter: 4000,
            },
            multistart: true,
            mlf_tol: T::lit(1e-14),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlFitResult<T> {
    pub alpha: T,
    pub a: T,
    pub y0: T,
    pub sse: T,
    pub n_samples: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> MlFitResult<T> {
    pub fn guess(&self) -> InitialGuess<T> {
        InitialGuess {
            alpha: self.alpha,
            a: self.a,
            y0: self.y0,
        }
    }
}

fn check_params<T: Real>(alpha: T, a: T, y0: T) -> Result<(), FitError> {
    if alpha > T::zero() && alpha < T::lit(2.0) && a.is_finite() && y0.is_finite() {
        Ok(())
    } else {
        Err(FitError::Parameters {
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
            a: a.to_f64().unwrap_or(f64::NAN),
            y0: y0.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// `y0 · E_{α,1}(a tᵅ)` at each `t`; `t = 0` gives `y0` exactly.
pub fn model_eval<T: Real>(alpha: T, a: T, y0: T, t_grid: &[T]) -> Result<Vec<T>, FitError> {
    check_params(alpha, a, y0)?;
    let tol = T::lit(1e-13).max(T::lit(4.0) * T::epsilon());
    let params = MlParams::relaxation(alpha)?;
    t_grid
        .iter()
        .map(|&t| {
            if !(t >= T::zero() && t.is_finite()) {
                return Err(FitError::Time(t.to_f64().unwrap_or(f64::NAN)));
            }
            if t == T::zero() {
                return Ok(y0);
            }
            let v = mlf_eval_real(&params, a * t.powf(alpha), tol)?;
            if !v.certified {
                return Err(FitError::Accuracy(t.to_f64().unwrap_or(f64::NAN)));
            }
            Ok(y0 * v.value)
        })
        .collect()
}

/// Samples of the window with precomputed `ln t`.
struct Window<T> {
    ln_t: Vec<Option<T>>,
    y: Vec<T>,
}

impl<T: Real> Window<T> {
    fn sse(&self, alpha: T, a: T, y0: T, tol: T) -> T {
        let Ok(e) = MlParams::relaxation(alpha).and_then(|p| RelaxationKernel::new(p, tol)) else {
            return T::infinity();
        };
        let mut acc = T::zero();
        for (lt, &y) in self.ln_t.iter().zip(&self.y) {
            let m = match lt {
                None => y0,
                Some(lt) => y0 * e.eval(-a * (alpha * *lt).exp()),
            };
            let r = y - m;
            acc = acc + r * r;
        }
        acc
    }
}

fn to_search<T: Real>(g: &InitialGuess<T>) -> Vec<T> {
    let half = g.alpha / T::lit(2.0);
    vec![(half / (T::one() - half)).ln(), (-g.a).ln(), g.y0]
}

fn from_search<T: Real>(u: &[T]) -> (T, T, T) {
    let alpha = T::lit(2.0) / (T::one() + (-u[0]).exp());
    (alpha, -u[1].exp(), u[2])
}

fn window<T: Real>(ts: &TimeSeries<T>, window_end: T) -> Result<(Vec<T>, Vec<T>), FitError> {
    let idx = ts.window_indices(window_end);
    if idx.len() < MIN_WINDOW_SAMPLES {
        return Err(FitError::Window {
            end: window_end.to_f64().unwrap_or(f64::NAN),
            have: idx.len(),
        });
    }
    let t = idx.clone().map(|k| ts.time(k).max(T::zero())).collect();
    Ok((t, ts.samples[idx].to_vec()))
}

/// α₀ = 0.5, y0₀ = first sample, a₀ from the drop over the first step.
pub fn default_guess<T: Real>(t: &[T], y: &[T]) -> InitialGuess<T> {
    let y0 = y[0];
    let mut a = -(T::one() - y[1] / y[0]) / (t[1] - t[0]).max(T::epsilon()).sqrt();
    if !(a < T::zero() && a.is_finite()) {
        // no visible decay over the first step: one unit of change over the window
        a = -T::one() / t[t.len() - 1].max(T::epsilon()).sqrt();
    }
    InitialGuess {
        alpha: T::lit(0.5),
        a,
        y0: if y0.is_finite() { y0 } else { T::one() },
    }
}

fn usable<T: Real>(g: &InitialGuess<T>) -> bool {
    g.alpha > T::zero() && g.alpha < T::lit(2.0) && g.a < T::zero() && g.a.is_finite() && g.y0.is_finite()
}

/// Fit `y0 · E_{α,1}(a tᵅ)` to the samples with `0 ≤ t ≤ window_end`.
///
/// Non-convergence is reported through `converged`, never as an error.
pub fn fit_ml<T: Real>(
    ts: &TimeSeries<T>,
    window_end: T,
    init: Option<InitialGuess<T>>,
    opts: &FitOptions<T>,
) -> Result<MlFitResult<T>, FitError> {
    let (t, y) = window(ts, window_end)?;
    let scale = y.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    // amplitudes are fitted in units of the largest sample
    let scale = if scale > T::zero() && scale.is_finite() { scale } else { T::one() };
    let data = Window {
        ln_t: t.iter().map(|&t| (t > T::zero()).then(|| t.ln())).collect(),
        y: y.iter().map(|&v| v / scale).collect(),
    };
    let energy = data.y.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let fallback = default_guess(&t, &data.y);
    let first = match init {
        Some(g) if usable(&g) => InitialGuess { y0: g.y0 / scale, ..g },
        _ => fallback,
    };

    let run = |g: InitialGuess<T>| -> (NelderMeadResult<T>, usize) {
        let objective = |u: &[T]| {
            let (alpha, a, y0) = from_search(u);
            data.sse(alpha, a, y0, opts.mlf_tol)
        };
        let x0 = to_search(&g);
        let steps = [T::lit(0.3), T::lit(0.3), T::lit(0.05) * g.y0.abs().max(T::lit(0.1))];
        let mut r = nelder_mead(objective, &x0, &steps, &opts.simplex);
        let mut total = r.iterations;
        // a fresh simplex at the optimum guards against premature collapse
        if r.f.is_finite() {
            let again = nelder_mead(objective, &r.x, &steps.map(|s| s * T::lit(0.1)), &opts.simplex);
            total += again.iterations;
            if again.f <= r.f {
                r = NelderMeadResult { iterations: total, ..again };
            }
        }
        (r, total)
    };

    let (mut best, mut iterations) = run(first);
    if opts.multistart && (!best.converged || !(best.f <= T::lit(1e-3) * energy)) {
        for alpha0 in [0.25, 0.75, 1.0] {
            let (r, its) = run(InitialGuess {
                alpha: T::lit(alpha0),
                ..fallback
            });
            iterations += its;
            if r.f < best.f || (!best.converged && r.converged && r.f <= best.f) {
                best = r;
            }
        }
    }
    let (alpha, a, y0n) = from_search(&best.x);
    let y0 = y0n * scale;
    Ok(MlFitResult {
        alpha,
        a,
        y0,
        sse: best.f * scale * scale,
        n_samples: t.len(),
        iterations,
        converged: best.converged,
    })
}

/// `y_k - model(t_k)` over the fit window.
pub fn residual_series<T: Real>(ts: &TimeSeries<T>, result: &MlFitResult<T>, window_end: T) -> Result<Vec<T>, FitError> {
    let idx = ts.window_indices(window_end);
    if idx.is_empty() {
        return Err(FitError::Window {
            end: window_end.to_f64().unwrap_or(f64::NAN),
            have: 0,
        });
    }
    let t: Vec<T> = idx.clone().map(|k| ts.time(k).max(T::zero())).collect();
    let model = model_eval(result.alpha, result.a, result.y0, &t)?;
    Ok(ts.samples[idx].iter().zip(model).map(|(&y, m)| y - m).collect())
}
