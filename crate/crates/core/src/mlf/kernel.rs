use std::sync::OnceLock;

use num_complex::Complex;

use super::gamma::recip_gamma;
use super::laplace::{invert, optimal_bounded, optimal_unbounded, Contour};
use super::{MlParams, MlfError};
use crate::Real;

/// Pole buckets for α > 1 cover φ ∈ [2^MIN_OCTAVE, 2^MAX_OCTAVE); beyond the
/// ends the outermost contour is reused.
const MIN_OCTAVE: i32 = -24;
const MAX_OCTAVE: i32 = 8;

/// Quadrature nodes of one contour: (weight, s^α) per node, k = 0..=N, with
/// the conjugate-symmetry factor folded in.
#[derive(Debug, Clone)]
struct Rule<T> {
    nodes: Vec<(Complex<T>, Complex<T>)>,
    scale: T,
    /// The pole pair lies right of this contour and contributes residues.
    residues: bool,
}

impl<T: Real> Rule<T> {
    fn new(contour: Contour<T>, alpha: T, beta: T, residues: bool) -> Self {
        let nodes = (0..=contour.n as isize)
            .map(|k| {
                let (s, ds) = contour.node(k);
                let fold = if k == 0 { T::one() } else { T::lit(2.0) };
                (s.exp() * s.powf(alpha - beta) * ds * fold, s.powf(alpha))
            })
            .collect();
        Self {
            nodes,
            scale: contour.h / T::TAU(),
            residues,
        }
    }

    #[inline]
    fn integral(&self, x: T) -> T {
        let mut acc = T::zero();
        for (w, sa) in &self.nodes {
            // Im(w / (s^α + x))
            let d_re = sa.re + x;
            let d_im = sa.im;
            acc = acc + (w.im * d_re - w.re * d_im) / (d_re * d_re + d_im * d_im);
        }
        self.scale * acc
    }
}

/// Prepared evaluator of `x ↦ E_{α,β}(-x)` for `x ≥ 0` and `0 < α < 2`.
///
/// For α ≤ 1 the Laplace-transform integrand has no pole off the branch cut,
/// so a single contour serves every argument: the node weights are computed
/// once and each evaluation is a short real-valued sum. For α > 1 the pole
/// pair `x^{1/α} e^{±iπ/α}` moves with `x`; contours are then prepared per
/// octave of the pole's parabolic abscissa, on first use.
#[derive(Debug)]
pub struct RelaxationKernel<T> {
    params: MlParams<T>,
    at_origin: T,
    single: Option<Rule<T>>,
    octaves: Vec<OnceLock<Option<Rule<T>>>>,
    target: T,
}

impl<T: Real> Clone for RelaxationKernel<T> {
    fn clone(&self) -> Self {
        Self {
            params: self.params,
            at_origin: self.at_origin,
            single: self.single.clone(),
            octaves: self
                .octaves
                .iter()
                .map(|c| c.get().cloned().map_or_else(OnceLock::new, OnceLock::from))
                .collect(),
            target: self.target,
        }
    }
}

impl<T: Real> RelaxationKernel<T> {
    pub fn new(params: MlParams<T>, tol: T) -> Result<Self, MlfError> {
        super::check_tol(tol)?;
        let (alpha, beta) = (params.alpha(), params.beta());
        let bad_order = || MlfError::KernelOrder(alpha.to_f64().unwrap_or(f64::NAN));
        if alpha >= T::lit(2.0) {
            return Err(bad_order());
        }
        let target = super::internal_target(tol);
        let single = if alpha <= T::one() {
            let p = T::zero().max(-T::lit(2.0) * (alpha - beta + T::one()));
            let contour = optimal_unbounded(T::zero(), p, target.ln()).ok_or_else(bad_order)?;
            Some(Rule::new(contour, alpha, beta, false))
        } else {
            None
        };
        let octaves = if single.is_some() {
            Vec::new()
        } else {
            (MIN_OCTAVE..=MAX_OCTAVE).map(|_| OnceLock::new()).collect()
        };
        Ok(Self {
            params,
            at_origin: recip_gamma(beta),
            single,
            octaves,
            target,
        })
    }

    pub fn params(&self) -> MlParams<T> {
        self.params
    }

    /// Contour for poles with abscissa in `[2^o, 2^{o+1})`: either right of
    /// the whole octave, or between the origin and the octave with the poles'
    /// residues added, whichever needs fewer nodes.
    fn octave_rule(&self, o: i32) -> Option<Rule<T>> {
        let (alpha, beta) = (self.params.alpha(), self.params.beta());
        let ln_target = self.target.ln();
        let lo = T::lit(2.0).powi(o);
        let hi = lo * T::lit(2.0);
        let p0 = T::zero().max(-T::lit(2.0) * (alpha - beta + T::one()));
        let right = optimal_unbounded(hi, T::one(), ln_target).map(|c| (c, false));
        let left = optimal_bounded(T::zero(), lo, p0, T::one(), ln_target).map(|c| (c, true));
        let (contour, residues) = match (right, left) {
            (Some(r), Some(l)) => {
                if l.0.n < r.0.n {
                    l
                } else {
                    r
                }
            }
            (r, l) => r.or(l)?,
        };
        (contour.n <= super::laplace::MAX_NODES).then(|| Rule::new(contour, alpha, beta, residues))
    }

    /// `E_{α,β}(-x)`; `x` must be non-negative.
    #[inline]
    pub fn eval(&self, x: T) -> T {
        if x == T::zero() {
            return self.at_origin;
        }
        if let Some(rule) = &self.single {
            return rule.integral(x);
        }
        let alpha = self.params.alpha();
        let angle = T::PI() / alpha;
        let radius = x.powf(T::one() / alpha);
        let phi = radius * (angle / T::lit(2.0)).cos().powi(2);
        let octave = (phi.log2().floor().to_i32().unwrap_or(MIN_OCTAVE)).clamp(MIN_OCTAVE, MAX_OCTAVE);
        let slot = &self.octaves[(octave - MIN_OCTAVE) as usize];
        let Some(rule) = slot.get_or_init(|| self.octave_rule(octave)) else {
            let beta = self.params.beta();
            return invert(alpha, beta, Complex::new(-x, T::zero()), self.target, true).value.re;
        };
        let mut value = rule.integral(x);
        if rule.residues {
            let s = Complex::from_polar(radius, angle);
            let beta = self.params.beta();
            value = value + T::lit(2.0) / alpha * (s.powf(T::one() - beta) * s.exp()).re;
        }
        value
    }
}
