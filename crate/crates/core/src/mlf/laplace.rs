//! Inversion of the Laplace transform `s^{α-β} / (s^α - z)` along an optimal
//! parabolic contour `s(u) = μ (1 + iu)^2`, with residues of the poles lying
//! to the right of the contour added explicitly.
//!
//! The contour parameters (μ, h, N) are chosen so that discretisation and
//! truncation errors balance at the requested accuracy while keeping
//! round-off under control; the region between consecutive singularities that
//! needs the fewest nodes wins.

use num_complex::Complex;

use crate::Real;

/// Node count above which the accuracy target is relaxed by a decade.
pub(crate) const MAX_NODES: usize = 200;

/// Quadrature rule on one parabolic contour.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Contour<T> {
    pub mu: T,
    pub h: T,
    pub n: usize,
}

impl<T: Real> Contour<T> {
    /// Node `k` (|k| ≤ n): position s and derivative ds/du.
    #[inline]
    pub fn node(&self, k: isize) -> (Complex<T>, Complex<T>) {
        let u = self.h * T::from_isize(k).unwrap();
        let s = Complex::new(T::one(), u).powu(2) * self.mu;
        let ds = Complex::new(-T::lit(2.0) * self.mu * u, T::lit(2.0) * self.mu);
        (s, ds)
    }
}

/// Result of a contour inversion.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Inversion<T> {
    pub value: Complex<T>,
    /// False when the accuracy target had to be relaxed.
    pub certified: bool,
}

fn ln_eps<T: Real>() -> T {
    T::epsilon().ln()
}

/// Parameters for a bounded region between singularities at φ_j < φ_{j+1}
/// of strengths p (left) and q (right). `None` when the region is not usable.
pub(crate) fn optimal_bounded<T: Real>(phi_j: T, phi_j1: T, p: T, q: T, ln_target: T) -> Option<Contour<T>> {
    let small = T::lit(1e-14);
    let fac = T::lit(1.01);
    let ln_eps = ln_eps::<T>();
    let two = T::lit(2.0);
    let f_max = (ln_target - ln_eps).exp();

    let sq_phi_j = phi_j.sqrt();
    let threshold = two * (ln_target - ln_eps).sqrt();
    let sq_phi_j1 = phi_j1.sqrt().min(threshold - sq_phi_j);

    let (sq_bar_j, sq_bar_j1, f_bar) = if p < small && q < small {
        (sq_phi_j, sq_phi_j1, T::one())
    } else if p < small {
        let f_min = if sq_phi_j > T::zero() {
            fac * (sq_phi_j / (sq_phi_j1 - sq_phi_j)).powf(q)
        } else {
            fac
        };
        if f_min >= f_max {
            return None;
        }
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fq = f_bar.powf(-T::one() / q);
        (sq_phi_j, (two * sq_phi_j1 - fq * sq_phi_j) / (two + fq), f_bar)
    } else if q < small {
        let f_min = fac * (sq_phi_j1 / (sq_phi_j1 - sq_phi_j)).powf(p);
        if f_min >= f_max {
            return None;
        }
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-T::one() / p);
        ((two * sq_phi_j + fp * sq_phi_j1) / (two - fp), sq_phi_j1, f_bar)
    } else {
        let f_min = fac * (sq_phi_j + sq_phi_j1) / (sq_phi_j1 - sq_phi_j).powf(p.max(q));
        if f_min >= f_max {
            return None;
        }
        let f_min = f_min.max(T::lit(1.5));
        let f_bar = f_min + f_min / f_max * (f_max - f_min);
        let fp = f_bar.powf(-T::one() / p);
        let fq = f_bar.powf(-T::one() / q);
        let w = -phi_j1 / ln_target;
        let den = two + w - (T::one() + w) * fp + fq;
        let a = ((two + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
        let b = (-(T::one() + w) * fq * sq_phi_j + (two + w - (T::one() + w) * fp) * sq_phi_j1) / den;
        (a, b, f_bar)
    };

    let ln_target = ln_target - f_bar.ln();
    let w = -sq_bar_j1 * sq_bar_j1 / ln_target;
    let mu = (((T::one() + w) * sq_bar_j + sq_bar_j1) / (two + w)).powi(2);
    let h = -T::TAU() / ln_target * (sq_bar_j1 - sq_bar_j) / ((T::one() + w) * sq_bar_j + sq_bar_j1);
    let n = (T::one() - ln_target / mu).sqrt() / h;
    finite_contour(mu, h, n.ceil())
}

/// Parameters for the unbounded region right of the singularity at φ_j
/// of strength p.
pub(crate) fn optimal_unbounded<T: Real>(phi_j: T, p: T, ln_target: T) -> Option<Contour<T>> {
    let small = T::lit(1e-14);
    let sq_phi_j = phi_j.sqrt();
    let mut phi_bar = if phi_j > T::zero() { phi_j * T::lit(1.01) } else { T::lit(0.01) };
    let mut sq_phi_bar = phi_bar.sqrt();
    let (f_min, f_max, f_tar) = (T::one(), T::lit(10.0), T::lit(5.0));

    let mut n;
    let mut a;
    let mut sq_mu;
    let mut guard = 0;
    loop {
        let phi_t = phi_bar;
        let ln_eps_phi_t = ln_target / phi_t;
        n = (phi_t / T::PI()
            * (T::one() - T::lit(1.5) * ln_eps_phi_t + (T::one() - T::lit(2.0) * ln_eps_phi_t).sqrt()))
        .ceil();
        a = T::PI() * n / phi_t;
        sq_mu = sq_phi_bar * (T::lit(4.0) - a).abs() / (T::lit(7.0) - (T::one() + T::lit(12.0) * a).sqrt()).abs();
        let f_bar = ((sq_phi_bar - sq_phi_j) / sq_mu).powf(-p);
        let done = p < small || (f_min < f_bar && f_bar < f_max);
        guard += 1;
        if done || guard > 100 {
            break;
        }
        sq_phi_bar = f_tar.powf(-T::one() / p) * sq_mu + sq_phi_j;
        phi_bar = sq_phi_bar * sq_phi_bar;
    }
    let mut mu = sq_mu * sq_mu;
    let mut h = (-T::lit(3.0) * a - T::lit(2.0) + T::lit(2.0) * (T::one() + T::lit(12.0) * a).sqrt())
        / (T::lit(4.0) - a)
        / n;

    // keep round-off under control: cap μ
    let ln_eps = ln_eps::<T>();
    let threshold = ln_target - ln_eps;
    if mu > threshold {
        let q = if p.abs() < small { T::zero() } else { f_tar.powf(-T::one() / p) * mu.sqrt() };
        let phi_bar = (q + sq_phi_j).powi(2);
        if phi_bar < threshold {
            let w = (ln_eps / (ln_eps - ln_target)).sqrt();
            let u = (-phi_bar / ln_eps).sqrt();
            mu = threshold;
            n = (w * ln_target / T::TAU() / (u * w - T::one())).ceil();
            h = w / n;
        } else {
            return None;
        }
    }
    finite_contour(mu, h, n)
}

fn finite_contour<T: Real>(mu: T, h: T, n: T) -> Option<Contour<T>> {
    if !(mu.is_finite() && h.is_finite() && n.is_finite()) || mu <= T::zero() || h <= T::zero() || n < T::one() {
        return None;
    }
    Some(Contour { mu, h, n: n.to_usize()? })
}

/// Evaluates `E_{α,β}(z)` by contour inversion at accuracy `target`.
///
/// `real_argument` selects the conjugate-symmetric summation; the returned
/// value then has an exactly zero imaginary part.
pub(crate) fn invert<T: Real>(alpha: T, beta: T, z: Complex<T>, target: T, real_argument: bool) -> Inversion<T> {
    let two_pi = T::TAU();
    let theta = z.arg();
    let abs_z = z.norm();

    // poles s* = |z|^{1/α} e^{i(θ + 2kπ)/α} on the principal sheet
    let k_min = (-alpha / T::lit(2.0) - theta / two_pi).ceil().to_i64().unwrap_or(0);
    let k_max = (alpha / T::lit(2.0) - theta / two_pi).floor().to_i64().unwrap_or(-1);
    let radius = abs_z.powf(T::one() / alpha);
    let mut poles: Vec<(T, Complex<T>)> = (k_min..=k_max)
        .map(|k| {
            let angle = (theta + two_pi * T::from_i64(k).unwrap()) / alpha;
            let s = Complex::from_polar(radius, angle);
            ((s.re + s.norm()) / T::lit(2.0), s)
        })
        .filter(|(phi, _)| *phi > T::lit(1e-15))
        .collect();
    poles.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    // singularities: origin followed by the poles, sorted by φ
    let mut phi: Vec<T> = std::iter::once(T::zero()).chain(poles.iter().map(|p| p.0)).collect();
    let n_sing = phi.len();
    let mut p_strength = vec![T::one(); n_sing];
    p_strength[0] = T::zero().max(-T::lit(2.0) * (alpha - beta + T::one()));
    let mut q_strength = vec![T::one(); n_sing];
    q_strength[n_sing - 1] = T::infinity();
    phi.push(T::infinity());

    let ln_eps = ln_eps::<T>();
    let mut ln_target = target.ln();
    let mut certified = true;
    let (region, contour) = loop {
        let best = (0..n_sing)
            .filter(|&j| phi[j] < ln_target - ln_eps && phi[j] < phi[j + 1])
            .filter_map(|j| {
                let c = if j + 1 < n_sing {
                    optimal_bounded(phi[j], phi[j + 1], p_strength[j], q_strength[j], ln_target)
                } else {
                    optimal_unbounded(phi[j], p_strength[j], ln_target)
                };
                c.map(|c| (j, c))
            })
            .min_by_key(|(_, c)| c.n);
        match best {
            Some((j, c)) if c.n <= MAX_NODES => break (j, c),
            _ if ln_target < T::zero() => {
                ln_target = ln_target + T::LN_10();
                certified = false;
            }
            _ => {
                return Inversion {
                    value: Complex::new(T::nan(), T::nan()),
                    certified: false,
                }
            }
        }
    };

    let integrand = |k: isize| {
        let (s, ds) = contour.node(k);
        s.exp() * s.powf(alpha - beta) / (s.powf(alpha) - z) * ds
    };
    let integral = if real_argument {
        let mut acc = integrand(0).im;
        for k in 1..=contour.n as isize {
            acc = acc + T::lit(2.0) * integrand(k).im;
        }
        Complex::new(contour.h * acc / two_pi, T::zero())
    } else {
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in -(contour.n as isize)..=contour.n as isize {
            acc = acc + integrand(k);
        }
        acc * contour.h / Complex::new(T::zero(), two_pi)
    };

    let residues = poles[region..].iter().fold(Complex::new(T::zero(), T::zero()), |acc, (_, s)| {
        acc + s.powf(T::one() - beta) * s.exp() / alpha
    });
    let mut value = integral + residues;
    if real_argument {
        value.im = T::zero();
    }
    Inversion {
        value,
        certified: certified && value.re.is_finite() && value.im.is_finite(),
    }
}
