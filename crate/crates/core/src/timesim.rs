//! Time-domain simulation of ladder networks.
//!
//! Nodal analysis gives `C dv/dt = -G v + b u` over all circuit nodes. Nodes
//! without a capacitor (the terminal and sub-ladder junctions) carry no state
//! and are eliminated by a Schur complement, leaving a symmetric positive
//! semi-definite conductance `G_red` over the capacitor voltages. Then
//! `A = -C⁻¹ G_red` is similar to the symmetric `-C^{-1/2} G_red C^{-1/2}`, so
//! its exponential is exact through a real orthogonal eigenbasis and each
//! time step costs O(n) in modal coordinates.

use nalgebra::{Cholesky, DMatrix, DVector, RowDVector, SymmetricEigen};
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{count_states, validate, LadderSpec, ShuntElement};
use crate::LinalgReal;

/// Largest state dimension simulated.
pub const MAX_STATES: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid ladder: {0}")]
    InvalidSpec(String),
    #[error("{0} states exceed the limit of {MAX_STATES}")]
    Size(usize),
    #[error("{name} is out of range: {value}")]
    Argument { name: &'static str, value: f64 },
    #[error("resistive sub-network is singular")]
    Singular,
}

fn arg_err<T: LinalgReal>(name: &'static str, value: T) -> SimError {
    SimError::Argument {
        name,
        value: value.to_f64().unwrap_or(f64::NAN),
    }
}

/// Uniformly sampled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::Real")]
pub struct TimeSeries<T> {
    pub t0: T,
    pub dt: T,
    pub samples: Vec<T>,
}

impl<T: crate::Real> TimeSeries<T> {
    pub fn new(t0: T, dt: T, samples: Vec<T>) -> Option<Self> {
        (dt > T::zero() && dt.is_finite() && t0.is_finite() && !samples.is_empty()).then_some(Self { t0, dt, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> T {
        self.t0 + self.dt * T::from_count(k)
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    pub fn t_end(&self) -> T {
        self.time(self.len() - 1)
    }

    /// Sample indices with `0 ≤ t ≤ end`, allowing for rounding in the grid.
    pub fn window_indices(&self, end: T) -> std::ops::Range<usize> {
        let slack = self.dt * T::lit(1e-6);
        let first = (0..self.len()).find(|&k| self.time(k) >= -slack).unwrap_or(self.len());
        let last = (first..self.len()).take_while(|&k| self.time(k) <= end + slack).last();
        match last {
            Some(l) => first..l + 1,
            None => first..first,
        }
    }
}

/// How the ladder terminal is driven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive<T> {
    /// Voltage source behind a series resistance; zero means the terminal is the source.
    Voltage { r_source: T },
    /// Current injected into the terminal; the output is then the terminal voltage per unit current.
    Current,
}

/// `dx/dt = A x + B u`, `y = Cout x + D u`, with `x` the capacitor voltages.
#[derive(Debug, Clone)]
pub struct StateSpace<T: LinalgReal> {
    pub a: DMatrix<T>,
    pub b: DVector<T>,
    pub c_out: RowDVector<T>,
    pub d: T,
    capacitance: DVector<T>,
    conductance: DMatrix<T>,
    injection: DVector<T>,
}

struct Netlist<T> {
    /// Capacitance per node; `None` for purely resistive nodes. Node 0 is the terminal.
    cap: Vec<Option<T>>,
    edges: Vec<(usize, usize, T)>,
    /// Capacitor nodes in state order.
    states: Vec<usize>,
}

impl<T: LinalgReal> Netlist<T> {
    fn new(spec: &LadderSpec<T>) -> Self {
        let mut net = Self {
            cap: vec![None],
            edges: Vec::new(),
            states: Vec::new(),
        };
        net.add_ladder(spec, 0);
        net
    }

    fn add_ladder(&mut self, spec: &LadderSpec<T>, terminal: usize) {
        let mut prev = terminal;
        let mut nodes = Vec::with_capacity(spec.steps.len());
        for step in &spec.steps {
            let node = self.cap.len();
            self.cap.push(match step.shunt {
                ShuntElement::Capacitor(c) => Some(c),
                ShuntElement::SubLadder(_) => None,
            });
            self.edges.push((prev, node, T::one() / step.r));
            nodes.push(node);
            prev = node;
        }
        // this level's capacitors first, then each sub-ladder in step order
        for (step, &node) in spec.steps.iter().zip(&nodes) {
            if let ShuntElement::Capacitor(_) = step.shunt {
                self.states.push(node);
            }
        }
        for (step, &node) in spec.steps.iter().zip(&nodes) {
            if let ShuntElement::SubLadder(sub) = &step.shunt {
                self.add_ladder(sub, node);
            }
        }
    }
}

impl<T: LinalgReal> StateSpace<T> {
    /// Voltage-driven ladder: input is the source voltage, output the terminal voltage.
    pub fn build(spec: &LadderSpec<T>, r_source: T) -> Result<Self, SimError> {
        if !(r_source >= T::zero() && Float::is_finite(r_source)) {
            return Err(arg_err("r_source", r_source));
        }
        Self::assemble(spec, Drive::Voltage { r_source })
    }

    pub fn assemble(spec: &LadderSpec<T>, drive: Drive<T>) -> Result<Self, SimError> {
        if let Some(v) = validate(spec).into_iter().next() {
            return Err(SimError::InvalidSpec(v.to_string()));
        }
        let n = count_states(spec);
        if n > MAX_STATES {
            return Err(SimError::Size(n));
        }
        let net = Netlist::new(spec);
        let n_nodes = net.cap.len();

        // unknown node indices: every node except a directly driven terminal
        let driven = matches!(drive, Drive::Voltage { r_source } if r_source == T::zero());
        let mut slot = vec![usize::MAX; n_nodes];
        let mut resistive = Vec::new();
        for (i, &node) in net.states.iter().enumerate() {
            slot[node] = i;
        }
        for node in 0..n_nodes {
            if net.cap[node].is_none() && !(driven && node == 0) {
                slot[node] = n + resistive.len();
                resistive.push(node);
            }
        }
        let m = n + resistive.len();
        let mut g = DMatrix::<T>::zeros(m, m);
        let mut inj = DVector::<T>::zeros(m);
        for &(i, j, gij) in &net.edges {
            for (p, q) in [(i, j), (j, i)] {
                if slot[p] == usize::MAX {
                    // p is the driven terminal: its voltage is the input
                    inj[slot[q]] += gij;
                    continue;
                }
                g[(slot[p], slot[p])] += gij;
                if slot[q] != usize::MAX {
                    g[(slot[p], slot[q])] -= gij;
                }
            }
        }
        match drive {
            Drive::Voltage { r_source } if r_source > T::zero() => {
                let gs = T::one() / r_source;
                g[(slot[0], slot[0])] += gs;
                inj[slot[0]] += gs;
            }
            Drive::Current => inj[slot[0]] += T::one(),
            _ => {}
        }

        let g_cc = g.view((0, 0), (n, n)).into_owned();
        let (conductance, injection, c_out, d) = if resistive.is_empty() {
            (g_cc, inj.rows(0, n).into_owned(), RowDVector::zeros(n), T::one())
        } else {
            let r = resistive.len();
            let g_rr = g.view((n, n), (r, r)).into_owned();
            let g_rc = g.view((n, 0), (r, n)).into_owned();
            let chol = Cholesky::new(g_rr).ok_or(SimError::Singular)?;
            // resistive voltages: v_r = K_u u - K_x v_c
            let k_x = chol.solve(&g_rc);
            let k_u = chol.solve(&inj.rows(n, r).into_owned());
            let g_red = &g_cc - g_rc.transpose() * &k_x;
            let inj_red = inj.rows(0, n).into_owned() - g_rc.transpose() * &k_u;
            let t = slot[0] - n;
            if driven {
                (g_red, inj_red, RowDVector::zeros(n), T::one())
            } else {
                (g_red, inj_red, -k_x.row(t).into_owned(), k_u[t])
            }
        };
        let conductance = (&conductance + conductance.transpose()) * T::lit(0.5);
        let capacitance = DVector::from_iterator(n, net.states.iter().map(|&node| net.cap[node].unwrap_or(T::one())));
        let mut a = -conductance.clone();
        let mut b = injection.clone();
        for i in 0..n {
            let ci = capacitance[i];
            a.row_mut(i).unscale_mut(ci);
            b[i] /= ci;
        }
        Ok(Self {
            a,
            b,
            c_out,
            d,
            capacitance,
            conductance,
            injection,
        })
    }

    pub fn n_states(&self) -> usize {
        self.b.len()
    }

    pub fn capacitance(&self) -> &DVector<T> {
        &self.capacitance
    }

    /// Stored energy `½ Σ C_k v_k²`.
    pub fn energy(&self, x: &DVector<T>) -> T {
        x.iter()
            .zip(self.capacitance.iter())
            .fold(T::zero(), |acc, (&v, &c)| acc + c * v * v)
            * T::lit(0.5)
    }

    /// Eigenvalues of `A`, ascending; real by construction.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = self.modal().rates.iter().map(|&r| -r).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    /// Exact modal decomposition of the dynamics.
    pub fn modal(&self) -> Modal<T> {
        let n = self.n_states();
        let sqrt_c = self.capacitance.map(Float::sqrt);
        let mut s = self.conductance.clone();
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = s[(i, j)] / (sqrt_c[i] * sqrt_c[j]);
            }
        }
        let eig = SymmetricEigen::new(s);
        let q = eig.eigenvectors;
        // x = from_modal z, z = to_modal x
        let mut from_modal = q.clone();
        for i in 0..n {
            from_modal.row_mut(i).unscale_mut(sqrt_c[i]);
        }
        let mut to_modal = q.transpose();
        for j in 0..n {
            to_modal.column_mut(j).scale_mut(sqrt_c[j]);
        }
        let b = &to_modal * &self.b;
        let c = &self.c_out * &from_modal;
        Modal {
            rates: eig.eigenvalues,
            to_modal,
            from_modal,
            b,
            c,
            d: self.d,
        }
    }

    /// Transition pair `(Φ, Γ)` of the zero-order-hold discretization at step `dt`.
    pub fn discretize(&self, dt: T) -> (DMatrix<T>, DVector<T>) {
        let modal = self.modal();
        let n = self.n_states();
        let mut scaled = modal.from_modal.clone();
        let mut gamma = DVector::zeros(n);
        for j in 0..n {
            let (e, p1, _) = hold_weights(modal.rates[j], dt);
            scaled.column_mut(j).scale_mut(e);
            gamma += modal.from_modal.column(j) * (modal.b[j] * p1);
        }
        (scaled * &modal.to_modal, gamma)
    }

    /// Input currents per unit input into each capacitor node after elimination.
    pub fn injection(&self) -> &DVector<T> {
        &self.injection
    }
}

/// `A = -V diag(rates) V⁻¹` with `V = from_modal`, `V⁻¹ = to_modal`.
#[derive(Debug, Clone)]
pub struct Modal<T: LinalgReal> {
    pub rates: DVector<T>,
    pub to_modal: DMatrix<T>,
    pub from_modal: DMatrix<T>,
    pub b: DVector<T>,
    pub c: RowDVector<T>,
    pub d: T,
}

/// For `z' = -λ z + u(t)` over one step with `u` linear from `u0` to `u1`:
/// `z(dt) = e z(0) + u0 φ1 + (u1 - u0) φ2`. Returns `(e, φ1, φ2)`.
fn hold_weights<T: LinalgReal>(rate: T, dt: T) -> (T, T, T) {
    let x = rate * dt;
    let e = Float::exp(-x);
    if Float::abs(x) < T::lit(1e-3) {
        // series of (1 - e^-x)/x and (x - 1 + e^-x)/x²
        let g1 = T::one() - x / T::lit(2.0) + x * x / T::lit(6.0) - x * x * x / T::lit(24.0);
        let g2 = T::lit(0.5) - x / T::lit(6.0) + x * x / T::lit(24.0) - x * x * x / T::lit(120.0);
        (e, dt * g1, dt * g2)
    } else {
        let em1 = -Float::exp_m1(-x);
        (e, dt * em1 / x, dt * (x - em1) / (x * x))
    }
}

impl<T: LinalgReal> Modal<T> {
    fn step_through(
        &self,
        x0: &DVector<T>,
        input: &[T],
        dt: T,
        mut observe: Option<&mut dyn FnMut(usize, &DVector<T>)>,
    ) -> Vec<T> {
        let n = self.rates.len();
        let weights: Vec<(T, T, T)> = self.rates.iter().map(|&r| hold_weights(r, dt)).collect();
        let mut z = &self.to_modal * x0;
        let mut out = Vec::with_capacity(input.len());
        for (k, &u) in input.iter().enumerate() {
            if k > 0 {
                let u_prev = input[k - 1];
                for i in 0..n {
                    let (e, p1, p2) = weights[i];
                    z[i] = e * z[i] + self.b[i] * (u_prev * p1 + (u - u_prev) * p2);
                }
            }
            let mut y = self.d * u;
            for i in 0..n {
                y += self.c[i] * z[i];
            }
            out.push(y);
            if let Some(f) = observe.as_mut() {
                f(k, &(&self.from_modal * &z));
            }
        }
        out
    }

    /// Output at each input sample, starting from state `x0`; the input is
    /// linear between samples.
    pub fn run(&self, x0: &DVector<T>, input: &[T], dt: T) -> Vec<T> {
        self.step_through(x0, input, dt, None)
    }

    /// As [`run`](Self::run), also handing every state to `observe`.
    pub fn run_observed(&self, x0: &DVector<T>, input: &[T], dt: T, mut observe: impl FnMut(usize, &DVector<T>)) -> Vec<T> {
        self.step_through(x0, input, dt, Some(&mut observe))
    }
}

fn sample_count<T: LinalgReal>(t_end: T, dt: T) -> Result<usize, SimError> {
    if !(dt > T::zero() && Float::is_finite(dt)) {
        return Err(arg_err("dt", dt));
    }
    if !(t_end >= dt && Float::is_finite(t_end)) {
        return Err(arg_err("t_end", t_end));
    }
    let steps = Float::floor(t_end / dt + T::lit(1e-9));
    Ok(steps.to_usize().unwrap_or(0) + 1)
}

/// Terminal voltage of a ladder pre-charged to `u0` everywhere, discharging
/// through `r_source` into a source clamped at 0 V.
pub fn simulate_discharge<T: LinalgReal>(
    spec: &LadderSpec<T>,
    r_source: T,
    u0: T,
    t_end: T,
    dt: T,
) -> Result<TimeSeries<T>, SimError> {
    if u0 == T::zero() || !Float::is_finite(u0) {
        return Err(arg_err("u0", u0));
    }
    let count = sample_count(t_end, dt)?;
    let ss = StateSpace::build(spec, r_source)?;
    let x0 = DVector::from_element(ss.n_states(), u0);
    let samples = ss.modal().run(&x0, &vec![T::zero(); count], dt);
    Ok(TimeSeries { t0: T::zero(), dt, samples })
}

/// Output of an ideal op-amp integrator with the ladder as feedback element
/// for an input step of `amplitude` volts: `gain · L⁻¹{Z(s) amplitude / s}`.
pub fn simulate_step<T: LinalgReal>(
    spec: &LadderSpec<T>,
    gain: T,
    amplitude: T,
    t_end: T,
    dt: T,
) -> Result<TimeSeries<T>, SimError> {
    if !Float::is_finite(gain) {
        return Err(arg_err("gain", gain));
    }
    if !Float::is_finite(amplitude) {
        return Err(arg_err("amplitude", amplitude));
    }
    let count = sample_count(t_end, dt)?;
    let ss = StateSpace::assemble(spec, Drive::Current)?;
    let x0 = DVector::zeros(ss.n_states());
    let samples = ss
        .modal()
        .run(&x0, &vec![gain * amplitude; count], dt);
    Ok(TimeSeries { t0: T::zero(), dt, samples })
}

/// Terminal voltage for an arbitrary source waveform sampled at `dt`
/// (linear between samples), from a discharged ladder.
pub fn simulate_driven<T: LinalgReal>(
    spec: &LadderSpec<T>,
    r_source: T,
    input: &[T],
    dt: T,
) -> Result<TimeSeries<T>, SimError> {
    if !(dt > T::zero() && Float::is_finite(dt)) {
        return Err(arg_err("dt", dt));
    }
    if input.is_empty() {
        return Err(SimError::Argument { name: "input", value: 0.0 });
    }
    let ss = StateSpace::build(spec, r_source)?;
    let x0 = DVector::zeros(ss.n_states());
    let samples = ss.modal().run(&x0, input, dt);
    Ok(TimeSeries { t0: T::zero(), dt, samples })
}
