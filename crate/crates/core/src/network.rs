//! Ladder circuit descriptions: domino, enhanced and nested ladders.
//!
//! A ladder is read from its terminal: step `k` is a series resistor followed
//! by a shunt to ground, either a capacitor or another ladder. Nothing lies
//! beyond the last shunt.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Real;

/// Deepest nesting accepted; a plain ladder has depth 1.
pub const MAX_DEPTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum ShuntElement<T> {
    #[serde(rename = "c")]
    Capacitor(T),
    #[serde(rename = "ladder")]
    SubLadder(LadderSpec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Step<T> {
    pub r: T,
    pub shunt: ShuntElement<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LadderSpec<T> {
    pub steps: Vec<Step<T>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("{name} must be positive and finite, got {value}")]
    Argument { name: &'static str, value: f64 },
    #[error("a ladder needs at least one step")]
    NoSteps,
    #[error("nesting depth {0} exceeds the limit of {MAX_DEPTH}")]
    Depth(usize),
    #[error("invalid sub-ladder: {0}")]
    InvalidSub(String),
}

/// Location of a step inside a possibly nested ladder: outer index first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepPath(pub Vec<usize>);

impl fmt::Display for StepPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ladder");
        }
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".ladder.")?;
            }
            write!(f, "steps[{k}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    NonPositiveResistance(f64),
    NonPositiveCapacitance(f64),
    Empty,
    TooDeep(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: StepPath,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::NonPositiveResistance(r) => write!(f, "{}: series resistance {r} is not positive", self.path),
            ViolationKind::NonPositiveCapacitance(c) => write!(f, "{}: capacitance {c} is not positive", self.path),
            ViolationKind::Empty => write!(f, "{}: ladder has no steps", self.path),
            ViolationKind::TooDeep(d) => write!(f, "{}: nesting depth {d} exceeds {MAX_DEPTH}", self.path),
        }
    }
}

fn positive<T: Real>(name: &'static str, value: T) -> Result<T, NetworkError> {
    if value > T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(NetworkError::Argument {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
        })
    }
}

fn check_steps(n: usize) -> Result<(), NetworkError> {
    if n == 0 {
        Err(NetworkError::NoSteps)
    } else {
        Ok(())
    }
}

/// Warning text when the two resistors are not roughly a ratio of 4 apart.
pub fn ratio_warning<T: Real>(r1: T, r2: T) -> Option<String> {
    let ratio = r1.max(r2) / r1.min(r2);
    if ratio < T::lit(3.0) || ratio > T::lit(5.0) {
        Some(format!(
            "resistor ratio {ratio:.3} is outside [3, 5]; the ladder will not approximate a half-order element well"
        ))
    } else {
        None
    }
}

fn warn_ratio<T: Real>(r1: T, r2: T) {
    if let Some(msg) = ratio_warning(r1, r2) {
        log::warn!("{msg}");
    }
}

fn alternate<T: Copy>(odd: T, even: T, k: usize) -> T {
    if k.is_multiple_of(2) {
        odd
    } else {
        even
    }
}

/// Domino ladder with series resistors alternating `r1, r2, r1, …` and equal
/// shunt capacitors.
pub fn make_alternating_ladder<T: Real>(r1: T, r2: T, c: T, n: usize) -> Result<LadderSpec<T>, NetworkError> {
    make_enhanced_ladder(r1, r2, c, c, n)
}

/// Domino ladder alternating both resistors (`r1`/`r2`) and capacitors (`c1`/`c2`).
pub fn make_enhanced_ladder<T: Real>(r1: T, r2: T, c1: T, c2: T, n: usize) -> Result<LadderSpec<T>, NetworkError> {
    positive("r1", r1)?;
    positive("r2", r2)?;
    positive("c1", c1)?;
    positive("c2", c2)?;
    check_steps(n)?;
    warn_ratio(r1, r2);
    let steps = (0..n)
        .map(|k| Step {
            r: alternate(r1, r2, k),
            shunt: ShuntElement::Capacitor(alternate(c1, c2, k)),
        })
        .collect();
    Ok(LadderSpec { steps })
}

/// Outer ladder with alternating resistors whose every shunt is a copy of `sub`.
pub fn make_nested_ladder<T: Real>(r1: T, r2: T, sub: &LadderSpec<T>, n: usize) -> Result<LadderSpec<T>, NetworkError> {
    positive("r1", r1)?;
    positive("r2", r2)?;
    check_steps(n)?;
    if let Some(v) = validate(sub).into_iter().next() {
        return Err(NetworkError::InvalidSub(v.to_string()));
    }
    let depth = sub.depth() + 1;
    if depth > MAX_DEPTH {
        return Err(NetworkError::Depth(depth));
    }
    warn_ratio(r1, r2);
    let steps = (0..n)
        .map(|k| Step {
            r: alternate(r1, r2, k),
            shunt: ShuntElement::SubLadder(sub.clone()),
        })
        .collect();
    Ok(LadderSpec { steps })
}

/// Number of capacitors, recursively: the dimension of the state vector.
pub fn count_states<T>(spec: &LadderSpec<T>) -> usize {
    spec.steps
        .iter()
        .map(|s| match &s.shunt {
            ShuntElement::Capacitor(_) => 1,
            ShuntElement::SubLadder(sub) => count_states(sub),
        })
        .sum()
}

/// Every broken invariant, each tagged with the path of the offending step.
pub fn validate<T: Real>(spec: &LadderSpec<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let depth = spec.depth();
    if depth > MAX_DEPTH {
        out.push(Violation {
            path: StepPath::default(),
            kind: ViolationKind::TooDeep(depth),
        });
    }
    walk(spec, &mut Vec::new(), &mut out);
    out
}

fn walk<T: Real>(spec: &LadderSpec<T>, path: &mut Vec<usize>, out: &mut Vec<Violation>) {
    if spec.steps.is_empty() {
        out.push(Violation {
            path: StepPath(path.clone()),
            kind: ViolationKind::Empty,
        });
    }
    for (k, step) in spec.steps.iter().enumerate() {
        path.push(k);
        if !(step.r > T::zero() && step.r.is_finite()) {
            out.push(Violation {
                path: StepPath(path.clone()),
                kind: ViolationKind::NonPositiveResistance(step.r.to_f64().unwrap_or(f64::NAN)),
            });
        }
        match &step.shunt {
            ShuntElement::Capacitor(c) => {
                if !(*c > T::zero() && c.is_finite()) {
                    out.push(Violation {
                        path: StepPath(path.clone()),
                        kind: ViolationKind::NonPositiveCapacitance(c.to_f64().unwrap_or(f64::NAN)),
                    });
                }
            }
            ShuntElement::SubLadder(sub) => walk(sub, path, out),
        }
        path.pop();
    }
}

impl<T: Real> LadderSpec<T> {
    /// 1 for a ladder of capacitors, one more per level of sub-ladders.
    pub fn depth(&self) -> usize {
        1 + self
            .steps
            .iter()
            .map(|s| match &s.shunt {
                ShuntElement::Capacitor(_) => 0,
                ShuntElement::SubLadder(sub) => sub.depth(),
            })
            .max()
            .unwrap_or(0)
    }

    /// Sum of all capacitances, recursively.
    pub fn total_capacitance(&self) -> T {
        self.steps.iter().fold(T::zero(), |acc, s| {
            acc + match &s.shunt {
                ShuntElement::Capacitor(c) => *c,
                ShuntElement::SubLadder(sub) => sub.total_capacitance(),
            }
        })
    }

    pub fn first_resistance(&self) -> Option<T> {
        self.steps.first().map(|s| s.r)
    }

    pub fn is_valid(&self) -> bool {
        validate(self).is_empty()
    }
}
