//! The population-size process `Z_{n+1} = Z_n + C_{n+1}` and trace generation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{ChangeLaw, ModelError};
use crate::rng::RngState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("population is extinct; no further changes occur")]
    Absorbed,
    #[error("change {change} at size {size} would go negative")]
    WouldGoNegative { size: u64, change: i64 },
    #[error("history is empty")]
    EmptyHistory,
    #[error("model produced a zero change at size {size}")]
    ZeroChange { size: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A signed, nonzero change in population size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Change(i64);

impl Change {
    pub const DEATH: Change = Change(-1);
    pub const BIRTH: Change = Change(1);

    pub fn new(value: i64) -> Option<Self> {
        (value != 0).then_some(Self(value))
    }

    pub fn get(self) -> i64 {
        self.0
    }
}

impl TryFrom<i64> for Change {
    type Error = &'static str;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        Change::new(value).ok_or("change must be nonzero")
    }
}

impl From<Change> for i64 {
    fn from(c: Change) -> i64 {
        c.0
    }
}

/// `z + c`, refusing changes out of the absorbed state and below zero.
pub fn apply_change(z: u64, c: Change) -> Result<u64, ProcessError> {
    if z == 0 {
        return Err(ProcessError::Absorbed);
    }
    let next = z as i128 + c.0 as i128;
    if next < 0 {
        return Err(ProcessError::WouldGoNegative {
            size: z,
            change: c.0,
        });
    }
    Ok(next as u64)
}

/// The part of the history the cataloged laws depend on: the current size
/// and how many times the process has been at size 1 (counting the current
/// visit when `size == 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProcessState {
    pub size: u64,
    pub visits_at_one: u64,
}

impl ProcessState {
    pub fn start(z0: u64) -> Self {
        Self {
            size: z0,
            visits_at_one: u64::from(z0 == 1),
        }
    }

    /// Fold a whole history into its summary state.
    pub fn from_history(sizes: &[u64]) -> Result<Self, ProcessError> {
        let (&first, rest) = sizes.split_first().ok_or(ProcessError::EmptyHistory)?;
        let mut state = Self::start(first);
        for &z in rest {
            state.advance(z);
        }
        Ok(state)
    }

    #[inline]
    pub fn advance(&mut self, next: u64) {
        self.size = next;
        if next == 1 {
            self.visits_at_one += 1;
        }
    }
}

/// Draw the next change. Fails if the state is absorbed.
#[inline]
pub fn step<L: ChangeLaw + ?Sized>(
    law: &L,
    state: &ProcessState,
    rng: &mut RngState,
) -> Result<Change, ProcessError> {
    if state.size == 0 {
        return Err(ProcessError::Absorbed);
    }
    let u = rng.next_f64();
    let c = law.sample_change(state, u)?;
    if c.0 == 0 {
        return Err(ProcessError::ZeroChange { size: state.size });
    }
    Ok(c)
}

/// [`step`] driven by an explicit history `[Z_0, ..., Z_n]`.
pub fn step_history<L: ChangeLaw + ?Sized>(
    law: &L,
    history: &[u64],
    rng: &mut RngState,
) -> Result<Change, ProcessError> {
    let state = ProcessState::from_history(history)?;
    step(law, &state, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceStatus {
    Extinct,
    Censored,
}

/// Outcome of one simulated trajectory without its path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceOutcome {
    pub z0: u64,
    pub status: TraceStatus,
    pub steps_used: u64,
    pub final_size: u64,
}

/// A realization `Z_0, ..., Z_T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub sizes: Vec<u64>,
    pub status: TraceStatus,
    pub steps_used: u64,
}

impl Trace {
    pub fn z0(&self) -> u64 {
        self.sizes[0]
    }

    pub fn final_size(&self) -> u64 {
        *self.sizes.last().expect("trace is never empty")
    }

    pub fn outcome(&self) -> TraceOutcome {
        TraceOutcome {
            z0: self.z0(),
            status: self.status,
            steps_used: self.steps_used,
            final_size: self.final_size(),
        }
    }

    /// Checks every structural invariant of a trace.
    pub fn validate(&self) -> Result<(), String> {
        if self.sizes.is_empty() {
            return Err("empty trace".into());
        }
        if self.sizes.len() as u64 != self.steps_used + 1 {
            return Err(format!(
                "{} sizes for {} steps",
                self.sizes.len(),
                self.steps_used
            ));
        }
        for (n, w) in self.sizes.windows(2).enumerate() {
            if w[0] == 0 {
                return Err(format!("change after absorption at index {n}"));
            }
            if w[0] == w[1] {
                return Err(format!("zero change at index {n}"));
            }
        }
        match (self.status, self.final_size()) {
            (TraceStatus::Extinct, 0) => Ok(()),
            (TraceStatus::Censored, z) if z > 0 => Ok(()),
            (s, z) => Err(format!("status {s:?} with final size {z}")),
        }
    }
}

/// JSON-lines record for one trace; `sizes` only when requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub z0: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sizes: Option<Vec<u64>>,
    pub status: TraceStatus,
    pub steps: u64,
    #[serde(rename = "final")]
    pub final_size: u64,
}

impl TraceRecord {
    pub fn from_trace(trace: &Trace, include_sizes: bool) -> Self {
        Self {
            z0: trace.z0(),
            sizes: include_sizes.then(|| trace.sizes.clone()),
            status: trace.status,
            steps: trace.steps_used,
            final_size: trace.final_size(),
        }
    }

    pub fn from_outcome(outcome: &TraceOutcome) -> Self {
        Self {
            z0: outcome.z0,
            sizes: None,
            status: outcome.status,
            steps: outcome.steps_used,
            final_size: outcome.final_size,
        }
    }
}

/// Runs the process from `z0` until absorption or until `step_budget` changes
/// have occurred, reporting each size (starting with `z0`) to `observe`.
pub fn simulate_observed<L, F>(
    law: &L,
    z0: u64,
    step_budget: u64,
    rng: &mut RngState,
    mut observe: F,
) -> Result<TraceOutcome, ProcessError>
where
    L: ChangeLaw + ?Sized,
    F: FnMut(u64),
{
    let mut state = ProcessState::start(z0);
    observe(z0);
    let mut steps = 0u64;
    while state.size > 0 && steps < step_budget {
        let c = step(law, &state, rng)?;
        let next = apply_change(state.size, c)?;
        state.advance(next);
        steps += 1;
        observe(next);
    }
    Ok(TraceOutcome {
        z0,
        status: if state.size == 0 {
            TraceStatus::Extinct
        } else {
            TraceStatus::Censored
        },
        steps_used: steps,
        final_size: state.size,
    })
}

pub fn simulate<L: ChangeLaw + ?Sized>(
    law: &L,
    z0: u64,
    step_budget: u64,
    rng: &mut RngState,
) -> Result<Trace, ProcessError> {
    let mut sizes = Vec::new();
    let outcome = simulate_observed(law, z0, step_budget, rng, |z| sizes.push(z))?;
    Ok(Trace {
        sizes,
        status: outcome.status,
        steps_used: outcome.steps_used,
    })
}
