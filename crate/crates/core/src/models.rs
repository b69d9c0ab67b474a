//! Change laws.
//!
//! The catalog here is a set of concrete constructions: the underlying theory
//! places no distributional assumptions on the changes, only a non-positive
//! drift at or above the carrying capacity and a uniform floor on the
//! probability of a single death. Every cataloged law except
//! [`ModelSpec::Counterexample`] satisfies both.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::process::{Change, ProcessState};

/// Slack for floating-point comparisons against analytic constraints.
pub const ANALYTIC_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("carrying capacity must be at least 1")]
    ZeroCapacity,
    #[error("drift magnitude {0} must lie in (0, 1)")]
    DeltaOutOfRange(f64),
    #[error("decay base {0} must lie in (0, 1)")]
    DecayBaseOutOfRange(f64),
    #[error("z_max {z_max} is below the carrying capacity {capacity}")]
    ZMaxBelowCapacity { z_max: u64, capacity: u64 },
    #[error("offspring count 1 is a zero change; give it probability 0 and drop it")]
    OffspringCountOne,
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("change law contains a zero change")]
    ZeroChange,
    #[error("change {change} at size {size} drives the population below zero")]
    NegativeSize { size: u64, change: i64 },
    #[error("piecewise table must start at size 1 and increase strictly")]
    BadPieces,
    #[error("drift {drift} > 0 at size {size} >= K (carrying-capacity condition fails)")]
    PositiveDrift { size: u64, drift: f64 },
    #[error("probability of a single death is 0 at size {size}; no uniform death-risk floor")]
    NoDeathRisk { size: u64 },
    #[error("cell-cycle death probability {p_die} < 1/2 at size {size} >= K")]
    CellDeathBelowHalf { size: u64, p_die: f64 },
    #[error("size 0 is absorbing and has no change law")]
    Absorbed,
}

/// Exact finite law of the next change, sorted by change, zero-mass entries dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangePmf {
    entries: Vec<(i64, f64)>,
}

impl ChangePmf {
    pub fn new(entries: impl IntoIterator<Item = (i64, f64)>) -> Result<Self, ModelError> {
        let mut merged: Vec<(i64, f64)> = Vec::new();
        let mut raw: Vec<(i64, f64)> = entries.into_iter().collect();
        raw.sort_by_key(|&(c, _)| c);
        for (c, p) in raw {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(ModelError::ProbabilityOutOfRange(p));
            }
            if p == 0.0 {
                continue;
            }
            if c == 0 {
                return Err(ModelError::ZeroChange);
            }
            match merged.last_mut() {
                Some((last, q)) if *last == c => *q += p,
                _ => merged.push((c, p)),
            }
        }
        let total: f64 = merged.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > ANALYTIC_TOL {
            return Err(ModelError::NotNormalized(total));
        }
        Ok(Self { entries: merged })
    }

    /// Two-point law on `{-1, +1}`.
    pub fn up_down(p_down: f64) -> Result<Self, ModelError> {
        Self::new([(-1, p_down), (1, 1.0 - p_down)])
    }

    pub fn entries(&self) -> &[(i64, f64)] {
        &self.entries
    }

    pub fn prob(&self, change: i64) -> f64 {
        self.entries
            .iter()
            .find(|&&(c, _)| c == change)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|&(c, p)| c as f64 * p).sum()
    }

    pub fn min_change(&self) -> i64 {
        self.entries[0].0
    }

    pub fn max_change(&self) -> i64 {
        self.entries[self.entries.len() - 1].0
    }

    /// Inverse-CDF draw for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> Change {
        let mut acc = 0.0;
        for &(c, p) in &self.entries {
            acc += p;
            if u < acc {
                return Change::new(c).expect("pmf changes are nonzero");
            }
        }
        Change::new(self.max_change()).expect("pmf changes are nonzero")
    }

    /// Fails if some change would take `size` below zero.
    pub fn check_at(&self, size: u64) -> Result<(), ModelError> {
        let c = self.min_change();
        if (size as i128) + (c as i128) < 0 {
            return Err(ModelError::NegativeSize { size, change: c });
        }
        Ok(())
    }
}

/// What part of the history a law reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateDependence {
    SizeOnly,
    SizeAndVisitCount,
}

/// A conditional change law. The process, the ensemble engine and the
/// verifiers are generic over this trait; [`Model`] is the cataloged
/// implementation.
pub trait ChangeLaw: Send + Sync {
    /// Carrying capacity `K`.
    fn capacity(&self) -> u64;

    /// Declared uniform lower bound on `P(change = -1)`, if the law has one.
    fn epsilon(&self) -> Option<f64>;

    fn dependence(&self) -> StateDependence;

    /// Largest size at which analytic checks are run.
    fn z_max(&self) -> u64 {
        4 * self.capacity()
    }

    fn conditional_law(&self, state: &ProcessState) -> Result<ChangePmf, ModelError>;

    /// Draw the next change from a uniform `u` in `[0, 1)`. Must agree with
    /// the inverse CDF of [`ChangeLaw::conditional_law`].
    fn sample_change(&self, state: &ProcessState, u: f64) -> Result<Change, ModelError> {
        Ok(self.conditional_law(state)?.quantile(u))
    }

    fn drift(&self, state: &ProcessState) -> Result<f64, ModelError> {
        Ok(self.conditional_law(state)?.mean())
    }
}

/// Offspring law in force from `min_size` upward (until the next piece).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffspringPiece {
    pub min_size: u64,
    /// `(offspring count, probability)`; count 1 is not allowed.
    pub pmf: Vec<(u64, f64)>,
}

fn default_decay_base() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `P(+1 | z) = K / (z + K)`, `P(-1 | z) = z / (z + K)`.
    RatioBirthDeath {
        #[serde(rename = "K")]
        capacity: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z_max: Option<u64>,
    },
    /// Up with probability `(1 + delta) / 2` below `K`, down with that
    /// probability at or above `K`.
    BiasedWalk {
        #[serde(rename = "K")]
        capacity: u64,
        delta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z_max: Option<u64>,
    },
    /// One individual dies (count 0) or is replaced by `j >= 2` individuals;
    /// the size changes by `j - 1`.
    MoranToy {
        #[serde(rename = "K")]
        capacity: u64,
        offspring: Vec<OffspringPiece>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z_max: Option<u64>,
    },
    /// One cell dies (`-1`) with `p_die(z)` or divides (`+1`). `p_die` is a
    /// step function given as `(from_size, probability)` pairs.
    CellCycle {
        #[serde(rename = "K")]
        capacity: u64,
        p_die: Vec<(u64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z_max: Option<u64>,
    },
    SymmetricWalk {
        #[serde(rename = "K")]
        capacity: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z_max: Option<u64>,
    },
    /// `K = 2`. Size 2 always drops to 1; on the k-th visit to size 1 the
    /// population dies with probability `decay_base^(k+2)`, else grows to 2.
    Counterexample {
        #[serde(default = "default_decay_base")]
        decay_base: f64,
    },
}

impl ModelSpec {
    pub fn ratio_birth_death(capacity: u64) -> Self {
        Self::RatioBirthDeath {
            capacity,
            z_max: None,
        }
    }

    pub fn biased_walk(capacity: u64, delta: f64) -> Self {
        Self::BiasedWalk {
            capacity,
            delta,
            z_max: None,
        }
    }

    pub fn moran_toy(capacity: u64, offspring: Vec<OffspringPiece>) -> Self {
        Self::MoranToy {
            capacity,
            offspring,
            z_max: None,
        }
    }

    pub fn cell_cycle(capacity: u64, p_die: Vec<(u64, f64)>) -> Self {
        Self::CellCycle {
            capacity,
            p_die,
            z_max: None,
        }
    }

    pub fn symmetric_walk(capacity: u64) -> Self {
        Self::SymmetricWalk {
            capacity,
            z_max: None,
        }
    }

    pub fn counterexample() -> Self {
        Self::Counterexample {
            decay_base: default_decay_base(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::RatioBirthDeath { .. } => "ratio_birth_death",
            Self::BiasedWalk { .. } => "biased_walk",
            Self::MoranToy { .. } => "moran_toy",
            Self::CellCycle { .. } => "cell_cycle",
            Self::SymmetricWalk { .. } => "symmetric_walk",
            Self::Counterexample { .. } => "counterexample",
        }
    }

    pub fn capacity(&self) -> u64 {
        match self {
            Self::RatioBirthDeath { capacity, .. }
            | Self::BiasedWalk { capacity, .. }
            | Self::MoranToy { capacity, .. }
            | Self::CellCycle { capacity, .. }
            | Self::SymmetricWalk { capacity, .. } => *capacity,
            Self::Counterexample { .. } => 2,
        }
    }

    fn z_max_override(&self) -> Option<u64> {
        match self {
            Self::RatioBirthDeath { z_max, .. }
            | Self::BiasedWalk { z_max, .. }
            | Self::MoranToy { z_max, .. }
            | Self::CellCycle { z_max, .. }
            | Self::SymmetricWalk { z_max, .. } => *z_max,
            Self::Counterexample { .. } => None,
        }
    }

    /// Same family with a different carrying capacity. The counterexample
    /// has a fixed capacity and is returned unchanged.
    pub fn with_capacity(&self, k: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Self::RatioBirthDeath { capacity, .. }
            | Self::BiasedWalk { capacity, .. }
            | Self::MoranToy { capacity, .. }
            | Self::CellCycle { capacity, .. }
            | Self::SymmetricWalk { capacity, .. } => *capacity = k,
            Self::Counterexample { .. } => {}
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Law {
    Ratio,
    Biased { delta: f64 },
    Moran { pieces: Vec<(u64, ChangePmf)> },
    Cell { pieces: Vec<(u64, f64)> },
    Symmetric,
    Counterexample { base: f64 },
}

/// A validated, immutable change law built from a [`ModelSpec`].
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    capacity: u64,
    z_max: u64,
    epsilon: Option<f64>,
    law: Law,
}

fn piece_index<T>(pieces: &[(u64, T)], size: u64) -> usize {
    pieces.partition_point(|&(from, _)| from <= size) - 1
}

fn check_pieces<T>(pieces: &[(u64, T)]) -> Result<(), ModelError> {
    if pieces.first().map(|p| p.0) != Some(1) || pieces.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(ModelError::BadPieces);
    }
    Ok(())
}

/// Pieces whose size range meets `[lo, hi]`, with the smallest size of the meeting.
fn pieces_meeting<T>(pieces: &[(u64, T)], lo: u64, hi: u64) -> impl Iterator<Item = (u64, &T)> {
    pieces.iter().enumerate().filter_map(move |(i, (from, v))| {
        let end = pieces.get(i + 1).map_or(u64::MAX, |next| next.0 - 1);
        let a = (*from).max(lo);
        (a <= end.min(hi)).then_some((a, v))
    })
}

/// Validate a spec and build its law.
pub fn build_model(spec: &ModelSpec) -> Result<Model, ModelError> {
    let capacity = spec.capacity();
    if capacity == 0 {
        return Err(ModelError::ZeroCapacity);
    }
    let z_max = spec.z_max_override().unwrap_or(4 * capacity);
    if z_max < capacity {
        return Err(ModelError::ZMaxBelowCapacity { z_max, capacity });
    }
    let (law, epsilon) = match spec {
        ModelSpec::RatioBirthDeath { .. } => (Law::Ratio, Some(1.0 / (1.0 + capacity as f64))),
        ModelSpec::BiasedWalk { delta, .. } => {
            if !(*delta > 0.0 && *delta < 1.0) {
                return Err(ModelError::DeltaOutOfRange(*delta));
            }
            (Law::Biased { delta: *delta }, Some((1.0 - delta) / 2.0))
        }
        ModelSpec::SymmetricWalk { .. } => (Law::Symmetric, Some(0.5)),
        ModelSpec::Counterexample { decay_base } => {
            if !(*decay_base > 0.0 && *decay_base < 1.0) {
                return Err(ModelError::DecayBaseOutOfRange(*decay_base));
            }
            (Law::Counterexample { base: *decay_base }, None)
        }
        ModelSpec::CellCycle { p_die, .. } => {
            check_pieces(p_die)?;
            for &(_, p) in p_die {
                if !(0.0..=1.0).contains(&p) {
                    return Err(ModelError::ProbabilityOutOfRange(p));
                }
            }
            for (size, &p) in pieces_meeting(p_die, capacity, z_max) {
                if p < 0.5 {
                    return Err(ModelError::CellDeathBelowHalf { size, p_die: p });
                }
            }
            let mut eps = 1.0f64;
            for (size, &p) in pieces_meeting(p_die, 1, u64::MAX) {
                if p == 0.0 {
                    return Err(ModelError::NoDeathRisk { size });
                }
                eps = eps.min(p);
            }
            (
                Law::Cell {
                    pieces: p_die.clone(),
                },
                Some(eps),
            )
        }
        ModelSpec::MoranToy { offspring, .. } => {
            let mut pieces = Vec::with_capacity(offspring.len());
            for piece in offspring {
                let mut raw = Vec::with_capacity(piece.pmf.len());
                for &(count, p) in &piece.pmf {
                    if count == 1 && p != 0.0 {
                        return Err(ModelError::OffspringCountOne);
                    }
                    raw.push((count as i64 - 1, p));
                }
                pieces.push((piece.min_size, ChangePmf::new(raw)?));
            }
            check_pieces(&pieces)?;
            for (size, pmf) in pieces_meeting(&pieces, capacity, z_max) {
                let drift = pmf.mean();
                if drift > ANALYTIC_TOL {
                    return Err(ModelError::PositiveDrift { size, drift });
                }
            }
            let mut eps = 1.0f64;
            for (size, pmf) in pieces_meeting(&pieces, 1, u64::MAX) {
                let q0 = pmf.prob(-1);
                if q0 == 0.0 {
                    return Err(ModelError::NoDeathRisk { size });
                }
                eps = eps.min(q0);
            }
            (Law::Moran { pieces }, Some(eps))
        }
    };
    Ok(Model {
        spec: spec.clone(),
        capacity,
        z_max,
        epsilon,
        law,
    })
}

impl Model {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// `P(-1 | state)` for laws supported on `{-1, +1}`.
    #[inline]
    fn p_down(&self, state: &ProcessState) -> Option<f64> {
        let z = state.size;
        let k = self.capacity;
        Some(match &self.law {
            Law::Ratio => z as f64 / (z + k) as f64,
            Law::Biased { delta } => {
                if z < k {
                    (1.0 - delta) / 2.0
                } else {
                    (1.0 + delta) / 2.0
                }
            }
            Law::Symmetric => 0.5,
            Law::Cell { pieces } => pieces[piece_index(pieces, z)].1,
            Law::Counterexample { base } => {
                if z >= 2 {
                    1.0
                } else {
                    let exponent = state.visits_at_one.max(1).saturating_add(2);
                    base.powf(exponent as f64)
                }
            }
            Law::Moran { .. } => return None,
        })
    }
}

impl ChangeLaw for Model {
    fn capacity(&self) -> u64 {
        self.capacity
    }

    fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    fn dependence(&self) -> StateDependence {
        match self.law {
            Law::Counterexample { .. } => StateDependence::SizeAndVisitCount,
            _ => StateDependence::SizeOnly,
        }
    }

    fn z_max(&self) -> u64 {
        self.z_max
    }

    fn conditional_law(&self, state: &ProcessState) -> Result<ChangePmf, ModelError> {
        if state.size == 0 {
            return Err(ModelError::Absorbed);
        }
        match &self.law {
            Law::Moran { pieces } => Ok(pieces[piece_index(pieces, state.size)].1.clone()),
            _ => ChangePmf::up_down(self.p_down(state).expect("two-point law")),
        }
    }

    #[inline]
    fn sample_change(&self, state: &ProcessState, u: f64) -> Result<Change, ModelError> {
        if state.size == 0 {
            return Err(ModelError::Absorbed);
        }
        match &self.law {
            Law::Moran { pieces } => Ok(pieces[piece_index(pieces, state.size)].1.quantile(u)),
            _ => {
                let p = self.p_down(state).expect("two-point law");
                Ok(if u < p { Change::DEATH } else { Change::BIRTH })
            }
        }
    }

    fn drift(&self, state: &ProcessState) -> Result<f64, ModelError> {
        if state.size == 0 {
            return Err(ModelError::Absorbed);
        }
        match self.p_down(state) {
            Some(p) => Ok(1.0 - 2.0 * p),
            None => Ok(self.conditional_law(state)?.mean()),
        }
    }
}
