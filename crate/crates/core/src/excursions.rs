//! Excursion skeleton of a trace relative to the carrying capacity.
//!
//! `nu_1` is the first index with `Z < K`; afterwards `mu_k` is the first
//! index after `nu_k` with `Z >= K` and `nu_{k+1}` the first index after
//! `mu_k` with `Z < K`. Indices are 0-based, so `nu_1 = 0` whenever
//! `0 < Z_0 < K`. A below-`K` excursion occupies `[nu_k, mu_k)` and an
//! above-`K` excursion `[mu_k, nu_{k+1})`. When `Z_0 >= K` the initial
//! segment `[0, nu_1)` is not counted as an above-`K` excursion.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::process::{Trace, TraceStatus};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExcursionDecomposition {
    pub nu: Vec<usize>,
    pub mu: Vec<usize>,
    pub z_at_nu: Vec<u64>,
    /// The trace stops mid-excursion without absorption.
    pub censored_tail: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `[0, nu_1)` when `Z_0 >= K`.
    Initial,
    Below,
    Above,
}

impl ExcursionDecomposition {
    /// Consecutive segments covering `0..len`, where `len` is the trace length.
    pub fn segments(&self, len: usize) -> Vec<(Range<usize>, Side)> {
        let mut marks: Vec<(usize, Side)> = Vec::with_capacity(self.nu.len() + self.mu.len() + 1);
        if self.nu.first() != Some(&0) {
            marks.push((0, Side::Initial));
        }
        let mut nu = self.nu.iter().peekable();
        let mut mu = self.mu.iter().peekable();
        loop {
            match (nu.peek(), mu.peek()) {
                (Some(&&a), Some(&&b)) if a < b => {
                    marks.push((a, Side::Below));
                    nu.next();
                }
                (_, Some(&&b)) => {
                    marks.push((b, Side::Above));
                    mu.next();
                }
                (Some(&&a), None) => {
                    marks.push((a, Side::Below));
                    nu.next();
                }
                (None, None) => break,
            }
        }
        let mut out = Vec::with_capacity(marks.len());
        for (i, &(start, side)) in marks.iter().enumerate() {
            let end = marks.get(i + 1).map_or(len, |m| m.0);
            out.push((start..end, side));
        }
        out
    }
}

/// Stopping-time skeleton of `trace` for capacity `capacity`.
pub fn decompose(trace: &Trace, capacity: u64) -> ExcursionDecomposition {
    let mut d = ExcursionDecomposition {
        censored_tail: trace.status == TraceStatus::Censored,
        ..Default::default()
    };
    let mut below = false;
    for (n, &z) in trace.sizes.iter().enumerate() {
        let now_below = z < capacity;
        if n == 0 {
            if now_below {
                d.nu.push(0);
                d.z_at_nu.push(z);
            }
        } else if now_below && !below {
            d.nu.push(n);
            d.z_at_nu.push(z);
        } else if !now_below && below {
            d.mu.push(n);
        }
        below = now_below;
    }
    d
}

/// A finished excursion, reported as soon as its end is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcursionEvent {
    /// `[nu_k, mu_k)` ended by reaching `K` or by extinction.
    Below { start: u64, extinct: bool },
    /// `[mu_k, nu_{k+1})` with `start = Z_{mu_k}`.
    Above { start: u64, max: u64, duration: u64 },
}

/// An excursion cut off by the end of a censored trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpenExcursion {
    Initial { max: u64, duration: u64 },
    Below { start: u64 },
    Above { start: u64, max: u64, duration: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Empty,
    Initial { max: u64, since: u64 },
    Below { start: u64 },
    Above { start: u64, max: u64, since: u64 },
    Extinct,
}

/// Online excursion extraction: feed sizes one at a time, in order.
///
/// Produces the same excursions as [`decompose`] without holding the trace,
/// so ensembles can be aggregated in memory independent of trace length.
#[derive(Debug, Clone)]
pub struct ExcursionTracker {
    capacity: u64,
    index: u64,
    phase: Phase,
    n_below: u64,
    n_above: u64,
    extinct_in: Option<u64>,
}

impl ExcursionTracker {
    pub fn new(capacity: u64) -> Self {
        Self {
            capacity,
            index: 0,
            phase: Phase::Empty,
            n_below: 0,
            n_above: 0,
            extinct_in: None,
        }
    }

    fn enter_below<F: FnMut(ExcursionEvent)>(&mut self, z: u64, emit: &mut F) {
        self.n_below += 1;
        if z == 0 {
            self.extinct_in = Some(self.n_below - 1);
            self.phase = Phase::Extinct;
            emit(ExcursionEvent::Below {
                start: 0,
                extinct: true,
            });
        } else {
            self.phase = Phase::Below { start: z };
        }
    }

    pub fn push<F: FnMut(ExcursionEvent)>(&mut self, z: u64, mut emit: F) {
        let n = self.index;
        self.index += 1;
        let below = z < self.capacity;
        match self.phase {
            Phase::Empty => {
                if below {
                    self.enter_below(z, &mut emit);
                } else {
                    self.phase = Phase::Initial { max: z, since: n };
                }
            }
            Phase::Initial { max, since } => {
                if below {
                    self.enter_below(z, &mut emit);
                } else {
                    self.phase = Phase::Initial {
                        max: max.max(z),
                        since,
                    };
                }
            }
            Phase::Below { start } => {
                if z == 0 {
                    self.extinct_in = Some(self.n_below - 1);
                    self.phase = Phase::Extinct;
                    emit(ExcursionEvent::Below {
                        start,
                        extinct: true,
                    });
                } else if !below {
                    emit(ExcursionEvent::Below {
                        start,
                        extinct: false,
                    });
                    self.n_above += 1;
                    self.phase = Phase::Above {
                        start: z,
                        max: z,
                        since: n,
                    };
                }
            }
            Phase::Above { start, max, since } => {
                if below {
                    emit(ExcursionEvent::Above {
                        start,
                        max,
                        duration: n - since,
                    });
                    self.enter_below(z, &mut emit);
                } else {
                    self.phase = Phase::Above {
                        start,
                        max: max.max(z),
                        since,
                    };
                }
            }
            Phase::Extinct => {}
        }
    }

    /// Entries below `K` so far (the number of finite `nu_k`).
    pub fn below_count(&self) -> u64 {
        self.n_below
    }

    /// Returns to `K` so far (the number of finite `mu_k`).
    pub fn above_count(&self) -> u64 {
        self.n_above
    }

    /// 0-based index of the below-`K` excursion in which extinction occurred.
    pub fn extinct_in(&self) -> Option<u64> {
        self.extinct_in
    }

    /// The excursion in progress, if the trace stopped before absorption.
    pub fn open_excursion(&self) -> Option<OpenExcursion> {
        match self.phase {
            Phase::Initial { max, since } => Some(OpenExcursion::Initial {
                max,
                duration: self.index - since,
            }),
            Phase::Below { start } => Some(OpenExcursion::Below { start }),
            Phase::Above { start, max, since } => Some(OpenExcursion::Above {
                start,
                max,
                duration: self.index - since,
            }),
            Phase::Empty | Phase::Extinct => None,
        }
    }
}

/// Per-trace excursion statistics. Only complete excursions enter the
/// duration and maximum lists; a censored tail is kept in `open`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExcursionStats {
    pub n_below_excursions: u64,
    pub n_above_excursions: u64,
    /// `(Z_{nu_k}, ended in extinction)` for each complete below-`K` excursion.
    pub below: Vec<(u64, bool)>,
    pub above_starts: Vec<u64>,
    pub above_durations: Vec<u64>,
    pub above_maxima: Vec<u64>,
    pub extinct_in_excursion: Option<u64>,
    pub open: Option<OpenExcursion>,
}

impl ExcursionStats {
    fn record(&mut self, event: ExcursionEvent) {
        match event {
            ExcursionEvent::Below { start, extinct } => self.below.push((start, extinct)),
            ExcursionEvent::Above {
                start,
                max,
                duration,
            } => {
                self.above_starts.push(start);
                self.above_maxima.push(max);
                self.above_durations.push(duration);
            }
        }
    }
}

pub fn excursion_stats(trace: &Trace, capacity: u64) -> ExcursionStats {
    let mut tracker = ExcursionTracker::new(capacity);
    let mut stats = ExcursionStats::default();
    for &z in &trace.sizes {
        tracker.push(z, |e| stats.record(e));
    }
    stats.n_below_excursions = tracker.below_count();
    stats.n_above_excursions = tracker.above_count();
    stats.extinct_in_excursion = tracker.extinct_in();
    stats.open = tracker.open_excursion();
    stats
}

/// JSON-lines export of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub nu: Vec<usize>,
    pub mu: Vec<usize>,
    pub censored: bool,
}

impl From<&ExcursionDecomposition> for DecompositionRecord {
    fn from(d: &ExcursionDecomposition) -> Self {
        Self {
            nu: d.nu.clone(),
            mu: d.mu.clone(),
            censored: d.censored_tail,
        }
    }
}
