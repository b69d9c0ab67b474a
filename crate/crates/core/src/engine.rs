//! Reproducible parallel ensembles.
//!
//! Replicate `i` always draws from `derive_stream(master_seed, i)`, and all
//! aggregates are exact integer counters merged by addition, so the summary
//! does not depend on the thread count or on completion order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::excursions::{ExcursionEvent, ExcursionTracker, OpenExcursion};
use crate::models::ChangeLaw;
use crate::process::{simulate, simulate_observed, Trace, TraceOutcome, TraceStatus};
use crate::rng::derive_stream;

/// Replicates per work item. Fixed so the work split never depends on the
/// thread count.
const BLOCK: u64 = 64;
/// Failures kept verbatim in a summary; the rest are only counted.
const MAX_REPORTED_FAILURES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("reps must be at least 1")]
    NoReplicates,
    #[error("parallelism must be at least 1")]
    NoParallelism,
    #[error("carrying capacity must be at least 1")]
    ZeroCapacity,
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub reps: u64,
    pub step_budget: u64,
    pub master_seed: u64,
    pub parallelism: usize,
    pub record_full_traces: bool,
    #[serde(rename = "K")]
    pub capacity: u64,
    pub z0: u64,
}

impl EnsembleConfig {
    pub fn new(capacity: u64, z0: u64, reps: u64, step_budget: u64, master_seed: u64) -> Self {
        Self {
            reps,
            step_budget,
            master_seed,
            parallelism: 1,
            record_full_traces: false,
            capacity,
            z0,
        }
    }

    pub fn with_parallelism(mut self, parallelism: usize) -> Self {
        self.parallelism = parallelism;
        self
    }

    fn validate(&self) -> Result<(), EngineError> {
        if self.reps == 0 {
            return Err(EngineError::NoReplicates);
        }
        if self.parallelism == 0 {
            return Err(EngineError::NoParallelism);
        }
        if self.capacity == 0 {
            return Err(EngineError::ZeroCapacity);
        }
        Ok(())
    }
}

/// Count, sum and sum of squares of non-negative integer samples.
///
/// Serialized with the derived `mean` and `stderr` alongside the counters;
/// only the counters are read back.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "MomentsJson", from = "MomentsJson")]
pub struct Moments {
    pub count: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

#[derive(Serialize, Deserialize)]
struct MomentsJson {
    count: u64,
    sum: u128,
    sum_sq: u128,
    #[serde(default)]
    mean: Option<f64>,
    #[serde(default)]
    stderr: Option<f64>,
}

impl From<Moments> for MomentsJson {
    fn from(m: Moments) -> Self {
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            count: m.count,
            sum: m.sum,
            sum_sq: m.sum_sq,
            mean: finite(m.mean()),
            stderr: finite(m.stderr()),
        }
    }
}

impl From<MomentsJson> for Moments {
    fn from(j: MomentsJson) -> Self {
        Self {
            count: j.count,
            sum: j.sum,
            sum_sq: j.sum_sq,
        }
    }
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: u64) {
        self.count += 1;
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum as f64 / self.count as f64
    }

    /// Unbiased sample variance, computed from an exact integer numerator.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as u128;
        let num = n * self.sum_sq - self.sum * self.sum;
        num as f64 / (n * (n - 1)) as f64
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

fn merge_hist(into: &mut BTreeMap<u64, u64>, from: &BTreeMap<u64, u64>) {
    for (&k, &v) in from {
        *into.entry(k).or_insert(0) += v;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateFailure {
    pub index: u64,
    pub message: String,
}

/// Below-`K` excursion aggregates. Only complete excursions are counted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BelowSummary {
    pub complete: u64,
    pub ended_extinct: u64,
    /// Complete excursions that started at `K - 1`.
    pub from_top: u64,
    pub from_top_extinct: u64,
    /// Number of below-`K` excursions per extinct trace.
    pub per_extinct_trace: Moments,
}

/// Above-`K` excursion aggregates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AboveSummary {
    pub complete: u64,
    pub durations: Moments,
    /// Maximum size of each complete excursion.
    pub maxima: BTreeMap<u64, u64>,
    /// Starting size `Z_mu` of each complete excursion.
    pub starts: BTreeMap<u64, u64>,
    /// Running maximum of excursions cut off by censoring.
    pub open_maxima: BTreeMap<u64, u64>,
    pub open_starts: BTreeMap<u64, u64>,
    /// Number of above-`K` excursions per trace, by trace status.
    pub count_extinct: BTreeMap<u64, u64>,
    pub count_censored: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    #[serde(rename = "K")]
    pub capacity: u64,
    pub z0: u64,
    pub step_budget: u64,
    pub master_seed: u64,
    pub reps: u64,
    pub n_extinct: u64,
    pub censored: u64,
    pub failed: u64,
    pub failures: Vec<ReplicateFailure>,
    /// Steps to absorption over extinct replicates.
    pub extinction_time: Moments,
    pub total_steps: u128,
    pub below: BelowSummary,
    pub above: AboveSummary,
    /// Extinct traces whose absorption was not inside a below-`K` excursion.
    /// Always zero; kept as a checked invariant.
    pub extinction_outside_below: u64,
}

impl EnsembleSummary {
    fn empty(config: &EnsembleConfig) -> Self {
        Self {
            capacity: config.capacity,
            z0: config.z0,
            step_budget: config.step_budget,
            master_seed: config.master_seed,
            reps: 0,
            n_extinct: 0,
            censored: 0,
            failed: 0,
            failures: Vec::new(),
            extinction_time: Moments::default(),
            total_steps: 0,
            below: BelowSummary::default(),
            above: AboveSummary::default(),
            extinction_outside_below: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.reps += other.reps;
        self.n_extinct += other.n_extinct;
        self.censored += other.censored;
        self.failed += other.failed;
        self.failures.extend(other.failures);
        self.failures.sort_by_key(|f| f.index);
        self.failures.truncate(MAX_REPORTED_FAILURES);
        self.extinction_time.merge(&other.extinction_time);
        self.total_steps += other.total_steps;

        let (b, ob) = (&mut self.below, &other.below);
        b.complete += ob.complete;
        b.ended_extinct += ob.ended_extinct;
        b.from_top += ob.from_top;
        b.from_top_extinct += ob.from_top_extinct;
        b.per_extinct_trace.merge(&ob.per_extinct_trace);

        let (a, oa) = (&mut self.above, &other.above);
        a.complete += oa.complete;
        a.durations.merge(&oa.durations);
        merge_hist(&mut a.maxima, &oa.maxima);
        merge_hist(&mut a.starts, &oa.starts);
        merge_hist(&mut a.open_maxima, &oa.open_maxima);
        merge_hist(&mut a.open_starts, &oa.open_starts);
        merge_hist(&mut a.count_extinct, &oa.count_extinct);
        merge_hist(&mut a.count_censored, &oa.count_censored);

        self.extinction_outside_below += other.extinction_outside_below;
        self
    }

    /// Fraction of (non-failed) replicates absorbed within the budget.
    pub fn extinction_frequency(&self) -> f64 {
        self.n_extinct as f64 / (self.reps - self.failed) as f64
    }

    fn record_event(&mut self, capacity: u64, event: ExcursionEvent) {
        match event {
            ExcursionEvent::Below { start, extinct } => {
                self.below.complete += 1;
                self.below.ended_extinct += u64::from(extinct);
                if start + 1 == capacity {
                    self.below.from_top += 1;
                    self.below.from_top_extinct += u64::from(extinct);
                }
            }
            ExcursionEvent::Above {
                start,
                max,
                duration,
            } => {
                self.above.complete += 1;
                self.above.durations.push(duration);
                *self.above.maxima.entry(max).or_insert(0) += 1;
                *self.above.starts.entry(start).or_insert(0) += 1;
            }
        }
    }

    fn record_trace(&mut self, outcome: &TraceOutcome, tracker: &ExcursionTracker) {
        self.reps += 1;
        self.total_steps += outcome.steps_used as u128;
        match outcome.status {
            TraceStatus::Extinct => {
                self.n_extinct += 1;
                self.extinction_time.push(outcome.steps_used);
                self.below.per_extinct_trace.push(tracker.below_count());
                *self
                    .above
                    .count_extinct
                    .entry(tracker.above_count())
                    .or_insert(0) += 1;
                if tracker.extinct_in().is_none() {
                    self.extinction_outside_below += 1;
                }
            }
            TraceStatus::Censored => {
                self.censored += 1;
                *self
                    .above
                    .count_censored
                    .entry(tracker.above_count())
                    .or_insert(0) += 1;
                if let Some(OpenExcursion::Above { start, max, .. }) = tracker.open_excursion() {
                    *self.above.open_maxima.entry(max).or_insert(0) += 1;
                    *self.above.open_starts.entry(start).or_insert(0) += 1;
                }
            }
        }
    }

    fn record_failure(&mut self, index: u64, message: String) {
        self.reps += 1;
        self.failed += 1;
        self.failures.push(ReplicateFailure { index, message });
    }
}

/// Simulates replicate `index` and folds it into a fresh one-replicate summary.
fn run_replicate<L: ChangeLaw + ?Sized>(
    law: &L,
    config: &EnsembleConfig,
    index: u64,
    keep_trace: bool,
) -> (EnsembleSummary, Option<Trace>) {
    let mut one = EnsembleSummary::empty(config);
    let mut rng = derive_stream(config.master_seed, index);
    let mut tracker = ExcursionTracker::new(config.capacity);
    let k = config.capacity;
    let result = if keep_trace {
        simulate(law, config.z0, config.step_budget, &mut rng).map(|trace| {
            for &z in &trace.sizes {
                tracker.push(z, |e| one.record_event(k, e));
            }
            (trace.outcome(), Some(trace))
        })
    } else {
        simulate_observed(law, config.z0, config.step_budget, &mut rng, |z| {
            tracker.push(z, |e| one.record_event(k, e))
        })
        .map(|outcome| (outcome, None))
    };
    match result {
        Ok((outcome, trace)) => {
            one.record_trace(&outcome, &tracker);
            (one, trace)
        }
        Err(e) => {
            let mut failed = EnsembleSummary::empty(config);
            failed.record_failure(index, e.to_string());
            (failed, None)
        }
    }
}

fn run_block<L: ChangeLaw + ?Sized>(law: &L, config: &EnsembleConfig, block: u64) -> EnsembleSummary {
    let start = block * BLOCK;
    let end = (start + BLOCK).min(config.reps);
    (start..end).fold(EnsembleSummary::empty(config), |acc, i| {
        acc.merge(run_replicate(law, config, i, false).0)
    })
}

fn pool(parallelism: usize) -> Result<rayon::ThreadPool, EngineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))
}

/// Run `config.reps` replicates and aggregate them. Replicate failures are
/// recorded in the summary; they do not abort the ensemble.
///
/// With `record_full_traces` off, memory use is bounded by the number of
/// workers and is independent of `reps` and of the step budget.
pub fn run_ensemble<L: ChangeLaw + ?Sized>(
    law: &L,
    config: &EnsembleConfig,
) -> Result<EnsembleSummary, EngineError> {
    if config.record_full_traces {
        return run_ensemble_with_traces(law, config).map(|(s, _)| s);
    }
    config.validate()?;
    let blocks = config.reps.div_ceil(BLOCK);
    let summary = pool(config.parallelism)?.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| run_block(law, config, b))
            .reduce(|| EnsembleSummary::empty(config), EnsembleSummary::merge)
    });
    Ok(summary)
}

/// Like [`run_ensemble`] but also returns every trace, in replicate order.
/// Failed replicates have no trace.
pub fn run_ensemble_with_traces<L: ChangeLaw + ?Sized>(
    law: &L,
    config: &EnsembleConfig,
) -> Result<(EnsembleSummary, Vec<Trace>), EngineError> {
    config.validate()?;
    let results: Vec<(EnsembleSummary, Option<Trace>)> = pool(config.parallelism)?.install(|| {
        (0..config.reps)
            .into_par_iter()
            .map(|i| run_replicate(law, config, i, true))
            .collect()
    });
    let mut summary = EnsembleSummary::empty(config);
    let mut traces = Vec::with_capacity(results.len());
    for (one, trace) in results {
        summary = summary.merge(one);
        traces.extend(trace);
    }
    Ok((summary, traces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_model, ModelSpec};

    #[test]
    fn moments_exact() {
        let mut m = Moments::default();
        for x in [1u64, 2, 3, 4] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        let v = serde_json::to_value(m).unwrap();
        assert_eq!(v["mean"], 2.5);
        assert!(v["stderr"].as_f64().is_some());
        assert_eq!(serde_json::from_value::<Moments>(v).unwrap(), m);
        assert_eq!(serde_json::to_value(Moments::default()).unwrap()["mean"], serde_json::Value::Null);
    }

    #[test]
    fn start_at_zero() {
        let m = build_model(&ModelSpec::symmetric_walk(3)).unwrap();
        let s = run_ensemble(&m, &EnsembleConfig::new(3, 0, 1, 100, 1)).unwrap();
        assert_eq!(s.n_extinct, 1);
        assert_eq!(s.extinction_time.sum, 0);
        assert_eq!(s.extinction_time.count, 1);
    }

    #[test]
    fn config_validation() {
        let m = build_model(&ModelSpec::symmetric_walk(3)).unwrap();
        assert_eq!(
            run_ensemble(&m, &EnsembleConfig::new(3, 1, 0, 10, 1)).unwrap_err(),
            EngineError::NoReplicates
        );
        assert_eq!(
            run_ensemble(&m, &EnsembleConfig::new(3, 1, 5, 10, 1).with_parallelism(0))
                .unwrap_err(),
            EngineError::NoParallelism
        );
    }

    #[test]
    fn parallelism_does_not_change_summary() {
        let m = build_model(&ModelSpec::ratio_birth_death(5)).unwrap();
        let base = EnsembleConfig::new(5, 3, 500, 100_000, 77);
        let one = run_ensemble(&m, &base).unwrap();
        for p in [2, 3, 8] {
            let other = run_ensemble(&m, &base.clone().with_parallelism(p)).unwrap();
            assert_eq!(
                serde_json::to_string(&other).unwrap(),
                serde_json::to_string(&one).unwrap()
            );
        }
    }

    #[test]
    fn recorded_traces_give_same_summary() {
        let m = build_model(&ModelSpec::biased_walk(4, 0.3)).unwrap();
        let mut cfg = EnsembleConfig::new(4, 3, 130, 5_000, 5).with_parallelism(3);
        let streaming = run_ensemble(&m, &cfg).unwrap();
        cfg.record_full_traces = true;
        let (recorded, traces) = run_ensemble_with_traces(&m, &cfg).unwrap();
        assert_eq!(traces.len(), 130);
        assert_eq!(recorded, streaming);
        for t in &traces {
            t.validate().unwrap();
        }
    }
}
