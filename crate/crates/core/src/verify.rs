//! Empirical and exact checks of certain extinction and its corollaries.
//!
//! Each check returns [`BoundReport`]s. One-sided bounds are judged at three
//! standard errors; censored replicates always count against extinction.

use serde::{Deserialize, Serialize};

use crate::engine::{run_ensemble, EngineError, EnsembleConfig, EnsembleSummary};
use crate::models::{ChangeLaw, Model, ModelError, ModelSpec, StateDependence, ANALYTIC_TOL};
use crate::oracle::{counterexample_survival, exact_absorption_bounded, ExactSolution, OracleError};
use crate::process::ProcessState;
use crate::report::{BoundReport, Relation};
use crate::rng::derive_stream;

/// Frequency and binomial standard error of `hits` out of `n`.
pub fn binomial(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Death-risk floor and capacity, with the per-excursion continuation bound
/// `p = 1 - epsilon^(K-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonK {
    pub epsilon: f64,
    #[serde(rename = "K")]
    pub capacity: u64,
}

impl EpsilonK {
    pub fn new(epsilon: f64, capacity: u64) -> Option<Self> {
        (epsilon > 0.0 && epsilon <= 1.0 && capacity >= 1).then_some(Self { epsilon, capacity })
    }

    pub fn from_law<L: ChangeLaw + ?Sized>(law: &L) -> Option<Self> {
        Self::new(law.epsilon()?, law.capacity())
    }

    /// Upper bound on `P(mu_k < inf | nu_k < inf)`. Since `Z_{nu_k} <= K - 1`,
    /// `1 - epsilon^{Z_{nu_k}} <= 1 - epsilon^{K-1}`.
    pub fn p(&self) -> f64 {
        1.0 - self.epsilon.powi((self.capacity - 1) as i32)
    }
}

fn states_for<L: ChangeLaw + ?Sized>(law: &L, lo: u64, hi: u64, k_max: u64) -> Vec<ProcessState> {
    let mut out = Vec::new();
    for size in lo..=hi {
        match law.dependence() {
            StateDependence::SizeOnly => out.push(ProcessState::start(size)),
            StateDependence::SizeAndVisitCount => {
                let first = u64::from(size == 1);
                for visits in first.max(if size == 1 { 1 } else { 0 })..=k_max.max(first) {
                    out.push(ProcessState {
                        size,
                        visits_at_one: visits,
                    });
                }
            }
        }
    }
    out
}

/// Analytic check of the carrying-capacity drift condition for
/// `K <= z <= z_max` and of the uniform death-risk floor for
/// `1 <= z <= z_max` (visit counts up to `k_max` for history-dependent laws).
pub fn check_assumptions<L: ChangeLaw + ?Sized>(
    law: &L,
    z_max: u64,
    k_max: u64,
) -> Result<Vec<BoundReport>, ModelError> {
    let k = law.capacity();
    let z_max = z_max.max(k);

    let above = states_for(law, k, z_max, k_max);
    let mut max_drift = f64::NEG_INFINITY;
    for s in &above {
        max_drift = max_drift.max(law.drift(s)?);
    }
    let drift = BoundReport::judge(
        "carrying_capacity_drift",
        Relation::AtMost,
        0.0,
        max_drift,
        0.0,
        above.len() as u64,
    )
    .with_note(format!("max drift over K={k}..{z_max}"));

    let all = states_for(law, 1, z_max, k_max);
    let mut min_death = f64::INFINITY;
    let mut argmin = ProcessState::start(1);
    for s in &all {
        let p = law.conditional_law(s)?.prob(-1);
        if p < min_death {
            min_death = p;
            argmin = *s;
        }
    }
    let floor = match law.epsilon() {
        Some(eps) => BoundReport::judge(
            "death_risk_floor",
            Relation::AtLeast,
            eps,
            min_death,
            0.0,
            all.len() as u64,
        )
        .with_note(format!("min P(-1) over sizes 1..{z_max}")),
        None => BoundReport::judge(
            "death_risk_floor",
            Relation::AtLeast,
            0.0,
            min_death,
            0.0,
            all.len() as u64,
        )
        .force_verdict(
            crate::report::Verdict::Violated,
            format!(
                "no uniform floor: P(-1) decays with history, min {min_death:e} at size {} visit {}",
                argmin.size, argmin.visits_at_one
            ),
        ),
    };
    Ok(vec![drift, floor])
}

/// Extinction frequency of an existing ensemble against the theory: certain
/// extinction when the law has a death-risk floor, the closed-form product
/// for the counterexample.
pub fn extinction_report(model: &Model, summary: &EnsembleSummary) -> BoundReport {
    let n = summary.reps - summary.failed;
    let (freq, se) = binomial(summary.n_extinct, n);
    let note = format!("censored={} counted as survivors", summary.censored);
    match model.spec() {
        ModelSpec::Counterexample { decay_base } => BoundReport::judge(
            "extinction_probability",
            Relation::Equals,
            1.0 - counterexample_survival(*decay_base),
            freq,
            se,
            n,
        )
        .with_note(note)
        .with_note("closed form 1 - prod_{k>=1}(1 - b^(k+2))"),
        _ if model.epsilon().is_some() => {
            BoundReport::judge("extinction_probability", Relation::AtLeast, 1.0, freq, se, n)
                .with_note(note)
        }
        _ => BoundReport::judge("extinction_probability", Relation::AtLeast, 1.0, freq, se, n)
            .unasserted("law declares no death-risk floor"),
    }
}

pub struct ExtinctionRun {
    pub z0: u64,
    pub reps: u64,
    pub budget: u64,
    pub seed: u64,
    pub parallelism: usize,
}

pub fn estimate_extinction(
    model: &Model,
    run: &ExtinctionRun,
) -> Result<(BoundReport, EnsembleSummary), EngineError> {
    let config = EnsembleConfig::new(model.capacity(), run.z0, run.reps, run.budget, run.seed)
        .with_parallelism(run.parallelism);
    let summary = run_ensemble(model, &config)?;
    Ok((extinction_report(model, &summary), summary))
}

/// Monte Carlo against the first-step oracle for the ensemble's start size.
pub fn check_against_oracle(summary: &EnsembleSummary, exact: &ExactSolution) -> Vec<BoundReport> {
    let z0 = summary.z0 as usize;
    if z0 >= exact.expected_absorption_time.len() {
        return Vec::new();
    }
    let n = summary.reps - summary.failed;
    let (freq, se) = binomial(summary.n_extinct, n);
    let t = &summary.extinction_time;
    vec![
        BoundReport::judge(
            "oracle_extinction_probability",
            Relation::Equals,
            exact.extinction_probability[z0],
            freq,
            se,
            n,
        ),
        BoundReport::judge(
            "oracle_mean_extinction_time",
            Relation::Equals,
            exact.expected_absorption_time[z0],
            t.mean(),
            t.stderr(),
            t.count,
        )
        .with_note(format!("state cap {}", exact.state_cap)),
    ]
}

/// Maximal inequality above the capacity. For each `x`: the start-anchored
/// bound `E[min(1, Z_mu / x)]` (asserted) and the constant `(K - 1) / x`
/// (reported, not asserted).
///
/// Excursions cut off by censoring count when their running maximum has
/// already reached `x`, since the event is then decided.
pub fn check_doob_above(summary: &EnsembleSummary, x_list: &[u64]) -> Vec<BoundReport> {
    let k = summary.capacity;
    let a = &summary.above;
    let mut out = Vec::with_capacity(2 * x_list.len());
    for &x in x_list {
        let reached = |h: &std::collections::BTreeMap<u64, u64>| -> u64 {
            h.range(x..).map(|(_, &c)| c).sum()
        };
        let open_decided = reached(&a.open_maxima);
        let hits = reached(&a.maxima) + open_decided;
        let n = a.complete + open_decided;
        let (freq, se) = binomial(hits, n);

        let mut weight = 0.0;
        let mut count = 0u64;
        for (&start, &c) in a.starts.iter().chain(a.open_starts.iter()) {
            weight += c as f64 * (start as f64 / x as f64).min(1.0);
            count += c;
        }
        let anchored_bound = if count == 0 { f64::NAN } else { weight / count as f64 };

        let name = format!("doob_start_anchored[x={x}]");
        let mut anchored =
            BoundReport::judge(&name, Relation::AtMost, anchored_bound, freq, se, n)
                .with_note(format!("open excursions decided: {open_decided}"));
        let constant = BoundReport::judge(
            format!("doob_k_minus_one[x={x}]"),
            Relation::AtMost,
            (k as f64 - 1.0) / x as f64,
            freq,
            se,
            n,
        )
        .unasserted("constant (K-1)/x presumes a start below K; reported only");
        if x < k {
            anchored = anchored.unasserted("x < K: bound is trivial");
        }
        out.push(anchored);
        out.push(constant);
    }
    out
}

/// `Ok` when the law moves by ±1 and has non-negative drift on `0 < z < K`.
pub fn below_capacity_submartingale<L: ChangeLaw + ?Sized>(law: &L) -> Result<(), String> {
    for z in 1..law.capacity() {
        let s = ProcessState::start(z);
        let pmf = law.conditional_law(&s).map_err(|e| e.to_string())?;
        if pmf.entries().iter().any(|&(c, _)| c != 1 && c != -1) {
            return Err(format!("jumps other than ±1 at size {z}"));
        }
        if pmf.mean() < -ANALYTIC_TOL {
            return Err(format!("negative drift {} at size {z} < K", pmf.mean()));
        }
        if law.dependence() != StateDependence::SizeOnly {
            return Err("law depends on more than the current size".into());
        }
    }
    Ok(())
}

/// Per-excursion extinction probability from `K - 1` against `1/K`.
pub fn check_hit_zero<L: ChangeLaw + ?Sized>(law: &L, summary: &EnsembleSummary) -> BoundReport {
    let k = summary.capacity;
    let b = &summary.below;
    let (freq, se) = binomial(b.from_top_extinct, b.from_top);
    let report = BoundReport::judge(
        "hit_zero_per_excursion",
        Relation::AtMost,
        1.0 / k as f64,
        freq,
        se,
        b.from_top,
    );
    match below_capacity_submartingale(law) {
        Ok(()) => report,
        Err(why) => report.unasserted(format!("no below-K submartingale property: {why}")),
    }
}

/// Geometric decay of the number of returns to `K`, and the mean number of
/// below-`K` excursions before extinction.
pub fn check_excursion_geometry<L: ChangeLaw + ?Sized>(
    law: &L,
    summary: &EnsembleSummary,
    eps_k: &EpsilonK,
    k_max: u64,
) -> Vec<BoundReport> {
    let n = summary.reps - summary.failed;
    let p = eps_k.p();
    let a = &summary.above;
    let mut out = Vec::with_capacity(k_max as usize + 1);
    for k in 1..=k_max {
        let extinct_ge: u64 = a.count_extinct.range(k..).map(|(_, &c)| c).sum();
        // censored traces might still return to K: count them all
        let hits = extinct_ge + summary.censored;
        let (freq, se) = binomial(hits, n);
        out.push(
            BoundReport::judge(
                format!("above_excursions_tail[k={k}]"),
                Relation::AtMost,
                p.powi(k as i32),
                freq,
                se,
                n,
            )
            .with_note(format!("p = 1 - eps^(K-1) = {p}")),
        );
    }

    let per = &summary.below.per_extinct_trace;
    let mean = BoundReport::judge(
        "mean_below_excursions",
        Relation::AtLeast,
        eps_k.capacity as f64,
        per.mean(),
        per.stderr(),
        per.count,
    );
    let mean = match below_capacity_submartingale(law) {
        Err(why) => mean.unasserted(format!("no below-K submartingale property: {why}")),
        Ok(()) if summary.z0 + 1 < eps_k.capacity => {
            mean.unasserted("start below K-1: first excursion is not from K-1")
        }
        Ok(()) => mean,
    };
    out.push(mean);
    out
}

/// Mean duration of complete above-`K` excursions against the drift bound
/// `(Z_mu - K + c_max) / delta` averaged over excursion starts, and against
/// `K / delta` read as a bound on that same mean duration.
pub fn check_return_time<L: ChangeLaw + ?Sized>(
    law: &L,
    summary: &EnsembleSummary,
    delta: f64,
    c_max: u64,
) -> Vec<BoundReport> {
    let k = summary.capacity;
    let d = &summary.above.durations;
    let mut bound_sum = 0.0;
    for (&start, &c) in &summary.above.starts {
        bound_sum += c as f64 * (start as f64 - k as f64 + c_max as f64) / delta;
    }
    let anchored = if d.count == 0 {
        f64::NAN
    } else {
        bound_sum / d.count as f64
    };
    let precondition = drift_precondition(law, delta, c_max);
    let reports = vec![
        BoundReport::judge(
            "return_time_drift_bound",
            Relation::AtMost,
            anchored,
            d.mean(),
            d.stderr(),
            d.count,
        ),
        BoundReport::judge(
            "return_time_k_over_delta",
            Relation::AtMost,
            k as f64 / delta,
            d.mean(),
            d.stderr(),
            d.count,
        )
        .with_note("K/delta read as a bound on the mean above-capacity excursion duration"),
    ];
    match precondition {
        Ok(()) => reports,
        Err(why) => reports
            .into_iter()
            .map(|r| r.unasserted(format!("drift condition unverified: {why}")))
            .collect(),
    }
}

fn drift_precondition<L: ChangeLaw + ?Sized>(law: &L, delta: f64, c_max: u64) -> Result<(), String> {
    if !(delta > 0.0) {
        return Err(format!("delta {delta} must be positive"));
    }
    if law.dependence() != StateDependence::SizeOnly {
        return Err("law depends on more than the current size".into());
    }
    for z in law.capacity()..=law.z_max() {
        let s = ProcessState::start(z);
        let pmf = law.conditional_law(&s).map_err(|e| e.to_string())?;
        if pmf.mean() > -delta + ANALYTIC_TOL {
            return Err(format!("drift {} > -{delta} at size {z}", pmf.mean()));
        }
        if pmf.min_change() < -(c_max as i64) {
            return Err(format!("downward jump {} exceeds c_max at size {z}", pmf.min_change()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Exponential,
    Polynomial,
    Undetermined,
}

/// Least-squares fits of `ln T` against `K` and against `ln K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub log_slope: f64,
    pub log_intercept: f64,
    pub r2_exponential: f64,
    pub loglog_slope: f64,
    pub r2_power: f64,
    pub growth: Growth,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Fit `(K, mean time)` pairs. Needs two points for a slope and three to
/// tell exponential from polynomial growth (whichever fit explains more of
/// the variance of `ln T`).
pub fn fit_growth(points: &[(u64, f64)]) -> Option<GrowthFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, t)| *t > 0.0 && t.is_finite())
        .map(|&(k, t)| (k as f64, t.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let ks: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let logk: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let lt: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (log_slope, log_intercept, r2_exponential) = linear_fit(&ks, &lt);
    let (loglog_slope, _, r2_power) = linear_fit(&logk, &lt);
    let growth = if pts.len() < 3 {
        Growth::Undetermined
    } else if r2_exponential > r2_power {
        Growth::Exponential
    } else {
        Growth::Polynomial
    };
    Some(GrowthFit {
        log_slope,
        log_intercept,
        r2_exponential,
        loglog_slope,
        r2_power,
        growth,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSettings {
    pub reps: u64,
    pub budget: u64,
    pub seed: u64,
    pub parallelism: usize,
    /// Solve the oracle on `{0, ..., K + margin}` for every row.
    pub oracle_margin: Option<u64>,
    pub tail_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "K")]
    pub capacity: u64,
    pub z0: u64,
    pub reps: u64,
    pub n_extinct: u64,
    pub censored: u64,
    pub mean_time: f64,
    pub stderr: f64,
    pub oracle_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub fit: Option<GrowthFit>,
    pub strictly_increasing: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl ScalingTable {
    /// MC mean against the oracle mean for each row that has one.
    pub fn oracle_reports(&self) -> Vec<BoundReport> {
        self.rows
            .iter()
            .filter_map(|r| {
                r.oracle_mean.map(|exact| {
                    BoundReport::judge(
                        format!("scan_mean_time[K={}]", r.capacity),
                        Relation::Equals,
                        exact,
                        r.mean_time,
                        r.stderr,
                        r.n_extinct,
                    )
                })
            })
            .collect()
    }
}

/// Stream key for the ensemble at capacity `k`, derived from the scan seed.
fn row_seed(seed: u64, k: u64) -> u64 {
    derive_stream(seed, u64::MAX - k).next_u64()
}

/// Mean extinction time from `z0 = K - 1` for each capacity in `capacities`.
pub fn scan_capacity(
    family: &ModelSpec,
    capacities: &[u64],
    settings: &ScanSettings,
) -> Result<ScalingTable, ScanError> {
    let mut rows = Vec::with_capacity(capacities.len());
    let mut note = String::new();
    for &k in capacities {
        let model = crate::models::build_model(&family.with_capacity(k))?;
        let k = model.capacity();
        if note.is_empty() {
            if let Err(why) = positive_drift_below(&model) {
                note = format!("growth precondition not met: {why}");
            }
        }
        let z0 = k - 1;
        let config = EnsembleConfig::new(k, z0, settings.reps, settings.budget, row_seed(settings.seed, k))
            .with_parallelism(settings.parallelism);
        let summary = run_ensemble(&model, &config)?;
        let mut row = ScalingRow {
            capacity: k,
            z0,
            reps: summary.reps,
            n_extinct: summary.n_extinct,
            censored: summary.censored,
            mean_time: summary.extinction_time.mean(),
            stderr: summary.extinction_time.stderr(),
            oracle_mean: None,
            note: String::new(),
        };
        if let Some(margin) = settings.oracle_margin {
            match exact_absorption_bounded(&model, k + margin, z0, settings.tail_tolerance) {
                Ok(sol) => row.oracle_mean = Some(sol.expected_absorption_time[z0 as usize]),
                Err(e) => row.note = format!("no oracle: {e}"),
            }
        }
        rows.push(row);
    }
    let fit = fit_growth(&rows.iter().map(|r| (r.capacity, r.mean_time)).collect::<Vec<_>>());
    let strictly_increasing = rows.windows(2).all(|w| w[1].mean_time > w[0].mean_time);
    Ok(ScalingTable {
        rows,
        fit,
        strictly_increasing,
        note,
    })
}

fn positive_drift_below<L: ChangeLaw + ?Sized>(law: &L) -> Result<(), String> {
    for z in 1..law.capacity() {
        let d = law.drift(&ProcessState::start(z)).map_err(|e| e.to_string())?;
        if d <= ANALYTIC_TOL {
            return Err(format!("drift {d} at size {z} is not strictly positive"));
        }
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;
    use crate::report::Verdict;

    #[test]
    fn epsilon_k_p() {
        let e = EpsilonK::new(1.0 / 6.0, 5).unwrap();
        assert!((e.p() - (1.0 - (1.0f64 / 6.0).powi(4))).abs() < 1e-15);
        assert!((e.p() - 0.99923).abs() < 1e-5);
        assert_eq!(EpsilonK::new(0.5, 1).unwrap().p(), 0.0);
        assert!(EpsilonK::new(0.0, 3).is_none());
        // p grows with K for a fixed epsilon < 1
        let ps: Vec<f64> = (1..10).map(|k| EpsilonK::new(0.3, k).unwrap().p()).collect();
        assert!(ps.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn assumptions_ratio_and_symmetric() {
        let m = build_model(&ModelSpec::ratio_birth_death(10)).unwrap();
        let r = check_assumptions(&m, 40, 10).unwrap();
        assert!(r.iter().all(|r| r.verdict == Verdict::Holds));
        assert!((r[1].empirical - 1.0 / 11.0).abs() < 1e-15);
        assert_eq!(r[0].empirical, 0.0);

        let s = build_model(&ModelSpec::symmetric_walk(7)).unwrap();
        let r = check_assumptions(&s, 28, 10).unwrap();
        assert_eq!(r[0].empirical, 0.0);
        assert_eq!(r[0].verdict, Verdict::Holds);
    }

    #[test]
    fn assumptions_flag_counterexample() {
        let m = build_model(&ModelSpec::counterexample()).unwrap();
        let r = check_assumptions(&m, 8, 20).unwrap();
        assert_eq!(r[0].verdict, Verdict::Holds);
        assert_eq!(r[1].verdict, Verdict::Violated);
        assert_eq!(r[1].empirical, 0.5f64.powi(22));
    }

    #[test]
    fn growth_fit_classifies_oracle_curves() {
        // exact means for the biased walk (delta 0.2) and the symmetric walk
        // forced down at 2K, from z0 = K - 1
        let biased = [(4, 56.25), (6, 172.8125), (8, 447.578), (10, 1078.301), (12, 2509.927)];
        let fit = fit_growth(&biased).unwrap();
        assert_eq!(fit.growth, Growth::Exponential);
        assert!(fit.log_slope > 0.0);
        let sym = [(4, 39.0), (6, 95.0), (8, 175.0), (10, 279.0), (12, 407.0)];
        assert_eq!(fit_growth(&sym).unwrap().growth, Growth::Polynomial);
        assert!(fit_growth(&[(4, 10.0)]).is_none());
        assert_eq!(fit_growth(&[(4, 10.0), (5, 20.0)]).unwrap().growth, Growth::Undetermined);
    }

    #[test]
    fn hit_zero_warns_without_submartingale() {
        let m = build_model(&ModelSpec::moran_toy(
            3,
            vec![crate::models::OffspringPiece {
                min_size: 1,
                pmf: vec![(0, 0.5), (3, 0.5)],
            }],
        ))
        .unwrap_err();
        // drift +0.5 above K is rejected; build a valid one with jumps instead
        let _ = m;
        let m = build_model(&ModelSpec::moran_toy(
            3,
            vec![
                crate::models::OffspringPiece {
                    min_size: 1,
                    pmf: vec![(0, 0.5), (3, 0.5)],
                },
                crate::models::OffspringPiece {
                    min_size: 3,
                    pmf: vec![(0, 0.7), (2, 0.3)],
                },
            ],
        ))
        .unwrap();
        assert!(below_capacity_submartingale(&m).is_err());
        let cfg = EnsembleConfig::new(3, 2, 50, 10_000, 1);
        let s = run_ensemble(&m, &cfg).unwrap();
        assert_eq!(check_hit_zero(&m, &s).verdict, Verdict::Inconclusive);
    }
}
