//! First-step analysis on a truncated state space.
//!
//! For a size-only Markov law on `{0, ..., cap}` the absorption probability
//! `u`, expected absorption time `t` and probability `h` of reaching the cap
//! before extinction solve
//!
//! ```text
//! u(z) = P(z, 0) + sum_{z' >= 1} P(z, z') u(z'),   u(0) = 1
//! t(z) = 1 + sum_{z' >= 1} P(z, z') t(z'),         t(0) = 0
//! h(z) = P(z, cap) + sum_{1 <= z' < cap} P(z, z') h(z'),  h(cap) = 1
//! ```
//!
//! Truncation: a change that would overshoot `cap` lands on `cap`; a change
//! that would leave `cap` in place is dropped and the remaining mass
//! renormalized, so the symmetric walk at the cap is forced down.

use thiserror::Error;

use crate::models::{ChangeLaw, ModelError, StateDependence};
use crate::process::ProcessState;

/// Largest state space the oracle will solve.
pub const MAX_STATES: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("the oracle needs a size-only Markov law")]
    NotSizeOnly,
    #[error("state cap {0} exceeds the {MAX_STATES}-state limit")]
    TooManyStates(u64),
    #[error("state cap must be at least 1")]
    EmptyStateSpace,
    #[error("size {0} has no change law after truncation")]
    NoMoves(u64),
    #[error("first-step system is singular at size {0} (extinction unreachable)")]
    Singular(u64),
    #[error("start {start} is not below the cap {cap}")]
    StartBeyondCap { start: u64, cap: u64 },
    #[error(
        "state space not effectively bounded: P(reach cap {cap} from {start}) = {mass:e} > {tolerance:e}"
    )]
    TailTooHeavy {
        cap: u64,
        start: u64,
        mass: f64,
        tolerance: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Jump chain on `{0, ..., cap}` with `0` absorbing.
#[derive(Debug, Clone)]
pub struct AbsorbingChain {
    cap: u64,
    /// `rows[z - 1]` lists `(target, probability)` out of size `z`.
    rows: Vec<Vec<(u64, f64)>>,
}

impl AbsorbingChain {
    /// Rows are given for sizes `1..=cap` in order.
    pub fn new(rows: Vec<Vec<(u64, f64)>>) -> Result<Self, OracleError> {
        let cap = rows.len() as u64;
        if cap == 0 {
            return Err(OracleError::EmptyStateSpace);
        }
        if cap > MAX_STATES {
            return Err(OracleError::TooManyStates(cap));
        }
        Ok(Self { cap, rows })
    }

    /// Truncated chain of `law` on `{0, ..., state_cap}`.
    pub fn from_law<L: ChangeLaw + ?Sized>(law: &L, state_cap: u64) -> Result<Self, OracleError> {
        if law.dependence() != StateDependence::SizeOnly {
            return Err(OracleError::NotSizeOnly);
        }
        if state_cap == 0 {
            return Err(OracleError::EmptyStateSpace);
        }
        if state_cap > MAX_STATES {
            return Err(OracleError::TooManyStates(state_cap));
        }
        let mut rows = Vec::with_capacity(state_cap as usize);
        for z in 1..=state_cap {
            let pmf = law.conditional_law(&ProcessState::start(z))?;
            pmf.check_at(z)?;
            let mut row: Vec<(u64, f64)> = Vec::with_capacity(pmf.entries().len());
            for &(c, p) in pmf.entries() {
                let target = ((z as i64 + c) as u64).min(state_cap);
                if target == z {
                    continue;
                }
                match row.iter_mut().find(|(t, _)| *t == target) {
                    Some((_, q)) => *q += p,
                    None => row.push((target, p)),
                }
            }
            let total: f64 = row.iter().map(|&(_, p)| p).sum();
            if row.is_empty() || total <= 0.0 {
                return Err(OracleError::NoMoves(z));
            }
            for (_, p) in row.iter_mut() {
                *p /= total;
            }
            rows.push(row);
        }
        Ok(Self {
            cap: state_cap,
            rows,
        })
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn row(&self, z: u64) -> &[(u64, f64)] {
        &self.rows[(z - 1) as usize]
    }

    /// Solve `(I - Q) x = rhs` over the unknown sizes `1..=last`, where `Q`
    /// is the chain restricted to those sizes.
    fn solve_restricted(&self, last: u64, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, OracleError> {
        let n = last as usize;
        let mut kl = 0usize;
        let mut ku = 0usize;
        for z in 1..=last {
            for &(t, _) in self.row(z) {
                if t >= 1 && t <= last {
                    if t < z {
                        kl = kl.max((z - t) as usize);
                    } else {
                        ku = ku.max((t - z) as usize);
                    }
                }
            }
        }
        let mut band = BandMatrix::identity(n, kl, ku);
        for z in 1..=last {
            let i = (z - 1) as usize;
            for &(t, p) in self.row(z) {
                if t >= 1 && t <= last {
                    band.add(i, (t - 1) as usize, -p);
                }
            }
        }
        band.factor().map_err(|i| OracleError::Singular(i as u64 + 1))?;
        Ok(rhs.iter().map(|b| band.solve(b)).collect())
    }
}

/// Row-major band storage with `kl` sub- and `ku` super-diagonals.
struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn identity(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            data[i * width + kl] = 1.0;
        }
        Self { n, kl, ku, data }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// In-place LU without pivoting. `I - Q` for a substochastic `Q` is row
    /// diagonally dominant, which keeps every Schur complement dominant too.
    fn factor(&mut self) -> Result<(), usize> {
        for k in 0..self.n {
            let pivot = self.data[self.idx(k, k)];
            if pivot.abs() < 1e-300 || !pivot.is_finite() {
                return Err(k);
            }
            let row_end = (k + self.kl + 1).min(self.n);
            let col_end = (k + self.ku + 1).min(self.n);
            for i in k + 1..row_end {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == 0.0 {
                    continue;
                }
                for j in k + 1..col_end {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        for i in 0..self.n {
            let start = i.saturating_sub(self.kl);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i).skip(start) {
                s -= self.data[self.idx(i, j)] * xj;
            }
            x[i] = s;
        }
        for i in (0..self.n).rev() {
            let end = (i + self.ku + 1).min(self.n);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(end).skip(i + 1) {
                s -= self.data[self.idx(i, j)] * xj;
            }
            x[i] = s / self.data[self.idx(i, i)];
        }
        x
    }
}

/// Per-start-state solution; index `z` holds the value for start size `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub state_cap: u64,
    pub extinction_probability: Vec<f64>,
    pub expected_absorption_time: Vec<f64>,
    /// Probability of touching the cap before extinction; `1` at the cap.
    pub cap_hit_probability: Vec<f64>,
}

impl ExactSolution {
    /// Errors unless the truncation is invisible from `start` at `tolerance`.
    pub fn check_tail(&self, start: u64, tolerance: f64) -> Result<(), OracleError> {
        if start >= self.state_cap {
            return Err(OracleError::StartBeyondCap {
                start,
                cap: self.state_cap,
            });
        }
        let mass = self.cap_hit_probability[start as usize];
        if mass > tolerance {
            return Err(OracleError::TailTooHeavy {
                cap: self.state_cap,
                start,
                mass,
                tolerance,
            });
        }
        Ok(())
    }
}

pub fn solve_chain(chain: &AbsorbingChain) -> Result<ExactSolution, OracleError> {
    let cap = chain.cap();
    let n = cap as usize;
    let mut to_zero = vec![0.0; n];
    for z in 1..=cap {
        to_zero[(z - 1) as usize] = chain
            .row(z)
            .iter()
            .filter(|&&(t, _)| t == 0)
            .map(|&(_, p)| p)
            .sum();
    }
    let sol = chain.solve_restricted(cap, &[to_zero, vec![1.0; n]])?;
    let mut extinction_probability = vec![1.0];
    extinction_probability.extend(sol[0].iter().map(|p| p.clamp(0.0, 1.0)));
    let mut expected_absorption_time = vec![0.0];
    expected_absorption_time.extend(sol[1].iter().map(|t| t.max(0.0)));

    let mut cap_hit_probability = vec![0.0; n + 1];
    cap_hit_probability[n] = 1.0;
    if cap > 1 {
        let to_cap: Vec<f64> = (1..cap)
            .map(|z| {
                chain
                    .row(z)
                    .iter()
                    .filter(|&&(t, _)| t == cap)
                    .map(|&(_, p)| p)
                    .sum()
            })
            .collect();
        let h = chain.solve_restricted(cap - 1, &[to_cap])?;
        for (z, v) in h[0].iter().enumerate() {
            cap_hit_probability[z + 1] = v.clamp(0.0, 1.0);
        }
    }
    Ok(ExactSolution {
        state_cap: cap,
        extinction_probability,
        expected_absorption_time,
        cap_hit_probability,
    })
}

/// First-step solution of `law` truncated to `{0, ..., state_cap}`.
pub fn exact_absorption<L: ChangeLaw + ?Sized>(
    law: &L,
    state_cap: u64,
) -> Result<ExactSolution, OracleError> {
    solve_chain(&AbsorbingChain::from_law(law, state_cap)?)
}

/// [`exact_absorption`], refusing unless the probability of reaching the
/// cap from `start` is at most `tolerance`.
pub fn exact_absorption_bounded<L: ChangeLaw + ?Sized>(
    law: &L,
    state_cap: u64,
    start: u64,
    tolerance: f64,
) -> Result<ExactSolution, OracleError> {
    let sol = exact_absorption(law, state_cap)?;
    sol.check_tail(start, tolerance)?;
    Ok(sol)
}

/// Probability that a ±1 walk with up-probability `p` started at `i` hits
/// `n` before `0`.
pub fn gamblers_ruin_up(p: f64, i: u64, n: u64) -> f64 {
    if i >= n {
        return 1.0;
    }
    if i == 0 {
        return 0.0;
    }
    let q = 1.0 - p;
    if (p - q).abs() < 1e-15 {
        return i as f64 / n as f64;
    }
    let r = q / p;
    (1.0 - r.powi(i as i32)) / (1.0 - r.powi(n as i32))
}

/// Survival probability of the visit-decay counterexample:
/// `prod_{k >= 1} (1 - base^(k+2))`, truncated once terms stop mattering.
pub fn counterexample_survival(decay_base: f64) -> f64 {
    let mut prod = 1.0;
    let mut term = decay_base.powi(3);
    let mut j = 3;
    while term > 1e-18 && j <= 2000 {
        prod *= 1.0 - term;
        term *= decay_base;
        j += 1;
    }
    prod
}
