//! Offline optimization oracles: global minimizers of
//! `sum_i loss_i(w) - sigma.w` over a box, realized by exhaustive grid search
//! with a certified discretization error and lexicographic tie-breaking.

use std::fmt;
use std::sync::Arc;

use crate::domain::{dot, BoxDomain, CallCounter, CallCounts, LossFunction, EXACT_TOL};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridCache};
use crate::par::Execution;

pub use crate::grid::OracleAnswer;

/// Default point budget for d-dimensional grid search.
pub const DEFAULT_GRID_BUDGET: usize = 1 << 22;
/// Default point budget for the one-dimensional scan (h = 1e-6 on [-1, 1]
/// needs about 2e6 points).
pub const DEFAULT_SCAN_BUDGET: usize = 1 << 24;

/// Input to an offline oracle call.
#[derive(Debug, Clone, Copy)]
pub struct OracleRequest<'a> {
    pub losses: &'a [LossFunction],
    pub sigma: &'a [f64],
    pub domain: &'a BoxDomain,
}

impl<'a> OracleRequest<'a> {
    pub fn new(losses: &'a [LossFunction], sigma: &'a [f64], domain: &'a BoxDomain) -> Self {
        Self { losses, sigma, domain }
    }
}

/// An offline optimization oracle.
///
/// Implementations expose a [`GridCache`] so that learners can grow the
/// cumulative loss incrementally; `minimize` must agree bit-for-bit with
/// pushing the request's losses into a fresh cache and calling `argmin`.
pub trait OfflineOracle: Send + Sync {
    fn resolution(&self) -> f64;

    /// Fresh cache over `domain` holding the empty sum.
    fn cache(&self, domain: &BoxDomain) -> Result<GridCache>;

    fn minimize(&self, request: &OracleRequest<'_>, counter: &CallCounter) -> Result<OracleAnswer> {
        request.domain.check_dim(request.sigma.len())?;
        let mut cache = self.cache(request.domain)?;
        for loss in request.losses {
            cache.push(loss)?;
        }
        cache.argmin(request.sigma, counter)
    }
}

/// Exhaustive search over a uniform grid of resolution `h` in any dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOracle {
    pub resolution: f64,
    pub budget: usize,
    pub execution: Execution,
}

impl GridOracle {
    pub fn new(resolution: f64) -> Self {
        Self {
            resolution,
            budget: DEFAULT_GRID_BUDGET,
            execution: Execution::default(),
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

impl OfflineOracle for GridOracle {
    fn resolution(&self) -> f64 {
        self.resolution
    }

    fn cache(&self, domain: &BoxDomain) -> Result<GridCache> {
        let grid = Grid::new(domain, self.resolution, self.budget)?;
        Ok(GridCache::new(Arc::new(grid), self.execution))
    }
}

/// High-resolution scan of a one-dimensional box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOracle {
    pub resolution: f64,
    pub budget: usize,
    pub execution: Execution,
}

impl ScanOracle {
    pub fn new(resolution: f64) -> Self {
        Self {
            resolution,
            budget: DEFAULT_SCAN_BUDGET,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

impl OfflineOracle for ScanOracle {
    fn resolution(&self) -> f64 {
        self.resolution
    }

    fn cache(&self, domain: &BoxDomain) -> Result<GridCache> {
        if domain.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: domain.dim(),
            });
        }
        let grid = Grid::new(domain, self.resolution, self.budget)?;
        Ok(GridCache::new(Arc::new(grid), self.execution))
    }
}

/// Grid search with the default budget.
pub fn grid_minimize(request: &OracleRequest<'_>, resolution: f64, counter: &CallCounter) -> Result<OracleAnswer> {
    GridOracle::new(resolution).minimize(request, counter)
}

/// One-dimensional scan; fails unless the domain is an interval.
pub fn scan_minimize_1d(request: &OracleRequest<'_>, resolution: f64, counter: &CallCounter) -> Result<OracleAnswer> {
    ScanOracle::new(resolution).minimize(request, counter)
}

/// Both sides of the first-order comparison between two perturbed minimizers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderGap {
    /// `f(w1) - f(w2)` with `f = sum f1 - sum f2`.
    pub lhs: f64,
    /// `(sigma1 - sigma2).(w1 - w2)`.
    pub rhs: f64,
    /// Sum of both answers' error bounds.
    pub slack: f64,
    pub holds: bool,
}

/// Checks `f(w1) - f(w2) <= (sigma1 - sigma2).(w1 - w2)` where `w_i`
/// minimizes `sum f_i - sigma_i.w`, up to the two answers' error bounds.
///
/// Evaluations here are analysis-side and are not charged to any counter.
pub fn verify_first_order_gap(
    f1: &[LossFunction],
    sigma1: &[f64],
    w1: &OracleAnswer,
    f2: &[LossFunction],
    sigma2: &[f64],
    w2: &OracleAnswer,
) -> FirstOrderGap {
    let total = |fs: &[LossFunction], w: &[f64]| fs.iter().fold(0.0, |acc, l| acc + l.value(w));
    let f = |w: &[f64]| total(f1, w) - total(f2, w);
    let lhs = f(&w1.w_hat) - f(&w2.w_hat);
    let dsigma: Vec<f64> = sigma1.iter().zip(sigma2).map(|(a, b)| a - b).collect();
    let dw: Vec<f64> = w1.w_hat.iter().zip(&w2.w_hat).map(|(a, b)| a - b).collect();
    let rhs = dot(&dsigma, &dw);
    let slack = w1.error_bound + w2.error_bound;
    // Floating-point headroom proportional to the magnitudes involved.
    let scale = 1.0 + lhs.abs() + rhs.abs() + w1.objective.abs() + w2.objective.abs();
    FirstOrderGap {
        lhs,
        rhs,
        slack,
        holds: lhs <= rhs + slack + EXACT_TOL * scale,
    }
}

/// Oracle-complexity summary: samples + value calls + offline calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleReport {
    pub sample_count: u64,
    pub value_calls: u64,
    pub offline_calls: u64,
    pub oracle_complexity: u64,
}

impl From<CallCounts> for OracleReport {
    fn from(c: CallCounts) -> Self {
        Self {
            sample_count: c.sample_count,
            value_calls: c.value_calls,
            offline_calls: c.offline_calls,
            oracle_complexity: c.oracle_complexity(),
        }
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "sample_count = {}", self.sample_count)?;
        writeln!(f, "value_calls = {}", self.value_calls)?;
        writeln!(f, "offline_calls = {}", self.offline_calls)?;
        write!(f, "oracle_complexity = {}", self.oracle_complexity)
    }
}

pub fn oracle_report(counter: &CallCounter) -> OracleReport {
    counter.snapshot().into()
}
