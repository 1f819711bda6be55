//! Probes of FTPL's round-to-round stability under shifted perturbations.
//!
//! For a prefix `L_{t-1}` and a new loss `l_t`, write `w_t(s)` for the
//! minimizer of `L_{t-1} - s.w` and `w_{t+1}(s)` for that of
//! `L_{t-1} + l_t - s.w`. In one dimension, shifting the noise by `2G`
//! (`G` the Lipschitz constant of `l_t`) moves both minimizers past both
//! unshifted ones:
//!
//! ```text
//! min(w_t(s + 2G), w_{t+1}(s + 2G)) >= max(w_t(s), w_{t+1}(s))
//! ```
//!
//! In `d` dimensions the same holds per coordinate `k` up to a margin
//! `delta`, with the shift `3B/delta` applied to `s_k` only (`B` the range
//! bound of `l_t`). Both facts follow from the first-order comparison in
//! [`verify_first_order_gap`], which is also checked on every logged pair.

use crate::domain::{l1_distance, BoxDomain, CallCounter, LossFunction};
use crate::error::{Error, Result};
use crate::grid::{GridCache, OracleAnswer};
use crate::noise::{sample_exp_noise, stream_rng};
use crate::oracles::{verify_first_order_gap, OfflineOracle};
use crate::par::{map_indexed, Execution};
use crate::stats::MeanEstimate;

/// Outcome of a stability probe over many noise draws.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `||w_t(s) - w_{t+1}(s)||_1` per draw.
    pub gaps: Vec<f64>,
    pub mean_gap: MeanEstimate,
    /// Draws (or draw-coordinate pairs) where the shifted-noise ordering
    /// failed by more than `tolerance`.
    pub monotonicity_violations: usize,
    /// Violations of each one-sided relation, in the order
    /// `w_t(s') >= w_{t+1}(s)`, `w_{t+1}(s') >= w_t(s)`,
    /// `w_t(s') >= w_t(s)`, `w_{t+1}(s') >= w_{t+1}(s)`.
    pub relation_violations: [usize; 4],
    /// Logged minimizer pairs failing the first-order comparison.
    pub first_order_violations: usize,
    pub first_order_checks: usize,
    /// Margin `delta` (multi-dimensional probe only).
    pub delta: Option<f64>,
    /// Magnitude of the noise shift: `2G` or `3B/delta`.
    pub shift: f64,
    /// Slack allowed on each ordering comparison.
    pub tolerance: f64,
    pub draws: usize,
}

impl StabilityReport {
    /// `2 * eta * D * G + 2h`: the one-dimensional bound on the expected gap
    /// (plus discretization).
    pub fn one_dim_bound(eta: f64, diameter: f64, lipschitz: f64, resolution: f64) -> f64 {
        2.0 * eta * diameter * lipschitz + 2.0 * resolution
    }
}

struct DrawOutcome {
    gap: f64,
    relations: [usize; 4],
    monotone_violations: usize,
    first_order_violations: usize,
    first_order_checks: usize,
}

/// Caches for `L_{t-1}` and `L_{t-1} + l_t`.
struct ProbeCaches {
    before: GridCache,
    after: GridCache,
    prefix: Vec<LossFunction>,
    extended: Vec<LossFunction>,
}

impl ProbeCaches {
    fn build(
        domain: &BoxDomain,
        prefix: &[LossFunction],
        new_loss: &LossFunction,
        oracle: &dyn OfflineOracle,
    ) -> Result<Self> {
        let mut before = oracle.cache(domain)?;
        for l in prefix {
            before.push(l)?;
        }
        let mut after = before.clone();
        after.push(new_loss)?;
        let mut extended = prefix.to_vec();
        extended.push(new_loss.clone());
        Ok(Self {
            before,
            after,
            prefix: prefix.to_vec(),
            extended,
        })
    }

    /// First-order checks for the two cross pairs `(w_t(s'), w_{t+1}(s))` and
    /// `(w_{t+1}(s'), w_t(s))`. Returns the number of failures.
    fn first_order(
        &self,
        sigma: &[f64],
        shifted: &[f64],
        a: &OracleAnswer,
        b: &OracleAnswer,
        a_shift: &OracleAnswer,
        b_shift: &OracleAnswer,
    ) -> usize {
        let c1 = verify_first_order_gap(&self.prefix, shifted, a_shift, &self.extended, sigma, b);
        let c2 = verify_first_order_gap(&self.extended, shifted, b_shift, &self.prefix, sigma, a);
        usize::from(!c1.holds) + usize::from(!c2.holds)
    }
}

fn relations(
    k: usize,
    a: &OracleAnswer,
    b: &OracleAnswer,
    a_shift: &OracleAnswer,
    b_shift: &OracleAnswer,
    tol: f64,
) -> ([usize; 4], bool) {
    let (a, b, a2, b2) = (a.w_hat[k], b.w_hat[k], a_shift.w_hat[k], b_shift.w_hat[k]);
    let rel = [
        usize::from(a2 < b - tol),
        usize::from(b2 < a - tol),
        usize::from(a2 < a - tol),
        usize::from(b2 < b - tol),
    ];
    (rel, a2.min(b2) < a.max(b) - tol)
}

fn assemble(outcomes: Vec<DrawOutcome>, delta: Option<f64>, shift: f64, tolerance: f64) -> StabilityReport {
    let gaps: Vec<f64> = outcomes.iter().map(|o| o.gap).collect();
    let mut relation_violations = [0; 4];
    for o in &outcomes {
        for (acc, r) in relation_violations.iter_mut().zip(o.relations) {
            *acc += r;
        }
    }
    StabilityReport {
        mean_gap: MeanEstimate::from_samples(&gaps),
        monotonicity_violations: outcomes.iter().map(|o| o.monotone_violations).sum(),
        relation_violations,
        first_order_violations: outcomes.iter().map(|o| o.first_order_violations).sum(),
        first_order_checks: outcomes.iter().map(|o| o.first_order_checks).sum(),
        delta,
        shift,
        tolerance,
        draws: gaps.len(),
        gaps,
    }
}

/// Settings shared by both probes.
#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    pub eta: f64,
    pub draws: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl ProbeConfig {
    pub fn new(eta: f64, draws: usize, seed: u64) -> Self {
        Self {
            eta,
            draws,
            seed,
            execution: Execution::default(),
        }
    }
}

/// One-dimensional probe: four minimizers per draw at `s` and `s + 2G`.
/// Ordering comparisons allow a slack of one grid step.
pub fn stability_probe_1d(
    domain: &BoxDomain,
    prefix: &[LossFunction],
    new_loss: &LossFunction,
    config: &ProbeConfig,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<StabilityReport> {
    if domain.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: domain.dim(),
        });
    }
    let caches = ProbeCaches::build(domain, prefix, new_loss, oracle)?;
    let shift = 2.0 * new_loss.lipschitz();
    let tol = oracle.resolution();
    let outcomes = map_indexed(config.execution, config.draws, |i| -> Result<DrawOutcome> {
        let mut rng = stream_rng(config.seed, i as u64);
        let sigma = sample_exp_noise(config.eta, 1, &mut rng)?.sigma().to_vec();
        let shifted = vec![sigma[0] + shift];
        let a = caches.before.argmin(&sigma, counter)?;
        let b = caches.after.argmin(&sigma, counter)?;
        let a2 = caches.before.argmin(&shifted, counter)?;
        let b2 = caches.after.argmin(&shifted, counter)?;
        let (rel, bad) = relations(0, &a, &b, &a2, &b2, tol);
        Ok(DrawOutcome {
            gap: (a.w_hat[0] - b.w_hat[0]).abs(),
            relations: rel,
            monotone_violations: usize::from(bad),
            first_order_violations: caches.first_order(&sigma, &shifted, &a, &b, &a2, &b2),
            first_order_checks: 2,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(assemble(outcomes, None, shift, tol))
}

/// Multi-dimensional probe: for every coordinate `k` the noise is shifted by
/// `3B/delta` along `e_k`, and the per-coordinate ordering is checked up to
/// `delta` plus one grid step.
pub fn stability_probe_kd(
    domain: &BoxDomain,
    prefix: &[LossFunction],
    new_loss: &LossFunction,
    delta: f64,
    config: &ProbeConfig,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<StabilityReport> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::invalid(format!("margin delta must be positive, got {delta}")));
    }
    let d = domain.dim();
    let caches = ProbeCaches::build(domain, prefix, new_loss, oracle)?;
    let shift = 3.0 * new_loss.bound() / delta;
    let tol = delta + oracle.resolution();
    let outcomes = map_indexed(config.execution, config.draws, |i| -> Result<DrawOutcome> {
        let mut rng = stream_rng(config.seed, i as u64);
        let sigma = sample_exp_noise(config.eta, d, &mut rng)?.sigma().to_vec();
        let a = caches.before.argmin(&sigma, counter)?;
        let b = caches.after.argmin(&sigma, counter)?;
        let mut out = DrawOutcome {
            gap: l1_distance(&a.w_hat, &b.w_hat)?,
            relations: [0; 4],
            monotone_violations: 0,
            first_order_violations: 0,
            first_order_checks: 0,
        };
        for k in 0..d {
            let mut shifted = sigma.clone();
            shifted[k] += shift;
            let a2 = caches.before.argmin(&shifted, counter)?;
            let b2 = caches.after.argmin(&shifted, counter)?;
            let (rel, bad) = relations(k, &a, &b, &a2, &b2, tol);
            for (acc, r) in out.relations.iter_mut().zip(rel) {
                *acc += r;
            }
            out.monotone_violations += usize::from(bad);
            out.first_order_violations += caches.first_order(&sigma, &shifted, &a, &b, &a2, &b2);
            out.first_order_checks += 2;
        }
        Ok(out)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(assemble(outcomes, Some(delta), shift, tol))
}

/// Round-to-round l1 movement of a live trajectory (no shifted recomputation).
pub fn trajectory_step_gaps(points: &[Vec<f64>]) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| l1_distance(&w[0], &w[1]).expect("points share the dimension"))
        .collect()
}
