//! Online-to-batch conversion: run an online learner over an i.i.d. sample
//! and return the iterate of a uniformly random round.

use rand::Rng;

use crate::adversary::Replay;
use crate::domain::{evaluate, BoxDomain, CallCounter, LossFunction};
use crate::error::{Error, Result};
use crate::learners::{OnlineLearner, Trajectory};
use crate::oracles::OfflineOracle;
use crate::stats::MeanEstimate;

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub w_hat: Vec<f64>,
    /// The selected round, numbered from 1.
    pub round: usize,
    /// Held-out risk of `w_hat` (mean loss over the evaluation sample).
    pub risk_estimate: MeanEstimate,
    pub trajectory: Trajectory,
}

/// Runs `learner` over `sample` in order, draws `j` uniformly from `1..=n` and
/// returns `w_j` with its risk on `eval_sample`.
///
/// The `n` training losses are charged to the sample count; each held-out
/// evaluation is one value call.
pub fn online_to_batch<R: Rng + ?Sized>(
    sample: &[LossFunction],
    domain: &BoxDomain,
    learner: &dyn OnlineLearner,
    oracle: &dyn OfflineOracle,
    eval_sample: &[LossFunction],
    rng: &mut R,
    counter: &CallCounter,
) -> Result<BatchOutcome> {
    if sample.is_empty() || eval_sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len();
    counter.record_samples(n as u64);
    let mut replay = Replay::new(domain.clone(), sample.to_vec());
    let trajectory = learner.run(&mut replay, n, oracle, counter)?;
    let round = rng.random_range(1..=n);
    let w_hat = trajectory.rounds[round - 1].w.clone();
    let risks = eval_sample
        .iter()
        .map(|l| evaluate(l, domain, &w_hat, counter))
        .collect::<Result<Vec<_>>>()?;
    Ok(BatchOutcome {
        w_hat,
        round,
        risk_estimate: MeanEstimate::from_samples(&risks),
        trajectory,
    })
}
