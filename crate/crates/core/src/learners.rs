//! Non-convex Follow-the-Perturbed-Leader and the regularized baseline.
//!
//! FTPL plays
//!
//! ```text
//! w_t = argmin { sum_{i<t} l_i(w) - sigma_t.w : w in W },   sigma_t ~ Exp(eta)^d
//! ```
//!
//! using one offline-oracle call per round. The point `w_t` is committed
//! before `l_t` is requested from the adversary, and the incurred loss
//! `l_t(w_t)` is charged as one value-oracle call.

use crate::adversary::Adversary;
use crate::domain::{evaluate, BoxDomain, CallCounter, CallCounts, LossFunction, NoiseVector};
use crate::error::{Error, Result};
use crate::losses;
use crate::noise::{sample_exp_noise, stream_rng};
use crate::oracles::{OfflineOracle, OracleRequest};

/// How FTPL draws its perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// A fresh `Exp(eta)^d` vector every round.
    #[default]
    FreshPerRound,
    /// One vector drawn before round 1 and reused (the oblivious-adversary
    /// variant).
    SingleDraw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtplConfig {
    pub eta: f64,
    pub noise_mode: NoiseMode,
    pub seed: u64,
    /// Random stream within `seed`; distinct players or trials use distinct
    /// streams.
    pub stream: u64,
}

impl FtplConfig {
    pub fn new(eta: f64, seed: u64) -> Self {
        Self {
            eta,
            noise_mode: NoiseMode::FreshPerRound,
            seed,
            stream: 0,
        }
    }

    pub fn single_draw(mut self) -> Self {
        self.noise_mode = NoiseMode::SingleDraw;
        self
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.eta > 0.0 && self.eta.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("eta must be positive, got {}", self.eta)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularizer {
    L2,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtrlConfig {
    pub regularizer: Regularizer,
    pub weight: f64,
}

impl FtrlConfig {
    pub fn l2(weight: f64) -> Self {
        Self {
            regularizer: Regularizer::L2,
            weight,
        }
    }

    pub fn l1(weight: f64) -> Self {
        Self {
            regularizer: Regularizer::L1,
            weight,
        }
    }

    /// The regularizer as a synthetic loss on `domain`.
    pub fn regularizer_loss(&self, domain: &BoxDomain) -> Result<LossFunction> {
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::invalid(format!(
                "regularization weight must be nonnegative, got {}",
                self.weight
            )));
        }
        Ok(match self.regularizer {
            Regularizer::L2 => losses::l2_regularizer(domain, self.weight),
            Regularizer::L1 => losses::l1_regularizer(domain, self.weight),
        })
    }
}

/// Which learner produced a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerSnapshot {
    Ftpl(FtplConfig),
    /// FTPL run on a caller-supplied perturbation.
    FixedNoise(Vec<f64>),
    Ftrl(FtrlConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub t: usize,
    /// Perturbation used for this round (zero for FTRL).
    pub sigma: Vec<f64>,
    pub w: Vec<f64>,
    pub incurred_loss: f64,
    /// Counter totals right after the round.
    pub counts: CallCounts,
}

/// Per-round log of a run together with the realized losses.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub domain: BoxDomain,
    pub rounds: Vec<Round>,
    pub losses: Vec<LossFunction>,
    pub learner: LearnerSnapshot,
    pub counts: CallCounts,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.rounds.iter().map(|r| r.w.as_slice())
    }

    pub fn total_loss(&self) -> f64 {
        self.rounds.iter().map(|r| r.incurred_loss).sum()
    }

    /// The shared perturbation if every round used the same one.
    pub fn fixed_sigma(&self) -> Option<&[f64]> {
        let single = match &self.learner {
            LearnerSnapshot::Ftpl(c) => c.noise_mode == NoiseMode::SingleDraw,
            LearnerSnapshot::FixedNoise(_) => true,
            LearnerSnapshot::Ftrl(_) => false,
        };
        if single {
            self.rounds.first().map(|r| r.sigma.as_slice())
        } else {
            None
        }
    }
}

/// Parameters suggested by the regret analysis for horizon `T` in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub eta: f64,
    /// Margin of the multi-dimensional stability argument; `None` in one
    /// dimension where it is not needed.
    pub delta: Option<f64>,
    pub horizon: usize,
    pub dim: usize,
}

/// `eta = T^{-2/3}`, `delta = T^{-1/3}` for `d >= 2`; `eta = T^{-1/2}` for `d = 1`.
pub fn schedule_params(horizon: usize, dim: usize) -> Schedule {
    let t = horizon.max(1) as f64;
    if dim <= 1 {
        Schedule {
            eta: t.powf(-0.5),
            delta: None,
            horizon,
            dim,
        }
    } else {
        Schedule {
            eta: t.powf(-2.0 / 3.0),
            delta: Some(t.powf(-1.0 / 3.0)),
            horizon,
            dim,
        }
    }
}

/// A single FTPL prediction: the oracle minimizer of `history - sigma.w`.
pub fn ftpl_step(
    history: &[LossFunction],
    sigma: &NoiseVector,
    domain: &BoxDomain,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<Vec<f64>> {
    domain.check_dim(sigma.dim())?;
    Ok(oracle
        .minimize(&OracleRequest::new(history, sigma.sigma(), domain), counter)?
        .w_hat)
}

/// Shared round loop: the cache holds every loss revealed so far (plus any
/// synthetic terms pushed before the loop).
fn play<N>(
    adversary: &mut dyn Adversary,
    rounds: usize,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
    seed_losses: &[LossFunction],
    learner: LearnerSnapshot,
    mut noise: N,
) -> Result<Trajectory>
where
    N: FnMut(usize) -> Result<Vec<f64>>,
{
    if rounds == 0 {
        return Err(Error::invalid("horizon T must be at least 1"));
    }
    let domain = adversary.domain().clone();
    let mut cache = oracle.cache(&domain)?;
    for l in seed_losses {
        cache.push(l)?;
    }
    let mut log = Vec::with_capacity(rounds);
    let mut realized = Vec::with_capacity(rounds);
    for t in 1..=rounds {
        let sigma = noise(t)?;
        let w = cache.argmin(&sigma, counter)?.w_hat;
        let loss = adversary.loss_at(t, &w);
        if loss.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: loss.dim(),
            });
        }
        let incurred_loss = evaluate(&loss, &domain, &w, counter)?;
        cache.push(&loss)?;
        realized.push(loss);
        log.push(Round {
            t,
            sigma,
            w,
            incurred_loss,
            counts: counter.snapshot(),
        });
    }
    Ok(Trajectory {
        domain,
        rounds: log,
        losses: realized,
        learner,
        counts: counter.snapshot(),
    })
}

/// Runs non-convex FTPL for `rounds` rounds.
pub fn ftpl_run(
    adversary: &mut dyn Adversary,
    rounds: usize,
    config: &FtplConfig,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<Trajectory> {
    config.validate()?;
    let d = adversary.domain().dim();
    let mut rng = stream_rng(config.seed, config.stream);
    let single = match config.noise_mode {
        NoiseMode::SingleDraw => Some(sample_exp_noise(config.eta, d, &mut rng)?.sigma().to_vec()),
        NoiseMode::FreshPerRound => None,
    };
    play(
        adversary,
        rounds,
        oracle,
        counter,
        &[],
        LearnerSnapshot::Ftpl(*config),
        |_| match &single {
            Some(s) => Ok(s.clone()),
            None => Ok(sample_exp_noise(config.eta, d, &mut rng)?.sigma().to_vec()),
        },
    )
}

/// FTPL with a caller-chosen perturbation held fixed for every round. With
/// `sigma = 0` this is Follow-the-Leader with lexicographic tie-breaking.
pub fn ftpl_run_with_noise(
    adversary: &mut dyn Adversary,
    rounds: usize,
    sigma: &[f64],
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<Trajectory> {
    adversary.domain().check_dim(sigma.len())?;
    play(
        adversary,
        rounds,
        oracle,
        counter,
        &[],
        LearnerSnapshot::FixedNoise(sigma.to_vec()),
        |_| Ok(sigma.to_vec()),
    )
}

/// Follow-the-Regularized-Leader: `argmin sum_{i<t} l_i(w) + R(w)`. The
/// regularizer goes to the oracle as an extra loss term with `sigma = 0`.
pub fn ftrl_run(
    adversary: &mut dyn Adversary,
    rounds: usize,
    config: &FtrlConfig,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<Trajectory> {
    let reg = config.regularizer_loss(adversary.domain())?;
    let d = adversary.domain().dim();
    play(
        adversary,
        rounds,
        oracle,
        counter,
        &[reg],
        LearnerSnapshot::Ftrl(*config),
        |_| Ok(vec![0.0; d]),
    )
}

/// Anything that can be run online against an adversary.
pub trait OnlineLearner: Sync {
    fn run(
        &self,
        adversary: &mut dyn Adversary,
        rounds: usize,
        oracle: &dyn OfflineOracle,
        counter: &CallCounter,
    ) -> Result<Trajectory>;
}

impl OnlineLearner for FtplConfig {
    fn run(
        &self,
        adversary: &mut dyn Adversary,
        rounds: usize,
        oracle: &dyn OfflineOracle,
        counter: &CallCounter,
    ) -> Result<Trajectory> {
        ftpl_run(adversary, rounds, self, oracle, counter)
    }
}

impl OnlineLearner for FtrlConfig {
    fn run(
        &self,
        adversary: &mut dyn Adversary,
        rounds: usize,
        oracle: &dyn OfflineOracle,
        counter: &CallCounter,
    ) -> Result<Trajectory> {
        ftrl_run(adversary, rounds, self, oracle, counter)
    }
}
