//! Two-player zero-sum games played by two FTPL learners, and equilibrium
//! certificates computed with the offline oracle.
//!
//! The x-player minimizes `F(x, y)` and the y-player maximizes it. In round
//! `t` both commit to `(x_t, y_t)` from the histories of rounds before `t`;
//! then the x-player receives the loss `F(., y_t)` and the y-player the loss
//! `-F(x_t, .)`.

pub mod experts;

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::domain::{evaluate, BoxDomain, CallCounter, CallCounts, LossFunction};
use crate::error::{Error, Result};
use crate::learners::{FtplConfig, NoiseMode};
use crate::noise::{sample_exp_noise, stream_rng};
use crate::oracles::OfflineOracle;

type Payoff = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A payoff `F(x, y)` on `X x Y` whose slices `F(., y)` and `-F(x, .)` are
/// `G`-Lipschitz and `B`-bounded.
#[derive(Clone)]
pub struct ZeroSumGame {
    payoff: Payoff,
    domain_x: BoxDomain,
    domain_y: BoxDomain,
    lipschitz: f64,
    bound: f64,
    label: String,
}

impl fmt::Debug for ZeroSumGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZeroSumGame")
            .field("label", &self.label)
            .field("domain_x", &self.domain_x)
            .field("domain_y", &self.domain_y)
            .field("lipschitz", &self.lipschitz)
            .field("bound", &self.bound)
            .finish()
    }
}

impl ZeroSumGame {
    pub fn new<F>(
        label: impl Into<String>,
        domain_x: BoxDomain,
        domain_y: BoxDomain,
        lipschitz: f64,
        bound: f64,
        payoff: F,
    ) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            payoff: Arc::new(payoff),
            domain_x,
            domain_y,
            lipschitz,
            bound,
            label: label.into(),
        }
    }

    /// `F(x, y) = x.y` on `[-1, 1]^d x [-1, 1]^d`, saddle point at the origin.
    pub fn bilinear(dim: usize) -> Result<Self> {
        let dom = BoxDomain::cube(dim, -1.0, 1.0)?;
        Ok(Self::new("bilinear", dom.clone(), dom, 1.0, dim as f64, |x, y| {
            x.iter().zip(y).fold(0.0, |acc, (a, b)| acc + a * b)
        }))
    }

    /// `F(x, y) = phi(x) - phi(y)` with the double well
    /// `phi(u) = (u^2 - 1/4)^2` on `[-1, 1]`. Every pair of wells
    /// `(+-1/2, +-1/2)` is a saddle point.
    pub fn double_well() -> Self {
        let dom = BoxDomain::symmetric_interval();
        // phi'(u) = 4u(u^2 - 1/4) peaks at |u| = 1 with value 3; phi <= 9/16.
        Self::new("double-well", dom.clone(), dom, 3.0, 0.5625, |x, y| {
            double_well_potential(x[0]) - double_well_potential(y[0])
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain_x(&self) -> &BoxDomain {
        &self.domain_x
    }

    pub fn domain_y(&self) -> &BoxDomain {
        &self.domain_y
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn payoff(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.payoff)(x, y)
    }

    /// The x-player's loss `F(., y)`.
    pub fn x_slice(&self, y: &[f64]) -> LossFunction {
        let payoff = Arc::clone(&self.payoff);
        let y = y.to_vec();
        let label = format!("{}(., {y:?})", self.label);
        LossFunction::new(self.domain_x.dim(), label, self.lipschitz, self.bound, move |x| payoff(x, &y))
    }

    /// The y-player's loss `-F(x, .)`.
    pub fn y_slice(&self, x: &[f64]) -> LossFunction {
        let payoff = Arc::clone(&self.payoff);
        let x = x.to_vec();
        let label = format!("-{}({x:?}, .)", self.label);
        LossFunction::new(self.domain_y.dim(), label, self.lipschitz, self.bound, move |y| -payoff(&x, y))
    }
}

pub fn double_well_potential(u: f64) -> f64 {
    let v = u * u - 0.25;
    v * v
}

/// Toy generator/discriminator game on `[-1, 1] x [-1, 1]`: the generator
/// places a point `x`, the discriminator scores its offset from `target`
/// with a saturating ramp, `F(x, y) = clamp(y (x - target), -1, 1)`.
///
/// With `|target| <= 1/2`, `|x - target| <= 3/2` and `|y| <= 1`, so both
/// slices are `3/2`-Lipschitz and bounded by 1.
pub fn make_toy_gan_game(target: f64) -> Result<ZeroSumGame> {
    if !(-0.5..=0.5).contains(&target) {
        return Err(Error::invalid(format!("target must lie in [-0.5, 0.5], got {target}")));
    }
    let dom = BoxDomain::symmetric_interval();
    Ok(ZeroSumGame::new(
        format!("toy-gan(target={target})"),
        dom.clone(),
        dom,
        1.5,
        1.0,
        move |x, y| (y[0] * (x[0] - target)).clamp(-1.0, 1.0),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfPlayRound {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub sigma_y: Vec<f64>,
    /// `F(x_t, y_t)`, the x-player's incurred loss.
    pub x_loss: f64,
    /// `-F(x_t, y_t)`, the y-player's incurred loss.
    pub y_loss: f64,
    pub counts: CallCounts,
}

#[derive(Debug, Clone)]
pub struct SelfPlayTrajectory {
    pub rounds: Vec<SelfPlayRound>,
    pub config_x: FtplConfig,
    pub config_y: FtplConfig,
    pub counts: CallCounts,
}

impl SelfPlayTrajectory {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// `(1/T) sum_t F(x_t, y_t)`.
    pub fn average_payoff(&self) -> f64 {
        self.rounds.iter().map(|r| r.x_loss).sum::<f64>() / self.len() as f64
    }
}

struct PlayerNoise {
    config: FtplConfig,
    rng: crate::noise::SimRng,
    fixed: Option<Vec<f64>>,
    dim: usize,
}

impl PlayerNoise {
    fn new(config: &FtplConfig, dim: usize) -> Result<Self> {
        if !(config.eta > 0.0 && config.eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be positive, got {}", config.eta)));
        }
        let mut rng = stream_rng(config.seed, config.stream);
        let fixed = match config.noise_mode {
            NoiseMode::SingleDraw => Some(sample_exp_noise(config.eta, dim, &mut rng)?.sigma().to_vec()),
            NoiseMode::FreshPerRound => None,
        };
        Ok(Self {
            config: *config,
            rng,
            fixed,
            dim,
        })
    }

    fn next(&mut self) -> Result<Vec<f64>> {
        match &self.fixed {
            Some(s) => Ok(s.clone()),
            None => Ok(sample_exp_noise(self.config.eta, self.dim, &mut self.rng)?.sigma().to_vec()),
        }
    }
}

/// Simultaneous self-play: each round costs two offline calls (one per
/// player) and two value calls (each player's incurred loss).
///
/// The players must use distinct `(seed, stream)` pairs so that their
/// perturbations are independent.
pub fn selfplay_run(
    game: &ZeroSumGame,
    rounds: usize,
    config_x: &FtplConfig,
    config_y: &FtplConfig,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<SelfPlayTrajectory> {
    if rounds == 0 {
        return Err(Error::invalid("horizon T must be at least 1"));
    }
    if (config_x.seed, config_x.stream) == (config_y.seed, config_y.stream) {
        return Err(Error::invalid("players must use independent noise streams"));
    }
    let (dx, dy) = (game.domain_x.dim(), game.domain_y.dim());
    let mut noise_x = PlayerNoise::new(config_x, dx)?;
    let mut noise_y = PlayerNoise::new(config_y, dy)?;
    let mut cache_x = oracle.cache(&game.domain_x)?;
    let mut cache_y = oracle.cache(&game.domain_y)?;
    let mut log = Vec::with_capacity(rounds);
    for t in 1..=rounds {
        let sigma_x = noise_x.next()?;
        let sigma_y = noise_y.next()?;
        let x = cache_x.argmin(&sigma_x, counter)?.w_hat;
        let y = cache_y.argmin(&sigma_y, counter)?.w_hat;
        let loss_x = game.x_slice(&y);
        let loss_y = game.y_slice(&x);
        let x_loss = evaluate(&loss_x, &game.domain_x, &x, counter)?;
        let y_loss = evaluate(&loss_y, &game.domain_y, &y, counter)?;
        cache_x.push(&loss_x)?;
        cache_y.push(&loss_y)?;
        log.push(SelfPlayRound {
            t,
            x,
            y,
            sigma_x,
            sigma_y,
            x_loss,
            y_loss,
            counts: counter.snapshot(),
        });
    }
    Ok(SelfPlayTrajectory {
        rounds: log,
        config_x: *config_x,
        config_y: *config_y,
        counts: counter.snapshot(),
    })
}

/// A uniformly drawn round of a self-play run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPair {
    /// Round index, numbered from 1.
    pub round: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Draws `j` uniformly from `1..=T` and returns `(x_j, y_j)`.
pub fn sample_pair<R: Rng + ?Sized>(trajectory: &SelfPlayTrajectory, rng: &mut R) -> SampledPair {
    assert!(!trajectory.is_empty(), "cannot sample from an empty run");
    let round = rng.random_range(1..=trajectory.len());
    let r = &trajectory.rounds[round - 1];
    SampledPair {
        round,
        x: r.x.clone(),
        y: r.y.clone(),
    }
}

/// Unilateral-deviation gaps at a pair `(x_hat, y_hat)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCertificate {
    pub x_hat: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub value: f64,
    /// `F(x_hat, y_hat) - min_x F(x, y_hat)`.
    pub gap_x: f64,
    /// `max_y F(x_hat, y) - F(x_hat, y_hat)`.
    pub gap_y: f64,
    /// Sum of the two oracle error bounds; the true gaps lie in
    /// `[gap, gap + slack]`.
    pub slack: f64,
}

impl EquilibriumCertificate {
    pub fn gap_sum(&self) -> f64 {
        self.gap_x + self.gap_y
    }
}

/// Certifies `(x_hat, y_hat)` with two unperturbed offline calls.
pub fn equilibrium_gap(
    game: &ZeroSumGame,
    x_hat: &[f64],
    y_hat: &[f64],
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<EquilibriumCertificate> {
    game.domain_x.check_dim(x_hat.len())?;
    game.domain_y.check_dim(y_hat.len())?;
    let mut cache_x = oracle.cache(&game.domain_x)?;
    cache_x.push(&game.x_slice(y_hat))?;
    let best_x = cache_x.argmin(&vec![0.0; x_hat.len()], counter)?;
    let mut cache_y = oracle.cache(&game.domain_y)?;
    cache_y.push(&game.y_slice(x_hat))?;
    let best_y = cache_y.argmin(&vec![0.0; y_hat.len()], counter)?;
    let value = game.payoff(x_hat, y_hat);
    Ok(EquilibriumCertificate {
        x_hat: x_hat.to_vec(),
        y_hat: y_hat.to_vec(),
        value,
        gap_x: value - best_x.objective,
        gap_y: -best_y.objective - value,
        slack: best_x.error_bound + best_y.error_bound,
    })
}

/// Default number of candidate pairs drawn by [`amplified_certificate`].
pub const DEFAULT_AMPLIFICATION: usize = 8;

/// Draws `k` pairs with [`sample_pair`], certifies each (`2k` offline calls)
/// and returns the candidate with the smallest gap sum (earliest on ties)
/// together with all candidates in draw order.
pub fn amplified_certificate<R: Rng + ?Sized>(
    game: &ZeroSumGame,
    trajectory: &SelfPlayTrajectory,
    k: usize,
    rng: &mut R,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<(EquilibriumCertificate, Vec<EquilibriumCertificate>)> {
    if k == 0 {
        return Err(Error::invalid("amplification needs at least one candidate"));
    }
    if trajectory.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut candidates = Vec::with_capacity(k);
    for _ in 0..k {
        let pair = sample_pair(trajectory, rng);
        candidates.push(equilibrium_gap(game, &pair.x, &pair.y, oracle, counter)?);
    }
    let best = candidates
        .iter()
        .reduce(|a, b| if b.gap_sum() < a.gap_sum() { b } else { a })
        .cloned()
        .expect("k >= 1");
    Ok((best, candidates))
}

/// Gaps of the uniformly random pair in expectation over `j`: with
/// `x_hat = x_j`, `E[F(x_hat, y_hat)]` is the average payoff and
/// `E[F(x, y_hat)] = (1/T) sum_t F(x, y_t)`, so
///
/// ```text
/// gap_x = avg F(x_t, y_t) - min_x (1/T) sum_t F(x, y_t)   (x-player's average regret)
/// gap_y = max_y (1/T) sum_t F(x_t, y) - avg F(x_t, y_t)   (y-player's average regret)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AverageGap {
    pub average_payoff: f64,
    /// `min_x (1/T) sum_t F(x, y_t)`.
    pub min_x_average: f64,
    /// `max_y (1/T) sum_t F(x_t, y)`.
    pub max_y_average: f64,
    pub gap_x: f64,
    pub gap_y: f64,
    /// Average regrets of the two players computed from their own incurred
    /// losses.
    pub regret_x: f64,
    pub regret_y: f64,
    /// Error bounds of the two comparator computations, divided by `T`.
    pub slack: f64,
    /// Whether `avg <= min_x avg_x + regret_x` and `avg >= max_y avg_y - regret_y`
    /// up to slack.
    pub implications_hold: bool,
}

impl AverageGap {
    pub fn gap_sum(&self) -> f64 {
        self.gap_x + self.gap_y
    }
}

/// Computes [`AverageGap`] with two offline calls.
pub fn average_equilibrium_gap(
    game: &ZeroSumGame,
    trajectory: &SelfPlayTrajectory,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<AverageGap> {
    if trajectory.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = trajectory.len() as f64;
    let mut cache_x = oracle.cache(&game.domain_x)?;
    let mut cache_y = oracle.cache(&game.domain_y)?;
    for r in &trajectory.rounds {
        cache_x.push(&game.x_slice(&r.y))?;
        cache_y.push(&game.y_slice(&r.x))?;
    }
    let best_x = cache_x.argmin(&vec![0.0; game.domain_x.dim()], counter)?;
    let best_y = cache_y.argmin(&vec![0.0; game.domain_y.dim()], counter)?;
    let total_x: f64 = trajectory.rounds.iter().map(|r| r.x_loss).sum();
    let total_y: f64 = trajectory.rounds.iter().map(|r| r.y_loss).sum();
    let average_payoff = total_x / n;
    let min_x_average = best_x.objective / n;
    let max_y_average = -best_y.objective / n;
    let regret_x = (total_x - best_x.objective) / n;
    let regret_y = (total_y - best_y.objective) / n;
    let slack = (best_x.error_bound + best_y.error_bound) / n;
    let tol = 1e-9 * (1.0 + average_payoff.abs());
    let implications_hold = average_payoff <= min_x_average + regret_x + slack + tol
        && average_payoff >= max_y_average - regret_y - slack - tol;
    Ok(AverageGap {
        average_payoff,
        min_x_average,
        max_y_average,
        gap_x: average_payoff - min_x_average,
        gap_y: max_y_average - average_payoff,
        regret_x,
        regret_y,
        slack,
        implications_hold,
    })
}
