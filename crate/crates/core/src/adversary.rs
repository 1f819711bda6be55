//! Loss sequences served to online learners.

use crate::domain::{BoxDomain, LossFunction};
use crate::error::{Error, Result};
use crate::losses;
use crate::noise::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    /// The whole sequence is fixed in advance; `w_t` is ignored.
    Oblivious,
    /// The round-`t` loss may depend on the learner's round-`t` point.
    Adaptive,
}

/// Source of the loss `l_t`. Rounds are numbered from 1.
pub trait Adversary: Send {
    fn domain(&self) -> &BoxDomain;

    fn kind(&self) -> AdversaryKind;

    /// Loss for round `t`, given the learner's committed point `w_t`.
    fn loss_at(&mut self, t: usize, w_t: &[f64]) -> LossFunction;

    fn label(&self) -> String;
}

/// Oblivious ReLU regression sequence cycling through the signed axes:
/// round `t` serves `(relu(s * w_k) - target)^2` with `(k, s)` running over
/// `(0, +), (0, -), (1, +), (1, -), ...`. In one dimension this alternates a
/// positive and a negative example.
#[derive(Debug, Clone)]
pub struct ReluCycle {
    domain: BoxDomain,
    target: f64,
}

impl ReluCycle {
    pub fn new(domain: BoxDomain, target: f64) -> Self {
        Self { domain, target }
    }

    fn direction(&self, t: usize) -> Vec<f64> {
        let d = self.domain.dim();
        let i = (t - 1) % (2 * d);
        let mut x = vec![0.0; d];
        x[i / 2] = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
        x
    }
}

impl Adversary for ReluCycle {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn kind(&self) -> AdversaryKind {
        AdversaryKind::Oblivious
    }

    fn loss_at(&mut self, t: usize, _w_t: &[f64]) -> LossFunction {
        losses::relu_regression(&self.domain, self.direction(t), self.target)
    }

    fn label(&self) -> String {
        format!("relu-cycle(y={})", self.target)
    }
}

/// Oblivious sequence of random ReLU regression losses. Loss `t` depends only
/// on `(seed, t)`.
#[derive(Debug, Clone)]
pub struct RandomRelu {
    domain: BoxDomain,
    seed: u64,
}

impl RandomRelu {
    pub fn new(domain: BoxDomain, seed: u64) -> Self {
        Self { domain, seed }
    }
}

impl Adversary for RandomRelu {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn kind(&self) -> AdversaryKind {
        AdversaryKind::Oblivious
    }

    fn loss_at(&mut self, t: usize, _w_t: &[f64]) -> LossFunction {
        losses::random_relu(&self.domain, &mut stream_rng(self.seed, t as u64))
    }

    fn label(&self) -> String {
        format!("relu-random(seed={})", self.seed)
    }
}

/// Oblivious sequence of random capped piecewise-linear losses.
#[derive(Debug, Clone)]
pub struct RandomPiecewiseLinear {
    domain: BoxDomain,
    pieces: usize,
    seed: u64,
}

impl RandomPiecewiseLinear {
    pub fn new(domain: BoxDomain, pieces: usize, seed: u64) -> Self {
        Self { domain, pieces, seed }
    }
}

impl Adversary for RandomPiecewiseLinear {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn kind(&self) -> AdversaryKind {
        AdversaryKind::Oblivious
    }

    fn loss_at(&mut self, t: usize, _w_t: &[f64]) -> LossFunction {
        losses::random_piecewise_linear(&self.domain, self.pieces, &mut stream_rng(self.seed, t as u64))
    }

    fn label(&self) -> String {
        format!("pwl-random(pieces={}, seed={})", self.pieces, self.seed)
    }
}

/// Adaptive adversary with a two-element ReLU menu: a positive example
/// `(relu(w_0) - y)^2` and a negative one `(relu(-w_0) - y)^2`. Each round it
/// serves whichever gives the learner's current point the larger loss (the
/// positive example on ties).
///
/// Against a deterministic learner that never sits exactly where both menu
/// items are small, every round costs the learner the full `y^2`, while the
/// best fixed point only pays on the minority label.
#[derive(Debug, Clone)]
pub struct AdaptiveReluMenu {
    domain: BoxDomain,
    menu: [LossFunction; 2],
    target: f64,
}

impl AdaptiveReluMenu {
    pub fn new(domain: BoxDomain, target: f64) -> Self {
        let mut pos = vec![0.0; domain.dim()];
        pos[0] = 1.0;
        let neg: Vec<f64> = pos.iter().map(|x| -x).collect();
        let menu = [
            losses::relu_regression(&domain, pos, target),
            losses::relu_regression(&domain, neg, target),
        ];
        Self { domain, menu, target }
    }
}

impl Adversary for AdaptiveReluMenu {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn kind(&self) -> AdversaryKind {
        AdversaryKind::Adaptive
    }

    fn loss_at(&mut self, _t: usize, w_t: &[f64]) -> LossFunction {
        let [pos, neg] = &self.menu;
        if neg.value(w_t) > pos.value(w_t) {
            neg.clone()
        } else {
            pos.clone()
        }
    }

    fn label(&self) -> String {
        format!("relu-adaptive(y={})", self.target)
    }
}

/// Replays a recorded sequence.
#[derive(Debug, Clone)]
pub struct Replay {
    domain: BoxDomain,
    losses: Vec<LossFunction>,
}

impl Replay {
    pub fn new(domain: BoxDomain, losses: Vec<LossFunction>) -> Self {
        Self { domain, losses }
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }
}

impl Adversary for Replay {
    fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    fn kind(&self) -> AdversaryKind {
        AdversaryKind::Oblivious
    }

    fn loss_at(&mut self, t: usize, _w_t: &[f64]) -> LossFunction {
        self.losses[(t - 1) % self.losses.len()].clone()
    }

    fn label(&self) -> String {
        format!("replay(len={})", self.losses.len())
    }
}

/// Adversary identifiers accepted by [`adversary_by_id`].
pub const ADVERSARY_IDS: [&str; 4] = ["relu-cycle", "relu-random", "pwl-random", "relu-adaptive"];

/// Built-in adversary by identifier on `[-1, 1]^dim`.
pub fn adversary_by_id(id: &str, dim: usize, seed: u64) -> Result<Box<dyn Adversary>> {
    let domain = BoxDomain::cube(dim, -1.0, 1.0)?;
    Ok(match id {
        "relu-cycle" => Box::new(ReluCycle::new(domain, 0.5)),
        "relu-random" => Box::new(RandomRelu::new(domain, seed)),
        "pwl-random" => Box::new(RandomPiecewiseLinear::new(domain, 3, seed)),
        "relu-adaptive" => Box::new(AdaptiveReluMenu::new(domain, 0.5)),
        other => {
            return Err(Error::invalid(format!(
                "unknown adversary `{other}` (expected one of {ADVERSARY_IDS:?})"
            )))
        }
    })
}
