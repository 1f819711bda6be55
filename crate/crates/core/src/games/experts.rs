//! Prediction with expert advice embedded in the unit hypercube.
//!
//! Expert `i` sits at the vertex whose coordinates are the binary digits of
//! `i` (coordinate `k` holds bit `k`). An interior point `x in [0, 1]^d` is
//! the product distribution `p(z) = prod_k (z_k x_k + (1 - z_k)(1 - x_k))`
//! over vertices, and its loss is the expected expert loss under `p`.
//! Vertices beyond the `N`-th map to expert `index mod N`.
//!
//! Each partial derivative of the lifted loss is a difference of two
//! conditional expectations of losses in `[0, 1]`, so it lies in `[-1, 1]`;
//! the lifted loss is therefore 1-Lipschitz with respect to the l1 norm and
//! takes values in `[0, 1]`.

use rand::Rng;

use crate::adversary::Replay;
use crate::domain::{BoxDomain, CallCounter, LossFunction};
use crate::error::{Error, Result};
use crate::harness::RegretReport;
use crate::learners::{ftpl_run, FtplConfig, Trajectory};
use crate::noise::stream_rng;
use crate::oracles::OfflineOracle;

/// Largest supported hypercube dimension (`2^20` vertices per evaluation).
pub const MAX_EXPERT_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpertsEmbedding {
    experts: usize,
    dim: usize,
}

impl ExpertsEmbedding {
    /// Embedding of `experts >= 1` experts into `[0, 1]^d` with
    /// `d = max(1, ceil(log2 N))`.
    pub fn new(experts: usize) -> Result<Self> {
        if experts == 0 {
            return Err(Error::invalid("need at least one expert"));
        }
        let dim = (usize::BITS - (experts - 1).leading_zeros()).max(1) as usize;
        if dim > MAX_EXPERT_DIM {
            return Err(Error::GridBudget {
                required: 1u128 << dim,
                budget: 1 << MAX_EXPERT_DIM,
            });
        }
        Ok(Self { experts, dim })
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        1 << self.dim
    }

    pub fn domain(&self) -> BoxDomain {
        BoxDomain::cube(self.dim, 0.0, 1.0).expect("unit cube is valid")
    }

    /// Expert assigned to vertex number `z` (bit `k` of `z` is `z_k`).
    pub fn expert_of(&self, z: usize) -> usize {
        z % self.experts
    }

    /// Coordinates of vertex number `z`.
    pub fn vertex(&self, z: usize) -> Vec<f64> {
        (0..self.dim).map(|k| ((z >> k) & 1) as f64).collect()
    }

    /// `p(z)` for the product distribution at `x`.
    pub fn vertex_probability(&self, z: usize, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .fold(1.0, |acc, (k, &xk)| acc * if (z >> k) & 1 == 1 { xk } else { 1.0 - xk })
    }

    /// Expected expert loss at `x`, summing over all `2^d` vertices.
    pub fn lift(&self, round_losses: &[f64], x: &[f64]) -> Result<f64> {
        if round_losses.len() != self.experts {
            return Err(Error::DimensionMismatch {
                expected: self.experts,
                found: round_losses.len(),
            });
        }
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(lift_unchecked(self.dim, self.experts, round_losses, x))
    }

    /// The lifted loss of one round as a [`LossFunction`] on `[0, 1]^d`.
    pub fn lifted_loss(&self, round_losses: Vec<f64>) -> Result<LossFunction> {
        if round_losses.len() != self.experts {
            return Err(Error::DimensionMismatch {
                expected: self.experts,
                found: round_losses.len(),
            });
        }
        if round_losses.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::invalid("expert losses must lie in [0, 1]"));
        }
        let (d, n) = (self.dim, self.experts);
        Ok(LossFunction::new(d, format!("experts({n})"), 1.0, 1.0, move |x| {
            lift_unchecked(d, n, &round_losses, x)
        }))
    }
}

fn lift_unchecked(d: usize, n: usize, losses: &[f64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for z in 0..(1usize << d) {
        let mut p = 1.0;
        for (k, &xk) in x.iter().enumerate() {
            p *= if (z >> k) & 1 == 1 { xk } else { 1.0 - xk };
        }
        if p != 0.0 {
            acc += p * losses[z % n];
        }
    }
    acc
}

/// Bernoulli expert losses: expert `i` errs with probability
/// `0.3 + 0.4 i / (N - 1)`, so expert 0 is the best in expectation.
pub fn bernoulli_expert_losses(experts: usize, rounds: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..rounds)
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            (0..experts)
                .map(|i| {
                    let p = if experts > 1 {
                        0.3 + 0.4 * i as f64 / (experts - 1) as f64
                    } else {
                        0.5
                    };
                    f64::from(u8::from(rng.random_bool(p)))
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExpertsRun {
    pub trajectory: Trajectory,
    /// Regret against the best single expert.
    pub regret: RegretReport,
    pub best_expert: usize,
    /// Average regret of the uniform mixture over experts (the point
    /// `(1/2, ..., 1/2)` when `N` is a power of two).
    pub uniform_average_regret: f64,
}

/// FTPL over `[0, 1]^d` on the lifted losses, with regret measured against
/// the best fixed expert.
pub fn experts_regret_run(
    embedding: &ExpertsEmbedding,
    loss_matrix: &[Vec<f64>],
    config: &FtplConfig,
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<ExpertsRun> {
    if loss_matrix.is_empty() {
        return Err(Error::invalid("horizon T must be at least 1"));
    }
    let lifted = loss_matrix
        .iter()
        .map(|row| embedding.lifted_loss(row.clone()))
        .collect::<Result<Vec<_>>>()?;
    let rounds = loss_matrix.len();
    let mut adversary = Replay::new(embedding.domain(), lifted);
    let trajectory = ftpl_run(&mut adversary, rounds, config, oracle, counter)?;

    let n = embedding.experts();
    let totals: Vec<f64> = (0..n).map(|i| loss_matrix.iter().map(|row| row[i]).sum()).collect();
    let best_expert = (0..n).fold(0, |b, i| if totals[i] < totals[b] { i } else { b });
    let uniform: f64 = loss_matrix.iter().map(|row| row.iter().sum::<f64>() / n as f64).sum();
    let regret = RegretReport::new(
        trajectory.total_loss(),
        rounds,
        embedding.vertex(best_expert),
        totals[best_expert],
        0.0,
    );
    Ok(ExpertsRun {
        trajectory,
        regret,
        best_expert,
        uniform_average_regret: (uniform - totals[best_expert]) / rounds as f64,
    })
}
