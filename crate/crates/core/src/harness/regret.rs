use crate::domain::{dot, CallCounter, LossFunction, EXACT_TOL};
use crate::error::{Error, Result};
use crate::learners::Trajectory;
use crate::oracles::{OfflineOracle, OracleRequest};

/// Realized regret against the best fixed point in hindsight.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub rounds: usize,
    pub total_loss: f64,
    pub total_regret: f64,
    pub average_regret: f64,
    pub best_in_hindsight_w: Vec<f64>,
    pub best_in_hindsight_value: f64,
    /// Error bound of the comparator computation; the true regret lies in
    /// `[total_regret, total_regret + discretization_slack]`.
    pub discretization_slack: f64,
}

impl RegretReport {
    pub(crate) fn new(total_loss: f64, rounds: usize, best_w: Vec<f64>, best_value: f64, slack: f64) -> Self {
        let total_regret = total_loss - best_value;
        Self {
            rounds,
            total_loss,
            total_regret,
            average_regret: total_regret / rounds as f64,
            best_in_hindsight_w: best_w,
            best_in_hindsight_value: best_value,
            discretization_slack: slack,
        }
    }

    pub fn average_slack(&self) -> f64 {
        self.discretization_slack / self.rounds as f64
    }
}

fn check_lengths(trajectory: &Trajectory, losses: &[LossFunction]) -> Result<()> {
    if trajectory.len() != losses.len() || trajectory.is_empty() {
        return Err(Error::LengthMismatch {
            trajectory: trajectory.len(),
            losses: losses.len(),
        });
    }
    Ok(())
}

/// Regret of `trajectory` on the realized sequence `losses`. The comparator
/// comes from one unperturbed offline-oracle call.
pub fn compute_regret(
    trajectory: &Trajectory,
    losses: &[LossFunction],
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<RegretReport> {
    check_lengths(trajectory, losses)?;
    let d = trajectory.domain.dim();
    let best = oracle.minimize(&OracleRequest::new(losses, &vec![0.0; d], &trajectory.domain), counter)?;
    Ok(RegretReport::new(
        trajectory.total_loss(),
        trajectory.len(),
        best.w_hat,
        best.objective,
        best.error_bound,
    ))
}

/// Both sides of the pathwise FTL-BTL bound for a fixed perturbation
/// `sigma`, i.e. regularizer `R(w) = -sigma.w`:
///
/// ```text
/// Regret_T <= R(w*) - R(w_1) + sum_t l_t(w_t) - l_t(w_{t+1})
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct FtlBtlCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    /// `w_{T+1}`, the leader on the full sequence.
    pub w_final: Vec<f64>,
}

/// Checks the FTL-BTL inequality on one single-draw trajectory. Costs two
/// offline calls (`w*` and `w_{T+1}`); the shifted evaluations
/// `l_t(w_{t+1})` are analysis-side and not charged.
pub fn ftl_btl_check(
    trajectory: &Trajectory,
    losses: &[LossFunction],
    oracle: &dyn OfflineOracle,
    counter: &CallCounter,
) -> Result<FtlBtlCheck> {
    check_lengths(trajectory, losses)?;
    let sigma = trajectory.fixed_sigma().ok_or(Error::WrongNoiseMode)?.to_vec();
    let domain = &trajectory.domain;
    let zero = vec![0.0; domain.dim()];
    let best = oracle.minimize(&OracleRequest::new(losses, &zero, domain), counter)?;
    let last = oracle.minimize(&OracleRequest::new(losses, &sigma, domain), counter)?;

    let lhs = trajectory.total_loss() - best.objective;
    let w1 = &trajectory.rounds[0].w;
    let mut instability = 0.0;
    for (t, loss) in losses.iter().enumerate() {
        let next = trajectory.rounds.get(t + 1).map_or(last.w_hat.as_slice(), |r| r.w.as_slice());
        instability += trajectory.rounds[t].incurred_loss - loss.value(next);
    }
    let rhs = (-dot(&sigma, &best.w_hat) + dot(&sigma, w1)) + instability;
    let slack = best.error_bound + last.error_bound;
    let scale = 1.0 + lhs.abs() + rhs.abs() + trajectory.total_loss().abs();
    Ok(FtlBtlCheck {
        lhs,
        rhs,
        slack,
        holds: lhs <= rhs + slack + EXACT_TOL * scale,
        w_final: last.w_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{RandomPiecewiseLinear, Replay};
    use crate::domain::BoxDomain;
    use crate::learners::{ftpl_run, ftpl_run_with_noise, FtplConfig};
    use crate::losses::{self, PiecewiseLinear};
    use crate::oracles::{GridOracle, ScanOracle};

    fn interval() -> BoxDomain {
        BoxDomain::symmetric_interval()
    }

    #[test]
    fn zero_losses_have_zero_regret() {
        let dom = interval();
        let c = CallCounter::new();
        let seq = vec![losses::zero(1); 5];
        let mut adv = Replay::new(dom, seq.clone());
        let traj = ftpl_run(&mut adv, 5, &FtplConfig::new(1.0, 1), &GridOracle::new(0.01), &c).unwrap();
        let r = compute_regret(&traj, &seq, &GridOracle::new(0.01), &c).unwrap();
        assert_eq!(r.total_regret, 0.0);
        assert_eq!(c.snapshot().offline_calls, 6);
    }

    #[test]
    fn single_round_regret_is_bounded_below_by_slack() {
        let dom = interval();
        let c = CallCounter::new();
        let oracle = GridOracle::new(0.01);
        for seed in 0..20 {
            let mut adv = RandomPiecewiseLinear::new(dom.clone(), 3, seed);
            let traj = ftpl_run(&mut adv, 1, &FtplConfig::new(0.7, seed), &oracle, &c).unwrap();
            let r = compute_regret(&traj, &traj.losses, &oracle, &c).unwrap();
            assert!(r.total_regret >= -r.discretization_slack);
        }
    }

    fn pwl(dom: &BoxDomain, slopes: &[f64], intercepts: &[f64], cap: f64) -> LossFunction {
        PiecewiseLinear {
            slopes: slopes.iter().map(|s| vec![*s]).collect(),
            intercepts: intercepts.to_vec(),
            cap,
            sign: 1.0,
        }
        .into_loss(dom)
    }

    #[test]
    fn hand_built_three_round_sequence() {
        let dom = interval();
        let c = CallCounter::new();
        // l1 = |w|, l2 = max(w - 0.5, 0.5 - w) capped at 1, l3 = max(-w, 0)
        let seq = vec![
            pwl(&dom, &[1.0, -1.0], &[0.0, 0.0], 10.0),
            pwl(&dom, &[1.0, -1.0], &[-0.5, 0.5], 1.0),
            pwl(&dom, &[-1.0, 0.0], &[0.0, 0.0], 10.0),
        ];
        // Follow-the-leader with sigma = 0 plays w1 = -1 (flat start), then the
        // leaders of l1 (w = 0) and l1 + l2 (flat on [0, 0.5]).
        let mut adv = Replay::new(dom.clone(), seq.clone());
        let oracle = ScanOracle::new(1e-3);
        let traj = ftpl_run_with_noise(&mut adv, 3, &[0.0], &oracle, &c).unwrap();
        let ws: Vec<f64> = traj.points().map(|w| w[0]).collect();
        assert!((ws[0] + 1.0).abs() < 1e-12 && ws[1].abs() < 1e-12, "{ws:?}");
        assert!((-1e-12..=0.5 + 1e-12).contains(&ws[2]), "{ws:?}");
        // Incurred: l1(-1) = 1, l2(0) = 0.5, l3(0) = 0. Sum of all three is
        // |w| + |w - 0.5| + max(-w, 0), minimized on [0, 0.5] with value 0.5.
        let r = compute_regret(&traj, &seq, &oracle, &c).unwrap();
        assert!((r.total_loss - 1.5).abs() < 1e-12);
        assert!((r.best_in_hindsight_value - 0.5).abs() <= r.discretization_slack);
        assert!((r.total_regret - 1.0).abs() <= r.discretization_slack + 1e-12);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let dom = interval();
        let c = CallCounter::new();
        let seq = vec![losses::zero(1); 3];
        let mut adv = Replay::new(dom, seq.clone());
        let traj = ftpl_run(&mut adv, 3, &FtplConfig::new(1.0, 1), &GridOracle::new(0.1), &c).unwrap();
        assert!(matches!(
            compute_regret(&traj, &seq[..2], &GridOracle::new(0.1), &c),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ftl_btl_single_round_reduces_to_definition() {
        let dom = interval();
        let c = CallCounter::new();
        let oracle = GridOracle::new(0.01);
        let mut adv = RandomPiecewiseLinear::new(dom.clone(), 3, 21);
        let traj = ftpl_run_with_noise(&mut adv, 1, &[0.0], &oracle, &c).unwrap();
        let chk = ftl_btl_check(&traj, &traj.losses, &oracle, &c).unwrap();
        // w_2 minimizes l_1, so rhs = l1(w1) - min l1 = lhs.
        assert!((chk.lhs - chk.rhs).abs() < 1e-12);
        assert!(chk.holds);
    }

    #[test]
    fn ftl_btl_constant_losses_by_hand() {
        // l(w) = (w - 0.2)^2 every round, sigma = 0.4 on [-1, 1]:
        // w_1 = argmin -0.4 w = 1, then w_t = argmin (t-1)(w-0.2)^2 - 0.4 w =
        // 0.2 + 0.2/(t-1): w_2 = 0.4, w_3 = 0.3, w_4 = 0.2 + 0.2/3.
        let dom = interval();
        let c = CallCounter::new();
        let oracle = ScanOracle::new(1e-5);
        let l = losses::quadratic(&dom, vec![0.2], 1.0);
        let seq = vec![l.clone(); 3];
        let mut adv = Replay::new(dom.clone(), seq.clone());
        let traj = ftpl_run_with_noise(&mut adv, 3, &[0.4], &oracle, &c).unwrap();
        let chk = ftl_btl_check(&traj, &seq, &oracle, &c).unwrap();
        let f = |w: f64| (w - 0.2) * (w - 0.2);
        let (w1, w2, w3, w4) = (1.0, 0.4, 0.3, 0.2 + 0.2 / 3.0);
        let lhs = f(w1) + f(w2) + f(w3);
        let rhs = (-0.4 * 0.2 + 0.4 * w1) + (f(w1) - f(w2)) + (f(w2) - f(w3)) + (f(w3) - f(w4));
        assert!((chk.lhs - lhs).abs() < 1e-4, "{} vs {lhs}", chk.lhs);
        assert!((chk.rhs - rhs).abs() < 1e-4, "{} vs {rhs}", chk.rhs);
        assert!(chk.holds);
    }

    #[test]
    fn ftl_btl_requires_a_fixed_perturbation() {
        let dom = interval();
        let c = CallCounter::new();
        let oracle = GridOracle::new(0.1);
        let mut adv = RandomPiecewiseLinear::new(dom, 3, 2);
        let traj = ftpl_run(&mut adv, 4, &FtplConfig::new(1.0, 2), &oracle, &c).unwrap();
        assert_eq!(
            ftl_btl_check(&traj, &traj.losses, &oracle, &c).unwrap_err(),
            Error::WrongNoiseMode
        );
    }
}
