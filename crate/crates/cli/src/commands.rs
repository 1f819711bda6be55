//! Execution of each command: run the experiment, build CSV rows and the
//! summary.

use std::collections::BTreeMap;
use std::sync::Mutex;

use nonconvex_ftpl::adversary::adversary_by_id;
use nonconvex_ftpl::domain::l1_distance;
use nonconvex_ftpl::games::experts::{bernoulli_expert_losses, experts_regret_run, ExpertsEmbedding};
use nonconvex_ftpl::games::{
    amplified_certificate, average_equilibrium_gap, make_toy_gan_game, selfplay_run, ZeroSumGame,
};
use nonconvex_ftpl::harness::{
    compute_regret, online_to_batch, scaling_fit, stability_probe_1d, stability_probe_kd, ProbeConfig,
    RegretReport, StabilityReport,
};
use nonconvex_ftpl::losses::relu_regression;
use nonconvex_ftpl::noise::stream_rng;
use nonconvex_ftpl::par::map_indexed;
use nonconvex_ftpl::stats::MeanEstimate;
use nonconvex_ftpl::{
    BoxDomain, CallCounter, CallCounts, FtplConfig, FtrlConfig, GridOracle, LossFunction, OfflineOracle,
    OnlineLearner, OracleRequest, Trajectory,
};
use rand::Rng;

use crate::config::{Command, GameArg, NoiseArg, RegularizerArg, RunConfig};
use crate::report::{mean_se, total_counts, CsvRow, Summary, CSV_SCHEMA};
use crate::CliError;

/// Rows plus summary produced by one command.
pub struct Outcome {
    pub rows: Vec<CsvRow>,
    pub summary: Summary,
}

/// Seed of trial `i`: spread out so that neighbouring base seeds do not share
/// trials.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut summary = Summary::new();
    summary
        .section("run")
        .entry("command", cfg.command.name())
        .entry("seed", cfg.seed)
        .entry("trials", cfg.trials)
        .entry("execution", cfg.execution)
        .entry("csv_schema", CSV_SCHEMA)
        .entry("csv", cfg.output.display());
    let rows = match cfg.command {
        Command::RunFtpl | Command::RunFtrl => run_learner(cfg, &mut summary)?,
        Command::Stability => stability(cfg, &mut summary)?,
        Command::Scaling => scaling(cfg, &mut summary)?,
        Command::Game => game(cfg, &mut summary)?,
        Command::Batch => batch(cfg, &mut summary)?,
        Command::Experts => experts(cfg, &mut summary)?,
    };
    Ok(Outcome { rows, summary })
}

fn oracle(cfg: &RunConfig, dim: usize) -> GridOracle {
    GridOracle::new(cfg.resolution_for(dim)).with_execution(cfg.exec())
}

fn ftpl_config(cfg: &RunConfig, eta: f64, seed: u64, stream: u64) -> FtplConfig {
    let c = FtplConfig::new(eta, seed).with_stream(stream);
    match cfg.noise {
        NoiseArg::Fresh => c,
        NoiseArg::Single => c.single_draw(),
    }
}

/// Runs `f` for every trial (possibly in parallel) and returns the results
/// in trial order.
fn per_trial<T, F>(cfg: &RunConfig, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(usize) -> Result<T, CliError> + Sync + Send,
{
    map_indexed(cfg.exec(), cfg.trials, f).into_iter().collect()
}

/// One row per round. Regret is measured against the final comparator `w*`
/// on each prefix; those evaluations are analysis-side and not charged.
fn trajectory_rows(trial: usize, traj: &Trajectory, regret: &RegretReport) -> Vec<CsvRow> {
    let mut rows = Vec::with_capacity(traj.len());
    let mut cumulative = 0.0;
    let mut comparator = 0.0;
    let mut prev: Option<&[f64]> = None;
    for (round, loss) in traj.rounds.iter().zip(&traj.losses) {
        cumulative += round.incurred_loss;
        comparator += loss.value(&regret.best_in_hindsight_w);
        let mut row = CsvRow::new(trial, round.t).with_counts(round.counts);
        row.incurred_loss = Some(round.incurred_loss);
        row.cumulative_loss = Some(cumulative);
        row.regret = Some(cumulative - comparator);
        row.avg_regret = Some((cumulative - comparator) / round.t as f64);
        row.l1_step_gap = prev.map(|p| l1_distance(p, &round.w).expect("same dimension"));
        prev = Some(&round.w);
        rows.push(row);
    }
    if let Some(last) = rows.last_mut() {
        last.best_in_hindsight = Some(regret.best_in_hindsight_value);
        last.regret = Some(regret.total_regret);
        last.avg_regret = Some(regret.average_regret);
    }
    rows
}

fn parameters(summary: &mut Summary, cfg: &RunConfig, dim: usize) {
    summary
        .section("parameters")
        .entry("dim", dim)
        .entry("T", cfg.horizon)
        .entry("resolution", cfg.resolution_for(dim));
}

struct LearnerTrial {
    rows: Vec<CsvRow>,
    counts: CallCounts,
    analysis: CallCounts,
    regret: RegretReport,
}

fn run_learner(cfg: &RunConfig, summary: &mut Summary) -> Result<Vec<CsvRow>, CliError> {
    let dim = cfg.dim;
    let eta = cfg.eta_for(cfg.horizon, dim);
    let oracle = oracle(cfg, dim);
    parameters(summary, cfg, dim);
    summary.entry("adversary", &cfg.adversary);
    match cfg.command {
        Command::RunFtpl => {
            summary.entry("learner", "ftpl").entry("eta", eta).entry("noise", cfg.noise);
        }
        _ => {
            summary
                .entry("learner", "ftrl")
                .entry("regularizer", cfg.regularizer)
                .entry("reg_weight", cfg.reg_weight);
        }
    }
    let trials = per_trial(cfg, |trial| {
        let seed = trial_seed(cfg.seed, trial);
        let mut adversary = adversary_by_id(&cfg.adversary, dim, seed)?;
        let learner: Box<dyn OnlineLearner> = match cfg.command {
            Command::RunFtpl => Box::new(ftpl_config(cfg, eta.value, seed, 0)),
            _ => Box::new(match cfg.regularizer {
                RegularizerArg::L2 => FtrlConfig::l2(cfg.reg_weight),
                RegularizerArg::L1 => FtrlConfig::l1(cfg.reg_weight),
            }),
        };
        let counter = CallCounter::new();
        let traj = learner.run(adversary.as_mut(), cfg.horizon, &oracle, &counter)?;
        let analysis = CallCounter::new();
        let regret = compute_regret(&traj, &traj.losses, &oracle, &analysis)?;
        Ok(LearnerTrial {
            rows: trajectory_rows(trial, &traj, &regret),
            counts: traj.counts,
            analysis: analysis.snapshot(),
            regret,
        })
    })?;
    summary.oracle("oracle", total_counts(trials.iter().map(|t| &t.counts)).into());
    summary
        .section("analysis")
        .entry("comparator_offline_calls", total_counts(trials.iter().map(|t| &t.analysis)).offline_calls);
    let avg: Vec<f64> = trials.iter().map(|t| t.regret.average_regret).collect();
    let est = MeanEstimate::from_samples(&avg);
    summary
        .section("results")
        .entry("average_regret", mean_se(est.mean, est.std_error))
        .entry("discretization_slack_per_round", trials[0].regret.average_slack());
    for (i, t) in trials.iter().enumerate() {
        summary.entry(&format!("trial_{i}_total_regret"), t.regret.total_regret);
    }
    Ok(trials.into_iter().flat_map(|t| t.rows).collect())
}

/// Prefix `l_1..l_{T-1}` and new loss `l_T` of an adversary played at the
/// minimum-norm point.
fn probe_instance(cfg: &RunConfig, seed: u64) -> Result<(BoxDomain, Vec<LossFunction>, LossFunction), CliError> {
    let mut adversary = adversary_by_id(&cfg.adversary, cfg.dim, seed)?;
    let domain = adversary.domain().clone();
    let center = domain.min_norm_point();
    let prefix = (1..cfg.horizon).map(|t| adversary.loss_at(t, &center)).collect();
    let new_loss = adversary.loss_at(cfg.horizon, &center);
    Ok((domain, prefix, new_loss))
}

fn stability(cfg: &RunConfig, summary: &mut Summary) -> Result<Vec<CsvRow>, CliError> {
    let dim = cfg.dim;
    let eta = cfg.eta_for(cfg.horizon, dim);
    let delta = (dim > 1).then(|| cfg.delta_for(cfg.horizon, dim));
    let oracle = oracle(cfg, dim);
    parameters(summary, cfg, dim);
    summary
        .entry("adversary", &cfg.adversary)
        .entry("eta", eta)
        .entry("draws", cfg.draws);
    if let Some(d) = delta {
        summary.entry("delta", d);
    }
    let counter = CallCounter::new();
    let mut reports: Vec<(StabilityReport, f64)> = Vec::with_capacity(cfg.trials);
    // Each probe already fans out over its draws, so trials run in sequence.
    for trial in 0..cfg.trials {
        let seed = trial_seed(cfg.seed, trial);
        let (domain, prefix, new_loss) = probe_instance(cfg, seed)?;
        let probe = ProbeConfig {
            execution: cfg.exec(),
            ..ProbeConfig::new(eta.value, cfg.draws, seed)
        };
        let report = match delta {
            None => stability_probe_1d(&domain, &prefix, &new_loss, &probe, &oracle, &counter)?,
            Some(d) => stability_probe_kd(&domain, &prefix, &new_loss, d.value, &probe, &oracle, &counter)?,
        };
        let bound = StabilityReport::one_dim_bound(
            eta.value,
            domain.linf_diameter(),
            new_loss.lipschitz(),
            oracle.resolution(),
        );
        reports.push((report, bound));
    }
    summary.oracle("oracle", counter.snapshot().into());
    let sum = |f: fn(&StabilityReport) -> usize| reports.iter().map(|(r, _)| f(r)).sum::<usize>();
    let mut relations = [0usize; 4];
    for (r, _) in &reports {
        for (acc, v) in relations.iter_mut().zip(r.relation_violations) {
            *acc += v;
        }
    }
    let gaps: Vec<f64> = reports.iter().flat_map(|(r, _)| r.gaps.iter().copied()).collect();
    let mean_gap = MeanEstimate::from_samples(&gaps);
    summary
        .section("results")
        .entry("monotonicity_violations", sum(|r| r.monotonicity_violations))
        .entry(
            "relation_violations",
            relations.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
        )
        .entry("first_order_violations", sum(|r| r.first_order_violations))
        .entry("first_order_checks", sum(|r| r.first_order_checks))
        .entry("shift", reports[0].0.shift)
        .entry("tolerance", reports[0].0.tolerance)
        .entry("mean_gap", mean_se(mean_gap.mean, mean_gap.std_error));
    if dim == 1 {
        let bound = reports.iter().map(|(_, b)| *b).fold(f64::NEG_INFINITY, f64::max);
        summary.entry("gap_bound", bound);
    }
    let mut rows = Vec::with_capacity(gaps.len());
    for (trial, (r, _)) in reports.iter().enumerate() {
        for (i, g) in r.gaps.iter().enumerate() {
            let mut row = CsvRow::new(trial, i + 1);
            row.l1_step_gap = Some(*g);
            rows.push(row);
        }
    }
    Ok(rows)
}

fn scaling(cfg: &RunConfig, summary: &mut Summary) -> Result<Vec<CsvRow>, CliError> {
    let dim = cfg.dim;
    let oracle = oracle(cfg, dim);
    summary
        .section("parameters")
        .entry("dim", dim)
        .entry(
            "horizons",
            cfg.horizons.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        )
        .entry("resolution", cfg.resolution_for(dim))
        .entry("adversary", &cfg.adversary)
        .entry("noise", cfg.noise);
    for &t in &cfg.horizons {
        summary.entry(&format!("eta_T{t}"), cfg.eta_for(t, dim));
    }
    let cells: Mutex<BTreeMap<(usize, usize), (CsvRow, CallCounts)>> = Mutex::new(BTreeMap::new());
    let fit = scaling_fit(&cfg.horizons, cfg.trials, cfg.exec(), |horizon, trial| {
        let seed = trial_seed(cfg.seed, trial);
        let mut adversary = adversary_by_id(&cfg.adversary, dim, seed)?;
        let learner = ftpl_config(cfg, cfg.eta_for(horizon, dim).value, seed, 0);
        let counter = CallCounter::new();
        let traj = learner.run(adversary.as_mut(), horizon, &oracle, &counter)?;
        let regret = compute_regret(&traj, &traj.losses, &oracle, &CallCounter::new())?;
        let mut row = CsvRow::new(trial, horizon).with_counts(traj.counts);
        row.cumulative_loss = Some(regret.total_loss);
        row.best_in_hindsight = Some(regret.best_in_hindsight_value);
        row.regret = Some(regret.total_regret);
        row.avg_regret = Some(regret.average_regret);
        cells
            .lock()
            .expect("no panics while holding the lock")
            .insert((horizon, trial), (row, traj.counts));
        Ok((regret.average_regret, regret.average_slack()))
    })?;
    let cells = cells.into_inner().expect("no panics while holding the lock");
    summary.oracle("oracle", total_counts(cells.values().map(|(_, c)| c)).into());
    summary
        .section("results")
        .entry("fitted_exponent", fit.exponent)
        .entry("intercept", fit.intercept)
        .entry("strictly_decreasing", fit.strictly_decreasing())
        .entry("floored_points", fit.floored_count());
    for p in &fit.points {
        summary.entry(
            &format!("avg_regret_T{}", p.horizon),
            mean_se(p.average_regret.mean, p.average_regret.std_error),
        );
    }
    let mut rows: Vec<(usize, usize, CsvRow)> = cells.into_iter().map(|((h, t), (r, _))| (t, h, r)).collect();
    rows.sort_by_key(|(t, h, _)| (*t, *h));
    Ok(rows.into_iter().map(|(_, _, r)| r).collect())
}

fn build_game(cfg: &RunConfig) -> Result<ZeroSumGame, CliError> {
    Ok(match cfg.game {
        GameArg::Bilinear => ZeroSumGame::bilinear(cfg.dim)?,
        GameArg::DoubleWell => ZeroSumGame::double_well(),
        GameArg::ToyGan => make_toy_gan_game(cfg.target)?,
    })
}

fn game(cfg: &RunConfig, summary: &mut Summary) -> Result<Vec<CsvRow>, CliError> {
    let game = build_game(cfg)?;
    let dim = game.domain_x().dim().max(game.domain_y().dim());
    let eta = cfg.eta_for(cfg.horizon, dim);
    let oracle = oracle(cfg, dim);
    parameters(summary, cfg, dim);
    summary
        .entry("game", game.label())
        .entry("eta", eta)
        .entry("noise", cfg.noise)
        .entry("amplification", cfg.amplification);
    let trials = per_trial(cfg, |trial| {
        let seed = trial_seed(cfg.seed, trial);
        let counter = CallCounter::new();
        let cx = ftpl_config(cfg, eta.value, seed, 0);
        let cy = ftpl_config(cfg, eta.value, seed, 1);
        let traj = selfplay_run(&game, cfg.horizon, &cx, &cy, &oracle, &counter)?;
        let mut rng = stream_rng(seed, 2);
        let (best, candidates) = amplified_certificate(&game, &traj, cfg.amplification, &mut rng, &oracle, &counter)?;
        let analysis = CallCounter::new();
        let average = average_equilibrium_gap(&game, &traj, &oracle, &analysis)?;
        let mut rows = Vec::with_capacity(traj.len());
        let mut cumulative = 0.0;
        let mut prev: Option<(&[f64], &[f64])> = None;
        for r in &traj.rounds {
            cumulative += r.x_loss;
            let mut row = CsvRow::new(trial, r.t).with_counts(r.counts);
            row.incurred_loss = Some(r.x_loss);
            row.cumulative_loss = Some(cumulative);
            row.l1_step_gap = prev.map(|(x, y)| {
                l1_distance(x, &r.x).expect("same dimension") + l1_distance(y, &r.y).expect("same dimension")
            });
            prev = Some((&r.x, &r.y));
            rows.push(row);
        }
        let last = rows.last_mut().expect("T >= 1");
        *last = last.clone().with_counts(counter.snapshot());
        last.gap_x = Some(best.gap_x);
        last.gap_y = Some(best.gap_y);
        Ok((rows, counter.snapshot(), best, candidates, average))
    })?;
    summary.oracle("oracle", total_counts(trials.iter().map(|t| &t.1)).into());
    summary.section("results");
    for (i, (_, _, best, candidates, average)) in trials.iter().enumerate() {
        let sums: Vec<String> = candidates.iter().map(|c| format!("{:.6}", c.gap_sum())).collect();
        summary
            .entry(&format!("trial_{i}_certified_x"), format!("{:?}", best.x_hat))
            .entry(&format!("trial_{i}_certified_y"), format!("{:?}", best.y_hat))
            .entry(&format!("trial_{i}_certified_gap_x"), best.gap_x)
            .entry(&format!("trial_{i}_certified_gap_y"), best.gap_y)
            .entry(&format!("trial_{i}_certified_gap_sum"), best.gap_sum())
            .entry(&format!("trial_{i}_certificate_slack"), best.slack)
            .entry(&format!("trial_{i}_candidate_gap_sums"), sums.join(" "))
            .entry(&format!("trial_{i}_average_payoff"), average.average_payoff)
            .entry(&format!("trial_{i}_expected_gap_x"), average.gap_x)
            .entry(&format!("trial_{i}_expected_gap_y"), average.gap_y)
            .entry(&format!("trial_{i}_expected_gap_sum"), average.gap_sum())
            .entry(&format!("trial_{i}_regret_x"), average.regret_x)
            .entry(&format!("trial_{i}_regret_y"), average.regret_y)
            .entry(&format!("trial_{i}_implications_hold"), average.implications_hold);
    }
    Ok(trials.into_iter().flat_map(|t| t.0).collect())
}

/// Probability of the positive example in the synthetic batch task.
const BATCH_POSITIVE: f64 = 0.7;
/// Held-out sample size used to estimate the risk of the returned iterate.
const BATCH_HOLDOUT: usize = 2000;

fn batch(cfg: &RunConfig, summary: &mut Summary) -> Result<Vec<CsvRow>, CliError> {
    let dim = cfg.dim;
    let n = cfg.horizon;
    let eta = cfg.eta_for(n, dim);
    let oracle = oracle(cfg, dim);
    let domain = BoxDomain::cube(dim, -1.0, 1.0)?;
    // x = +u with probability p and -u otherwise, u = (1/d, ..., 1/d); y = 0.5.
    let u = vec![1.0 / dim as f64; dim];
    let pos = relu_regression(&domain, u.clone(), 0.5);
    let neg = relu_regression(&domain, u.iter().map(|v| -v).collect(), 0.5);
    let risk = {
        let (pos, neg) = (pos.clone(), neg.clone());
        LossFunction::new(dim, "population risk", pos.lipschitz(), pos.bound().max(neg.bound()), move |w| {
            BATCH_POSITIVE * pos.value(w) + (1.0 - BATCH_POSITIVE) * neg.value(w)
        })
    };
    let analysis = CallCounter::new();
    let minimum = oracle.minimize(&OracleRequest::new(&[risk], &vec![0.0; dim], &domain), &analysis)?;
    parameters(summary, cfg, dim);
    summary
        .entry("task", format!("relu regression, P(x = +u) = {BATCH_POSITIVE}, y = 0.5"))
        .entry("holdout", BATCH_HOLDOUT)
        .entry("eta", eta)
        .entry("noise", cfg.noise);
    let draw = |rng: &mut nonconvex_ftpl::noise::SimRng, k: usize| -> Vec<LossFunction> {
        (0..k)
            .map(|_| if rng.random_bool(BATCH_POSITIVE) { pos.clone() } else { neg.clone() })
            .collect()
    };
    let trials = per_trial(cfg, |trial| {
        let seed = trial_seed(cfg.seed, trial);
        let mut rng = stream_rng(seed, 0);
        let sample = draw(&mut rng, n);
        let holdout = draw(&mut rng, BATCH_HOLDOUT);
        let learner = ftpl_config(cfg, eta.value, seed, 1);
        let counter = CallCounter::new();
        let out = online_to_batch(&sample, &domain, &learner, &oracle, &holdout, &mut rng, &counter)?;
        let regret = compute_regret(&out.trajectory, &sample, &oracle, &CallCounter::new())?;
        let rows = trajectory_rows(trial, &out.trajectory, &regret);
        Ok((rows, counter.snapshot(), out.round, out.risk_estimate.mean, regret))
    })?;
    summary.oracle("oracle", total_counts(trials.iter().map(|t| &t.1)).into());
    let excess: Vec<f64> = trials.iter().map(|t| t.3 - minimum.objective).collect();
    let regrets: Vec<f64> = trials.iter().map(|t| t.4.average_regret).collect();
    let ex = MeanEstimate::from_samples(&excess);
    let rg = MeanEstimate::from_samples(&regrets);
    summary
        .section("results")
        .entry("population_minimum", minimum.objective)
        .entry("population_minimizer", format!("{:?}", minimum.w_hat))
        .entry("excess_risk", mean_se(ex.mean, ex.std_error))
        .entry("average_regret", mean_se(rg.mean, rg.std_error));
    for (i, t) in trials.iter().enumerate() {
        summary.entry(&format!("trial_{i}_returned_round"), t.2);
    }
    Ok(trials.into_iter().flat_map(|t| t.0).collect())
}

fn experts(cfg: &RunConfig, summary: &mut Summary) -> Result<Vec<CsvRow>, CliError> {
    let embedding = ExpertsEmbedding::new(cfg.experts)?;
    let dim = embedding.dim();
    let eta = cfg.eta_for(cfg.horizon, dim);
    let oracle = oracle(cfg, dim);
    parameters(summary, cfg, dim);
    summary
        .entry("experts", cfg.experts)
        .entry("losses", "bernoulli")
        .entry("eta", eta)
        .entry("noise", cfg.noise);
    let trials = per_trial(cfg, |trial| {
        let seed = trial_seed(cfg.seed, trial);
        let matrix = bernoulli_expert_losses(cfg.experts, cfg.horizon, seed);
        let learner = ftpl_config(cfg, eta.value, seed, 1);
        let counter = CallCounter::new();
        let run = experts_regret_run(&embedding, &matrix, &learner, &oracle, &counter)?;
        // The comparator is the best expert's vertex, where the lifted loss
        // equals that expert's own loss.
        let rows = trajectory_rows(trial, &run.trajectory, &run.regret);
        Ok((rows, counter.snapshot(), run.best_expert, run.regret, run.uniform_average_regret))
    })?;
    summary.oracle("oracle", total_counts(trials.iter().map(|t| &t.1)).into());
    let avg: Vec<f64> = trials.iter().map(|t| t.3.average_regret).collect();
    let uniform: Vec<f64> = trials.iter().map(|t| t.4).collect();
    let est = MeanEstimate::from_samples(&avg);
    let uni = MeanEstimate::from_samples(&uniform);
    summary
        .section("results")
        .entry("average_regret", mean_se(est.mean, est.std_error))
        .entry("uniform_average_regret", mean_se(uni.mean, uni.std_error));
    for (i, t) in trials.iter().enumerate() {
        summary.entry(&format!("trial_{i}_best_expert"), t.2);
    }
    Ok(trials.into_iter().flat_map(|t| t.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_are_distinct_across_neighbouring_bases() {
        assert_eq!(trial_seed(5, 0), 5);
        assert_ne!(trial_seed(5, 1), trial_seed(6, 0));
        assert_ne!(trial_seed(5, 1), trial_seed(5, 2));
    }
}
