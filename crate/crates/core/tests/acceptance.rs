//! Acceptance suite: one test per criterion, each printing a single
//! `PASS`/`FAIL` line with the measured quantities before asserting.
//!
//! The report lines go to stderr and are shown even under output capture:
//! `cargo test -p nonconvex-ftpl --test acceptance`.

use std::io::Write;
use std::time::{Duration, Instant};

use nonconvex_ftpl::adversary::{AdaptiveReluMenu, RandomPiecewiseLinear, RandomRelu, Replay, ReluCycle};
use nonconvex_ftpl::games::experts::ExpertsEmbedding;
use nonconvex_ftpl::games::{
    amplified_certificate, average_equilibrium_gap, make_toy_gan_game, selfplay_run, ZeroSumGame,
    DEFAULT_AMPLIFICATION,
};
use nonconvex_ftpl::harness::{
    compute_regret, default_horizons, ftl_btl_check, online_to_batch, scaling_fit, stability_probe_1d,
    stability_probe_kd, ProbeConfig, ScalingFit, StabilityReport,
};
use nonconvex_ftpl::losses::{self, random_piecewise_linear, random_relu, relu_regression};
use nonconvex_ftpl::noise::{sample_exp, sample_exp_noise, stream_rng};
use nonconvex_ftpl::oracles::verify_first_order_gap;
use nonconvex_ftpl::stats::{ks_distance_exponential, MeanEstimate};
use nonconvex_ftpl::{
    ftpl_run, ftpl_run_with_noise, ftrl_run, schedule_params, BoxDomain, CallCounter, Execution, FtplConfig,
    FtrlConfig, GridOracle, LossFunction, OfflineOracle, ScanOracle,
};
use rand::Rng;

const SEED: u64 = 20_240_917;

/// Writes straight to the stderr handle rather than through `println!`, so
/// the verdict line shows up even when the test harness captures output.
fn report(id: u32, name: &str, pass: bool, detail: impl AsRef<str>) {
    let status = if pass { "PASS" } else { "FAIL" };
    let line = format!("[criterion {id:>2}] {status} {name}: {}\n", detail.as_ref());
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn within(start: Instant, limit: Duration) -> (bool, f64) {
    let secs = start.elapsed().as_secs_f64();
    (secs < limit.as_secs_f64(), secs)
}

fn interval() -> BoxDomain {
    BoxDomain::symmetric_interval()
}

fn random_prefix(dom: &BoxDomain, n: usize, rng: &mut impl Rng) -> Vec<LossFunction> {
    (0..n)
        .map(|i| {
            if i % 2 == 0 {
                random_relu(dom, rng)
            } else {
                random_piecewise_linear(dom, 3, rng)
            }
        })
        .collect()
}

/// Criterion 1: the first-order comparison between two perturbed minimizers.
#[test]
fn c01_first_order_gap_dense_scan() {
    let start = Instant::now();
    let dom = interval();
    let oracle = ScanOracle::new(1e-6);
    let counter = CallCounter::new();
    let (pairs, sigma_draws) = (100, 10);
    let mut violations = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for p in 0..pairs {
        let mut rng = stream_rng(SEED, p);
        let prefix = random_prefix(&dom, 2, &mut rng);
        let f1: Vec<LossFunction> = prefix.iter().cloned().chain([random_relu(&dom, &mut rng)]).collect();
        let f2: Vec<LossFunction> = prefix.iter().cloned().chain([random_piecewise_linear(&dom, 3, &mut rng)]).collect();
        let mut base = oracle.cache(&dom).unwrap();
        for l in &prefix {
            base.push(l).unwrap();
        }
        let mut c1 = base.clone();
        c1.push(&f1[2]).unwrap();
        let mut c2 = base;
        c2.push(&f2[2]).unwrap();
        for _ in 0..sigma_draws {
            let eta = rng.random_range(0.2..5.0);
            let s1 = vec![sample_exp(eta, &mut rng)];
            let s2 = vec![sample_exp(eta, &mut rng)];
            let a1 = c1.argmin(&s1, &counter).unwrap();
            let a2 = c2.argmin(&s2, &counter).unwrap();
            let gap = verify_first_order_gap(&f1, &s1, &a1, &f2, &s2, &a2);
            worst_excess = worst_excess.max(gap.lhs - gap.rhs - gap.slack);
            violations += usize::from(!gap.holds);
        }
    }
    let (fast, secs) = within(start, Duration::from_secs(60));
    let pass = violations == 0 && fast;
    report(
        1,
        "first-order gap, 1-D scan h=1e-6",
        pass,
        format!(
            "{} instances, violations={violations}, max(lhs-rhs-slack)={worst_excess:.3e}, {secs:.1}s (< 60s)",
            pairs * sigma_draws
        ),
    );
    assert!(pass);
}

fn aggregate(reports: &[StabilityReport]) -> (usize, [usize; 4], usize, usize, usize) {
    let mut rel = [0; 4];
    for r in reports {
        for (acc, v) in rel.iter_mut().zip(r.relation_violations) {
            *acc += v;
        }
    }
    (
        reports.iter().map(|r| r.monotonicity_violations).sum(),
        rel,
        reports.iter().map(|r| r.first_order_violations).sum(),
        reports.iter().map(|r| r.first_order_checks).sum(),
        reports.iter().map(|r| r.draws).sum(),
    )
}

/// Criterion 2: one-dimensional monotonicity under the `2G` shift.
#[test]
fn c02_monotonicity_1d() {
    let start = Instant::now();
    let dom = interval();
    let oracle = ScanOracle::new(1e-4);
    let counter = CallCounter::new();
    let (pairs, draws) = (1000, 10);
    let reports: Vec<StabilityReport> = (0..pairs)
        .map(|p| {
            let mut rng = stream_rng(SEED + 2, p);
            let k = rng.random_range(1..=6);
            let prefix = random_prefix(&dom, k, &mut rng);
            let new_loss = if rng.random::<bool>() {
                random_relu(&dom, &mut rng)
            } else {
                random_piecewise_linear(&dom, 3, &mut rng)
            };
            let eta = rng.random_range(0.1..10.0);
            let cfg = ProbeConfig::new(eta, draws, SEED + p);
            stability_probe_1d(&dom, &prefix, &new_loss, &cfg, &oracle, &counter).unwrap()
        })
        .collect();
    let (mono, rel, fo, fo_checks, n) = aggregate(&reports);
    let (fast, secs) = within(start, Duration::from_secs(120));
    let pass = mono == 0 && rel == [0; 4] && fo == 0 && fast;
    report(
        2,
        "1-D monotonicity, shift 2G, h=1e-4",
        pass,
        format!(
            "{n} instances, monotonicity violations={mono}, one-sided violations={rel:?}, \
             first-order violations={fo}/{fo_checks}, {secs:.1}s (< 120s)"
        ),
    );
    assert!(pass);
}

/// Criterion 3: per-coordinate relation with shift `3B/delta` in three
/// dimensions.
#[test]
fn c03_monotonicity_kd() {
    let start = Instant::now();
    let dom = BoxDomain::cube(3, 0.0, 1.0).unwrap();
    let oracle = GridOracle::new(1.0 / 64.0);
    let counter = CallCounter::new();
    let delta = 0.25;
    let (instances, draws) = (10, 100);
    let reports: Vec<StabilityReport> = (0..instances)
        .map(|p| {
            let mut rng = stream_rng(SEED + 3, p);
            let prefix: Vec<LossFunction> = (0..4).map(|_| random_piecewise_linear(&dom, 3, &mut rng)).collect();
            let new_loss = random_piecewise_linear(&dom, 3, &mut rng);
            let cfg = ProbeConfig::new(rng.random_range(0.5..4.0), draws, SEED + 100 + p);
            stability_probe_kd(&dom, &prefix, &new_loss, delta, &cfg, &oracle, &counter).unwrap()
        })
        .collect();
    let (mono, rel, fo, fo_checks, n) = aggregate(&reports);
    let gaps: Vec<f64> = reports.iter().flat_map(|r| r.gaps.iter().copied()).collect();
    let mean = MeanEstimate::from_samples(&gaps);
    let (fast, secs) = within(start, Duration::from_secs(300));
    let pass = mono == 0 && fo == 0 && mean.mean.is_finite() && fast;
    report(
        3,
        "k-dim relation, d=3, h=1/64, delta=0.25",
        pass,
        format!(
            "{n} draws x 3 coordinates, violations beyond delta+h={mono} (one-sided {rel:?}), \
             first-order violations={fo}/{fo_checks}, mean l1 gap={:.4}, {secs:.1}s (< 300s)",
            mean.mean
        ),
    );
    assert!(pass);
}

/// Criterion 4: the explicit one-dimensional stability constant.
#[test]
fn c04_stability_constant_1d() {
    let dom = interval();
    let h = 1e-4;
    let oracle = ScanOracle::new(h);
    let counter = CallCounter::new();
    let diameter = dom.linf_diameter();
    let mut all_pass = true;
    let mut lines = Vec::new();
    for (e, eta) in [0.01, 0.05, 0.1].into_iter().enumerate() {
        let mut worst: f64 = f64::NEG_INFINITY;
        let mut mean_of_means = 0.0;
        let instances = 5;
        for i in 0..instances {
            let mut rng = stream_rng(SEED + 4, (e * 100 + i) as u64);
            let prefix: Vec<LossFunction> = (0..60).map(|_| random_relu(&dom, &mut rng)).collect();
            let new_loss = random_relu(&dom, &mut rng);
            let cfg = ProbeConfig::new(eta, 2000, SEED + 40 + i as u64);
            let r = stability_probe_1d(&dom, &prefix, &new_loss, &cfg, &oracle, &counter).unwrap();
            let bound = StabilityReport::one_dim_bound(eta, diameter, new_loss.lipschitz(), h);
            worst = worst.max(r.mean_gap.mean - bound - 3.0 * r.mean_gap.std_error);
            mean_of_means += r.mean_gap.mean / instances as f64;
        }
        all_pass &= worst <= 0.0;
        lines.push(format!("eta={eta}: mean gap {mean_of_means:.4}, max(mean-bound-3se)={worst:.4}"));
    }
    report(4, "1-D stability E|w_t-w_t+1| <= 2 eta D G + 2h + 3se", all_pass, lines.join("; "));
    assert!(all_pass);
}

fn average_regret_trial(
    adversary: &mut dyn nonconvex_ftpl::adversary::Adversary,
    horizon: usize,
    config: &FtplConfig,
    oracle: &dyn OfflineOracle,
) -> (f64, f64) {
    let counter = CallCounter::new();
    let traj = ftpl_run(adversary, horizon, config, oracle, &counter).unwrap();
    let r = compute_regret(&traj, &traj.losses, oracle, &counter).unwrap();
    (r.average_regret, r.average_slack())
}

fn describe(fit: &ScalingFit) -> String {
    let means: Vec<String> = fit
        .points
        .iter()
        .map(|p| format!("T={}:{:.4}", p.horizon, p.average_regret.mean))
        .collect();
    format!("exponent={:.3}, floored={}, means [{}]", fit.exponent, fit.floored_count(), means.join(" "))
}

/// Criterion 5: `T^{-1/2}` average regret in one dimension, against the
/// alternating positive/negative ReLU example sequence.
#[test]
fn c05_regret_scaling_1d() {
    let start = Instant::now();
    let oracle = GridOracle::new(1e-3);
    let fit = scaling_fit(&default_horizons(), 20, Execution::default(), |t, trial| {
        let cfg = FtplConfig::new(schedule_params(t, 1).eta, SEED + 5).with_stream(trial as u64);
        let mut adv = ReluCycle::new(interval(), 0.5);
        Ok(average_regret_trial(&mut adv, t, &cfg, &oracle))
    })
    .unwrap();
    let (fast, secs) = within(start, Duration::from_secs(600));
    let pass = (-0.65..=-0.35).contains(&fit.exponent) && fast;
    report(5, "1-D regret scaling, exponent in [-0.65, -0.35]", pass, format!("{}, {secs:.1}s", describe(&fit)));
    assert!(pass);
}

/// Criterion 6: decreasing average regret in three dimensions, against
/// random ReLU examples (every coordinate is active in every round).
#[test]
fn c06_regret_scaling_3d() {
    let start = Instant::now();
    let dom = BoxDomain::cube(3, -1.0, 1.0).unwrap();
    let oracle = GridOracle::new(1.0 / 8.0);
    let fit = scaling_fit(&default_horizons(), 20, Execution::default(), |t, trial| {
        let cfg = FtplConfig::new(schedule_params(t, 3).eta, SEED + 6).with_stream(trial as u64);
        let mut adv = RandomRelu::new(dom.clone(), SEED + 60 + trial as u64);
        Ok(average_regret_trial(&mut adv, t, &cfg, &oracle))
    })
    .unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = fit.strictly_decreasing() && fit.exponent <= -0.15;
    report(
        6,
        "3-D regret scaling, strictly decreasing, exponent <= -0.15",
        pass,
        format!("{}, {secs:.1}s", describe(&fit)),
    );
    assert!(pass);
}

/// Criterion 7: FTRL fails against the adaptive menu; FTPL on the same
/// recorded sequences does not.
#[test]
fn c07_ftrl_failure() {
    let oracle = GridOracle::new(1e-3);
    let horizons = default_horizons();
    let ftrl = scaling_fit(&horizons, 1, Execution::default(), |t, _| {
        let counter = CallCounter::new();
        let mut adv = AdaptiveReluMenu::new(interval(), 0.5);
        let traj = ftrl_run(&mut adv, t, &FtrlConfig::l2(1.0), &oracle, &counter).unwrap();
        let r = compute_regret(&traj, &traj.losses, &oracle, &counter).unwrap();
        Ok((r.average_regret, r.average_slack()))
    })
    .unwrap();
    let ftpl = scaling_fit(&horizons, 20, Execution::default(), |t, trial| {
        let counter = CallCounter::new();
        let mut adv = AdaptiveReluMenu::new(interval(), 0.5);
        let recorded = ftrl_run(&mut adv, t, &FtrlConfig::l2(1.0), &oracle, &counter).unwrap().losses;
        let mut replay = Replay::new(interval(), recorded);
        let cfg = FtplConfig::new(schedule_params(t, 1).eta, SEED + 7).with_stream(trial as u64);
        Ok(average_regret_trial(&mut replay, t, &cfg, &oracle))
    })
    .unwrap();
    let pass = ftrl.exponent >= -0.1 && ftpl.exponent <= -0.3;
    report(
        7,
        "FTRL-l2 exponent >= -0.1, FTPL on recorded sequences <= -0.3",
        pass,
        format!("FTRL {} | FTPL {}", describe(&ftrl), describe(&ftpl)),
    );
    assert!(pass);
}

/// Criterion 8: the pathwise FTL-BTL inequality.
#[test]
fn c08_ftl_btl_pathwise() {
    let dom = interval();
    let oracle = GridOracle::new(1e-3);
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for seed in 0..200u64 {
        let counter = CallCounter::new();
        let mut adv = RandomPiecewiseLinear::new(dom.clone(), 3, SEED + seed);
        let cfg = FtplConfig::new(0.5, SEED + 8).with_stream(seed).single_draw();
        let traj = ftpl_run(&mut adv, 32, &cfg, &oracle, &counter).unwrap();
        let chk = ftl_btl_check(&traj, &traj.losses, &oracle, &counter).unwrap();
        violations += usize::from(!chk.holds);
        min_margin = min_margin.min(chk.rhs + chk.slack - chk.lhs);
    }
    let pass = violations == 0;
    report(
        8,
        "FTL-BTL pathwise, 200 single-draw runs, T=32",
        pass,
        format!("violations={violations}, min(rhs+slack-lhs)={min_margin:.4e}"),
    );
    assert!(pass);
}

/// Criterion 9: the exponential sampler.
#[test]
fn c09_exponential_sampler() {
    let mut rng = stream_rng(SEED + 9, 0);
    let eta = 1.0;
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|_| sample_exp(eta, &mut rng)).collect();
    let ks = ks_distance_exponential(&xs, eta);
    let (s, t) = (0.5, 1.0);
    let beyond_s = xs.iter().filter(|x| **x > s).count() as f64;
    let conditional = xs.iter().filter(|x| **x > s + t).count() as f64 / beyond_s;
    let unconditional = xs.iter().filter(|x| **x > t).count() as f64 / n as f64;
    let memoryless = (conditional - unconditional).abs();
    let mut pass = ks < 0.01 && memoryless < 0.01;
    let mut lines = vec![format!("KS={ks:.5}"), format!("|P(X>s+t|X>s)-P(X>t)|={memoryless:.5}")];
    for d in [2usize, 8, 32] {
        let eta = 0.5;
        let draws = 20_000;
        let linf: Vec<f64> = (0..draws)
            .map(|_| {
                sample_exp_noise(eta, d, &mut rng)
                    .unwrap()
                    .sigma()
                    .iter()
                    .fold(0.0, |m: f64, s| m.max(*s))
            })
            .collect();
        let m = MeanEstimate::from_samples(&linf);
        let bound = ((d as f64).ln() + 1.0) / eta * 1.05;
        pass &= m.mean <= bound;
        lines.push(format!("d={d}: E||s||inf={:.3} <= {bound:.3}", m.mean));
    }
    report(9, "Exp(eta) sampler", pass, lines.join(", "));
    assert!(pass);
}

fn run_game(game: &ZeroSumGame, horizon: usize, seed: u64) -> (f64, f64, f64, f64, bool, f64) {
    let start = Instant::now();
    let oracle = GridOracle::new(1e-3);
    let counter = CallCounter::new();
    let eta = schedule_params(horizon, 1).eta;
    let cx = FtplConfig::new(eta, seed).with_stream(0);
    let cy = FtplConfig::new(eta, seed).with_stream(1);
    let traj = selfplay_run(game, horizon, &cx, &cy, &oracle, &counter).unwrap();
    let mut rng = stream_rng(seed, 2);
    let (best, _) = amplified_certificate(game, &traj, DEFAULT_AMPLIFICATION, &mut rng, &oracle, &counter).unwrap();
    let avg = average_equilibrium_gap(game, &traj, &oracle, &counter).unwrap();
    (
        best.gap_sum(),
        best.slack,
        avg.gap_sum(),
        avg.slack,
        avg.implications_hold,
        start.elapsed().as_secs_f64(),
    )
}

/// Criterion 10: certified equilibrium gap of an amplified sampled pair.
///
/// The realized pair is a pure strategy; see the README for why the bilinear
/// game cannot meet the threshold this way. The expected-over-`j` gap (the
/// quantity the guarantee is actually about) is reported alongside.
#[test]
fn c10_equilibrium_gap() {
    let horizon = 2048;
    let mut pass = true;
    let mut lines = Vec::new();
    for game in [ZeroSumGame::bilinear(1).unwrap(), make_toy_gan_game(0.25).unwrap()] {
        let (sum, slack, avg_sum, avg_slack, implications, secs) = run_game(&game, horizon, SEED + 10);
        let ok = sum <= 0.25 + slack && secs < 300.0;
        pass &= ok;
        lines.push(format!(
            "{}: sampled-pair gap sum={sum:.4} (slack {slack:.1e}) {}; expected-pair gap sum={avg_sum:.4} \
             (slack {avg_slack:.1e}, implications {implications}) {}; {secs:.1}s",
            game.label(),
            if ok { "ok" } else { "over 0.25" },
            if avg_sum <= 0.25 + avg_slack { "ok" } else { "over 0.25" },
        ));
    }
    report(10, "equilibrium gap <= 0.25, T=2048, K=8", pass, lines.join(" | "));
    assert!(pass);
}

/// Criterion 11: the experts embedding.
#[test]
fn c11_experts_embedding() {
    let mut rng = stream_rng(SEED + 11, 0);
    let mut vertex_ok = true;
    let mut max_mass_err: f64 = 0.0;
    for d in 1..=10usize {
        let e = ExpertsEmbedding::new(1 << d).unwrap();
        let losses: Vec<f64> = (0..e.experts()).map(|_| rng.random::<f64>()).collect();
        for z in (0..e.vertex_count()).step_by((e.vertex_count() / 16).max(1)) {
            vertex_ok &= e.lift(&losses, &e.vertex(z)).unwrap() == losses[e.expert_of(z)];
        }
        for _ in 0..100 {
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let mass: f64 = (0..e.vertex_count()).map(|z| e.vertex_probability(z, &x)).sum();
            max_mass_err = max_mass_err.max((mass - 1.0).abs());
        }
    }
    // Independent re-summation for d = 3 with explicit nested loops.
    let e = ExpertsEmbedding::new(8).unwrap();
    let mut max_brute_err: f64 = 0.0;
    for _ in 0..1000 {
        let x: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let l: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
        let mut brute = 0.0;
        for z0 in 0..2 {
            for z1 in 0..2 {
                for z2 in 0..2 {
                    let pick = |z: usize, v: f64| if z == 1 { v } else { 1.0 - v };
                    let p = pick(z0, x[0]) * pick(z1, x[1]) * pick(z2, x[2]);
                    brute += p * l[z0 + 2 * z1 + 4 * z2];
                }
            }
        }
        max_brute_err = max_brute_err.max((e.lift(&l, &x).unwrap() - brute).abs());
    }
    let pass = vertex_ok && max_mass_err <= 1e-12 && max_brute_err <= 1e-12;
    report(
        11,
        "experts embedding",
        pass,
        format!("vertex exact={vertex_ok}, max|sum p - 1|={max_mass_err:.2e}, max|lift - brute|={max_brute_err:.2e}"),
    );
    assert!(pass);
}

/// Criterion 12: online-to-batch excess risk against measured regret.
#[test]
fn c12_online_to_batch() {
    // x = +1 with probability 0.7, -1 otherwise; y = 0.5.
    let dom = interval();
    let pos = relu_regression(&dom, vec![1.0], 0.5);
    let neg = relu_regression(&dom, vec![-1.0], 0.5);
    let p = 0.7;
    let risk = |w: &[f64]| p * pos.value(w) + (1.0 - p) * neg.value(w);
    let oracle = GridOracle::new(1e-3);
    let best_risk = (0..=20_000)
        .map(|i| risk(&[-1.0 + i as f64 * 1e-4]))
        .fold(f64::INFINITY, f64::min);
    let draw = |rng: &mut nonconvex_ftpl::noise::SimRng, n: usize| -> Vec<LossFunction> {
        (0..n)
            .map(|_| if rng.random_bool(p) { pos.clone() } else { neg.clone() })
            .collect()
    };
    let n = 256;
    let reps = 200;
    let mut excess = Vec::with_capacity(reps);
    let mut regrets = Vec::with_capacity(reps);
    let learner = FtplConfig::new(schedule_params(n, 1).eta, SEED + 12);
    for rep in 0..reps as u64 {
        let counter = CallCounter::new();
        let mut rng = stream_rng(SEED + 12, rep);
        let sample = draw(&mut rng, n);
        let holdout = draw(&mut rng, 2000);
        let cfg = learner.with_stream(rep);
        let out = online_to_batch(&sample, &dom, &cfg, &oracle, &holdout, &mut rng, &counter).unwrap();
        let r = compute_regret(&out.trajectory, &sample, &oracle, &counter).unwrap();
        excess.push(out.risk_estimate.mean - best_risk);
        regrets.push(r.average_regret + r.average_slack());
        assert_eq!(counter.snapshot().sample_count, n as u64);
    }
    let ex = MeanEstimate::from_samples(&excess);
    let rg = MeanEstimate::from_samples(&regrets);
    let se = (ex.std_error.powi(2) + rg.std_error.powi(2)).sqrt();
    let pass = ex.mean <= rg.mean + 3.0 * se;
    report(
        12,
        "online-to-batch excess risk <= average regret + 3se",
        pass,
        format!(
            "n={n}, {reps} reps: excess risk {:.4} (se {:.4}), average regret {:.4} (se {:.4}), R*={best_risk:.4}",
            ex.mean, ex.std_error, rg.mean, rg.std_error
        ),
    );
    assert!(pass);
}

/// Criterion 13: oracle-complexity accounting.
#[test]
fn c13_oracle_accounting() {
    let t = 300;
    let oracle = GridOracle::new(0.01);
    let counter = CallCounter::new();
    let mut adv = RandomRelu::new(interval(), SEED);
    let traj = ftpl_run(&mut adv, t, &FtplConfig::new(0.1, SEED), &oracle, &counter).unwrap();
    let run_ok = traj.counts.offline_calls == t as u64 && traj.counts.value_calls == t as u64;
    let fixed = ftpl_run_with_noise(&mut RandomRelu::new(interval(), 1), 10, &[0.3], &oracle, &CallCounter::new())
        .unwrap();
    let fixed_ok = fixed.counts.offline_calls == 10 && fixed.counts.value_calls == 10;

    let game = make_toy_gan_game(0.1).unwrap();
    let counter = CallCounter::new();
    let (cx, cy) = (FtplConfig::new(0.2, 1).with_stream(0), FtplConfig::new(0.2, 1).with_stream(1));
    let play = selfplay_run(&game, t, &cx, &cy, &oracle, &counter).unwrap();
    let game_ok = play.counts.offline_calls == 2 * t as u64 && play.counts.value_calls == 2 * t as u64;
    let k = DEFAULT_AMPLIFICATION;
    amplified_certificate(&game, &play, k, &mut stream_rng(1, 9), &oracle, &counter).unwrap();
    let after = counter.snapshot();
    let cert_ok = after.offline_calls == (2 * t + 2 * k) as u64 && after.value_calls == 2 * t as u64;
    let pass = run_ok && fixed_ok && game_ok && cert_ok;
    report(
        13,
        "oracle-complexity accounting",
        pass,
        format!(
            "FTPL T={t}: offline={} value={}; game: offline={} value={}; +K={k} certificates: offline={}",
            traj.counts.offline_calls,
            traj.counts.value_calls,
            play.counts.offline_calls,
            play.counts.value_calls,
            after.offline_calls
        ),
    );
    assert!(pass);
}

#[test]
fn zero_loss_smoke() {
    // Keeps the `losses` import honest and guards the zero-loss path.
    let z = losses::zero(1);
    assert_eq!(z.value(&[0.3]), 0.0);
}
