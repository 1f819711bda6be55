//! Self-play, certificates and the experts embedding end to end.

use nonconvex_ftpl::games::experts::{bernoulli_expert_losses, experts_regret_run, ExpertsEmbedding};
use nonconvex_ftpl::games::{
    amplified_certificate, average_equilibrium_gap, double_well_potential, equilibrium_gap, make_toy_gan_game,
    sample_pair, selfplay_run, ZeroSumGame,
};
use nonconvex_ftpl::noise::stream_rng;
use nonconvex_ftpl::{schedule_params, CallCounter, FtplConfig, GridOracle, ScanOracle};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn players(eta: f64, seed: u64) -> (FtplConfig, FtplConfig) {
    (FtplConfig::new(eta, seed).with_stream(0), FtplConfig::new(eta, seed).with_stream(1))
}

#[test]
fn sampled_round_is_uniform() {
    let game = ZeroSumGame::bilinear(1).unwrap();
    let t = 20;
    let (cx, cy) = players(0.5, 3);
    let traj = selfplay_run(&game, t, &cx, &cy, &GridOracle::new(0.1), &CallCounter::new()).unwrap();
    let draws = 10_000;
    let mut counts = vec![0u32; t];
    let mut rng = stream_rng(17, 0);
    for _ in 0..draws {
        counts[sample_pair(&traj, &mut rng).round - 1] += 1;
    }
    let expected = draws as f64 / t as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((t - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(chi2 < critical, "chi2 = {chi2:.2} >= {critical:.2}");
}

#[test]
fn double_well_gaps_match_dense_scan() {
    let game = ZeroSumGame::double_well();
    let c = CallCounter::new();
    let oracle = ScanOracle::new(1e-4);
    // Brute-force the well locations independently.
    let (mut best_u, mut best_v) = (0.0, f64::INFINITY);
    for i in 0..=200_000 {
        let u = -1.0 + i as f64 * 1e-5;
        let v = double_well_potential(u);
        if v < best_v {
            best_v = v;
            best_u = u;
        }
    }
    assert!((best_u + 0.5).abs() < 1e-4);
    let cert = equilibrium_gap(&game, &[best_u], &[-best_u], &oracle, &c).unwrap();
    assert!(cert.gap_x.abs() <= cert.slack + 1e-9 && cert.gap_y.abs() <= cert.slack + 1e-9, "{cert:?}");
}

#[test]
fn double_well_selfplay_converges_to_a_well() {
    let game = ZeroSumGame::double_well();
    let c = CallCounter::new();
    let oracle = GridOracle::new(1e-3);
    let t = 512;
    let (cx, cy) = players(schedule_params(t, 1).eta, 8);
    let traj = selfplay_run(&game, t, &cx, &cy, &oracle, &c).unwrap();
    let (best, _) = amplified_certificate(&game, &traj, 8, &mut stream_rng(8, 9), &oracle, &c).unwrap();
    // Separable game: each player faces a fixed landscape, so late iterates
    // sit in a well and the sampled pair is nearly a saddle.
    assert!(best.gap_sum() < 0.05, "{best:?}");
    let avg = average_equilibrium_gap(&game, &traj, &oracle, &c).unwrap();
    assert!(avg.implications_hold);
}

#[test]
fn toy_gan_average_gap_is_small() {
    let game = make_toy_gan_game(0.25).unwrap();
    let c = CallCounter::new();
    let oracle = GridOracle::new(1e-3);
    let t = 512;
    let (cx, cy) = players(schedule_params(t, 1).eta, 4);
    let traj = selfplay_run(&game, t, &cx, &cy, &oracle, &c).unwrap();
    let avg = average_equilibrium_gap(&game, &traj, &oracle, &c).unwrap();
    assert!(avg.gap_sum() <= 0.3, "{avg:?}");
    assert!(traj.rounds.iter().all(|r| r.x_loss == -r.y_loss));
}

#[test]
fn selfplay_is_reproducible() {
    let game = make_toy_gan_game(-0.1).unwrap();
    let oracle = GridOracle::new(0.01);
    let (cx, cy) = players(0.2, 12);
    let a = selfplay_run(&game, 64, &cx, &cy, &oracle, &CallCounter::new()).unwrap();
    let b = selfplay_run(&game, 64, &cx, &cy, &oracle, &CallCounter::new()).unwrap();
    assert_eq!(a.rounds, b.rounds);
}

#[test]
fn experts_beat_uniform_play() {
    let n = 4;
    let t = 512;
    let e = ExpertsEmbedding::new(n).unwrap();
    let m = bernoulli_expert_losses(n, t, 2024);
    let cfg = FtplConfig::new(schedule_params(t, e.dim()).eta, 5);
    let run = experts_regret_run(&e, &m, &cfg, &GridOracle::new(1.0 / 32.0), &CallCounter::new()).unwrap();
    assert!(
        run.regret.average_regret < run.uniform_average_regret,
        "{} vs uniform {}",
        run.regret.average_regret,
        run.uniform_average_regret
    );
}
