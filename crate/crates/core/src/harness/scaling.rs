//! Power-law fits of average regret against the horizon.

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::stats::{linear_fit, MeanEstimate};

/// Per-horizon measurement feeding the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub horizon: usize,
    /// Mean and standard error of the average regret over trials.
    pub average_regret: MeanEstimate,
    /// Mean discretization slack of the average regret.
    pub slack: f64,
    /// Value entering the log-fit: the mean, or the slack when the mean was
    /// not positive.
    pub fitted_value: f64,
    pub floored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    /// Slope of `log(avg regret)` against `log T`.
    pub exponent: f64,
    /// Intercept of that line (natural logarithms).
    pub intercept: f64,
    pub points: Vec<ScalingPoint>,
}

impl ScalingFit {
    pub fn floored_count(&self) -> usize {
        self.points.iter().filter(|p| p.floored).count()
    }

    /// True when the mean average regret strictly decreases along the grid.
    pub fn strictly_decreasing(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[1].average_regret.mean < w[0].average_regret.mean)
    }
}

/// Least-squares slope and intercept of `log y` against `log x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("power-law fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|v| *v <= 0.0 || !v.is_finite()) {
        return Err(Error::invalid("power-law fit needs positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(linear_fit(&lx, &ly))
}

/// Runs `trials` independent trials at every horizon and fits the exponent.
///
/// `run_trial(T, trial)` returns `(average_regret, average_slack)` and must
/// derive all of its randomness from its arguments, so that results do not
/// depend on scheduling. Means that are not positive are floored at the mean
/// slack (or the smallest positive value) before taking logs.
pub fn scaling_fit<F>(horizons: &[usize], trials: usize, exec: Execution, run_trial: F) -> Result<ScalingFit>
where
    F: Fn(usize, usize) -> Result<(f64, f64)> + Sync + Send,
{
    if horizons.len() < 4 {
        return Err(Error::invalid(format!(
            "scaling fit needs at least 4 horizons, got {}",
            horizons.len()
        )));
    }
    if trials == 0 || horizons.contains(&0) {
        return Err(Error::invalid("scaling fit needs T >= 1 and at least one trial"));
    }
    let jobs: Vec<(usize, usize)> = horizons
        .iter()
        .flat_map(|&t| (0..trials).map(move |k| (t, k)))
        .collect();
    let results = map_indexed(exec, jobs.len(), |i| run_trial(jobs[i].0, jobs[i].1))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let points: Vec<ScalingPoint> = horizons
        .iter()
        .zip(results.chunks(trials))
        .map(|(&horizon, chunk)| {
            let regrets: Vec<f64> = chunk.iter().map(|r| r.0).collect();
            let slack = chunk.iter().map(|r| r.1).sum::<f64>() / trials as f64;
            let average_regret = MeanEstimate::from_samples(&regrets);
            let floored = average_regret.mean.is_nan() || average_regret.mean <= 0.0;
            let fitted_value = if floored {
                slack.max(f64::MIN_POSITIVE)
            } else {
                average_regret.mean
            };
            ScalingPoint {
                horizon,
                average_regret,
                slack,
                fitted_value,
                floored,
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.horizon as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.fitted_value).collect();
    let (exponent, intercept) = fit_power_law(&xs, &ys)?;
    Ok(ScalingFit {
        exponent,
        intercept,
        points,
    })
}

/// `64, 128, ..., 4096`.
pub fn default_horizons() -> Vec<usize> {
    (6..=12).map(|k| 1usize << k).collect()
}
