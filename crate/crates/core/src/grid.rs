//! Uniform grids over boxes and cached cumulative losses on them.

use std::ops::Range;
use std::sync::Arc;

use crate::domain::{BoxDomain, CallCounter, LossFunction};
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Uniform grid anchored at the box's lower corner. Axis `k` holds
/// `lower + i*h` for every such value strictly below `upper`, followed by
/// `upper` itself, so both corners are always grid points and consecutive
/// points are at most `h` apart.
///
/// Points are indexed in lexicographic order (first coordinate most
/// significant), so a smaller index is a lexicographically smaller point.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
    resolution: f64,
    len: usize,
}

impl Grid {
    /// Number of points a grid of resolution `h` would have on `domain`.
    pub fn required_points(domain: &BoxDomain, h: f64) -> u128 {
        (0..domain.dim())
            .map(|k| Self::axis_len(domain.width(k), h) as u128)
            .product()
    }

    fn axis_len(width: f64, h: f64) -> usize {
        // Tolerate widths that are an integer multiple of h up to rounding.
        let steps = (width / h - 1e-9).ceil().max(1.0);
        steps as usize + 1
    }

    pub fn new(domain: &BoxDomain, h: f64, budget: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("grid resolution must be positive, got {h}")));
        }
        let required = Self::required_points(domain, h);
        if required > budget as u128 {
            return Err(Error::GridBudget { required, budget });
        }
        let axes = (0..domain.dim())
            .map(|k| {
                let (lo, hi) = (domain.lower()[k], domain.upper()[k]);
                let n = Self::axis_len(hi - lo, h);
                (0..n).map(|i| if i + 1 == n { hi } else { lo + i as f64 * h }).collect()
            })
            .collect();
        Ok(Self {
            axes,
            resolution: h,
            len: required as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn axis(&self, k: usize) -> &[f64] {
        &self.axes[k]
    }

    fn decode(&self, mut idx: usize, multi: &mut [usize]) {
        for k in (0..self.dim()).rev() {
            let n = self.axes[k].len();
            multi[k] = idx % n;
            idx /= n;
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut multi = vec![0; self.dim()];
        self.decode(idx, &mut multi);
        multi.iter().enumerate().map(|(k, &i)| self.axes[k][i]).collect()
    }

    /// Calls `f(index, point)` for every index in `range`, in order.
    pub fn for_each_point<F: FnMut(usize, &[f64])>(&self, range: Range<usize>, mut f: F) {
        if range.is_empty() {
            return;
        }
        let d = self.dim();
        let mut multi = vec![0; d];
        self.decode(range.start, &mut multi);
        let mut point: Vec<f64> = multi.iter().enumerate().map(|(k, &i)| self.axes[k][i]).collect();
        for idx in range {
            f(idx, &point);
            for k in (0..d).rev() {
                multi[k] += 1;
                if multi[k] < self.axes[k].len() {
                    point[k] = self.axes[k][multi[k]];
                    break;
                }
                multi[k] = 0;
                point[k] = self.axes[k][0];
            }
        }
    }
}

/// Point returned by the offline oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleAnswer {
    pub w_hat: Vec<f64>,
    /// `sum_i loss_i(w_hat) - sigma.w_hat`.
    pub objective: f64,
    /// Certified gap to the true minimum over the box:
    /// `(k * G_max + ||sigma||_1) * d * h / 2`.
    pub error_bound: f64,
    pub grid_resolution: f64,
    pub grid_index: usize,
}

/// `sum_{i<k} loss_i` tabulated on a grid; the prefix grows one loss at a
/// time, so an FTPL run pays one grid pass per round.
#[derive(Debug, Clone)]
pub struct GridCache {
    grid: Arc<Grid>,
    values: Vec<f64>,
    losses: usize,
    max_lipschitz: f64,
    exec: Execution,
}

impl GridCache {
    pub fn new(grid: Arc<Grid>, exec: Execution) -> Self {
        let values = vec![0.0; grid.len()];
        Self {
            grid,
            values,
            losses: 0,
            max_lipschitz: 0.0,
            exec,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of losses accumulated so far.
    pub fn loss_count(&self) -> usize {
        self.losses
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn push(&mut self, loss: &LossFunction) -> Result<()> {
        if loss.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                found: loss.dim(),
            });
        }
        let grid = &self.grid;
        par::for_each_chunk_mut(self.exec, &mut self.values, |offset, chunk| {
            grid.for_each_point(offset..offset + chunk.len(), |idx, p| {
                chunk[idx - offset] += loss.value(p);
            });
        });
        self.losses += 1;
        self.max_lipschitz = self.max_lipschitz.max(loss.lipschitz());
        Ok(())
    }

    pub fn error_bound(&self, sigma: &[f64]) -> f64 {
        let l1: f64 = sigma.iter().map(|s| s.abs()).sum();
        (self.losses as f64 * self.max_lipschitz + l1) * self.grid.dim() as f64 * self.grid.resolution() / 2.0
    }

    fn scan(&self, range: Range<usize>, sigma: &[f64]) -> (f64, usize) {
        let axes = &self.grid.axes;
        let d = axes.len();
        let last = d - 1;
        let last_axis = &axes[last];
        let s_last = sigma[last];
        let mut multi = vec![0; d];
        self.grid.decode(range.start, &mut multi);
        // prefix[k] = ((0 + s_0 x_0) + s_1 x_1) + ... + s_k x_k, matching
        // `domain::dot`.
        let mut prefix = vec![0.0; d];
        let recompute = |multi: &[usize], prefix: &mut [f64], from: usize| {
            for k in from..last {
                let before = if k == 0 { 0.0 } else { prefix[k - 1] };
                prefix[k] = before + sigma[k] * axes[k][multi[k]];
            }
        };
        recompute(&multi, &mut prefix, 0);
        let mut best = (f64::INFINITY, usize::MAX);
        let mut idx = range.start;
        while idx < range.end {
            let base = if last == 0 { 0.0 } else { prefix[last - 1] };
            let start = multi[last];
            let take = (last_axis.len() - start).min(range.end - idx);
            let row_axis = &last_axis[start..start + take];
            let row_values = &self.values[idx..idx + take];
            for (j, (v, x)) in row_values.iter().zip(row_axis).enumerate() {
                let obj = v - (base + s_last * x);
                if obj < best.0 {
                    best = (obj, idx + j);
                }
            }
            idx += take;
            multi[last] = start + take;
            if multi[last] == last_axis.len() && idx < range.end {
                multi[last] = 0;
                let mut k = last;
                while k > 0 {
                    k -= 1;
                    multi[k] += 1;
                    if multi[k] < axes[k].len() {
                        break;
                    }
                    multi[k] = 0;
                }
                recompute(&multi, &mut prefix, k);
            }
        }
        best
    }

    /// Lexicographically smallest grid minimizer of `cached - sigma.w`.
    /// Charges one offline-oracle call.
    pub fn argmin(&self, sigma: &[f64], counter: &CallCounter) -> Result<OracleAnswer> {
        if sigma.len() != self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                found: sigma.len(),
            });
        }
        if sigma.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("perturbation must be finite, got {sigma:?}")));
        }
        let (objective, grid_index) = par::argmin_by_chunks(self.exec, self.values.len(), |r| self.scan(r, sigma));
        if grid_index == usize::MAX {
            return Err(Error::invalid("objective is NaN on the whole grid"));
        }
        counter.record_offline_call();
        Ok(OracleAnswer {
            w_hat: self.grid.point(grid_index),
            objective,
            error_bound: self.error_bound(sigma),
            grid_resolution: self.grid.resolution(),
            grid_index,
        })
    }
}
