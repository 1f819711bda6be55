//! Decision sets, instrumented losses and call accounting.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance used for exact-value comparisons throughout the crate.
pub const EXACT_TOL: f64 = 1e-12;

/// Axis-aligned box `[lower, upper]` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid("box must have dimension at least 1"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (k, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::invalid(format!(
                    "coordinate {k}: bounds [{l}, {u}] must be finite with lower < upper"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// `[-1, 1]`, the default one-dimensional decision set.
    pub fn symmetric_interval() -> Self {
        Self::cube(1, -1.0, 1.0).expect("valid interval")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, k: usize) -> f64 {
        self.upper[k] - self.lower[k]
    }

    /// `max_k (upper[k] - lower[k])`.
    pub fn linf_diameter(&self) -> f64 {
        (0..self.dim()).map(|k| self.width(k)).fold(0.0, f64::max)
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim()
            && w
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *l <= *x && *x <= *u)
    }

    /// Largest absolute coordinate value attainable in the box, per axis.
    pub fn max_abs(&self, k: usize) -> f64 {
        self.lower[k].abs().max(self.upper[k].abs())
    }

    /// The point of the box with the smallest Euclidean norm (the clamp of the origin).
    pub fn min_norm_point(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.0_f64.clamp(*l, *u))
            .collect()
    }

    pub fn check_dim(&self, found: usize) -> Result<()> {
        if found == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            })
        }
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A black-box loss `W -> R` with its declared l1-Lipschitz constant `G`
/// and range bound `B` (`|value(w)| <= B` on the box it was built for).
///
/// The value map must be pure; clones share it.
#[derive(Clone)]
pub struct LossFunction {
    value: Arc<ValueFn>,
    dim: usize,
    lipschitz: f64,
    bound: f64,
    label: String,
}

impl LossFunction {
    pub fn new<F>(dim: usize, label: impl Into<String>, lipschitz: f64, bound: f64, value: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        debug_assert!(lipschitz >= 0.0 && bound >= 0.0);
        Self {
            value: Arc::new(value),
            dim,
            lipschitz,
            bound,
            label: label.into(),
        }
    }

    /// Raw evaluation. Does not touch any counter; use [`evaluate`] for
    /// charged value-oracle queries.
    #[inline]
    pub fn value(&self, w: &[f64]) -> f64 {
        (self.value)(w)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for LossFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LossFunction")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("bound", &self.bound)
            .finish()
    }
}

/// Snapshot of a [`CallCounter`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CallCounts {
    pub value_calls: u64,
    pub offline_calls: u64,
    pub sample_count: u64,
}

impl CallCounts {
    /// Samples plus value-oracle calls plus offline-oracle calls.
    pub fn oracle_complexity(&self) -> u64 {
        self.sample_count + self.value_calls + self.offline_calls
    }
}

/// Thread-safe oracle accounting. Totals are exact.
#[derive(Debug, Default)]
pub struct CallCounter {
    value_calls: AtomicU64,
    offline_calls: AtomicU64,
    sample_count: AtomicU64,
}

impl CallCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_value_call(&self) {
        self.value_calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_offline_call(&self) {
        self.offline_calls.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_samples(&self, n: u64) {
        self.sample_count.fetch_add(n, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> CallCounts {
        CallCounts {
            value_calls: self.value_calls.load(Ordering::Relaxed),
            offline_calls: self.offline_calls.load(Ordering::Relaxed),
            sample_count: self.sample_count.load(Ordering::Relaxed),
        }
    }
}

/// Nonnegative perturbation vector together with the rate it was drawn at.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseVector {
    sigma: Vec<f64>,
    eta: f64,
}

impl NoiseVector {
    pub fn new(sigma: Vec<f64>, eta: f64) -> Result<Self> {
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::invalid(format!("noise rate must be positive, got {eta}")));
        }
        if let Some(bad) = sigma.iter().find(|s| s.is_nan() || **s < 0.0) {
            return Err(Error::invalid(format!("noise coordinates must be nonnegative, got {bad}")));
        }
        Ok(Self { sigma, eta })
    }

    /// The zero perturbation; turns FTPL into Follow-the-Leader.
    pub fn zeros(dim: usize, eta: f64) -> Self {
        Self {
            sigma: vec![0.0; dim],
            eta,
        }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }
}

/// Value-oracle query: returns `loss(w)` and charges one value call.
pub fn evaluate(loss: &LossFunction, domain: &BoxDomain, w: &[f64], counter: &CallCounter) -> Result<f64> {
    domain.check_dim(w.len())?;
    if !domain.contains(w) {
        return Err(Error::DomainViolation { point: w.to_vec() });
    }
    counter.record_value_call();
    Ok(loss.value(w))
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

pub fn linf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `sum_k a[k] * b[k]`, accumulated left to right from zero. Every objective
/// in the crate goes through this so that equal inputs give bit-equal values.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}
