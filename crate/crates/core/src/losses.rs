//! Built-in loss families. Each constructor computes the family's
//! l1-Lipschitz constant `G` (the supremum of the gradient's l-infinity norm)
//! and range bound `B` in closed form from the box it is built on.

use rand::Rng;

use crate::domain::{dot, BoxDomain, LossFunction};

#[inline]
pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

/// Range of `w -> x.w` over the box.
fn linear_range(domain: &BoxDomain, x: &[f64]) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (k, xk) in x.iter().enumerate() {
        let a = xk * domain.lower()[k];
        let b = xk * domain.upper()[k];
        lo += a.min(b);
        hi += a.max(b);
    }
    (lo, hi)
}

fn linf(v: &[f64]) -> f64 {
    crate::domain::linf_norm(v)
}

/// The constant zero loss.
pub fn zero(dim: usize) -> LossFunction {
    LossFunction::new(dim, "zero", 0.0, 0.0, |_| 0.0)
}

/// `c.w + offset`.
pub fn linear(domain: &BoxDomain, c: Vec<f64>, offset: f64) -> LossFunction {
    assert_eq!(c.len(), domain.dim());
    let (lo, hi) = linear_range(domain, &c);
    let bound = (lo + offset).abs().max((hi + offset).abs());
    let g = linf(&c);
    let label = format!("linear({c:?}, {offset})");
    LossFunction::new(domain.dim(), label, g, bound, move |w| dot(&c, w) + offset)
}

/// `scale * ||w - center||_2^2`.
pub fn quadratic(domain: &BoxDomain, center: Vec<f64>, scale: f64) -> LossFunction {
    assert_eq!(center.len(), domain.dim());
    assert!(scale >= 0.0);
    let far: Vec<f64> = (0..domain.dim())
        .map(|k| (domain.lower()[k] - center[k]).abs().max((domain.upper()[k] - center[k]).abs()))
        .collect();
    let g = 2.0 * scale * linf(&far);
    let bound = scale * far.iter().map(|f| f * f).sum::<f64>();
    let label = format!("quadratic({center:?}, {scale})");
    LossFunction::new(domain.dim(), label, g, bound, move |w| {
        let mut acc = 0.0;
        for (x, c) in w.iter().zip(&center) {
            acc += (x - c) * (x - c);
        }
        scale * acc
    })
}

/// ReLU regression loss `(relu(x.w) - y)^2`.
pub fn relu_regression(domain: &BoxDomain, x: Vec<f64>, y: f64) -> LossFunction {
    assert_eq!(x.len(), domain.dim());
    let (lo, hi) = linear_range(domain, &x);
    let m = (relu(lo) - y).abs().max((relu(hi) - y).abs());
    let g = 2.0 * m * linf(&x);
    let label = format!("relu(x={x:?}, y={y})");
    LossFunction::new(domain.dim(), label, g, m * m, move |w| {
        let r = relu(dot(&x, w)) - y;
        r * r
    })
}

/// Random ReLU regression loss with `|x_k|` in `[0.25, 1]` (random sign) and
/// `y` uniform in `[0, 1]`.
pub fn random_relu<R: Rng + ?Sized>(domain: &BoxDomain, rng: &mut R) -> LossFunction {
    let x: Vec<f64> = (0..domain.dim())
        .map(|_| {
            let mag = rng.random_range(0.25..=1.0);
            if rng.random::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let y = rng.random::<f64>();
    relu_regression(domain, x, y)
}

/// `sign * min(cap, max_j (a_j.w + b_j))`: a capped max of affine pieces,
/// optionally reflected. Non-convex as soon as the cap binds or `sign < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    pub slopes: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub cap: f64,
    pub sign: f64,
}

impl PiecewiseLinear {
    pub fn eval(&self, w: &[f64]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for (a, b) in self.slopes.iter().zip(&self.intercepts) {
            best = best.max(dot(a, w) + b);
        }
        self.sign * best.min(self.cap)
    }

    pub fn into_loss(self, domain: &BoxDomain) -> LossFunction {
        assert!(!self.slopes.is_empty());
        let g = self.slopes.iter().map(|a| linf(a)).fold(0.0, f64::max);
        let mut bound = self.cap.abs();
        for (a, b) in self.slopes.iter().zip(&self.intercepts) {
            let (lo, hi) = linear_range(domain, a);
            bound = bound.max((lo + b).abs()).max((hi + b).abs());
        }
        let label = format!("pwl(m={}, cap={:.3}, sign={})", self.slopes.len(), self.cap, self.sign);
        LossFunction::new(domain.dim(), label, g, bound, move |w| self.eval(w))
    }
}

/// Random capped piecewise-linear loss with `pieces` affine parts, slopes in
/// `[-1, 1]`, intercepts in `[-0.5, 0.5]`, a cap in `[0, 1]` and a random sign.
pub fn random_piecewise_linear<R: Rng + ?Sized>(domain: &BoxDomain, pieces: usize, rng: &mut R) -> LossFunction {
    let d = domain.dim();
    let slopes = (0..pieces)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .collect();
    let intercepts = (0..pieces).map(|_| rng.random_range(-0.5..=0.5)).collect();
    let cap = rng.random_range(0.0..=1.0);
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    PiecewiseLinear {
        slopes,
        intercepts,
        cap,
        sign,
    }
    .into_loss(domain)
}

/// `weight * ||w||_2^2`.
pub fn l2_regularizer(domain: &BoxDomain, weight: f64) -> LossFunction {
    let g = 2.0 * weight * (0..domain.dim()).map(|k| domain.max_abs(k)).fold(0.0, f64::max);
    let bound = weight * (0..domain.dim()).map(|k| domain.max_abs(k).powi(2)).sum::<f64>();
    LossFunction::new(domain.dim(), format!("l2({weight})"), g, bound, move |w| {
        let mut acc = 0.0;
        for x in w {
            acc += x * x;
        }
        weight * acc
    })
}

/// `weight * ||w||_1`.
pub fn l1_regularizer(domain: &BoxDomain, weight: f64) -> LossFunction {
    let bound = weight * (0..domain.dim()).map(|k| domain.max_abs(k)).sum::<f64>();
    LossFunction::new(domain.dim(), format!("l1({weight})"), weight, bound, move |w| {
        let mut acc = 0.0;
        for x in w {
            acc += x.abs();
        }
        weight * acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::l1_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point<R: Rng>(domain: &BoxDomain, rng: &mut R) -> Vec<f64> {
        (0..domain.dim())
            .map(|k| rng.random_range(domain.lower()[k]..=domain.upper()[k]))
            .collect()
    }

    /// Spot-checks the declared G and B on 1000 random pairs.
    fn assert_declared_constants(loss: &LossFunction, domain: &BoxDomain, rng: &mut ChaCha8Rng) {
        for _ in 0..1000 {
            let a = random_point(domain, rng);
            let b = random_point(domain, rng);
            let (va, vb) = (loss.value(&a), loss.value(&b));
            let lip = loss.lipschitz() * l1_distance(&a, &b).unwrap() + 1e-12;
            assert!((va - vb).abs() <= lip, "{}: Lipschitz violated", loss.label());
            assert!(va.abs() <= loss.bound() + 1e-12, "{}: bound violated", loss.label());
        }
    }

    #[test]
    fn declared_constants_hold_for_all_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=3 {
            let dom = BoxDomain::cube(d, -1.0, 1.0).unwrap();
            let unit = BoxDomain::cube(d, 0.0, 1.0).unwrap();
            for domain in [&dom, &unit] {
                for _ in 0..5 {
                    assert_declared_constants(&random_relu(domain, &mut rng), domain, &mut rng);
                    assert_declared_constants(&random_piecewise_linear(domain, 3, &mut rng), domain, &mut rng);
                }
                assert_declared_constants(&l2_regularizer(domain, 0.7), domain, &mut rng);
                assert_declared_constants(&l1_regularizer(domain, 0.7), domain, &mut rng);
                assert_declared_constants(&quadratic(domain, vec![0.2; d], 1.5), domain, &mut rng);
                assert_declared_constants(&linear(domain, vec![-0.4; d], 0.1), domain, &mut rng);
            }
        }
    }

    #[test]
    fn relu_constants_in_closed_form() {
        let dom = BoxDomain::symmetric_interval();
        let l = relu_regression(&dom, vec![1.0], 1.0);
        // relu(w) ranges over [0, 1], so |relu - 1| <= 1.
        assert_eq!(l.lipschitz(), 2.0);
        assert_eq!(l.bound(), 1.0);
        let l = relu_regression(&dom, vec![-1.0], 0.5);
        assert_eq!(l.lipschitz(), 1.0);
        assert_eq!(l.bound(), 0.25);
    }
}
