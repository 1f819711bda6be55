//! Exponential perturbations and seeded random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::NoiseVector;
use crate::error::{Error, Result};

pub type SimRng = ChaCha8Rng;

/// Independent random stream `stream` of the run seeded with `seed`.
///
/// Streams of one seed never overlap, so trials and players can draw in any
/// order and still see the same numbers.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One `Exp(eta)` draw by inversion: `-ln(u) / eta` with `u` uniform on `(0, 1]`.
#[inline]
pub fn sample_exp<R: Rng + ?Sized>(eta: f64, rng: &mut R) -> f64 {
    let u = 1.0 - rng.random::<f64>();
    -u.ln() / eta
}

/// `d` i.i.d. `Exp(eta)` coordinates.
pub fn sample_exp_noise<R: Rng + ?Sized>(eta: f64, d: usize, rng: &mut R) -> Result<NoiseVector> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("noise rate must be positive and finite, got {eta}")));
    }
    let sigma = (0..d).map(|_| sample_exp(eta, rng)).collect();
    NoiseVector::new(sigma, eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_nonnegative_and_reproducible() {
        let mut a = stream_rng(5, 0);
        let mut b = stream_rng(5, 0);
        for _ in 0..100 {
            let x = sample_exp_noise(0.3, 4, &mut a).unwrap();
            assert!(x.sigma().iter().all(|s| *s >= 0.0 && s.is_finite()));
            assert_eq!(x, sample_exp_noise(0.3, 4, &mut b).unwrap());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = stream_rng(5, 0);
        let mut b = stream_rng(5, 1);
        assert_ne!(sample_exp(1.0, &mut a), sample_exp(1.0, &mut b));
    }

    #[test]
    fn rejects_nonpositive_rate() {
        let mut rng = stream_rng(1, 0);
        assert!(sample_exp_noise(0.0, 2, &mut rng).is_err());
        assert!(sample_exp_noise(-1.0, 2, &mut rng).is_err());
    }

    #[test]
    fn tail_matches_exp_minus_s() {
        let mut rng = stream_rng(2024, 0);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_exp(1.0, &mut rng)).collect();
        for s in [0.5, 1.0, 2.0] {
            let p = draws.iter().filter(|x| **x >= s).count() as f64 / n as f64;
            assert!((p - (-s).exp()).abs() < 0.005, "s={s}: {p}");
        }
    }

    #[test]
    fn expected_max_stays_below_log_bound() {
        let mut rng = stream_rng(3, 0);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| crate::domain::linf_norm(sample_exp_noise(1.0, 8, &mut rng).unwrap().sigma()))
            .sum::<f64>()
            / n as f64;
        assert!(mean <= 8f64.ln() + 1.0, "{mean}");
    }
}
