//! The round protocol shared by every learner, and inverse-CDF sampling.

use rand::{Rng, RngExt};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::types::{LossVector, SimplexWeights};

/// What the learner gets to see after playing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    /// The whole loss vector.
    Full,
    /// Only the loss of the sampled action.
    Bandit,
}

/// An online learner over a fixed action set.
///
/// Each round the caller asks for [`OnlineLearner::distribution`], draws an
/// action from it, reveals the loss and calls [`OnlineLearner::update`].
/// Bandit learners read only `loss[sampled]`.
pub trait OnlineLearner<F: Scalar> {
    fn num_actions(&self) -> usize;

    fn feedback(&self) -> Feedback;

    /// The distribution the learner samples from this round.
    fn distribution(&mut self) -> Result<SimplexWeights<F>>;

    /// Completes the round.
    fn update(&mut self, loss: &LossVector<F>, sampled: usize) -> Result<()>;
}

/// Draws an index from `p` by inverse CDF, summing in index order.
///
/// A uniform draw past the accumulated total (possible through rounding) maps
/// to the last action with positive probability.
pub fn sample_index<F: Scalar, R: Rng + ?Sized>(p: &SimplexWeights<F>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0f64;
    let mut last_positive = 0;
    for (i, &x) in p.as_slice().iter().enumerate() {
        let x = x.as_f64();
        if x > 0.0 {
            last_positive = i;
        }
        acc += x;
        if u < acc {
            return i;
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn never_draws_zero_mass() {
        let p = SimplexWeights::<f64>::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let i = sample_index(&p, &mut rng);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn frequencies_match() {
        let p = SimplexWeights::<f64>::new(vec![0.2, 0.3, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 3];
        let n = 100_000;
        for _ in 0..n {
            counts[sample_index(&p, &mut rng)] += 1;
        }
        for (c, q) in counts.iter().zip([0.2, 0.3, 0.5]) {
            let sd = (q * (1.0 - q) / n as f64).sqrt();
            assert!((*c as f64 / n as f64 - q).abs() < 4.0 * sd);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = SimplexWeights::<f64>::uniform(7);
        let a: Vec<usize> = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..50).map(|_| sample_index(&p, &mut rng)).collect()
        };
        let b: Vec<usize> = {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..50).map(|_| sample_index(&p, &mut rng)).collect()
        };
        assert_eq!(a, b);
    }
}
