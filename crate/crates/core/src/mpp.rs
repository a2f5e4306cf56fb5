//! Mixing past posteriors with a doubling trick on `Σ_t Σ_i p_t(i) r_t(i)²`.
//!
//! Plays `p_t = (1 − γ) p̃_t + γ · avg(p̃_{t0..t−1})`, updates
//! `p̃_{t+1} ∝ p_t exp(η r_t)` and restarts from uniform with a doubled
//! threshold once the accumulated variance exceeds it.

use crate::error::{invalid, Result};
use crate::learner::{Feedback, OnlineLearner};
use crate::reductions::tuned_rate_for_budget;
use crate::scalar::Scalar;
use crate::types::{instantaneous_regrets, LossVector, SimplexWeights};

#[derive(Debug, Clone)]
pub struct MppState<F> {
    num_actions: usize,
    horizon: usize,
    complexity: f64,
    gamma: F,
    v: F,
    t: usize,
    t0: usize,
    d: f64,
    eta: F,
    p_tilde: Vec<F>,
    history_sum: Vec<F>,
    history_len: usize,
    restarts: usize,
    total_variance: F,
}

impl<F: Scalar> MppState<F> {
    /// `switches` and `distinct` are the `(S, n)` the rate schedule is tuned for.
    pub fn new(num_actions: usize, horizon: usize, switches: usize, distinct: usize) -> Result<Self> {
        if num_actions == 0 || horizon == 0 {
            return Err(invalid("MPP needs at least one action and one round"));
        }
        if switches == 0 || distinct == 0 {
            return Err(invalid("S and n must be at least 1"));
        }
        let complexity =
            switches as f64 * (horizon as f64).ln() + distinct as f64 * (num_actions as f64).ln();
        let d = 1.0;
        let eta = F::lit(tuned_rate_for_budget(complexity, d));
        let uniform = F::one() / F::from_usize_lossy(num_actions);
        Ok(Self {
            num_actions,
            horizon,
            complexity,
            gamma: F::one() / F::from_usize_lossy(horizon),
            v: F::zero(),
            t: 1,
            t0: 1,
            d,
            eta,
            p_tilde: vec![uniform; num_actions],
            history_sum: vec![F::zero(); num_actions],
            history_len: 0,
            restarts: 0,
            total_variance: F::zero(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }

    pub fn eta(&self) -> F {
        self.eta
    }

    /// Current threshold `D`.
    pub fn threshold(&self) -> f64 {
        self.d
    }

    /// Variance accumulated since the last restart.
    pub fn variance(&self) -> F {
        self.v
    }

    /// `Σ_t Σ_i p_t(i) r_t(i)²` over every round played.
    pub fn total_variance(&self) -> F {
        self.total_variance
    }

    pub fn restarts(&self) -> usize {
        self.restarts
    }

    /// Index of the next round, starting at 1.
    pub fn round_index(&self) -> usize {
        self.t
    }

    pub fn epoch_start(&self) -> usize {
        self.t0
    }

    pub fn posterior(&self) -> &[F] {
        &self.p_tilde
    }

    /// Distribution for the current round; `p̃` itself when the epoch has no history.
    pub fn mpp_distribution(&self) -> SimplexWeights<F> {
        if self.history_len == 0 {
            return SimplexWeights::from_raw(self.p_tilde.clone());
        }
        let keep = F::one() - self.gamma;
        let share = self.gamma / F::from_usize_lossy(self.history_len);
        SimplexWeights::from_raw(
            self.p_tilde
                .iter()
                .zip(&self.history_sum)
                .map(|(&p, &h)| keep * p + share * h)
                .collect(),
        )
    }

    /// Plays the current round against `loss`; returns `Σ_i p(i) r(i)²`.
    pub fn mpp_update(&mut self, loss: &LossVector<F>) -> Result<F> {
        if loss.len() != self.num_actions {
            return Err(invalid(format!(
                "loss has {} entries, expected {}",
                loss.len(),
                self.num_actions
            )));
        }
        let p = self.mpp_distribution();
        let r = instantaneous_regrets(p.as_slice(), loss.as_slice());
        let shift = r.iter().copied().fold(F::neg_infinity(), F::max);
        let unnormalized = p
            .as_slice()
            .iter()
            .zip(&r)
            .map(|(&pi, &ri)| pi * (self.eta * (ri - shift)).exp())
            .collect();
        let next = SimplexWeights::from_unnormalized(unnormalized)?.into_vec();
        let variance: F = p.as_slice().iter().zip(&r).map(|(&pi, &ri)| pi * ri * ri).sum();
        self.v = self.v + variance;
        self.total_variance = self.total_variance + variance;
        for (acc, &q) in self.history_sum.iter_mut().zip(&self.p_tilde) {
            *acc = *acc + q;
        }
        self.history_len += 1;
        self.p_tilde = next;
        if self.v.as_f64() > self.d {
            self.restart();
        }
        self.t += 1;
        Ok(variance)
    }

    fn restart(&mut self) {
        self.v = F::zero();
        self.t0 = self.t + 1;
        self.d *= 2.0;
        self.eta = F::lit(tuned_rate_for_budget(self.complexity, self.d));
        let uniform = F::one() / F::from_usize_lossy(self.num_actions);
        self.p_tilde = vec![uniform; self.num_actions];
        self.history_sum = vec![F::zero(); self.num_actions];
        self.history_len = 0;
        self.restarts += 1;
    }
}

impl<F: Scalar> OnlineLearner<F> for MppState<F> {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn feedback(&self) -> Feedback {
        Feedback::Full
    }

    fn distribution(&mut self) -> Result<SimplexWeights<F>> {
        Ok(self.mpp_distribution())
    }

    fn update(&mut self, loss: &LossVector<F>, _sampled: usize) -> Result<()> {
        self.mpp_update(loss).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_history_plays_posterior() {
        let state = MppState::<f64>::new(3, 100, 2, 2).unwrap();
        assert_eq!(state.mpp_distribution().as_slice(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn mixes_past_posteriors() {
        let mut state = MppState::<f64>::new(2, 10, 1, 1).unwrap();
        state.gamma = 0.1;
        state.history_sum = vec![1.0, 0.0];
        state.history_len = 1;
        state.p_tilde = vec![0.0, 1.0];
        let p = state.mpp_distribution();
        assert!((p.get(0) - 0.1).abs() < 1e-15);
        assert!((p.get(1) - 0.9).abs() < 1e-15);

        state.history_sum = vec![0.6, 1.4];
        state.history_len = 2;
        state.p_tilde = vec![0.3, 0.7];
        let p = state.mpp_distribution();
        assert!((p.get(0) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn variance_increment() {
        let mut state = MppState::<f64>::new(2, 1000, 1, 1).unwrap();
        state.d = 100.0;
        let inc = state.mpp_update(&LossVector::new(vec![1.0, -1.0]).unwrap()).unwrap();
        assert!((inc - 1.0).abs() < 1e-15);
        assert!((state.variance() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_and_constant_losses() {
        let mut state = MppState::<f64>::new(3, 1000, 2, 1).unwrap();
        for t in 0..200 {
            let v = if t % 2 == 0 { 0.0 } else { 0.4 };
            state.mpp_update(&LossVector::new(vec![v; 3]).unwrap()).unwrap();
        }
        assert_eq!(state.variance(), 0.0);
        assert_eq!(state.restarts(), 0);
        for &x in state.posterior() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn restart_resets_epoch() {
        let mut state = MppState::<f64>::new(2, 1000, 1, 1).unwrap();
        let loss = LossVector::new(vec![1.0, -1.0]).unwrap();
        state.mpp_update(&loss).unwrap();
        state.mpp_update(&loss).unwrap();
        // V = 1 + something > D = 1 after the second round.
        assert_eq!(state.restarts(), 1);
        assert_eq!(state.threshold(), 2.0);
        assert_eq!(state.epoch_start(), 3);
        assert_eq!(state.round_index(), 3);
        assert_eq!(state.variance(), 0.0);
        assert_eq!(state.mpp_distribution().as_slice(), &[0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn restarts_logarithmic(seed in proptest::collection::vec(-1.0f64..=1.0, 600)) {
            let t = 300;
            let mut state = MppState::<f64>::new(3, t, 3, 2).unwrap();
            for round in 0..t {
                let v = vec![seed[2 * round], seed[2 * round + 1], 0.0];
                state.mpp_update(&LossVector::new(v).unwrap()).unwrap();
                let p = state.mpp_distribution();
                prop_assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(state.variance() <= state.threshold());
            }
            prop_assert!((state.restarts() as f64) <= (4.0 * t as f64).log2() + 2.0);
        }
    }
}
