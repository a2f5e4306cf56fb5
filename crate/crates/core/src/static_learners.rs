//! Exponential-weights learners with second-order corrections, used as the
//! master algorithm of the reductions.
//!
//! [`HedgeV1State`] keeps a single learning rate and plays
//! `w(i) ∝ exp(-Σ (η c(i) + η² c(i)²))`. [`HedgeV2State`] gives every action
//! its own rate and plays `w(i) ∝ η_i exp(Σ (η_i r(i) − η_i² r(i)²))` where
//! `r(i) = w·c − c(i)`.
//!
//! Both analyses rely on `exp(x − x²) ≤ 1 + x` for `x ≥ −1/2`, so the
//! constructors refuse rates for which a loss (or regret) of the declared
//! magnitude could push `x` below `−1/2`.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::types::SimplexWeights;

/// Largest admissible learning rate for either variant.
pub const MAX_RATE: f64 = 0.2;

/// Loss magnitude both variants accept per coordinate.
pub const LOSS_BOUND: f64 = 2.0;

fn check_rate<F: Scalar>(eta: F) -> Result<()> {
    if !(eta > F::zero() && eta <= F::lit(MAX_RATE)) {
        return Err(invalid(format!("learning rate {eta} outside (0, 1/5]")));
    }
    Ok(())
}

fn check_losses<F: Scalar>(c: &[F], k: usize) -> Result<()> {
    if c.len() != k {
        return Err(invalid(format!("loss has {} entries, expected {k}", c.len())));
    }
    let bound = F::lit(LOSS_BOUND);
    if let Some(i) = c.iter().position(|v| !v.is_finite() || v.abs() > bound) {
        return Err(invalid(format!("loss entry {i} = {} outside [-2, 2]", c[i])));
    }
    Ok(())
}

/// Hedge with the `η c + η² c²` accumulator and a single learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeV1State<F> {
    eta: F,
    cum: Vec<F>,
}

impl<F: Scalar> HedgeV1State<F> {
    pub fn new(num_actions: usize, eta: F) -> Result<Self> {
        if num_actions == 0 {
            return Err(invalid("hedge over zero actions"));
        }
        check_rate(eta)?;
        Ok(Self { eta, cum: vec![F::zero(); num_actions] })
    }

    pub fn eta(&self) -> F {
        self.eta
    }

    pub fn num_actions(&self) -> usize {
        self.cum.len()
    }

    /// `Σ_{τ<t} (η c_τ(i) + η² c_τ(i)²)` per action.
    pub fn accumulator(&self) -> &[F] {
        &self.cum
    }

    pub fn weights(&self) -> Result<SimplexWeights<F>> {
        let scores: Vec<F> = self.cum.iter().map(|&c| -c).collect();
        SimplexWeights::softmax(&scores)
    }

    /// Records loss `c ∈ [-2, 2]^K`.
    pub fn update(&mut self, c: &[F]) -> Result<()> {
        check_losses(c, self.cum.len())?;
        let eta = self.eta;
        for (acc, &ci) in self.cum.iter_mut().zip(c) {
            *acc = *acc + eta * ci + eta * eta * ci * ci;
        }
        Ok(())
    }
}

/// Hedge with one learning rate per action and prior weight proportional to the rate.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeV2State<F> {
    etas: Vec<F>,
    cum: Vec<F>,
    regret_bound: F,
}

impl<F: Scalar> HedgeV2State<F> {
    /// Regret magnitude assumed by [`HedgeV2State::new_standalone`]:
    /// `|w·c − c(i)| ≤ 4` for any `c ∈ [-2, 2]^K`.
    pub const STANDALONE_REGRET_BOUND: f64 = 4.0;

    /// `regret_bound` caps `|w·c − c(i)|` for every update this learner will see.
    /// Rejects any rate with `η_i · regret_bound > 1/2`.
    pub fn new(etas: Vec<F>, regret_bound: F) -> Result<Self> {
        if etas.is_empty() {
            return Err(invalid("hedge over zero actions"));
        }
        for &eta in &etas {
            check_rate(eta)?;
        }
        if !(regret_bound > F::zero() && regret_bound <= F::lit(Self::STANDALONE_REGRET_BOUND)) {
            return Err(invalid(format!("regret bound {regret_bound} outside (0, 4]")));
        }
        let max_eta = etas.iter().copied().fold(F::zero(), F::max);
        if max_eta * regret_bound > F::lit(0.5) {
            return Err(invalid(format!(
                "rate {max_eta} times regret bound {regret_bound} exceeds 1/2"
            )));
        }
        let k = etas.len();
        Ok(Self { etas, cum: vec![F::zero(); k], regret_bound })
    }

    /// For arbitrary losses in `[-2, 2]^K`; accepts rates up to 1/8.
    pub fn new_standalone(etas: Vec<F>) -> Result<Self> {
        Self::new(etas, F::lit(Self::STANDALONE_REGRET_BOUND))
    }

    pub fn etas(&self) -> &[F] {
        &self.etas
    }

    pub fn num_actions(&self) -> usize {
        self.cum.len()
    }

    /// `Σ_{τ<t} (η_i r_τ(i) − η_i² r_τ(i)²)` per action.
    pub fn accumulator(&self) -> &[F] {
        &self.cum
    }

    pub fn regret_bound(&self) -> F {
        self.regret_bound
    }

    pub fn weights(&self) -> Result<SimplexWeights<F>> {
        let scores: Vec<F> = self
            .cum
            .iter()
            .zip(&self.etas)
            .map(|(&c, &eta)| c + eta.ln())
            .collect();
        SimplexWeights::softmax(&scores)
    }

    /// Records loss `c` given the distribution `w` played this round.
    pub fn update(&mut self, c: &[F], w: &SimplexWeights<F>) -> Result<()> {
        check_losses(c, self.cum.len())?;
        if w.len() != c.len() {
            return Err(invalid("weights and loss differ in length"));
        }
        let avg = w.dot(c);
        let slack = F::lit(1e-9);
        if let Some(i) = c
            .iter()
            .position(|&ci| (avg - ci).abs() > self.regret_bound + slack)
        {
            return Err(invalid(format!(
                "regret {} for action {i} exceeds declared bound {}",
                avg - c[i],
                self.regret_bound
            )));
        }
        for ((acc, &ci), &eta) in self.cum.iter_mut().zip(c).zip(&self.etas) {
            let r = avg - ci;
            *acc = *acc + eta * r - eta * eta * r * r;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn v1_uniform_at_start() {
        let h = HedgeV1State::<f64>::new(4, 0.1).unwrap();
        for &x in h.weights().unwrap().as_slice() {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn v1_single_update() {
        let mut h = HedgeV1State::<f64>::new(2, 0.1).unwrap();
        h.update(&[1.0, -1.0]).unwrap();
        // cum = (0.11, -0.09): w(2)/w(1) = e^{0.2}.
        let expected_first = 1.0 / (1.0 + 0.2f64.exp());
        let w = h.weights().unwrap();
        assert!((w.get(0) - expected_first).abs() < 1e-12);
        assert!((w.get(0) - 0.4502).abs() < 5e-5);
        assert!((w.get(1) - 0.5498).abs() < 5e-5);
        assert!((h.accumulator()[0] - 0.11).abs() < 1e-15);
        assert!((h.accumulator()[1] + 0.09).abs() < 1e-15);
    }

    #[test]
    fn v1_zero_loss_is_noop_and_bounds_checked() {
        let mut h = HedgeV1State::<f64>::new(3, 0.2).unwrap();
        h.update(&[0.0; 3]).unwrap();
        assert!(h.accumulator().iter().all(|&c| c == 0.0));
        assert!(h.update(&[2.5, 0.0, 0.0]).is_err());
        assert!(h.update(&[0.0, 0.0]).is_err());
        assert!(HedgeV1State::<f64>::new(3, 0.21).is_err());
        assert!(HedgeV1State::<f64>::new(3, 0.0).is_err());
    }

    #[test]
    fn v2_rate_proportional_prior() {
        let h = HedgeV2State::<f64>::new_standalone(vec![0.1, 0.05]).unwrap();
        let w = h.weights().unwrap();
        assert!((w.get(0) - 2.0 / 3.0).abs() < 1e-12);
        let h = HedgeV2State::<f64>::new_standalone(vec![0.05, 0.05, 0.1]).unwrap();
        let w = h.weights().unwrap();
        for (got, want) in w.as_slice().iter().zip([0.25, 0.25, 0.5]) {
            assert!((got - want).abs() < 1e-12);
        }
        let h = HedgeV2State::<f64>::new(vec![0.1, 0.2], 2.0).unwrap();
        let w = h.weights().unwrap();
        assert!((w.get(0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn v2_update_formula() {
        let mut h = HedgeV2State::<f64>::new_standalone(vec![0.1, 0.1]).unwrap();
        let w = SimplexWeights::new(vec![0.5, 0.5]).unwrap();
        h.update(&[1.0, -1.0], &w).unwrap();
        assert!((h.accumulator()[0] + 0.11).abs() < 1e-15);
        assert!((h.accumulator()[1] - 0.09).abs() < 1e-15);

        let mut h = HedgeV2State::<f64>::new_standalone(vec![0.1, 0.1]).unwrap();
        h.update(&[0.7, 0.7], &w).unwrap();
        assert!(h.accumulator().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn v2_guards() {
        assert!(HedgeV2State::<f64>::new_standalone(vec![0.2]).is_err());
        assert!(HedgeV2State::<f64>::new_standalone(vec![0.125]).is_ok());
        assert!(HedgeV2State::<f64>::new(vec![0.2], 2.0).is_ok());
        assert!(HedgeV2State::<f64>::new(vec![0.2], 3.0).is_err());
        let mut h = HedgeV2State::<f64>::new(vec![0.2, 0.2], 2.0).unwrap();
        let w = SimplexWeights::new(vec![0.5, 0.5]).unwrap();
        // regrets ±2 are allowed, ±3 are not.
        h.update(&[2.0, -2.0], &w).unwrap();
        let w = SimplexWeights::new(vec![0.75, 0.25]).unwrap();
        assert!(h.update(&[2.0, -2.0], &w).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let mut h = HedgeV1State::<f32>::new(2, 0.1).unwrap();
        h.update(&[1.0, -1.0]).unwrap();
        assert!((h.weights().unwrap().get(0) - 0.4502).abs() < 1e-4);
    }

    fn loss_seq(k: usize, t: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(-2.0f64..=2.0, k), t)
    }

    proptest! {
        #[test]
        fn v1_static_regret_bound(eta in 0.01f64..=0.2, seq in loss_seq(4, 150)) {
            let mut h = HedgeV1State::new(4, eta).unwrap();
            let mut regret = [0.0f64; 4];
            let mut sq = [0.0f64; 4];
            for c in &seq {
                let w = h.weights().unwrap();
                let avg = w.dot(c);
                for i in 0..4 {
                    regret[i] += avg - c[i];
                    sq[i] += c[i] * c[i];
                }
                h.update(c).unwrap();
                prop_assert!(h.weights().unwrap().as_slice().iter().all(|&x| x > 0.0));
            }
            for i in 0..4 {
                prop_assert!(regret[i] <= (4f64).ln() / eta + eta * sq[i] + 1e-9);
            }
        }
    }
}
