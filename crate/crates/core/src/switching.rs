//! Fixed-share learners with switching-regret guarantees.
//!
//! Both kinds play `q_t = (1 − γ) q̃_t + γ/K` and then set
//! `q̃_{t+1}(b) ∝ q_t(b) · exp(−η h(b) − κ η² h(b)²)`, with `κ = 1` for the
//! variant and `κ = 0` for classic fixed share. In the reductions each
//! instance learns over two actions `{0, 1}` and its probability of action 1
//! is the confidence `z`.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::types::SimplexWeights;

/// Which exponential update the learner applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixedShareKind {
    /// Second-order update `exp(−η h − η² h²)` applied to the mixed distribution.
    #[default]
    Variant,
    /// Plain `exp(−η h)` update followed by mixing.
    Classic,
}

/// How the mixing rate evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixingSchedule {
    /// `γ = 1/T` for a declared horizon `T`.
    #[default]
    Horizon,
    /// `γ_t = 1/t`; needs no horizon. Not covered by the fixed-horizon guarantee.
    Anytime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedShareState<F> {
    eta: F,
    gamma: F,
    q_tilde: Vec<F>,
    kind: FixedShareKind,
    schedule: MixingSchedule,
    loss_bound: F,
    rounds: usize,
}

impl<F: Scalar> FixedShareState<F> {
    /// Learner over `num_actions` actions with rate `eta`, horizon `horizon` (γ = 1/T)
    /// and losses bounded by `loss_bound` in absolute value.
    ///
    /// Rejects `eta ∉ (0, 1/5]` and `eta · loss_bound > 1/2`.
    pub fn new(
        num_actions: usize,
        eta: F,
        horizon: usize,
        loss_bound: F,
        kind: FixedShareKind,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(invalid("fixed share needs a positive horizon"));
        }
        let mut fs = Self::build(num_actions, eta, loss_bound, kind, MixingSchedule::Horizon)?;
        fs.gamma = F::one() / F::from_usize_lossy(horizon);
        Ok(fs)
    }

    /// Same learner with `γ_t = 1/t`.
    pub fn anytime(num_actions: usize, eta: F, loss_bound: F, kind: FixedShareKind) -> Result<Self> {
        Self::build(num_actions, eta, loss_bound, kind, MixingSchedule::Anytime)
    }

    fn build(
        num_actions: usize,
        eta: F,
        loss_bound: F,
        kind: FixedShareKind,
        schedule: MixingSchedule,
    ) -> Result<Self> {
        if num_actions < 2 {
            return Err(invalid("fixed share needs at least two actions"));
        }
        if !(eta > F::zero() && eta <= F::lit(0.2)) {
            return Err(invalid(format!("learning rate {eta} outside (0, 1/5]")));
        }
        if !(loss_bound > F::zero() && loss_bound.is_finite()) {
            return Err(invalid(format!("loss bound {loss_bound} must be positive")));
        }
        if eta * loss_bound > F::lit(0.5) {
            return Err(invalid(format!(
                "rate {eta} times loss bound {loss_bound} exceeds 1/2"
            )));
        }
        let u = F::one() / F::from_usize_lossy(num_actions);
        Ok(Self {
            eta,
            gamma: F::one(),
            q_tilde: vec![u; num_actions],
            kind,
            schedule,
            loss_bound,
            rounds: 0,
        })
    }

    /// Overrides the mixing rate. `gamma = 0` disables mixing.
    pub fn with_gamma(mut self, gamma: F) -> Result<Self> {
        if !(gamma >= F::zero() && gamma <= F::one()) {
            return Err(invalid(format!("mixing rate {gamma} outside [0, 1]")));
        }
        self.gamma = gamma;
        self.schedule = MixingSchedule::Horizon;
        Ok(self)
    }

    /// Starts from `q_tilde` instead of the uniform distribution.
    pub fn with_state(mut self, q_tilde: SimplexWeights<F>) -> Result<Self> {
        if q_tilde.len() != self.q_tilde.len() {
            return Err(invalid("state has the wrong number of actions"));
        }
        self.q_tilde = q_tilde.into_vec();
        Ok(self)
    }

    pub fn eta(&self) -> F {
        self.eta
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }

    pub fn kind(&self) -> FixedShareKind {
        self.kind
    }

    pub fn loss_bound(&self) -> F {
        self.loss_bound
    }

    pub fn num_actions(&self) -> usize {
        self.q_tilde.len()
    }

    /// The pre-mixing distribution `q̃_t`.
    pub fn posterior(&self) -> &[F] {
        &self.q_tilde
    }

    /// Probability of action `b` under the played distribution.
    #[inline]
    pub fn prob(&self, b: usize) -> F {
        let k = F::from_usize_lossy(self.q_tilde.len());
        (F::one() - self.gamma) * self.q_tilde[b] + self.gamma / k
    }

    /// Confidence `z`: probability of action 1 in the two-action use.
    #[inline]
    pub fn confidence(&self) -> F {
        self.prob(1)
    }

    /// The played distribution `q_t`; every entry is at least `γ/K`.
    pub fn distribution(&self) -> SimplexWeights<F> {
        SimplexWeights::from_raw(self.q_tilde.clone()).mix_uniform(self.gamma)
    }

    /// Records the loss `h` for the current round.
    pub fn update(&mut self, h: &[F]) -> Result<()> {
        let k = self.q_tilde.len();
        if h.len() != k {
            return Err(invalid(format!("loss has {} entries, expected {k}", h.len())));
        }
        let slack = F::lit(1e-12);
        if let Some(b) = h
            .iter()
            .position(|v| !v.is_finite() || v.abs() > self.loss_bound + slack)
        {
            return Err(invalid(format!(
                "loss entry {b} = {} exceeds bound {}",
                h[b], self.loss_bound
            )));
        }
        let eta = self.eta;
        let second_order = match self.kind {
            FixedShareKind::Variant => F::one(),
            FixedShareKind::Classic => F::zero(),
        };
        let exponents: Vec<F> = h
            .iter()
            .map(|&x| -eta * x - second_order * eta * eta * x * x)
            .collect();
        let shift = exponents.iter().copied().fold(F::neg_infinity(), F::max);
        let unnormalized: Vec<F> = (0..k)
            .map(|b| self.prob(b) * (exponents[b] - shift).exp())
            .collect();
        self.q_tilde = SimplexWeights::from_unnormalized(unnormalized)?.into_vec();
        self.rounds += 1;
        if self.schedule == MixingSchedule::Anytime {
            self.gamma = F::one() / F::from_usize_lossy(self.rounds + 1);
        }
        Ok(())
    }
}
