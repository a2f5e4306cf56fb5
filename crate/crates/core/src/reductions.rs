//! Long-term-memory reductions for the expert problem.
//!
//! A master learner `A` over the actions plays `w_t`; for each action a
//! two-action switching learner `A_i` supplies a confidence `z_t(i)`. The
//! learner plays `p_t(i) ∝ z_t(i) w_t(i)`, feeds `c_t(i) = −z_t(i) r_t(i)` to
//! the master (so that `w_t · c_t = 0`) and a biased two-action loss to each
//! `A_i`.
//!
//! [`ReductionOne`] uses one learning rate tuned from `(S, n)`.
//! [`ReductionTwo`] needs no tuning: it copies every action over a geometric
//! grid of `M` rates and marginalises the copies when playing.

use crate::error::{invalid, Error, Result};
use crate::learner::{Feedback, OnlineLearner};
use crate::scalar::Scalar;
use crate::static_learners::{HedgeV1State, HedgeV2State};
use crate::switching::{FixedShareKind, FixedShareState};
use crate::types::{instantaneous_regrets, LossVector, SimplexWeights};

/// Per-action confidences, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceState<F>(Vec<F>);

impl<F: Scalar> ConfidenceState<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if let Some(i) = values
            .iter()
            .position(|z| !(*z >= F::zero() && *z <= F::one()))
        {
            return Err(invalid(format!("confidence {i} = {} outside [0, 1]", values[i])));
        }
        Ok(Self(values))
    }

    pub fn ones(len: usize) -> Self {
        Self(vec![F::one(); len])
    }

    pub fn as_slice(&self) -> &[F] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `p(i) ∝ z(i) w(i)`.
pub fn alg1_distribution<F: Scalar>(
    w: &SimplexWeights<F>,
    z: &ConfidenceState<F>,
) -> Result<SimplexWeights<F>> {
    if w.len() != z.len() {
        return Err(invalid(format!("{} weights but {} confidences", w.len(), z.len())));
    }
    normalize_products(w.as_slice().iter().zip(z.as_slice()).map(|(&a, &b)| a * b).collect())
}

/// `p(i) ∝ Σ_j z(i, j) w(i, j)` for cells laid out row-major as `i * m + j`.
pub fn alg2_distribution<F: Scalar>(
    w: &SimplexWeights<F>,
    z: &ConfidenceState<F>,
    num_rates: usize,
) -> Result<SimplexWeights<F>> {
    if num_rates == 0 || w.len() % num_rates != 0 {
        return Err(invalid(format!("{} cells do not split into {num_rates} rates", w.len())));
    }
    if w.len() != z.len() {
        return Err(invalid(format!("{} weights but {} confidences", w.len(), z.len())));
    }
    let marginal = w
        .as_slice()
        .chunks(num_rates)
        .zip(z.as_slice().chunks(num_rates))
        .map(|(wr, zr)| wr.iter().zip(zr).map(|(&a, &b)| a * b).sum())
        .collect();
    normalize_products(marginal)
}

fn normalize_products<F: Scalar>(products: Vec<F>) -> Result<SimplexWeights<F>> {
    let total: F = products.iter().copied().sum();
    if !(total > F::zero()) {
        return Err(Error::DegenerateState(
            "every confidence-weighted product is zero".into(),
        ));
    }
    Ok(SimplexWeights::from_raw(products.into_iter().map(|x| x / total).collect()))
}

/// `min(1/5, sqrt((S ln T + n ln K) / T))`.
pub fn tuned_rate(num_actions: usize, horizon: usize, switches: usize, distinct: usize) -> f64 {
    let t = horizon as f64;
    let complexity = switches as f64 * t.ln() + distinct as f64 * (num_actions as f64).ln();
    tuned_rate_for_budget(complexity, t)
}

/// `min(1/5, sqrt(complexity / budget))`.
pub fn tuned_rate_for_budget(complexity: f64, budget: f64) -> f64 {
    (complexity / budget).sqrt().min(0.2)
}

/// `M = ⌊log2(√T / 5)⌋ + 1` and `η_j = min(1/5, 2^{j−1} / √T)` for `j = 1..=M`.
pub fn grid_rates<F: Scalar>(horizon: usize) -> Result<(usize, Vec<F>)> {
    if horizon < 26 {
        return Err(invalid(format!("horizon {horizon} too small for the rate grid (need T ≥ 26)")));
    }
    let root = (horizon as f64).sqrt();
    let m = (root / 5.0).log2().floor() as usize + 1;
    let rates = (0..m)
        .map(|j| F::lit((2f64.powi(j as i32) / root).min(0.2)))
        .collect();
    Ok((m, rates))
}

/// Whether the two-action learners see the `5η` bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BiasMode {
    /// Loss `(0, 5η − r)`.
    #[default]
    Biased,
    /// Loss `(0, −r)`: the weaker variant without the bias term.
    Unbiased,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOneConfig<F> {
    pub num_actions: usize,
    pub horizon: usize,
    pub eta: F,
    pub bias: BiasMode,
    pub subroutine: FixedShareKind,
}

impl<F: Scalar> ReductionOneConfig<F> {
    /// Rate tuned for a benchmark with `switches` segments and `distinct` actions.
    pub fn tuned(num_actions: usize, horizon: usize, switches: usize, distinct: usize) -> Result<Self> {
        if switches == 0 || distinct == 0 {
            return Err(invalid("S and n must be at least 1"));
        }
        let eta = tuned_rate(num_actions, horizon, switches, distinct);
        Ok(Self {
            num_actions,
            horizon,
            eta: F::lit(eta),
            bias: BiasMode::Biased,
            subroutine: FixedShareKind::Variant,
        })
    }

    /// Tuning without knowledge of the benchmark: `S = √T`, `n = K`.
    pub fn untuned(num_actions: usize, horizon: usize) -> Result<Self> {
        let s = ((horizon as f64).sqrt().round() as usize).max(1);
        Self::tuned(num_actions, horizon, s, num_actions.max(1))
    }
}

/// Rate used inside a two-action learner whose losses are bounded by `bound`.
fn subroutine_rate<F: Scalar>(eta: F, bound: F) -> F {
    eta.min(F::lit(0.5) / bound)
}

/// What one round of a reduction computed; used to check the invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRound<F> {
    /// Distribution played over the `K` actions.
    pub p: SimplexWeights<F>,
    /// Master distribution (over `K` or `K·M` cells).
    pub w: SimplexWeights<F>,
    /// Confidences, aligned with `w`.
    pub z: Vec<F>,
    /// `r(i) = p·loss − loss(i)` over the `K` actions.
    pub regrets: Vec<F>,
    /// Loss fed to the master, aligned with `w`.
    pub master_loss: Vec<F>,
    /// Loss of action 1 fed to each two-action learner, aligned with `w`.
    pub subroutine_loss: Vec<F>,
}

impl<F: Scalar> ReductionRound<F> {
    /// `w · c`, zero up to rounding.
    pub fn master_identity(&self) -> F {
        self.w.dot(&self.master_loss)
    }
}

/// Confidence-rated reduction with a single tuned rate.
#[derive(Debug, Clone)]
pub struct ReductionOne<F> {
    config: ReductionOneConfig<F>,
    master: HedgeV1State<F>,
    subs: Vec<FixedShareState<F>>,
}

impl<F: Scalar> ReductionOne<F> {
    pub fn new(config: ReductionOneConfig<F>) -> Result<Self> {
        if config.num_actions == 0 {
            return Err(invalid("reduction over zero actions"));
        }
        let master = HedgeV1State::new(config.num_actions, config.eta)?;
        // |5η − r| ≤ 3 with the bias, |r| ≤ 2 without.
        let bound = match config.bias {
            BiasMode::Biased => F::lit(3.0),
            BiasMode::Unbiased => F::lit(2.0),
        };
        let rate = subroutine_rate(config.eta, bound);
        let subs = (0..config.num_actions)
            .map(|_| FixedShareState::new(2, rate, config.horizon, bound, config.subroutine))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config, master, subs })
    }

    pub fn config(&self) -> &ReductionOneConfig<F> {
        &self.config
    }

    pub fn master(&self) -> &HedgeV1State<F> {
        &self.master
    }

    pub fn subroutines(&self) -> &[FixedShareState<F>] {
        &self.subs
    }

    pub fn confidences(&self) -> ConfidenceState<F> {
        ConfidenceState(self.subs.iter().map(FixedShareState::confidence).collect())
    }

    pub fn current_distribution(&self) -> Result<SimplexWeights<F>> {
        alg1_distribution(&self.master.weights()?, &self.confidences())
    }

    /// Plays one round against `loss` and updates every sub-learner.
    pub fn round(&mut self, loss: &LossVector<F>) -> Result<ReductionRound<F>> {
        let k = self.config.num_actions;
        if loss.len() != k {
            return Err(invalid(format!("loss has {} entries, expected {k}", loss.len())));
        }
        let w = self.master.weights()?;
        let z = self.confidences();
        let p = alg1_distribution(&w, &z)?;
        let regrets = instantaneous_regrets(p.as_slice(), loss.as_slice());
        let master_loss: Vec<F> = z
            .as_slice()
            .iter()
            .zip(&regrets)
            .map(|(&zi, &r)| -zi * r)
            .collect();
        self.master.update(&master_loss)?;
        let bias = match self.config.bias {
            BiasMode::Biased => F::lit(5.0) * self.config.eta,
            BiasMode::Unbiased => F::zero(),
        };
        let subroutine_loss: Vec<F> = regrets.iter().map(|&r| bias - r).collect();
        for (sub, &h) in self.subs.iter_mut().zip(&subroutine_loss) {
            sub.update(&[F::zero(), h])?;
        }
        Ok(ReductionRound { p, w, z: z.0, regrets, master_loss, subroutine_loss })
    }
}

impl<F: Scalar> OnlineLearner<F> for ReductionOne<F> {
    fn num_actions(&self) -> usize {
        self.config.num_actions
    }

    fn feedback(&self) -> Feedback {
        Feedback::Full
    }

    fn distribution(&mut self) -> Result<SimplexWeights<F>> {
        self.current_distribution()
    }

    fn update(&mut self, loss: &LossVector<F>, _sampled: usize) -> Result<()> {
        self.round(loss).map(|_| ())
    }
}

/// Rate used inside each two-action learner of [`ReductionTwo`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubroutineRate<F> {
    /// `min(η_j, cap)`.
    Capped(F),
    /// The same rate for every cell.
    Fixed(F),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionTwoConfig<F> {
    pub num_actions: usize,
    pub horizon: usize,
    pub rates: Vec<F>,
    pub subroutine_rate: SubroutineRate<F>,
    pub subroutine: FixedShareKind,
}

impl<F: Scalar> ReductionTwoConfig<F> {
    /// Grid rates for `horizon`; sub-learner rates capped at 1/8.
    pub fn new(num_actions: usize, horizon: usize) -> Result<Self> {
        let (_, rates) = grid_rates(horizon)?;
        Ok(Self {
            num_actions,
            horizon,
            rates,
            subroutine_rate: SubroutineRate::Capped(F::lit(0.125)),
            subroutine: FixedShareKind::Variant,
        })
    }

    pub fn num_rates(&self) -> usize {
        self.rates.len()
    }
}

/// Parameter-free reduction over a grid of learning rates.
#[derive(Debug, Clone)]
pub struct ReductionTwo<F> {
    config: ReductionTwoConfig<F>,
    master: HedgeV2State<F>,
    subs: Vec<FixedShareState<F>>,
}

impl<F: Scalar> ReductionTwo<F> {
    /// Two-action losses `(0, 5η_j|r| − r)` lie in `[−2, 4]`.
    pub const SUBROUTINE_LOSS_BOUND: f64 = 4.0;
    /// `|w·c − c(i, j)| = |c(i, j)| ≤ 2` because `w·c = 0`.
    pub const MASTER_REGRET_BOUND: f64 = 2.0;

    pub fn new(config: ReductionTwoConfig<F>) -> Result<Self> {
        let k = config.num_actions;
        let m = config.rates.len();
        if k == 0 || m == 0 {
            return Err(invalid("reduction needs at least one action and one rate"));
        }
        if config.rates.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("rate grid must be non-decreasing"));
        }
        let cell_rates: Vec<F> = (0..k).flat_map(|_| config.rates.iter().copied()).collect();
        let master = HedgeV2State::new(cell_rates.clone(), F::lit(Self::MASTER_REGRET_BOUND))?;
        let bound = F::lit(Self::SUBROUTINE_LOSS_BOUND);
        let subs = cell_rates
            .iter()
            .map(|&eta| {
                let rate = match config.subroutine_rate {
                    SubroutineRate::Capped(cap) => eta.min(cap),
                    SubroutineRate::Fixed(r) => r,
                };
                FixedShareState::new(2, rate, config.horizon, bound, config.subroutine)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config, master, subs })
    }

    pub fn config(&self) -> &ReductionTwoConfig<F> {
        &self.config
    }

    pub fn master(&self) -> &HedgeV2State<F> {
        &self.master
    }

    pub fn confidences(&self) -> ConfidenceState<F> {
        ConfidenceState(self.subs.iter().map(FixedShareState::confidence).collect())
    }

    pub fn current_distribution(&self) -> Result<SimplexWeights<F>> {
        alg2_distribution(&self.master.weights()?, &self.confidences(), self.config.num_rates())
    }

    pub fn round(&mut self, loss: &LossVector<F>) -> Result<ReductionRound<F>> {
        let k = self.config.num_actions;
        let m = self.config.num_rates();
        if loss.len() != k {
            return Err(invalid(format!("loss has {} entries, expected {k}", loss.len())));
        }
        let w = self.master.weights()?;
        let z = self.confidences();
        let p = alg2_distribution(&w, &z, m)?;
        let regrets = instantaneous_regrets(p.as_slice(), loss.as_slice());
        let master_loss: Vec<F> = z
            .as_slice()
            .iter()
            .enumerate()
            .map(|(cell, &zc)| -zc * regrets[cell / m])
            .collect();
        self.master.update(&master_loss, &w)?;
        let five = F::lit(5.0);
        let subroutine_loss: Vec<F> = (0..k * m)
            .map(|cell| {
                let r = regrets[cell / m];
                five * self.config.rates[cell % m] * r.abs() - r
            })
            .collect();
        for (sub, &h) in self.subs.iter_mut().zip(&subroutine_loss) {
            sub.update(&[F::zero(), h])?;
        }
        Ok(ReductionRound { p, w, z: z.0, regrets, master_loss, subroutine_loss })
    }
}

impl<F: Scalar> OnlineLearner<F> for ReductionTwo<F> {
    fn num_actions(&self) -> usize {
        self.config.num_actions
    }

    fn feedback(&self) -> Feedback {
        Feedback::Full
    }

    fn distribution(&mut self) -> Result<SimplexWeights<F>> {
        self.current_distribution()
    }

    fn update(&mut self, loss: &LossVector<F>, _sampled: usize) -> Result<()> {
        self.round(loss).map(|_| ())
    }
}
