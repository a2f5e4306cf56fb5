//! Sparse multi-armed bandit with long-term memory.
//!
//! The master weights `w_t` come from follow-the-regularized-leader with the
//! hybrid regularizer `ψ(w) = (1/η) Σ w ln w + γ Σ ln(1/w)`. Each action keeps a
//! confidence `z_t(i) ∈ [δ, 1]` updated by one-sided log-barrier mirror descent,
//! which has a closed form. The learner samples from
//! `p̃ = (1 − η) p + η/K` with `p ∝ z w`.

use log::info;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::learner::{sample_index, Feedback, OnlineLearner};
use crate::reductions::{alg1_distribution, ConfidenceState};
use crate::scalar::Scalar;
use crate::types::{LossVector, SimplexWeights};

/// Largest learning rate the algorithm accepts.
pub const MAX_BANDIT_RATE: f64 = 1.0 / 500.0;

/// Iteration cap shared by the outer and inner FTRL solvers.
pub const FTRL_MAX_ITERATIONS: usize = 100;

/// Unclamped rate `max(S^{1/3} ρ^{−2/3} (nT)^{−1/3}, sqrt(ln K / (Tρ)))`.
pub fn theoretical_rate(num_actions: usize, horizon: usize, switches: usize, distinct: usize, rho: usize) -> f64 {
    let (k, t, s, n, rho) = (
        num_actions as f64,
        horizon as f64,
        switches as f64,
        distinct as f64,
        rho as f64,
    );
    let tracking = s.cbrt() * rho.powf(-2.0 / 3.0) * (n * t).powf(-1.0 / 3.0);
    let static_term = (k.ln() / (t * rho)).sqrt();
    tracking.max(static_term)
}

/// Unclamped `sqrt(S / (T η n))`.
pub fn theoretical_delta(horizon: usize, switches: usize, distinct: usize, eta: f64) -> f64 {
    (switches as f64 / (horizon as f64 * eta * distinct as f64)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditConfig<F> {
    pub num_actions: usize,
    pub horizon: usize,
    /// Sparsity every loss vector must respect, if known.
    pub rho: Option<usize>,
    pub eta: F,
    pub delta: F,
    pub gamma: F,
}

impl<F: Scalar> BanditConfig<F> {
    /// Tuning for a benchmark with `switches` segments over `distinct` actions,
    /// with `η` capped at 1/500 and `δ` at 1.
    pub fn tuned(
        num_actions: usize,
        horizon: usize,
        switches: usize,
        distinct: usize,
        rho: usize,
    ) -> Result<Self> {
        if num_actions < 2 {
            return Err(invalid("bandit needs at least two actions"));
        }
        if horizon == 0 || switches == 0 || distinct == 0 {
            return Err(invalid("T, S and n must be at least 1"));
        }
        if rho == 0 || rho > num_actions {
            return Err(invalid(format!("sparsity {rho} outside [1, {num_actions}]")));
        }
        let raw_eta = theoretical_rate(num_actions, horizon, switches, distinct, rho);
        let eta = raw_eta.min(MAX_BANDIT_RATE);
        if eta < raw_eta {
            info!("bandit rate {raw_eta:.6} clamped to {eta}");
        }
        let raw_delta = theoretical_delta(horizon, switches, distinct, eta);
        let delta = raw_delta.min(1.0);
        if delta < raw_delta {
            info!("bandit confidence floor {raw_delta:.6} clamped to 1");
        }
        let k = num_actions as f64;
        Self::with_params(num_actions, horizon, F::lit(eta), F::lit(delta), F::lit(200.0 * k * k))
            .map(|c| Self { rho: Some(rho), ..c })
    }

    pub fn with_params(num_actions: usize, horizon: usize, eta: F, delta: F, gamma: F) -> Result<Self> {
        if num_actions < 2 {
            return Err(invalid("bandit needs at least two actions"));
        }
        if !(eta > F::zero() && eta <= F::lit(MAX_BANDIT_RATE)) {
            return Err(invalid(format!("bandit rate {eta} outside (0, 1/500]")));
        }
        if !(delta > F::zero() && delta <= F::one()) {
            return Err(invalid(format!("confidence floor {delta} outside (0, 1]")));
        }
        if !(gamma > F::zero() && gamma.is_finite()) {
            return Err(invalid(format!("barrier weight {gamma} must be positive")));
        }
        Ok(Self { num_actions, horizon, rho: None, eta, delta, gamma })
    }
}

/// `p̃ = (1 − η) p + η/K`.
pub fn exploration_mix<F: Scalar>(p: &SimplexWeights<F>, eta: F) -> SimplexWeights<F> {
    p.mix_uniform(eta)
}

/// Importance-weighted estimate: `ℓ(I)/p̃(I)` at `I = sampled`, zero elsewhere.
pub fn estimate_loss<F: Scalar>(loss: &LossVector<F>, sampled: usize, p_tilde: &SimplexWeights<F>) -> Result<Vec<F>> {
    if sampled >= loss.len() || loss.len() != p_tilde.len() {
        return Err(invalid("sampled action or distribution does not match the loss"));
    }
    estimate_from_observation(loss.get(sampled), sampled, p_tilde)
}

fn estimate_from_observation<F: Scalar>(observed: F, sampled: usize, p_tilde: &SimplexWeights<F>) -> Result<Vec<F>> {
    let prob = p_tilde.get(sampled);
    if !(prob > F::zero()) {
        return Err(Error::DegenerateState(format!(
            "sampled action {sampled} has zero probability"
        )));
    }
    let mut est = vec![F::zero(); p_tilde.len()];
    est[sampled] = observed / prob;
    Ok(est)
}

/// `c(i) = −z(i) r(i) − η z(i) ℓ̂(i)²`.
pub fn master_loss<F: Scalar>(z: &[F], r_hat: &[F], ell_hat: &[F], eta: F) -> Vec<F> {
    z.iter()
        .zip(r_hat)
        .zip(ell_hat)
        .map(|((&zi, &ri), &li)| -zi * ri - eta * zi * li * li)
        .collect()
}

/// One-sided log-barrier mirror-descent step on `[δ, 1]`.
///
/// Minimises `−r z + D_φ(z, z_old)` with `φ(z) = (1/η) ln(1/z)`.
pub fn z_update<F: Scalar>(z_old: F, r: F, eta: F, delta: F) -> F {
    let denom = F::one() - eta * r * z_old;
    if denom > F::zero() {
        (z_old / denom).max(delta).min(F::one())
    } else {
        F::one()
    }
}

/// Result of [`ftrl_solve`] with convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FtrlSolution<F> {
    pub w: SimplexWeights<F>,
    /// Shared multiplier of the simplex constraint.
    pub lambda: F,
    pub iterations: usize,
    /// Largest scaled stationarity violation.
    pub residual: F,
}

/// `g_i(w) = C_i + (ln w + 1)/η − γ/w`, increasing in `w`.
fn stationarity<F: Scalar>(c: F, w: F, inv_eta: F, gamma: F) -> F {
    c + (w.ln() + F::one()) * inv_eta - gamma / w
}

/// Solves `g_i(e^u) = λ` for `u`, starting at `u0`.
///
/// `h(u) = g_i(e^u) − λ` is increasing and concave, so Newton from the left of
/// the root never overshoots; the bracket guards steps taken from the right.
fn solve_coordinate<F: Scalar>(c: F, lambda: F, inv_eta: F, gamma: F, u0: F) -> Result<F> {
    let h = |u: F| c + (u + F::one()) * inv_eta - gamma * (-u).exp() - lambda;
    let dh = |u: F| inv_eta + gamma * (-u).exp();
    let two = F::lit(2.0);
    let (mut lo, mut hi) = (u0, u0);
    let h0 = h(u0);
    if h0 == F::zero() {
        return Ok(u0);
    }
    let mut step = F::one();
    if h0 < F::zero() {
        loop {
            hi = hi + step;
            if h(hi) >= F::zero() {
                break;
            }
            lo = hi;
            step = step * two;
            if !hi.is_finite() {
                return Err(Error::Numerical("coordinate bracket diverged upwards".into()));
            }
        }
    } else {
        loop {
            lo = lo - step;
            if h(lo) <= F::zero() {
                break;
            }
            hi = lo;
            step = step * two;
            if !lo.is_finite() {
                return Err(Error::Numerical("coordinate bracket diverged downwards".into()));
            }
        }
    }
    let mut u = if h0 < F::zero() { lo } else { u0.min(hi) };
    let eps = F::epsilon() * F::lit(4.0);
    for _ in 0..FTRL_MAX_ITERATIONS * 2 {
        let value = h(u);
        if value == F::zero() {
            return Ok(u);
        }
        if value < F::zero() {
            lo = u;
        } else {
            hi = u;
        }
        let newton = u - value / dh(u);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
        if (next - u).abs() <= eps * (F::one() + u.abs()) || hi - lo <= eps * (F::one() + u.abs()) {
            return Ok(next);
        }
        u = next;
    }
    Err(Error::Numerical(format!(
        "coordinate solve did not converge (C = {c}, λ = {lambda}, bracket [{lo}, {hi}])"
    )))
}

/// Minimises `Σ w·C + ψ(w)` over the simplex, warm-started at `warm` when given.
///
/// Bisection-safeguarded Newton on the multiplier `λ`: every coordinate solves
/// `g_i(w_i) = λ` exactly and `Σ_i w_i(λ)` is increasing, so
/// `[min_i g_i(1/K), max_i g_i(1/K)]` brackets the root.
pub fn ftrl_solve<F: Scalar>(
    cum_c: &[F],
    eta: F,
    gamma: F,
    warm: Option<(&SimplexWeights<F>, F)>,
) -> Result<FtrlSolution<F>> {
    let k = cum_c.len();
    if k == 0 {
        return Err(invalid("FTRL over zero actions"));
    }
    if cum_c.iter().any(|c| !c.is_finite()) {
        return Err(invalid("cumulative loss is not finite"));
    }
    if !(eta > F::zero() && gamma >= F::zero()) {
        return Err(invalid("FTRL needs η > 0 and γ ≥ 0"));
    }
    let inv_eta = F::one() / eta;
    let uniform = F::one() / F::from_usize_lossy(k);
    let mut lo = F::infinity();
    let mut hi = F::neg_infinity();
    for &c in cum_c {
        let g = stationarity(c, uniform, inv_eta, gamma);
        lo = lo.min(g);
        hi = hi.max(g);
    }
    let mut lambda = match warm {
        Some((_, l)) if l >= lo && l <= hi => l,
        _ => (lo + hi) / F::lit(2.0),
    };
    let mut u: Vec<F> = match warm {
        Some((w, _)) if w.len() == k => w.as_slice().iter().map(|x| x.ln()).collect(),
        _ => vec![uniform.ln(); k],
    };
    let sum_tol = F::epsilon() * F::from_usize_lossy(k) * F::lit(8.0);
    let two = F::lit(2.0);
    let mut iterations = 0;
    let mut converged = hi - lo <= F::zero();
    if converged {
        u = vec![uniform.ln(); k];
    }
    while !converged {
        iterations += 1;
        if iterations > FTRL_MAX_ITERATIONS {
            return Err(Error::Numerical(format!(
                "FTRL did not converge in {FTRL_MAX_ITERATIONS} iterations (λ = {lambda}, bracket [{lo}, {hi}])"
            )));
        }
        let mut total = F::zero();
        let mut slope = F::zero();
        for i in 0..k {
            u[i] = solve_coordinate(cum_c[i], lambda, inv_eta, gamma, u[i])?;
            let w = u[i].exp();
            total = total + w;
            slope = slope + w * w / (w * inv_eta + gamma);
        }
        let excess = total - F::one();
        if excess.abs() <= sum_tol {
            break;
        }
        if excess < F::zero() {
            lo = lambda;
        } else {
            hi = lambda;
        }
        // Newton on `ln Σ w(λ)`, which stays close to linear where the entropy
        // term makes `Σ w` grow exponentially.
        let newton = lambda - total.ln() * total / slope;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / two
        };
        if hi - lo <= F::epsilon() * (F::one() + lambda.abs()) {
            converged = true;
        }
        lambda = next;
    }
    let raw: Vec<F> = u.iter().map(|x| x.exp()).collect();
    let total: F = raw.iter().copied().sum();
    let w: Vec<F> = raw.into_iter().map(|x| x / total).collect();
    let residual = kkt_residual(cum_c, &w, eta, gamma, lambda);
    if !(residual <= F::kkt_tolerance()) {
        return Err(Error::Numerical(format!(
            "FTRL residual {residual} above tolerance after {iterations} iterations"
        )));
    }
    Ok(FtrlSolution { w: SimplexWeights::from_raw(w), lambda, iterations, residual })
}

/// Largest scaled violation of `g_i(w_i) = λ`, together with `|Σ w − 1|`.
///
/// Each coordinate is divided by `max(1, |C_i| + |(ln w_i + 1)/η| + γ/w_i)`.
pub fn kkt_residual<F: Scalar>(cum_c: &[F], w: &[F], eta: F, gamma: F, lambda: F) -> F {
    let inv_eta = F::one() / eta;
    let total: F = w.iter().copied().sum();
    let mut worst = (total - F::one()).abs();
    for (&c, &wi) in cum_c.iter().zip(w) {
        if !(wi > F::zero()) {
            return F::infinity();
        }
        let entropy = (wi.ln() + F::one()) * inv_eta;
        let barrier = gamma / wi;
        let scale = F::one().max(c.abs() + entropy.abs() + barrier);
        let violation = (c + entropy - barrier - lambda).abs() / scale;
        worst = worst.max(violation);
    }
    worst
}

/// Quantities computed in one bandit round, for checking invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditRound<F> {
    pub sampled: usize,
    pub p: SimplexWeights<F>,
    pub p_tilde: SimplexWeights<F>,
    /// Master weights used this round.
    pub w: SimplexWeights<F>,
    /// Confidences used this round.
    pub z: Vec<F>,
    pub ell_hat: Vec<F>,
    pub regrets: Vec<F>,
    pub master_loss: Vec<F>,
    pub ftrl_iterations: usize,
}

impl<F: Scalar> BanditRound<F> {
    /// `w·c` and `−η Σ w z ℓ̂²`, equal up to rounding.
    pub fn identity_sides(&self, eta: F) -> (F, F) {
        let lhs = self.w.dot(&self.master_loss);
        let rhs = -eta
            * self
                .w
                .as_slice()
                .iter()
                .zip(&self.z)
                .zip(&self.ell_hat)
                .map(|((&w, &z), &l)| w * z * l * l)
                .sum::<F>();
        (lhs, rhs)
    }
}

#[derive(Debug, Clone)]
pub struct BanditState<F> {
    config: BanditConfig<F>,
    cum_c: Vec<F>,
    w: SimplexWeights<F>,
    lambda: F,
    z: Vec<F>,
    min_ratio: f64,
    max_ratio: f64,
}

impl<F: Scalar> BanditState<F> {
    pub fn new(config: BanditConfig<F>) -> Result<Self> {
        let k = config.num_actions;
        let cum_c = vec![F::zero(); k];
        let solution = ftrl_solve(&cum_c, config.eta, config.gamma, None)?;
        Ok(Self {
            cum_c,
            w: solution.w,
            lambda: solution.lambda,
            z: vec![F::one(); k],
            min_ratio: 1.0,
            max_ratio: 1.0,
            config,
        })
    }

    pub fn config(&self) -> &BanditConfig<F> {
        &self.config
    }

    pub fn cumulative_master_loss(&self) -> &[F] {
        &self.cum_c
    }

    pub fn weights(&self) -> &SimplexWeights<F> {
        &self.w
    }

    pub fn confidences(&self) -> &[F] {
        &self.z
    }

    /// Extremes of `w_{t+1}(i) / w_t(i)` over every round so far.
    pub fn stability_range(&self) -> (f64, f64) {
        (self.min_ratio, self.max_ratio)
    }

    /// `(p, p̃)` for the current round.
    pub fn distributions(&self) -> Result<(SimplexWeights<F>, SimplexWeights<F>)> {
        let p = alg1_distribution(&self.w, &ConfidenceState::new(self.z.clone())?)?;
        let p_tilde = exploration_mix(&p, self.config.eta);
        Ok((p, p_tilde))
    }

    /// Full round: sample from `p̃`, observe `loss[I]` and update.
    pub fn round<R: Rng + ?Sized>(&mut self, loss: &LossVector<F>, rng: &mut R) -> Result<BanditRound<F>> {
        self.check_loss(loss)?;
        let (p, p_tilde) = self.distributions()?;
        let sampled = sample_index(&p_tilde, rng);
        self.observe(sampled, loss.get(sampled), p, p_tilde)
    }

    /// Update after `sampled` was played and `observed` revealed.
    pub fn observe_loss(&mut self, sampled: usize, observed: F) -> Result<BanditRound<F>> {
        if sampled >= self.config.num_actions {
            return Err(invalid(format!("action {sampled} out of range")));
        }
        if !(observed.abs() <= F::one()) {
            return Err(invalid(format!("observed loss {observed} outside [-1, 1]")));
        }
        let (p, p_tilde) = self.distributions()?;
        self.observe(sampled, observed, p, p_tilde)
    }

    fn check_loss(&self, loss: &LossVector<F>) -> Result<()> {
        if loss.len() != self.config.num_actions {
            return Err(invalid(format!(
                "loss has {} entries, expected {}",
                loss.len(),
                self.config.num_actions
            )));
        }
        if let Some(rho) = self.config.rho {
            if loss.nonzeros() > rho {
                return Err(invalid(format!(
                    "loss has {} nonzeros, sparsity is {rho}",
                    loss.nonzeros()
                )));
            }
        }
        Ok(())
    }

    fn observe(
        &mut self,
        sampled: usize,
        observed: F,
        p: SimplexWeights<F>,
        p_tilde: SimplexWeights<F>,
    ) -> Result<BanditRound<F>> {
        let eta = self.config.eta;
        let ell_hat = estimate_from_observation(observed, sampled, &p_tilde)?;
        let avg = p.dot(&ell_hat);
        let regrets: Vec<F> = ell_hat.iter().map(|&l| avg - l).collect();
        let c = master_loss(&self.z, &regrets, &ell_hat, eta);
        for (acc, &ci) in self.cum_c.iter_mut().zip(&c) {
            *acc = *acc + ci;
        }
        let solution = ftrl_solve(
            &self.cum_c,
            eta,
            self.config.gamma,
            Some((&self.w, self.lambda)),
        )?;
        for (new, old) in solution.w.as_slice().iter().zip(self.w.as_slice()) {
            let ratio = (*new / *old).as_f64();
            self.min_ratio = self.min_ratio.min(ratio);
            self.max_ratio = self.max_ratio.max(ratio);
        }
        let w_played = std::mem::replace(&mut self.w, solution.w);
        self.lambda = solution.lambda;
        let z_played = self.z.clone();
        for (zi, &ri) in self.z.iter_mut().zip(&regrets) {
            *zi = z_update(*zi, ri, eta, self.config.delta);
        }
        Ok(BanditRound {
            sampled,
            p,
            p_tilde,
            w: w_played,
            z: z_played,
            ell_hat,
            regrets,
            master_loss: c,
            ftrl_iterations: solution.iterations,
        })
    }
}

/// One round of the bandit algorithm against `loss`.
pub fn bandit_round<F: Scalar, R: Rng + ?Sized>(
    state: &mut BanditState<F>,
    loss: &LossVector<F>,
    rng: &mut R,
) -> Result<BanditRound<F>> {
    state.round(loss, rng)
}

impl<F: Scalar> OnlineLearner<F> for BanditState<F> {
    fn num_actions(&self) -> usize {
        self.config.num_actions
    }

    fn feedback(&self) -> Feedback {
        Feedback::Bandit
    }

    fn distribution(&mut self) -> Result<SimplexWeights<F>> {
        self.distributions().map(|(_, p_tilde)| p_tilde)
    }

    fn update(&mut self, loss: &LossVector<F>, sampled: usize) -> Result<()> {
        self.check_loss(loss)?;
        self.observe_loss(sampled, loss.get(sampled)).map(|_| ())
    }
}
