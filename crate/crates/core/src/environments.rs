//! Loss-sequence generators.
//!
//! Every environment is reproducible from its parameters and a seed, emits
//! losses in `[−1, 1]` one round at a time and reports the comparator action
//! of the benchmark sequence for that round. Rounds are numbered from 1.

use std::collections::VecDeque;
use std::io::{self, Write};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::types::{BenchmarkSequence, GapProfile, LossVector};

/// Header of the audit dump written by [`write_stream_csv`].
pub const STREAM_CSV_HEADER: &str = "t,i,loss";

/// The loss of one round and the benchmark action it is measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvRound<F> {
    pub loss: LossVector<F>,
    pub comparator: usize,
    /// Mean of `loss` given the past, for randomised streams.
    pub means: Option<Vec<F>>,
}

pub trait Environment<F: Scalar> {
    fn num_actions(&self) -> usize;

    fn horizon(&self) -> usize;

    /// Emits the next round; errors once the horizon is exhausted.
    fn next_round(&mut self) -> Result<EnvRound<F>>;

    /// Reveals the action the learner played in the round just emitted.
    fn observe(&mut self, _action: usize) {}
}

/// Segments covering `1..=T`, each with its comparator action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseSchedule {
    horizon: usize,
    num_actions: usize,
    starts: Vec<usize>,
    comparators: Vec<usize>,
}

impl PiecewiseSchedule {
    /// `starts[0]` must be 1 and starts strictly increasing within `1..=T`.
    /// Consecutive segments must have different comparators.
    pub fn new(horizon: usize, num_actions: usize, starts: Vec<usize>, comparators: Vec<usize>) -> Result<Self> {
        if horizon == 0 || num_actions == 0 {
            return Err(invalid("schedule needs T ≥ 1 and K ≥ 1"));
        }
        if starts.is_empty() || starts.len() != comparators.len() {
            return Err(invalid("one comparator per segment start is required"));
        }
        if starts[0] != 1 {
            return Err(invalid("first segment must start at round 1"));
        }
        if starts.windows(2).any(|w| w[1] <= w[0]) || *starts.last().unwrap() > horizon {
            return Err(invalid("segment starts must increase strictly within the horizon"));
        }
        if comparators.iter().any(|&c| c >= num_actions) {
            return Err(invalid("comparator out of range"));
        }
        if comparators.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("consecutive segments share a comparator"));
        }
        Ok(Self { horizon, num_actions, starts, comparators })
    }

    /// `switches` segments of near-equal length whose comparators cycle
    /// through actions `0..distinct`.
    pub fn evenly_spaced(horizon: usize, num_actions: usize, switches: usize, distinct: usize) -> Result<Self> {
        if switches == 0 || distinct == 0 {
            return Err(invalid("S and n must be at least 1"));
        }
        if switches > horizon {
            return Err(invalid(format!("S = {switches} exceeds T = {horizon}")));
        }
        if distinct > num_actions || distinct > switches {
            return Err(invalid(format!("n = {distinct} must not exceed K or S")));
        }
        if distinct == 1 && switches > 1 {
            return Err(invalid("S > 1 needs at least two distinct comparators"));
        }
        let starts = (0..switches).map(|j| j * horizon / switches + 1).collect();
        let comparators = (0..switches).map(|j| j % distinct).collect();
        Self::new(horizon, num_actions, starts, comparators)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_segments(&self) -> usize {
        self.starts.len()
    }

    /// Segment index containing round `t`.
    pub fn segment_of(&self, t: usize) -> usize {
        self.starts.partition_point(|&s| s <= t) - 1
    }

    pub fn comparator_at(&self, t: usize) -> usize {
        self.comparators[self.segment_of(t)]
    }

    /// `(start, end, comparator)` with `end` inclusive.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.starts.len()).map(move |j| {
            let end = self.starts.get(j + 1).map_or(self.horizon, |&s| s - 1);
            (self.starts[j], end, self.comparators[j])
        })
    }

    pub fn benchmark(&self) -> BenchmarkSequence {
        let indices = self
            .segments()
            .flat_map(|(s, e, c)| std::iter::repeat_n(c, e - s + 1))
            .collect();
        BenchmarkSequence::new(indices, self.num_actions)
            .expect("schedule comparators are in range")
    }

    /// Same schedule with every action `a` relabelled `perm[a]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_actions {
            return Err(invalid("permutation has the wrong length"));
        }
        Self::new(
            self.horizon,
            self.num_actions,
            self.starts.clone(),
            self.comparators.iter().map(|&c| perm[c]).collect(),
        )
    }
}

/// Shared round counter for generators driven by a schedule.
#[derive(Debug, Clone)]
struct Clock {
    t: usize,
    horizon: usize,
}

impl Clock {
    fn tick(&mut self) -> Result<usize> {
        if self.t >= self.horizon {
            return Err(invalid(format!("horizon {} exhausted", self.horizon)));
        }
        self.t += 1;
        Ok(self.t)
    }
}

/// How the non-comparator losses of an adversarial stream evolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversarialStyle {
    /// Comparator `−0.5`, every other action `+0.5`.
    BestActionFavoring,
    /// Other actions follow independent reflected random walks on `[−0.5, 1]`;
    /// the comparator sits `0.5` below the smallest of them.
    RandomWalk,
}

/// Largest step of a [`AdversarialStyle::RandomWalk`] coordinate.
pub const RANDOM_WALK_STEP: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct AdversarialPiecewise {
    schedule: PiecewiseSchedule,
    style: AdversarialStyle,
    rng: ChaCha8Rng,
    walk: Vec<f64>,
    clock: Clock,
}

impl AdversarialPiecewise {
    pub fn new(schedule: PiecewiseSchedule, style: AdversarialStyle, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let walk = (0..schedule.num_actions())
            .map(|_| rng.random_range(-0.5..=1.0))
            .collect();
        let clock = Clock { t: 0, horizon: schedule.horizon() };
        Self { schedule, style, rng, walk, clock }
    }

    pub fn schedule(&self) -> &PiecewiseSchedule {
        &self.schedule
    }

    fn step_walks(&mut self) {
        for x in &mut self.walk {
            let mut next = *x + self.rng.random_range(-RANDOM_WALK_STEP..=RANDOM_WALK_STEP);
            if next > 1.0 {
                next = 2.0 - next;
            } else if next < -0.5 {
                next = -1.0 - next;
            }
            *x = next;
        }
    }
}

impl<F: Scalar> Environment<F> for AdversarialPiecewise {
    fn num_actions(&self) -> usize {
        self.schedule.num_actions()
    }

    fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    fn next_round(&mut self) -> Result<EnvRound<F>> {
        let t = self.clock.tick()?;
        let comparator = self.schedule.comparator_at(t);
        let values = match self.style {
            AdversarialStyle::BestActionFavoring => (0..self.schedule.num_actions())
                .map(|a| if a == comparator { -0.5 } else { 0.5 })
                .collect::<Vec<f64>>(),
            AdversarialStyle::RandomWalk => {
                if t > 1 {
                    self.step_walks();
                }
                let lowest_other = self
                    .walk
                    .iter()
                    .enumerate()
                    .filter(|&(a, _)| a != comparator)
                    .map(|(_, &x)| x)
                    .fold(1.0f64, f64::min);
                let mut values = self.walk.clone();
                values[comparator] = (lowest_other - 0.5).max(-1.0);
                values
            }
        };
        let loss = LossVector::new(values.into_iter().map(F::lit).collect())?;
        Ok(EnvRound { loss, comparator, means: None })
    }
}

/// Piecewise-stochastic losses with per-segment means.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSpec {
    schedule: PiecewiseSchedule,
    gaps: GapProfile,
    means: Vec<Vec<f64>>,
}

impl StochasticSpec {
    /// Segment comparator `i` has mean `−α_i/2`, every other action `+α_i/2`.
    pub fn new(schedule: PiecewiseSchedule, gaps: GapProfile) -> Result<Self> {
        let k = schedule.num_actions();
        let means = schedule
            .segments()
            .map(|(_, _, c)| {
                let alpha = gaps
                    .gap(c)
                    .ok_or_else(|| invalid(format!("no gap given for comparator {c}")))?;
                Ok((0..k).map(|a| if a == c { -alpha / 2.0 } else { alpha / 2.0 }).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::with_means(schedule, gaps, means)
    }

    /// Explicit means per segment; each must respect the gap of its comparator.
    pub fn with_means(schedule: PiecewiseSchedule, gaps: GapProfile, means: Vec<Vec<f64>>) -> Result<Self> {
        if means.len() != schedule.num_segments() {
            return Err(invalid("one mean vector per segment is required"));
        }
        for ((_, _, c), mu) in schedule.segments().zip(&means) {
            if mu.len() != schedule.num_actions() {
                return Err(invalid("mean vector has the wrong length"));
            }
            if mu.iter().any(|m| !(m.abs() <= 1.0)) {
                return Err(invalid("means must lie in [−1, 1]"));
            }
            let alpha = gaps
                .gap(c)
                .ok_or_else(|| invalid(format!("no gap given for comparator {c}")))?;
            let tol = 1e-12;
            if mu
                .iter()
                .enumerate()
                .any(|(a, &m)| a != c && m - mu[c] < alpha - tol)
            {
                return Err(invalid(format!("means violate gap {alpha} of comparator {c}")));
            }
        }
        Ok(Self { schedule, gaps, means })
    }

    pub fn schedule(&self) -> &PiecewiseSchedule {
        &self.schedule
    }

    pub fn gaps(&self) -> &GapProfile {
        &self.gaps
    }

    /// Mean loss of every action during segment `segment`.
    pub fn means(&self, segment: usize) -> &[f64] {
        &self.means[segment]
    }
}

/// Independent `±1` losses with `P(+1) = (1 + μ)/2`.
#[derive(Debug, Clone)]
pub struct StochasticStream {
    spec: StochasticSpec,
    rng: ChaCha8Rng,
    clock: Clock,
}

impl StochasticStream {
    pub fn new(spec: StochasticSpec, seed: u64) -> Self {
        let clock = Clock { t: 0, horizon: spec.schedule.horizon() };
        Self { spec, rng: ChaCha8Rng::seed_from_u64(seed), clock }
    }

    pub fn spec(&self) -> &StochasticSpec {
        &self.spec
    }
}

impl<F: Scalar> Environment<F> for StochasticStream {
    fn num_actions(&self) -> usize {
        self.spec.schedule.num_actions()
    }

    fn horizon(&self) -> usize {
        self.spec.schedule.horizon()
    }

    fn next_round(&mut self) -> Result<EnvRound<F>> {
        let t = self.clock.tick()?;
        let segment = self.spec.schedule.segment_of(t);
        let comparator = self.spec.schedule.comparators[segment];
        let means = &self.spec.means[segment];
        let values = means
            .iter()
            .map(|&mu| {
                let up: f64 = self.rng.random();
                F::lit(if up < (1.0 + mu) / 2.0 { 1.0 } else { -1.0 })
            })
            .collect();
        Ok(EnvRound {
            loss: LossVector::new(values)?,
            comparator,
            means: Some(means.iter().map(|&m| F::lit(m)).collect()),
        })
    }
}

/// `ρ`-sparse losses: comparator `−1`, `ρ − 1` random distractors at `−0.5`,
/// every other action `0`.
#[derive(Debug, Clone)]
pub struct SparseStream {
    schedule: PiecewiseSchedule,
    rho: usize,
    rng: ChaCha8Rng,
    clock: Clock,
}

impl SparseStream {
    pub fn new(schedule: PiecewiseSchedule, rho: usize, seed: u64) -> Result<Self> {
        if rho == 0 || rho > schedule.num_actions() {
            return Err(invalid(format!(
                "sparsity {rho} outside [1, {}]",
                schedule.num_actions()
            )));
        }
        let clock = Clock { t: 0, horizon: schedule.horizon() };
        Ok(Self { schedule, rho, rng: ChaCha8Rng::seed_from_u64(seed), clock })
    }

    pub fn rho(&self) -> usize {
        self.rho
    }
}

impl<F: Scalar> Environment<F> for SparseStream {
    fn num_actions(&self) -> usize {
        self.schedule.num_actions()
    }

    fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    fn next_round(&mut self) -> Result<EnvRound<F>> {
        let t = self.clock.tick()?;
        let k = self.schedule.num_actions();
        let comparator = self.schedule.comparator_at(t);
        let mut values = vec![F::zero(); k];
        values[comparator] = -F::one();
        // Partial Fisher-Yates over the non-comparator actions.
        let mut others: Vec<usize> = (0..k).filter(|&a| a != comparator).collect();
        for j in 0..self.rho - 1 {
            let pick = self.rng.random_range(j..others.len());
            others.swap(j, pick);
            values[others[j]] = F::lit(-0.5);
        }
        Ok(EnvRound { loss: LossVector::sparse(values, self.rho)?, comparator, means: None })
    }
}

/// Adaptive adversary forcing `Ω(sqrt(TKS))` switching regret on bandit learners.
///
/// The horizon splits into `S/2` intervals. Each interval starts with the loss
/// `−½e₀`. Once at least `window` rounds of the interval have passed, if some
/// action `i ≠ 0` went unplayed over the trailing `window` rounds while action
/// 0 was skipped fewer than `threshold` times, the loss becomes `−½e₀ − e_i`
/// for the rest of the interval. The smallest such `i` is chosen.
#[derive(Debug, Clone)]
pub struct LowerBoundAdversary {
    num_actions: usize,
    horizon: usize,
    num_intervals: usize,
    window: usize,
    threshold: f64,
    t: usize,
    interval: usize,
    interval_start: usize,
    skipped_first: usize,
    recent: VecDeque<usize>,
    recent_counts: Vec<usize>,
    target: Option<usize>,
    awaiting_action: bool,
    switches: Vec<(usize, usize)>,
}

impl LowerBoundAdversary {
    pub fn new(num_actions: usize, horizon: usize, switches: usize) -> Result<Self> {
        if num_actions < 2 {
            return Err(invalid("adversary needs at least two actions"));
        }
        if switches < 2 || switches % 2 != 0 {
            return Err(invalid(format!("S = {switches} must be even and at least 2")));
        }
        let num_intervals = switches / 2;
        if horizon < num_intervals {
            return Err(invalid("horizon shorter than the number of intervals"));
        }
        let scale = (horizon as f64 * num_actions as f64 / switches as f64).sqrt();
        Ok(Self {
            num_actions,
            horizon,
            num_intervals,
            window: ((0.5 * scale).ceil() as usize).max(1),
            threshold: scale,
            t: 0,
            interval: 0,
            interval_start: 1,
            skipped_first: 0,
            recent: VecDeque::new(),
            recent_counts: vec![0; num_actions],
            target: None,
            awaiting_action: false,
            switches: Vec::new(),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn num_intervals(&self) -> usize {
        self.num_intervals
    }

    /// `(round, action)` for every switch so far; the new loss applies from `round`.
    pub fn switches(&self) -> &[(usize, usize)] {
        &self.switches
    }

    fn interval_of(&self, t: usize) -> usize {
        // Interval j covers rounds (j·T/m, (j+1)·T/m].
        ((t - 1) * self.num_intervals / self.horizon).min(self.num_intervals - 1)
    }

    fn reset_interval(&mut self, interval: usize, start: usize) {
        self.interval = interval;
        self.interval_start = start;
        self.skipped_first = 0;
        self.recent.clear();
        self.recent_counts.iter_mut().for_each(|c| *c = 0);
        self.target = None;
    }
}

impl<F: Scalar> Environment<F> for LowerBoundAdversary {
    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn next_round(&mut self) -> Result<EnvRound<F>> {
        if self.awaiting_action {
            return Err(Error::DegenerateState(
                "adversary needs the learner's action before the next round".into(),
            ));
        }
        if self.t >= self.horizon {
            return Err(invalid(format!("horizon {} exhausted", self.horizon)));
        }
        self.t += 1;
        let interval = self.interval_of(self.t);
        if interval != self.interval {
            self.reset_interval(interval, self.t);
        }
        let mut values = vec![F::zero(); self.num_actions];
        values[0] = F::lit(-0.5);
        if let Some(i) = self.target {
            values[i] = -F::one();
        }
        self.awaiting_action = true;
        Ok(EnvRound {
            loss: LossVector::sparse(values, 2)?,
            comparator: self.target.unwrap_or(0),
            means: None,
        })
    }

    fn observe(&mut self, action: usize) {
        self.awaiting_action = false;
        if action != 0 {
            self.skipped_first += 1;
        }
        self.recent.push_back(action);
        self.recent_counts[action] += 1;
        if self.recent.len() > self.window {
            let old = self.recent.pop_front().expect("window is non-empty");
            self.recent_counts[old] -= 1;
        }
        let elapsed = self.t + 1 - self.interval_start;
        let next_in_interval = self.t < self.horizon && self.interval_of(self.t + 1) == self.interval;
        if self.target.is_none()
            && next_in_interval
            && elapsed >= self.window
            && (self.skipped_first as f64) < self.threshold
        {
            if let Some(i) = (1..self.num_actions).find(|&i| self.recent_counts[i] == 0) {
                self.target = Some(i);
                self.switches.push((self.t + 1, i));
            }
        }
    }
}

/// Appends `t,i,loss` rows for the nonzero entries of one round.
pub fn write_stream_csv<W: Write, F: Scalar>(out: &mut W, t: usize, loss: &LossVector<F>) -> io::Result<()> {
    for (i, &v) in loss.as_slice().iter().enumerate() {
        if v != F::zero() {
            writeln!(out, "{t},{i},{v}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain<E: Environment<f64>>(env: &mut E) -> Vec<EnvRound<f64>> {
        (0..env.horizon()).map(|_| env.next_round().unwrap()).collect()
    }

    #[test]
    fn evenly_spaced_schedule() {
        let s = PiecewiseSchedule::evenly_spaced(10, 4, 3, 2).unwrap();
        let segs: Vec<_> = s.segments().collect();
        assert_eq!(segs, vec![(1, 3, 0), (4, 6, 1), (7, 10, 0)]);
        assert_eq!(s.benchmark().counts(), (3, 2));
        assert_eq!(s.comparator_at(4), 1);
        assert!(PiecewiseSchedule::evenly_spaced(10, 4, 3, 1).is_err());
        assert!(PiecewiseSchedule::evenly_spaced(10, 4, 11, 2).is_err());
        assert!(PiecewiseSchedule::new(10, 4, vec![1, 5], vec![2, 2]).is_err());
        assert!(PiecewiseSchedule::new(10, 4, vec![2], vec![2]).is_err());
    }

    #[test]
    fn favoring_style_uniform_player_regret() {
        let k = 5;
        let t = 100;
        let schedule = PiecewiseSchedule::evenly_spaced(t, k, 4, 3).unwrap();
        let mut env = AdversarialPiecewise::new(schedule, AdversarialStyle::BestActionFavoring, 0);
        let regret: f64 = drain(&mut env)
            .iter()
            .map(|r| r.loss.as_slice().iter().sum::<f64>() / k as f64 - r.loss.get(r.comparator))
            .sum();
        // Each non-comparator action costs 1 more than the comparator.
        let want = t as f64 * (k - 1) as f64 / k as f64;
        assert!((regret - want).abs() < 1e-9);
    }

    #[test]
    fn single_action_has_no_regret() {
        let schedule = PiecewiseSchedule::evenly_spaced(20, 1, 1, 1).unwrap();
        for style in [AdversarialStyle::BestActionFavoring, AdversarialStyle::RandomWalk] {
            let mut env = AdversarialPiecewise::new(schedule.clone(), style, 3);
            for r in drain(&mut env) {
                assert_eq!(r.comparator, 0);
                assert!(r.loss.get(0).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn relabelling_permutes_stream() {
        let schedule = PiecewiseSchedule::evenly_spaced(30, 4, 3, 3).unwrap();
        let perm = [2, 0, 3, 1];
        let mut a = AdversarialPiecewise::new(schedule.clone(), AdversarialStyle::BestActionFavoring, 1);
        let mut b = AdversarialPiecewise::new(schedule.relabel(&perm).unwrap(), AdversarialStyle::BestActionFavoring, 1);
        for (x, y) in drain(&mut a).iter().zip(drain(&mut b).iter()) {
            assert_eq!(perm[x.comparator], y.comparator);
            for act in 0..4 {
                assert_eq!(x.loss.get(act), y.loss.get(perm[act]));
            }
        }
    }

    #[test]
    fn random_walk_keeps_comparator_lowest() {
        let schedule = PiecewiseSchedule::evenly_spaced(2000, 6, 5, 3).unwrap();
        let mut env = AdversarialPiecewise::new(schedule, AdversarialStyle::RandomWalk, 9);
        for r in drain(&mut env) {
            let c = r.loss.get(r.comparator);
            for a in 0..6 {
                if a != r.comparator {
                    assert!(r.loss.get(a) - c >= 0.5 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn stochastic_means_and_extremes() {
        let schedule = PiecewiseSchedule::evenly_spaced(50, 3, 2, 2).unwrap();
        let gaps = GapProfile::new(vec![(0, 2.0), (1, 2.0)]).unwrap();
        let mut env = StochasticStream::new(StochasticSpec::new(schedule, gaps).unwrap(), 5);
        for r in drain(&mut env) {
            for a in 0..3 {
                let want = if a == r.comparator { -1.0 } else { 1.0 };
                assert_eq!(r.loss.get(a), want);
            }
        }

        let schedule = PiecewiseSchedule::evenly_spaced(10, 3, 1, 1).unwrap();
        let spec = StochasticSpec::new(schedule.clone(), GapProfile::new(vec![(0, 0.2)]).unwrap()).unwrap();
        let mu = spec.means(0);
        assert!((mu[1] - mu[0] - 0.2).abs() < 1e-15);
        let bad = vec![vec![0.0, 0.1, 0.5]];
        assert!(StochasticSpec::with_means(schedule, GapProfile::new(vec![(0, 0.2)]).unwrap(), bad).is_err());
        assert!(GapProfile::new(vec![(0, 2.5)]).is_err());
    }

    #[test]
    fn stochastic_empirical_means() {
        let n = 100_000;
        let schedule = PiecewiseSchedule::evenly_spaced(n, 2, 1, 1).unwrap();
        let gaps = GapProfile::new(vec![(0, 0.4)]).unwrap();
        let mut env = StochasticStream::new(StochasticSpec::new(schedule, gaps).unwrap(), 17);
        let mut sums = [0.0; 2];
        for r in drain(&mut env) {
            sums[0] += r.loss.get(0);
            sums[1] += r.loss.get(1);
        }
        for (s, mu) in sums.iter().zip([-0.2, 0.2]) {
            let sd = ((1.0 - mu * mu) / n as f64).sqrt();
            assert!((s / n as f64 - mu).abs() < 3.0 * sd);
        }
    }

    #[test]
    fn sparse_stream_shape() {
        let schedule = PiecewiseSchedule::evenly_spaced(500, 6, 5, 2).unwrap();
        let mut env = SparseStream::new(schedule.clone(), 2, 4).unwrap();
        for r in drain(&mut env) {
            assert!(r.loss.nonzeros() <= 2);
            assert_eq!(r.loss.get(r.comparator), -1.0);
            let distractors = r.loss.as_slice().iter().filter(|&&v| v == -0.5).count();
            assert_eq!(distractors, 1);
        }
        let mut dense = SparseStream::new(schedule.clone(), 6, 4).unwrap();
        let r: EnvRound<f64> = dense.next_round().unwrap();
        assert_eq!(r.loss.nonzeros(), 6);
        assert!(SparseStream::new(schedule, 7, 4).is_err());
    }

    #[test]
    fn adversary_stays_when_first_action_is_skipped_often() {
        // K = 10, T = 10_000, S = 10: window 50, threshold 100.
        let mut env = LowerBoundAdversary::new(10, 10_000, 10).unwrap();
        assert_eq!(env.window(), 50);
        for t in 0..10_000 {
            let r: EnvRound<f64> = env.next_round().unwrap();
            assert_eq!(r.loss.get(0), -0.5);
            assert!(r.loss.nonzeros() <= 2);
            Environment::<f64>::observe(&mut env, 1 + t % 9);
        }
        assert!(env.switches().is_empty());
    }

    #[test]
    fn adversary_switches_against_a_fixed_player() {
        let mut env = LowerBoundAdversary::new(10, 10_000, 10).unwrap();
        let mut rounds = Vec::new();
        for _ in 0..10_000 {
            let r: EnvRound<f64> = env.next_round().unwrap();
            rounds.push(r);
            Environment::<f64>::observe(&mut env, 0);
        }
        // One switch per interval, to action 1, after the first window.
        let switches = env.switches().to_vec();
        assert_eq!(switches.len(), 5);
        for (j, &(t, i)) in switches.iter().enumerate() {
            assert_eq!(i, 1);
            assert_eq!(t, j * 2000 + 51);
        }
        assert_eq!(rounds[50].comparator, 1);
        assert_eq!(rounds[50].loss.get(1), -1.0);
        assert_eq!(rounds[2000].comparator, 0);
        assert!(rounds.iter().all(|r| r.loss.nonzeros() <= 2));
    }

    #[test]
    fn adversary_requires_feedback() {
        let mut env = LowerBoundAdversary::new(3, 100, 2).unwrap();
        let _: EnvRound<f64> = env.next_round().unwrap();
        assert!(Environment::<f64>::next_round(&mut env).is_err());
        assert!(LowerBoundAdversary::new(3, 100, 3).is_err());
    }

    #[test]
    fn stream_csv_rows() {
        let loss = LossVector::new(vec![0.0, -0.5, 0.0, 1.0]).unwrap();
        let mut out = Vec::new();
        write_stream_csv(&mut out, 7, &loss).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "7,1,-0.5\n7,3,1\n");
    }

    #[test]
    fn streams_reproducible() {
        let schedule = PiecewiseSchedule::evenly_spaced(200, 5, 4, 2).unwrap();
        let mut a = SparseStream::new(schedule.clone(), 3, 11).unwrap();
        let mut b = SparseStream::new(schedule, 3, 11).unwrap();
        assert_eq!(drain(&mut a), drain(&mut b));
    }
}
