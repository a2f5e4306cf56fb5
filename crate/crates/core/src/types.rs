//! Domain types shared by every learner: distributions, loss vectors,
//! benchmark sequences and instantaneous regret.

use std::collections::BTreeSet;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// A probability vector over a finite action set.
///
/// Entries are non-negative and sum to one within
/// [`Scalar::simplex_tolerance`]. Construction validates this; the
/// multiplicative-update helpers renormalise so the invariant is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights<F> {
    values: Vec<F>,
}

impl<F: Scalar> SimplexWeights<F> {
    /// Validates an already-normalised vector.
    pub fn new(values: Vec<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("distribution over zero actions"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < F::zero()) {
            return Err(invalid(format!("entry {i} is negative or non-finite: {}", values[i])));
        }
        let total: F = values.iter().copied().sum();
        if (total - F::one()).abs() > F::simplex_tolerance() {
            return Err(invalid(format!("entries sum to {total}, expected 1")));
        }
        Ok(Self { values })
    }

    /// Wraps a vector the caller has already normalised.
    pub(crate) fn from_raw(values: Vec<F>) -> Self {
        debug_assert!(Self::new(values.clone()).is_ok());
        Self { values }
    }

    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform distribution over zero actions");
        let v = F::one() / F::from_usize_lossy(k);
        Self { values: vec![v; k] }
    }

    /// Point mass on `i`.
    pub fn vertex(k: usize, i: usize) -> Self {
        assert!(i < k, "vertex index out of range");
        let mut values = vec![F::zero(); k];
        values[i] = F::one();
        Self { values }
    }

    /// Floors every entry at [`Scalar::weight_floor`] and divides by the sum.
    ///
    /// Fails if any entry is negative, NaN or infinite, or if the whole vector
    /// underflowed to zero.
    pub fn from_unnormalized(mut values: Vec<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("distribution over zero actions"));
        }
        for (i, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < F::zero() {
                return Err(Error::Numerical(format!(
                    "unnormalised weight {i} is {v}; cannot renormalise"
                )));
            }
            if *v < F::weight_floor() {
                *v = F::weight_floor();
            }
        }
        let total: F = values.iter().copied().sum();
        if !(total.is_finite() && total > F::zero()) {
            return Err(Error::Numerical(format!("weight total is {total}")));
        }
        values.iter_mut().for_each(|v| *v = *v / total);
        Ok(Self { values })
    }

    /// `exp(scores)` normalised, computed with the maximum subtracted first.
    pub fn softmax(scores: &[F]) -> Result<Self> {
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::Numerical("NaN score in softmax".into()));
        }
        let max = scores.iter().copied().fold(F::neg_infinity(), F::max);
        if !max.is_finite() {
            return Err(Error::Numerical(format!("softmax max score is {max}")));
        }
        Self::from_unnormalized(scores.iter().map(|&s| (s - max).exp()).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<F> {
        self.values
    }

    pub fn get(&self, i: usize) -> F {
        self.values[i]
    }

    pub fn dot(&self, other: &[F]) -> F {
        debug_assert_eq!(self.values.len(), other.len());
        self.values.iter().zip(other).map(|(&a, &b)| a * b).sum()
    }

    /// `(1 - gamma) * self + gamma / K`. Every entry of the result is at least `gamma / K`.
    pub fn mix_uniform(&self, gamma: F) -> Self {
        let floor = gamma / F::from_usize_lossy(self.values.len());
        let keep = F::one() - gamma;
        Self { values: self.values.iter().map(|&v| keep * v + floor).collect() }
    }

    pub fn min_entry(&self) -> F {
        self.values.iter().copied().fold(F::infinity(), F::min)
    }
}

/// A loss vector in `[-1, 1]^K`, optionally tagged with a sparsity budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector<F> {
    values: Vec<F>,
    sparsity: Option<usize>,
}

impl<F: Scalar> LossVector<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("loss vector over zero actions"));
        }
        if let Some(i) = values
            .iter()
            .position(|v| !v.is_finite() || v.abs() > F::one())
        {
            return Err(invalid(format!("loss entry {i} = {} outside [-1, 1]", values[i])));
        }
        Ok(Self { values, sparsity: None })
    }

    /// Like [`LossVector::new`], additionally requiring at most `rho` nonzero entries.
    pub fn sparse(values: Vec<F>, rho: usize) -> Result<Self> {
        let mut loss = Self::new(values)?;
        let nnz = loss.nonzeros();
        if nnz > rho {
            return Err(invalid(format!("{nnz} nonzero losses exceed sparsity {rho}")));
        }
        loss.sparsity = Some(rho);
        Ok(loss)
    }

    pub fn zeros(k: usize) -> Self {
        Self { values: vec![F::zero(); k], sparsity: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    pub fn get(&self, i: usize) -> F {
        self.values[i]
    }

    pub fn sparsity(&self) -> Option<usize> {
        self.sparsity
    }

    pub fn nonzeros(&self) -> usize {
        self.values.iter().filter(|v| !v.is_zero()).count()
    }
}

/// Comparator sequence `i_1, ..., i_T` over `K` actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkSequence {
    indices: Vec<usize>,
    num_actions: usize,
}

impl BenchmarkSequence {
    pub fn new(indices: Vec<usize>, num_actions: usize) -> Result<Self> {
        switch_and_distinct_counts(&indices, num_actions)?;
        Ok(Self { indices, num_actions })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// `(S, n)`: one plus the number of switches, and the number of distinct actions.
    pub fn counts(&self) -> (usize, usize) {
        counts_unchecked(&self.indices)
    }

    /// Number of segments charged to action `i`: one plus every round where
    /// the comparator enters or leaves `i`.
    pub fn segments_for(&self, i: usize) -> usize {
        1 + self
            .indices
            .windows(2)
            .filter(|w| (w[0] == i) != (w[1] == i))
            .count()
    }

    pub fn distinct(&self) -> Vec<usize> {
        self.indices.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }
}

fn counts_unchecked(indices: &[usize]) -> (usize, usize) {
    let switches = indices.windows(2).filter(|w| w[0] != w[1]).count();
    let distinct = indices.iter().collect::<BTreeSet<_>>().len();
    (1 + switches, distinct)
}

/// `(S, n)` for a raw comparator sequence over `num_actions` actions.
pub fn switch_and_distinct_counts(indices: &[usize], num_actions: usize) -> Result<(usize, usize)> {
    if indices.is_empty() {
        return Err(invalid("empty benchmark sequence"));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= num_actions) {
        return Err(invalid(format!("action {bad} out of range for K = {num_actions}")));
    }
    Ok(counts_unchecked(indices))
}

/// `p . loss - loss(i)`.
pub fn instantaneous_regret<F: Scalar>(p: &SimplexWeights<F>, loss: &LossVector<F>, i: usize) -> Result<F> {
    if p.len() != loss.len() {
        return Err(invalid(format!(
            "distribution has {} actions, loss has {}",
            p.len(),
            loss.len()
        )));
    }
    if i >= loss.len() {
        return Err(invalid(format!("action {i} out of range for K = {}", loss.len())));
    }
    Ok(p.dot(loss.as_slice()) - loss.get(i))
}

/// Instantaneous regret against every action at once.
pub fn instantaneous_regrets<F: Scalar>(p: &[F], loss: &[F]) -> Vec<F> {
    let avg: F = p.iter().zip(loss).map(|(&a, &b)| a * b).sum();
    loss.iter().map(|&l| avg - l).collect()
}

/// Per-action gaps `alpha_i` of the piecewise-stochastic setting.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    gaps: Vec<(usize, f64)>,
}

impl GapProfile {
    /// `gaps` pairs an action id with its gap; every gap must lie in `(0, 2]`.
    pub fn new(mut gaps: Vec<(usize, f64)>) -> Result<Self> {
        gaps.sort_by_key(|&(i, _)| i);
        if gaps.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("duplicate action in gap profile"));
        }
        if let Some(&(i, a)) = gaps.iter().find(|&&(_, a)| !(a > 0.0 && a <= 2.0)) {
            return Err(invalid(format!("gap {a} for action {i} outside (0, 2]")));
        }
        Ok(Self { gaps })
    }

    pub fn gap(&self, action: usize) -> Option<f64> {
        self.gaps
            .binary_search_by_key(&action, |&(i, _)| i)
            .ok()
            .map(|pos| self.gaps[pos].1)
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.gaps.iter().map(|&(_, a)| a).reduce(f64::min)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.gaps.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(v: &[f64]) -> SimplexWeights<f64> {
        SimplexWeights::new(v.to_vec()).unwrap()
    }

    fn l(v: &[f64]) -> LossVector<f64> {
        LossVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn counts_examples() {
        // 0-based relabelling of (1,1,1,1), (1,1,2,1), (3,1,2,2,3).
        assert_eq!(switch_and_distinct_counts(&[0, 0, 0, 0], 1).unwrap(), (1, 1));
        assert_eq!(switch_and_distinct_counts(&[0, 0, 1, 0], 2).unwrap(), (3, 2));
        assert_eq!(switch_and_distinct_counts(&[2, 0, 1, 1, 2], 3).unwrap(), (4, 3));
    }

    #[test]
    fn counts_reject_bad_input() {
        assert!(matches!(switch_and_distinct_counts(&[], 3), Err(Error::InvalidInput(_))));
        assert!(matches!(switch_and_distinct_counts(&[0, 3], 3), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn segments_per_action() {
        let seq = BenchmarkSequence::new(vec![0, 0, 1, 0, 2, 2], 3).unwrap();
        // 0 leaves at t=3, re-enters at t=4, leaves at t=5.
        assert_eq!(seq.segments_for(0), 4);
        assert_eq!(seq.segments_for(1), 3);
        assert_eq!(seq.segments_for(2), 2);
        assert_eq!(seq.distinct(), vec![0, 1, 2]);
    }

    #[test]
    fn regret_examples() {
        let p = w(&[0.5, 0.5]);
        let loss = l(&[1.0, -1.0]);
        assert_eq!(instantaneous_regret(&p, &loss, 0).unwrap(), -1.0);
        assert_eq!(instantaneous_regret(&p, &loss, 1).unwrap(), 1.0);
        let zero = LossVector::zeros(2);
        assert_eq!(instantaneous_regret(&w(&[0.3, 0.7]), &zero, 1).unwrap(), 0.0);
        assert!(instantaneous_regret(&p, &loss, 2).is_err());
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexWeights::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexWeights::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexWeights::<f64>::new(vec![]).is_err());
        assert!(SimplexWeights::from_unnormalized(vec![1.0, f64::NAN]).is_err());
        let floored = SimplexWeights::from_unnormalized(vec![1.0, 0.0]).unwrap();
        assert!(floored.get(1) > 0.0);
    }

    #[test]
    fn loss_validation() {
        assert!(LossVector::new(vec![1.5]).is_err());
        assert!(LossVector::sparse(vec![1.0, -1.0, 0.5], 2).is_err());
        let s = LossVector::sparse(vec![1.0, 0.0, 0.5], 2).unwrap();
        assert_eq!(s.nonzeros(), 2);
        assert_eq!(s.sparsity(), Some(2));
    }

    #[test]
    fn gap_profile_validation() {
        assert!(GapProfile::new(vec![(0, 0.0)]).is_err());
        assert!(GapProfile::new(vec![(0, 2.5)]).is_err());
        assert!(GapProfile::new(vec![(1, 0.2), (1, 0.4)]).is_err());
        let g = GapProfile::new(vec![(3, 0.4), (1, 0.2)]).unwrap();
        assert_eq!(g.gap(3), Some(0.4));
        assert_eq!(g.gap(2), None);
        assert_eq!(g.min_gap(), Some(0.2));
    }

    fn simplex_strategy(k: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.001f64..1.0, k).prop_map(|v| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect()
        })
    }

    proptest! {
        #[test]
        fn weighted_regrets_cancel(
            (p, loss) in (1usize..12).prop_flat_map(|k| {
                (simplex_strategy(k), proptest::collection::vec(-1.0f64..=1.0, k))
            })
        ) {
            let p = SimplexWeights::new(p).unwrap();
            let loss = LossVector::new(loss).unwrap();
            let total: f64 = (0..p.len())
                .map(|i| p.get(i) * instantaneous_regret(&p, &loss, i).unwrap())
                .sum();
            prop_assert!(total.abs() <= 1e-9);
        }

        #[test]
        fn counts_invariant_under_relabelling(
            seq in proptest::collection::vec(0usize..6, 1..60),
            perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle(),
        ) {
            let relabelled: Vec<usize> = seq.iter().map(|&i| perm[i]).collect();
            let (s, n) = switch_and_distinct_counts(&seq, 6).unwrap();
            prop_assert_eq!((s, n), switch_and_distinct_counts(&relabelled, 6).unwrap());
            prop_assert!(n <= s.min(6));
            prop_assert!(s <= seq.len());
        }
    }
}
