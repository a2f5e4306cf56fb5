//! Online learning with long-term memory.
//!
//! Learners that compete with a benchmark switching `S` times among only `n`
//! distinct actions, paying for the `n` actions once instead of per switch:
//!
//! - [`ReductionOne`] and [`ReductionTwo`]: reductions for the expert problem,
//!   built from a static master ([`HedgeV1State`], [`HedgeV2State`]) and one
//!   two-action switching learner per action ([`FixedShareState`]).
//! - [`BanditState`]: a sparse multi-armed bandit algorithm.
//! - [`MppState`]: mixing past posteriors with a doubling trick, as a baseline.
//! - [`environments`]: adversarial, piecewise-stochastic, sparse and adaptive
//!   lower-bound loss streams.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

pub mod bandit;
pub mod environments;
pub mod error;
pub mod learner;
pub mod ledger;
pub mod mpp;
pub mod reductions;
pub mod scalar;
pub mod static_learners;
pub mod switching;
pub mod types;

pub use bandit::{
    bandit_round, estimate_loss, exploration_mix, ftrl_solve, master_loss, z_update, BanditConfig,
    BanditRound, BanditState, FtrlSolution,
};
pub use environments::{
    AdversarialPiecewise, AdversarialStyle, EnvRound, Environment, LowerBoundAdversary,
    PiecewiseSchedule, SparseStream, StochasticSpec, StochasticStream,
};
pub use error::{Error, Result};
pub use learner::{sample_index, Feedback, OnlineLearner};
pub use ledger::{LedgerMeta, RegretLedger, RegretRecord};
pub use mpp::MppState;
pub use reductions::{
    alg1_distribution, alg2_distribution, grid_rates, BiasMode, ConfidenceState, ReductionOne,
    ReductionOneConfig, ReductionRound, ReductionTwo, ReductionTwoConfig,
};
pub use scalar::Scalar;
pub use static_learners::{HedgeV1State, HedgeV2State};
pub use switching::{FixedShareKind, FixedShareState, MixingSchedule};
pub use types::{
    instantaneous_regret, switch_and_distinct_counts, BenchmarkSequence, GapProfile, LossVector,
    SimplexWeights,
};

pub type Weights = SimplexWeights<f64>;
pub type Loss = LossVector<f64>;
pub type Ledger = RegretLedger<f64>;
pub type HedgeV1 = HedgeV1State<f64>;
pub type HedgeV2 = HedgeV2State<f64>;
pub type FixedShare = FixedShareState<f64>;
pub type Alg1 = ReductionOne<f64>;
pub type Alg2 = ReductionTwo<f64>;
pub type SparseBandit = BanditState<f64>;
pub type Mpp = MppState<f64>;
