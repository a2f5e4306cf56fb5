//! Seeded replicas: one learner against one environment per seed.

use std::fs;
use std::path::Path;

use longmem_core::reductions::ReductionTwoConfig;
use longmem_core::{
    sample_index, AdversarialPiecewise, BanditConfig, BanditState, EnvRound, Environment, GapProfile,
    LedgerMeta, LossVector, LowerBoundAdversary, MppState, OnlineLearner, PiecewiseSchedule,
    ReductionOne, ReductionOneConfig, ReductionTwo, SimplexWeights, SparseStream, StochasticSpec,
    StochasticStream,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Algorithm, EnvKind, ExperimentConfig};
use crate::error::Result;
use crate::summary::{summarize, SummaryRecord};

pub type Ledger = longmem_core::RegretLedger<f64>;

/// Header of the per-seed diagnostics file.
pub const DIAGNOSTICS_CSV_HEADER: &str =
    "seed,identity_residual,mpp_restarts,mpp_variance,stability_min,stability_max";

/// The learner under test, with access to its per-round internals.
#[derive(Debug, Clone)]
pub enum AnyLearner {
    Alg1(ReductionOne<f64>),
    Alg2(ReductionTwo<f64>),
    Alg3(BanditState<f64>),
    Mpp(MppState<f64>),
}

impl AnyLearner {
    pub fn is_bandit(&self) -> bool {
        matches!(self, Self::Alg3(_))
    }

    pub fn distribution(&mut self) -> longmem_core::Result<SimplexWeights<f64>> {
        match self {
            Self::Alg1(l) => l.distribution(),
            Self::Alg2(l) => l.distribution(),
            Self::Alg3(l) => l.distribution(),
            Self::Mpp(l) => l.distribution(),
        }
    }

    /// Completes the round and returns the violation of the learner's exact
    /// identity: `|w·c|` for the reductions, the relative gap of
    /// `w·c = −η Σ w z ℓ̂²` for the bandit, zero for MPP.
    pub fn step(&mut self, loss: &LossVector<f64>, sampled: usize) -> longmem_core::Result<f64> {
        match self {
            Self::Alg1(l) => l.round(loss).map(|r| r.master_identity().abs()),
            Self::Alg2(l) => l.round(loss).map(|r| r.master_identity().abs()),
            Self::Alg3(l) => {
                let eta = l.config().eta;
                let round = l.observe_loss(sampled, loss.get(sampled))?;
                let (lhs, rhs) = round.identity_sides(eta);
                Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
            }
            Self::Mpp(l) => l.mpp_update(loss).map(|_| 0.0),
        }
    }
}

pub fn build_learner(config: &ExperimentConfig) -> Result<AnyLearner> {
    let (k, t, s, n) = (config.num_actions, config.horizon, config.switches, config.distinct);
    let o = &config.overrides;
    let learner = match config.algorithm {
        Algorithm::Alg1 => {
            let mut cfg = if o.untuned {
                ReductionOneConfig::untuned(k, t)?
            } else {
                ReductionOneConfig::tuned(k, t, s, n)?
            };
            cfg.bias = o.bias;
            cfg.subroutine = o.fixed_share;
            AnyLearner::Alg1(ReductionOne::new(cfg)?)
        }
        Algorithm::Alg2 => {
            let mut cfg = ReductionTwoConfig::new(k, t)?;
            cfg.subroutine = o.fixed_share;
            AnyLearner::Alg2(ReductionTwo::new(cfg)?)
        }
        Algorithm::Alg3 => {
            let mut cfg = BanditConfig::tuned(k, t, s, n, config.effective_rho())?;
            if let Some(g) = o.bandit_gamma {
                cfg.gamma = g;
            }
            AnyLearner::Alg3(BanditState::new(cfg)?)
        }
        Algorithm::Mpp => {
            let (s, n) = if o.untuned {
                (((t as f64).sqrt().round() as usize).max(1), k)
            } else {
                (s, n)
            };
            AnyLearner::Mpp(MppState::new(k, t, s, n)?)
        }
    };
    Ok(learner)
}

/// Comparator gaps: the `j`-th comparator action gets `gaps[j % len]`.
pub fn gap_profile(config: &ExperimentConfig) -> Result<GapProfile> {
    let gaps = (0..config.distinct)
        .map(|j| (j, config.gaps[j % config.gaps.len()]))
        .collect();
    Ok(GapProfile::new(gaps)?)
}

pub fn build_environment(config: &ExperimentConfig, seed: u64) -> Result<Box<dyn Environment<f64> + Send>> {
    let (k, t, s, n) = (config.num_actions, config.horizon, config.switches, config.distinct);
    let env: Box<dyn Environment<f64> + Send> = match config.environment {
        EnvKind::Piecewise => {
            let schedule = PiecewiseSchedule::evenly_spaced(t, k, s, n)?;
            Box::new(AdversarialPiecewise::new(schedule, config.overrides.style, seed))
        }
        EnvKind::Stochastic => {
            let schedule = PiecewiseSchedule::evenly_spaced(t, k, s, n)?;
            let spec = StochasticSpec::new(schedule, gap_profile(config)?)?;
            Box::new(StochasticStream::new(spec, seed))
        }
        EnvKind::Sparse => {
            let schedule = PiecewiseSchedule::evenly_spaced(t, k, s, n)?;
            Box::new(SparseStream::new(schedule, config.rho, seed)?)
        }
        EnvKind::LbAdversary => Box::new(LowerBoundAdversary::new(k, t, s)?),
    };
    Ok(env)
}

/// Per-seed numbers that are not part of the regret ledger.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeedDiagnostics {
    pub identity_residual: f64,
    pub mpp_restarts: Option<usize>,
    /// `Σ_t Σ_i p_t(i) r_t(i)²` of the MPP run.
    pub mpp_variance: Option<f64>,
    /// Extremes of `w_{t+1}(i)/w_t(i)` in the bandit.
    pub stability: Option<(f64, f64)>,
}

impl SeedDiagnostics {
    pub fn csv_row(&self, seed: u64) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{seed},{},{},{},{},{}",
            self.identity_residual,
            opt(self.mpp_restarts.map(|r| r.to_string())),
            opt(self.mpp_variance.map(|v| v.to_string())),
            opt(self.stability.map(|s| s.0.to_string())),
            opt(self.stability.map(|s| s.1.to_string())),
        )
    }
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub ledger: Ledger,
    pub diagnostics: SeedDiagnostics,
}

/// Runs one replica. Environment randomness comes from `seed`; the learner's
/// sampling uses a separate ChaCha stream of the same seed, so every
/// algorithm sees the same oblivious stream for a given seed.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let mut env = build_environment(config, seed)?;
    let mut learner = build_learner(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let meta = LedgerMeta {
        algorithm: config.algorithm.id().to_string(),
        environment: config.environment.id().to_string(),
        seed,
        num_actions: config.num_actions,
        horizon: config.horizon,
        switches: config.switches,
        distinct: config.distinct,
        rho: config.effective_rho(),
    };
    let mut ledger = Ledger::new(meta);
    let mut diagnostics = SeedDiagnostics::default();
    for t in 1..=config.horizon {
        let EnvRound { loss, comparator, means } = env.next_round()?;
        let p = learner.distribution()?;
        let sampled = sample_index(&p, &mut rng);
        env.observe(sampled);
        // Pseudo-regret is measured against conditional means when the stream has them.
        let eval = means.as_deref().unwrap_or(loss.as_slice());
        let sampled_loss = learner.is_bandit().then(|| eval[sampled]);
        ledger.push(t, p.dot(eval), sampled_loss, eval[comparator])?;
        let residual = learner.step(&loss, sampled)?;
        diagnostics.identity_residual = diagnostics.identity_residual.max(residual);
    }
    match &learner {
        AnyLearner::Mpp(m) => {
            diagnostics.mpp_restarts = Some(m.restarts());
            diagnostics.mpp_variance = Some(m.total_variance());
        }
        AnyLearner::Alg3(b) => diagnostics.stability = Some(b.stability_range()),
        _ => {}
    }
    Ok(SeedRun { seed, ledger, diagnostics })
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
    pub summary: SummaryRecord,
}

/// Validates, runs every seed in parallel and summarises the ledgers in seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let runs = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(config, &runs)?;
    Ok(ExperimentResult { config: config.clone(), runs, summary })
}

/// Writes `config.txt`, `ledger_seed{seed}.csv`, `diagnostics.csv` and `summary.csv`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), result.config.to_text())?;
    let mut diagnostics = String::from(DIAGNOSTICS_CSV_HEADER);
    diagnostics.push('\n');
    for run in &result.runs {
        fs::write(
            dir.join(format!("ledger_seed{}.csv", run.seed)),
            run.ledger.to_csv_string(),
        )?;
        diagnostics.push_str(&run.diagnostics.csv_row(run.seed));
        diagnostics.push('\n');
    }
    fs::write(dir.join("diagnostics.csv"), diagnostics)?;
    fs::write(dir.join("summary.csv"), result.summary.to_csv())?;
    Ok(())
}

/// Runs `base` once per value of `param`; each result goes to `out/{param}={value}`
/// when an output directory is set, followed by a combined `sweep_summary.csv`.
pub fn run_sweep(base: &ExperimentConfig, param: &str, values: &[String]) -> Result<Vec<ExperimentResult>> {
    let mut configs = Vec::with_capacity(values.len());
    let mut problems = Vec::new();
    for value in values {
        let mut config = base.clone();
        config.set(param, value)?;
        if let Some(out) = &base.out {
            config.out = Some(out.join(format!("{param}={value}")));
        }
        if let Err(crate::error::HarnessError::Validation(p)) = config.validate() {
            problems.extend(p.into_iter().map(|m| format!("{param}={value}: {m}")));
        }
        configs.push(config);
    }
    if !problems.is_empty() {
        return Err(crate::error::HarnessError::Validation(problems));
    }
    let mut results = Vec::with_capacity(configs.len());
    for config in &configs {
        let result = run_experiment(config)?;
        if let Some(dir) = &config.out {
            write_outputs(&result, dir)?;
        }
        results.push(result);
    }
    if let Some(out) = &base.out {
        let mut text = format!("{param},{}\n", SummaryRecord::CSV_HEADER);
        for (value, result) in values.iter().zip(&results) {
            text.push_str(&format!("{value},{}\n", result.summary.csv_row()));
        }
        fs::write(out.join("sweep_summary.csv"), text)?;
    }
    Ok(results)
}
