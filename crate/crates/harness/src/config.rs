//! Experiment configuration and its `key=value` text form.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use longmem_core::{AdversarialStyle, BiasMode, FixedShareKind};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Alg1,
    Alg2,
    Alg3,
    Mpp,
}

impl Algorithm {
    pub fn id(self) -> &'static str {
        match self {
            Self::Alg1 => "alg1",
            Self::Alg2 => "alg2",
            Self::Alg3 => "alg3",
            Self::Mpp => "mpp",
        }
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg1" => Ok(Self::Alg1),
            "alg2" => Ok(Self::Alg2),
            "alg3" => Ok(Self::Alg3),
            "mpp" => Ok(Self::Mpp),
            _ => Err(HarnessError::validation(format!("unknown algorithm `{s}`"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Piecewise,
    Stochastic,
    Sparse,
    LbAdversary,
}

impl EnvKind {
    pub fn id(self) -> &'static str {
        match self {
            Self::Piecewise => "piecewise",
            Self::Stochastic => "stochastic",
            Self::Sparse => "sparse",
            Self::LbAdversary => "lb-adversary",
        }
    }
}

impl FromStr for EnvKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "piecewise" => Ok(Self::Piecewise),
            "stochastic" => Ok(Self::Stochastic),
            "sparse" => Ok(Self::Sparse),
            "lb-adversary" => Ok(Self::LbAdversary),
            _ => Err(HarnessError::validation(format!("unknown environment `{s}`"))),
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// How the sub-learners are wired; defaults match the analysed algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct Overrides {
    pub style: AdversarialStyle,
    pub bias: BiasMode,
    pub fixed_share: FixedShareKind,
    /// Tune the single-rate reduction and MPP without knowing `(S, n)`.
    pub untuned: bool,
    /// Barrier weight of the bandit regularizer in place of `200K²`.
    pub bandit_gamma: Option<f64>,
}

impl Default for Overrides {
    fn default() -> Self {
        Self {
            style: AdversarialStyle::RandomWalk,
            bias: BiasMode::Biased,
            fixed_share: FixedShareKind::Variant,
            untuned: false,
            bandit_gamma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub environment: EnvKind,
    pub num_actions: usize,
    pub horizon: usize,
    pub switches: usize,
    pub distinct: usize,
    pub rho: usize,
    /// Gap of comparator action `j` is `gaps[j % gaps.len()]`.
    pub gaps: Vec<f64>,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
    pub overrides: Overrides,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Alg1,
            environment: EnvKind::Piecewise,
            num_actions: 16,
            horizon: 10_000,
            switches: 20,
            distinct: 3,
            rho: 2,
            gaps: vec![0.2, 0.4],
            seeds: vec![0],
            out: None,
            overrides: Overrides::default(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::validation(format!("`{key}` expects a number, got `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// `a..b` (half-open) or a comma-separated list.
fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = parse_num("seeds", a)?;
        let b: u64 = parse_num("seeds", b)?;
        return Ok((a..b).collect());
    }
    parse_list("seeds", value)
}

fn format_seeds(seeds: &[u64]) -> String {
    let contiguous = seeds.windows(2).all(|w| w[1] == w[0] + 1);
    match (seeds.first(), seeds.last()) {
        (Some(&a), Some(&b)) if contiguous && seeds.len() > 2 => format!("{a}..{}", b + 1),
        _ => join(seeds),
    }
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Keys accepted by [`ExperimentConfig::set`].
    pub const KEYS: [&'static str; 15] = [
        "algo", "env", "K", "T", "S", "n", "rho", "gap", "seeds", "out", "style", "bias",
        "fixed_share", "tuning", "gamma",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "algo" => self.algorithm = value.parse()?,
            "env" => self.environment = value.parse()?,
            "K" => self.num_actions = parse_num(key, value)?,
            "T" => self.horizon = parse_num(key, value)?,
            "S" => self.switches = parse_num(key, value)?,
            "n" => self.distinct = parse_num(key, value)?,
            "rho" => self.rho = parse_num(key, value)?,
            "gap" => self.gaps = parse_list(key, value)?,
            "seeds" => self.seeds = parse_seeds(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "style" => {
                self.overrides.style = match value {
                    "favoring" => AdversarialStyle::BestActionFavoring,
                    "random-walk" => AdversarialStyle::RandomWalk,
                    _ => return Err(HarnessError::validation(format!("unknown style `{value}`"))),
                }
            }
            "bias" => {
                self.overrides.bias = match value {
                    "biased" => BiasMode::Biased,
                    "unbiased" => BiasMode::Unbiased,
                    _ => return Err(HarnessError::validation(format!("unknown bias mode `{value}`"))),
                }
            }
            "fixed_share" => {
                self.overrides.fixed_share = match value {
                    "variant" => FixedShareKind::Variant,
                    "classic" => FixedShareKind::Classic,
                    _ => {
                        return Err(HarnessError::validation(format!(
                            "unknown fixed-share kind `{value}`"
                        )))
                    }
                }
            }
            "tuning" => {
                self.overrides.untuned = match value {
                    "tuned" => false,
                    "untuned" => true,
                    _ => return Err(HarnessError::validation(format!("unknown tuning `{value}`"))),
                }
            }
            "gamma" => self.overrides.bandit_gamma = Some(parse_num(key, value)?),
            _ => return Err(HarnessError::validation(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Parse(format!("line {}: expected key=value", lineno + 1))
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(text)?;
        Ok(config)
    }

    /// Text accepted by [`ExperimentConfig::from_text`], one key per line.
    pub fn to_text(&self) -> String {
        let o = &self.overrides;
        let mut lines = vec![
            format!("algo={}", self.algorithm),
            format!("env={}", self.environment),
            format!("K={}", self.num_actions),
            format!("T={}", self.horizon),
            format!("S={}", self.switches),
            format!("n={}", self.distinct),
            format!("rho={}", self.rho),
            format!("gap={}", join(&self.gaps)),
            format!("seeds={}", format_seeds(&self.seeds)),
        ];
        if let Some(out) = &self.out {
            lines.push(format!("out={}", out.display()));
        }
        lines.push(format!(
            "style={}",
            match o.style {
                AdversarialStyle::BestActionFavoring => "favoring",
                AdversarialStyle::RandomWalk => "random-walk",
            }
        ));
        lines.push(format!(
            "bias={}",
            match o.bias {
                BiasMode::Biased => "biased",
                BiasMode::Unbiased => "unbiased",
            }
        ));
        lines.push(format!(
            "fixed_share={}",
            match o.fixed_share {
                FixedShareKind::Variant => "variant",
                FixedShareKind::Classic => "classic",
            }
        ));
        lines.push(format!("tuning={}", if o.untuned { "untuned" } else { "tuned" }));
        if let Some(g) = o.bandit_gamma {
            lines.push(format!("gamma={g}"));
        }
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }

    /// Sparsity the bandit is told about: the stream's own when it has one.
    pub fn effective_rho(&self) -> usize {
        match self.environment {
            EnvKind::Sparse => self.rho,
            EnvKind::LbAdversary => 2.min(self.num_actions),
            EnvKind::Piecewise | EnvKind::Stochastic => self.num_actions,
        }
    }

    /// Every violated precondition, or `Ok` when the configuration can run.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let (k, t, s, n) = (self.num_actions, self.horizon, self.switches, self.distinct);
        if t == 0 {
            problems.push("T must be at least 1".to_string());
        }
        if k == 0 {
            problems.push("K must be at least 1".to_string());
        }
        if s == 0 || n == 0 {
            problems.push("S and n must be at least 1".to_string());
        }
        if s > t {
            problems.push(format!("S = {s} exceeds T = {t}"));
        }
        if self.seeds.is_empty() {
            problems.push("at least one seed is required".to_string());
        }
        if self.environment != EnvKind::LbAdversary {
            if n > k.min(s) {
                problems.push(format!("n = {n} exceeds min(S, K) = {}", k.min(s)));
            }
            if n == 1 && s > 1 {
                problems.push("S > 1 needs n ≥ 2".to_string());
            }
        }
        match self.environment {
            EnvKind::Stochastic => {
                if self.gaps.is_empty() {
                    problems.push("stochastic streams need at least one gap".to_string());
                }
                if let Some(g) = self.gaps.iter().find(|g| !(**g > 0.0 && **g <= 2.0)) {
                    problems.push(format!("gap {g} outside (0, 2]"));
                }
            }
            EnvKind::Sparse => {
                if self.rho == 0 || self.rho > k {
                    problems.push(format!("rho = {} outside [1, K]", self.rho));
                }
            }
            EnvKind::LbAdversary => {
                if k < 2 {
                    problems.push("lb-adversary needs K ≥ 2".to_string());
                }
                if s < 2 || s % 2 != 0 {
                    problems.push(format!("lb-adversary needs an even S ≥ 2, got {s}"));
                }
            }
            EnvKind::Piecewise => {}
        }
        match self.algorithm {
            Algorithm::Alg2 if t < 26 => problems.push(format!("alg2 needs T ≥ 26, got {t}")),
            Algorithm::Alg3 if k < 2 => problems.push("alg3 needs K ≥ 2".to_string()),
            _ => {}
        }
        if let Some(g) = self.overrides.bandit_gamma {
            if !(g > 0.0 && g.is_finite()) {
                problems.push(format!("gamma = {g} must be positive"));
            }
        }
        if !problems.is_empty() {
            return Err(HarnessError::Validation(problems));
        }
        // Remaining preconditions live in the constructors.
        crate::run::build_learner(self)?;
        crate::run::build_environment(self, self.seeds[0])?;
        Ok(())
    }
}
