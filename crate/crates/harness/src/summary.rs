//! Aggregates over seeds, regret-bound expressions and growth-rate fits.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use longmem_core::LedgerMeta;

use crate::config::{Algorithm, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::run::{Ledger, SeedDiagnostics, SeedRun};

/// Regret bound a run is compared against, each with leading constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// `sqrt(T (S ln T + n ln K))`.
    One,
    /// `sqrt(T (S ln T + n ln(K ln T)))`.
    Two,
    /// `(ρS)^{1/3} (nT)^{2/3} + n sqrt(Tρ ln K) + n K³ ln T`.
    Four,
    /// `sqrt((S ln T + n ln K) · Σ_t Σ_i p_t(i) r_t(i)²)`; the `One` form when
    /// the variance is unknown.
    Five,
    /// `sqrt(T K S ln(TK))`, the usual switching-regret rate of bandits.
    BanditTypical,
}

impl Theorem {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Alg1 => Self::One,
            Algorithm::Alg2 => Self::Two,
            Algorithm::Alg3 => Self::Four,
            Algorithm::Mpp => Self::Five,
        }
    }
}

impl FromStr for Theorem {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Self::One),
            "2" => Ok(Self::Two),
            "4" => Ok(Self::Four),
            "5" => Ok(Self::Five),
            "bandit" => Ok(Self::BanditTypical),
            _ => Err(HarnessError::validation(format!("unknown theorem `{s}`"))),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::One => "1",
            Self::Two => "2",
            Self::Four => "4",
            Self::Five => "5",
            Self::BanditTypical => "bandit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub num_actions: f64,
    pub horizon: f64,
    pub switches: f64,
    pub distinct: f64,
    pub rho: f64,
    /// `Σ_t Σ_i p_t(i) r_t(i)²`, when measured.
    pub variance: Option<f64>,
}

impl BoundParams {
    pub fn new(num_actions: usize, horizon: usize, switches: usize, distinct: usize, rho: usize) -> Self {
        Self {
            num_actions: num_actions as f64,
            horizon: horizon as f64,
            switches: switches as f64,
            distinct: distinct as f64,
            rho: rho as f64,
            variance: None,
        }
    }

    pub fn from_config(config: &ExperimentConfig) -> Self {
        Self::new(
            config.num_actions,
            config.horizon,
            config.switches,
            config.distinct,
            config.effective_rho(),
        )
    }
}

pub fn bound_value(theorem: Theorem, p: &BoundParams) -> f64 {
    let (k, t, s, n, rho) = (p.num_actions, p.horizon, p.switches, p.distinct, p.rho);
    let complexity = s * t.ln() + n * k.ln();
    match theorem {
        Theorem::One => (t * complexity).sqrt(),
        Theorem::Two => (t * (s * t.ln() + n * (k * t.ln()).ln())).sqrt(),
        Theorem::Four => {
            (rho * s).cbrt() * (n * t).powf(2.0 / 3.0)
                + n * (t * rho * k.ln()).sqrt()
                + n * k.powi(3) * t.ln()
        }
        Theorem::Five => match p.variance {
            Some(v) => (complexity * v).sqrt(),
            None => (t * complexity).sqrt(),
        },
        Theorem::BanditTypical => (t * k * s * (t * k).ln()).sqrt(),
    }
}

/// Least-squares slope of `ln(cum)` against `ln(t)` over `t ≥ T/2`, where `T`
/// is the last round. Rows with `cum ≤ 0` are skipped.
pub fn loglog_tail_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 100 {
        return Err(HarnessError::InsufficientData(format!(
            "{} rounds recorded, at least 100 needed",
            points.len()
        )));
    }
    let last = points.last().map_or(0, |p| p.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|&&(t, cum)| 2 * t >= last && cum > 0.0)
        .map(|&(t, cum)| ((t as f64).ln(), cum.ln()))
        .unzip();
    if xs.len() < 10 {
        return Err(HarnessError::InsufficientData(format!(
            "{} usable points in the tail, at least 10 needed",
            xs.len()
        )));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

pub fn ledger_tail_slope(ledger: &Ledger) -> Result<f64> {
    let points: Vec<(usize, f64)> = ledger
        .records()
        .iter()
        .map(|r| (r.t, r.cum_pseudo_regret))
        .collect();
    loglog_tail_slope(&points)
}

/// Cumulative pseudo-regret averaged over ledgers of equal length.
pub fn mean_curve(ledgers: &[&Ledger]) -> Vec<(usize, f64)> {
    let Some(first) = ledgers.first() else {
        return Vec::new();
    };
    let m = ledgers.len() as f64;
    (0..first.len())
        .map(|i| {
            let t = first.records()[i].t;
            let sum: f64 = ledgers.iter().map(|l| l.records()[i].cum_pseudo_regret).sum();
            (t, sum / m)
        })
        .collect()
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub algorithm: String,
    pub environment: String,
    pub num_actions: usize,
    pub horizon: usize,
    pub switches: usize,
    pub distinct: usize,
    pub rho: usize,
    pub seeds: usize,
    pub theorem: Theorem,
    pub mean_regret: f64,
    pub std_regret: f64,
    pub mean_sampled_regret: Option<f64>,
    pub bound: f64,
    pub ratio: f64,
    /// Tail slope of the seed-averaged regret curve; `None` when too short.
    pub tail_slope: Option<f64>,
    pub max_identity_residual: f64,
    pub max_mpp_restarts: Option<usize>,
}

impl SummaryRecord {
    pub const CSV_HEADER: &'static str = "algorithm,environment,K,T,S,n,rho,seeds,theorem,mean_regret,std_regret,mean_sampled_regret,bound,ratio,tail_slope,max_identity_residual,max_mpp_restarts";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.environment,
            self.num_actions,
            self.horizon,
            self.switches,
            self.distinct,
            self.rho,
            self.seeds,
            self.theorem,
            self.mean_regret,
            self.std_regret,
            opt(self.mean_sampled_regret.map(|v| v.to_string())),
            self.bound,
            self.ratio,
            opt(self.tail_slope.map(|v| v.to_string())),
            self.max_identity_residual,
            opt(self.max_mpp_restarts.map(|v| v.to_string())),
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row())
    }
}

/// Summary against the algorithm's own theorem.
pub fn summarize(config: &ExperimentConfig, runs: &[SeedRun]) -> Result<SummaryRecord> {
    summarize_against(config, runs, Theorem::for_algorithm(config.algorithm))
}

pub fn summarize_against(config: &ExperimentConfig, runs: &[SeedRun], theorem: Theorem) -> Result<SummaryRecord> {
    let ledgers: Vec<&Ledger> = runs.iter().map(|r| &r.ledger).collect();
    let diagnostics: Vec<SeedDiagnostics> = runs.iter().map(|r| r.diagnostics.clone()).collect();
    summarize_parts(config, &ledgers, &diagnostics, theorem)
}

/// Summary computed from ledgers and diagnostics only.
pub fn summarize_parts(
    config: &ExperimentConfig,
    ledgers: &[&Ledger],
    diagnostics: &[SeedDiagnostics],
    theorem: Theorem,
) -> Result<SummaryRecord> {
    if ledgers.is_empty() {
        return Err(HarnessError::InsufficientData("no ledgers to summarize".into()));
    }
    let finals: Vec<f64> = ledgers.iter().map(|l| l.final_pseudo_regret()).collect();
    let (mean_regret, std_regret) = mean_std(&finals);
    let sampled: Option<Vec<f64>> = ledgers.iter().map(|l| l.final_sampled_regret()).collect();
    let mean_sampled_regret = sampled.map(|s| mean_std(&s).0);
    let params = BoundParams::from_config(config);
    let bound = match theorem {
        Theorem::Five => {
            let variances: Option<Vec<f64>> = diagnostics.iter().map(|d| d.mpp_variance).collect();
            match variances {
                Some(v) if v.len() == ledgers.len() => {
                    v.iter()
                        .map(|&var| bound_value(theorem, &BoundParams { variance: Some(var), ..params }))
                        .sum::<f64>()
                        / v.len() as f64
                }
                _ => bound_value(theorem, &params),
            }
        }
        _ => bound_value(theorem, &params),
    };
    let tail_slope = match loglog_tail_slope(&mean_curve(ledgers)) {
        Ok(s) => Some(s),
        Err(HarnessError::InsufficientData(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(SummaryRecord {
        algorithm: config.algorithm.id().to_string(),
        environment: config.environment.id().to_string(),
        num_actions: config.num_actions,
        horizon: config.horizon,
        switches: config.switches,
        distinct: config.distinct,
        rho: config.effective_rho(),
        seeds: ledgers.len(),
        theorem,
        mean_regret,
        std_regret,
        mean_sampled_regret,
        bound,
        ratio: mean_regret / bound,
        tail_slope,
        max_identity_residual: diagnostics.iter().map(|d| d.identity_residual).fold(0.0, f64::max),
        max_mpp_restarts: diagnostics.iter().filter_map(|d| d.mpp_restarts).max(),
    })
}

fn parse_diagnostics(text: &str) -> Result<Vec<(u64, SeedDiagnostics)>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim_end) != Some(crate::run::DIAGNOSTICS_CSV_HEADER) {
        return Err(HarnessError::Parse("unexpected diagnostics header".into()));
    }
    let bad = |line: &str| HarnessError::Parse(format!("malformed diagnostics row `{line}`"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad(line));
            }
            let opt_f64 = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad(line))
                }
            };
            let seed = f[0].parse().map_err(|_| bad(line))?;
            let restarts = if f[2].is_empty() {
                None
            } else {
                Some(f[2].parse().map_err(|_| bad(line))?)
            };
            let stability = match (opt_f64(f[4])?, opt_f64(f[5])?) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            };
            Ok((
                seed,
                SeedDiagnostics {
                    identity_residual: f[1].parse().map_err(|_| bad(line))?,
                    mpp_restarts: restarts,
                    mpp_variance: opt_f64(f[3])?,
                    stability,
                },
            ))
        })
        .collect()
}

/// Recomputes a summary from a directory written by [`crate::run::write_outputs`].
pub fn summarize_dir(dir: &Path, theorem: Theorem) -> Result<SummaryRecord> {
    let config = ExperimentConfig::from_text(&fs::read_to_string(dir.join("config.txt"))?)?;
    let mut ledgers = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        let text = fs::read_to_string(dir.join(format!("ledger_seed{seed}.csv")))?;
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
        ledgers.push(Ledger::from_csv(&text, meta).map_err(|e| HarnessError::Parse(e.to_string()))?);
    }
    let diagnostics = match fs::read_to_string(dir.join("diagnostics.csv")) {
        Ok(text) => parse_diagnostics(&text)?.into_iter().map(|(_, d)| d).collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    summarize_parts(&config, &ledgers.iter().collect::<Vec<_>>(), &diagnostics, theorem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_one_example() {
        let b = bound_value(Theorem::One, &BoundParams::new(16, 10_000, 20, 3, 16));
        assert!((b - 1387.6).abs() < 0.1);
        let stat = bound_value(Theorem::One, &BoundParams::new(16, 10_000, 1, 1, 16));
        assert!((stat - (10_000f64 * (10_000f64.ln() + 16f64.ln())).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn theorem_four_and_bandit_rate() {
        let p = BoundParams::new(20, 100_000, 50, 2, 2);
        let four = bound_value(Theorem::Four, &p);
        let want = 100f64.cbrt() * 200_000f64.powf(2.0 / 3.0)
            + 2.0 * (200_000f64 * 20f64.ln()).sqrt()
            + 2.0 * 8000.0 * 100_000f64.ln();
        assert!((four - want).abs() < 1e-6);
        // With ρ = K and n = S both forms are evaluated.
        let dense = BoundParams::new(10, 10_000, 5, 5, 10);
        assert!(bound_value(Theorem::Four, &dense) > 0.0);
        assert!(bound_value(Theorem::BanditTypical, &dense) > 0.0);
    }

    #[test]
    fn theorem_five_falls_back_to_worst_case() {
        let p = BoundParams::new(16, 5000, 20, 3, 16);
        assert_eq!(bound_value(Theorem::Five, &p), bound_value(Theorem::One, &p));
        let adaptive = bound_value(Theorem::Five, &BoundParams { variance: Some(5000.0), ..p });
        assert!((adaptive - bound_value(Theorem::One, &p)).abs() < 1e-9);
    }

    #[test]
    fn slope_examples() {
        let sqrt: Vec<(usize, f64)> = (1..=10_000).map(|t| (t, (t as f64).sqrt())).collect();
        assert!((loglog_tail_slope(&sqrt).unwrap() - 0.5).abs() < 0.01);
        let log: Vec<(usize, f64)> = (1..=10_000).map(|t| (t, (t as f64).ln())).collect();
        assert!(loglog_tail_slope(&log).unwrap() <= 0.15);
        let flat: Vec<(usize, f64)> = (1..=1000).map(|t| (t, 3.0)).collect();
        assert!(loglog_tail_slope(&flat).unwrap().abs() < 1e-12);
        let short: Vec<(usize, f64)> = (1..=50).map(|t| (t, 1.0)).collect();
        assert!(matches!(loglog_tail_slope(&short), Err(HarnessError::InsufficientData(_))));
        let negative: Vec<(usize, f64)> = (1..=1000).map(|t| (t, -1.0)).collect();
        assert!(matches!(loglog_tail_slope(&negative), Err(HarnessError::InsufficientData(_))));
    }
}
