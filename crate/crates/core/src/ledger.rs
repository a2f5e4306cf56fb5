//! Per-round regret bookkeeping against a benchmark sequence.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// CSV header written by [`RegretLedger::write_csv`].
pub const LEDGER_CSV_HEADER: &str =
    "t,expected_loss,sampled_loss,comparator_loss,cum_pseudo_regret,cum_sampled_regret";

/// One round of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretRecord<F> {
    pub t: usize,
    /// `p_t . loss_t` for the distribution the learner sampled from.
    pub expected_loss: F,
    /// `loss_t(I_t)` when the learner drew an action.
    pub sampled_loss: Option<F>,
    pub comparator_loss: F,
    pub cum_pseudo_regret: F,
    pub cum_sampled_regret: Option<F>,
}

impl<F: Scalar> RegretRecord<F> {
    pub fn pseudo_regret(&self) -> F {
        self.expected_loss - self.comparator_loss
    }

    pub fn sampled_regret(&self) -> Option<F> {
        self.sampled_loss.map(|s| s - self.comparator_loss)
    }
}

/// Run identification stored alongside the records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LedgerMeta {
    pub algorithm: String,
    pub environment: String,
    pub seed: u64,
    pub num_actions: usize,
    pub horizon: usize,
    pub switches: usize,
    pub distinct: usize,
    pub rho: usize,
}

/// Cumulative expected regret of one run, round by round.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger<F> {
    pub meta: LedgerMeta,
    records: Vec<RegretRecord<F>>,
}

impl<F: Scalar> RegretLedger<F> {
    pub fn new(meta: LedgerMeta) -> Self {
        Self { meta, records: Vec::new() }
    }

    /// Appends round `t`, where the learner played from `p` and the comparator was
    /// `comparator`. `sampled` is the drawn action, if any.
    ///
    /// `t` must be strictly larger than the previous round.
    pub fn append(
        &mut self,
        t: usize,
        p: &[F],
        loss: &[F],
        comparator: usize,
        sampled: Option<usize>,
    ) -> Result<()> {
        if p.len() != loss.len() {
            return Err(invalid(format!("distribution has {} actions, loss has {}", p.len(), loss.len())));
        }
        if comparator >= loss.len() {
            return Err(invalid(format!("comparator {comparator} out of range")));
        }
        if let Some(s) = sampled {
            if s >= loss.len() {
                return Err(invalid(format!("sampled action {s} out of range")));
            }
        }
        let expected: F = p.iter().zip(loss).map(|(&a, &b)| a * b).sum();
        self.push(t, expected, sampled.map(|s| loss[s]), loss[comparator])
    }

    /// Appends a round from precomputed losses.
    pub fn push(
        &mut self,
        t: usize,
        expected_loss: F,
        sampled_loss: Option<F>,
        comparator_loss: F,
    ) -> Result<()> {
        if let Some(last) = self.records.last() {
            if t <= last.t {
                return Err(invalid(format!("round {t} does not follow round {}", last.t)));
            }
            if sampled_loss.is_some() != last.sampled_loss.is_some() {
                return Err(invalid("sampled-loss column must be present on all rounds or none"));
            }
        }
        let (prev_pseudo, prev_sampled) = self
            .records
            .last()
            .map(|r| (r.cum_pseudo_regret, r.cum_sampled_regret))
            .unwrap_or((F::zero(), sampled_loss.map(|_| F::zero())));
        let cum_pseudo_regret = prev_pseudo + (expected_loss - comparator_loss);
        let cum_sampled_regret = match (prev_sampled, sampled_loss) {
            (Some(c), Some(s)) => Some(c + (s - comparator_loss)),
            _ => None,
        };
        self.records.push(RegretRecord {
            t,
            expected_loss,
            sampled_loss,
            comparator_loss,
            cum_pseudo_regret,
            cum_sampled_regret,
        });
        Ok(())
    }

    pub fn records(&self) -> &[RegretRecord<F>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_pseudo_regret(&self) -> F {
        self.records.last().map_or(F::zero(), |r| r.cum_pseudo_regret)
    }

    pub fn final_sampled_regret(&self) -> Option<F> {
        self.records.last().and_then(|r| r.cum_sampled_regret)
    }

    pub fn cumulative_pseudo_regret(&self) -> Vec<F> {
        self.records.iter().map(|r| r.cum_pseudo_regret).collect()
    }

    /// Writes the ledger as CSV (UTF-8, LF line endings).
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.to_csv_string().as_bytes())
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::with_capacity(64 * (self.records.len() + 1));
        s.push_str(LEDGER_CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = write!(s, "{},{},", r.t, r.expected_loss);
            if let Some(v) = r.sampled_loss {
                let _ = write!(s, "{v}");
            }
            let _ = write!(s, ",{},{},", r.comparator_loss, r.cum_pseudo_regret);
            if let Some(v) = r.cum_sampled_regret {
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }

    /// Parses CSV produced by [`RegretLedger::write_csv`]. Cumulative columns are
    /// recomputed from the per-round columns and checked against the file.
    pub fn from_csv(text: &str, meta: LedgerMeta) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == LEDGER_CSV_HEADER => {}
            other => return Err(invalid(format!("unexpected ledger header {other:?}"))),
        }
        let mut ledger = Self::new(meta);
        for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(invalid(format!("line {}: expected 6 fields", lineno + 2)));
            }
            let num = |s: &str| -> Result<F> {
                s.parse::<f64>()
                    .map(F::lit)
                    .map_err(|e| invalid(format!("line {}: {e}", lineno + 2)))
            };
            let t = fields[0]
                .parse::<usize>()
                .map_err(|e| invalid(format!("line {}: {e}", lineno + 2)))?;
            let sampled = if fields[2].is_empty() { None } else { Some(num(fields[2])?) };
            ledger.push(t, num(fields[1])?, sampled, num(fields[3])?)?;
            let rec = ledger.records.last().expect("just pushed");
            let stored = num(fields[4])?;
            let tol = F::lit(1e-9) * F::from_usize_lossy(t);
            if (rec.cum_pseudo_regret - stored).abs() > tol {
                return Err(invalid(format!(
                    "line {}: cumulative regret {stored} disagrees with recomputed {}",
                    lineno + 2,
                    rec.cum_pseudo_regret
                )));
            }
        }
        Ok(ledger)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ledger() -> RegretLedger<f64> {
        RegretLedger::new(LedgerMeta::default())
    }

    #[test]
    fn zero_loss_keeps_regret() {
        let mut l = ledger();
        l.append(1, &[0.5, 0.5], &[1.0, -1.0], 1, None).unwrap();
        let before = l.final_pseudo_regret();
        l.append(2, &[0.5, 0.5], &[0.0, 0.0], 0, None).unwrap();
        assert_eq!(l.final_pseudo_regret(), before);
    }

    #[test]
    fn telescoping_and_sum() {
        let mut l = ledger();
        l.append(1, &[0.5, 0.5], &[1.0, -1.0], 0, None).unwrap(); // -1
        l.append(2, &[0.5, 0.5], &[1.0, -1.0], 1, None).unwrap(); // +1
        assert_eq!(l.final_pseudo_regret(), 0.0);

        let mut l = ledger();
        for (t, r) in [0.5, 0.25, 0.25].into_iter().enumerate() {
            l.push(t + 1, r, None, 0.0).unwrap();
        }
        assert_eq!(l.final_pseudo_regret(), 1.0);
    }

    #[test]
    fn rejects_non_monotone_rounds() {
        let mut l = ledger();
        l.push(3, 0.0, None, 0.0).unwrap();
        assert!(l.push(3, 0.0, None, 0.0).is_err());
        assert!(l.push(2, 0.0, None, 0.0).is_err());
        assert!(l.push(4, 0.0, Some(1.0), 0.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut l = ledger();
        l.append(1, &[0.5, 0.5], &[1.0, -1.0], 1, Some(0)).unwrap();
        l.append(2, &[1.0, 0.0], &[0.0, 0.5], 1, Some(0)).unwrap();
        let csv = l.to_csv_string();
        assert_eq!(
            csv,
            "t,expected_loss,sampled_loss,comparator_loss,cum_pseudo_regret,cum_sampled_regret\n\
             1,0,1,-1,1,2\n\
             2,0,0,0.5,0.5,1.5\n"
        );
        assert!(!csv.contains('\r'));
        let back = RegretLedger::<f64>::from_csv(&csv, LedgerMeta::default()).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn csv_without_sampling_leaves_columns_empty() {
        let mut l = ledger();
        l.append(1, &[0.5, 0.5], &[1.0, -1.0], 1, None).unwrap();
        assert!(l.to_csv_string().ends_with("1,0,,-1,1,\n"));
    }

    proptest! {
        #[test]
        fn cumulative_matches_brute_force(rounds in proptest::collection::vec(
            (-1.0f64..=1.0, -1.0f64..=1.0), 1..200)
        ) {
            let mut l = ledger();
            for (t, &(e, c)) in rounds.iter().enumerate() {
                l.push(t + 1, e, None, c).unwrap();
            }
            let mut acc = 0.0;
            for r in l.records() {
                acc += r.expected_loss - r.comparator_loss;
                prop_assert_eq!(acc, r.cum_pseudo_regret);
            }
        }
    }
}
