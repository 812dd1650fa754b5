//! Per-round run records shared by the dense classical learner and the
//! emulated online engine, serializable as JSON-lines.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ledger::QueryLedger;
use crate::losses::ProblemKind;
use crate::scalar::Scalar;

/// What happened in one online round.
///
/// `y_pred` is the prediction the learner acted on: the exact `ŷ` for the
/// dense classical run, the estimate `ỹ` for the emulated run. Optional
/// fields are filled by audit mode or by the classical runner (which gets
/// exact quantities for free).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRow<S> {
    pub t: usize,
    pub y: S,
    pub y_pred: S,
    pub loss: S,
    /// Exact `ŷ = w·x` when available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_hat_exact: Option<S>,
    /// Estimated masked ℓ1 norm `q̃^(t+1)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_est: Option<S>,
    /// Exact masked ℓ1 norm `q^(t+1)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_exact: Option<S>,
    /// Nonzero count of `w^(t+1)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nnz: Option<usize>,
    /// Coordinate drawn by the state-preparation step; `None` when
    /// `w^(t+1)` is identically zero or in classical runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_index: Option<usize>,
}

/// Full record of one online run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace<S> {
    pub kind: ProblemKind,
    pub rounds: Vec<RoundRow<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<QueryLedger<S>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
}

impl<S: Scalar> RunTrace<S> {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// The prediction series the learner acted on (`ŷ` or `ỹ`).
    pub fn predictions(&self) -> Vec<S> {
        self.rounds.iter().map(|r| r.y_pred).collect()
    }

    pub fn labels(&self) -> Vec<S> {
        self.rounds.iter().map(|r| r.y).collect()
    }

    pub fn mean_loss(&self) -> S {
        let n = S::from_usize(self.rounds.len().max(1)).unwrap();
        self.rounds.iter().map(|r| r.loss).sum::<S>() / n
    }

    /// Writes one JSON object per round.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for row in &self.rounds {
            serde_json::to_writer(&mut w, row)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: usize) -> RoundRow<f64> {
        RoundRow {
            t,
            y: 1.0,
            y_pred: 0.5,
            loss: 0.25,
            y_hat_exact: None,
            q_est: Some(0.1),
            q_exact: None,
            nnz: None,
            sampled_index: None,
        }
    }

    #[test]
    fn jsonl_emits_one_line_per_round_without_null_fields() {
        let trace = RunTrace {
            kind: ProblemKind::Squared,
            rounds: vec![row(1), row(2)],
            ledger: None,
            rng_seed: Some(7),
        };
        let mut buf = Vec::new();
        trace.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains("null"));
        assert!(text.contains("\"q_est\":0.1"));
    }
}
