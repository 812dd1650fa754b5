//! The truncation operator, plain gradient descent steps, and the dense
//! classical online learner used as ground truth everywhere else.
//!
//! The truncation operator shrinks an entry toward zero by `alpha` but only
//! while it lies inside the `[-theta, theta]` window; entries outside pass
//! through untouched. Applied every `period_k` rounds with `alpha = g·η`
//! this is what turns online gradient descent into a sparse learner.

use serde::{Deserialize, Serialize};

use crate::data::Example;
use crate::error::{Error, Result};
use crate::losses::{
    loss_grad_scalar_scaled, loss_value, ProblemKind, DEFAULT_LOGISTIC_STEP_FACTOR,
};
use crate::scalar::Scalar;
use crate::trace::{RoundRow, RunTrace};

/// Per-round shrinkage magnitudes `g^(t)`, all nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GravitySchedule<S> {
    /// The default: `g^(1) = … = g^(T) = g`.
    Constant(S),
    /// Explicit per-round values, 1-indexed by round.
    PerRound(Vec<S>),
}

impl<S: Scalar> GravitySchedule<S> {
    pub fn constant(g: S) -> Self {
        GravitySchedule::Constant(g)
    }

    /// Zero gravity: truncation becomes the identity.
    pub fn none() -> Self {
        GravitySchedule::Constant(S::zero())
    }

    /// `g^(t)` for a 1-based round index.
    pub fn at(&self, t: usize) -> S {
        match self {
            GravitySchedule::Constant(g) => *g,
            GravitySchedule::PerRound(v) => v[t - 1],
        }
    }

    pub fn g_max(&self) -> S {
        match self {
            GravitySchedule::Constant(g) => *g,
            GravitySchedule::PerRound(v) => v.iter().copied().fold(S::zero(), S::max),
        }
    }

    /// Checks nonnegativity, finiteness and (for per-round schedules)
    /// coverage of `t_rounds` rounds.
    pub fn validate(&self, t_rounds: usize) -> Result<()> {
        match self {
            GravitySchedule::Constant(g) => {
                if !g.is_finite() || *g < S::zero() {
                    return Err(Error::invalid_param("gravity", "must be finite and >= 0"));
                }
            }
            GravitySchedule::PerRound(v) => {
                if v.len() < t_rounds {
                    return Err(Error::invalid_param(
                        "gravity",
                        format!("schedule has {} values, run needs {t_rounds}", v.len()),
                    ));
                }
                if v.iter().any(|g| !g.is_finite() || *g < S::zero()) {
                    return Err(Error::invalid_param("gravity", "must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }
}

/// Parameters of the truncated-gradient update rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams<S> {
    /// Truncation window half-width `θ > 0`.
    pub theta: S,
    /// Learning rate `η ∈ (0, 1)`.
    pub eta: S,
    pub gravity: GravitySchedule<S>,
    /// Truncate every `period_k`-th round (1 = every round).
    pub period_k: usize,
    /// Multiplier on the logistic update scalar; 2 matches the lazy-oracle
    /// recurrence, 1 is the textbook gradient step.
    pub logistic_step_factor: S,
}

impl<S: Scalar> TruncationParams<S> {
    pub fn new(theta: S, eta: S, gravity: GravitySchedule<S>) -> Result<Self> {
        let params = TruncationParams {
            theta,
            eta,
            gravity,
            period_k: 1,
            logistic_step_factor: S::from_f64_const(DEFAULT_LOGISTIC_STEP_FACTOR),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_period_k(mut self, period_k: usize) -> Result<Self> {
        self.period_k = period_k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_logistic_step_factor(mut self, factor: S) -> Result<Self> {
        self.logistic_step_factor = factor;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta.is_nan() || self.theta <= S::zero() {
            return Err(Error::invalid_param("theta", "must be > 0"));
        }
        if !(self.eta > S::zero() && self.eta < S::one()) {
            return Err(Error::invalid_param("eta", "must lie in (0, 1)"));
        }
        if self.period_k == 0 {
            return Err(Error::invalid_param("period_k", "must be >= 1"));
        }
        if !self.logistic_step_factor.is_finite() || self.logistic_step_factor <= S::zero() {
            return Err(Error::invalid_param(
                "logistic_step_factor",
                "must be finite and > 0",
            ));
        }
        self.gravity.validate(0)
    }
}

/// A dense weight vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector<S>(Vec<S>);

impl<S: Scalar> WeightVector<S> {
    pub fn zeros(dimension: usize) -> Self {
        WeightVector(vec![S::zero(); dimension])
    }

    pub fn from_vec(entries: Vec<S>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "weight vector",
            });
        }
        Ok(WeightVector(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[S] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<S> {
        self.0
    }

    pub fn dot(&self, x: &[S]) -> S {
        self.0.iter().zip(x.iter()).map(|(&w, &v)| w * v).sum()
    }

    pub fn l1_norm(&self) -> S {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> S {
        self.0.iter().map(|&v| v * v).sum::<S>().sqrt()
    }

    pub fn nnz(&self) -> usize {
        self.0.iter().filter(|&&v| v != S::zero()).count()
    }

    /// `‖w·I(|w| ≤ θ)‖₁`, the truncatable mass.
    pub fn masked_l1(&self, theta: S) -> S {
        self.0
            .iter()
            .filter(|v| v.abs() <= theta)
            .map(|v| v.abs())
            .sum()
    }
}

impl<S> std::ops::Index<usize> for WeightVector<S> {
    type Output = S;
    fn index(&self, j: usize) -> &S {
        &self.0[j]
    }
}

/// Unchecked truncation kernel shared by the hot loops.
#[inline]
pub(crate) fn truncate_raw<S: Scalar>(w: S, alpha: S, theta: S) -> S {
    if w >= S::zero() {
        if w <= theta {
            (w - alpha).max(S::zero())
        } else {
            w
        }
    } else if w >= -theta {
        (w + alpha).min(S::zero())
    } else {
        w
    }
}

/// Applies the truncation operator to a single entry.
///
/// Returns `max{w-α, 0}` for `0 ≤ w ≤ θ`, `min{w+α, 0}` for `-θ ≤ w ≤ 0`,
/// and `w` unchanged for `|w| > θ`. Both boundaries `|w| = θ` truncate.
pub fn truncate_entry<S: Scalar>(w: S, alpha: S, theta: S) -> Result<S> {
    if !w.is_finite() {
        return Err(Error::NonFinite {
            context: "truncate_entry input",
        });
    }
    if alpha.is_nan() || alpha < S::zero() {
        return Err(Error::invalid_param("alpha", "must be >= 0"));
    }
    if theta.is_nan() || theta <= S::zero() {
        return Err(Error::invalid_param("theta", "must be > 0"));
    }
    Ok(truncate_raw(w, alpha, theta))
}

/// Entrywise [`truncate_entry`].
pub fn truncate_vector<S: Scalar>(
    w: &WeightVector<S>,
    alpha: S,
    theta: S,
) -> Result<WeightVector<S>> {
    let entries = w
        .as_slice()
        .iter()
        .map(|&v| truncate_entry(v, alpha, theta))
        .collect::<Result<Vec<S>>>()?;
    Ok(WeightVector(entries))
}

/// One plain gradient-descent step `w - η·grad`.
pub fn gd_step<S: Scalar>(
    w: &WeightVector<S>,
    grad: &WeightVector<S>,
    eta: S,
) -> Result<WeightVector<S>> {
    if w.len() != grad.len() {
        return Err(Error::DimensionMismatch {
            context: "gd_step",
            expected: w.len(),
            got: grad.len(),
        });
    }
    Ok(WeightVector(
        w.as_slice()
            .iter()
            .zip(grad.as_slice())
            .map(|(&wi, &gi)| wi - eta * gi)
            .collect(),
    ))
}

fn validate_stream<S: Scalar>(kind: ProblemKind, stream: &[Example<S>]) -> Result<usize> {
    let first = stream.first().ok_or(Error::EmptyInput {
        context: "online run needs at least one example",
    })?;
    let d = first.x.len();
    if d == 0 {
        return Err(Error::EmptyInput {
            context: "examples must have at least one feature",
        });
    }
    for (i, ex) in stream.iter().enumerate() {
        if ex.x.len() != d {
            return Err(Error::DimensionMismatch {
                context: "stream example",
                expected: d,
                got: ex.x.len(),
            });
        }
        if ex.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "example features",
            });
        }
        kind.validate_label(ex.y).map_err(|_| Error::InvalidLabel {
            kind: kind.name(),
            label: ex.y.to_f64_lossy(),
        })?;
        let _ = i;
    }
    Ok(d)
}

/// Runs the dense truncated-gradient online learner for the whole stream.
///
/// Each round predicts `ŷ = w·x`, receives the label, updates every
/// coordinate with `w' = w + η·s·x`, and truncates with `α^(t) = g^(t)·η`
/// on every `period_k`-th round. When `prediction_override` is given, its
/// values are used in place of `ŷ` for the loss and the update — this is
/// the hook that lets the dense learner replay an estimated prediction
/// sequence for equivalence testing; it is not part of the learner's
/// public semantics.
pub fn classical_online_run<S: Scalar>(
    kind: ProblemKind,
    stream: &[Example<S>],
    params: &TruncationParams<S>,
    prediction_override: Option<&[S]>,
) -> Result<RunTrace<S>> {
    params.validate()?;
    let d = validate_stream(kind, stream)?;
    let t_rounds = stream.len();
    params.gravity.validate(t_rounds)?;
    if let Some(ov) = prediction_override {
        if ov.len() != t_rounds {
            return Err(Error::DimensionMismatch {
                context: "prediction_override",
                expected: t_rounds,
                got: ov.len(),
            });
        }
    }

    let mut w = vec![S::zero(); d];
    let mut rounds = Vec::with_capacity(t_rounds);
    for (idx, ex) in stream.iter().enumerate() {
        let t = idx + 1;
        let y_hat: S = w.iter().zip(ex.x.iter()).map(|(&a, &b)| a * b).sum();
        let y_used = prediction_override.map_or(y_hat, |ov| ov[idx]);
        let loss = loss_value(kind, y_used, ex.y)?;
        let s = loss_grad_scalar_scaled(kind, y_used, ex.y, params.logistic_step_factor)?;

        let truncate_now = t % params.period_k == 0;
        let alpha = params.gravity.at(t) * params.eta;
        for (wj, &xj) in w.iter_mut().zip(ex.x.iter()) {
            let updated = *wj + params.eta * s * xj;
            *wj = if truncate_now {
                truncate_raw(updated, alpha, params.theta)
            } else {
                updated
            };
        }

        let q_exact: S = w
            .iter()
            .filter(|v| v.abs() <= params.theta)
            .map(|v| v.abs())
            .sum();
        let nnz = w.iter().filter(|&&v| v != S::zero()).count();
        rounds.push(RoundRow {
            t,
            y: ex.y,
            y_pred: y_used,
            loss,
            y_hat_exact: Some(y_hat),
            q_est: None,
            q_exact: Some(q_exact),
            nnz: Some(nnz),
            sampled_index: None,
        });
    }

    Ok(RunTrace {
        kind,
        rounds,
        ledger: None,
        rng_seed: None,
    })
}

/// The final weight vector of a classical run, recomputed densely.
///
/// Convenience for tests and the regret harness; identical recurrence to
/// [`classical_online_run`].
pub fn classical_final_weights<S: Scalar>(
    kind: ProblemKind,
    stream: &[Example<S>],
    params: &TruncationParams<S>,
    prediction_override: Option<&[S]>,
) -> Result<WeightVector<S>> {
    params.validate()?;
    let d = validate_stream(kind, stream)?;
    params.gravity.validate(stream.len())?;
    let mut w = vec![S::zero(); d];
    for (idx, ex) in stream.iter().enumerate() {
        let t = idx + 1;
        let y_hat: S = w.iter().zip(ex.x.iter()).map(|(&a, &b)| a * b).sum();
        let y_used = prediction_override.map_or(y_hat, |ov| ov[idx]);
        let s = loss_grad_scalar_scaled(kind, y_used, ex.y, params.logistic_step_factor)?;
        let truncate_now = t % params.period_k == 0;
        let alpha = params.gravity.at(t) * params.eta;
        for (wj, &xj) in w.iter_mut().zip(ex.x.iter()) {
            let updated = *wj + params.eta * s * xj;
            *wj = if truncate_now {
                truncate_raw(updated, alpha, params.theta)
            } else {
                updated
            };
        }
    }
    Ok(WeightVector(w))
}
