//! Regret harness: hindsight comparators, the gravity-regularized regret
//! quantities, closed-form bound evaluation, and scaling experiments.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{synth_dataset, Example, SyntheticSpec};
use crate::engine::{audit_run, EngineParams};
use crate::error::{Error, Result};
use crate::losses::{loss_constants, loss_grad_scalar_scaled, loss_value, ProblemKind};
use crate::scalar::Scalar;
use crate::trace::RunTrace;
use crate::truncation::{
    classical_online_run, truncate_raw, GravitySchedule, TruncationParams, WeightVector,
};

/// How the comparator was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparatorMethod {
    NormalEquations,
    BatchDescent,
}

/// The best fixed weight vector in hindsight, with bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparatorResult<S> {
    pub u_star: WeightVector<S>,
    /// Total (unnormalized) loss of `u_star` on the dataset.
    pub total_loss: S,
    pub method: ComparatorMethod,
    pub converged: bool,
    pub iterations: usize,
}

/// Tuning for the batch-descent comparators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparatorConfig<S> {
    pub max_iters: usize,
    /// Stop when `‖∇(total loss)‖ ≤ grad_tol_factor·max(1, total loss)`.
    pub grad_tol_factor: S,
}

impl<S: Scalar> Default for ComparatorConfig<S> {
    fn default() -> Self {
        ComparatorConfig {
            max_iters: 100_000,
            grad_tol_factor: S::from_f64_const(1e-8),
        }
    }
}

impl<S: Scalar> ComparatorConfig<S> {
    /// The cap the sweep harnesses use; accelerated descent is far inside
    /// any interesting tolerance by then.
    pub fn capped(max_iters: usize) -> Self {
        ComparatorConfig {
            max_iters,
            ..Default::default()
        }
    }
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b.iter()).map(|(&x, &y)| x * y).sum()
}

/// Minimum-norm least-squares solution via SVD (solved in `f64`).
fn squared_comparator<S: Scalar>(
    dataset: &[Example<S>],
    config: &ComparatorConfig<S>,
) -> Result<ComparatorResult<S>> {
    let rows = dataset.len();
    let d = dataset[0].x.len();
    let mut flat = Vec::with_capacity(rows * d);
    for ex in dataset {
        flat.extend(ex.x.iter().map(|v| v.to_f64_lossy()));
    }
    let x = DMatrix::from_row_slice(rows, d, &flat);
    let y = DVector::from_iterator(rows, dataset.iter().map(|e| e.y.to_f64_lossy()));

    let svd = x.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = sigma_max.max(1.0) * 1e-12;
    let u = svd
        .solve(&y, cutoff)
        .map_err(|e| Error::invalid_param("least squares", e.to_string()))?;

    // Residual-gradient convergence check: ‖Xᵀ(Xu - y)‖ ≤ tol·‖Xᵀy‖.
    let residual = &x * &u - &y;
    let grad = x.transpose() * residual;
    let ref_norm = (x.transpose() * &y).norm();
    let converged = grad.norm() <= config.grad_tol_factor.to_f64_lossy() * ref_norm.max(1e-300);

    let u_star: Vec<S> = u.iter().map(|&v| S::from_f64_const(v)).collect();
    let total_loss = dataset
        .iter()
        .map(|ex| {
            let r = dot(&u_star, &ex.x) - ex.y;
            r * r
        })
        .sum();
    Ok(ComparatorResult {
        u_star: WeightVector::from_vec(u_star)?,
        total_loss,
        method: ComparatorMethod::NormalEquations,
        converged,
        iterations: 0,
    })
}

/// Width of the quadratic zone smoothing the hinge kink for the descent
/// comparator; the induced objective bias is at most `μ/2` per example.
const HINGE_SMOOTHING: f64 = 1e-3;

/// Deterministic accelerated full-batch descent on the mean loss,
/// starting from zero with a fixed momentum schedule. Logistic descends
/// its exact smooth loss; hinge descends a Huber-smoothed hinge and is
/// scored on the true hinge loss (best iterate kept).
fn descent_comparator<S: Scalar>(
    kind: ProblemKind,
    dataset: &[Example<S>],
    config: &ComparatorConfig<S>,
) -> Result<ComparatorResult<S>> {
    let d = dataset[0].x.len();
    let n = S::from_usize(dataset.len()).unwrap();
    let mean_sq_norm: S = dataset.iter().map(|e| dot(&e.x, &e.x)).sum::<S>() / n;
    let mu = S::from_f64_const(HINGE_SMOOTHING);

    let total_loss = |u: &[S]| -> S {
        dataset
            .iter()
            .map(|ex| loss_value(kind, dot(u, &ex.x), ex.y).unwrap())
            .sum()
    };
    // Update scalar s = -∂h/∂ŷ of the (possibly smoothed) surrogate.
    let surrogate_scalar = |pred: S, y: S| -> S {
        match kind {
            ProblemKind::Logistic => loss_grad_scalar_scaled(kind, pred, y, S::one()).unwrap(),
            ProblemKind::Hinge => {
                let margin = y * pred;
                if margin < S::one() - mu {
                    y
                } else if margin < S::one() {
                    y * (S::one() - margin) / mu
                } else {
                    S::zero()
                }
            }
            ProblemKind::Squared => unreachable!("squared uses the normal-equations path"),
        }
    };
    // Mean surrogate gradient; returns its squared norm.
    let mean_grad = |u: &[S], g: &mut [S]| -> S {
        g.iter_mut().for_each(|v| *v = S::zero());
        for ex in dataset {
            let s = surrogate_scalar(dot(u, &ex.x), ex.y);
            for (gj, &xj) in g.iter_mut().zip(ex.x.iter()) {
                *gj = *gj - s * xj / n;
            }
        }
        dot(g, g)
    };

    // Curvature of the mean surrogate: ‖x‖²/4 for logistic, ‖x‖²/μ for
    // the smoothed hinge.
    let lipschitz = match kind {
        ProblemKind::Logistic => mean_sq_norm / S::from_f64_const(4.0),
        _ => mean_sq_norm / mu,
    }
    .max(S::from_f64_const(1e-12));
    let step = lipschitz.recip();

    let mut u = vec![S::zero(); d];
    let mut u_prev = vec![S::zero(); d];
    let mut y_point = vec![S::zero(); d];
    let mut grad = vec![S::zero(); d];
    let mut momentum = S::one();
    let mut best_u = u.clone();
    let mut best_obj = total_loss(&u);
    let mut converged = false;
    let mut iterations = 0usize;

    for k in 0..config.max_iters {
        iterations = k + 1;
        let _ = mean_grad(&y_point, &mut grad);
        u_prev.copy_from_slice(&u);
        for ((uj, &yj), &gj) in u.iter_mut().zip(y_point.iter()).zip(grad.iter()) {
            *uj = yj - step * gj;
        }
        let next_momentum = (S::one()
            + (S::one() + S::from_f64_const(4.0) * momentum * momentum).sqrt())
            / S::from_f64_const(2.0);
        let mix = (momentum - S::one()) / next_momentum;
        for ((yj, &uj), &pj) in y_point.iter_mut().zip(u.iter()).zip(u_prev.iter()) {
            *yj = uj + mix * (uj - pj);
        }
        momentum = next_momentum;

        let obj = total_loss(&u);
        if obj < best_obj {
            best_obj = obj;
            best_u.copy_from_slice(&u);
        }
        // Exit on the spec tolerance: total surrogate gradient small
        // relative to the total loss. Checked periodically; the extra
        // gradient pass is not free.
        if k % 16 == 0 || k + 1 == config.max_iters {
            let grad_sq_at_u = mean_grad(&u, &mut grad);
            let total_grad_norm = n * grad_sq_at_u.sqrt();
            if total_grad_norm <= config.grad_tol_factor * obj.max(S::one()) {
                converged = true;
                break;
            }
        }
    }

    Ok(ComparatorResult {
        u_star: WeightVector::from_vec(best_u)?,
        total_loss: best_obj,
        method: ComparatorMethod::BatchDescent,
        converged,
        iterations,
    })
}

/// Finds the best fixed strategy in hindsight: the minimizer of the plain
/// total loss over the whole dataset (no gravity term).
pub fn best_fixed_comparator<S: Scalar>(
    kind: ProblemKind,
    dataset: &[Example<S>],
    config: &ComparatorConfig<S>,
) -> Result<ComparatorResult<S>> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput {
            context: "comparator needs at least one example",
        });
    }
    match kind {
        ProblemKind::Squared => squared_comparator(dataset, config),
        ProblemKind::Logistic | ProblemKind::Hinge => descent_comparator(kind, dataset, config),
    }
}

/// Which round's masked-norm estimate multiplies `g^(t)` in the LHS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QIndexConvention {
    /// `g^(t)·q̃^(t)` with `q̃^(1) := 0` (the zero initial weights carry no
    /// mass).
    Current,
    /// `g^(t)·q̃^(t+1)`.
    Next,
}

impl QIndexConvention {
    /// The convention each problem's bound is written with.
    pub fn for_kind(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Logistic => QIndexConvention::Current,
            ProblemKind::Hinge | ProblemKind::Squared => QIndexConvention::Next,
        }
    }
}

/// Replays the trajectory driven by the recorded predictions and returns
/// the per-round `‖u·I(|w^(t+1)| ≤ θ)‖₁` series.
fn masked_u_l1_series<S: Scalar>(
    kind: ProblemKind,
    stream: &[Example<S>],
    params: &TruncationParams<S>,
    preds: &[S],
    u: &[S],
) -> Result<Vec<S>> {
    let d = stream[0].x.len();
    if u.len() != d {
        return Err(Error::DimensionMismatch {
            context: "comparator vector",
            expected: d,
            got: u.len(),
        });
    }
    let mut w = vec![S::zero(); d];
    let mut series = Vec::with_capacity(stream.len());
    for (idx, ex) in stream.iter().enumerate() {
        let t = idx + 1;
        let s = loss_grad_scalar_scaled(kind, preds[idx], ex.y, params.logistic_step_factor)?;
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
        let masked: S = w
            .iter()
            .zip(u.iter())
            .filter(|(wj, _)| wj.abs() <= params.theta)
            .map(|(_, uj)| uj.abs())
            .sum();
        series.push(masked);
    }
    Ok(series)
}

fn q_series<S: Scalar>(trace: &RunTrace<S>, convention: QIndexConvention) -> Result<Vec<S>> {
    let q_at = |idx: usize| -> Result<S> {
        let row = &trace.rounds[idx];
        row.q_est.or(row.q_exact).ok_or(Error::EmptyInput {
            context: "trace has neither estimated nor exact q",
        })
    };
    match convention {
        QIndexConvention::Next => (0..trace.len()).map(q_at).collect(),
        QIndexConvention::Current => {
            let mut out = Vec::with_capacity(trace.len());
            out.push(S::zero());
            for idx in 0..trace.len() - 1 {
                out.push(q_at(idx)?);
            }
            Ok(out)
        }
    }
}

/// The gravity-regularized regret left-hand side with the per-problem
/// index convention:
///
/// `(1/T)[Σ h(ỹ, y) + Σ g·q̃ - Σ h(u·x, y) - Σ g·‖u·I(|w^(t+1)| ≤ θ)‖₁]`.
pub fn regularized_regret_lhs<S: Scalar>(
    trace: &RunTrace<S>,
    stream: &[Example<S>],
    u: &[S],
    params: &TruncationParams<S>,
) -> Result<S> {
    regularized_regret_lhs_with(
        trace,
        stream,
        u,
        params,
        QIndexConvention::for_kind(trace.kind),
    )
}

/// As [`regularized_regret_lhs`] with an explicit q-index convention.
pub fn regularized_regret_lhs_with<S: Scalar>(
    trace: &RunTrace<S>,
    stream: &[Example<S>],
    u: &[S],
    params: &TruncationParams<S>,
    convention: QIndexConvention,
) -> Result<S> {
    if trace.len() != stream.len() {
        return Err(Error::DimensionMismatch {
            context: "trace vs stream length",
            expected: stream.len(),
            got: trace.len(),
        });
    }
    if trace.is_empty() {
        return Err(Error::EmptyInput {
            context: "empty trace",
        });
    }
    let kind = trace.kind;
    let t_count = S::from_usize(trace.len()).unwrap();
    let preds = trace.predictions();
    let q = q_series(trace, convention)?;
    let u_mask = masked_u_l1_series(kind, stream, params, &preds, u)?;

    let mut alg_loss = S::zero();
    let mut alg_gravity = S::zero();
    let mut u_loss = S::zero();
    let mut u_gravity = S::zero();
    for (idx, ex) in stream.iter().enumerate() {
        let t = idx + 1;
        let g = params.gravity.at(t);
        alg_loss = alg_loss + trace.rounds[idx].loss;
        alg_gravity = alg_gravity + g * q[idx];
        u_loss = u_loss + loss_value(kind, dot(u, &ex.x), ex.y)?;
        u_gravity = u_gravity + g * u_mask[idx];
    }
    Ok((alg_loss + alg_gravity - u_loss - u_gravity) / t_count)
}

/// The per-problem closed-form right-hand side. `d_bound` is the
/// prediction-error cap and is required for (and only for) least squares.
pub fn theorem_rhs<S: Scalar>(
    kind: ProblemKind,
    t_rounds: usize,
    c_bound: S,
    g_max: S,
    u_norm2: S,
    d_bound: Option<S>,
) -> Result<S> {
    if t_rounds == 0 {
        return Err(Error::invalid_param("t_rounds", "must be >= 1"));
    }
    if c_bound.is_nan() || c_bound <= S::zero() {
        return Err(Error::invalid_param("c_bound", "must be > 0"));
    }
    if g_max < S::zero() || u_norm2 < S::zero() {
        return Err(Error::invalid_param("theorem_rhs", "negative norm input"));
    }
    let sqrt_t = S::from_usize(t_rounds).unwrap().sqrt();
    let c2 = c_bound * c_bound;
    let u2 = u_norm2 * u_norm2;
    let two = S::from_f64_const(2.0);
    Ok(match kind {
        ProblemKind::Logistic => (S::one() + c2 * (two + g_max + u2)) / (two * sqrt_t),
        ProblemKind::Hinge => (two + c2 * (g_max + u2)) / (two * sqrt_t),
        ProblemKind::Squared => {
            let d = d_bound.ok_or_else(|| {
                Error::invalid_param("d_bound", "required for the squared-loss bound")
            })?;
            if d < S::zero() {
                return Err(Error::invalid_param("d_bound", "must be >= 0"));
            }
            c2 * (c_bound * d + g_max + u2) / sqrt_t
        }
    })
}

/// One evaluated bound: both sides plus bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport<S> {
    pub lhs: S,
    pub rhs: S,
    pub comparator_norm: S,
    pub held: bool,
    /// Set when an explicit prediction-error cap was violated by the run;
    /// such a report is inconclusive rather than failed.
    pub assumption_violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_bound: Option<S>,
    pub per_round_loss: Vec<S>,
    pub per_round_gravity_penalty: Vec<S>,
}

/// Evaluates both sides of the classical deterministic regret inequality
/// on an exact run:
///
/// `(1-A·η/2)/T·Σ L(w^(t)) + (1/T)·Σ g^(t)·q^(t+1)`
/// `  ≤ η·B/2 + ‖u‖²/(2ηT) + (1/T)·Σ [L(u) + g^(t)·‖u·I(|w^(t+1)| ≤ θ)‖₁]`.
///
/// This is a theorem for standard-gradient trajectories (for logistic runs
/// that means `logistic_step_factor = 1`) with per-round truncation, so
/// `held` must come back true on every valid instance.
pub fn fact_c1_check<S: Scalar>(
    trace: &RunTrace<S>,
    stream: &[Example<S>],
    u: &[S],
    params: &TruncationParams<S>,
    c_bound: S,
) -> Result<RegretReport<S>> {
    if trace.len() != stream.len() || trace.is_empty() {
        return Err(Error::EmptyInput {
            context: "fact check needs a non-empty matching trace",
        });
    }
    let kind = trace.kind;
    let consts = loss_constants(kind, c_bound)?;
    let eta = params.eta;
    let half = S::from_f64_const(0.5);
    let prefactor = S::one() - half * consts.a * eta;
    if prefactor <= S::zero() {
        return Err(Error::invalid_param(
            "eta",
            "prefactor 1 - A·η/2 must stay positive",
        ));
    }

    let t_count = S::from_usize(trace.len()).unwrap();
    let preds = trace.predictions();
    let u_mask = masked_u_l1_series(kind, stream, params, &preds, u)?;

    let mut loss_sum = S::zero();
    let mut gravity_sum = S::zero();
    let mut u_side = S::zero();
    let mut per_round_loss = Vec::with_capacity(trace.len());
    let mut per_round_gravity = Vec::with_capacity(trace.len());
    for (idx, ex) in stream.iter().enumerate() {
        let row = &trace.rounds[idx];
        let q = row.q_exact.ok_or(Error::EmptyInput {
            context: "fact check needs exact q from a classical run",
        })?;
        let g = params.gravity.at(idx + 1);
        loss_sum = loss_sum + row.loss;
        gravity_sum = gravity_sum + g * q;
        u_side = u_side + loss_value(kind, dot(u, &ex.x), ex.y)? + g * u_mask[idx];
        per_round_loss.push(row.loss);
        per_round_gravity.push(g * q);
    }

    let lhs = prefactor * loss_sum / t_count + gravity_sum / t_count;
    let u_norm2 = dot(u, u).sqrt();
    let rhs = half * eta * consts.b
        + u_norm2 * u_norm2 / (S::from_f64_const(2.0) * eta * t_count)
        + u_side / t_count;

    Ok(RegretReport {
        lhs,
        rhs,
        comparator_norm: u_norm2,
        held: lhs <= rhs,
        assumption_violated: false,
        d_bound: None,
        per_round_loss,
        per_round_gravity_penalty: per_round_gravity,
    })
}

/// Whether a sweep runs the exact dense learner or the emulated engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    ClassicalExact,
    QuantumEmulated,
}

/// One theorem-bound evaluation at theorem presets on synthetic data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSweepConfig<S> {
    pub kind: ProblemKind,
    pub t_rounds: usize,
    pub dimension: usize,
    pub seeds: usize,
    pub delta: S,
    pub gravity_g: S,
    pub theta: S,
    pub c_bound: S,
    pub informative_fraction: f64,
    pub noise_level: S,
    /// Optional explicit prediction-error cap for least squares; when
    /// absent the observed maximum is used.
    pub d_bound: Option<S>,
    pub base_seed: u64,
    /// Iteration cap for the hindsight comparator.
    pub comparator_max_iters: usize,
}

impl<S: Scalar> BoundSweepConfig<S> {
    pub fn new(kind: ProblemKind, t_rounds: usize, dimension: usize, seeds: usize) -> Self {
        BoundSweepConfig {
            kind,
            t_rounds,
            dimension,
            seeds,
            delta: S::from_f64_const(0.1),
            gravity_g: S::from_f64_const(0.1),
            theta: S::one(),
            c_bound: S::one(),
            informative_fraction: 0.1,
            noise_level: S::from_f64_const(0.1),
            d_bound: None,
            base_seed: 0,
            comparator_max_iters: 2000,
        }
    }
}

/// Outcome of a bound-holding sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSweepResult<S> {
    pub reports: Vec<RegretReport<S>>,
    /// Fraction of conclusive (non-assumption-violated) runs that held.
    pub held_fraction: f64,
}

/// Runs one emulated round-trip at theorem presets and evaluates the
/// per-problem bound.
pub fn theorem_bound_report<S: Scalar>(
    config: &BoundSweepConfig<S>,
    seed: u64,
) -> Result<RegretReport<S>> {
    let spec = SyntheticSpec::new(config.kind, config.dimension, config.t_rounds)
        .with_informative_fraction(config.informative_fraction)
        .with_noise_level(config.noise_level)
        .with_c_bound(config.c_bound);
    let mut rng = crate::estimators::derive_rng(seed, u64::MAX);
    let dataset = synth_dataset(&spec, &mut rng)?;

    let params = EngineParams::theorem(
        config.kind,
        config.t_rounds,
        config.dimension,
        config.c_bound,
        config.delta,
        config.theta,
        GravitySchedule::constant(config.gravity_g),
        seed,
    )?;
    let trace = audit_run(&params, &dataset.examples)?;

    let comparator = best_fixed_comparator(
        config.kind,
        &dataset.examples,
        &ComparatorConfig::capped(config.comparator_max_iters),
    )?;
    let u = comparator.u_star.as_slice();

    let lhs = regularized_regret_lhs(&trace, &dataset.examples, u, &params.trunc)?;

    // Prediction-error cap for least squares: observed unless pinned.
    let observed_d = trace
        .rounds
        .iter()
        .map(|r| (r.y - r.y_hat_exact.expect("audit run records exact ŷ")).abs())
        .fold(S::zero(), S::max);
    let (d_bound, assumption_violated) = match (config.kind, config.d_bound) {
        (ProblemKind::Squared, Some(cap)) => (Some(cap), observed_d > cap),
        (ProblemKind::Squared, None) => (Some(observed_d), false),
        _ => (None, false),
    };

    let u_norm = comparator.u_star.l2_norm();
    let rhs = theorem_rhs(
        config.kind,
        config.t_rounds,
        config.c_bound,
        params.trunc.gravity.g_max(),
        u_norm,
        d_bound,
    )?;

    let per_round_loss = trace.rounds.iter().map(|r| r.loss).collect();
    let per_round_gravity = trace
        .rounds
        .iter()
        .enumerate()
        .map(|(idx, r)| params.trunc.gravity.at(idx + 1) * r.q_est.unwrap_or(S::zero()))
        .collect();

    Ok(RegretReport {
        lhs,
        rhs,
        comparator_norm: u_norm,
        held: lhs <= rhs,
        assumption_violated,
        d_bound,
        per_round_loss,
        per_round_gravity_penalty: per_round_gravity,
    })
}

/// Sweeps seeds in parallel and aggregates the holding fraction.
pub fn theorem_bound_sweep<S: Scalar>(config: &BoundSweepConfig<S>) -> Result<BoundSweepResult<S>> {
    let reports: Vec<RegretReport<S>> = (0..config.seeds)
        .into_par_iter()
        .map(|i| theorem_bound_report(config, config.base_seed + i as u64))
        .collect::<Result<Vec<_>>>()?;
    let conclusive: Vec<&RegretReport<S>> =
        reports.iter().filter(|r| !r.assumption_violated).collect();
    let held = conclusive.iter().filter(|r| r.held).count();
    let held_fraction = if conclusive.is_empty() {
        0.0
    } else {
        held as f64 / conclusive.len() as f64
    };
    Ok(BoundSweepResult {
        reports,
        held_fraction,
    })
}

/// Configuration for the regret-vs-horizon scaling experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig<S> {
    pub kind: ProblemKind,
    pub t_grid: Vec<usize>,
    pub seeds: usize,
    pub dimension: usize,
    pub mode: RunMode,
    pub delta: S,
    /// Gravity for the sweep; zero by default so the decaying regret term
    /// is not masked by a constant gravity-penalty gap.
    pub gravity_g: S,
    pub theta: S,
    pub c_bound: S,
    pub informative_fraction: f64,
    pub noise_level: S,
    pub base_seed: u64,
    /// Iteration cap for the hindsight comparator.
    pub comparator_max_iters: usize,
}

impl<S: Scalar> ScalingConfig<S> {
    pub fn new(kind: ProblemKind, t_grid: Vec<usize>, seeds: usize, mode: RunMode) -> Self {
        ScalingConfig {
            kind,
            t_grid,
            seeds,
            dimension: 64,
            mode,
            delta: S::from_f64_const(0.1),
            gravity_g: S::zero(),
            theta: S::one(),
            c_bound: S::one(),
            informative_fraction: 0.25,
            noise_level: S::from_f64_const(0.2),
            base_seed: 0,
            comparator_max_iters: 2000,
        }
    }
}

/// Median positive-part regret per horizon plus the fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult<S> {
    /// `(T, median positive-part LHS)` per grid point.
    pub medians: Vec<(usize, S)>,
    /// Least-squares slope of `ln median` against `ln T`; `None` when the
    /// medians degenerated to the floor.
    pub slope: Option<S>,
    pub degenerate: bool,
}

const POSITIVE_PART_FLOOR: f64 = 1e-12;

fn one_scaling_run<S: Scalar>(config: &ScalingConfig<S>, t_rounds: usize, seed: u64) -> Result<S> {
    let spec = SyntheticSpec::new(config.kind, config.dimension, t_rounds)
        .with_informative_fraction(config.informative_fraction)
        .with_noise_level(config.noise_level)
        .with_c_bound(config.c_bound);
    let mut rng = crate::estimators::derive_rng(seed, u64::MAX);
    let dataset = synth_dataset(&spec, &mut rng)?;

    let params = EngineParams::theorem(
        config.kind,
        t_rounds,
        config.dimension,
        config.c_bound,
        config.delta,
        config.theta,
        GravitySchedule::constant(config.gravity_g),
        seed,
    )?;

    let trace = match config.mode {
        RunMode::QuantumEmulated => audit_run(&params, &dataset.examples)?,
        RunMode::ClassicalExact => {
            classical_online_run(config.kind, &dataset.examples, &params.trunc, None)?
        }
    };
    let comparator = best_fixed_comparator(
        config.kind,
        &dataset.examples,
        &ComparatorConfig::capped(config.comparator_max_iters),
    )?;
    regularized_regret_lhs(
        &trace,
        &dataset.examples,
        comparator.u_star.as_slice(),
        &params.trunc,
    )
}

/// Runs the grid; each `(T, seed)` cell is independent.
pub fn scaling_experiment<S: Scalar>(config: &ScalingConfig<S>) -> Result<ScalingResult<S>> {
    if config.t_grid.is_empty() || config.seeds == 0 {
        return Err(Error::EmptyInput {
            context: "scaling experiment needs a grid and seeds",
        });
    }
    let mut medians = Vec::with_capacity(config.t_grid.len());
    for &t_rounds in &config.t_grid {
        let mut values: Vec<S> = (0..config.seeds)
            .into_par_iter()
            .map(|i| one_scaling_run(config, t_rounds, config.base_seed + i as u64))
            .collect::<Result<Vec<_>>>()?;
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mid = values.len() / 2;
        let median = if values.len() % 2 == 1 {
            values[mid]
        } else {
            (values[mid - 1] + values[mid]) / S::from_f64_const(2.0)
        };
        medians.push((t_rounds, median));
    }
    Ok(aggregate_scaling(medians))
}

/// Floors the medians at the positive-part floor, flags degenerate grids
/// (any median at or below the floor), and fits the log-log slope
/// otherwise.
fn aggregate_scaling<S: Scalar>(raw_medians: Vec<(usize, S)>) -> ScalingResult<S> {
    let floor = S::from_f64_const(POSITIVE_PART_FLOOR);
    let medians: Vec<(usize, S)> = raw_medians
        .into_iter()
        .map(|(t, m)| (t, m.max(floor)))
        .collect();
    let degenerate = medians.iter().any(|(_, m)| *m <= floor);
    let slope = if degenerate {
        None
    } else {
        Some(log_log_slope(&medians))
    };
    ScalingResult {
        medians,
        slope,
        degenerate,
    }
}

fn log_log_slope<S: Scalar>(points: &[(usize, S)]) -> S {
    let n = S::from_usize(points.len()).unwrap();
    let xs: Vec<S> = points
        .iter()
        .map(|(t, _)| S::from_usize(*t).unwrap().ln())
        .collect();
    let ys: Vec<S> = points.iter().map(|(_, m)| m.ln()).collect();
    let mean_x = xs.iter().copied().sum::<S>() / n;
    let mean_y = ys.iter().copied().sum::<S>() / n;
    let cov: S = xs
        .iter()
        .zip(ys.iter())
        .map(|(&x, &y)| (x - mean_x) * (y - mean_y))
        .sum();
    let var: S = xs.iter().map(|&x| (x - mean_x) * (x - mean_x)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn squared_comparator_reference_cases() {
        // Alternating ±1 labels on the same direction cancel.
        let dataset: Vec<Example<f64>> = (0..10)
            .map(|i| Example::new(vec![1.0, 0.0], if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        let result =
            best_fixed_comparator(ProblemKind::Squared, &dataset, &ComparatorConfig::default())
                .unwrap();
        assert!(result.u_star.l2_norm() < 1e-10);

        // Single example: exact interpolation with minimum norm.
        let dataset: Vec<Example<f64>> = vec![Example::new(vec![1.0, 0.0], 2.0)];
        let result =
            best_fixed_comparator(ProblemKind::Squared, &dataset, &ComparatorConfig::default())
                .unwrap();
        assert!((result.u_star[0] - 2.0).abs() < 1e-10);
        assert!(result.u_star[1].abs() < 1e-10);
        assert!(result.converged);
        assert!(result.total_loss < 1e-18);
    }

    #[test]
    fn squared_comparator_residual_gradient_is_tiny() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let dataset: Vec<Example<f64>> = (0..40)
            .map(|_| {
                let x: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
                Example::new(x, rng.random_range(-1.0..1.0))
            })
            .collect();
        let result =
            best_fixed_comparator(ProblemKind::Squared, &dataset, &ComparatorConfig::default())
                .unwrap();
        assert!(result.converged);
    }

    #[test]
    fn logistic_comparator_is_locally_optimal() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        // Small set, d = 3, T = 20, with a few flipped labels so the
        // minimizer is finite.
        let dataset: Vec<Example<f64>> = (0..20)
            .map(|i| {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let mut y = if x[0] + 0.5 * x[1] > 0.0 { 1.0 } else { -1.0 };
                if i % 7 == 0 {
                    y = -y;
                }
                Example::new(x, y)
            })
            .collect();
        let result = best_fixed_comparator(
            ProblemKind::Logistic,
            &dataset,
            &ComparatorConfig::default(),
        )
        .unwrap();
        let loss_at = |u: &[f64]| -> f64 {
            dataset
                .iter()
                .map(|ex| loss_value(ProblemKind::Logistic, dot(u, &ex.x), ex.y).unwrap())
                .sum()
        };
        let base = loss_at(result.u_star.as_slice());
        for _ in 0..100 {
            let mut xi: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            xi.iter_mut().for_each(|v| *v *= 0.01 / norm);
            let perturbed: Vec<f64> = result
                .u_star
                .as_slice()
                .iter()
                .zip(&xi)
                .map(|(a, b)| a + b)
                .collect();
            assert!(loss_at(&perturbed) + 1e-8 >= base);
        }
    }

    #[test]
    fn rhs_reference_values() {
        let rhs: f64 = theorem_rhs(ProblemKind::Logistic, 100, 1.0, 0.5, 1.0, None).unwrap();
        assert!((rhs - 0.225).abs() < 1e-15);
        let rhs: f64 = theorem_rhs(ProblemKind::Hinge, 100, 1.0, 0.5, 1.0, None).unwrap();
        assert!((rhs - 0.175).abs() < 1e-15);
        let rhs: f64 = theorem_rhs(ProblemKind::Squared, 100, 1.0, 0.0, 1.0, Some(2.0)).unwrap();
        assert!((rhs - 0.3).abs() < 1e-15);
        assert!(theorem_rhs::<f64>(ProblemKind::Squared, 100, 1.0, 0.0, 1.0, None).is_err());
    }

    #[test]
    fn rhs_is_positive() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..200 {
            let kind = ProblemKind::ALL[rng.random_range(0..3)];
            let rhs = theorem_rhs(
                kind,
                rng.random_range(1..10_000),
                rng.random_range(0.1..4.0),
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..5.0),
                Some(rng.random_range(0.0..5.0)),
            )
            .unwrap();
            assert!(rhs > 0.0);
        }
    }

    fn exact_params(eta: f64, g: f64, theta: f64) -> TruncationParams<f64> {
        TruncationParams::new(theta, eta, GravitySchedule::constant(g))
            .unwrap()
            .with_logistic_step_factor(1.0)
            .unwrap()
    }

    #[test]
    fn lhs_collapses_when_u_and_gravity_vanish() {
        // T = 1, logistic, y = +1, ỹ = 0, g = 0, u = 0 → both sides ln 2.
        let stream = vec![Example::new(vec![0.5], 1.0)];
        let params = exact_params(0.1, 0.0, 1.0);
        let trace = classical_online_run(ProblemKind::Logistic, &stream, &params, None).unwrap();
        let lhs = regularized_regret_lhs(&trace, &stream, &[0.0], &params).unwrap();
        assert!(lhs.abs() < 1e-15);
    }

    #[test]
    fn lhs_can_go_negative() {
        // Noiseless interpolating instance: once the learner closes in on
        // the generator, any fixed vector with higher loss drives the LHS
        // below zero.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let u_true = [0.7, -0.3];
        let stream: Vec<Example<f64>> = (0..200)
            .map(|_| {
                let x: Vec<f64> = (0..2).map(|_| rng.random_range(-0.6..0.6)).collect();
                let y = dot(&u_true, &x);
                Example::new(x, y)
            })
            .collect();
        let params = exact_params(0.2, 0.0, 1.0);
        let trace = classical_online_run(ProblemKind::Squared, &stream, &params, None).unwrap();
        let worse = [1.4, -0.6];
        let lhs = regularized_regret_lhs(&trace, &stream, &worse, &params).unwrap();
        assert!(lhs < 0.0, "lhs = {lhs}");
        // Against the interpolating vector itself the LHS is plain mean
        // regret, which is nonnegative here.
        let tight = regularized_regret_lhs(&trace, &stream, &u_true, &params).unwrap();
        assert!(tight >= 0.0);
    }

    #[test]
    fn fact_check_reduces_to_ogd_bound_without_gravity() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let stream: Vec<Example<f64>> = (0..60)
            .map(|_| {
                let x: Vec<f64> = (0..6).map(|_| rng.random_range(-0.4..0.4)).collect();
                Example::new(x, if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            })
            .collect();
        let params = exact_params(0.1, 0.0, 1.0);
        let trace = classical_online_run(ProblemKind::Hinge, &stream, &params, None).unwrap();
        let report = fact_c1_check(&trace, &stream, &[0.0; 6], &params, 1.0).unwrap();
        // u = 0, g = 0: RHS = ηB/2 + mean loss at 0 = ηC²/2 + 1.
        assert!((report.rhs - (0.05 + 1.0)).abs() < 1e-12);
        assert!(report.held);
    }

    #[test]
    fn fact_check_holds_across_kinds_and_seeds() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for kind in ProblemKind::ALL {
            for _ in 0..20 {
                let t = rng.random_range(20..120);
                let d = rng.random_range(2..12);
                let stream: Vec<Example<f64>> = (0..t)
                    .map(|_| {
                        let mut x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm > 1.0 {
                            x.iter_mut().for_each(|v| *v /= norm);
                        }
                        let y = match kind {
                            ProblemKind::Squared => rng.random_range(-1.0..1.0),
                            _ => {
                                if rng.random_bool(0.5) {
                                    1.0
                                } else {
                                    -1.0
                                }
                            }
                        };
                        Example::new(x, y)
                    })
                    .collect();
                // Keep 1 - Aη/2 > 0 for squared (A = 4).
                let params = exact_params(0.05, 0.1, 0.5);
                let trace = classical_online_run(kind, &stream, &params, None).unwrap();
                let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let report = fact_c1_check(&trace, &stream, &u, &params, 1.0).unwrap();
                assert!(
                    report.held,
                    "{kind}: lhs {} > rhs {}",
                    report.lhs, report.rhs
                );
            }
        }
    }

    #[test]
    fn squared_prefactor_structure() {
        let stream = vec![Example::new(vec![0.5], 1.0), Example::new(vec![-0.5], 0.5)];
        // A = 4C² = 4, pick η with 2η < 1.
        let params = exact_params(0.2, 0.0, 1.0);
        let trace = classical_online_run(ProblemKind::Squared, &stream, &params, None).unwrap();
        let report = fact_c1_check(&trace, &stream, &[0.0], &params, 1.0).unwrap();
        let expected_prefactor = 1.0 - 0.5 * 4.0 * 0.2;
        let manual_lhs = expected_prefactor * trace.mean_loss();
        assert!((report.lhs - manual_lhs).abs() < 1e-12);

        // η too large for the prefactor.
        let bad = exact_params(0.6, 0.0, 1.0);
        let trace2 = classical_online_run(ProblemKind::Squared, &stream, &bad, None).unwrap();
        assert!(fact_c1_check(&trace2, &stream, &[0.0], &bad, 1.0).is_err());
    }

    #[test]
    fn degenerate_medians_are_flagged_and_unfitted() {
        // A constant-loss stream (all-zero features) makes the LHS exactly
        // zero, which must floor out and void the slope.
        let stream: Vec<Example<f64>> = (0..8).map(|_| Example::new(vec![0.0], 1.0)).collect();
        let params = exact_params(0.1, 0.0, 1.0);
        let trace = classical_online_run(ProblemKind::Squared, &stream, &params, None).unwrap();
        let lhs = regularized_regret_lhs(&trace, &stream, &[0.0], &params).unwrap();
        assert_eq!(lhs, 0.0);

        let result = aggregate_scaling(vec![(8usize, lhs), (16, lhs)]);
        assert!(result.degenerate);
        assert_eq!(result.slope, None);
        assert!(result.medians.iter().all(|(_, m)| *m == 1e-12));

        let healthy = aggregate_scaling(vec![(8usize, 0.4f64), (16, 0.2)]);
        assert!(!healthy.degenerate);
        assert!((healthy.slope.unwrap() - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn both_q_index_conventions_are_exposed() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let stream: Vec<Example<f64>> = (0..30)
            .map(|_| {
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
                Example::new(x, rng.random_range(-1.0..1.0))
            })
            .collect();
        let params = exact_params(0.2, 0.1, 5.0);
        let trace = classical_online_run(ProblemKind::Squared, &stream, &params, None).unwrap();
        let u = [0.1, -0.2, 0.0, 0.3];
        let current =
            regularized_regret_lhs_with(&trace, &stream, &u, &params, QIndexConvention::Current)
                .unwrap();
        let next =
            regularized_regret_lhs_with(&trace, &stream, &u, &params, QIndexConvention::Next)
                .unwrap();
        // The shifted series drops the final q^(T+1) and prepends
        // q^(1) = 0, so the gap is exactly g·q^(T+1)/T.
        let q_last = trace.rounds.last().unwrap().q_exact.unwrap();
        assert!(q_last > 0.0);
        let expected_gap = 0.1 * q_last / 30.0;
        assert!(((next - current) - expected_gap).abs() < 1e-12);
    }

    #[test]
    fn too_small_d_cap_marks_assumption_violated() {
        let mut config = BoundSweepConfig::<f64>::new(ProblemKind::Squared, 32, 8, 1);
        config.d_bound = Some(1e-9); // unattainably tight prediction cap
        let report = theorem_bound_report(&config, 3).unwrap();
        assert!(report.assumption_violated);
        let sweep = theorem_bound_sweep(&config).unwrap();
        assert_eq!(sweep.held_fraction, 0.0); // no conclusive runs
    }
}
