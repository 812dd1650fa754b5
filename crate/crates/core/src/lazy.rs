//! Lazy weight oracle: computes any single weight entry `w_j^(t)` on demand
//! by unrolling the update recurrence over the round history, without ever
//! storing a dense weight vector.
//!
//! The state kept per run is O(T): one `(y, ỹ, g)` triple per completed
//! round. Reconstructing `w_j^(t)` costs exactly `t-1` reads of coordinate
//! `j` from the example accessor, which is the cost model the emulated
//! estimators charge against.

use std::cell::RefCell;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::data::Example;
use crate::error::{Error, Result};
use crate::losses::{loss_grad_scalar_scaled, ProblemKind};
use crate::scalar::Scalar;
use crate::truncation::{truncate_raw, TruncationParams, WeightVector};

/// The per-round scalars the weight recurrence needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord<S> {
    /// 1-based round index.
    pub t: usize,
    /// True label `y^(t)`.
    pub y: S,
    /// Prediction estimate `ỹ^(t)` the update acted on.
    pub y_tilde: S,
    /// Gravity `g^(t)`.
    pub g: S,
}

/// Read access to example entries by `(round, coordinate)`.
///
/// Rounds are 1-based (matching `w^(t)`); coordinates are 0-based.
pub trait ExampleAccess<S> {
    fn dim(&self) -> usize;
    fn rounds(&self) -> usize;
    fn entry(&self, t: usize, j: usize) -> S;
}

/// Dense in-memory stream access.
pub struct StreamAccess<'a, S> {
    stream: &'a [Example<S>],
}

impl<'a, S: Scalar> StreamAccess<'a, S> {
    pub fn new(stream: &'a [Example<S>]) -> Self {
        StreamAccess { stream }
    }
}

impl<S: Scalar> ExampleAccess<S> for StreamAccess<'_, S> {
    fn dim(&self) -> usize {
        self.stream.first().map_or(0, |e| e.x.len())
    }

    fn rounds(&self) -> usize {
        self.stream.len()
    }

    fn entry(&self, t: usize, j: usize) -> S {
        self.stream[t - 1].x[j]
    }
}

/// Wraps an accessor and counts every read; used to assert the exact O(t)
/// per-entry cost and coordinate locality of the oracle.
pub struct CountingAccess<A> {
    inner: A,
    reads: AtomicU64,
}

impl<A> CountingAccess<A> {
    pub fn new(inner: A) -> Self {
        CountingAccess {
            inner,
            reads: AtomicU64::new(0),
        }
    }

    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.reads.store(0, Ordering::Relaxed);
    }
}

impl<S: Scalar, A: ExampleAccess<S>> ExampleAccess<S> for CountingAccess<A> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn rounds(&self) -> usize {
        self.inner.rounds()
    }

    fn entry(&self, t: usize, j: usize) -> S {
        self.reads.fetch_add(1, Ordering::Relaxed);
        self.inner.entry(t, j)
    }
}

impl<S: Scalar, A: ExampleAccess<S> + ?Sized> ExampleAccess<S> for &A {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn rounds(&self) -> usize {
        (**self).rounds()
    }

    fn entry(&self, t: usize, j: usize) -> S {
        (**self).entry(t, j)
    }
}

/// Rolling dense snapshot of the latest queried round. Optional: the cost
/// model only holds with the cache disabled, so cost-accounting tests must
/// construct states without it.
struct RoundCache<S> {
    t: usize,
    w: Vec<S>,
}

/// Append-only history plus example access: everything needed to answer
/// `w_j^(t)` queries.
pub struct OracleState<S, A> {
    kind: ProblemKind,
    params: TruncationParams<S>,
    history: Vec<RoundRecord<S>>,
    access: A,
    cache: Option<RefCell<RoundCache<S>>>,
}

impl<S: Scalar, A: ExampleAccess<S>> OracleState<S, A> {
    pub fn new(kind: ProblemKind, params: TruncationParams<S>, access: A) -> Result<Self> {
        params.validate()?;
        if access.dim() == 0 {
            return Err(Error::EmptyInput {
                context: "example accessor has zero dimension",
            });
        }
        Ok(OracleState {
            kind,
            params,
            history: Vec::new(),
            access,
            cache: None,
        })
    }

    /// Enables the rolling dense cache (used by the engine for wall-clock
    /// sanity; never in cost-accounting tests).
    pub fn with_round_cache(mut self) -> Self {
        let d = self.access.dim();
        self.cache = Some(RefCell::new(RoundCache {
            t: 1,
            w: vec![S::zero(); d],
        }));
        self
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn params(&self) -> &TruncationParams<S> {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.access.dim()
    }

    pub fn history(&self) -> &[RoundRecord<S>] {
        &self.history
    }

    pub fn completed_rounds(&self) -> usize {
        self.history.len()
    }

    pub fn access(&self) -> &A {
        &self.access
    }

    /// Appends one completed round.
    pub fn record_round(&mut self, y: S, y_tilde: S, g: S) -> Result<()> {
        self.kind.validate_label(y)?;
        if !y_tilde.is_finite() {
            return Err(Error::NonFinite {
                context: "prediction estimate",
            });
        }
        if !g.is_finite() || g < S::zero() {
            return Err(Error::invalid_param("gravity", "must be finite and >= 0"));
        }
        if self.history.is_empty() && y_tilde != S::zero() {
            return Err(Error::invalid_param(
                "y_tilde",
                "round 1 acts on the zero weight vector, so its estimate must be 0",
            ));
        }
        let t = self.history.len() + 1;
        if t > self.access.rounds() {
            return Err(Error::OutOfRange {
                what: "round",
                got: t,
                limit: self.access.rounds(),
            });
        }
        self.history.push(RoundRecord { t, y, y_tilde, g });
        Ok(())
    }

    /// Advances the coordinate-`j` recurrence across one recorded round.
    #[inline]
    fn step(&self, w: S, rec: &RoundRecord<S>, j: usize) -> S {
        let scalar = loss_grad_scalar_scaled(
            self.kind,
            rec.y_tilde,
            rec.y,
            self.params.logistic_step_factor,
        )
        .expect("history records were validated on append");
        let x = self.access.entry(rec.t, j);
        let updated = w + self.params.eta * scalar * x;
        if rec.t % self.params.period_k == 0 {
            truncate_raw(updated, rec.g * self.params.eta, self.params.theta)
        } else {
            updated
        }
    }

    fn check_query(&self, t: usize, j: usize) -> Result<()> {
        let limit = self.history.len() + 1;
        if t == 0 || t > limit {
            return Err(Error::OutOfRange {
                what: "round",
                got: t,
                limit,
            });
        }
        if j >= self.access.dim() {
            return Err(Error::OutOfRange {
                what: "coordinate",
                got: j,
                limit: self.access.dim(),
            });
        }
        Ok(())
    }

    /// Computes `w_j^(t)` by unrolling the recurrence from `w^(1) = 0`.
    ///
    /// Costs exactly `t-1` accessor reads of coordinate `j` (with the cache
    /// disabled) and touches no other coordinate. Deterministic given the
    /// history.
    pub fn weight_entry(&self, t: usize, j: usize) -> Result<S> {
        self.check_query(t, j)?;
        if let Some(cache) = &self.cache {
            let mut cache = cache.borrow_mut();
            if t >= cache.t {
                while cache.t < t {
                    let rec = &self.history[cache.t - 1];
                    for (jj, slot) in cache.w.iter_mut().enumerate() {
                        // Reads go through the accessor, so counting
                        // wrappers still observe every touch.
                        *slot = self.step(*slot, rec, jj);
                    }
                    cache.t += 1;
                }
                return Ok(cache.w[j]);
            }
            // Historical query behind the cache: fall through to the plain
            // unroll below.
        }
        let mut w = S::zero();
        for rec in &self.history[..t - 1] {
            w = self.step(w, rec, j);
        }
        Ok(w)
    }

    /// The full `w^(t)` as `d` independent entry queries.
    pub fn weight_vector(&self, t: usize) -> Result<WeightVector<S>> {
        self.check_query(t, 0)?;
        let entries = (0..self.access.dim())
            .map(|j| self.weight_entry(t, j))
            .collect::<Result<Vec<S>>>()?;
        WeightVector::from_vec(entries)
    }
}
