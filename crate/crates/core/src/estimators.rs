//! Stochastic emulators for the amplitude-estimation-based subroutines:
//! unbiased amplitude estimation, ℓ1-norm estimation, state preparation
//! (as index sampling), inner-product estimation, and maximum finding.
//!
//! Each emulator computes the exact quantity classically and then perturbs
//! it so that the advertised error/failure contract holds: with probability
//! `1-δ` the output is within the stated bound of the truth (noise uniform
//! on `[-b, +b]`), and with probability `δ` a failure draw lands in
//! `[-10b, +10b]`. The `√d` query costs are *modeled* — charged to a
//! [`QueryLedger`], never incurred — so none of this demonstrates a
//! speedup; it demonstrates the contracts the regret analysis consumes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{QueryLedger, Subroutine};
use crate::scalar::Scalar;

/// Read-only view of a `d`-dimensional vector, with optional precomputed
/// norms so hot callers can skip the scan.
pub trait VectorAccess<S> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn entry(&self, j: usize) -> S;
    fn linf_hint(&self) -> Option<S> {
        None
    }
    fn l1_hint(&self) -> Option<S> {
        None
    }
}

impl<S: Scalar> VectorAccess<S> for [S] {
    fn len(&self) -> usize {
        <[S]>::len(self)
    }

    fn entry(&self, j: usize) -> S {
        self[j]
    }
}

impl<S: Scalar, V: VectorAccess<S> + ?Sized> VectorAccess<S> for &V {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn entry(&self, j: usize) -> S {
        (**self).entry(j)
    }

    fn linf_hint(&self) -> Option<S> {
        (**self).linf_hint()
    }

    fn l1_hint(&self) -> Option<S> {
        (**self).l1_hint()
    }
}

/// Whether emulators inject their contract noise or return exact values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// Contract noise plus failure draws.
    #[default]
    Full,
    /// Exact values, no rng consumption: the ε→0 path.
    Off,
}

/// Accuracy/confidence parameters for one emulated run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec<S> {
    /// Additive inner-product accuracy ε_IP.
    pub eps_ip: S,
    /// Additive masked-norm accuracy ε_norm.
    pub eps_norm: S,
    /// State-preparation ℓ1 distortion ζ.
    pub zeta: S,
    /// Total failure probability budget δ for the whole run.
    pub delta: S,
    pub rng_seed: u64,
    #[serde(default)]
    pub noise: NoiseMode,
}

impl<S: Scalar> EstimatorSpec<S> {
    pub fn new(eps_ip: S, eps_norm: S, delta: S, rng_seed: u64) -> Result<Self> {
        let spec = EstimatorSpec {
            eps_ip,
            eps_norm,
            zeta: S::from_f64_const(0.25),
            delta,
            rng_seed,
            noise: NoiseMode::Full,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_zeta(mut self, zeta: S) -> Result<Self> {
        self.zeta = zeta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_noise(mut self, noise: NoiseMode) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: S| v > S::zero() && v < S::one();
        if !unit(self.eps_ip) {
            return Err(Error::invalid_param("eps_ip", "must lie in (0, 1)"));
        }
        if !unit(self.eps_norm) {
            return Err(Error::invalid_param("eps_norm", "must lie in (0, 1)"));
        }
        if !(self.zeta > S::zero() && self.zeta <= S::from_f64_const(0.5)) {
            return Err(Error::invalid_param("zeta", "must lie in (0, 1/2]"));
        }
        if !unit(self.delta) {
            return Err(Error::invalid_param("delta", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// The per-subroutine failure budget `δ/(3T)`: three estimator calls
    /// per round, union-bounded over `T` rounds.
    pub fn per_call_delta(&self, t_rounds: usize) -> S {
        self.delta / (S::from_f64_const(3.0) * S::from_usize(t_rounds).unwrap())
    }
}

/// A seeded rng for call number `stream`; distinct streams are independent,
/// so call ordering never shifts any other call's draws.
pub fn derive_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn exact_linf<S: Scalar, V: VectorAccess<S> + ?Sized>(u: &V) -> S {
    if let Some(h) = u.linf_hint() {
        return h;
    }
    (0..u.len())
        .map(|j| u.entry(j).abs())
        .fold(S::zero(), S::max)
}

fn exact_l1<S: Scalar, V: VectorAccess<S> + ?Sized>(u: &V) -> S {
    if let Some(h) = u.l1_hint() {
        return h;
    }
    (0..u.len()).map(|j| u.entry(j).abs()).sum()
}

/// Truth plus a uniform success/failure perturbation of half-width `bound`
/// (ten times that on failure draws).
fn perturb<S: Scalar, R: Rng + ?Sized>(truth: S, bound: S, delta: S, rng: &mut R) -> S {
    let failed = rng.random_bool(delta.to_f64_lossy());
    let width = if failed {
        bound * S::from_f64_const(10.0)
    } else {
        bound
    };
    if width == S::zero() {
        return truth;
    }
    truth + rng.random_range(-width..=width)
}

/// Emulated unbiased amplitude estimation.
///
/// Holds the per-call-sequence bias so repeated estimates share it; the
/// output distribution satisfies `|E[ã] - a| ≤ ε` and
/// `Var[ã] ≤ 91a/t² + ε`, with `ã ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct AmplitudeEstimator<S> {
    t_param: u32,
    eps: S,
    bias: S,
}

impl<S: Scalar> AmplitudeEstimator<S> {
    pub fn new<R: Rng + ?Sized>(t_param: u32, eps: S, rng: &mut R) -> Result<Self> {
        if t_param < 4 {
            return Err(Error::invalid_param("t_param", "must be >= 4"));
        }
        if !(eps > S::zero() && eps < S::one()) {
            return Err(Error::invalid_param("eps", "must lie in (0, 1)"));
        }
        let bias = rng.random_range(-eps..=eps);
        Ok(AmplitudeEstimator { t_param, eps, bias })
    }

    pub fn t_param(&self) -> u32 {
        self.t_param
    }

    pub fn eps(&self) -> S {
        self.eps
    }

    /// One estimate of the squared amplitude `a`.
    ///
    /// Noise half-width is `√(3·91·a(1-a))/t`, giving variance
    /// `91·a(1-a)/t² ≤ 91a/t²`; the `(1-a)` factor keeps boundary
    /// estimates tight (`a = 1` yields `ã ∈ [1-ε, 1]`, `a = 0` yields 0).
    pub fn estimate<R: Rng + ?Sized>(&self, a: S, rng: &mut R) -> Result<S> {
        if !(a >= S::zero() && a <= S::one()) {
            return Err(Error::invalid_param("a", "must lie in [0, 1]"));
        }
        if a == S::zero() {
            return Ok(S::zero());
        }
        let t = S::from_u32(self.t_param).unwrap();
        let half =
            (S::from_f64_const(3.0) * S::from_f64_const(91.0) * a * (S::one() - a)).sqrt() / t;
        let noise = if half == S::zero() {
            S::zero()
        } else {
            rng.random_range(-half..=half)
        };
        Ok((a + self.bias + noise).max(S::zero()).min(S::one()))
    }
}

/// One-shot amplitude estimate: draws a fresh bias, then estimates once.
pub fn ae_emulate<S: Scalar, R: Rng + ?Sized>(
    a: S,
    t_param: u32,
    eps: S,
    rng: &mut R,
) -> Result<S> {
    let est = AmplitudeEstimator::new(t_param, eps, rng)?;
    est.estimate(a, rng)
}

/// Error mode for [`est_l1_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode<S> {
    /// `|Γ̃ - ‖u‖₁| ≤ ε₀·‖u‖₁`.
    Multiplicative(S),
    /// `|Γ̃ - ‖u‖₁| ≤ ε`.
    Additive(S),
}

fn check_unit_interval<S: Scalar>(name: &'static str, v: S) -> Result<()> {
    if !(v > S::zero() && v < S::one()) {
        return Err(Error::invalid_param(name, "must lie in (0, 1)"));
    }
    Ok(())
}

/// Estimates `‖u‖₁` within the contract of `mode` with failure probability
/// at most `delta`.
///
/// The modeled charge is `c_norm·√d/δ` in multiplicative mode and
/// `c_norm·(‖u‖_∞·√d/ε)·ln(1/δ)` in additive mode. An exact internal
/// maximum scan short-circuits the all-zero vector to an exact 0.
pub fn est_l1_norm<S, V, R>(
    u: &V,
    mode: NormMode<S>,
    delta: S,
    rng: &mut R,
    ledger: Option<&mut QueryLedger<S>>,
    noise: NoiseMode,
) -> Result<S>
where
    S: Scalar,
    V: VectorAccess<S> + ?Sized,
    R: Rng + ?Sized,
{
    if u.len() == 0 {
        return Err(Error::EmptyInput {
            context: "est_l1_norm input vector",
        });
    }
    check_unit_interval("delta", delta)?;
    match mode {
        NormMode::Multiplicative(e0) => check_unit_interval("eps0", e0)?,
        NormMode::Additive(e) => check_unit_interval("eps_add", e)?,
    }

    let d_sqrt = S::from_usize(u.len()).unwrap().sqrt();
    let linf = exact_linf(u);
    if let Some(ledger) = ledger {
        let c = ledger.constants().c_norm;
        let count = match mode {
            NormMode::Multiplicative(_) => c * d_sqrt / delta,
            NormMode::Additive(e) => c * linf * d_sqrt / e * delta.recip().ln(),
        };
        ledger.charge(Subroutine::NormEstimation, None, count);
    }
    if linf == S::zero() {
        return Ok(S::zero());
    }

    let l1 = exact_l1(u);
    let bound = match mode {
        NormMode::Multiplicative(e0) => e0 * l1,
        NormMode::Additive(e) => e,
    };
    Ok(match noise {
        NoiseMode::Off => l1,
        NoiseMode::Full => perturb(l1, bound, delta, rng).max(S::zero()),
    })
}

/// Estimates `u·v` to additive error `eps` with failure probability at
/// most `delta`, via the sign-split decomposition
/// `u·v = ‖z⁺‖₁ - ‖z⁻‖₁` with `z±_j` the positive/negative parts of
/// `u_j·v_j`.
///
/// Charges one aggregate count `c_ip·(‖u‖_∞‖v‖₁·√d/ε)·ln(1/δ)`; the
/// internal part-estimates do not double-charge.
pub fn est_inner_product<S, U, V, R>(
    u: &U,
    v: &V,
    eps: S,
    delta: S,
    rng: &mut R,
    ledger: Option<&mut QueryLedger<S>>,
    noise: NoiseMode,
) -> Result<S>
where
    S: Scalar,
    U: VectorAccess<S> + ?Sized,
    V: VectorAccess<S> + ?Sized,
    R: Rng + ?Sized,
{
    let d = u.len();
    if d != v.len() {
        return Err(Error::DimensionMismatch {
            context: "est_inner_product",
            expected: d,
            got: v.len(),
        });
    }
    if d == 0 {
        return Err(Error::EmptyInput {
            context: "est_inner_product input vectors",
        });
    }
    check_unit_interval("eps", eps)?;
    check_unit_interval("delta", delta)?;

    // One pass builds both split norms and their maxima.
    let mut z_plus_l1 = S::zero();
    let mut z_minus_l1 = S::zero();
    let mut z_plus_max = S::zero();
    let mut z_minus_max = S::zero();
    for j in 0..d {
        let prod = u.entry(j) * v.entry(j);
        if prod > S::zero() {
            z_plus_l1 = z_plus_l1 + prod;
            z_plus_max = z_plus_max.max(prod);
        } else if prod < S::zero() {
            z_minus_l1 = z_minus_l1 - prod;
            z_minus_max = z_minus_max.max(-prod);
        }
    }

    let linf_u = exact_linf(u);
    let l1_v = exact_l1(v);
    if let Some(ledger) = ledger {
        let d_sqrt = S::from_usize(d).unwrap().sqrt();
        let count = ledger.constants().c_ip * linf_u * l1_v * d_sqrt / eps * delta.recip().ln();
        ledger.charge(Subroutine::InnerProduct, None, count);
    }

    if z_plus_max == S::zero() && z_minus_max == S::zero() {
        return Ok(S::zero());
    }
    if noise == NoiseMode::Off {
        return Ok(z_plus_l1 - z_minus_l1);
    }

    // Per-part budgets ε⁺ = ε⁻ = ε/(‖u‖_∞‖v‖₁); each part gets additive
    // slack (ε±/2)·‖z±‖₁, which sums to at most ε/2 by Hölder.
    let denom = linf_u * l1_v;
    let part_eps = eps / denom;
    let failed = rng.random_bool(delta.to_f64_lossy());
    let scale = if failed {
        S::from_f64_const(10.0)
    } else {
        S::one()
    };
    let half = S::from_f64_const(0.5);
    let estimate_part = |l1_part: S, rng: &mut R| -> S {
        if l1_part == S::zero() {
            return S::zero();
        }
        let b = scale * half * part_eps * l1_part;
        (l1_part + rng.random_range(-b..=b)).max(S::zero())
    };
    let plus = estimate_part(z_plus_l1, rng);
    let minus = estimate_part(z_minus_l1, rng);
    Ok(plus - minus)
}

/// Draws an index `j` with probability `p̃_j`, where
/// `‖p̃ - |u|/‖u‖₁‖₁ ≤ 2ζ`; emulates preparing the amplitude-encoded
/// state and measuring it. Charges `c_prep·√d·ln(1/δ)`.
pub fn sample_index<S, V, R>(
    u: &V,
    zeta: S,
    delta: S,
    rng: &mut R,
    ledger: Option<&mut QueryLedger<S>>,
    noise: NoiseMode,
) -> Result<usize>
where
    S: Scalar,
    V: VectorAccess<S> + ?Sized,
    R: Rng + ?Sized,
{
    let d = u.len();
    if d == 0 {
        return Err(Error::EmptyInput {
            context: "sample_index input vector",
        });
    }
    if !(zeta > S::zero() && zeta <= S::from_f64_const(0.5)) {
        return Err(Error::invalid_param("zeta", "must lie in (0, 1/2]"));
    }
    check_unit_interval("delta", delta)?;

    if let Some(ledger) = ledger {
        let d_sqrt = S::from_usize(d).unwrap().sqrt();
        let count = ledger.constants().c_prep * d_sqrt * delta.recip().ln();
        ledger.charge(Subroutine::StatePreparation, None, count);
    }

    let l1 = exact_l1(u);
    if l1 == S::zero() {
        return Err(Error::invalid_param(
            "u",
            "cannot prepare a state from the zero vector",
        ));
    }

    if noise == NoiseMode::Full {
        if rng.random_bool(delta.to_f64_lossy()) {
            // Failed preparation: garbage state, uniform readout.
            return Ok(rng.random_range(0..d));
        }
        // Distorted target p̃ = (1-ζ)·p + ζ·uniform has ℓ1 distance
        // ζ·‖unif - p‖₁ ≤ 2ζ from p.
        if rng.random_bool(zeta.to_f64_lossy()) {
            return Ok(rng.random_range(0..d));
        }
    }

    let r = rng.random_range(S::zero()..l1);
    let mut acc = S::zero();
    for j in 0..d {
        acc = acc + u.entry(j).abs();
        if r < acc {
            return Ok(j);
        }
    }
    Ok(d - 1)
}

/// Returns `‖u‖_∞` exactly; the maximum-finding emulation is exact, with
/// its failure probability folded into the callers' budgets. Charges
/// `c_max·√d·ln(1/δ)`.
pub fn max_abs<S, V>(u: &V, delta: S, ledger: Option<&mut QueryLedger<S>>) -> Result<S>
where
    S: Scalar,
    V: VectorAccess<S> + ?Sized,
{
    if u.len() == 0 {
        return Err(Error::EmptyInput {
            context: "max_abs input vector",
        });
    }
    check_unit_interval("delta", delta)?;
    if let Some(ledger) = ledger {
        let d_sqrt = S::from_usize(u.len()).unwrap().sqrt();
        let count = ledger.constants().c_max * d_sqrt * delta.recip().ln();
        ledger.charge(Subroutine::MaxFinding, None, count);
    }
    Ok(exact_linf(u))
}
