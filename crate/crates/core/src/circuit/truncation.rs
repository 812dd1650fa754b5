//! The reversible truncation circuit: computes the shrinkage function
//! `f(x)` into a fresh output register, preserving `x` and restoring every
//! ancilla.
//!
//! Branch selection uses two between oracles with *strict* zero boundaries
//! (`0 < x ≤ θ` and `-θ ≤ x < 0`, realized as `[1ulp, θ]` and
//! `[-θ, -1ulp]` on the grid), so exactly one of the three branches fires;
//! `x = 0` falls through to the copy branch, which agrees with the
//! closed-interval operator since both yield 0 there. The branch flag
//! doubles as the minmax selector: the first branch needs `max(x-α, 0)`,
//! the second `min(x+α, 0)`.
//!
//! Intermediate sums use modular two's-complement addition (a bijection);
//! for representable `α ≥ 0` and `θ > 0` the selected branch's sum always
//! fits the format, so no observable wraparound can occur and everything
//! wrapped in a non-selected branch is uncomputed.

use crate::error::{Error, Result};

use super::format::{FixedPointFormat, Word};
use super::ops::{Circuit, CostModel, GateStats, ReversibleOp};
use super::registers::{RegId, RegisterFile};

/// Result of one truncation-circuit execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRun {
    /// The output register contents, `f(x)`.
    pub output: Word,
    pub stats: GateStats,
    /// True when every must-restore ancilla ended at zero.
    pub ancilla_clean: bool,
    /// True when the input register still holds `x`.
    pub input_preserved: bool,
}

/// A built truncation circuit for fixed `(α, θ)`, reusable across inputs.
pub struct TruncationCircuit {
    file: RegisterFile,
    circuit: Circuit,
    cost: CostModel,
    x: RegId,
    out: RegId,
    scratch: Vec<RegId>,
}

impl TruncationCircuit {
    pub fn build(fmt: FixedPointFormat, alpha: Word, theta: Word) -> Result<Self> {
        if fmt.to_signed(alpha) < 0 {
            return Err(Error::circuit("alpha must be >= 0"));
        }
        let theta_int = fmt.to_signed(theta);
        if theta_int <= 0 {
            return Err(Error::circuit("theta must be > 0"));
        }
        // -θ must be representable too (holds whenever θ is, since
        // |min| = max + 1).
        let neg_theta = fmt.from_signed(-theta_int)?;

        let mut file = RegisterFile::new(fmt);
        let x = file.add_word("x", 0, false)?;
        let out = file.add_word("out", 0, false)?;
        let alpha_reg = file.add_word("alpha", alpha, false)?;
        let theta_reg = file.add_word("theta", theta, false)?;
        let neg_theta_reg = file.add_word("neg_theta", neg_theta, false)?;
        let one = file.add_word("one", fmt.from_signed(1)?, false)?;
        let neg_one = file.add_word("neg_one", fmt.from_signed(-1)?, false)?;
        let b_pos = file.add_bit("b_pos", false, true);
        let b_neg = file.add_bit("b_neg", false, true);
        let b_else = file.add_bit("b_else", false, true);
        let t1 = file.add_word("t1", 0, true)?;

        let mut c = Circuit::new();
        // Branch flags: b_pos = [0 < x ≤ θ], b_neg = [-θ ≤ x < 0].
        c.push(ReversibleOp::Between {
            a: one,
            b: theta_reg,
            x,
            z: b_pos,
        });
        c.push(ReversibleOp::Between {
            a: neg_theta_reg,
            b: neg_one,
            x,
            z: b_neg,
        });
        // t1 = x - α under b_pos, x + α under b_neg (the flags are
        // disjoint).
        c.push(ReversibleOp::AddReg {
            src: x,
            dst: t1,
            ctrl: Some(b_pos),
        });
        c.push(ReversibleOp::SubReg {
            src: alpha_reg,
            dst: t1,
            ctrl: Some(b_pos),
        });
        c.push(ReversibleOp::AddReg {
            src: x,
            dst: t1,
            ctrl: Some(b_neg),
        });
        c.push(ReversibleOp::AddReg {
            src: alpha_reg,
            dst: t1,
            ctrl: Some(b_neg),
        });
        // out = max(t1, 0) on the positive branch, min(t1, 0) otherwise;
        // with neither flag set t1 is 0 and this writes 0.
        c.push(ReversibleOp::MinMax {
            c: b_pos,
            x: t1,
            out,
        });
        // Copy branch: out ^= x when neither flag fired.
        c.push(ReversibleOp::CnotBit {
            c: b_pos,
            t: b_else,
        });
        c.push(ReversibleOp::CnotBit {
            c: b_neg,
            t: b_else,
        });
        c.push(ReversibleOp::NotBit { t: b_else });
        c.push(ReversibleOp::XorReg {
            src: x,
            dst: out,
            ctrl: Some(b_else),
        });
        // Uncompute: b_else, then t1, then the branch flags.
        c.push(ReversibleOp::NotBit { t: b_else });
        c.push(ReversibleOp::CnotBit {
            c: b_neg,
            t: b_else,
        });
        c.push(ReversibleOp::CnotBit {
            c: b_pos,
            t: b_else,
        });
        c.push(ReversibleOp::SubReg {
            src: alpha_reg,
            dst: t1,
            ctrl: Some(b_neg),
        });
        c.push(ReversibleOp::SubReg {
            src: x,
            dst: t1,
            ctrl: Some(b_neg),
        });
        c.push(ReversibleOp::AddReg {
            src: alpha_reg,
            dst: t1,
            ctrl: Some(b_pos),
        });
        c.push(ReversibleOp::SubReg {
            src: x,
            dst: t1,
            ctrl: Some(b_pos),
        });
        c.push(ReversibleOp::Between {
            a: neg_theta_reg,
            b: neg_one,
            x,
            z: b_neg,
        });
        c.push(ReversibleOp::Between {
            a: one,
            b: theta_reg,
            x,
            z: b_pos,
        });

        Ok(TruncationCircuit {
            file,
            circuit: c,
            cost: CostModel::for_width(fmt.total_bits()),
            x,
            out,
            scratch: vec![b_pos, b_neg, b_else, t1],
        })
    }

    pub fn ops(&self) -> &Circuit {
        &self.circuit
    }

    pub fn cost_model(&self) -> &CostModel {
        &self.cost
    }

    /// Executes the circuit on input word `x`.
    pub fn run(&mut self, x: Word) -> Result<TruncationRun> {
        let fmt = self.file.format();
        if x & !fmt.mask() != 0 {
            return Err(Error::circuit(format!("input {x:#x} wider than format")));
        }
        self.file.set(self.x, x);
        self.file.set(self.out, 0);
        for &r in &self.scratch {
            self.file.set(r, 0);
        }
        let stats = self.circuit.run(&mut self.file, &self.cost)?;
        Ok(TruncationRun {
            output: self.file.get(self.out),
            stats,
            ancilla_clean: self.file.ancillas_clean(),
            input_preserved: self.file.get(self.x) == x,
        })
    }
}

/// Builds and runs the truncation circuit once for real-valued `alpha`,
/// `theta` (which must lie on the format's grid) and the input word `x`.
pub fn truncation_circuit(
    fmt: FixedPointFormat,
    x: Word,
    alpha: Word,
    theta: Word,
) -> Result<TruncationRun> {
    TruncationCircuit::build(fmt, alpha, theta)?.run(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::ops::reversibility_check;
    use crate::truncation::truncate_raw;

    #[test]
    fn first_branch_reference_case() {
        // q6.6 with k = 12: x = 0.5, α = 0.25, θ = 1.0 → 0.25.
        let fmt = FixedPointFormat::new(12, 6).unwrap();
        let run = truncation_circuit(
            fmt,
            fmt.encode(0.5).unwrap(),
            fmt.encode(0.25).unwrap(),
            fmt.encode(1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(fmt.decode(run.output), 0.25);
        assert!(run.ancilla_clean);
        assert!(run.input_preserved);
    }

    #[test]
    fn just_above_theta_passes_through() {
        let fmt = FixedPointFormat::new(12, 6).unwrap();
        let theta = fmt.encode(1.0).unwrap();
        let x = fmt.from_signed(fmt.to_signed(theta) + 1).unwrap();
        let run = truncation_circuit(fmt, x, fmt.encode(0.25).unwrap(), theta).unwrap();
        assert_eq!(run.output, x);
        assert!(run.ancilla_clean);
    }

    #[test]
    fn zero_input_maps_to_zero() {
        let fmt = FixedPointFormat::new(10, 4).unwrap();
        let run = truncation_circuit(
            fmt,
            fmt.encode(0.0).unwrap(),
            fmt.encode(0.5).unwrap(),
            fmt.encode(2.0).unwrap(),
        )
        .unwrap();
        assert_eq!(run.output, 0);
        assert!(run.ancilla_clean);
    }

    #[test]
    fn parameter_validation() {
        let fmt = FixedPointFormat::new(8, 2).unwrap();
        let neg = fmt.encode(-0.25).unwrap();
        let pos = fmt.encode(1.0).unwrap();
        assert!(TruncationCircuit::build(fmt, neg, pos).is_err());
        assert!(TruncationCircuit::build(fmt, pos, 0).is_err());
        assert!(TruncationCircuit::build(fmt, pos, neg).is_err());
    }

    #[test]
    fn exhaustive_agreement_with_scalar_operator() {
        // Grid points decode exactly, so agreement is exact equality.
        let fmt = FixedPointFormat::new(12, 6).unwrap();
        let alpha = fmt.encode(0.25).unwrap();
        let theta = fmt.encode(1.0).unwrap();
        let mut circuit = TruncationCircuit::build(fmt, alpha, theta).unwrap();
        for x in 0..fmt.cardinality() {
            let run = circuit.run(x).unwrap();
            let expected = truncate_raw(fmt.decode(x), 0.25, 1.0);
            assert_eq!(fmt.decode(run.output), expected, "x = {}", fmt.decode(x));
            assert!(run.ancilla_clean, "dirty ancilla at x = {}", fmt.decode(x));
            assert!(run.input_preserved);
        }
    }

    #[test]
    fn circuit_is_reversible_on_random_inputs() {
        let fmt = FixedPointFormat::new(10, 5).unwrap();
        let alpha = fmt.encode(0.125 * 3.0).unwrap();
        let theta = fmt.encode(2.0).unwrap();
        let built = TruncationCircuit::build(fmt, alpha, theta).unwrap();
        for x in (0..fmt.cardinality()).step_by(7) {
            let mut file = built.file.clone();
            file.set(built.x, x);
            assert!(reversibility_check(&built.circuit, &mut file).unwrap());
        }
    }

    #[test]
    fn stats_aggregate_suboracle_counts() {
        let fmt = FixedPointFormat::new(8, 3).unwrap();
        let cost = CostModel::for_width(8);
        let mut circuit =
            TruncationCircuit::build(fmt, fmt.encode(0.25).unwrap(), fmt.encode(2.0).unwrap())
                .unwrap();
        let run = circuit.run(fmt.encode(1.0).unwrap()).unwrap();
        // 4 between queries, 8 controlled add/subs, 1 minmax, 1 controlled
        // xor (k Toffolis); bit nots/cnots are free.
        let expected = 4 * cost.between_count() + 8 * cost.s_add_ctrl + cost.s_minmax + 8;
        assert_eq!(run.stats.toffoli_count, expected);
    }
}
