//! Bit-exact simulation of the reversible fixed-point oracles behind the
//! truncation update: comparison, controlled comparison, between, minmax,
//! and the composed truncation circuit, with ancilla-cleanliness checks
//! and modeled Toffoli accounting.

mod format;
mod ops;
mod registers;
mod truncation;

pub use format::{FixedPointFormat, Word};
pub use ops::{random_circuit, reversibility_check, Circuit, CostModel, GateStats, ReversibleOp};
pub use registers::{RegId, RegisterFile};
pub use truncation::{truncation_circuit, TruncationCircuit, TruncationRun};

use crate::error::Result;

/// One-shot comparison oracle: returns `z ⊕ [x < a]` (signed) and the
/// modeled cost. `x` and `a` are format-width words.
pub fn compare_oracle(
    fmt: FixedPointFormat,
    x: Word,
    a: Word,
    z: bool,
) -> Result<(bool, GateStats)> {
    let cost = CostModel::for_width(fmt.total_bits());
    let mut file = RegisterFile::new(fmt);
    let xr = file.add_word("x", x, false)?;
    let ar = file.add_word("a", a, false)?;
    let zr = file.add_bit("z", z, false);
    let stats = ReversibleOp::Compare {
        x: xr,
        a: ar,
        z: zr,
    }
    .apply(&mut file, &cost)?;
    Ok((file.get_bit(zr), stats))
}

/// One-shot between oracle: returns `z ⊕ [x ∈ [a, b]]` (closed interval,
/// signed). Requires `a ≤ b`.
pub fn between_oracle(
    fmt: FixedPointFormat,
    a: Word,
    b: Word,
    x: Word,
    z: bool,
) -> Result<(bool, GateStats)> {
    let cost = CostModel::for_width(fmt.total_bits());
    let mut file = RegisterFile::new(fmt);
    let ar = file.add_word("a", a, false)?;
    let br = file.add_word("b", b, false)?;
    let xr = file.add_word("x", x, false)?;
    let zr = file.add_bit("z", z, false);
    let stats = ReversibleOp::Between {
        a: ar,
        b: br,
        x: xr,
        z: zr,
    }
    .apply(&mut file, &cost)?;
    Ok((file.get_bit(zr), stats))
}

/// One-shot minmax oracle on a fresh zero output register: returns
/// `max(x, 0)` when `c` is set, `min(x, 0)` otherwise.
pub fn minmax_oracle(fmt: FixedPointFormat, c: bool, x: Word) -> Result<(Word, GateStats)> {
    let cost = CostModel::for_width(fmt.total_bits());
    let mut file = RegisterFile::new(fmt);
    let cr = file.add_bit("c", c, false);
    let xr = file.add_word("x", x, false)?;
    let out = file.add_word("out", 0, false)?;
    let stats = ReversibleOp::MinMax { c: cr, x: xr, out }.apply(&mut file, &cost)?;
    Ok((file.get(out), stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_shot_wrappers_match_op_semantics() {
        let fmt = FixedPointFormat::new(6, 0).unwrap();
        let three = fmt.from_signed(3).unwrap();
        let four = fmt.from_signed(4).unwrap();
        let (z, stats) = compare_oracle(fmt, three, four, false).unwrap();
        assert!(z);
        assert_eq!(stats.toffoli_count, 2 * 6 - 1);

        let (z, _) = between_oracle(fmt, fmt.from_signed(0).unwrap(), four, four, false).unwrap();
        assert!(z);

        let neg3 = fmt.from_signed(-3).unwrap();
        let (out, _) = minmax_oracle(fmt, true, neg3).unwrap();
        assert_eq!(fmt.to_signed(out), 0);
        let (out, _) = minmax_oracle(fmt, false, neg3).unwrap();
        assert_eq!(fmt.to_signed(out), -3);
    }
}
