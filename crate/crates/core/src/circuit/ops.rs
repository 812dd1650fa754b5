//! The reversible op set, modeled gate costs, and circuit composition.
//!
//! Ops execute bit-exactly on a [`RegisterFile`]; every application is a
//! bijection on the full register state. Toffoli counts and depths are
//! modeled tallies taken from the comparison/addition circuit figures, not
//! gate-level synthesis; the constants are configurable because the real
//! figures depend on the comparator architecture.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::format::Word;
use super::registers::{RegId, RegisterFile};

/// Modeled Toffoli tally; additive over composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateStats {
    pub toffoli_count: u64,
    pub toffoli_depth: u64,
}

impl GateStats {
    pub fn zero() -> Self {
        GateStats::default()
    }

    pub fn accumulate(&mut self, other: GateStats) {
        self.toffoli_count += other.toffoli_count;
        self.toffoli_depth += other.toffoli_depth;
    }
}

/// Per-primitive Toffoli figures for a `k`-bit word format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    /// Comparison oracle, default `2k-1`.
    pub s_comp: u64,
    /// Controlled comparison, default `2k+1`.
    pub s_comp_ctrl: u64,
    /// Minmax oracle, default `2k-1`.
    pub s_minmax: u64,
    /// In-place addition/subtraction, default `2k-1`.
    pub s_add: u64,
    /// Controlled addition/subtraction, default `2k+1`.
    pub s_add_ctrl: u64,
    /// Word width the model was derived for.
    pub k: u8,
}

impl CostModel {
    pub fn for_width(k: u8) -> Self {
        let k64 = k as u64;
        CostModel {
            s_comp: 2 * k64 - 1,
            s_comp_ctrl: 2 * k64 + 1,
            s_minmax: 2 * k64 - 1,
            s_add: 2 * k64 - 1,
            s_add_ctrl: 2 * k64 + 1,
            k,
        }
    }

    /// Between oracle count: `⌈1.5·s_comp⌉ + s'_comp`.
    pub fn between_count(&self) -> u64 {
        (3 * self.s_comp).div_ceil(2) + self.s_comp_ctrl
    }
}

/// One reversible primitive. Bit registers are width 1, word registers
/// carry the file's fixed-point format; `ctrl` fields are bit registers
/// gating the whole op.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReversibleOp {
    /// `z ^= [x < a]` (signed comparison).
    Compare { x: RegId, a: RegId, z: RegId },
    /// `z ^= c · [x < a]`.
    CompareCtrl {
        c: RegId,
        x: RegId,
        a: RegId,
        z: RegId,
    },
    /// `z ^= [a ≤ x ≤ b]` (closed interval, signed). Requires `a ≤ b`.
    Between {
        a: RegId,
        b: RegId,
        x: RegId,
        z: RegId,
    },
    /// `out ^= max(x, 0)` when `c = 1`, `out ^= min(x, 0)` when `c = 0`.
    MinMax { c: RegId, x: RegId, out: RegId },
    /// `dst += src (mod 2^k)`.
    AddReg {
        src: RegId,
        dst: RegId,
        ctrl: Option<RegId>,
    },
    /// `dst -= src (mod 2^k)`.
    SubReg {
        src: RegId,
        dst: RegId,
        ctrl: Option<RegId>,
    },
    /// `dst ^= src`.
    XorReg {
        src: RegId,
        dst: RegId,
        ctrl: Option<RegId>,
    },
    /// Bit CNOT: `t ^= c`.
    CnotBit { c: RegId, t: RegId },
    /// Bit NOT: `t ^= 1`.
    NotBit { t: RegId },
    /// Exchanges two equal-width registers.
    Swap { r1: RegId, r2: RegId },
}

impl ReversibleOp {
    /// The op that undoes this one.
    pub fn inverse(self) -> ReversibleOp {
        match self {
            ReversibleOp::AddReg { src, dst, ctrl } => ReversibleOp::SubReg { src, dst, ctrl },
            ReversibleOp::SubReg { src, dst, ctrl } => ReversibleOp::AddReg { src, dst, ctrl },
            // Everything else is an involution.
            other => other,
        }
    }

    fn expect_bit(file: &RegisterFile, id: RegId, role: &str) -> Result<()> {
        if file.width(id) != 1 {
            return Err(Error::circuit(format!(
                "{role} register {} must be one bit wide",
                file.name(id)
            )));
        }
        Ok(())
    }

    fn expect_word(file: &RegisterFile, id: RegId, role: &str) -> Result<()> {
        if file.width(id) != file.format().total_bits() {
            return Err(Error::circuit(format!(
                "{role} register {} must be word wide",
                file.name(id)
            )));
        }
        Ok(())
    }

    fn ctrl_active(file: &RegisterFile, ctrl: Option<RegId>) -> Result<bool> {
        match ctrl {
            None => Ok(true),
            Some(c) => {
                Self::expect_bit(file, c, "control")?;
                Ok(file.get_bit(c))
            }
        }
    }

    /// Applies the op, returning its modeled cost.
    pub fn apply(&self, file: &mut RegisterFile, cost: &CostModel) -> Result<GateStats> {
        let fmt = file.format();
        let k = fmt.total_bits() as u64;
        let stats = |count: u64, depth: u64| GateStats {
            toffoli_count: count,
            toffoli_depth: depth,
        };
        match *self {
            ReversibleOp::Compare { x, a, z } => {
                Self::expect_word(file, x, "compare x")?;
                Self::expect_word(file, a, "compare a")?;
                Self::expect_bit(file, z, "compare z")?;
                let flag = fmt.to_signed(file.get(x)) < fmt.to_signed(file.get(a));
                file.set(z, file.get(z) ^ flag as Word);
                Ok(stats(cost.s_comp, k))
            }
            ReversibleOp::CompareCtrl { c, x, a, z } => {
                Self::expect_bit(file, c, "compare control")?;
                Self::expect_word(file, x, "compare x")?;
                Self::expect_word(file, a, "compare a")?;
                Self::expect_bit(file, z, "compare z")?;
                if c == z {
                    return Err(Error::circuit("controlled compare needs distinct c and z"));
                }
                let flag =
                    file.get_bit(c) && fmt.to_signed(file.get(x)) < fmt.to_signed(file.get(a));
                file.set(z, file.get(z) ^ flag as Word);
                Ok(stats(cost.s_comp_ctrl, k))
            }
            ReversibleOp::Between { a, b, x, z } => {
                Self::expect_word(file, a, "between a")?;
                Self::expect_word(file, b, "between b")?;
                Self::expect_word(file, x, "between x")?;
                Self::expect_bit(file, z, "between z")?;
                let lo = fmt.to_signed(file.get(a));
                let hi = fmt.to_signed(file.get(b));
                if lo > hi {
                    return Err(Error::circuit(format!(
                        "between oracle requires a <= b, got {lo} > {hi}"
                    )));
                }
                let v = fmt.to_signed(file.get(x));
                let flag = lo <= v && v <= hi;
                file.set(z, file.get(z) ^ flag as Word);
                Ok(stats(cost.between_count(), 2 * k))
            }
            ReversibleOp::MinMax { c, x, out } => {
                Self::expect_bit(file, c, "minmax selector")?;
                Self::expect_word(file, x, "minmax x")?;
                Self::expect_word(file, out, "minmax out")?;
                if x == out {
                    return Err(Error::circuit("minmax needs distinct x and out"));
                }
                let v = fmt.to_signed(file.get(x));
                let result = if file.get_bit(c) { v.max(0) } else { v.min(0) };
                let word = (result as u64) & fmt.mask();
                file.set(out, file.get(out) ^ word);
                Ok(stats(cost.s_minmax, k))
            }
            ReversibleOp::AddReg { src, dst, ctrl } => {
                Self::expect_word(file, src, "add src")?;
                Self::expect_word(file, dst, "add dst")?;
                if src == dst {
                    return Err(Error::circuit("add source and destination must differ"));
                }
                let (count, depth) = if ctrl.is_some() {
                    (cost.s_add_ctrl, k)
                } else {
                    (cost.s_add, k)
                };
                if Self::ctrl_active(file, ctrl)? {
                    let sum = file.get(dst).wrapping_add(file.get(src)) & fmt.mask();
                    file.set(dst, sum);
                }
                Ok(stats(count, depth))
            }
            ReversibleOp::SubReg { src, dst, ctrl } => {
                Self::expect_word(file, src, "sub src")?;
                Self::expect_word(file, dst, "sub dst")?;
                if src == dst {
                    return Err(Error::circuit("sub source and destination must differ"));
                }
                let (count, depth) = if ctrl.is_some() {
                    (cost.s_add_ctrl, k)
                } else {
                    (cost.s_add, k)
                };
                if Self::ctrl_active(file, ctrl)? {
                    let diff = file.get(dst).wrapping_sub(file.get(src)) & fmt.mask();
                    file.set(dst, diff);
                }
                Ok(stats(count, depth))
            }
            ReversibleOp::XorReg { src, dst, ctrl } => {
                Self::expect_word(file, src, "xor src")?;
                Self::expect_word(file, dst, "xor dst")?;
                if src == dst {
                    return Err(Error::circuit("xor source and destination must differ"));
                }
                let (count, depth) = if ctrl.is_some() { (k, 1) } else { (0, 0) };
                if Self::ctrl_active(file, ctrl)? {
                    file.set(dst, file.get(dst) ^ file.get(src));
                }
                Ok(stats(count, depth))
            }
            ReversibleOp::CnotBit { c, t } => {
                Self::expect_bit(file, c, "cnot control")?;
                Self::expect_bit(file, t, "cnot target")?;
                if c == t {
                    return Err(Error::circuit("cnot control and target must differ"));
                }
                file.set(t, file.get(t) ^ file.get(c));
                Ok(stats(0, 0))
            }
            ReversibleOp::NotBit { t } => {
                Self::expect_bit(file, t, "not target")?;
                file.set(t, file.get(t) ^ 1);
                Ok(stats(0, 0))
            }
            ReversibleOp::Swap { r1, r2 } => {
                if file.width(r1) != file.width(r2) {
                    return Err(Error::circuit("swap requires equal register widths"));
                }
                let (a, b) = (file.get(r1), file.get(r2));
                file.set(r1, b);
                file.set(r2, a);
                Ok(stats(0, 0))
            }
        }
    }
}

/// An ordered op sequence.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    ops: Vec<ReversibleOp>,
}

impl Circuit {
    pub fn new() -> Self {
        Circuit::default()
    }

    pub fn push(&mut self, op: ReversibleOp) {
        self.ops.push(op);
    }

    pub fn ops(&self) -> &[ReversibleOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// The gate-level inverse: reversed order, each op inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            ops: self.ops.iter().rev().map(|op| op.inverse()).collect(),
        }
    }

    /// Runs all ops in order, accumulating stats.
    pub fn run(&self, file: &mut RegisterFile, cost: &CostModel) -> Result<GateStats> {
        let mut stats = GateStats::zero();
        for op in &self.ops {
            stats.accumulate(op.apply(file, cost)?);
        }
        Ok(stats)
    }
}

/// Runs `circuit` then its inverse and reports whether the full register
/// state returned to the starting bit-state.
pub fn reversibility_check(circuit: &Circuit, file: &mut RegisterFile) -> Result<bool> {
    let cost = CostModel::for_width(file.format().total_bits());
    let before = file.snapshot();
    circuit.run(file, &cost)?;
    circuit.inverse().run(file, &cost)?;
    let after = file.snapshot();
    Ok(before == after)
}

/// Builds a random circuit over a small register file: a handful of word
/// and bit registers plus two ordered constant words for between oracles.
/// Used by the reversibility harness and tests.
pub fn random_circuit<R: Rng + ?Sized>(
    file: &mut RegisterFile,
    n_ops: usize,
    rng: &mut R,
) -> Result<Circuit> {
    let fmt = file.format();
    let mask = fmt.mask();
    let words: Vec<RegId> = (0..4)
        .map(|i| file.add_word(&format!("w{i}"), rng.random_range(0..=mask), false))
        .collect::<Result<Vec<_>>>()?;
    let lo = file.add_word("lo", fmt.from_signed(fmt.min_int() / 2)?, false)?;
    let hi = file.add_word("hi", fmt.from_signed(fmt.max_int() / 2)?, false)?;
    let bits: Vec<RegId> = (0..3)
        .map(|i| file.add_bit(&format!("b{i}"), rng.random_bool(0.5), false))
        .collect();

    let mut circuit = Circuit::new();
    for _ in 0..n_ops {
        let pick = |rng: &mut R, ids: &[RegId]| ids[rng.random_range(0..ids.len())];
        let pick2 = |rng: &mut R, ids: &[RegId]| {
            let a = rng.random_range(0..ids.len());
            let mut b = rng.random_range(0..ids.len() - 1);
            if b >= a {
                b += 1;
            }
            (ids[a], ids[b])
        };
        let maybe_ctrl = |rng: &mut R, bits: &[RegId]| {
            if rng.random_bool(0.5) {
                Some(pick(rng, bits))
            } else {
                None
            }
        };
        let op = match rng.random_range(0..9u32) {
            0 => ReversibleOp::Compare {
                x: pick(rng, &words),
                a: pick(rng, &words),
                z: pick(rng, &bits),
            },
            1 => {
                let (c, z) = pick2(rng, &bits);
                ReversibleOp::CompareCtrl {
                    c,
                    x: pick(rng, &words),
                    a: pick(rng, &words),
                    z,
                }
            }
            2 => ReversibleOp::Between {
                a: lo,
                b: hi,
                x: pick(rng, &words),
                z: pick(rng, &bits),
            },
            3 => {
                let (x, out) = pick2(rng, &words);
                ReversibleOp::MinMax {
                    c: pick(rng, &bits),
                    x,
                    out,
                }
            }
            4 => {
                let (src, dst) = pick2(rng, &words);
                ReversibleOp::AddReg {
                    src,
                    dst,
                    ctrl: maybe_ctrl(rng, &bits),
                }
            }
            5 => {
                let (src, dst) = pick2(rng, &words);
                ReversibleOp::SubReg {
                    src,
                    dst,
                    ctrl: maybe_ctrl(rng, &bits),
                }
            }
            6 => {
                let (src, dst) = pick2(rng, &words);
                ReversibleOp::XorReg {
                    src,
                    dst,
                    ctrl: maybe_ctrl(rng, &bits),
                }
            }
            7 => {
                let (c, t) = pick2(rng, &bits);
                ReversibleOp::CnotBit { c, t }
            }
            _ => {
                let (r1, r2) = pick2(rng, &words);
                ReversibleOp::Swap { r1, r2 }
            }
        };
        circuit.push(op);
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::format::FixedPointFormat;
    use crate::circuit::registers::width_mask;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn file(k: u8) -> RegisterFile {
        RegisterFile::new(FixedPointFormat::new(k, 0).unwrap())
    }

    #[test]
    fn compare_sets_flag_for_signed_less_than() {
        let mut f = file(4);
        let x = f.add_word("x", 0b0011, false).unwrap();
        let a = f.add_word("a", 0b0100, false).unwrap();
        let z = f.add_bit("z", false, false);
        let cost = CostModel::for_width(4);
        ReversibleOp::Compare { x, a, z }
            .apply(&mut f, &cost)
            .unwrap();
        assert!(f.get_bit(z)); // 3 < 4
                               // Applying twice clears the flag (XOR involution).
        ReversibleOp::Compare { x, a, z }
            .apply(&mut f, &cost)
            .unwrap();
        assert!(!f.get_bit(z));
    }

    #[test]
    fn controlled_compare_gates_on_the_control() {
        let fmt = FixedPointFormat::new(5, 0).unwrap();
        let cost = CostModel::for_width(5);
        for c_val in [false, true] {
            let mut f = RegisterFile::new(fmt);
            let c = f.add_bit("c", c_val, false);
            let x = f
                .add_word("x", fmt.from_signed(-2).unwrap(), false)
                .unwrap();
            let a = f.add_word("a", fmt.from_signed(3).unwrap(), false).unwrap();
            let z = f.add_bit("z", false, false);
            let stats = ReversibleOp::CompareCtrl { c, x, a, z }
                .apply(&mut f, &cost)
                .unwrap();
            assert_eq!(f.get_bit(z), c_val); // -2 < 3, flag only when controlled
            assert_eq!(stats.toffoli_count, cost.s_comp_ctrl);
        }
    }

    #[test]
    fn compare_is_strict() {
        let mut f = file(4);
        let x = f.add_word("x", 0b0101, false).unwrap();
        let a = f.add_word("a", 0b0101, false).unwrap();
        let z = f.add_bit("z", false, false);
        ReversibleOp::Compare { x, a, z }
            .apply(&mut f, &CostModel::for_width(4))
            .unwrap();
        assert!(!f.get_bit(z));
    }

    #[test]
    fn exhaustive_compare_matches_signed_comparison() {
        let fmt = FixedPointFormat::new(6, 0).unwrap();
        let cost = CostModel::for_width(6);
        for xv in 0..fmt.cardinality() {
            for av in 0..fmt.cardinality() {
                let mut f = RegisterFile::new(fmt);
                let x = f.add_word("x", xv, false).unwrap();
                let a = f.add_word("a", av, false).unwrap();
                let z = f.add_bit("z", false, false);
                ReversibleOp::Compare { x, a, z }
                    .apply(&mut f, &cost)
                    .unwrap();
                let expected = fmt.to_signed(xv) < fmt.to_signed(av);
                assert_eq!(f.get_bit(z), expected, "x={xv} a={av}");
                assert_eq!(f.get(x), xv);
                assert_eq!(f.get(a), av);
            }
        }
    }

    #[test]
    fn exhaustive_between_matches_interval_predicate() {
        let fmt = FixedPointFormat::new(5, 0).unwrap();
        let cost = CostModel::for_width(5);
        for av in 0..fmt.cardinality() {
            for bv in 0..fmt.cardinality() {
                if fmt.to_signed(av) > fmt.to_signed(bv) {
                    continue;
                }
                for xv in 0..fmt.cardinality() {
                    let mut f = RegisterFile::new(fmt);
                    let a = f.add_word("a", av, false).unwrap();
                    let b = f.add_word("b", bv, false).unwrap();
                    let x = f.add_word("x", xv, false).unwrap();
                    let z = f.add_bit("z", false, false);
                    ReversibleOp::Between { a, b, x, z }
                        .apply(&mut f, &cost)
                        .unwrap();
                    let (lo, hi, v) = (fmt.to_signed(av), fmt.to_signed(bv), fmt.to_signed(xv));
                    assert_eq!(f.get_bit(z), lo <= v && v <= hi);
                }
            }
        }
    }

    #[test]
    fn between_boundaries_are_closed_and_order_checked() {
        let fmt = FixedPointFormat::new(5, 0).unwrap();
        let cost = CostModel::for_width(5);
        let mut f = RegisterFile::new(fmt);
        let a = f.add_word("a", fmt.from_signed(0).unwrap(), false).unwrap();
        let b = f.add_word("b", fmt.from_signed(4).unwrap(), false).unwrap();
        let x = f.add_word("x", fmt.from_signed(4).unwrap(), false).unwrap();
        let z = f.add_bit("z", false, false);
        ReversibleOp::Between { a, b, x, z }
            .apply(&mut f, &cost)
            .unwrap();
        assert!(f.get_bit(z)); // closed at the upper end

        let mut f = RegisterFile::new(fmt);
        let a = f.add_word("a", fmt.from_signed(1).unwrap(), false).unwrap();
        let b = f.add_word("b", fmt.from_signed(3).unwrap(), false).unwrap();
        let x = f.add_word("x", fmt.from_signed(0).unwrap(), false).unwrap();
        let z = f.add_bit("z", false, false);
        ReversibleOp::Between { a, b, x, z }
            .apply(&mut f, &cost)
            .unwrap();
        assert!(!f.get_bit(z));

        let mut f = RegisterFile::new(fmt);
        let a = f.add_word("a", fmt.from_signed(3).unwrap(), false).unwrap();
        let b = f.add_word("b", fmt.from_signed(1).unwrap(), false).unwrap();
        let x = f.add_word("x", 0, false).unwrap();
        let z = f.add_bit("z", false, false);
        assert!(ReversibleOp::Between { a, b, x, z }
            .apply(&mut f, &cost)
            .is_err());
    }

    #[test]
    fn exhaustive_minmax_both_selectors() {
        let fmt = FixedPointFormat::new(8, 0).unwrap();
        let cost = CostModel::for_width(8);
        for c_val in [false, true] {
            for xv in 0..fmt.cardinality() {
                let mut f = RegisterFile::new(fmt);
                let c = f.add_bit("c", c_val, false);
                let x = f.add_word("x", xv, false).unwrap();
                let out = f.add_word("out", 0, false).unwrap();
                ReversibleOp::MinMax { c, x, out }
                    .apply(&mut f, &cost)
                    .unwrap();
                let v = fmt.to_signed(xv);
                let expected = if c_val { v.max(0) } else { v.min(0) };
                assert_eq!(fmt.to_signed(f.get(out)), expected, "c={c_val} x={v}");
            }
        }
    }

    #[test]
    fn minmax_reference_points() {
        let fmt = FixedPointFormat::new(6, 0).unwrap();
        let cost = CostModel::for_width(6);
        for (c_val, expected) in [(true, 0i64), (false, -3i64)] {
            let mut f = RegisterFile::new(fmt);
            let c = f.add_bit("c", c_val, false);
            let x = f
                .add_word("x", fmt.from_signed(-3).unwrap(), false)
                .unwrap();
            let out = f.add_word("out", 0, false).unwrap();
            ReversibleOp::MinMax { c, x, out }
                .apply(&mut f, &cost)
                .unwrap();
            assert_eq!(fmt.to_signed(f.get(out)), expected);
        }
    }

    /// Runs `op` on every full register state and checks the map is a
    /// permutation.
    fn assert_bijective(k: u8, build: impl Fn(&mut RegisterFile) -> ReversibleOp, state_bits: u32) {
        let fmt = FixedPointFormat::new(k, 0).unwrap();
        let cost = CostModel::for_width(k);
        let states = 1u64 << state_bits;
        let mut seen = vec![false; states as usize];
        for s in 0..states {
            let mut f = RegisterFile::new(fmt);
            let op = build(&mut f);
            // Distribute the state bits over the registers in order.
            let mut acc = s;
            let widths: Vec<u8> = (0..f.len()).map(|i| f.width(RegId(i))).collect();
            for (i, w) in widths.iter().enumerate() {
                f.set(RegId(i), acc & width_mask(*w));
                acc >>= w;
            }
            op.apply(&mut f, &cost).unwrap();
            let mut out = 0u64;
            let mut shift = 0u32;
            for (i, w) in widths.iter().enumerate() {
                out |= f.get(RegId(i)) << shift;
                shift += *w as u32;
            }
            assert!(!seen[out as usize], "state collision at input {s}");
            seen[out as usize] = true;
        }
    }

    #[test]
    fn single_oracles_are_permutations_of_the_full_state() {
        assert_bijective(
            6,
            |f| {
                let x = f.add_word("x", 0, false).unwrap();
                let a = f.add_word("a", 0, false).unwrap();
                let z = f.add_bit("z", false, false);
                ReversibleOp::Compare { x, a, z }
            },
            13,
        );
        assert_bijective(
            5,
            |f| {
                let c = f.add_bit("c", false, false);
                let x = f.add_word("x", 0, false).unwrap();
                let out = f.add_word("out", 0, false).unwrap();
                ReversibleOp::MinMax { c, x, out }
            },
            11,
        );
        assert_bijective(
            5,
            |f| {
                let src = f.add_word("src", 0, false).unwrap();
                let dst = f.add_word("dst", 0, false).unwrap();
                ReversibleOp::AddReg {
                    src,
                    dst,
                    ctrl: None,
                }
            },
            10,
        );
    }

    #[test]
    fn empty_circuit_is_identity() {
        let fmt = FixedPointFormat::new(6, 0).unwrap();
        let mut f = RegisterFile::new(fmt);
        f.add_word("x", 0b101, false).unwrap();
        assert!(reversibility_check(&Circuit::new(), &mut f).unwrap());
    }

    #[test]
    fn random_circuits_invert_cleanly() {
        let mut rng = ChaCha12Rng::seed_from_u64(4242);
        for _ in 0..100 {
            let fmt = FixedPointFormat::new(8, 0).unwrap();
            let mut f = RegisterFile::new(fmt);
            let circuit = random_circuit(&mut f, 40, &mut rng).unwrap();
            assert!(reversibility_check(&circuit, &mut f).unwrap());
        }
    }

    #[test]
    fn stats_are_additive_and_between_matches_formula() {
        for k in 4..=16u8 {
            let cost = CostModel::for_width(k);
            let expected = (3 * (2 * k as u64 - 1)).div_ceil(2) + 2 * k as u64 + 1;
            assert_eq!(cost.between_count(), expected);
        }

        let fmt = FixedPointFormat::new(6, 0).unwrap();
        let cost = CostModel::for_width(6);
        let mut f = RegisterFile::new(fmt);
        let x = f.add_word("x", 3, false).unwrap();
        let a = f.add_word("a", 9, false).unwrap();
        let z = f.add_bit("z", false, false);
        let mut circuit = Circuit::new();
        circuit.push(ReversibleOp::Compare { x, a, z });
        circuit.push(ReversibleOp::Compare { x, a, z });
        circuit.push(ReversibleOp::AddReg {
            src: x,
            dst: a,
            ctrl: None,
        });
        let stats = circuit.run(&mut f, &cost).unwrap();
        assert_eq!(stats.toffoli_count, cost.s_comp * 2 + cost.s_add);
        assert_eq!(stats.toffoli_depth, 6 * 3);
    }
}
