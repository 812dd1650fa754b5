//! Two's-complement fixed-point formats for the reversible simulator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw register storage; registers are at most 24 bits wide.
pub type Word = u64;

/// `total_bits`-wide two's-complement words with `frac_bits` fractional
/// bits, so the representable grid is `[-2^(k-1), 2^(k-1}-1] / 2^f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointFormat {
    total_bits: u8,
    frac_bits: u8,
}

impl FixedPointFormat {
    pub fn new(total_bits: u8, frac_bits: u8) -> Result<Self> {
        if !(2..=24).contains(&total_bits) {
            return Err(Error::circuit(format!(
                "total_bits must lie in [2, 24], got {total_bits}"
            )));
        }
        if frac_bits >= total_bits {
            return Err(Error::circuit(format!(
                "frac_bits {frac_bits} must be < total_bits {total_bits}"
            )));
        }
        Ok(FixedPointFormat {
            total_bits,
            frac_bits,
        })
    }

    pub fn total_bits(&self) -> u8 {
        self.total_bits
    }

    pub fn frac_bits(&self) -> u8 {
        self.frac_bits
    }

    pub fn mask(&self) -> Word {
        (1u64 << self.total_bits) - 1
    }

    pub fn min_int(&self) -> i64 {
        -(1i64 << (self.total_bits - 1))
    }

    pub fn max_int(&self) -> i64 {
        (1i64 << (self.total_bits - 1)) - 1
    }

    /// Number of grid points, `2^k`.
    pub fn cardinality(&self) -> u64 {
        1u64 << self.total_bits
    }

    /// Interprets a masked word as a signed integer.
    pub fn to_signed(&self, w: Word) -> i64 {
        debug_assert_eq!(w & !self.mask(), 0);
        let sign_bit = 1u64 << (self.total_bits - 1);
        if w & sign_bit != 0 {
            (w as i64) - (1i64 << self.total_bits)
        } else {
            w as i64
        }
    }

    /// Encodes a signed integer, rejecting out-of-range values.
    pub fn from_signed(&self, v: i64) -> Result<Word> {
        if v < self.min_int() || v > self.max_int() {
            return Err(Error::circuit(format!(
                "integer {v} not representable in {}-bit format",
                self.total_bits
            )));
        }
        Ok((v as u64) & self.mask())
    }

    /// Encodes a real value that lies exactly on the fixed-point grid.
    pub fn encode(&self, x: f64) -> Result<Word> {
        if !x.is_finite() {
            return Err(Error::circuit("cannot encode non-finite value"));
        }
        let scaled = x * (1u64 << self.frac_bits) as f64;
        if scaled.fract() != 0.0 {
            return Err(Error::circuit(format!(
                "{x} is not on the grid of {} (step {})",
                self.describe(),
                1.0 / (1u64 << self.frac_bits) as f64
            )));
        }
        self.from_signed(scaled as i64)
    }

    /// Exact real value of a word; lossless for k ≤ 24.
    pub fn decode(&self, w: Word) -> f64 {
        self.to_signed(w) as f64 / (1u64 << self.frac_bits) as f64
    }

    pub fn describe(&self) -> String {
        format!("q{}.{}", self.total_bits - self.frac_bits, self.frac_bits)
    }
}
