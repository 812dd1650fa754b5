//! Named bit/word registers forming the simulator's state.

use crate::error::{Error, Result};

use super::format::{FixedPointFormat, Word};

/// Handle to a register within one [`RegisterFile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegId(pub(crate) usize);

#[derive(Debug, Clone)]
struct Register {
    name: String,
    width: u8,
    value: Word,
    must_restore: bool,
}

/// The complete bit-state a circuit acts on. Every op application is a
/// bijection on the concatenation of all register values.
#[derive(Debug, Clone)]
pub struct RegisterFile {
    fmt: FixedPointFormat,
    regs: Vec<Register>,
}

impl RegisterFile {
    pub fn new(fmt: FixedPointFormat) -> Self {
        RegisterFile {
            fmt,
            regs: Vec::new(),
        }
    }

    pub fn format(&self) -> FixedPointFormat {
        self.fmt
    }

    /// Adds a word register of the file's format width.
    pub fn add_word(&mut self, name: &str, init: Word, must_restore: bool) -> Result<RegId> {
        if init & !self.fmt.mask() != 0 {
            return Err(Error::circuit(format!(
                "initial value {init:#x} wider than register {name}"
            )));
        }
        self.regs.push(Register {
            name: name.to_string(),
            width: self.fmt.total_bits(),
            value: init,
            must_restore,
        });
        Ok(RegId(self.regs.len() - 1))
    }

    /// Adds a single-bit register.
    pub fn add_bit(&mut self, name: &str, init: bool, must_restore: bool) -> RegId {
        self.regs.push(Register {
            name: name.to_string(),
            width: 1,
            value: init as Word,
            must_restore,
        });
        RegId(self.regs.len() - 1)
    }

    pub fn get(&self, id: RegId) -> Word {
        self.regs[id.0].value
    }

    pub fn get_bit(&self, id: RegId) -> bool {
        self.regs[id.0].value != 0
    }

    pub(crate) fn set(&mut self, id: RegId, value: Word) {
        let reg = &mut self.regs[id.0];
        debug_assert_eq!(value & !width_mask(reg.width), 0);
        reg.value = value;
    }

    pub fn width(&self, id: RegId) -> u8 {
        self.regs[id.0].width
    }

    pub fn name(&self, id: RegId) -> &str {
        &self.regs[id.0].name
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    /// All register values, in declaration order.
    pub fn snapshot(&self) -> Vec<Word> {
        self.regs.iter().map(|r| r.value).collect()
    }

    pub fn restore(&mut self, snapshot: &[Word]) {
        assert_eq!(snapshot.len(), self.regs.len());
        for (reg, &v) in self.regs.iter_mut().zip(snapshot) {
            reg.value = v;
        }
    }

    /// True when every must-restore register reads zero.
    pub fn ancillas_clean(&self) -> bool {
        self.regs
            .iter()
            .filter(|r| r.must_restore)
            .all(|r| r.value == 0)
    }

    /// Names of dirty must-restore registers, for diagnostics.
    pub fn dirty_ancillas(&self) -> Vec<&str> {
        self.regs
            .iter()
            .filter(|r| r.must_restore && r.value != 0)
            .map(|r| r.name.as_str())
            .collect()
    }
}

pub(crate) fn width_mask(width: u8) -> Word {
    (1u64 << width) - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_restore_round_trip() {
        let fmt = FixedPointFormat::new(6, 2).unwrap();
        let mut file = RegisterFile::new(fmt);
        let a = file.add_word("a", 0b10_1010, false).unwrap();
        let z = file.add_bit("z", true, true);
        let snap = file.snapshot();
        file.set(a, 0b1);
        file.set(z, 0);
        assert!(file.ancillas_clean());
        file.restore(&snap);
        assert_eq!(file.get(a), 0b10_1010);
        assert!(file.get_bit(z));
        assert_eq!(file.dirty_ancillas(), vec!["z"]);
    }

    #[test]
    fn oversized_init_rejected() {
        let fmt = FixedPointFormat::new(4, 0).unwrap();
        let mut file = RegisterFile::new(fmt);
        assert!(file.add_word("a", 0b1_0000, false).is_err());
    }
}
