//! Compute module behind the sense amplifier: logic derived from the sensed
//! (AND, NOR) pair, the per-bit full adder and ripple-carry word addition.

use serde::{Deserialize, Serialize};

use crate::array::DualRowSense;
use crate::error::{Error, Result};
use crate::sensing::SenseResult;

/// Gates per bit beyond the sense amplifier: two inverters and a NOR for the
/// derived logic, XOR + AND + OR for the adder.
pub const LOGIC_GATES_PER_BIT: usize = 3;
pub const ADDER_GATES_PER_BIT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ComputeOutputs {
    pub and_: bool,
    pub nor_: bool,
    pub nand_: bool,
    pub or_: bool,
    pub xor_: bool,
    pub xnor_: bool,
    pub sum: bool,
    pub cout: bool,
}

fn derive_at(out1: bool, out2: bool, column: usize) -> Result<ComputeOutputs> {
    if out1 && out2 {
        return Err(Error::InconsistentSense { column });
    }
    let xor_ = !(out1 || out2);
    Ok(ComputeOutputs {
        and_: out1,
        nor_: out2,
        nand_: !out1,
        or_: !out2,
        xor_,
        xnor_: !xor_,
        ..ComputeOutputs::default()
    })
}

/// Fills the logic fields from OUT1 = AND and OUT2 = NOR.
pub fn derive_logics(out1: bool, out2: bool) -> Result<ComputeOutputs> {
    derive_at(out1, out2, 0)
}

/// sum = xor ⊕ cin, cout = and ∨ (xor ∧ cin).
pub fn full_adder_bit(and_: bool, xor_: bool, cin: bool) -> (bool, bool) {
    (xor_ ^ cin, and_ || (xor_ && cin))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AddResult {
    pub sum: u64,
    pub carry_out: bool,
    /// Per column, LSB first.
    pub columns: Vec<ComputeOutputs>,
}

/// Ripple-carry over sensed (AND, NOR) results, column 0 = LSB.
pub fn add_sensed(results: &[SenseResult], cin: bool) -> Result<AddResult> {
    if results.len() > 64 {
        return Err(Error::InvalidInput("words wider than 64 bits are not supported".into()));
    }
    let mut carry = cin;
    let mut sum = 0u64;
    let mut columns = Vec::with_capacity(results.len());
    for (k, r) in results.iter().enumerate() {
        let out2 = r.out2.ok_or(Error::InconsistentSense { column: k })?;
        let mut c = derive_at(r.out1, out2, k)?;
        let (s, co) = full_adder_bit(c.and_, c.xor_, carry);
        c.sum = s;
        c.cout = co;
        if s {
            sum |= 1 << k;
        }
        carry = co;
        columns.push(c);
    }
    Ok(AddResult { sum, carry_out: carry, columns })
}

/// Adds the words stored in two rows with a single two-row access.
pub fn add_words<S: DualRowSense + ?Sized>(
    sensor: &mut S,
    row_x: usize,
    row_y: usize,
    word: usize,
    cin: bool,
) -> Result<AddResult> {
    let results = sensor.sense_and_nor(row_x, row_y, word)?;
    if results.len() != sensor.word_bits() {
        return Err(Error::InvalidInput("sensor returned a partial word".into()));
    }
    add_sensed(&results, cin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_identities() {
        for (o1, o2) in [(false, false), (true, false), (false, true)] {
            let c = derive_logics(o1, o2).unwrap();
            assert_eq!(c.nand_, !c.and_);
            assert_eq!(c.or_, !c.nor_);
            assert_eq!(c.xor_, !(c.and_ || c.nor_));
            assert_eq!(c.xnor_, !c.xor_);
        }
        let c = derive_logics(false, false).unwrap();
        assert!(c.xor_);
        let c = derive_logics(true, false).unwrap();
        assert!(!c.nand_ && c.or_ && !c.xor_);
        let c = derive_logics(false, true).unwrap();
        assert!(!c.or_ && c.xnor_);
        assert_eq!(derive_logics(true, true), Err(Error::InconsistentSense { column: 0 }));
    }

    #[test]
    fn full_adder_truth_table() {
        for x in [false, true] {
            for y in [false, true] {
                for cin in [false, true] {
                    let (s, co) = full_adder_bit(x && y, x ^ y, cin);
                    let total = x as u8 + y as u8 + cin as u8;
                    assert_eq!((s, co), (total & 1 == 1, total >= 2));
                }
            }
        }
    }

    // The mock only exposes sense results; stored operands stay private.
    struct MockSensor {
        words: Vec<u64>,
        bits: usize,
        calls: usize,
    }

    impl DualRowSense for MockSensor {
        fn word_bits(&self) -> usize {
            self.bits
        }

        fn sense_and_nor(&mut self, x: usize, y: usize, _word: usize) -> Result<Vec<SenseResult>> {
            self.calls += 1;
            let (a, b) = (self.words[x], self.words[y]);
            Ok((0..self.bits)
                .map(|k| {
                    let (p, q) = (a >> k & 1 == 1, b >> k & 1 == 1);
                    SenseResult { out1: p && q, out2: Some(!(p || q)), margin: 1.0, marginal: false }
                })
                .collect())
        }
    }

    #[test]
    fn adds_through_the_sense_boundary() {
        let mut s = MockSensor { words: vec![0xFFFF_FFFF, 1, 0, 0x1234_5678], bits: 32, calls: 0 };
        let r = add_words(&mut s, 0, 1, 0, false).unwrap();
        assert_eq!((r.sum, r.carry_out), (0, true));
        let r = add_words(&mut s, 2, 2, 0, false).unwrap();
        assert_eq!((r.sum, r.carry_out), (0, false));
        let r = add_words(&mut s, 3, 0, 0, true).unwrap();
        assert_eq!(r.sum, (0x1234_5678u64 + 0xFFFF_FFFF + 1) & 0xFFFF_FFFF);
        assert!(r.carry_out);
        assert_eq!(s.calls, 3);
    }

    #[test]
    fn faults_carry_the_column() {
        let ok = SenseResult { out1: false, out2: Some(true), margin: 1.0, marginal: false };
        let bad = SenseResult { out1: true, out2: Some(true), ..ok };
        assert_eq!(add_sensed(&[ok, ok, bad], false), Err(Error::InconsistentSense { column: 2 }));
        let missing = SenseResult { out2: None, ..ok };
        assert_eq!(add_sensed(&[missing], false), Err(Error::InconsistentSense { column: 0 }));
    }
}
