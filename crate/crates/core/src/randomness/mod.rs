//! Statistical randomness batteries for the compound keystream.
//!
//! [`fips`] holds the four single-block tests of FIPS 140-2 Change Notice 1
//! (20000 bits, fixed acceptance intervals). [`nist`] holds the nine
//! SP 800-22 tests used to characterise the generator, each reporting
//! p-values against significance 0.01.

pub mod fips;
pub mod nist;

use std::fmt;

use crate::chaos::SecretKey;
use crate::cipher::{derive_keystreams, Keystreams};
use crate::error::{CipherError, RandomnessError};

/// An ordered sequence of bits, one per byte (0 or 1).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence {
    bits: Vec<u8>,
}

impl BitSequence {
    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        Self {
            bits: bits.into_iter().map(u8::from).collect(),
        }
    }

    /// Expands bytes most-significant bit first.
    pub fn from_bytes_msb_first(bytes: &[u8]) -> Self {
        let mut bits = Vec::with_capacity(bytes.len() * 8);
        for &b in bytes {
            for k in (0..8).rev() {
                bits.push(b >> k & 1);
            }
        }
        Self { bits }
    }

    /// Parses a string of `0` and `1`; ASCII whitespace is ignored.
    pub fn from_ascii(s: &str) -> Result<Self, RandomnessError> {
        let mut bits = Vec::with_capacity(s.len());
        for (pos, c) in s.char_indices() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_ascii_whitespace() => {}
                c => {
                    return Err(RandomnessError::Parse(format!(
                        "unexpected {c:?} at offset {pos}"
                    )))
                }
            }
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bits as 0/1 bytes.
    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|&b| b ^ 1).collect(),
        }
    }

    pub fn prefix(&self, len: usize) -> Self {
        Self {
            bits: self.bits[..len.min(self.bits.len())].to_vec(),
        }
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSequence({} bits", self.bits.len())?;
        if self.bits.len() <= 64 {
            f.write_str(", ")?;
            for &b in &self.bits {
                f.write_str(if b == 1 { "1" } else { "0" })?;
            }
        }
        f.write_str(")")
    }
}

/// The XOR keystream `s1` of a `width x height` derivation, expanded
/// most-significant bit first: `8 * width * height` bits.
pub fn keystream_bits(
    key: &SecretKey,
    width: usize,
    height: usize,
) -> Result<BitSequence, CipherError> {
    Ok(bits_of(&derive_keystreams(key, width, height)?))
}

pub fn bits_of(ks: &Keystreams) -> BitSequence {
    BitSequence::from_bytes_msb_first(&ks.s1)
}
