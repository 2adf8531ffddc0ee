//! Bit-serial CRC over bit vectors.
//!
//! Bits are fed to the register in vector order. A reflected configuration
//! shifts the register right with the bit-reversed polynomial, which is the
//! same as the usual reflected byte-wise CRC when each byte is fed LSB first.
//! The checksum is appended in the order the register emits it: MSB first for
//! a plain CRC, LSB first for a reflected one.

use crate::error::{PolarError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcConfig {
    pub width: u32,
    /// Generator polynomial without the leading `x^width` term.
    pub poly: u64,
    pub init: u64,
    pub reflected: bool,
    pub xor_out: u64,
}

impl CrcConfig {
    /// CRC-8 (poly 0x07, init 0, not reflected).
    pub const CRC8: CrcConfig = CrcConfig {
        width: 8,
        poly: 0x07,
        init: 0x00,
        reflected: false,
        xor_out: 0x00,
    };
    /// CRC-16/CCITT-FALSE.
    pub const CRC16: CrcConfig = CrcConfig {
        width: 16,
        poly: 0x1021,
        init: 0xFFFF,
        reflected: false,
        xor_out: 0x0000,
    };
    /// CRC-24/OPENPGP.
    pub const CRC24: CrcConfig = CrcConfig {
        width: 24,
        poly: 0x86_4CFB,
        init: 0xB7_04CE,
        reflected: false,
        xor_out: 0x00_0000,
    };
    /// The IEEE 802.3 CRC-32.
    pub const CRC32: CrcConfig = CrcConfig {
        width: 32,
        poly: 0x04C1_1DB7,
        init: 0xFFFF_FFFF,
        reflected: true,
        xor_out: 0xFFFF_FFFF,
    };

    pub fn from_width(width: u32) -> Result<Self> {
        match width {
            8 => Ok(Self::CRC8),
            16 => Ok(Self::CRC16),
            24 => Ok(Self::CRC24),
            32 => Ok(Self::CRC32),
            w => Err(PolarError::Crc(format!("no preset for width {w}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![8, 16, 24, 32].contains(&self.width) {
            return Err(PolarError::Crc(format!(
                "width {} not in {{8,16,24,32}}",
                self.width
            )));
        }
        let mask = self.mask();
        if self.poly & !mask != 0 || self.init & !mask != 0 || self.xor_out & !mask != 0 {
            return Err(PolarError::Crc("parameter wider than the register".into()));
        }
        // The implicit x^width term makes the degree equal to the width; the
        // constant term must be present for a proper generator.
        if self.poly & 1 == 0 {
            return Err(PolarError::Crc("polynomial lacks constant term".into()));
        }
        Ok(())
    }

    fn mask(&self) -> u64 {
        if self.width == 64 {
            u64::MAX
        } else {
            (1u64 << self.width) - 1
        }
    }

    /// CRC register value over `bits` (entries must be 0 or 1).
    pub fn checksum(&self, bits: &[u8]) -> u64 {
        let w = self.width;
        let mask = self.mask();
        if self.reflected {
            let poly = reverse_bits(self.poly, w);
            let mut reg = reverse_bits(self.init, w);
            for &b in bits {
                let fb = (reg ^ b as u64) & 1;
                reg >>= 1;
                if fb != 0 {
                    reg ^= poly;
                }
            }
            (reg ^ self.xor_out) & mask
        } else {
            let mut reg = self.init;
            for &b in bits {
                let fb = ((reg >> (w - 1)) ^ b as u64) & 1;
                reg = (reg << 1) & mask;
                if fb != 0 {
                    reg ^= self.poly;
                }
            }
            (reg ^ self.xor_out) & mask
        }
    }

    fn checksum_bits(&self, value: u64) -> impl Iterator<Item = u8> + '_ {
        let w = self.width;
        let reflected = self.reflected;
        (0..w).map(move |i| {
            let shift = if reflected { i } else { w - 1 - i };
            ((value >> shift) & 1) as u8
        })
    }

    /// Returns `payload` followed by its `width` checksum bits.
    pub fn attach(&self, payload: &[u8]) -> Vec<u8> {
        let crc = self.checksum(payload);
        let mut out = Vec::with_capacity(payload.len() + self.width as usize);
        out.extend_from_slice(payload);
        out.extend(self.checksum_bits(crc));
        out
    }

    /// True iff the trailing `width` bits are the checksum of the rest.
    pub fn check(&self, bits: &[u8]) -> bool {
        let w = self.width as usize;
        if bits.len() <= w {
            return false;
        }
        let (payload, tail) = bits.split_at(bits.len() - w);
        let crc = self.checksum(payload);
        self.checksum_bits(crc).zip(tail).all(|(a, &b)| a == b)
    }
}

fn reverse_bits(v: u64, width: u32) -> u64 {
    v.reverse_bits() >> (64 - width)
}

/// Unpacks bytes into bits in the order a CRC of this configuration consumes
/// them (LSB first when reflected).
pub fn bytes_to_bits(bytes: &[u8], lsb_first: bool) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&byte| {
            (0..8).map(move |i| {
                let shift = if lsb_first { i } else { 7 - i };
                (byte >> shift) & 1
            })
        })
        .collect()
}
