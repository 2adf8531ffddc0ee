//! Code definition, construction, encoding and CRC handling.

mod construct;
mod crc;

pub use construct::{
    bhattacharyya_reliability, construct_code, ga_reliability, ConstructionMethod,
    DEFAULT_DESIGN_SNR_DB,
};
pub use crc::{bytes_to_bits, CrcConfig};

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{PolarError, Result};

/// A polar code: block length `2^depth`, `k` information positions (CRC bits
/// included) and an optional CRC over the payload.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    depth: usize,
    frozen: Vec<bool>,
    info_positions: Vec<usize>,
    crc: Option<CrcConfig>,
}

impl PolarCode {
    pub fn new(depth: usize, k: usize, frozen_indices: &[usize]) -> Result<Self> {
        if !(2..=24).contains(&depth) {
            return Err(PolarError::BlockLength(
                1usize.checked_shl(depth as u32).unwrap_or(0),
            ));
        }
        let len = 1usize << depth;
        if k > len || frozen_indices.len() != len - k {
            return Err(PolarError::FrozenSet(format!(
                "expected {} frozen indices for ({len}, {k}), got {}",
                len.saturating_sub(k),
                frozen_indices.len()
            )));
        }
        let mut frozen = vec![false; len];
        for &i in frozen_indices {
            if i >= len {
                return Err(PolarError::FrozenSet(format!("index {i} out of range")));
            }
            if frozen[i] {
                return Err(PolarError::FrozenSet(format!("index {i} repeated")));
            }
            frozen[i] = true;
        }
        let info_positions = (0..len).filter(|&i| !frozen[i]).collect();
        Ok(Self {
            depth,
            frozen,
            info_positions,
            crc: None,
        })
    }

    pub fn with_crc(mut self, crc: CrcConfig) -> Result<Self> {
        crc.validate()?;
        if crc.width as usize >= self.k() {
            return Err(PolarError::Crc(format!(
                "CRC width {} must be below K = {}",
                crc.width,
                self.k()
            )));
        }
        self.crc = Some(crc);
        Ok(self)
    }

    pub fn without_crc(mut self) -> Self {
        self.crc = None;
        self
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.len() as f64
    }

    pub fn crc(&self) -> Option<&CrcConfig> {
        self.crc.as_ref()
    }

    pub fn crc_width(&self) -> usize {
        self.crc.map_or(0, |c| c.width as usize)
    }

    /// Number of user data bits per frame (K minus the CRC width).
    pub fn payload_len(&self) -> usize {
        self.k() - self.crc_width()
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn frozen_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.frozen[i]).collect()
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// `x = u·B_N·F^{⊗n}`. Fails if a frozen position of `u` is nonzero.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.len() {
            return Err(PolarError::Length {
                expected: self.len(),
                got: u.len(),
            });
        }
        if let Some(i) = (0..u.len()).find(|&i| self.frozen[i] && u[i] != 0) {
            return Err(PolarError::NonzeroFrozen(i));
        }
        let mut x = u.to_vec();
        polar_transform(&mut x);
        Ok(x)
    }

    /// Places `payload ∥ CRC(payload)` on the information positions in
    /// increasing index order; frozen positions are zero.
    pub fn map_payload(&self, payload: &[u8]) -> Result<Vec<u8>> {
        if payload.len() != self.payload_len() {
            return Err(PolarError::Length {
                expected: self.payload_len(),
                got: payload.len(),
            });
        }
        let info = match &self.crc {
            Some(c) => c.attach(payload),
            None => payload.to_vec(),
        };
        let mut u = vec![0u8; self.len()];
        for (&pos, &b) in self.info_positions.iter().zip(&info) {
            u[pos] = b;
        }
        Ok(u)
    }

    /// Information bits (payload followed by CRC) read from a u-vector.
    pub fn info_bits(&self, u: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&i| u[i]).collect()
    }

    pub fn payload_of(&self, u: &[u8]) -> Vec<u8> {
        self.info_positions[..self.payload_len()]
            .iter()
            .map(|&i| u[i])
            .collect()
    }

    /// CRC status of a u-vector; `None` when the code carries no CRC.
    pub fn crc_passes(&self, u: &[u8]) -> Option<bool> {
        self.crc.as_ref().map(|c| c.check(&self.info_bits(u)))
    }

    /// Serializes the frozen set: a line `N K`, then the frozen indices in
    /// ascending order, one per line.
    pub fn to_frozen_file_string(&self) -> String {
        let mut s = format!("{} {}\n", self.len(), self.k());
        for i in self.frozen_indices() {
            let _ = writeln!(s, "{i}");
        }
        s
    }

    pub fn from_frozen_file_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| PolarError::Parse("empty file".into()))?;
        let mut fields = header.split_whitespace();
        let mut field = |name: &str| -> Result<usize> {
            fields
                .next()
                .ok_or_else(|| PolarError::Parse(format!("header lacks {name}")))?
                .parse()
                .map_err(|e| PolarError::Parse(format!("{name}: {e}")))
        };
        let len = field("N")?;
        let k = field("K")?;
        if !len.is_power_of_two() || len < 4 {
            return Err(PolarError::BlockLength(len));
        }
        let frozen = lines
            .map(|l| {
                l.parse::<usize>()
                    .map_err(|e| PolarError::Parse(format!("`{l}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if frozen.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PolarError::Parse(
                "frozen indices must be strictly ascending".into(),
            ));
        }
        Self::new(len.trailing_zeros() as usize, k, &frozen)
    }

    pub fn read_frozen_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_frozen_file_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_frozen_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_frozen_file_string())?;
        Ok(())
    }
}

/// In-place `v ← v·B_N·F^{⊗n}` over GF(2) for `v.len() = N = 2^n`.
///
/// This is the map from a node's u-segment to its constituent codeword at any
/// layer of the code tree, and it is its own inverse.
pub fn polar_transform(v: &mut [u8]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in v.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x ^= *y;
            }
        }
        half *= 2;
    }
    let bits = len.trailing_zeros();
    if bits > 0 {
        for i in 0..len {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                v.swap(i, j);
            }
        }
    }
}
